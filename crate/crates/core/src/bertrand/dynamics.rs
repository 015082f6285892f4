use std::collections::HashMap;

use super::{best_response, best_response_numeric, snap_to_grid, BestResponse, Branch};
use crate::error::{invalid, Result};
use crate::market::{MarketParams, Operator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub initial_price_i: f64,
    pub initial_price_j: f64,
    pub first_mover: Operator,
    pub max_moves: usize,
    /// Use the grid-search best response instead of the closed form.
    pub numeric: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            initial_price_i: 0.01,
            initial_price_j: 0.01,
            first_mover: Operator::I,
            max_moves: 200,
            numeric: false,
        }
    }
}

/// One price change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceMove {
    /// 1-based stage index.
    pub stage: usize,
    pub mover: Operator,
    pub price: f64,
    pub branch: Option<Branch>,
    /// Mover's revenue right after the move. For the second-to-last move of a
    /// regulated run this is the revenue it secures after the final reply.
    pub revenue: f64,
    pub price_i: f64,
    pub price_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// A `(p_i, p_j, next mover)` state recurred after `period` moves.
    Cycle { period: usize },
    Converged { price_i: f64, price_j: f64 },
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub initial_price_i: f64,
    pub initial_price_j: f64,
    pub first_mover: Operator,
    pub moves: Vec<PriceMove>,
    pub verdict: Verdict,
}

impl DynamicsTrace {
    pub fn final_prices(&self) -> (f64, f64) {
        self.moves
            .last()
            .map_or((self.initial_price_i, self.initial_price_j), |m| (m.price_i, m.price_j))
    }
}

pub(crate) fn validate_start(params: &MarketParams, price_i: f64, price_j: f64) -> Result<()> {
    params.validate()?;
    for (name, p) in [("p_i0", price_i), ("p_j0", price_j)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(name, format!("initial price must lie in [0, 1], got {p}")));
        }
    }
    Ok(())
}

/// Myopic reply of `mover` to the rival's current price. Undercuts are snapped
/// to the ε-grid; jumps and the monopoly price are kept exact.
pub(crate) fn respond(
    params: &MarketParams,
    mover: Operator,
    prices: [f64; 2],
    numeric: bool,
) -> Result<BestResponse> {
    let rival = mover.other();
    let capacity = params.capacity(mover);
    let rival_capacity = params.capacity(rival);
    let rival_price = prices[index(rival)];
    if numeric {
        return best_response_numeric(params, capacity, rival_capacity, rival_price);
    }
    let mut reply = best_response(params, capacity, rival_capacity, rival_price)?;
    if reply.branch == Branch::Undercut {
        reply.price = snap_to_grid(reply.price, params.epsilon);
    }
    Ok(reply)
}

pub(crate) fn index(op: Operator) -> usize {
    match op {
        Operator::I => 0,
        Operator::J => 1,
    }
}

pub(crate) fn record(moves: &mut Vec<PriceMove>, mover: Operator, reply: &BestResponse, prices: [f64; 2]) {
    moves.push(PriceMove {
        stage: moves.len() + 1,
        mover,
        price: reply.price,
        branch: Some(reply.branch),
        revenue: reply.expected_revenue,
        price_i: prices[0],
        price_j: prices[1],
    });
}

/// Alternating myopic best responses.
///
/// Stops when a `(p_i, p_j, next mover)` state recurs: the verdict is
/// `Converged` if nobody changed price over the recurrence window and `Cycle`
/// otherwise. Stops with `Truncated` after `max_moves` moves.
pub fn run_dynamics(params: &MarketParams, config: &DynamicsConfig) -> Result<DynamicsTrace> {
    validate_start(params, config.initial_price_i, config.initial_price_j)?;

    let mut prices = [config.initial_price_i, config.initial_price_j];
    let mut mover = config.first_mover;
    let mut moves = Vec::new();
    let mut states: Vec<[f64; 2]> = Vec::new();
    let mut seen: HashMap<(u64, u64, Operator), usize> = HashMap::new();
    let mut verdict = Verdict::Truncated;

    for t in 0..=config.max_moves {
        let key = (prices[0].to_bits(), prices[1].to_bits(), mover);
        if let Some(&start) = seen.get(&key) {
            let still = states[start..].iter().all(|s| *s == prices);
            verdict = if still {
                Verdict::Converged {
                    price_i: prices[0],
                    price_j: prices[1],
                }
            } else {
                Verdict::Cycle { period: t - start }
            };
            break;
        }
        if t == config.max_moves {
            break;
        }
        seen.insert(key, t);
        states.push(prices);

        let reply = respond(params, mover, prices, config.numeric)?;
        prices[index(mover)] = reply.price;
        record(&mut moves, mover, &reply, prices);
        mover = mover.other();
    }

    Ok(DynamicsTrace {
        initial_price_i: config.initial_price_i,
        initial_price_j: config.initial_price_j,
        first_mover: config.first_mover,
        moves,
        verdict,
    })
}
