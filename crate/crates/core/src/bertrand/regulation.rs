//! Price-change limit regulation.
//!
//! Once the number of price changes is capped the price game is finite and
//! the last two moves are played by backward induction. The operator moving
//! second to last (role `i`) anticipates the final reply of the last mover
//! (role `j`). For uniform users only two of its options survive dominance:
//!
//! * price `(2k_j + 1)/(2(k_j + 1))`, answered by `j` with 1/2, or
//! * price `1/(k_i + 2)`, answered by `j` with a long jump to `(k_i + 1)/(k_i + 2)`.
//!
//! The sign of `k_i − 2k_j` decides between them.

use super::dynamics::{index, record, respond, validate_start, DynamicsTrace, PriceMove, Verdict};
use super::{best_response_numeric, price_grid, REVENUE_TIE};
use crate::error::{invalid, MarketError, Result};
use crate::market::{demand_low_price, qos, revenue_against, MarketParams, Operator};

/// Slack for the boundary comparisons in the Pareto and tie checks.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Capacity of the second-to-last mover relative to twice the last mover's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CapacityCase {
    LessThanTwice,
    EqualToTwice,
    GreaterThanTwice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulatedEquilibrium {
    pub price_i: f64,
    pub price_j: f64,
    pub last_mover: Operator,
    pub case: CapacityCase,
    /// The other equilibrium `(p_i, p_j)` when the capacities tie exactly.
    pub alternative: Option<(f64, f64)>,
}

fn capacity_case(capacity_penultimate: f64, capacity_last: f64) -> CapacityCase {
    let gap = capacity_penultimate - 2.0 * capacity_last;
    if gap.abs() <= BOUNDARY_SLACK * capacity_penultimate.max(1.0) {
        CapacityCase::EqualToTwice
    } else if gap < 0.0 {
        CapacityCase::LessThanTwice
    } else {
        CapacityCase::GreaterThanTwice
    }
}

/// `(second-to-last, last)` prices when the second-to-last mover undercuts
/// into the low segment.
fn low_segment_point(capacity_penultimate: f64) -> (f64, f64) {
    let k = capacity_penultimate;
    (1.0 / (k + 2.0), (k + 1.0) / (k + 2.0))
}

/// `(second-to-last, last)` prices when the second-to-last mover sits above
/// one half and leaves the monopoly price to the last mover.
fn high_segment_point(capacity_last: f64) -> (f64, f64) {
    let k = capacity_last;
    ((2.0 * k + 1.0) / (2.0 * (k + 1.0)), 0.5)
}

fn to_physical(last_mover: Operator, (penultimate, last): (f64, f64)) -> (f64, f64) {
    match last_mover {
        Operator::J => (penultimate, last),
        Operator::I => (last, penultimate),
    }
}

/// Closed-form end point of the regulated price game for uniform users.
///
/// `last_mover` is the operator holding the final price change. For an exact
/// tie `k_penultimate = 2·k_last` the low-segment point is returned and the
/// other point is reported in `alternative`.
pub fn regulated_equilibrium(
    capacity_i: f64,
    capacity_j: f64,
    last_mover: Operator,
) -> Result<RegulatedEquilibrium> {
    for (name, k) in [("k_i", capacity_i), ("k_j", capacity_j)] {
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid(name, format!("must be positive, got {k}")));
        }
    }
    let (k_pen, k_last) = match last_mover {
        Operator::J => (capacity_i, capacity_j),
        Operator::I => (capacity_j, capacity_i),
    };
    let case = capacity_case(k_pen, k_last);
    let (point, alternative) = match case {
        CapacityCase::LessThanTwice => (low_segment_point(k_pen), None),
        CapacityCase::EqualToTwice => (
            low_segment_point(k_pen),
            Some(to_physical(last_mover, high_segment_point(k_last))),
        ),
        CapacityCase::GreaterThanTwice => (high_segment_point(k_last), None),
    };
    let (price_i, price_j) = to_physical(last_mover, point);
    Ok(RegulatedEquilibrium {
        price_i,
        price_j,
        last_mover,
        case,
        alternative,
    })
}

/// Price the second-to-last mover sets under uniform users.
pub fn backward_induction_price(capacity_penultimate: f64, capacity_last: f64) -> f64 {
    match capacity_case(capacity_penultimate, capacity_last) {
        CapacityCase::GreaterThanTwice => high_segment_point(capacity_last).0,
        _ => low_segment_point(capacity_penultimate).0,
    }
}

/// Whether `ε < k_last/(2(k_last + 1))`, the bound under which pricing in
/// `(1/(k+2), 1/2]` on the second-to-last move is strictly dominated.
pub fn epsilon_within_dominance_bound(capacity_last: f64, epsilon: f64) -> bool {
    epsilon < capacity_last / (2.0 * (capacity_last + 1.0))
}

/// Sufficient condition for Pareto optimality of a segmented price pair.
///
/// `true` certifies the pair; `false` only means it is not certified.
/// The high-price capacity does not enter the condition.
pub fn is_pareto_optimal(
    capacity_low: f64,
    _capacity_high: f64,
    price_low: f64,
    price_high: f64,
) -> Result<bool> {
    if price_low >= price_high {
        return Err(MarketError::PriceOrder {
            high: price_high,
            low: price_low,
        });
    }
    let k = capacity_low;
    let boundary = (k + price_low) / (k + 1.0);
    Ok(price_low <= 0.5 + BOUNDARY_SLACK
        && price_high >= 0.5 - BOUNDARY_SLACK
        && price_high >= boundary - BOUNDARY_SLACK)
}

/// Whether the dearer operator prices at or above the cheaper operator's QoS
/// boundary, so the two subscriber sets do not overlap. Works for any
/// distribution.
pub fn is_segmented(params: &MarketParams, price_i: f64, price_j: f64) -> Result<bool> {
    if price_i == price_j {
        return Err(MarketError::EqualPrices(price_i));
    }
    let (low, high) = if price_i < price_j {
        (Operator::I, Operator::J)
    } else {
        (Operator::J, Operator::I)
    };
    let prices = [price_i, price_j];
    let k_low = params.capacity(low);
    let d_low = demand_low_price(params, k_low, prices[index(low)]);
    let boundary = qos(params.population, k_low, d_low);
    Ok(prices[index(high)] >= boundary - BOUNDARY_SLACK)
}

/// Regulated price game with at most `max_changes` price changes.
///
/// Moves alternate and the first mover is chosen so that `last_mover` makes
/// the final change. All but the last two moves are myopic best responses.
/// The second-to-last mover then maximises the revenue it keeps after the
/// last mover's best reply: in closed form for uniform users, by grid search
/// when `numeric` is set.
pub fn run_regulated_dynamics(
    params: &MarketParams,
    initial_prices: (f64, f64),
    max_changes: usize,
    last_mover: Operator,
    numeric: bool,
) -> Result<DynamicsTrace> {
    validate_start(params, initial_prices.0, initial_prices.1)?;
    if max_changes < 2 {
        return Err(invalid("max_changes", format!("must be at least 2, got {max_changes}")));
    }
    if !numeric && !params.distribution.is_uniform() {
        return Err(MarketError::RequiresUniform(params.distribution.name()));
    }
    let first_mover = if max_changes.is_multiple_of(2) {
        last_mover.other()
    } else {
        last_mover
    };

    let mut prices = [initial_prices.0, initial_prices.1];
    let mut moves: Vec<PriceMove> = Vec::with_capacity(max_changes);
    let mut mover = first_mover;
    for _ in 0..max_changes - 2 {
        let reply = respond(params, mover, prices, numeric)?;
        prices[index(mover)] = reply.price;
        record(&mut moves, mover, &reply, prices);
        mover = mover.other();
    }

    let penultimate = last_mover.other();
    debug_assert_eq!(mover, penultimate);
    let k_pen = params.capacity(penultimate);
    let k_last = params.capacity(last_mover);

    let price = if numeric {
        anticipating_price(params, k_pen, k_last, prices[index(last_mover)])?
    } else {
        backward_induction_price(k_pen, k_last)
    };
    prices[index(penultimate)] = price;
    let reply = respond(params, last_mover, prices, numeric)?;
    let secured = revenue_against(params, (k_pen, price), (k_last, reply.price))?;
    moves.push(PriceMove {
        stage: moves.len() + 1,
        mover: penultimate,
        price,
        branch: None,
        revenue: secured,
        price_i: prices[0],
        price_j: prices[1],
    });

    prices[index(last_mover)] = reply.price;
    record(&mut moves, last_mover, &reply, prices);

    Ok(DynamicsTrace {
        initial_price_i: initial_prices.0,
        initial_price_j: initial_prices.1,
        first_mover,
        moves,
        verdict: Verdict::Converged {
            price_i: prices[0],
            price_j: prices[1],
        },
    })
}

/// Grid price maximising the second-to-last mover's revenue after the last
/// mover's grid best reply. Ties go to the lower price.
fn anticipating_price(params: &MarketParams, k_pen: f64, k_last: f64, last_price: f64) -> Result<f64> {
    let tie = REVENUE_TIE * params.population;
    let mut best: Option<(f64, f64)> = None;
    for candidate in price_grid(params.epsilon) {
        if (candidate - last_price).abs() < 1e-12 {
            continue;
        }
        let reply = best_response_numeric(params, k_last, k_pen, candidate)?;
        let revenue = revenue_against(params, (k_pen, candidate), (k_last, reply.price))?;
        if best.is_none_or(|(_, r)| revenue > r + tie) {
            best = Some((candidate, revenue));
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| MarketError::Invariant("empty price grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn equal_capacities() {
        let eq = regulated_equilibrium(1.0, 1.0, Operator::J).unwrap();
        assert_eq!(eq.case, CapacityCase::LessThanTwice);
        assert!(close(eq.price_i, 1.0 / 3.0) && close(eq.price_j, 2.0 / 3.0));
        assert!(eq.alternative.is_none());
    }

    #[test]
    fn large_penultimate_capacity() {
        let eq = regulated_equilibrium(3.0, 1.0, Operator::J).unwrap();
        assert_eq!(eq.case, CapacityCase::GreaterThanTwice);
        assert!(close(eq.price_i, 0.75) && close(eq.price_j, 0.5));
    }

    #[test]
    fn tie_reports_both_points() {
        let eq = regulated_equilibrium(2.0, 1.0, Operator::J).unwrap();
        assert_eq!(eq.case, CapacityCase::EqualToTwice);
        assert!(close(eq.price_i, 0.25) && close(eq.price_j, 0.75));
        let (ai, aj) = eq.alternative.unwrap();
        assert!(close(ai, 0.75) && close(aj, 0.5));
    }

    #[test]
    fn roles_follow_last_mover_label() {
        let a = regulated_equilibrium(1.0, 3.0, Operator::I).unwrap();
        let b = regulated_equilibrium(3.0, 1.0, Operator::J).unwrap();
        assert_eq!((a.price_i, a.price_j), (b.price_j, b.price_i));
    }

    #[test]
    fn pareto_examples() {
        assert!(is_pareto_optimal(1.0, 1.0, 1.0 / 3.0, 2.0 / 3.0).unwrap());
        assert!(!is_pareto_optimal(1.0, 1.0, 0.4, 0.5).unwrap());
        assert!(!is_pareto_optimal(1.0, 1.0, 0.6, 0.9).unwrap());
        assert!(is_pareto_optimal(1.0, 1.0, 0.6, 0.6).is_err());
    }

    #[test]
    fn regulated_run_reaches_closed_form_point() {
        let trace =
            run_regulated_dynamics(&MarketParams::default(), (0.01, 0.01), 80, Operator::J, false).unwrap();
        assert_eq!(trace.moves.len(), 80);
        assert_eq!(trace.first_mover, Operator::I);
        let (pi, pj) = trace.final_prices();
        assert!(close(pi, 1.0 / 3.0) && close(pj, 2.0 / 3.0), "{pi} {pj}");
    }

    #[test]
    fn two_change_horizon_is_pure_backward_induction() {
        let params = MarketParams::default().with_capacities(3.0, 1.0);
        let trace = run_regulated_dynamics(&params, (0.2, 0.9), 2, Operator::J, false).unwrap();
        assert_eq!(trace.moves.len(), 2);
        assert_eq!(trace.moves[0].mover, Operator::I);
        let (pi, pj) = trace.final_prices();
        assert!(close(pi, 0.75) && close(pj, 0.5));
    }

    #[test]
    fn odd_horizon_starts_with_last_mover() {
        let trace =
            run_regulated_dynamics(&MarketParams::default(), (0.01, 0.01), 5, Operator::J, false).unwrap();
        assert_eq!(trace.first_mover, Operator::J);
        assert_eq!(trace.moves.last().unwrap().mover, Operator::J);
    }

    #[test]
    fn rejects_short_horizon() {
        assert!(run_regulated_dynamics(&MarketParams::default(), (0.1, 0.2), 1, Operator::J, false).is_err());
    }

    #[test]
    fn dominance_bound() {
        assert!(epsilon_within_dominance_bound(1.0, 0.01));
        assert!(!epsilon_within_dominance_bound(0.01, 0.01));
    }

    #[test]
    fn segmentation() {
        let p = MarketParams::default();
        assert!(is_segmented(&p, 1.0 / 3.0, 2.0 / 3.0).unwrap());
        assert!(!is_segmented(&p, 0.4, 0.5).unwrap());
    }
}
