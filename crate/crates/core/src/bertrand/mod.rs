//! Price stage: best responses, price-war dynamics and the price-change
//! limit regulation.
//!
//! With uniform users the best reply to a rival priced at `p` with capacity
//! `k` is piecewise:
//!
//! ```text
//!   p > 1/2                      -> 1/2               (monopoly price)
//!   1/(k+2) < p <= 1/2           -> p - ε             (undercut)
//!   (1-k)/2 <= p <= 1/(k+2)      -> (k + p)/(k + 1)   (long jump)
//!   0 <= p < (1-k)/2, k < 1      -> 1/2               (monopoly price)
//! ```
//!
//! The undercut/long-jump comparison treats `p - ε ≈ p`; reported revenues
//! always use the exact demand.

mod dynamics;
mod regulation;

pub use dynamics::{run_dynamics, DynamicsConfig, DynamicsTrace, PriceMove, Verdict};
pub use regulation::{
    backward_induction_price, epsilon_within_dominance_bound, is_pareto_optimal,
    is_segmented, regulated_equilibrium, run_regulated_dynamics, CapacityCase,
    RegulatedEquilibrium,
};

use crate::error::{MarketError, Result};
use crate::market::{demand_low_price, qos, revenue_against, MarketParams};

/// Revenues closer than this (relative to `M`) count as a tie in grid
/// searches; ties go to the lower price.
pub(crate) const REVENUE_TIE: f64 = 1e-12;

/// Which piece of the best-response rule produced a reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The unconstrained monopoly price (1/2 for uniform users).
    MonopolyHalf,
    /// One price step below the rival.
    Undercut,
    /// Jump above the rival to its QoS boundary.
    LongJump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub price: f64,
    pub branch: Branch,
    /// Revenue of the replying operator at the reply, from the exact demand.
    pub expected_revenue: f64,
}

/// Best price when staying below the rival.
pub fn best_response_low(rival_price: f64, epsilon: f64) -> f64 {
    if rival_price > 0.5 {
        0.5
    } else {
        (rival_price - epsilon).max(0.0)
    }
}

/// Best price when staying above the rival.
pub fn best_response_high(rival_capacity: f64, rival_price: f64) -> f64 {
    if rival_price >= (1.0 - rival_capacity) / 2.0 {
        (rival_capacity + rival_price) / (rival_capacity + 1.0)
    } else {
        0.5
    }
}

/// Rival price at or below which a long jump beats undercutting.
pub fn long_jump_threshold(rival_capacity: f64) -> f64 {
    1.0 / (rival_capacity + 2.0)
}

/// Branch of the closed-form rule for a rival at `(rival_capacity, rival_price)`.
pub fn closed_form_branch(rival_capacity: f64, rival_price: f64) -> Branch {
    let p = rival_price;
    let k = rival_capacity;
    if p > 0.5 {
        Branch::MonopolyHalf
    } else if p > long_jump_threshold(k) {
        Branch::Undercut
    } else if k < 1.0 && p < (1.0 - k) / 2.0 {
        Branch::MonopolyHalf
    } else {
        Branch::LongJump
    }
}

/// Closed-form best reply for uniform users.
pub fn best_response(
    params: &MarketParams,
    capacity: f64,
    rival_capacity: f64,
    rival_price: f64,
) -> Result<BestResponse> {
    if !params.distribution.is_uniform() {
        return Err(MarketError::RequiresUniform(params.distribution.name()));
    }
    let branch = closed_form_branch(rival_capacity, rival_price);
    let price = match branch {
        Branch::MonopolyHalf => 0.5,
        Branch::Undercut => best_response_low(rival_price, params.epsilon),
        Branch::LongJump => best_response_high(rival_capacity, rival_price),
    };
    let expected_revenue =
        revenue_against(params, (capacity, price), (rival_capacity, rival_price))?;
    Ok(BestResponse {
        price,
        branch,
        expected_revenue,
    })
}

/// `i·ε`, the `i`-th point of the price grid.
pub fn grid_price(index: i64, epsilon: f64) -> f64 {
    index as f64 * epsilon
}

/// Nearest point of the price grid.
pub fn snap_to_grid(price: f64, epsilon: f64) -> f64 {
    grid_price((price / epsilon).round() as i64, epsilon)
}

/// `{0, ε, 2ε, …}` up to 1, with 1 appended when `1/ε` is not whole.
pub fn price_grid(epsilon: f64) -> Vec<f64> {
    let steps = (1.0 / epsilon + 1e-9).floor() as i64;
    let mut grid: Vec<f64> = (0..=steps).map(|i| grid_price(i, epsilon)).collect();
    if grid.last().is_some_and(|&p| p < 1.0 - 1e-12) {
        grid.push(1.0);
    }
    grid
}

/// Best reply by exhaustive search over the price grid, for any distribution.
///
/// The rival's own price is excluded. Ties go to the lower price.
pub fn best_response_numeric(
    params: &MarketParams,
    capacity: f64,
    rival_capacity: f64,
    rival_price: f64,
) -> Result<BestResponse> {
    let tie = REVENUE_TIE * params.population;
    let mut best: Option<(f64, f64)> = None;
    for price in price_grid(params.epsilon) {
        if (price - rival_price).abs() < 1e-12 {
            continue;
        }
        let revenue = revenue_against(params, (capacity, price), (rival_capacity, rival_price))?;
        if best.is_none_or(|(_, r)| revenue > r + tie) {
            best = Some((price, revenue));
        }
    }
    let (price, expected_revenue) =
        best.ok_or_else(|| MarketError::Invariant("empty price grid".into()))?;
    Ok(BestResponse {
        price,
        branch: classify_reply(params, rival_capacity, rival_price, price),
        expected_revenue,
    })
}

/// Labels a grid reply. Below the rival it is an undercut when it sits one
/// step under the rival; above, it is a long jump when it lands within one
/// step of the rival's QoS boundary.
fn classify_reply(params: &MarketParams, rival_capacity: f64, rival_price: f64, price: f64) -> Branch {
    let eps = params.epsilon;
    if price < rival_price {
        if (price - (rival_price - eps)).abs() < eps / 2.0 {
            Branch::Undercut
        } else {
            Branch::MonopolyHalf
        }
    } else {
        let rival_demand = demand_low_price(params, rival_capacity, rival_price);
        let boundary = qos(params.population, rival_capacity, rival_demand);
        if price <= boundary + eps {
            Branch::LongJump
        } else {
            Branch::MonopolyHalf
        }
    }
}
