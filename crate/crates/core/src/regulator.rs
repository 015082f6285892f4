//! Regulator: user welfare, tax revenue and tax/subsidy sweeps.
//!
//! The regulator adds `γ_t` per unit of capacity on top of the fixed cost
//! `γ_c` (a subsidy when negative), so operators face `γ = γ_c + γ_t` and the
//! regulator collects `γ_t·M·(k_i + k_j)` at the resulting equilibrium.

use crate::cournot::{two_stage_equilibrium, TwoStageEquilibrium};
use crate::error::{ensure_positive, invalid, MarketError, Result};
use crate::market::{settle, MarketParams, Operator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyPoint {
    pub gamma_c: f64,
    pub gamma_t: f64,
    pub equilibrium: TwoStageEquilibrium,
    pub welfare_per_m: f64,
    pub revenue_per_m: f64,
}

impl PolicyPoint {
    pub fn is_feasible(&self) -> bool {
        self.equilibrium.is_feasible()
    }
}

/// `∫_lo^hi (α − price) dα` for uniform users, zero on an empty interval.
fn surplus(lo: f64, hi: f64, price: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let up = hi - price;
    let down = lo - price;
    0.5 * (up * up - down * down)
}

/// Total net utility `α − p` of all subscribers, divided by `M`.
///
/// The cheaper operator serves `[p_low, q_low]` and the dearer one
/// `[max(p_high, q_low), q_high]`; everyone else gets zero. Returns 0 for an
/// infeasible equilibrium.
pub fn user_welfare(eq: &TwoStageEquilibrium, params: &MarketParams) -> Result<f64> {
    if !params.distribution.is_uniform() {
        return Err(MarketError::RequiresUniform(params.distribution.name()));
    }
    let Some(pt) = eq.point else {
        return Ok(0.0);
    };
    let out = settle(
        params,
        (pt.capacity_i, pt.price_i),
        (pt.capacity_j, pt.price_j),
    )?;
    let (low, high) = if out.price_i < out.price_j {
        (Operator::I, Operator::J)
    } else {
        (Operator::J, Operator::I)
    };
    let p_low = out.price(low);
    let q_low = out.qos(low);
    let p_high = out.price(high);
    let q_high = out.qos(high);
    Ok(surplus(p_low, q_low, p_low) + surplus(p_high.max(q_low), q_high, p_high))
}

/// `γ_t·(k_i + k_j)`, zero for an infeasible equilibrium.
pub fn regulator_revenue(eq: &TwoStageEquilibrium, gamma_t: f64) -> f64 {
    eq.point
        .map_or(0.0, |pt| gamma_t * (pt.capacity_i + pt.capacity_j))
}

/// Equilibrium, welfare and revenue at one policy.
pub fn policy_point(gamma_c: f64, gamma_t: f64, last_mover: Operator) -> Result<PolicyPoint> {
    ensure_positive("gamma_c", gamma_c)?;
    let gamma = gamma_c + gamma_t;
    if !(gamma > 0.0) {
        return Err(invalid(
            "gamma_t",
            format!("total unit cost γ_c + γ_t = {gamma} must be positive"),
        ));
    }
    let equilibrium = two_stage_equilibrium(gamma, last_mover)?;
    Ok(PolicyPoint {
        gamma_c,
        gamma_t,
        equilibrium,
        welfare_per_m: user_welfare(&equilibrium, &MarketParams::default())?,
        revenue_per_m: regulator_revenue(&equilibrium, gamma_t),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxSweep {
    pub points: Vec<PolicyPoint>,
    /// `γ_t` with the largest revenue among feasible points.
    pub revenue_argmax: Option<f64>,
    /// `γ_t` with the largest welfare among feasible points.
    pub welfare_argmax: Option<f64>,
}

/// Evenly spaced `start, start + step, …` up to `end` (inclusive, with a
/// small slack for rounding). Values are rounded to 12 decimals.
pub fn grid_points(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    ensure_positive("step", step)?;
    if !(start.is_finite() && end.is_finite()) || end < start {
        return Err(invalid("range", format!("empty range [{start}, {end}]")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|n| ((start + n as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn argmax(points: &[PolicyPoint], key: impl Fn(&PolicyPoint) -> f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for pt in points.iter().filter(|p| p.is_feasible()) {
        let v = key(pt);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((pt.gamma_t, v));
        }
    }
    best.map(|(g, _)| g)
}

/// Policy points over `γ_t ∈ [start, end]`, in grid order, with the last
/// price change held by operator `j`. Infeasible points are kept with zero
/// welfare and revenue.
pub fn sweep_tax(gamma_c: f64, start: f64, end: f64, step: f64) -> Result<TaxSweep> {
    ensure_positive("gamma_c", gamma_c)?;
    let points = grid_points(start, end, step)?
        .into_iter()
        .map(|gamma_t| policy_point(gamma_c, gamma_t, Operator::J))
        .collect::<Result<Vec<_>>>()?;
    Ok(TaxSweep {
        revenue_argmax: argmax(&points, |p| p.revenue_per_m),
        welfare_argmax: argmax(&points, |p| p.welfare_per_m),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cournot::CapacityEquilibrium;

    #[test]
    fn single_interval_surplus() {
        assert!((surplus(1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0) - 1.0 / 18.0).abs() < 1e-15);
        assert_eq!(surplus(0.6, 0.5, 0.2), 0.0);
    }

    #[test]
    fn welfare_of_hand_built_point() {
        // k = 1 each at (1/3, 2/3): low serves [1/3, 2/3], high serves
        // [2/3, 5/6].
        let eq = TwoStageEquilibrium {
            gamma: 0.1,
            feasibility_value: 3.0,
            last_mover: Operator::J,
            point: Some(CapacityEquilibrium {
                capacity_i: 1.0,
                capacity_j: 1.0,
                price_i: 1.0 / 3.0,
                price_j: 2.0 / 3.0,
            }),
        };
        let w = user_welfare(&eq, &MarketParams::default()).unwrap();
        let expected = 1.0 / 18.0 + 0.5 * (1.0f64 / 6.0).powi(2);
        assert!((w - expected).abs() < 1e-12);
    }

    #[test]
    fn infeasible_is_zero() {
        let p = policy_point(0.1, 0.2, Operator::J).unwrap();
        assert!(!p.is_feasible());
        assert_eq!(p.welfare_per_m, 0.0);
        assert_eq!(p.revenue_per_m, 0.0);
    }

    #[test]
    fn revenue_sign_follows_tax() {
        assert_eq!(policy_point(0.1, 0.0, Operator::J).unwrap().revenue_per_m, 0.0);
        assert!(policy_point(0.1, -0.02, Operator::J).unwrap().revenue_per_m < 0.0);
        assert!(policy_point(0.1, 0.02, Operator::J).unwrap().revenue_per_m > 0.0);
    }

    #[test]
    fn rejects_nonpositive_total_cost() {
        assert!(policy_point(0.1, -0.1, Operator::J).is_err());
        assert!(sweep_tax(0.1, -0.2, 0.0, 0.01).is_err());
    }

    #[test]
    fn welfare_needs_uniform_users() {
        let eq = two_stage_equilibrium(0.1, Operator::J).unwrap();
        let params = MarketParams::default().with_distribution(crate::UserTypeDistribution::IncreasingLinear);
        assert!(user_welfare(&eq, &params).is_err());
    }

    #[test]
    fn grid_points_inclusive() {
        let g = grid_points(-0.05, 0.15, 0.005).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -0.05);
        assert_eq!(g[23], 0.065);
        assert_eq!(*g.last().unwrap(), 0.15);
        assert_eq!(grid_points(0.1, 0.1, 0.01).unwrap(), vec![0.1]);
        assert!(grid_points(0.2, 0.1, 0.01).is_err());
        assert!(grid_points(0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn single_point_sweep() {
        let s = sweep_tax(0.1, 0.02, 0.02, 0.005).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.revenue_argmax, Some(0.02));
    }
}
