//! Capacity stage.
//!
//! Each operator pays `γ·M` per unit of capacity and earns the revenue of the
//! regulated price equilibrium. With the last price change held by `j` and
//! `k_i ≤ 2k_j`, the per-`M` objectives are
//!
//! ```text
//!   i:  k_i/(k_i + 2)^2 − γ·k_i
//!   j:  (k_i + 1)/(k_i + 2)^2 · k_j/(k_j + 1) − γ·k_j
//! ```
//!
//! which are the two ratio problems solved below. The equilibrium exists iff
//! the feasibility function `F(γ)` exceeds 2, in which case
//! `k_i = F − 2`, `p_i = 1/F` and `p_j = 1 − 1/F`.

use crate::bertrand::regulated_equilibrium;
use crate::error::{ensure_positive, MarketError, Result};
use crate::market::{demand_low_price, settle, MarketParams, Operator};

/// `F(γ)` must clear 2 by more than this to count as feasible.
const FEASIBILITY_SLACK: f64 = 1e-12;

fn check_abc(a: f64, b: f64, c: f64) -> Result<()> {
    ensure_positive("a", a)?;
    ensure_positive("b", b)?;
    ensure_positive("c", c)
}

/// Maximiser of `b·x/(x + a) − c·x` over `x ≥ 0`: `max{0, √(ab/c) − a}`.
pub fn solve_ratio_linear(a: f64, b: f64, c: f64) -> Result<f64> {
    check_abc(a, b, c)?;
    Ok(((a * b / c).sqrt() - a).max(0.0))
}

/// Maximiser of `b·x/(x + a)^2 − c·x` over `x ≥ 0`.
///
/// The first-order condition `c(x + a)^3 = b(a − x)` is a depressed cubic in
/// `y = x + a`, `y^3 + (b/c)y − 2ab/c = 0`, solved with Cardano's formula.
/// The second cube root is taken as `−(b/c)/(3·∛A)`, which equals the real
/// cube root of the negative radicand without the cancellation of
/// subtracting two nearly equal terms.
pub fn solve_ratio_quadratic(a: f64, b: f64, c: f64) -> Result<f64> {
    check_abc(a, b, c)?;
    let half_q = a * b / c;
    let p = b / c;
    let disc = (half_q * half_q + p * p * p / 27.0).sqrt();
    let first = (half_q + disc).cbrt();
    let y = first - p / (3.0 * first);
    Ok((y - a).clamp(0.0, a))
}

/// Feasibility function `F(γ) = ∛(2/γ + √D) + ∛(2/γ − √D)`,
/// `D = 4/γ² + 1/(27γ³)`, with real cube roots.
pub fn feasibility(gamma: f64) -> Result<f64> {
    ensure_positive("gamma", gamma)?;
    let u = 2.0 / gamma;
    let root = (4.0 / (gamma * gamma) + 1.0 / (27.0 * gamma * gamma * gamma)).sqrt();
    Ok((u + root).cbrt() + (u - root).cbrt())
}

/// Capacities and prices of a feasible two-stage equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEquilibrium {
    pub capacity_i: f64,
    pub capacity_j: f64,
    pub price_i: f64,
    pub price_j: f64,
}

impl CapacityEquilibrium {
    pub fn capacity(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.capacity_i,
            Operator::J => self.capacity_j,
        }
    }

    pub fn price(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.price_i,
            Operator::J => self.price_j,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageEquilibrium {
    pub gamma: f64,
    pub feasibility_value: f64,
    /// Operator holding the last price change.
    pub last_mover: Operator,
    /// `None` when the market is infeasible.
    pub point: Option<CapacityEquilibrium>,
}

impl TwoStageEquilibrium {
    pub fn is_feasible(&self) -> bool {
        self.point.is_some()
    }
}

/// Joint capacity/price equilibrium at unit capacity cost `gamma`.
///
/// The operator without the last price change (market power) invests
/// `F(γ) − 2` and takes the low price; the last mover answers with the
/// capacity that maximises its own objective and takes the high price.
/// An infeasible market is a result, not an error.
pub fn two_stage_equilibrium(gamma: f64, last_mover: Operator) -> Result<TwoStageEquilibrium> {
    let f = feasibility(gamma)?;
    let mut eq = TwoStageEquilibrium {
        gamma,
        feasibility_value: f,
        last_mover,
        point: None,
    };
    if f <= 2.0 + FEASIBILITY_SLACK {
        return Ok(eq);
    }

    let k_leader = solve_ratio_quadratic(2.0, 1.0, gamma)?;
    let k_last = solve_ratio_linear(1.0, (k_leader + 1.0) / ((k_leader + 2.0) * (k_leader + 2.0)), gamma)?;
    if k_leader > 2.0 * k_last * (1.0 + 1e-12) {
        return Err(MarketError::Invariant(format!(
            "capacities {k_leader} and {k_last} leave the k_i ≤ 2k_j case"
        )));
    }
    let p_leader = 1.0 / (k_leader + 2.0);
    let p_last = (k_leader + 1.0) / (k_leader + 2.0);

    let (capacity_i, capacity_j, price_i, price_j) = match last_mover {
        Operator::J => (k_leader, k_last, p_leader, p_last),
        Operator::I => (k_last, k_leader, p_last, p_leader),
    };
    eq.point = Some(CapacityEquilibrium {
        capacity_i,
        capacity_j,
        price_i,
        price_j,
    });
    Ok(eq)
}

/// Candidate of the `k_i ≥ 2k_j` branch: `(k_i, k_j)` with
/// `k_j = max{0, √(1/(4γ)) − 1}` and `k_i` the best reply to it. It never
/// satisfies its own branch condition with positive capacities.
pub fn case_two_candidate(gamma: f64) -> Result<(f64, f64)> {
    ensure_positive("gamma", gamma)?;
    let k_last = solve_ratio_linear(1.0, 0.25, gamma)?;
    let b = (2.0 * k_last + 1.0) / (4.0 * (k_last + 1.0) * (k_last + 1.0));
    let k_leader = solve_ratio_linear(1.0, b, gamma)?;
    Ok((k_leader, k_last))
}

/// Per-`M` capacity-stage profits `(π_i, π_j)` at capacities `(k_i, k_j)`,
/// with revenues from the regulated price equilibrium and uniform users.
///
/// An operator without capacity earns nothing; facing such a rival the
/// other operator charges the monopoly price 1/2.
pub fn stage_profits(capacity_i: f64, capacity_j: f64, gamma: f64, last_mover: Operator) -> Result<(f64, f64)> {
    ensure_positive("gamma", gamma)?;
    let params = MarketParams::default().with_capacities(capacity_i, capacity_j);
    let monopoly = |k: f64| 0.5 * demand_low_price(&params, k, 0.5);
    let (r_i, r_j) = match (capacity_i > 0.0, capacity_j > 0.0) {
        (false, false) => (0.0, 0.0),
        (true, false) => (monopoly(capacity_i), 0.0),
        (false, true) => (0.0, monopoly(capacity_j)),
        (true, true) => {
            let eq = regulated_equilibrium(capacity_i, capacity_j, last_mover)?;
            let out = settle(&params, (capacity_i, eq.price_i), (capacity_j, eq.price_j))?;
            (out.revenue_i, out.revenue_j)
        }
    };
    Ok((r_i - gamma * capacity_i, r_j - gamma * capacity_j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_examples() {
        assert!((solve_ratio_linear(1.0, 1.0, 0.25).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(solve_ratio_linear(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((solve_ratio_linear(1.0, 4.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(solve_ratio_linear(0.0, 1.0, 1.0).is_err());
        assert!(solve_ratio_linear(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn quadratic_examples() {
        assert!(solve_ratio_quadratic(2.0, 1.0, 0.25).unwrap().abs() < 1e-12);
        assert_eq!(solve_ratio_quadratic(2.0, 1.0, 10.0).unwrap(), 0.0);
        let x = solve_ratio_quadratic(2.0, 1.0, 0.1).unwrap();
        // first-order condition (x + 2)^3 · 0.1 = 2 − x
        assert!(((x + 2.0).powi(3) * 0.1 - (2.0 - x)).abs() < 1e-12);
        assert!(solve_ratio_quadratic(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn feasibility_values() {
        assert!((feasibility(0.25).unwrap() - 2.0).abs() < 1e-9);
        assert!(feasibility(0.1).unwrap() > 2.0);
        assert!(feasibility(10.0).unwrap() < 2.0);
        assert!(feasibility(0.0).is_err());
        assert!(feasibility(-1.0).is_err());
    }

    #[test]
    fn feasibility_matches_quadratic_solver() {
        for n in 1..=24 {
            let g = n as f64 / 100.0;
            let f = feasibility(g).unwrap();
            let k = solve_ratio_quadratic(2.0, 1.0, g).unwrap();
            assert!((f - 2.0 - k).abs() < 1e-12, "gamma {g}");
        }
    }

    #[test]
    fn infeasible_markets() {
        assert!(!two_stage_equilibrium(0.3, Operator::J).unwrap().is_feasible());
        assert!(!two_stage_equilibrium(0.25, Operator::J).unwrap().is_feasible());
    }

    #[test]
    fn feasible_equilibrium_closed_form() {
        let eq = two_stage_equilibrium(0.1, Operator::J).unwrap();
        let pt = eq.point.unwrap();
        let f = eq.feasibility_value;
        assert!((pt.capacity_i - (f - 2.0)).abs() < 1e-12);
        assert!((pt.price_i - 1.0 / f).abs() < 1e-12);
        assert!((pt.price_j - (1.0 - 1.0 / f)).abs() < 1e-12);
        let kj = ((f - 1.0) / (f * f * 0.1)).sqrt() - 1.0;
        assert!((pt.capacity_j - kj).abs() < 1e-12);
        assert!(pt.price_j > pt.price_i);
    }

    #[test]
    fn last_mover_label_swaps_roles() {
        let a = two_stage_equilibrium(0.1, Operator::J).unwrap().point.unwrap();
        let b = two_stage_equilibrium(0.1, Operator::I).unwrap().point.unwrap();
        assert_eq!(a.capacity_i, b.capacity_j);
        assert_eq!(a.price_j, b.price_i);
    }

    #[test]
    fn case_two_candidate_is_inconsistent() {
        for n in 1..=24 {
            let g = n as f64 / 100.0;
            let (ki, kj) = case_two_candidate(g).unwrap();
            assert!(kj > 0.0);
            assert!(ki < 2.0 * kj, "gamma {g}: {ki} vs {kj}");
        }
    }

    #[test]
    fn profits_at_equilibrium_match_objectives() {
        let g = 0.1;
        let pt = two_stage_equilibrium(g, Operator::J).unwrap().point.unwrap();
        let (pi_i, pi_j) = stage_profits(pt.capacity_i, pt.capacity_j, g, Operator::J).unwrap();
        let ki = pt.capacity_i;
        let kj = pt.capacity_j;
        let obj_i = ki / ((ki + 2.0) * (ki + 2.0)) - g * ki;
        let obj_j = (ki + 1.0) / ((ki + 2.0) * (ki + 2.0)) * kj / (kj + 1.0) - g * kj;
        assert!((pi_i - obj_i).abs() < 1e-12);
        assert!((pi_j - obj_j).abs() < 1e-12);
    }
}
