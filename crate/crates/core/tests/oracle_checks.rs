use duopoly::bertrand::{best_response, best_response_numeric};
use duopoly::cournot::{solve_ratio_linear, solve_ratio_quadratic, two_stage_equilibrium};
use duopoly::market::simulate_market;
use duopoly::oracle::{
    brute_force_best_response, brute_force_market, grid_argmax, Axis, GridSpec,
};
use duopoly::regulator::{policy_point, user_welfare};
use duopoly::{MarketParams, Operator, UserTypeDistribution};

fn capacity_axis() -> Axis {
    GridSpec::default().capacity
}

#[test]
fn linear_ratio_examples_by_grid() {
    for (a, b, c) in [(1.0, 1.0, 0.25), (1.0, 4.0, 1.0), (2.0, 3.0, 0.5)] {
        let (x, _) = grid_argmax(&capacity_axis(), |x| b * x / (x + a) - c * x);
        assert!((solve_ratio_linear(a, b, c).unwrap() - x).abs() <= 1e-4, "({a}, {b}, {c})");
    }
}

#[test]
fn quadratic_ratio_example_by_grid() {
    let (x, _) = grid_argmax(&capacity_axis(), |x| x / ((x + 2.0) * (x + 2.0)) - 0.1 * x);
    assert!((solve_ratio_quadratic(2.0, 1.0, 0.1).unwrap() - x).abs() <= 1e-4);
}

#[test]
fn equilibrium_capacities_by_grid_at_reference_cost() {
    let g = 0.1;
    let pt = two_stage_equilibrium(g, Operator::J).unwrap().point.unwrap();
    let (k_i, _) = grid_argmax(&capacity_axis(), |k| k / ((k + 2.0) * (k + 2.0)) - g * k);
    let share = (k_i + 1.0) / ((k_i + 2.0) * (k_i + 2.0));
    let (k_j, _) = grid_argmax(&capacity_axis(), |k| share * k / (k + 1.0) - g * k);
    assert!((pt.capacity_i - k_i).abs() <= 1e-4);
    assert!((pt.capacity_j - k_j).abs() <= 2e-4);
}

#[test]
fn segmented_demands_match_assignment() {
    let params = MarketParams::default();
    let grid = GridSpec::default().with_alpha_step(1e-4);
    let exact = simulate_market(&params, 1.0 / 3.0, 2.0 / 3.0).unwrap();
    let brute = brute_force_market(&params, 1.0 / 3.0, 2.0 / 3.0, &grid).unwrap().outcome;
    assert!((exact.demand_i - brute.demand_i).abs() <= 5e-4);
    assert!((exact.demand_j - brute.demand_j).abs() <= 5e-4);
}

#[test]
fn triangular_demands_match_assignment() {
    let grid = GridSpec::default();
    let caps = [0.3, 1.0, 2.5];
    let prices = [0.05, 0.2, 0.45, 0.7, 0.9];
    for &k_i in &caps {
        for &k_j in &caps {
            let params = MarketParams::default()
                .with_distribution(UserTypeDistribution::Triangular)
                .with_capacities(k_i, k_j);
            for &p in &prices {
                for &q in &prices {
                    if p == q {
                        continue;
                    }
                    let exact = simulate_market(&params, p, q).unwrap();
                    let brute = brute_force_market(&params, p, q, &grid).unwrap().outcome;
                    assert!((exact.demand_i - brute.demand_i).abs() <= 5e-3);
                    assert!((exact.demand_j - brute.demand_j).abs() <= 5e-3);
                }
            }
        }
    }
}

#[test]
fn closed_form_replies_match_assignment_replies() {
    let grid = GridSpec::default();
    for &k_r in &[0.5, 1.0, 2.0] {
        let params = MarketParams::default().with_capacities(1.0, k_r);
        for n in (2..100).step_by(7) {
            let p_r = n as f64 * params.epsilon;
            let exact = best_response(&params, 1.0, k_r, p_r).unwrap().price;
            let brute = brute_force_best_response(&params, 1.0, k_r, p_r, &grid).unwrap();
            assert!((exact - brute).abs() <= 2.0 * params.epsilon, "k_r {k_r}, p_r {p_r}: {exact} vs {brute}");
        }
    }
}

#[test]
fn grid_replies_match_assignment_replies_for_skewed_users() {
    let grid = GridSpec::default();
    for dist in [
        UserTypeDistribution::DecreasingLinear,
        UserTypeDistribution::IncreasingLinear,
        UserTypeDistribution::Triangular,
    ] {
        let params = MarketParams::default().with_distribution(dist);
        for &p_r in &[0.1, 0.3, 0.45, 0.6, 0.8] {
            let numeric = best_response_numeric(&params, 1.0, 1.0, p_r).unwrap().price;
            let brute = brute_force_best_response(&params, 1.0, 1.0, p_r, &grid).unwrap();
            assert!((numeric - brute).abs() <= 2.0 * params.epsilon, "{dist}, p_r {p_r}: {numeric} vs {brute}");
        }
    }
}

/// Sums `α − p` over the assignment oracle's subscribers on a fine α-grid.
fn welfare_by_assignment(gamma: f64) -> (f64, f64) {
    let eq = two_stage_equilibrium(gamma, Operator::J).unwrap();
    let pt = eq.point.unwrap();
    let params = MarketParams::default().with_capacities(pt.capacity_i, pt.capacity_j);
    let step = 1e-5;
    let brute = brute_force_market(&params, pt.price_i, pt.price_j, &GridSpec::default().with_alpha_step(step))
        .unwrap()
        .outcome;
    // i is the cheaper operator here
    let (p_lo, q_lo) = (brute.price_i, brute.qos_i);
    let (p_hi, q_hi) = (brute.price_j, brute.qos_j);
    let mut total = 0.0;
    for c in 0..(1.0 / step) as usize {
        let a = (c as f64 + 0.5) * step;
        if a >= p_lo && a <= q_lo {
            total += (a - p_lo) * step;
        } else if a >= p_hi && a <= q_hi {
            total += (a - p_hi) * step;
        }
    }
    (user_welfare(&eq, &MarketParams::default()).unwrap(), total)
}

#[test]
fn welfare_matches_assignment_sum() {
    for &g in &[0.05, 0.1, 0.2] {
        let (closed, summed) = welfare_by_assignment(g);
        assert!((closed - summed).abs() <= 1e-4, "gamma {g}: {closed} vs {summed}");
    }
    assert_eq!(policy_point(0.3, 0.0, Operator::J).unwrap().welfare_per_m, 0.0);
}
