//! The three subcommands, each rendering a CSV table into a string.

use std::fmt::Write;

use duopoly::bertrand::{
    epsilon_within_dominance_bound, run_dynamics, run_regulated_dynamics, DynamicsConfig, Verdict,
};
use duopoly::cournot::two_stage_equilibrium;
use duopoly::market::{settle, simulate_market};
use duopoly::regulator::{grid_points, sweep_tax};
use duopoly::MarketParams;

use crate::scenario::Scenario;
use crate::CliError;

/// Fixed 9-digit rendering, with negative zero printed as zero.
fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.bytes().all(|b| matches!(b, b'-' | b'0' | b'.')) {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), num)
}

pub fn dynamics(s: &Scenario, warn: &mut impl FnMut(String)) -> Result<String, CliError> {
    s.validate_dynamics()?;
    let params = s.params;
    let numeric = !params.distribution.is_uniform();
    let trace = if s.regulated {
        let k_last = params.capacity(s.last_mover);
        if !numeric && !epsilon_within_dominance_bound(k_last, params.epsilon) {
            warn(format!(
                "epsilon {} is not below k/(2(k + 1)) = {:.6} for the last mover; \
                 the closed-form penultimate price may not be optimal on this grid",
                params.epsilon,
                k_last / (2.0 * (k_last + 1.0))
            ));
        }
        run_regulated_dynamics(
            &params,
            (s.initial_price_i, s.initial_price_j),
            s.max_changes,
            s.last_mover,
            numeric,
        )?
    } else {
        let config = DynamicsConfig {
            initial_price_i: s.initial_price_i,
            initial_price_j: s.initial_price_j,
            first_mover: s.first_mover,
            max_moves: s.max_moves,
            numeric,
        };
        run_dynamics(&params, &config)?
    };

    let mut out = String::from("step,mover,p_i,p_j,d_i,d_j,r_i,r_j\n");
    for mv in &trace.moves {
        let o = simulate_market(&params, mv.price_i, mv.price_j)?;
        o.validate(&params)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            mv.stage,
            mv.mover,
            num(o.price_i),
            num(o.price_j),
            num(o.demand_i),
            num(o.demand_j),
            num(o.revenue_i),
            num(o.revenue_j)
        )
        .expect("writing to a String");
    }
    let verdict = match trace.verdict {
        Verdict::Cycle { period } => format!("cycle period={period}"),
        Verdict::Converged { price_i, price_j } => {
            format!("converged p_i={} p_j={}", num(price_i), num(price_j))
        }
        Verdict::Truncated => "truncated".to_string(),
    };
    writeln!(out, "# verdict: {verdict}").expect("writing to a String");
    Ok(out)
}

pub fn equilibrium(s: &Scenario) -> Result<String, CliError> {
    s.validate_equilibrium()?;
    let mut out = String::from("gamma,F,feasible,k_i,k_j,p_i,p_j\n");
    for gamma in grid_points(s.gamma_min, s.gamma_max, s.gamma_step)? {
        let eq = two_stage_equilibrium(gamma, s.last_mover)?;
        match eq.point {
            Some(pt) => {
                let params = MarketParams::default().with_capacities(pt.capacity_i, pt.capacity_j);
                settle(&params, (pt.capacity_i, pt.price_i), (pt.capacity_j, pt.price_j))?
                    .validate(&params)?;
                writeln!(
                    out,
                    "{},{},true,{},{},{},{}",
                    num(gamma),
                    num(eq.feasibility_value),
                    num(pt.capacity_i),
                    num(pt.capacity_j),
                    num(pt.price_i),
                    num(pt.price_j)
                )
            }
            None => writeln!(out, "{},{},false,,,,", num(gamma), num(eq.feasibility_value)),
        }
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn sweep(s: &Scenario) -> Result<String, CliError> {
    s.validate_sweep()?;
    let sweep = sweep_tax(s.gamma_c, s.gamma_t_min, s.gamma_t_max, s.gamma_t_step)?;
    let mut out = String::from("gamma_t,feasible,welfare_per_M,revenue_per_M\n");
    for pt in &sweep.points {
        if !(pt.welfare_per_m >= 0.0) {
            return Err(CliError::Model(duopoly::MarketError::Invariant(format!(
                "negative welfare {} at gamma_t {}",
                pt.welfare_per_m, pt.gamma_t
            ))));
        }
        writeln!(
            out,
            "{},{},{},{}",
            num(pt.gamma_t),
            pt.is_feasible(),
            num(pt.welfare_per_m),
            num(pt.revenue_per_m)
        )
        .expect("writing to a String");
    }
    writeln!(out, "# revenue_argmax_gamma_t: {}", opt(sweep.revenue_argmax)).expect("writing to a String");
    writeln!(out, "# welfare_argmax_gamma_t: {}", opt(sweep.welfare_argmax)).expect("writing to a String");
    Ok(out)
}
