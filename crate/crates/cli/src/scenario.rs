//! Scenario files: one `key = value` pair per line, `#` starts a comment.

use std::collections::HashSet;
use std::str::FromStr;

use duopoly::{MarketParams, Operator, UserTypeDistribution};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: MarketParams,
    pub initial_price_i: f64,
    pub initial_price_j: f64,
    pub first_mover: Operator,
    pub last_mover: Operator,
    pub regulated: bool,
    pub max_moves: usize,
    pub max_changes: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub gamma_c: f64,
    pub gamma_t_min: f64,
    pub gamma_t_max: f64,
    pub gamma_t_step: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            params: MarketParams::default(),
            initial_price_i: 0.01,
            initial_price_j: 0.01,
            first_mover: Operator::I,
            last_mover: Operator::J,
            regulated: false,
            max_moves: 200,
            max_changes: 80,
            gamma_min: 0.01,
            gamma_max: 0.25,
            gamma_step: 0.01,
            gamma_c: 0.1,
            gamma_t_min: -0.05,
            gamma_t_max: 0.15,
            gamma_t_step: 0.005,
        }
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Config(format!("line {line}: cannot parse {key} = {raw:?}")))
}

fn flag(line: usize, key: &str, raw: &str) -> Result<bool, CliError> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("line {line}: {key} must be true or false, got {raw:?}"))),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let mut s = Scenario::default();
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, val)) = content.split_once('=') else {
                return Err(CliError::Config(format!("line {line}: expected key = value, got {content:?}")));
            };
            let (key, val) = (key.trim(), val.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {line}: duplicate key {key}")));
            }
            let p = &mut s.params;
            match key {
                "M" => p.population = value(line, key, val)?,
                "k_i" => p.capacity_i = value(line, key, val)?,
                "k_j" => p.capacity_j = value(line, key, val)?,
                "epsilon" => p.epsilon = value(line, key, val)?,
                "distribution" => p.distribution = value(line, key, val)?,
                "p_i0" => s.initial_price_i = value(line, key, val)?,
                "p_j0" => s.initial_price_j = value(line, key, val)?,
                "first_mover" => s.first_mover = value(line, key, val)?,
                "last_mover" => s.last_mover = value(line, key, val)?,
                "regulated" => s.regulated = flag(line, key, val)?,
                "max_moves" => s.max_moves = value(line, key, val)?,
                "max_changes" => s.max_changes = value(line, key, val)?,
                "gamma_min" => s.gamma_min = value(line, key, val)?,
                "gamma_max" => s.gamma_max = value(line, key, val)?,
                "gamma_step" => s.gamma_step = value(line, key, val)?,
                "gamma_c" => s.gamma_c = value(line, key, val)?,
                "gamma_t_min" => s.gamma_t_min = value(line, key, val)?,
                "gamma_t_max" => s.gamma_t_max = value(line, key, val)?,
                "gamma_t_step" => s.gamma_t_step = value(line, key, val)?,
                _ => return Err(CliError::Config(format!("line {line}: unknown key {key}"))),
            }
        }
        Ok(s)
    }

    pub fn with_distribution(mut self, dist: UserTypeDistribution) -> Self {
        self.params.distribution = dist;
        self
    }

    pub fn validate_dynamics(&self) -> Result<(), CliError> {
        self.params.validate().map_err(config)?;
        for (name, p) in [("p_i0", self.initial_price_i), ("p_j0", self.initial_price_j)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.regulated && self.max_changes < 2 {
            return Err(CliError::Config(format!("max_changes must be at least 2, got {}", self.max_changes)));
        }
        if !self.regulated && self.max_moves == 0 {
            return Err(CliError::Config("max_moves must be positive".into()));
        }
        Ok(())
    }

    fn require_uniform(&self) -> Result<(), CliError> {
        if self.params.distribution.is_uniform() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "capacity competition is modelled for uniform users only, got {}",
                self.params.distribution
            )))
        }
    }

    pub fn validate_equilibrium(&self) -> Result<(), CliError> {
        self.require_uniform()?;
        check_range("gamma", self.gamma_min, self.gamma_max, self.gamma_step)?;
        if self.gamma_min <= 0.0 {
            return Err(CliError::Config(format!("gamma_min must be positive, got {}", self.gamma_min)));
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<(), CliError> {
        self.require_uniform()?;
        check_range("gamma_t", self.gamma_t_min, self.gamma_t_max, self.gamma_t_step)?;
        if !(self.gamma_c > 0.0) {
            return Err(CliError::Config(format!("gamma_c must be positive, got {}", self.gamma_c)));
        }
        if self.gamma_c + self.gamma_t_min <= 0.0 {
            return Err(CliError::Config(format!(
                "gamma_c + gamma_t_min = {} leaves no positive unit cost",
                self.gamma_c + self.gamma_t_min
            )));
        }
        Ok(())
    }
}

fn config(e: duopoly::MarketError) -> CliError {
    CliError::Config(e.to_string())
}

fn check_range(name: &str, lo: f64, hi: f64, step: f64) -> Result<(), CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Config(format!("{name}_step must be positive, got {step}")));
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(CliError::Config(format!("{name} range [{lo}, {hi}] is empty")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let s = Scenario::parse(
            "# reference run\nM = 2\nk_i=0.5 # small\n\nlast_mover = i\ndistribution = f2\nregulated = true\n",
        )
        .unwrap();
        assert_eq!(s.params.population, 2.0);
        assert_eq!(s.params.capacity_i, 0.5);
        assert_eq!(s.last_mover, Operator::I);
        assert_eq!(s.params.distribution, UserTypeDistribution::IncreasingLinear);
        assert!(s.regulated);
        assert_eq!(s.max_changes, 80);
    }

    #[test]
    fn rejects_bad_lines() {
        for text in ["bogus = 1", "M = 1\nM = 2", "M 1", "k_i = abc", "regulated = maybe"] {
            assert!(matches!(Scenario::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn validation() {
        let s = Scenario::parse("epsilon = 0.7").unwrap();
        assert!(s.validate_dynamics().is_err());
        let s = Scenario::parse("gamma_min = 0.2\ngamma_max = 0.1").unwrap();
        assert!(s.validate_equilibrium().is_err());
        let s = Scenario::parse("gamma_t_min = -0.2").unwrap();
        assert!(s.validate_sweep().is_err());
        let s = Scenario::default().with_distribution(UserTypeDistribution::Triangular);
        assert!(s.validate_sweep().is_err());
        assert!(s.validate_dynamics().is_ok());
    }
}
