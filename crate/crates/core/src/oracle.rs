//! Brute-force references.
//!
//! Nothing here calls the demand, best-response or capacity formulas of the
//! other modules. Users are a discrete population on an `α`-grid, each cell
//! weighted by the density at its midpoint, and subscriber sets are found by
//! direct assignment.

use crate::error::{ensure_positive, invalid, MarketError, Result};
use crate::market::{MarketOutcome, MarketParams};

/// Evenly spaced points on `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, step: f64) -> Result<Self> {
        let axis = Axis { lower, upper, step };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("step", self.step)?;
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower <= self.upper) {
            return Err(invalid(
                "bounds",
                format!("[{}, {}] is not an ordered interval", self.lower, self.upper),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.upper - self.lower) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |n| self.lower + n as f64 * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// User types; `step` is the cell width.
    pub alpha: Axis,
    pub price: Axis,
    pub capacity: Axis,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            alpha: Axis { lower: 0.0, upper: 1.0, step: 1e-3 },
            price: Axis { lower: 0.0, upper: 1.0, step: 0.01 },
            capacity: Axis { lower: 0.0, upper: 5.0, step: 1e-4 },
        }
    }
}

impl GridSpec {
    pub fn with_alpha_step(self, step: f64) -> Self {
        GridSpec {
            alpha: Axis { step, ..self.alpha },
            ..self
        }
    }

    pub fn with_price_step(self, step: f64) -> Self {
        GridSpec {
            price: Axis { step, ..self.price },
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.price.validate()?;
        self.capacity.validate()
    }
}

/// Discrete users in increasing type order.
struct Population {
    alpha: Vec<f64>,
    weight: Vec<f64>,
}

impl Population {
    fn new(params: &MarketParams, axis: &Axis) -> Self {
        let cells = ((axis.upper - axis.lower) / axis.step).round().max(1.0) as usize;
        let width = (axis.upper - axis.lower) / cells as f64;
        let alpha: Vec<f64> = (0..cells)
            .map(|c| axis.lower + (c as f64 + 0.5) * width)
            .collect();
        let weight = alpha
            .iter()
            .map(|&a| params.distribution.density(a) * width * params.population)
            .collect();
        Population { alpha, weight }
    }

    /// Admits every eligible user, then repeatedly drops the highest-type
    /// member while its QoS requirement exceeds the QoS implied by the
    /// current subscriber mass. Returns the members and the number of rounds.
    fn admit(
        &self,
        eligible: impl Fn(usize) -> bool,
        capacity: f64,
        population: f64,
    ) -> Result<(Vec<usize>, usize)> {
        if capacity <= 0.0 {
            return Ok((Vec::new(), 0));
        }
        let mut members: Vec<usize> = (0..self.alpha.len()).filter(|&u| eligible(u)).collect();
        let mut mass: f64 = members.iter().map(|&u| self.weight[u]).sum();
        let bound = self.alpha.len() + 1;
        for round in 1..=bound {
            let quality = 1.0 - mass / (capacity * population);
            match members.last() {
                Some(&top) if self.alpha[top] > quality => {
                    mass -= self.weight[top];
                    members.pop();
                }
                _ => return Ok((members, round)),
            }
        }
        Err(MarketError::NotConverged(bound))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceMarket {
    pub outcome: MarketOutcome,
    /// Assignment rounds used by the cheaper and the dearer operator.
    pub iterations: (usize, usize),
}

fn run_market(params: &MarketParams, users: &Population, price_i: f64, price_j: f64) -> Result<BruteForceMarket> {
    if price_i == price_j {
        return Err(MarketError::EqualPrices(price_i));
    }
    let m = params.population;
    let i_is_low = price_i < price_j;
    let (k_low, p_low, k_high, p_high) = if i_is_low {
        (params.capacity_i, price_i, params.capacity_j, price_j)
    } else {
        (params.capacity_j, price_j, params.capacity_i, price_i)
    };

    let (low_members, low_rounds) = users.admit(|u| users.alpha[u] >= p_low, k_low, m)?;
    let mut taken = vec![false; users.alpha.len()];
    for &u in &low_members {
        taken[u] = true;
    }
    let (high_members, high_rounds) =
        users.admit(|u| !taken[u] && users.alpha[u] >= p_high, k_high, m)?;

    let mass = |members: &[usize]| members.iter().map(|&u| users.weight[u]).sum::<f64>();
    let quality = |k: f64, d: f64| if k > 0.0 { (1.0 - d / (k * m)).clamp(0.0, 1.0) } else { 0.0 };
    let d_low = mass(&low_members);
    let d_high = mass(&high_members);
    let (demand_i, demand_j) = if i_is_low { (d_low, d_high) } else { (d_high, d_low) };

    Ok(BruteForceMarket {
        outcome: MarketOutcome {
            price_i,
            price_j,
            demand_i,
            demand_j,
            qos_i: quality(params.capacity_i, demand_i),
            qos_j: quality(params.capacity_j, demand_j),
            revenue_i: price_i * demand_i,
            revenue_j: price_j * demand_j,
        },
        iterations: if i_is_low { (low_rounds, high_rounds) } else { (high_rounds, low_rounds) },
    })
}

/// Market outcome by direct assignment of discretised users: each user joins
/// the cheapest operator whose price it accepts and whose QoS meets its type.
pub fn brute_force_market(
    params: &MarketParams,
    price_i: f64,
    price_j: f64,
    grid: &GridSpec,
) -> Result<BruteForceMarket> {
    grid.alpha.validate()?;
    let users = Population::new(params, &grid.alpha);
    run_market(params, &users, price_i, price_j)
}

/// Revenue-maximising price on the price axis against a rival at
/// `(rival_capacity, rival_price)`, using [`brute_force_market`] revenues.
/// Ties go to the lower price.
pub fn brute_force_best_response(
    params: &MarketParams,
    capacity: f64,
    rival_capacity: f64,
    rival_price: f64,
    grid: &GridSpec,
) -> Result<f64> {
    grid.validate()?;
    let market = params.with_capacities(capacity, rival_capacity);
    let users = Population::new(&market, &grid.alpha);
    let tie = 1e-12 * params.population;
    let mut best: Option<(f64, f64)> = None;
    for price in grid.price.points() {
        if (price - rival_price).abs() < 1e-12 {
            continue;
        }
        let revenue = run_market(&market, &users, price, rival_price)?.outcome.revenue_i;
        if best.is_none_or(|(_, r)| revenue > r + tie) {
            best = Some((price, revenue));
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| invalid("grid", "price axis has no admissible point"))
}

/// Best point of `axis` for `objective`; ties go to the lower point.
pub fn grid_argmax(axis: &Axis, objective: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (axis.lower, objective(axis.lower));
    for x in axis.points().skip(1) {
        let v = objective(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Root of a decreasing function on `[lo, hi]` by bisection. Returns `lo` if
/// the function is already nonpositive there and `hi` if it stays positive.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tolerance: f64) -> f64 {
    if f(lo) <= 0.0 {
        return lo;
    }
    if f(hi) > 0.0 {
        return hi;
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
