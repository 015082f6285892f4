//! User types, the congestion QoS model and demand.
//!
//! A user of type `α` subscribes to an operator only if the price condition
//! `α ≥ p` and the QoS condition `α ≤ q` both hold, and picks the cheaper
//! operator when both qualify. QoS is `q = 1 − d/(kM)` for demand `d`,
//! capacity `k` (in reference-capacity units) and population `M`.
//!
//! The cheaper operator serves `[p_low, q_low]` regardless of its rival. The
//! dearer operator serves `[max(p_high, q_low), q_high]`. Both demands are
//! fixed points of `d = M·(F(1 − d/(kM)) − F(lower))` where `F` is the
//! cumulative distribution of user types.

use std::fmt;
use std::str::FromStr;

use crate::error::{ensure_positive, invalid, MarketError, Result};

/// Bisection stops once the demand bracket is this narrow, relative to `M`.
const DEMAND_TOLERANCE: f64 = 1e-14;
const MAX_BISECTION_STEPS: usize = 200;

/// Slack for the outcome invariant checks, relative to `M`.
const OUTCOME_SLACK: f64 = 1e-9;

/// Density of user types on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum UserTypeDistribution {
    #[default]
    Uniform,
    /// `f(α) = 2 − 2α`: most users have a low type.
    DecreasingLinear,
    /// `f(α) = 2α`: most users have a high type.
    IncreasingLinear,
    /// `f(α) = 4α` below one half and `4 − 4α` above: mass in the middle.
    Triangular,
}

impl UserTypeDistribution {
    pub const ALL: [UserTypeDistribution; 4] = [
        UserTypeDistribution::Uniform,
        UserTypeDistribution::DecreasingLinear,
        UserTypeDistribution::IncreasingLinear,
        UserTypeDistribution::Triangular,
    ];

    pub fn density(self, alpha: f64) -> f64 {
        if !(0.0..=1.0).contains(&alpha) {
            return 0.0;
        }
        match self {
            UserTypeDistribution::Uniform => 1.0,
            UserTypeDistribution::DecreasingLinear => 2.0 - 2.0 * alpha,
            UserTypeDistribution::IncreasingLinear => 2.0 * alpha,
            UserTypeDistribution::Triangular => {
                if alpha <= 0.5 {
                    4.0 * alpha
                } else {
                    4.0 - 4.0 * alpha
                }
            }
        }
    }

    /// Cumulative distribution, clamped to `0` below the support and `1` above.
    pub fn cumulative(self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            UserTypeDistribution::Uniform => x,
            UserTypeDistribution::DecreasingLinear => 2.0 * x - x * x,
            UserTypeDistribution::IncreasingLinear => x * x,
            UserTypeDistribution::Triangular => {
                if x <= 0.5 {
                    2.0 * x * x
                } else {
                    let tail = 1.0 - x;
                    1.0 - 2.0 * tail * tail
                }
            }
        }
    }

    /// Short name used on the command line and in config files.
    pub fn name(self) -> &'static str {
        match self {
            UserTypeDistribution::Uniform => "uniform",
            UserTypeDistribution::DecreasingLinear => "f1",
            UserTypeDistribution::IncreasingLinear => "f2",
            UserTypeDistribution::Triangular => "f3",
        }
    }

    pub fn is_uniform(self) -> bool {
        self == UserTypeDistribution::Uniform
    }
}

impl fmt::Display for UserTypeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UserTypeDistribution {
    type Err = MarketError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(UserTypeDistribution::Uniform),
            "f1" | "decreasing" | "decreasing-linear" => Ok(UserTypeDistribution::DecreasingLinear),
            "f2" | "increasing" | "increasing-linear" => Ok(UserTypeDistribution::IncreasingLinear),
            "f3" | "triangular" => Ok(UserTypeDistribution::Triangular),
            other => Err(invalid(
                "distribution",
                format!("unknown kind `{other}` (expected uniform, f1, f2 or f3)"),
            )),
        }
    }
}

/// One of the two operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    I,
    J,
}

impl Operator {
    pub fn other(self) -> Operator {
        match self {
            Operator::I => Operator::J,
            Operator::J => Operator::I,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::I => "i",
            Operator::J => "j",
        })
    }
}

impl FromStr for Operator {
    type Err = MarketError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "i" | "I" => Ok(Operator::I),
            "j" | "J" => Ok(Operator::J),
            other => Err(invalid("operator", format!("expected `i` or `j`, got `{other}`"))),
        }
    }
}

/// The static market: population, capacities, price step and user types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Population `M`, a real scale factor.
    pub population: f64,
    pub capacity_i: f64,
    pub capacity_j: f64,
    /// Minimum unit of a price change.
    pub epsilon: f64,
    pub distribution: UserTypeDistribution,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams {
            population: 1.0,
            capacity_i: 1.0,
            capacity_j: 1.0,
            epsilon: 0.01,
            distribution: UserTypeDistribution::Uniform,
        }
    }
}

impl MarketParams {
    pub fn new(
        population: f64,
        capacity_i: f64,
        capacity_j: f64,
        epsilon: f64,
        distribution: UserTypeDistribution,
    ) -> Result<Self> {
        let params = MarketParams {
            population,
            capacity_i,
            capacity_j,
            epsilon,
            distribution,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("M", self.population)?;
        for (name, k) in [("k_i", self.capacity_i), ("k_j", self.capacity_j)] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(invalid(name, format!("must be nonnegative and finite, got {k}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(invalid(
                "epsilon",
                format!("must lie in (0, 0.5), got {}", self.epsilon),
            ));
        }
        Ok(())
    }

    pub fn capacity(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.capacity_i,
            Operator::J => self.capacity_j,
        }
    }

    pub fn with_capacities(self, capacity_i: f64, capacity_j: f64) -> Self {
        MarketParams {
            capacity_i,
            capacity_j,
            ..self
        }
    }

    pub fn with_distribution(self, distribution: UserTypeDistribution) -> Self {
        MarketParams {
            distribution,
            ..self
        }
    }
}

/// Demand, QoS and revenue of both operators at a price pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketOutcome {
    pub price_i: f64,
    pub price_j: f64,
    pub demand_i: f64,
    pub demand_j: f64,
    pub qos_i: f64,
    pub qos_j: f64,
    pub revenue_i: f64,
    pub revenue_j: f64,
}

impl MarketOutcome {
    pub fn price(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.price_i,
            Operator::J => self.price_j,
        }
    }

    pub fn demand(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.demand_i,
            Operator::J => self.demand_j,
        }
    }

    pub fn qos(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.qos_i,
            Operator::J => self.qos_j,
        }
    }

    pub fn revenue(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.revenue_i,
            Operator::J => self.revenue_j,
        }
    }

    /// Re-checks the demand, QoS and revenue invariants against `params`.
    pub fn validate(&self, params: &MarketParams) -> Result<()> {
        let m = params.population;
        let slack = OUTCOME_SLACK * m;
        for op in [Operator::I, Operator::J] {
            let (d, q, r, p) = (self.demand(op), self.qos(op), self.revenue(op), self.price(op));
            let k = params.capacity(op);
            if !(d >= -slack && d <= m + slack) {
                return Err(MarketError::Invariant(format!("demand of {op} is {d}, outside [0, {m}]")));
            }
            if !(0.0..=1.0).contains(&q) {
                return Err(MarketError::Invariant(format!("QoS of {op} is {q}, outside [0, 1]")));
            }
            if r != p * d {
                return Err(MarketError::Invariant(format!("revenue of {op} is {r}, not {p} × {d}")));
            }
            if k == 0.0 && d != 0.0 {
                return Err(MarketError::Invariant(format!("{op} has no capacity but demand {d}")));
            }
            if k > 0.0 && (q - qos(params.population, k, d)).abs() > 1e-12 {
                return Err(MarketError::Invariant(format!("QoS of {op} inconsistent with its demand")));
            }
            if d > k * m + slack {
                return Err(MarketError::Invariant(format!("demand of {op} exceeds capacity bound")));
            }
        }
        Ok(())
    }
}

/// QoS `1 − d/(kM)`, clamped to `[0, 1]`. An operator without capacity has QoS 0.
pub fn qos(population: f64, capacity: f64, demand: f64) -> f64 {
    if capacity <= 0.0 {
        return 0.0;
    }
    (1.0 - demand / (capacity * population)).clamp(0.0, 1.0)
}

/// Solves `d = M·max(0, F(1 − d/(kM)) − F(lower))` by bisection, for any
/// distribution.
///
/// The residual `d − M·max(0, …)` is strictly increasing in `d`, negative or
/// zero at `d = 0` and nonnegative at `d = min(M, kM)`, so the bracket always
/// holds a single root.
pub fn solve_demand(
    distribution: UserTypeDistribution,
    population: f64,
    capacity: f64,
    lower_limit: f64,
) -> f64 {
    if capacity <= 0.0 || lower_limit >= 1.0 {
        return 0.0;
    }
    let base = distribution.cumulative(lower_limit);
    let scale = capacity * population;
    let residual =
        |d: f64| d - population * (distribution.cumulative(1.0 - d / scale) - base).max(0.0);

    let (mut lo, mut hi) = (0.0, population.min(scale));
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= DEMAND_TOLERANCE * population {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Demand of an operator serving users from `lower_limit` up to its QoS
/// boundary. Closed form for uniform users, bisection otherwise.
fn served_demand(params: &MarketParams, capacity: f64, lower_limit: f64) -> f64 {
    if capacity <= 0.0 {
        return 0.0;
    }
    match params.distribution {
        UserTypeDistribution::Uniform => {
            capacity * (1.0 - lower_limit).max(0.0) * params.population / (capacity + 1.0)
        }
        dist => solve_demand(dist, params.population, capacity, lower_limit),
    }
}

/// Demand of the cheaper operator, which behaves as a monopolist on
/// `[price, q]`. For uniform users this is `k(1 − p)M/(k + 1)`.
pub fn demand_low_price(params: &MarketParams, capacity: f64, price: f64) -> f64 {
    served_demand(params, capacity, price)
}

/// Demand of the dearer operator given the cheaper one's price and capacity.
///
/// Users above the cheaper operator's QoS boundary `q_low` spill over, so the
/// lower limit is `max(p_high, q_low)`. For uniform users this is
/// `min{k_h(1 − p_h)M/(k_h + 1), k_h·d_low/((k_h + 1)k_low)}`.
pub fn demand_high_price(
    params: &MarketParams,
    capacity_high: f64,
    price_high: f64,
    capacity_low: f64,
    price_low: f64,
) -> Result<f64> {
    if price_high <= price_low {
        return Err(MarketError::PriceOrder {
            high: price_high,
            low: price_low,
        });
    }
    if capacity_high <= 0.0 {
        return Ok(0.0);
    }
    let demand_low = demand_low_price(params, capacity_low, price_low);
    if params.distribution.is_uniform() && capacity_low > 0.0 {
        let m = params.population;
        let segmented = capacity_high * (1.0 - price_high) * m / (capacity_high + 1.0);
        let spill = capacity_high * demand_low / ((capacity_high + 1.0) * capacity_low);
        return Ok(segmented.min(spill).max(0.0));
    }
    let q_low = qos(params.population, capacity_low, demand_low);
    Ok(served_demand(params, capacity_high, price_high.max(q_low)))
}

fn check_price(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(name, format!("price must lie in [0, 1], got {p}")))
    }
}

/// Outcome for operator `i` at `(capacity_i, price_i)` against `j` at
/// `(capacity_j, price_j)`, with the population and distribution of `params`.
pub fn settle(
    params: &MarketParams,
    (capacity_i, price_i): (f64, f64),
    (capacity_j, price_j): (f64, f64),
) -> Result<MarketOutcome> {
    check_price("p_i", price_i)?;
    check_price("p_j", price_j)?;
    if price_i == price_j {
        return Err(MarketError::EqualPrices(price_i));
    }
    let (demand_i, demand_j) = if price_i < price_j {
        (
            demand_low_price(params, capacity_i, price_i),
            demand_high_price(params, capacity_j, price_j, capacity_i, price_i)?,
        )
    } else {
        (
            demand_high_price(params, capacity_i, price_i, capacity_j, price_j)?,
            demand_low_price(params, capacity_j, price_j),
        )
    };
    let m = params.population;
    Ok(MarketOutcome {
        price_i,
        price_j,
        demand_i,
        demand_j,
        qos_i: qos(m, capacity_i, demand_i),
        qos_j: qos(m, capacity_j, demand_j),
        revenue_i: price_i * demand_i,
        revenue_j: price_j * demand_j,
    })
}

/// Demand, QoS and revenue of both operators at `(price_i, price_j)`.
pub fn simulate_market(params: &MarketParams, price_i: f64, price_j: f64) -> Result<MarketOutcome> {
    settle(
        params,
        (params.capacity_i, price_i),
        (params.capacity_j, price_j),
    )
}

/// Revenue of an operator at `(capacity, price)` against a rival at
/// `(rival_capacity, rival_price)`.
pub fn revenue_against(
    params: &MarketParams,
    (capacity, price): (f64, f64),
    (rival_capacity, rival_price): (f64, f64),
) -> Result<f64> {
    Ok(settle(params, (capacity, price), (rival_capacity, rival_price))?.revenue_i)
}
