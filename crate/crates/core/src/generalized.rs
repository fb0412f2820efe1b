//! Expected (ex ante) entropy under delivery heterogeneity: parcel classes with
//! pickup eligibility sets, a home-delivery share per class, independent
//! attempt failures with probability `α` and at most `Λ` attempts.
//!
//! The general evaluator and the closed forms for the limiting regimes are
//! implemented separately; [`consistency_report`] measures how far apart they
//! are instead of reconciling them.

use serde::{Deserialize, Serialize};

use crate::entropy::log_factorial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureModel<T> {
    /// Failure probability of a single home-delivery attempt.
    pub alpha: T,
    /// Maximum number of attempts `Λ` before rerouting to a pickup point.
    pub lambda_cap: u32,
}

impl<T: Scalar> FailureModel<T> {
    pub fn new(alpha: T, lambda_cap: u32) -> Result<Self> {
        let m = Self { alpha, lambda_cap };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(Error::domain(format!(
                "failure probability must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.lambda_cap == 0 {
            return Err(Error::domain("attempt cap must be at least 1"));
        }
        Ok(())
    }

    /// `α^Λ`: probability that every attempt fails.
    pub fn all_fail(&self) -> T {
        self.alpha.powi(self.lambda_cap as i32)
    }
}

/// `E[τ] = (1 - α^Λ) / (1 - α)`, with the removable singularity at `α = 1`
/// filled by its limit `Λ`.
pub fn expected_attempts<T: Scalar>(f: &FailureModel<T>) -> T {
    if f.alpha == T::one() {
        return T::from_count(f.lambda_cap as u64);
    }
    (T::one() - f.all_fail()) / (T::one() - f.alpha)
}

/// Law of the attempt count `τ = min(Geom(1 - α), Λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptDistribution<T> {
    /// `P(τ = j)` for `j = 1..=Λ`.
    pub probabilities: Vec<T>,
}

impl<T: Scalar> AttemptDistribution<T> {
    pub fn mean(&self) -> T {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| p * T::from_count(i as u64 + 1))
            .fold(T::zero(), |a, b| a + b)
    }
}

/// `P(τ = j) = (1 - α) α^(j-1)` for `j < Λ` and `P(τ = Λ) = α^(Λ-1)`.
pub fn attempt_distribution<T: Scalar>(f: &FailureModel<T>) -> AttemptDistribution<T> {
    let cap = f.lambda_cap as usize;
    let probabilities = (1..=cap)
        .map(|j| {
            let reach = f.alpha.powi(j as i32 - 1);
            if j < cap {
                (T::one() - f.alpha) * reach
            } else {
                reach
            }
        })
        .collect();
    AttemptDistribution { probabilities }
}

/// `E[ln(τ!)]` under [`attempt_distribution`].
pub fn expected_log_factorial_attempts<T: Scalar>(f: &FailureModel<T>) -> T {
    let mut ln_fact = T::zero();
    let mut acc = T::zero();
    for (i, p) in attempt_distribution(f)
        .probabilities
        .into_iter()
        .enumerate()
    {
        ln_fact = ln_fact + T::from_count(i as u64 + 1).ln();
        acc = acc + p * ln_fact;
    }
    acc
}

/// One parcel class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec<T> {
    /// `N_r`.
    pub n_parcels: T,
    /// `η_r`: share of the class initially attempted at home.
    pub eta: T,
    /// `S_r`: indices of the pickup points this class may use.
    pub eligible_points: Vec<usize>,
    /// `p_{r,k}` for each entry of `eligible_points`, same order.
    pub pickup_allocation: Vec<T>,
}

impl<T: Scalar> ClassSpec<T> {
    pub fn n_home(&self) -> T {
        self.eta * self.n_parcels
    }

    pub fn n_direct_pickup(&self) -> T {
        (T::one() - self.eta) * self.n_parcels
    }

    /// `h_r = (1 - α^Λ) N_r^home`.
    pub fn successful_home(&self, f: &FailureModel<T>) -> T {
        (T::one() - f.all_fail()) * self.n_home()
    }

    /// `f_r = α^Λ N_r^home`.
    pub fn failed_home(&self, f: &FailureModel<T>) -> T {
        f.all_fail() * self.n_home()
    }

    pub fn allocated(&self) -> T {
        self.pickup_allocation.iter().fold(T::zero(), |a, &b| a + b)
    }

    fn scaled(&self, m: T) -> Self {
        Self {
            n_parcels: self.n_parcels * m,
            eta: self.eta,
            eligible_points: self.eligible_points.clone(),
            pickup_allocation: self.pickup_allocation.iter().map(|&p| p * m).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralScenario<T> {
    pub classes: Vec<ClassSpec<T>>,
    pub failure: FailureModel<T>,
    /// `K`: number of pickup points.
    pub n_points: usize,
    /// Unique customers collecting from pickup points.
    pub c_pickup: u64,
}

/// Slack allowed between `Σ_k p_{r,k}` and `f_r + N_r^pickup`, relative to
/// `max(1, N_r)`; expected counts are fractional.
pub const ALLOCATION_TOLERANCE: f64 = 1e-6;

impl<T: Scalar> GeneralScenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.failure.validate()?;
        for (r, class) in self.classes.iter().enumerate() {
            if !(class.n_parcels >= T::zero() && class.n_parcels.is_finite()) {
                return Err(Error::domain(format!("class {r}: negative parcel count")));
            }
            if !(class.eta >= T::zero() && class.eta <= T::one()) {
                return Err(Error::domain(format!(
                    "class {r}: home share must lie in [0, 1], got {}",
                    class.eta
                )));
            }
            if class.eligible_points.len() != class.pickup_allocation.len() {
                return Err(Error::domain(format!(
                    "class {r}: {} eligible points but {} allocation entries",
                    class.eligible_points.len(),
                    class.pickup_allocation.len()
                )));
            }
            let mut seen = vec![false; self.n_points];
            for &k in &class.eligible_points {
                if k >= self.n_points {
                    return Err(Error::domain(format!(
                        "class {r}: pickup point {k} out of range (K = {})",
                        self.n_points
                    )));
                }
                if std::mem::replace(&mut seen[k], true) {
                    return Err(Error::domain(format!(
                        "class {r}: pickup point {k} listed twice"
                    )));
                }
            }
            if class.pickup_allocation.iter().any(|&p| !(p >= T::zero())) {
                return Err(Error::domain(format!(
                    "class {r}: negative pickup allocation"
                )));
            }
            let required = class.failed_home(&self.failure) + class.n_direct_pickup();
            let slack = T::lit(ALLOCATION_TOLERANCE) * class.n_parcels.max(T::one());
            if (class.allocated() - required).abs() > slack {
                return Err(Error::domain(format!(
                    "class {r}: pickup allocation sums to {}, expected f_r + N_r^pickup = {}",
                    class.allocated(),
                    required
                )));
            }
        }
        Ok(())
    }

    /// `N = Σ N_r`.
    pub fn total_parcels(&self) -> T {
        self.classes.iter().fold(T::zero(), |a, c| a + c.n_parcels)
    }

    /// `p_k = Σ_r p_{r,k}`.
    pub fn pickup_totals(&self) -> Vec<T> {
        let mut totals = vec![T::zero(); self.n_points];
        for class in &self.classes {
            for (&k, &p) in class.eligible_points.iter().zip(&class.pickup_allocation) {
                totals[k] = totals[k] + p;
            }
        }
        totals
    }

    /// Every class size, allocation and the pickup-customer count times `m`.
    pub fn scaled(&self, m: u64) -> Result<Self> {
        let c_pickup = self
            .c_pickup
            .checked_mul(m)
            .ok_or_else(|| Error::domain("scaled customer count overflows"))?;
        let factor = T::from_count(m);
        Ok(Self {
            classes: self.classes.iter().map(|c| c.scaled(factor)).collect(),
            failure: self.failure,
            n_points: self.n_points,
            c_pickup,
        })
    }
}

/// Reading of the successful-home-delivery term of the general formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomeTerm {
    /// Each successful home delivery is its own single-parcel customer and
    /// contributes `ln(1!) = 0`, as in the delivery entropy of a mixed
    /// home/pickup state. Reduces to `ln(N!)` with no failures and no pickup.
    #[default]
    PerCustomer,
    /// Literal `-ln(h_r!)`: successful home deliveries pooled like one stop.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralEntropy<T> {
    pub delivery: T,
    pub pickup: T,
    pub total: T,
}

/// Per class `ln((N_r^home E[τ])!) - N_r^home E[ln τ!] - home term -
/// Σ_{k∈S_r} ln(p_{r,k}!)`, plus `ln(C_pickup!)`. Fractional arguments use the
/// continuous log-factorial.
pub fn general_total_entropy<T: Scalar>(
    s: &GeneralScenario<T>,
    home_term: HomeTerm,
) -> Result<GeneralEntropy<T>> {
    s.validate()?;
    let e_tau = expected_attempts(&s.failure);
    let e_ln_tau = expected_log_factorial_attempts(&s.failure);
    let mut delivery = T::zero();
    for class in &s.classes {
        let n_home = class.n_home();
        let mut term = log_factorial(n_home * e_tau)? - n_home * e_ln_tau;
        if home_term == HomeTerm::Pooled {
            term = term - log_factorial(class.successful_home(&s.failure))?;
        }
        for &p in &class.pickup_allocation {
            term = term - log_factorial(p)?;
        }
        delivery = delivery + term;
    }
    let pickup = log_factorial(T::from_count(s.c_pickup))?;
    Ok(GeneralEntropy {
        delivery,
        pickup,
        total: delivery + pickup,
    })
}

/// Which `E[ln τ!]` coefficient the multiple-attempt closed form uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedLogReading {
    /// `- E[ln(τ!)]`, one copy for the whole system.
    #[default]
    AsPrinted,
    /// `- N E[ln(τ!)]`, one copy per parcel as in the general formula.
    ScaledByN,
}

/// Closed-form limiting regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum SpecialCase {
    /// `α = 0`, all `η_r = 1`, no pickup customers: `ln(N!)`.
    Baseline,
    /// `Λ = 1`, all `η_r = 1`, symmetric eligibility:
    /// `ln([N(1+α)]!) - 2K ln([αN/K]!) + ln(C_pickup!)`.
    SingleAttemptFailure,
    /// `Λ > 1`, all `η_r = 1`, symmetric eligibility:
    /// `ln([N E[τ]]!) - E[ln τ!] - 2K ln([N α^Λ / K]!) + ln(C_pickup!)`.
    MultipleAttemptFailure {
        #[serde(default)]
        reading: ExpectedLogReading,
    },
    /// All `η_r = 0`:
    /// `Σ_r [ln(N_r!) - Σ_k ln(p_{r,k}!)] + ln(C_total!)`.
    DirectToPickup,
    /// `Λ = 1`, `η_r ∈ (0, 1]`:
    /// `Σ_r [ln(N_r!) - ln(h_r!) - Σ_k ln(p_{r,k}!)] + ln(C_pickup!)`.
    SingleAttemptMixed,
    /// Anything else: the general evaluator with [`HomeTerm::PerCustomer`].
    FullyHeterogeneous,
}

impl SpecialCase {
    pub fn name(&self) -> &'static str {
        match self {
            SpecialCase::Baseline => "baseline",
            SpecialCase::SingleAttemptFailure => "single_attempt_failure",
            SpecialCase::MultipleAttemptFailure {
                reading: ExpectedLogReading::AsPrinted,
            } => "multiple_attempt_failure",
            SpecialCase::MultipleAttemptFailure {
                reading: ExpectedLogReading::ScaledByN,
            } => "multiple_attempt_failure_scaled",
            SpecialCase::DirectToPickup => "direct_to_pickup",
            SpecialCase::SingleAttemptMixed => "single_attempt_mixed",
            SpecialCase::FullyHeterogeneous => "fully_heterogeneous",
        }
    }
}

fn require(cond: bool, case: SpecialCase, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "{} case requires {what}",
            case.name()
        )))
    }
}

fn sum_ln_fact<T: Scalar>(values: &[T]) -> Result<T> {
    values
        .iter()
        .try_fold(T::zero(), |acc, &p| Ok(acc + log_factorial(p)?))
}

/// Evaluates the closed form of `case` on `s`, after checking that `s` lies in
/// that case's regime.
pub fn special_case_entropy<T: Scalar>(case: SpecialCase, s: &GeneralScenario<T>) -> Result<T> {
    s.validate()?;
    let all_eta = |v: T| s.classes.iter().all(|c| c.eta == v);
    let symmetric = s
        .classes
        .iter()
        .all(|c| c.eligible_points.len() == s.n_points);
    let n = s.total_parcels();
    let k = T::from_count(s.n_points as u64);
    let c_pickup = log_factorial(T::from_count(s.c_pickup))?;
    let alpha = s.failure.alpha;
    let two = T::lit(2.0);
    match case {
        SpecialCase::Baseline => {
            require(alpha == T::zero(), case, "α = 0")?;
            require(all_eta(T::one()), case, "η_r = 1 for every class")?;
            require(s.c_pickup == 0, case, "no pickup customers")?;
            log_factorial(n)
        }
        SpecialCase::SingleAttemptFailure => {
            require(s.failure.lambda_cap == 1, case, "Λ = 1")?;
            require(all_eta(T::one()), case, "η_r = 1 for every class")?;
            require(
                s.n_points >= 1 && symmetric,
                case,
                "every class eligible at all K ≥ 1 points",
            )?;
            Ok(
                log_factorial(n * (T::one() + alpha))? - two * k * log_factorial(alpha * n / k)?
                    + c_pickup,
            )
        }
        SpecialCase::MultipleAttemptFailure { reading } => {
            require(s.failure.lambda_cap > 1, case, "Λ > 1")?;
            require(all_eta(T::one()), case, "η_r = 1 for every class")?;
            require(
                s.n_points >= 1 && symmetric,
                case,
                "every class eligible at all K ≥ 1 points",
            )?;
            let e_ln = expected_log_factorial_attempts(&s.failure);
            let attempt_term = match reading {
                ExpectedLogReading::AsPrinted => e_ln,
                ExpectedLogReading::ScaledByN => n * e_ln,
            };
            Ok(log_factorial(n * expected_attempts(&s.failure))?
                - attempt_term
                - two * k * log_factorial(n * s.failure.all_fail() / k)?
                + c_pickup)
        }
        SpecialCase::DirectToPickup => {
            require(all_eta(T::zero()), case, "η_r = 0 for every class")?;
            let mut total = c_pickup;
            for class in &s.classes {
                total = total + log_factorial(class.n_parcels)?
                    - sum_ln_fact(&class.pickup_allocation)?;
            }
            Ok(total)
        }
        SpecialCase::SingleAttemptMixed => {
            require(s.failure.lambda_cap == 1, case, "Λ = 1")?;
            require(
                s.classes.iter().all(|c| c.eta > T::zero()),
                case,
                "η_r ∈ (0, 1] for every class",
            )?;
            let mut total = c_pickup;
            for class in &s.classes {
                total = total + log_factorial(class.n_parcels)?
                    - log_factorial(class.successful_home(&s.failure))?
                    - sum_ln_fact(&class.pickup_allocation)?;
            }
            Ok(total)
        }
        SpecialCase::FullyHeterogeneous => {
            Ok(general_total_entropy(s, HomeTerm::PerCustomer)?.total)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow<T> {
    pub case: SpecialCase,
    pub home_term: HomeTerm,
    pub general: T,
    pub special: T,
    /// `special - general`.
    pub gap: T,
    /// `|gap|` above [`GAP_FLAG_NATS`].
    pub flagged: bool,
}

pub const GAP_FLAG_NATS: f64 = 1e-6;

/// Evaluates each `(case, scenario)` cell with both the general evaluator and
/// the case's closed form.
pub fn consistency_report<T: Scalar>(
    grid: &[(SpecialCase, GeneralScenario<T>)],
    home_term: HomeTerm,
) -> Result<Vec<ConsistencyRow<T>>> {
    grid.iter()
        .map(|(case, scenario)| {
            let general = general_total_entropy(scenario, home_term)?.total;
            let special = special_case_entropy(*case, scenario)?;
            let gap = special - general;
            Ok(ConsistencyRow {
                case: *case,
                home_term,
                general,
                special,
                gap,
                flagged: gap.abs().as_f64() > GAP_FLAG_NATS,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport<T> {
    pub multipliers: Vec<u64>,
    /// Total parcels `m·N` per multiplier.
    pub n_values: Vec<T>,
    pub totals: Vec<T>,
    /// Least-squares slope of total entropy against `N` through the origin.
    pub slope: T,
    /// `max |G - slope·N| / |G|` over the multipliers.
    pub max_relative_deviation: T,
    /// Relative change of `G/N` between consecutive multipliers; one entry per
    /// multiplier after the first.
    pub deviations: Vec<T>,
    /// The last deviation does not exceed the first.
    pub deviation_shrinks: bool,
}

/// Scales every count of `s` by each multiplier and measures how close the
/// total entropy `evaluate(scaled)` is to growing linearly in `N`.
pub fn linear_scaling_check<T, F>(
    s: &GeneralScenario<T>,
    multipliers: &[u64],
    mut evaluate: F,
) -> Result<ScalingReport<T>>
where
    T: Scalar,
    F: FnMut(&GeneralScenario<T>) -> Result<T>,
{
    if multipliers.len() < 2 {
        return Err(Error::domain(
            "scaling check needs at least two multipliers",
        ));
    }
    if multipliers[0] == 0 || multipliers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "multipliers must be positive and strictly increasing",
        ));
    }
    let base_n = s.total_parcels();
    if !(base_n > T::zero()) {
        return Err(Error::domain("scenario holds no parcels to scale"));
    }
    let mut n_values = Vec::with_capacity(multipliers.len());
    let mut totals = Vec::with_capacity(multipliers.len());
    for &m in multipliers {
        let scaled = s.scaled(m)?;
        n_values.push(scaled.total_parcels());
        totals.push(evaluate(&scaled)?);
    }
    let sxy = n_values
        .iter()
        .zip(&totals)
        .fold(T::zero(), |a, (&n, &g)| a + n * g);
    let sxx = n_values.iter().fold(T::zero(), |a, &n| a + n * n);
    let slope = sxy / sxx;
    let max_relative_deviation = n_values
        .iter()
        .zip(&totals)
        .map(|(&n, &g)| relative(g - slope * n, g))
        .fold(T::zero(), T::max);
    let density: Vec<T> = totals.iter().zip(&n_values).map(|(&g, &n)| g / n).collect();
    let deviations: Vec<T> = density
        .windows(2)
        .map(|w| relative(w[1] - w[0], w[1]))
        .collect();
    let deviation_shrinks = deviations.last() <= deviations.first();
    Ok(ScalingReport {
        multipliers: multipliers.to_vec(),
        n_values,
        totals,
        slope,
        max_relative_deviation,
        deviations,
        deviation_shrinks,
    })
}

fn relative<T: Scalar>(diff: T, reference: T) -> T {
    if diff == T::zero() {
        T::zero()
    } else if reference == T::zero() {
        T::infinity()
    } else {
        (diff / reference).abs()
    }
}
