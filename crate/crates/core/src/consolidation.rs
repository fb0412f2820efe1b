//! Counterfactual spatial consolidation: home stops adopt a nearby pickup
//! point with a distance-decaying probability, their parcels move to that
//! point, and carrier-side and system-wide entropy are recomputed.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entropy::log_factorial_u64;
use crate::error::{Error, Result};
use crate::ingest::{haversine_km, GeoPoint, PickupPoint, RouteRecord, StopKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdoptionParams {
    /// Distance in km at which activation probability is one half.
    pub threshold_t: f64,
    /// Steepness per km.
    pub beta: f64,
    /// Share of activated customers who end up adopting.
    pub lambda_accept: f64,
}

impl AdoptionParams {
    pub fn new(threshold_t: f64, beta: f64, lambda_accept: f64) -> Result<Self> {
        if !(threshold_t > 0.0 && threshold_t.is_finite()) {
            return Err(Error::domain(format!(
                "threshold t must be positive, got {threshold_t}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta must be positive, got {beta}")));
        }
        if !(0.0..=1.0).contains(&lambda_accept) {
            return Err(Error::domain(format!(
                "acceptance ratio must lie in [0, 1], got {lambda_accept}"
            )));
        }
        Ok(Self {
            threshold_t,
            beta,
            lambda_accept,
        })
    }
}

/// `1 / (1 + exp(β(d - t)))`, evaluated so that neither branch overflows.
pub fn activation_probability(d: f64, params: &AdoptionParams) -> f64 {
    let z = params.beta * (d - params.threshold_t);
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Index into the pickup-point slice.
    pub point: usize,
    pub distance_km: f64,
}

/// Numeric ids compare as numbers, anything else lexicographically.
fn point_id_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Nearest pickup point per customer; equal distances go to the lowest
/// point id.
pub fn assign_nearest_pickup(
    customers: &[GeoPoint],
    points: &[PickupPoint],
) -> Result<Vec<Assignment>> {
    if points.is_empty() {
        return Err(Error::domain("no pickup points to assign to"));
    }
    Ok(customers
        .iter()
        .map(|&c| {
            let mut best = Assignment {
                point: 0,
                distance_km: haversine_km(c, points[0].point()),
            };
            for (i, p) in points.iter().enumerate().skip(1) {
                let d = haversine_km(c, p.point());
                let closer = d < best.distance_km
                    || (d == best.distance_km
                        && point_id_cmp(&p.point_id, &points[best.point].point_id)
                            == Ordering::Less);
                if closer {
                    best = Assignment {
                        point: i,
                        distance_km: d,
                    };
                }
            }
            best
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SimulationMode {
    /// Adopt the `round(λ Σ P_a)` home stops with the highest activation
    /// probability on each route.
    Expectation,
    /// Independent draws per stop from a stream keyed by `(seed, route_id)`.
    MonteCarlo { seed: u64 },
}

impl SimulationMode {
    /// `mode` is `expectation` or `mc`; `mc` needs a seed.
    pub fn from_flags(mode: &str, seed: Option<u64>) -> Result<Self> {
        match (mode, seed) {
            ("expectation", _) => Ok(SimulationMode::Expectation),
            ("mc" | "monte_carlo", Some(seed)) => Ok(SimulationMode::MonteCarlo { seed }),
            ("mc" | "monte_carlo", None) => {
                Err(Error::Config("monte carlo mode requires a seed".into()))
            }
            (other, _) => Err(Error::Config(format!("unknown simulation mode '{other}'"))),
        }
    }
}

/// How adopting stops translate into pickup customers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CustomerCounting {
    /// One collecting customer per adopting stop.
    #[default]
    PerStop,
    /// One collecting customer per moved parcel.
    PerParcel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub route_id: String,
    pub n_parcels: u64,
    pub adopters: u64,
    pub moved_parcels: u64,
    pub c_pickup: u64,
    pub g_delivery: f64,
    pub g_norm_delivery: Option<f64>,
    pub baseline_g_delivery: f64,
    /// `g_delivery + ln(c_pickup!)`.
    pub g_total_system: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub params: AdoptionParams,
    pub mode: SimulationMode,
    /// Home-stop customers eligible to adopt.
    pub customers: u64,
    pub total_parcels: u64,
    /// `A`: expected (expectation mode) or realized share of activated customers.
    pub activated_share: f64,
    /// `λ·A` in expectation mode, the realized adopter share otherwise.
    pub adopter_share: f64,
    pub parcels_consolidated_share: f64,
    /// Mean of `G_delivery / ln(N!)` over routes with `N ≥ 2`.
    pub g_norm_delivery: f64,
    pub baseline_g_norm: f64,
    /// Percent drop of `g_norm_delivery` from the zero-adoption baseline.
    pub reduction_vs_baseline: f64,
    pub c_pickup: u64,
    /// Mean per-route system entropy.
    pub g_total_system: f64,
    pub routes: Vec<RouteOutcome>,
}

#[derive(Debug, Clone)]
struct Candidate {
    parcels: u64,
    point: usize,
    distance_km: f64,
}

#[derive(Debug, Clone)]
struct PreparedRoute {
    route_id: String,
    n: u64,
    /// Home stops with parcels, in stop order.
    candidates: Vec<Candidate>,
    /// Candidate indices by ascending distance, ties in stop order.
    by_distance: Vec<usize>,
    /// Parcels of stops already sitting at a pickup point, per point.
    fixed: BTreeMap<usize, u64>,
    baseline_g: f64,
}

impl PreparedRoute {
    fn evaluate(&self, adopted: &[bool], counting: CustomerCounting) -> RouteOutcome {
        let mut buckets = self.fixed.clone();
        let mut counts = Vec::with_capacity(self.candidates.len());
        let (mut adopters, mut moved) = (0u64, 0u64);
        for (c, &a) in self.candidates.iter().zip(adopted) {
            if a {
                *buckets.entry(c.point).or_default() += c.parcels;
                adopters += 1;
                moved += c.parcels;
            } else {
                counts.push(c.parcels);
            }
        }
        counts.extend(buckets.values());
        // summing over the sorted macrostate makes equal macrostates bit-equal
        counts.sort_unstable();
        let ln_w: f64 = counts.iter().map(|&c| log_factorial_u64::<f64>(c)).sum();
        let ln_n = log_factorial_u64::<f64>(self.n);
        let g_delivery = (ln_n - ln_w).max(0.0);
        let c_pickup = match counting {
            CustomerCounting::PerStop => adopters,
            CustomerCounting::PerParcel => moved,
        };
        RouteOutcome {
            route_id: self.route_id.clone(),
            n_parcels: self.n,
            adopters,
            moved_parcels: moved,
            c_pickup,
            g_delivery,
            g_norm_delivery: (self.n >= 2).then(|| (g_delivery / ln_n).clamp(0.0, 1.0)),
            baseline_g_delivery: self.baseline_g,
            g_total_system: g_delivery + log_factorial_u64::<f64>(c_pickup),
        }
    }
}

fn substream(seed: u64, route_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(route_id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Routes and pickup points with nearest-point assignments precomputed, ready
/// to be evaluated under many adoption parameters.
#[derive(Debug, Clone)]
pub struct ConsolidationModel {
    routes: Vec<PreparedRoute>,
    counting: CustomerCounting,
}

impl ConsolidationModel {
    pub fn new(routes: &[RouteRecord], points: &[PickupPoint]) -> Result<Self> {
        if routes.is_empty() {
            return Err(Error::domain("no routes to consolidate"));
        }
        let mut prepared = Vec::with_capacity(routes.len());
        for r in routes {
            if let Err(reason) = r.check() {
                return Err(Error::Validation(format!("route {}: {reason}", r.route_id)));
            }
            let demand: Vec<_> = r
                .stops
                .iter()
                .filter(|s| s.kind != StopKind::Station && s.parcel_count > 0)
                .collect();
            let geo: Vec<GeoPoint> = demand.iter().map(|s| s.point()).collect();
            let assigned = assign_nearest_pickup(&geo, points)?;
            let mut candidates = Vec::new();
            let mut fixed = BTreeMap::new();
            for (s, a) in demand.iter().zip(assigned) {
                if s.kind == StopKind::Pickup {
                    *fixed.entry(a.point).or_default() += s.parcel_count;
                } else {
                    candidates.push(Candidate {
                        parcels: s.parcel_count,
                        point: a.point,
                        distance_km: a.distance_km,
                    });
                }
            }
            let mut by_distance: Vec<usize> = (0..candidates.len()).collect();
            by_distance.sort_by(|&a, &b| {
                candidates[a]
                    .distance_km
                    .total_cmp(&candidates[b].distance_km)
            });
            let mut route = PreparedRoute {
                route_id: r.route_id.clone(),
                n: demand.iter().map(|s| s.parcel_count).sum(),
                candidates,
                by_distance,
                fixed,
                baseline_g: 0.0,
            };
            route.baseline_g = route
                .evaluate(
                    &vec![false; route.candidates.len()],
                    CustomerCounting::PerStop,
                )
                .g_delivery;
            prepared.push(route);
        }
        Ok(Self {
            routes: prepared,
            counting: CustomerCounting::default(),
        })
    }

    pub fn with_counting(mut self, counting: CustomerCounting) -> Self {
        self.counting = counting;
        self
    }

    pub fn simulate(&self, params: &AdoptionParams, mode: SimulationMode) -> ScenarioResult {
        let lambda = params.lambda_accept;
        let mut outcomes = Vec::with_capacity(self.routes.len());
        let (mut customers, mut activated, mut adopters_share_num) = (0u64, 0.0f64, 0.0f64);
        for route in &self.routes {
            let probs: Vec<f64> = route
                .candidates
                .iter()
                .map(|c| activation_probability(c.distance_km, params))
                .collect();
            let mut adopted = vec![false; probs.len()];
            match mode {
                SimulationMode::Expectation => {
                    let expected: f64 = probs.iter().sum();
                    activated += expected;
                    adopters_share_num += lambda * expected;
                    let take = ((lambda * expected).round() as usize).min(adopted.len());
                    for &i in &route.by_distance[..take] {
                        adopted[i] = true;
                    }
                }
                SimulationMode::MonteCarlo { seed } => {
                    let mut rng = substream(seed, &route.route_id);
                    for (i, &p) in probs.iter().enumerate() {
                        let u_act: f64 = rng.random();
                        let u_accept: f64 = rng.random();
                        if u_act < p {
                            activated += 1.0;
                            if u_accept < lambda {
                                adopted[i] = true;
                                adopters_share_num += 1.0;
                            }
                        }
                    }
                }
            }
            customers += probs.len() as u64;
            outcomes.push(route.evaluate(&adopted, self.counting));
        }
        summarize_outcomes(
            *params,
            mode,
            customers,
            activated,
            adopters_share_num,
            outcomes,
        )
    }

    /// One result per grid cell, ordered by `(t, β, λ)` ascending.
    pub fn sweep(&self, grid: &SweepGrid, mode: SimulationMode) -> Result<Vec<ScenarioResult>> {
        Ok(grid
            .cells()?
            .iter()
            .map(|p| self.simulate(p, mode))
            .collect())
    }
}

fn share(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> f64 {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn summarize_outcomes(
    params: AdoptionParams,
    mode: SimulationMode,
    customers: u64,
    activated: f64,
    adopters: f64,
    routes: Vec<RouteOutcome>,
) -> ScenarioResult {
    let total_parcels: u64 = routes.iter().map(|r| r.n_parcels).sum();
    let moved: u64 = routes.iter().map(|r| r.moved_parcels).sum();
    let g_norm = mean_defined(routes.iter().map(|r| r.g_norm_delivery));
    let baseline = mean_defined(routes.iter().map(|r| {
        (r.n_parcels >= 2).then(|| r.baseline_g_delivery / log_factorial_u64::<f64>(r.n_parcels))
    }));
    let reduction = if baseline > 0.0 {
        (baseline - g_norm) / baseline * 100.0
    } else {
        0.0
    };
    ScenarioResult {
        params,
        mode,
        customers,
        total_parcels,
        activated_share: share(activated, customers as f64),
        adopter_share: share(adopters, customers as f64),
        parcels_consolidated_share: share(moved as f64, total_parcels as f64),
        g_norm_delivery: g_norm,
        baseline_g_norm: baseline,
        reduction_vs_baseline: reduction,
        c_pickup: routes.iter().map(|r| r.c_pickup).sum(),
        g_total_system: routes.iter().map(|r| r.g_total_system).sum::<f64>() / routes.len() as f64,
        routes,
    }
}

pub fn simulate(
    routes: &[RouteRecord],
    points: &[PickupPoint],
    params: &AdoptionParams,
    mode: SimulationMode,
) -> Result<ScenarioResult> {
    Ok(ConsolidationModel::new(routes, points)?.simulate(params, mode))
}

pub fn sweep(
    routes: &[RouteRecord],
    points: &[PickupPoint],
    grid: &SweepGrid,
    mode: SimulationMode,
) -> Result<Vec<ScenarioResult>> {
    ConsolidationModel::new(routes, points)?.sweep(grid, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub thresholds: Vec<f64>,
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl SweepGrid {
    /// `t ∈ {0.25, 0.5, 1}`, `β ∈ {1, 5, 10}`, `λ ∈ {0.25, 0.5, 0.75, 1}`.
    pub fn standard() -> Self {
        Self {
            thresholds: vec![0.25, 0.5, 1.0],
            betas: vec![1.0, 5.0, 10.0],
            lambdas: vec![0.25, 0.5, 0.75, 1.0],
        }
    }

    /// Validated parameter sets, `t` slowest and `λ` fastest, each axis
    /// ascending.
    pub fn cells(&self) -> Result<Vec<AdoptionParams>> {
        let sorted = |axis: &[f64], name: &str| -> Result<Vec<f64>> {
            if axis.is_empty() {
                return Err(Error::domain(format!("sweep axis {name} is empty")));
            }
            let mut v = axis.to_vec();
            v.sort_by(f64::total_cmp);
            Ok(v)
        };
        let ts = sorted(&self.thresholds, "t")?;
        let bs = sorted(&self.betas, "beta")?;
        let ls = sorted(&self.lambdas, "lambda")?;
        let mut cells = Vec::with_capacity(ts.len() * bs.len() * ls.len());
        for &t in &ts {
            for &b in &bs {
                for &l in &ls {
                    cells.push(AdoptionParams::new(t, b, l)?);
                }
            }
        }
        Ok(cells)
    }
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self::standard()
    }
}
