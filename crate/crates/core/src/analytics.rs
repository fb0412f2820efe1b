//! Cross-metric validation: the `d = κ·G_norm/(1 - G_norm)` distance law,
//! route compactness, and correlations between entropy and route geometry.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::entropy::{profile, EntropyProfile};
use crate::error::{Error, Result};
use crate::ingest::{haversine_km, route_distance_km, to_allocation, RouteRecord, StopKind};
use crate::scalar::Scalar;

/// Points with `g_norm ≥ 1 - EXCLUSION_EPS` are dropped from κ fits.
pub const EXCLUSION_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit<T> {
    pub kappa: T,
    /// Uncentered, against the origin-constrained model.
    pub r_squared: T,
    pub n_points: usize,
    /// Residual standard deviation with `n - 1` degrees of freedom; zero for a
    /// single point.
    pub residual_std: T,
    pub excluded_points: usize,
}

/// Through-origin least squares of distance on `x = g/(1 - g)`.
pub fn fit_kappa<T: Scalar>(points: &[(T, T)]) -> Result<ScalingFit<T>> {
    let cutoff = T::one() - T::lit(EXCLUSION_EPS);
    let mut used = Vec::with_capacity(points.len());
    let mut excluded = 0;
    for &(g, d) in points {
        if !(g >= T::zero()) || !d.is_finite() {
            return Err(Error::domain(format!(
                "invalid fit point (g_norm = {g}, distance = {d})"
            )));
        }
        if g >= cutoff {
            excluded += 1;
        } else {
            used.push((g / (T::one() - g), d));
        }
    }
    if used.is_empty() {
        return Err(Error::Fit(
            "no points left after excluding g_norm near 1".into(),
        ));
    }
    let sxx = used.iter().fold(T::zero(), |a, &(x, _)| a + x * x);
    if sxx == T::zero() {
        return Err(Error::Fit("degenerate regressor: every g_norm is 0".into()));
    }
    let sxy = used.iter().fold(T::zero(), |a, &(x, d)| a + x * d);
    let kappa = sxy / sxx;
    let ss_res = used
        .iter()
        .fold(T::zero(), |a, &(x, d)| a + (d - kappa * x).powi(2));
    let ss_tot = used.iter().fold(T::zero(), |a, &(_, d)| a + d * d);
    let r_squared = if ss_tot == T::zero() {
        T::one()
    } else {
        (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one())
    };
    let n = used.len();
    let residual_std = if n > 1 {
        (ss_res / T::from_count(n as u64 - 1)).sqrt()
    } else {
        T::zero()
    };
    Ok(ScalingFit {
        kappa,
        r_squared,
        n_points: n,
        residual_std,
        excluded_points: excluded,
    })
}

pub fn predict_distance<T: Scalar>(kappa: T, g_norm: T) -> Result<T> {
    if !(g_norm >= T::zero() && g_norm < T::one()) {
        return Err(Error::domain(format!(
            "g_norm must lie in [0, 1), got {g_norm}"
        )));
    }
    Ok(kappa * g_norm / (T::one() - g_norm))
}

/// Inverse mean spacing between consecutive non-station stops, in stops per km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compactness {
    Finite(f64),
    /// Every stop sits at the same coordinates.
    Infinite,
}

impl Compactness {
    pub fn finite(self) -> Option<f64> {
        match self {
            Compactness::Finite(c) => Some(c),
            Compactness::Infinite => None,
        }
    }
}

pub fn compactness(r: &RouteRecord) -> Result<Compactness> {
    let stops: Vec<_> = r
        .stops
        .iter()
        .filter(|s| s.kind != StopKind::Station)
        .map(|s| s.point())
        .collect();
    if stops.len() < 2 {
        return Err(Error::domain(format!(
            "route {}: compactness needs at least two non-station stops",
            r.route_id
        )));
    }
    let total: f64 = stops.windows(2).map(|w| haversine_km(w[0], w[1])).sum();
    if total == 0.0 {
        return Ok(Compactness::Infinite);
    }
    Ok(Compactness::Finite((stops.len() - 1) as f64 / total))
}

/// Per-route quantities entering the correlation battery and route tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteMetrics {
    pub route_id: String,
    pub city: String,
    pub profile: EntropyProfile<f64>,
    pub mean_per_stop: f64,
    pub std_parcels: f64,
    pub distance_km: Option<f64>,
    pub compactness: Option<Compactness>,
}

pub fn route_metrics(r: &RouteRecord) -> Result<RouteMetrics> {
    let alloc = to_allocation(r)?;
    Ok(RouteMetrics {
        route_id: r.route_id.clone(),
        city: r.city.clone(),
        profile: profile(&alloc),
        mean_per_stop: alloc.mean_per_stop(),
        std_parcels: alloc.count_std_dev(),
        distance_km: route_distance_km(r).ok(),
        compactness: compactness(r).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStats {
    pub pearson: f64,
    pub spearman: f64,
    /// Two-sided, for the Pearson coefficient.
    pub p_value: f64,
    pub spearman_p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub metric_x: String,
    pub metric_y: String,
    pub n: usize,
    /// `None` when either series is constant or fewer than three pairs exist.
    pub stats: Option<CorrelationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub entries: Vec<CorrelationEntry>,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Two-sided p-value of `H0: ρ = 0` from `t = r·sqrt((n-2)/(1-r²))`.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    if n < 3 {
        return f64::NAN;
    }
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

pub fn correlate(metric_x: &str, metric_y: &str, pairs: &[(f64, f64)]) -> CorrelationEntry {
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let n = pairs.len();
    let stats = if n < 3 {
        None
    } else {
        pearson(&x, &y)
            .zip(spearman(&x, &y))
            .map(|(p, s)| CorrelationStats {
                pearson: p,
                spearman: s,
                p_value: correlation_p_value(p, n),
                spearman_p_value: correlation_p_value(s, n),
            })
    };
    CorrelationEntry {
        metric_x: metric_x.into(),
        metric_y: metric_y.into(),
        n,
        stats,
    }
}

/// Pearson and Spearman for (G_norm, std parcels/stop), (G_norm, compactness),
/// (G_norm, distance) and (N, distance). Routes missing a metric drop out of
/// the pairs that use it.
pub fn correlation_battery(routes: &[RouteRecord]) -> Result<CorrelationReport> {
    if routes.len() < 3 {
        return Err(Error::domain(
            "correlation battery needs at least three routes",
        ));
    }
    let metrics = routes
        .iter()
        .map(route_metrics)
        .collect::<Result<Vec<_>>>()?;
    let collect = |f: &dyn Fn(&RouteMetrics) -> Option<(f64, f64)>| -> Vec<(f64, f64)> {
        metrics.iter().filter_map(f).collect()
    };
    let g = |m: &RouteMetrics| m.profile.g_norm;
    let entries = vec![
        correlate(
            "g_norm",
            "std_parcels_per_stop",
            &collect(&|m| Some((g(m)?, m.std_parcels))),
        ),
        correlate(
            "g_norm",
            "compactness",
            &collect(&|m| Some((g(m)?, m.compactness?.finite()?))),
        ),
        correlate(
            "g_norm",
            "distance_km",
            &collect(&|m| Some((g(m)?, m.distance_km?))),
        ),
        correlate(
            "n_parcels",
            "distance_km",
            &collect(&|m| Some((m.profile.n as f64, m.distance_km?))),
        ),
    ];
    Ok(CorrelationReport { entries })
}
