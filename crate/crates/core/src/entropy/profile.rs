use std::fmt;

use serde::{Deserialize, Serialize};

use super::{log_factorial_u64, Allocation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `G = ln(N!) - Σ ln(p_k!)`: log of the number of microstates (assignments of
/// distinguishable parcels to fixed stops) realizing the allocation.
pub fn structural_entropy<T: Scalar>(a: &Allocation) -> T {
    let parts = a
        .occupied()
        .map(log_factorial_u64::<T>)
        .fold(T::zero(), |acc, v| acc + v);
    log_factorial_u64::<T>(a.total()) - parts
}

/// `H = -Σ φ_k ln φ_k` with `φ_k = p_k / N`, evaluated as
/// `ln N - (1/N) Σ p_k ln p_k` so that `N·H` is exact for unit counts.
pub fn shannon_entropy<T: Scalar>(a: &Allocation) -> T {
    let n = T::from_count(a.total());
    let weighted = a
        .occupied()
        .map(|p| {
            let p = T::from_count(p);
            p * p.ln()
        })
        .fold(T::zero(), |acc, v| acc + v);
    (n.ln() - weighted / n).max(T::zero())
}

/// Route-level entropy KPI.
///
/// `g_norm` is `None` when `N < 2` (`ln N! = 0`), `h_norm` is `None` when
/// `K < 2` (`ln K = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile<T> {
    pub g: T,
    pub g_norm: Option<T>,
    pub h: T,
    pub h_norm: Option<T>,
    pub n: u64,
    pub k: usize,
}

pub fn profile<T: Scalar>(a: &Allocation) -> EntropyProfile<T> {
    let g = structural_entropy::<T>(a);
    let h = shannon_entropy::<T>(a);
    let n = a.total();
    let k = a.stops();
    let unit = |x: T| x.max(T::zero()).min(T::one());
    let g_norm = (n >= 2).then(|| unit(g / log_factorial_u64::<T>(n)));
    let h_norm = (k >= 2).then(|| unit(h / T::from_count(k as u64).ln()));
    EntropyProfile {
        g,
        g_norm,
        h,
        h_norm,
        n,
        k,
    }
}

/// Cuts on `G_norm` and `H_norm` separating "low" from "high".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantThresholds {
    g_threshold: f64,
    h_threshold: f64,
}

impl QuadrantThresholds {
    pub fn new(g_threshold: f64, h_threshold: f64) -> Result<Self> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(g_threshold) || !open_unit(h_threshold) {
            return Err(Error::domain(format!(
                "quadrant thresholds must lie in (0, 1), got ({g_threshold}, {h_threshold})"
            )));
        }
        Ok(Self {
            g_threshold,
            h_threshold,
        })
    }

    pub fn g_threshold(&self) -> f64 {
        self.g_threshold
    }

    pub fn h_threshold(&self) -> f64 {
        self.h_threshold
    }
}

impl Default for QuadrantThresholds {
    fn default() -> Self {
        Self {
            g_threshold: 0.5,
            h_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    /// Grouped stops, infrastructure fully utilized.
    #[serde(rename = "LowG-HighH")]
    LowGHighH,
    /// Balanced but fragmented demand.
    #[serde(rename = "HighG-HighH")]
    HighGHighH,
    /// Grouped stops with demand skewed to a few nodes.
    #[serde(rename = "LowG-LowH")]
    LowGLowH,
    /// Dispersed demand with high local volatility.
    #[serde(rename = "HighG-LowH")]
    HighGLowH,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrant::LowGHighH => "LowG-HighH",
            Quadrant::HighGHighH => "HighG-HighH",
            Quadrant::LowGLowH => "LowG-LowH",
            Quadrant::HighGLowH => "HighG-LowH",
        })
    }
}

/// Places a profile in one of the four entropy quadrants. A value equal to its
/// threshold counts as high.
pub fn classify_quadrant<T: Scalar>(
    p: &EntropyProfile<T>,
    th: &QuadrantThresholds,
) -> Result<Quadrant> {
    let g = p
        .g_norm
        .ok_or_else(|| Error::Classification(format!("G_norm undefined for N = {}", p.n)))?;
    let h = p
        .h_norm
        .ok_or_else(|| Error::Classification(format!("H_norm undefined for K = {}", p.k)))?;
    let high_g = g.as_f64() >= th.g_threshold;
    let high_h = h.as_f64() >= th.h_threshold;
    Ok(match (high_g, high_h) {
        (false, true) => Quadrant::LowGHighH,
        (true, true) => Quadrant::HighGHighH,
        (false, false) => Quadrant::LowGLowH,
        (true, false) => Quadrant::HighGLowH,
    })
}
