use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parcel counts per stop: the macrostate of a route.
///
/// Zero entries are kept (datasets carry empty placeholders) but do not count
/// as occupied stops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Allocation {
    counts: Vec<u64>,
    total: u64,
}

impl Allocation {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::domain("parcel total overflows u64"))?;
        if total == 0 {
            return Err(Error::domain("allocation must hold at least one parcel"));
        }
        Ok(Self { counts, total })
    }

    /// `stops` stops holding `per_stop` parcels each.
    pub fn uniform(stops: usize, per_stop: u64) -> Result<Self> {
        Self::new(vec![per_stop; stops])
    }

    /// `n` parcels over `k` stops: `n mod k` stops get `ceil(n/k)`, the rest
    /// `floor(n/k)`.
    pub fn balanced(n: u64, k: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::domain(format!(
                "cannot spread {n} parcels over {k} occupied stops"
            )));
        }
        let (q, r) = (n / k, n % k);
        let counts = (0..k).map(|i| if i < r { q + 1 } else { q }).collect();
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Strictly positive counts, in input order.
    pub fn occupied(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().copied().filter(|&c| c > 0)
    }

    /// `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `K`: stops with at least one parcel.
    pub fn stops(&self) -> usize {
        self.occupied().count()
    }

    /// Average parcels per occupied stop, `N / K`.
    pub fn mean_per_stop<T: Scalar>(&self) -> T {
        T::from_count(self.total) / T::from_count(self.stops() as u64)
    }

    /// Population standard deviation of the occupied counts.
    pub fn count_std_dev<T: Scalar>(&self) -> T {
        let mean = self.mean_per_stop::<T>();
        let k = T::from_count(self.stops() as u64);
        let ss = self
            .occupied()
            .map(|c| {
                let d = T::from_count(c) - mean;
                d * d
            })
            .fold(T::zero(), |a, b| a + b);
        (ss / k).sqrt()
    }

    /// Shares `p_k / N` of the occupied stops.
    pub fn shares<T: Scalar>(&self) -> Vec<T> {
        let n = T::from_count(self.total);
        self.occupied().map(|c| T::from_count(c) / n).collect()
    }

    /// Every count multiplied by `m`.
    pub fn scaled(&self, m: u64) -> Result<Self> {
        let counts = self
            .counts
            .iter()
            .map(|&c| c.checked_mul(m))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::domain("scaled allocation overflows u64"))?;
        Self::new(counts)
    }
}

impl TryFrom<Vec<u64>> for Allocation {
    type Error = Error;

    fn try_from(counts: Vec<u64>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<Allocation> for Vec<u64> {
    fn from(a: Allocation) -> Self {
        a.counts
    }
}
