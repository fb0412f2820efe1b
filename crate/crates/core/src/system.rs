//! System-wide entropy: carrier deliveries plus customer collection trips.

use serde::{Deserialize, Serialize};

use crate::entropy::{log_factorial_u64, Allocation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Home deliveries, pickup-point allocations and the number of customers who
/// collect from pickup points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemState {
    home_parcels: Vec<u64>,
    pickup_parcels: Vec<u64>,
    c_pickup: u64,
}

impl SystemState {
    /// `home_parcels` holds `q_i` per home customer, `pickup_parcels` holds
    /// `p_k` per pickup point. Every entry must be positive and
    /// `1 ≤ c_pickup ≤ Σ p_k` whenever any parcel sits at a pickup point.
    pub fn new(home_parcels: Vec<u64>, pickup_parcels: Vec<u64>, c_pickup: u64) -> Result<Self> {
        if home_parcels.iter().chain(&pickup_parcels).any(|&c| c == 0) {
            return Err(Error::domain("home and pickup parcel counts must be ≥ 1"));
        }
        let n_pickup: u64 = pickup_parcels.iter().sum();
        if c_pickup > n_pickup {
            return Err(Error::domain(format!(
                "{c_pickup} pickup customers exceed the {n_pickup} parcels at pickup points"
            )));
        }
        if n_pickup > 0 && c_pickup == 0 {
            return Err(Error::domain(
                "parcels at pickup points need at least one collecting customer",
            ));
        }
        Ok(Self {
            home_parcels,
            pickup_parcels,
            c_pickup,
        })
    }

    /// Pure home delivery of one parcel to each of `n` customers.
    pub fn home_baseline(n: u64) -> Self {
        Self {
            home_parcels: vec![1; n as usize],
            pickup_parcels: Vec::new(),
            c_pickup: 0,
        }
    }

    /// Every parcel at a pickup point, one customer per parcel.
    pub fn pure_pickup(pickup: &Allocation) -> Self {
        Self {
            home_parcels: Vec::new(),
            pickup_parcels: pickup.occupied().collect(),
            c_pickup: pickup.total(),
        }
    }

    pub fn home_parcels(&self) -> &[u64] {
        &self.home_parcels
    }

    pub fn pickup_parcels(&self) -> &[u64] {
        &self.pickup_parcels
    }

    pub fn c_pickup(&self) -> u64 {
        self.c_pickup
    }

    pub fn c_home(&self) -> usize {
        self.home_parcels.len()
    }

    pub fn c_total(&self) -> u64 {
        self.c_pickup + self.home_parcels.len() as u64
    }

    pub fn n_pickup(&self) -> u64 {
        self.pickup_parcels.iter().sum()
    }

    /// `N = Σ q_i + Σ p_k`.
    pub fn total_parcels(&self) -> u64 {
        self.home_parcels.iter().sum::<u64>() + self.n_pickup()
    }

    /// Copy with a different collecting-customer count (no bound checks; used
    /// for trip-chaining spectra where the count may drop to zero).
    fn with_collection_trips(&self, trips: u64) -> Self {
        Self {
            c_pickup: trips,
            ..self.clone()
        }
    }
}

fn sum_log_factorials<T: Scalar>(counts: &[u64]) -> T {
    counts
        .iter()
        .map(|&c| log_factorial_u64::<T>(c))
        .fold(T::zero(), |a, b| a + b)
}

/// `ln(N!) - Σ_k ln(p_k!) - Σ_i ln(q_i!)`.
pub fn delivery_entropy<T: Scalar>(s: &SystemState) -> Result<T> {
    let n = s.total_parcels();
    if n == 0 {
        return Err(Error::domain("system state holds no parcels"));
    }
    Ok(log_factorial_u64::<T>(n)
        - sum_log_factorials::<T>(&s.pickup_parcels)
        - sum_log_factorials::<T>(&s.home_parcels))
}

/// `ln(C_pickup!)`: one independent collection trip per pickup customer.
pub fn collection_entropy<T: Scalar>(c_pickup: u64) -> T {
    log_factorial_u64::<T>(c_pickup)
}

pub fn total_entropy<T: Scalar>(s: &SystemState) -> Result<T> {
    Ok(delivery_entropy::<T>(s)? + collection_entropy::<T>(s.c_pickup))
}

/// Total entropy over the home-delivery baseline `ln(N!)`; `None` for `N < 2`.
/// Values above 1 mean the system is more disordered than pure home delivery.
pub fn normalized_total<T: Scalar>(s: &SystemState) -> Result<Option<T>> {
    let n = s.total_parcels();
    let total = total_entropy::<T>(s)?;
    Ok((n >= 2).then(|| total / log_factorial_u64::<T>(n)))
}

/// Delivery-side and customer-side entropy when every parcel sits at a pickup
/// point and parcels there are interchangeable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conservation<T> {
    pub delivery_side: T,
    pub customer_side: T,
    pub sum: T,
}

pub fn conservation_check<T: Scalar>(a: &Allocation) -> Conservation<T> {
    let counts: Vec<u64> = a.occupied().collect();
    let customer_side = sum_log_factorials::<T>(&counts);
    let delivery_side = log_factorial_u64::<T>(a.total()) - customer_side;
    Conservation {
        delivery_side,
        customer_side,
        sum: delivery_side + customer_side,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialIncrease<T> {
    pub total: T,
    pub baseline: T,
    pub strictly_greater: bool,
}

/// Pure pickup consolidation with one customer per parcel against pure home
/// delivery. Requires `K ≥ 2` occupied points.
pub fn spatial_increase_check<T: Scalar>(pickup: &Allocation) -> Result<SpatialIncrease<T>> {
    if pickup.stops() < 2 {
        return Err(Error::precondition(format!(
            "spatial increase needs at least two occupied pickup points, got {}",
            pickup.stops()
        )));
    }
    let total = total_entropy::<T>(&SystemState::pure_pickup(pickup))?;
    let baseline = log_factorial_u64::<T>(pickup.total());
    Ok(SpatialIncrease {
        total,
        baseline,
        strictly_greater: total > baseline,
    })
}

/// Batching `N` parcels into `C` delivery events and, optionally, customers
/// folding their retrievals into `U` trips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalScenario {
    pub n_parcels: u64,
    pub n_events: u64,
    #[serde(default)]
    pub event_allocation: Option<Vec<u64>>,
    pub c_pickup_customers: u64,
    pub u_trips: u64,
}

impl TemporalScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_events > self.n_parcels {
            return Err(Error::precondition(format!(
                "{} delivery events exceed {} parcels",
                self.n_events, self.n_parcels
            )));
        }
        if self.u_trips > self.c_pickup_customers {
            return Err(Error::precondition(format!(
                "{} collection trips exceed {} pickup customers",
                self.u_trips, self.c_pickup_customers
            )));
        }
        if let Some(alloc) = &self.event_allocation {
            let sum: u64 = alloc.iter().sum();
            if sum != self.n_events {
                return Err(Error::precondition(format!(
                    "event allocation sums to {sum}, expected {}",
                    self.n_events
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalEntropy<T> {
    pub before: T,
    pub after: T,
}

/// `ln(N!)` before and `ln(C!)` after temporal batching.
pub fn temporal_entropy<T: Scalar>(t: &TemporalScenario) -> Result<TemporalEntropy<T>> {
    if t.n_events > t.n_parcels {
        return Err(Error::precondition(format!(
            "{} delivery events exceed {} parcels",
            t.n_events, t.n_parcels
        )));
    }
    Ok(TemporalEntropy {
        before: log_factorial_u64::<T>(t.n_parcels),
        after: log_factorial_u64::<T>(t.n_events),
    })
}

/// `ln(U!)` once customers consolidate retrievals into `U` trips.
pub fn customer_temporal_entropy<T: Scalar>(t: &TemporalScenario) -> Result<T> {
    if t.u_trips > t.c_pickup_customers {
        return Err(Error::precondition(format!(
            "{} collection trips exceed {} pickup customers",
            t.u_trips, t.c_pickup_customers
        )));
    }
    Ok(log_factorial_u64::<T>(t.u_trips))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainingSpectrum<T> {
    /// `(U, total entropy with collection term ln(U!))` for `U = 0..=C_pickup`.
    pub entries: Vec<(u64, T)>,
    /// Home-delivery baseline `ln(N!)`.
    pub baseline: T,
    /// Adjacent `(U, U + 1)` whose totals straddle the baseline, or `(U, U)` on
    /// an exact hit. `None` when the whole spectrum lies on one side.
    pub bracket: Option<(u64, u64)>,
}

/// Total entropy as independent collection trips are progressively chained
/// into pre-existing trips.
pub fn chaining_spectrum<T: Scalar>(s: &SystemState) -> Result<ChainingSpectrum<T>> {
    let delivery = delivery_entropy::<T>(s)?;
    let baseline = log_factorial_u64::<T>(s.total_parcels());
    let entries: Vec<(u64, T)> = (0..=s.c_pickup)
        .map(|u| {
            let chained = s.with_collection_trips(u);
            (u, delivery + collection_entropy::<T>(chained.c_pickup))
        })
        .collect();
    let bracket = entries
        .iter()
        .find(|(_, g)| *g == baseline)
        .map(|&(u, _)| (u, u))
        .or_else(|| {
            entries
                .windows(2)
                .find(|w| w[0].1 < baseline && w[1].1 > baseline)
                .map(|w| (w[0].0, w[1].0))
        });
    Ok(ChainingSpectrum {
        entries,
        baseline,
        bracket,
    })
}
