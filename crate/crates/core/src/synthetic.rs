//! Seeded synthetic route families with known structure, used as oracles for
//! the analytics and consolidation code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};

use crate::analytics::predict_distance;
use crate::entropy::profile;
use crate::ingest::{to_allocation, PickupPoint, RouteRecord, StopKind, StopRecord};

const ORIGIN: (f64, f64) = (47.60, -122.33);
/// Degrees of latitude per km along a meridian.
const DEG_PER_KM: f64 = 360.0 / (2.0 * std::f64::consts::PI * 6371.0);

fn home(i: usize, lat: f64, lon: f64, parcels: u64) -> StopRecord {
    StopRecord {
        stop_id: format!("s{i:03}"),
        lat,
        lon,
        kind: StopKind::Home,
        parcel_count: parcels,
    }
}

/// Stops spaced 100 m apart heading north from a fixed origin.
pub fn route_from_counts(route_id: &str, city: &str, counts: &[u64]) -> RouteRecord {
    let step = 0.1 * DEG_PER_KM;
    RouteRecord {
        route_id: route_id.into(),
        city: city.into(),
        total_distance_km: None,
        stops: counts
            .iter()
            .enumerate()
            .map(|(i, &c)| home(i, ORIGIN.0 + i as f64 * step, ORIGIN.1, c))
            .collect(),
    }
}

/// `n` parcels: `lumped_share` of them in stops of `lump_size`, the rest one
/// per stop.
pub fn lumpy_counts(n: u64, lump_size: u64, lumped_share: f64) -> Vec<u64> {
    let lump_size = lump_size.max(1);
    let lumps = ((n as f64 * lumped_share) as u64) / lump_size;
    let mut counts = vec![lump_size; lumps as usize];
    counts.extend(std::iter::repeat_n(1, (n - lumps * lump_size) as usize));
    counts
}

/// Routes of 120 parcels, half of them in lumps whose size is drawn from
/// 2..=12; everything but lumpiness is held fixed.
pub fn lumpiness_family(routes: usize, seed: u64) -> Vec<RouteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..routes)
        .map(|i| {
            let size = rng.random_range(2..=12);
            route_from_counts(&format!("L{i:04}"), "lumpy", &lumpy_counts(120, size, 0.5))
        })
        .collect()
}

/// Routes of 120 parcels with `1 - knob` of the parcels in stops of six. A
/// larger knob means more single-parcel stops and a more fragmented route.
pub fn fragmentation_dataset(knob: f64, routes: usize) -> Vec<RouteRecord> {
    let counts = lumpy_counts(120, 6, 1.0 - knob.clamp(0.0, 1.0));
    (0..routes)
        .map(|i| route_from_counts(&format!("F{i:04}"), "frag", &counts))
        .collect()
}

/// Routes whose recorded distance follows `κ·g/(1-g)` times `1 + noise·z` with
/// standard normal `z`. Stop sizes are `Geometric` with a per-route mean in
/// `[1.3, 6]`.
pub fn kappa_corpus(
    city: &str,
    routes: usize,
    kappa: f64,
    noise: f64,
    seed: u64,
) -> Vec<RouteRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(routes);
    while out.len() < routes {
        let mean_size: f64 = rng.random_range(1.3..6.0);
        let target: u64 = rng.random_range(120..=200);
        let extra = Geometric::new(1.0 / mean_size).expect("probability in (0, 1]");
        let mut counts = Vec::new();
        let mut left = target;
        while left > 0 {
            let c = (1 + extra.sample(&mut rng)).min(left);
            counts.push(c);
            left -= c;
        }
        let mut route = route_from_counts(&format!("{city}-{:04}", out.len()), city, &counts);
        let g = profile::<f64>(&to_allocation(&route).expect("non-empty counts"))
            .g_norm
            .expect("at least two parcels");
        let Ok(clean) = predict_distance(kappa, g) else {
            continue;
        };
        let z: f64 = StandardNormal.sample(&mut rng);
        route.total_distance_km = Some(clean * (1.0 + noise * z));
        out.push(route);
    }
    out
}

/// Four routes of `stops_per_route` home stops scattered over a 3 km square,
/// each starting at a depot, and a 3×3 lattice of pickup points over the
/// same square.
pub fn consolidation_fixture(
    stops_per_route: usize,
    seed: u64,
) -> (Vec<RouteRecord>, Vec<PickupPoint>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 3.0 * DEG_PER_KM;
    let lon_span = span / ORIGIN.0.to_radians().cos();
    let routes = (0..4)
        .map(|r| {
            let mut stops = vec![StopRecord {
                stop_id: "depot".into(),
                lat: ORIGIN.0,
                lon: ORIGIN.1,
                kind: StopKind::Station,
                parcel_count: 0,
            }];
            for i in 0..stops_per_route {
                let parcels = match rng.random_range(0..10) {
                    0..=5 => 1,
                    6..=8 => 2,
                    _ => rng.random_range(3..=6),
                };
                stops.push(home(
                    i,
                    ORIGIN.0 + rng.random_range(0.0..span),
                    ORIGIN.1 + rng.random_range(0.0..lon_span),
                    parcels,
                ));
            }
            RouteRecord {
                route_id: format!("C{r}"),
                city: "fixture".into(),
                total_distance_km: None,
                stops,
            }
        })
        .collect();
    let points = (0..9)
        .map(|k| PickupPoint {
            point_id: format!("{}", k + 1),
            lat: ORIGIN.0 + (0.5 + (k / 3) as f64) * span / 3.0,
            lon: ORIGIN.1 + (0.5 + (k % 3) as f64) * lon_span / 3.0,
        })
        .collect();
    (routes, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{correlation_battery, fit_kappa};
    use crate::ingest::{route_distance_km, summarize};

    #[test]
    fn lumpy_counts_conserve_parcels() {
        for size in 1..15 {
            for share in [0.0, 0.3, 0.5, 1.0] {
                assert_eq!(lumpy_counts(120, size, share).iter().sum::<u64>(), 120);
            }
        }
    }

    #[test]
    fn lumpiness_drives_negative_correlation() {
        let report = correlation_battery(&lumpiness_family(200, 11)).unwrap();
        let s = report.entries[0].stats.unwrap();
        assert!(s.pearson <= -0.9, "{}", s.pearson);
    }

    #[test]
    fn fragmentation_knob_raises_mean_g_norm() {
        let means: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&k| {
                summarize(&fragmentation_dataset(k, 3))
                    .unwrap()
                    .metric("g_norm")
                    .unwrap()
                    .mean
            })
            .collect();
        assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
    }

    #[test]
    fn noiseless_corpus_recovers_kappa() {
        let routes = kappa_corpus("x", 50, 20.8, 0.0, 3);
        let pts: Vec<(f64, f64)> = routes
            .iter()
            .map(|r| {
                let g = profile::<f64>(&to_allocation(r).unwrap()).g_norm.unwrap();
                (g, route_distance_km(r).unwrap())
            })
            .collect();
        let f = fit_kappa(&pts).unwrap();
        assert!((f.kappa / 20.8 - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn fixture_shape() {
        let (routes, points) = consolidation_fixture(50, 1);
        assert_eq!(routes.iter().map(|r| r.stops.len() - 1).sum::<usize>(), 200);
        assert_eq!(points.len(), 9);
        assert!(routes.iter().all(|r| r.check().is_ok()));
        assert_eq!(consolidation_fixture(50, 1), (routes, points));
    }
}
