use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lastmile_entropy::analytics::{correlation_battery, fit_kappa, route_metrics};
use lastmile_entropy::consolidation::{
    activation_probability, AdoptionParams, ConsolidationModel, SimulationMode, SweepGrid,
};
use lastmile_entropy::entropy::stirling::stirling_row;
use lastmile_entropy::entropy::{shannon_entropy, structural_entropy};
use lastmile_entropy::generalized::{
    consistency_report, general_total_entropy, special_case_entropy, ClassSpec, FailureModel,
    HomeTerm, SpecialCase,
};
use lastmile_entropy::ingest::summarize;
use lastmile_entropy::synthetic::{
    consolidation_fixture, kappa_corpus, lumpiness_family, route_from_counts,
};
use lastmile_entropy::system::{
    chaining_spectrum, conservation_check, customer_temporal_entropy, delivery_entropy,
    spatial_increase_check, temporal_entropy, SystemState, TemporalScenario,
};
use lastmile_entropy::{Allocation, GeneralScenario};

const BIN: &str = env!("CARGO_BIN_EXE_lastmile-entropy");

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ln_fact(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_counts(rng: &mut ChaCha8Rng, min_k: usize, max_k: usize, max_p: u64) -> Vec<u64> {
    let k = rng.random_range(min_k..=max_k);
    (0..k).map(|_| rng.random_range(1..=max_p)).collect()
}

// (N, p̄, G, err T1, err T2, err T3) for the divisible cells.
const PRINTED: [(u64, f64, f64, f64, f64, f64); 12] = [
    (100, 1.0, 363.74, 26.6, 2.2, -0.06),
    (100, 2.0, 329.08, 18.9, 0.6, -0.005),
    (100, 5.0, 267.99, 4.6, 0.1, -0.002),
    (100, 10.0, 212.7, 8.3, 0.04, 0.0),
    (200, 1.0, 863.23, 22.8, 1.9, -0.05),
    (200, 2.0, 793.92, 16.0, 0.5, -0.004),
    (200, 5.0, 671.73, 9.8, 0.1, 0.0),
    (200, 10.0, 516.14, 6.8, 0.03, 0.0),
    (300, 1.0, 1414.91, 20.9, 1.7, -0.05),
    (300, 2.0, 1310.93, 14.7, 0.5, -0.004),
    (300, 5.0, 1127.66, 8.9, 0.1, 0.0),
    (300, 10.0, 961.77, 6.1, 0.03, 0.0),
];

fn c1_stirling_exact() -> Outcome {
    let start = Instant::now();
    let rows: Vec<_> = PRINTED
        .iter()
        .map(|&(n, p, ..)| stirling_row(n, p).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let elapsed = start.elapsed();
    let mut bad = Vec::new();
    for (row, &(n, p, printed, ..)) in rows.iter().zip(&PRINTED) {
        let target = if (n, p) == (200, 10.0) {
            561.14
        } else {
            printed
        };
        if (row.g_exact - target).abs() > 0.01 {
            bad.push(format!("({n},{p}) G={:.4} want {target}", row.g_exact));
        }
        let oracle = ln_fact(n) - row.k as f64 * ln_fact(n / row.k);
        if rel(row.g_exact, oracle) > 1e-12 {
            bad.push(format!(
                "({n},{p}) G={} but ln N! - K ln p! = {oracle}",
                row.g_exact
            ));
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))?;
    let out = Command::new(BIN)
        .arg("stirling")
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let flagged = text
        .lines()
        .find(|l| l.starts_with("200,10,"))
        .is_some_and(|l| l.contains("516.14") && l.contains("561.14"));
    ensure(flagged, || {
        "stirling output does not flag 516.14 at (200,10)".into()
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "12 cells within 0.01; (200,10) = {:.2}, 516.14 flagged; {elapsed:?}",
        rows[7].g_exact
    ))
}

fn c2_stirling_errors() -> Outcome {
    let mut bad = Vec::new();
    let mut worst = 0.0_f64;
    for &(n, p, _, e1, e2, e3) in &PRINTED {
        let row = stirling_row(n, p).map_err(|e| e.to_string())?;
        for (label, got, want) in [
            ("T1", row.err_t1, e1),
            ("T2", row.err_t2, e2),
            ("T3", row.err_t3, e3),
        ] {
            let d = (got - want).abs();
            worst = worst.max(d);
            if d > 0.15 {
                bad.push(format!("({n},{p}) {label} {got:+.3}% vs printed {want:+}%"));
            }
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok(format!(
        "36 error entries within 0.15 pp (worst {worst:.3})"
    ))
}

/// Counts assignments of labelled parcels to stops whose occupancy equals
/// `counts`, one parcel at a time.
fn brute_force_microstates(remaining: &mut [u64], parcels_left: u64) -> u64 {
    if parcels_left == 0 {
        return 1;
    }
    let mut total = 0;
    for k in 0..remaining.len() {
        if remaining[k] > 0 {
            remaining[k] -= 1;
            total += brute_force_microstates(remaining, parcels_left - 1);
            remaining[k] += 1;
        }
    }
    total
}

fn c3_microstates() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..500 {
        let n = rng.random_range(1..=8u64);
        let mut counts = Vec::new();
        let mut left = n;
        while left > 0 {
            let c = rng.random_range(1..=left);
            counts.push(c);
            left -= c;
        }
        let w = brute_force_microstates(&mut counts.clone(), n);
        let g =
            structural_entropy::<f64>(&Allocation::new(counts.clone()).map_err(|e| e.to_string())?);
        let d = ((w as f64).ln() - g).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9, || {
            format!("{counts:?}: ln W = {} but G = {g}", (w as f64).ln())
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "500 allocations, max |ln W - G| = {worst:.1e}; {elapsed:?}"
    ))
}

fn c4_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let counts = random_counts(&mut rng, 1, 60, 40);
        let a = Allocation::new(counts.clone()).map_err(|e| e.to_string())?;
        let c = conservation_check::<f64>(&a);
        let target = ln_fact(a.total());
        let sum = c.delivery_side + c.customer_side;
        let r = if target == 0.0 {
            sum.abs()
        } else {
            rel(sum, target)
        };
        worst = worst.max(r);
        ensure(r <= 1e-9, || {
            format!("{counts:?}: {sum} vs ln N! = {target}")
        })?;
    }
    Ok(format!("10^4 partitions, max relative error {worst:.1e}"))
}

fn c5_spatial_increase() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_margin = f64::INFINITY;
    for _ in 0..10_000 {
        let counts = random_counts(&mut rng, 2, 60, 40);
        let a = Allocation::new(counts.clone()).map_err(|e| e.to_string())?;
        let s = spatial_increase_check::<f64>(&a).map_err(|e| e.to_string())?;
        let n = a.total();
        let oracle = 2.0 * ln_fact(n) - counts.iter().map(|&p| ln_fact(p)).sum::<f64>();
        ensure(rel(s.total, oracle) <= 1e-9, || {
            format!("{counts:?}: total {} vs {oracle}", s.total)
        })?;
        ensure(s.strictly_greater && oracle > ln_fact(n), || {
            format!(
                "{counts:?}: total {} does not exceed ln N! {}",
                s.total,
                ln_fact(n)
            )
        })?;
        min_margin = min_margin.min(oracle - ln_fact(n));
    }
    Ok(format!(
        "10^4 partitions with K >= 2, smallest margin {min_margin:.3} nats"
    ))
}

fn c6_asymptotic() -> Outcome {
    let mut last = f64::INFINITY;
    let mut errs = Vec::new();
    for n in [100u64, 1_000, 10_000, 100_000] {
        let a = Allocation::uniform(10, n / 10).map_err(|e| e.to_string())?;
        let g = structural_entropy::<f64>(&a);
        let h = shannon_entropy::<f64>(&a);
        let err = (g - n as f64 * h).abs() / g;
        ensure(err < last, || {
            format!("ratio error {err:.3e} at N = {n} did not drop below {last:.3e}")
        })?;
        last = err;
        errs.push(format!("{err:.2e}"));
    }
    ensure(last <= 1e-3, || {
        format!("|G - NH|/G = {last:.3e} at N = 10^5")
    })?;
    Ok(format!("ratio errors {}", errs.join(" > ")))
}

fn c7_temporal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2_000 {
        let n = rng.random_range(0..=500u64);
        let c = rng.random_range(0..=n);
        let cp = rng.random_range(0..=300u64);
        let u = rng.random_range(0..=cp);
        let t = TemporalScenario {
            n_parcels: n,
            n_events: c,
            event_allocation: None,
            c_pickup_customers: cp,
            u_trips: u,
        };
        let te = temporal_entropy::<f64>(&t).map_err(|e| e.to_string())?;
        ensure(te.after <= te.before, || format!("ln {c}! > ln {n}!"))?;
        let cu = customer_temporal_entropy::<f64>(&t).map_err(|e| e.to_string())?;
        ensure(cu <= ln_fact(cp) + 1e-9 * ln_fact(cp).max(1.0), || {
            format!("ln {u}! > ln {cp}!")
        })?;
    }
    for _ in 0..200 {
        let home = random_counts(&mut rng, 0, 20, 4);
        let pickup = random_counts(&mut rng, 1, 5, 30);
        let n_pickup: u64 = pickup.iter().sum();
        let cp = rng.random_range(1..=n_pickup);
        let s = SystemState::new(home, pickup, cp).map_err(|e| e.to_string())?;
        let spec = chaining_spectrum::<f64>(&s).map_err(|e| e.to_string())?;
        let delivery = delivery_entropy::<f64>(&s).map_err(|e| e.to_string())?;
        ensure(spec.entries.windows(2).all(|w| w[0].1 <= w[1].1), || {
            "spectrum not monotone in U".into()
        })?;
        let first = spec.entries.first().map(|e| e.1 - delivery);
        let last = spec.entries.last().map(|e| e.1 - delivery);
        ensure(first == Some(0.0), || {
            format!("collection term at U = 0 is {first:?}")
        })?;
        let top = last.unwrap_or(f64::NAN);
        ensure(rel(top, ln_fact(cp)) <= 1e-9, || {
            format!("collection term at U = C is {top}, want ln {cp}!")
        })?;
    }
    Ok("2000 temporal draws and 200 chaining spectra".into())
}

fn single_class(
    n: f64,
    eta: f64,
    points: Vec<usize>,
    alloc: Vec<f64>,
    k: usize,
    c_pickup: u64,
) -> GeneralScenario {
    GeneralScenario {
        classes: vec![ClassSpec {
            n_parcels: n,
            eta,
            eligible_points: points,
            pickup_allocation: alloc,
        }],
        failure: FailureModel::new(0.0, 1).expect("valid failure model"),
        n_points: k,
        c_pickup,
    }
}

fn c8_generalized() -> Outcome {
    let mut worst = 0.0_f64;
    for n in [1u64, 2, 5, 10, 37, 100, 250] {
        let s = single_class(n as f64, 1.0, vec![], vec![], 0, 0);
        let target = ln_fact(n);
        let g = general_total_entropy(&s, HomeTerm::PerCustomer)
            .map_err(|e| e.to_string())?
            .total;
        ensure((g - target).abs() <= 1e-9 * target.max(1.0), || {
            format!("N = {n}: general {g} vs ln N! {target}")
        })?;
        let b = special_case_entropy(SpecialCase::Baseline, &s).map_err(|e| e.to_string())?;
        ensure((b - target).abs() <= 1e-9 * target.max(1.0), || {
            format!("N = {n}: baseline {b} vs {target}")
        })?;
        let rows = consistency_report(&[(SpecialCase::Baseline, s)], HomeTerm::PerCustomer)
            .map_err(|e| e.to_string())?;
        worst = worst.max(rows[0].gap.abs());
        ensure(rows[0].gap.abs() <= 1e-9, || {
            format!("N = {n}: baseline gap {}", rows[0].gap)
        })?;
    }
    let mut cells = Vec::new();
    for (counts, c_pickup) in [
        (vec![2.0, 2.0], 4),
        (vec![3.0, 1.0, 6.0], 5),
        (vec![12.0, 8.0], 1),
        (vec![25.0, 25.0, 25.0, 25.0], 60),
    ] {
        let n: f64 = counts.iter().sum();
        let k = counts.len();
        cells.push((
            n as u64,
            single_class(n, 0.0, (0..k).collect(), counts, k, c_pickup),
        ));
    }
    let grid: Vec<_> = cells
        .iter()
        .map(|(_, s)| (SpecialCase::DirectToPickup, s.clone()))
        .collect();
    for term in [HomeTerm::PerCustomer, HomeTerm::Pooled] {
        let rows = consistency_report(&grid, term).map_err(|e| e.to_string())?;
        for (row, (n, _)) in rows.iter().zip(&cells) {
            let want = ln_fact(*n);
            ensure(rel(row.gap, want) <= 1e-9, || {
                format!("N_r = {n} ({term:?}): gap {} vs ln N_r! {want}", row.gap)
            })?;
        }
    }
    let two = GeneralScenario {
        classes: vec![
            ClassSpec {
                n_parcels: 6.0,
                eta: 0.0,
                eligible_points: vec![0, 1],
                pickup_allocation: vec![4.0, 2.0],
            },
            ClassSpec {
                n_parcels: 9.0,
                eta: 0.0,
                eligible_points: vec![1, 2],
                pickup_allocation: vec![3.0, 6.0],
            },
        ],
        failure: FailureModel::new(0.0, 1).expect("valid failure model"),
        n_points: 3,
        c_pickup: 7,
    };
    let rows = consistency_report(&[(SpecialCase::DirectToPickup, two)], HomeTerm::PerCustomer)
        .map_err(|e| e.to_string())?;
    let want = ln_fact(6) + ln_fact(9);
    ensure(rel(rows[0].gap, want) <= 1e-9, || {
        format!("two classes: gap {} vs ln 6! + ln 9! {want}", rows[0].gap)
    })?;
    Ok(format!(
        "baseline gap <= {worst:.1e}; direct-to-pickup gaps equal ln N_r! per class"
    ))
}

fn c9_sigmoid() -> Outcome {
    let start = Instant::now();
    for beta in [1.0, 5.0, 10.0] {
        for t in [0.25, 0.5, 1.0, 2.0, 7.3] {
            let p = AdoptionParams::new(t, beta, 1.0).map_err(|e| e.to_string())?;
            let a = activation_probability(t, &p);
            ensure(a == 0.5, || format!("P_a(t={t}, beta={beta}) = {a}"))?;
        }
    }
    let (routes, points) = consolidation_fixture(50, 9);
    let stops: usize = routes.iter().map(|r| r.stops.len() - 1).sum();
    ensure(stops == 200, || format!("fixture has {stops} home stops"))?;
    let model = ConsolidationModel::new(&routes, &points).map_err(|e| e.to_string())?;
    let grid = SweepGrid::standard();
    let results = model
        .sweep(&grid, SimulationMode::Expectation)
        .map_err(|e| e.to_string())?;
    ensure(results.len() == 36, || format!("{} cells", results.len()))?;
    let at = |t: usize, b: usize, l: usize| results[t * 12 + b * 4 + l].g_norm_delivery;
    for t in 0..3 {
        for b in 0..3 {
            for l in 0..4 {
                if l + 1 < 4 && at(t, b, l + 1) > at(t, b, l) {
                    return Err(format!(
                        "g_norm rises with lambda at t#{t} beta#{b} lambda#{l}"
                    ));
                }
                if t + 1 < 3 && at(t + 1, b, l) > at(t, b, l) {
                    return Err(format!("g_norm rises with t at t#{t} beta#{b} lambda#{l}"));
                }
            }
        }
    }
    for &t in &grid.thresholds {
        for &b in &grid.betas {
            let p = AdoptionParams::new(t, b, 0.0).map_err(|e| e.to_string())?;
            let r = model.simulate(&p, SimulationMode::Expectation);
            ensure(r.reduction_vs_baseline == 0.0, || {
                format!(
                    "lambda = 0 reduction {} at t={t} beta={b}",
                    r.reduction_vs_baseline
                )
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    let best = results
        .iter()
        .map(|r| r.reduction_vs_baseline)
        .fold(0.0, f64::max);
    Ok(format!(
        "36 cells monotone, max reduction {best:.2}%, lambda = 0 gives 0; {elapsed:?}"
    ))
}

fn c10_kappa() -> Outcome {
    let fit_of = |noise: f64| -> Result<f64, String> {
        let routes = kappa_corpus("synthetic", 500, 20.8, noise, 10);
        let pts: Vec<(f64, f64)> = routes
            .iter()
            .filter_map(|r| {
                let m = route_metrics(r).ok()?;
                let g = m.profile.g_norm?;
                Some((g, m.distance_km?))
            })
            .collect();
        Ok(fit_kappa(&pts).map_err(|e| e.to_string())?.kappa)
    };
    let noisy = fit_of(0.05)?;
    ensure(rel(noisy, 20.8) <= 0.02, || format!("noisy kappa {noisy}"))?;
    let clean = fit_of(0.0)?;
    ensure(rel(clean, 20.8) <= 1e-9, || {
        format!("noiseless kappa {clean} (rel {:.1e})", rel(clean, 20.8))
    })?;
    let family = lumpiness_family(60, 10);
    let report = correlation_battery(&family).map_err(|e| e.to_string())?;
    let entry = report
        .entries
        .iter()
        .find(|e| e.metric_x == "g_norm" && e.metric_y == "std_parcels_per_stop")
        .ok_or("no g_norm/std_parcels_per_stop entry")?;
    let r = entry.stats.as_ref().map(|s| s.pearson).unwrap_or(f64::NAN);
    ensure(r <= -0.9, || format!("Pearson(G_norm, std) = {r}"))?;
    Ok(format!(
        "kappa {noisy:.3} (5% noise), {clean:.12} (noiseless); lumpiness Pearson {r:.3}"
    ))
}

fn c11_summary() -> Outcome {
    let routes = vec![
        route_from_counts("r1", "x", &[1, 1, 1, 6]),
        route_from_counts("r2", "x", &[2, 2, 7, 1]),
        route_from_counts("r3", "x", &[3]),
    ];
    let s = summarize(&routes).map_err(|e| e.to_string())?;
    let h = |shares: &[f64]| -shares.iter().map(|p| p * p.ln()).sum::<f64>();
    let g = [504f64.ln(), 23760f64.ln(), 0.0];
    let hv = [
        h(&[1. / 9., 1. / 9., 1. / 9., 6. / 9.]),
        h(&[2. / 12., 2. / 12., 7. / 12., 1. / 12.]),
        0.0,
    ];
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
        (
            m,
            sd,
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let exact = [
        ("n", (8.0, 14f64.sqrt(), 3.0, 12.0)),
        ("k", (3.0, 2f64.sqrt(), 1.0, 4.0)),
        ("n_per_k", (2.75, 0.125f64.sqrt(), 2.25, 3.0)),
    ];
    for (name, want) in exact {
        let m = s.metric(name).ok_or(format!("missing {name}"))?;
        let got = (m.mean, m.std_dev, m.min, m.max);
        ensure(got == want, || format!("{name}: {got:?} vs {want:?}"))?;
    }
    let derived = [
        ("g", stats(&g)),
        (
            "g_norm",
            stats(&[g[0] / 362880f64.ln(), g[1] / 479001600f64.ln(), 0.0]),
        ),
        ("h", stats(&hv)),
        ("h_norm", stats(&[hv[0] / 4f64.ln(), hv[1] / 4f64.ln()])),
    ];
    for (name, want) in derived {
        let m = s.metric(name).ok_or(format!("missing {name}"))?;
        for (label, got, w) in [
            ("mean", m.mean, want.0),
            ("std", m.std_dev, want.1),
            ("min", m.min, want.2),
            ("max", m.max, want.3),
        ] {
            ensure((got - w).abs() <= 1e-12 * w.abs().max(1.0), || {
                format!("{name} {label}: {got} vs {w}")
            })?;
        }
    }
    ensure(s.stop_count == 9, || format!("{} stops", s.stop_count))?;
    ensure(s.single_parcel_share == 4.0 / 9.0, || {
        format!("single share {}", s.single_parcel_share)
    })?;
    ensure(s.over_five_share == 2.0 / 9.0, || {
        format!("over-five share {}", s.over_five_share)
    })?;
    Ok("7 metrics match hand values; shares 4/9 and 2/9".into())
}

fn c12_cli_determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests");
    let fx = |n: &str| dir.join("fixtures").join(n).to_string_lossy().into_owned();
    let (routes, croutes, points, scen) = (
        fx("routes.json"),
        fx("consolidation_routes.json"),
        fx("points.csv"),
        fx("scenarios.toml"),
    );
    let cases: Vec<(Option<&str>, Vec<&str>)> = vec![
        (Some("analyze.csv"), vec!["analyze", &routes]),
        (
            Some("analyze.json"),
            vec!["analyze", &routes, "--format", "json"],
        ),
        (
            Some("analyze.md"),
            vec!["analyze", &routes, "--format", "md"],
        ),
        (Some("stirling.csv"), vec!["stirling"]),
        (Some("stirling.md"), vec!["stirling", "--format", "md"]),
        (None, vec!["stirling", "--format", "json"]),
        (
            Some("consolidate.csv"),
            vec!["consolidate", &croutes, "--points", &points],
        ),
        (
            Some("consolidate_mc.csv"),
            vec![
                "consolidate",
                &croutes,
                "--points",
                &points,
                "--mode",
                "mc",
                "--seed",
                "7",
            ],
        ),
        (
            None,
            vec![
                "consolidate",
                &croutes,
                "--points",
                &points,
                "--format",
                "json",
                "--mode",
                "mc",
                "--seed",
                "11",
            ],
        ),
        (Some("fit_kappa.csv"), vec!["fit-kappa", &routes]),
        (None, vec!["fit-kappa", &routes, "--format", "json"]),
        (
            Some("scenarios.md"),
            vec!["scenarios", &scen, "--format", "md"],
        ),
        (
            Some("scenarios.json"),
            vec!["scenarios", &scen, "--format", "json"],
        ),
        (None, vec!["scenarios", &scen]),
    ];
    for (golden, args) in &cases {
        let run = || {
            Command::new(BIN)
                .args(args)
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a.status.success(), || {
            format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr))
        })?;
        ensure(
            a.stdout == b.stdout && a.status.code() == b.status.code(),
            || format!("{args:?} differs between runs"),
        )?;
        if let Some(name) = golden {
            let expected =
                std::fs::read(dir.join("golden").join(name)).map_err(|e| format!("{name}: {e}"))?;
            ensure(a.stdout == expected, || {
                format!("{args:?} drifted from golden {name}")
            })?;
        }
    }
    Ok(format!(
        "{} invocations byte-identical, 10 golden files match",
        cases.len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("C1", "Stirling table, exact column", c1_stirling_exact),
        ("C2", "Stirling table, error columns", c2_stirling_errors),
        ("C3", "microstate oracle", c3_microstates),
        ("C4", "conservation", c4_conservation),
        ("C5", "spatial increase", c5_spatial_increase),
        ("C6", "asymptotic coupling", c6_asymptotic),
        ("C7", "temporal consolidation and chaining", c7_temporal),
        ("C8", "generalized entropy reductions", c8_generalized),
        ("C9", "sigmoid adoption sweep", c9_sigmoid),
        ("C10", "kappa recovery and lumpiness sign", c10_kappa),
        ("C11", "dataset summary", c11_summary),
        ("C12", "CLI determinism", c12_cli_determinism),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<&str>()
                .map_or("panicked".to_string(), |s| s.to_string()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
