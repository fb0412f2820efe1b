use std::collections::BTreeMap;
use std::path::Path;

use lastmile_entropy::analytics::{fit_kappa as fit, route_metrics, Compactness};
use lastmile_entropy::consolidation::{
    ConsolidationModel, CustomerCounting, SimulationMode, SweepGrid,
};
use lastmile_entropy::entropy::stirling::published_exact;
use lastmile_entropy::entropy::{classify_quadrant, stirling_table, StirlingLayout};
use lastmile_entropy::generalized::{
    consistency_report, general_total_entropy, linear_scaling_check, special_case_entropy, HomeTerm,
};
use lastmile_entropy::ingest::{
    parse_pickup_points, parse_routes, summarize, DatasetFormat, RouteRecord,
};
use lastmile_entropy::QuadrantThresholds;

use crate::report::{Cell, Report, Table};
use crate::{read_input, scenario, DatasetArgs, Failure, InputFormat};

fn load_dataset(args: &DatasetArgs, report: &mut Report) -> Result<Vec<RouteRecord>, Failure> {
    let text = read_input(&args.dataset)?;
    let format = match args.input_format {
        Some(InputFormat::Json) => DatasetFormat::Json,
        Some(InputFormat::Csv) => DatasetFormat::Csv,
        None => DatasetFormat::from_path(&args.dataset),
    };
    let parsed = parse_routes(&text, format)?;
    if !parsed.rejections.is_empty() {
        if !args.skip_invalid {
            let mut f = Failure::validation(format!(
                "{} route(s) failed validation",
                parsed.rejections.len()
            ));
            f.rejections = parsed.rejections;
            return Err(f);
        }
        for r in &parsed.rejections {
            report.notes.push(format!(
                "skipped route {}: {}",
                r.route_id.as_deref().unwrap_or("?"),
                r.reason
            ));
        }
    }
    if parsed.routes.is_empty() {
        return Err(Failure::validation("dataset holds no valid routes"));
    }
    Ok(parsed.routes)
}

pub fn analyze(args: &DatasetArgs, g_threshold: f64, h_threshold: f64) -> Result<Report, Failure> {
    let thresholds = QuadrantThresholds::new(g_threshold, h_threshold)
        .map_err(|e| Failure::input(e.to_string()))?;
    let mut report = Report::default();
    let routes = load_dataset(args, &mut report)?;
    let mut table = Table::new(
        "routes",
        &[
            "route_id",
            "city",
            "n",
            "k",
            "n_per_k",
            "g",
            "g_norm",
            "h",
            "h_norm",
            "quadrant",
            "distance_km",
            "compactness",
        ],
    );
    for r in &routes {
        let m = route_metrics(r)?;
        let p = &m.profile;
        let quadrant =
            classify_quadrant(p, &thresholds).map_or(Cell::Empty, |q| Cell::text(q.to_string()));
        let compactness = match m.compactness {
            Some(Compactness::Finite(c)) => Cell::num(c, 4),
            Some(Compactness::Infinite) => Cell::text("inf"),
            None => Cell::Empty,
        };
        table.push(vec![
            Cell::text(&m.route_id),
            Cell::text(&m.city),
            Cell::Int(p.n),
            Cell::Int(p.k as u64),
            Cell::num(m.mean_per_stop, 4),
            Cell::num(p.g, 4),
            Cell::opt(p.g_norm, 6),
            Cell::num(p.h, 6),
            Cell::opt(p.h_norm, 6),
            quadrant,
            Cell::opt(m.distance_km, 3),
            compactness,
        ]);
    }
    let s = summarize(&routes)?;
    let mut summary = Table::new(
        "summary",
        &["metric", "count", "mean", "std_dev", "min", "max"],
    );
    for m in &s.metrics {
        summary.push(vec![
            Cell::text(&m.metric),
            Cell::Int(m.count as u64),
            Cell::num(m.mean, 6),
            Cell::num(m.std_dev, 6),
            Cell::num(m.min, 6),
            Cell::num(m.max, 6),
        ]);
    }
    let mut dataset = Table::new("dataset", &["field", "value"]);
    dataset.push(vec![Cell::text("routes"), Cell::Int(s.route_count as u64)]);
    dataset.push(vec![Cell::text("stops"), Cell::Int(s.stop_count as u64)]);
    dataset.push(vec![
        Cell::text("single_parcel_share"),
        Cell::num(s.single_parcel_share, 6),
    ]);
    dataset.push(vec![
        Cell::text("over_five_share"),
        Cell::num(s.over_five_share, 6),
    ]);
    dataset.push(vec![
        Cell::text("std_dev_kind"),
        Cell::text(&s.std_dev_kind),
    ]);
    report.tables = vec![table, summary, dataset];
    Ok(report)
}

/// Signed percentage with two significant digits and at least one decimal.
pub fn signed_percent(v: f64) -> String {
    if v == 0.0 {
        return "0.0%".into();
    }
    if !v.is_finite() {
        return format!("{v}%");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (1 - magnitude).max(1) as usize;
    let body = format!("{:.decimals$}", v.abs());
    let sign = if body.chars().all(|c| c == '0' || c == '.') {
        ""
    } else if v > 0.0 {
        "+"
    } else {
        "-"
    };
    format!("{sign}{body}%")
}

pub fn stirling(ns: &[u64], p_bars: &[f64]) -> Result<Report, Failure> {
    if ns.is_empty() || p_bars.is_empty() {
        return Err(Failure::input("empty grid"));
    }
    let rows = stirling_table(ns, p_bars).map_err(|e| Failure::input(e.to_string()))?;
    let mut table = Table::new(
        "stirling",
        &[
            "n", "p_bar", "k", "layout", "g_exact", "err_t1", "err_t2", "err_t3", "flag",
        ],
    );
    let mut flagged = false;
    for r in &rows {
        let flag = match published_exact(r.n, r.p_bar) {
            Some(published) if (published - r.g_exact).abs() > 0.01 => {
                flagged = true;
                format!("published {published}")
            }
            _ => String::new(),
        };
        table.push(vec![
            Cell::Int(r.n),
            Cell::text(r.p_bar.to_string()),
            Cell::Int(r.k),
            Cell::text(match r.layout {
                StirlingLayout::Uniform => "uniform",
                StirlingLayout::NonDivisible => "non_divisible",
            }),
            Cell::num(r.g_exact, 2),
            Cell::text(signed_percent(r.err_t1)),
            Cell::text(signed_percent(r.err_t2)),
            Cell::text(signed_percent(r.err_t3)),
            Cell::text(flag),
        ]);
    }
    let mut report = Report {
        tables: vec![table],
        notes: Vec::new(),
    };
    if flagged {
        report.notes.push(
            "flag: the previously published value for this cell differs from ln N! - sum ln p! by more than 0.01"
                .into(),
        );
    }
    Ok(report)
}

pub fn consolidate(
    args: &DatasetArgs,
    points_path: &Path,
    grid: SweepGrid,
    mode: SimulationMode,
    per_parcel: bool,
) -> Result<Report, Failure> {
    let mut report = Report::default();
    let routes = load_dataset(args, &mut report)?;
    let points = parse_pickup_points(&read_input(points_path)?)?;
    let counting = if per_parcel {
        CustomerCounting::PerParcel
    } else {
        CustomerCounting::PerStop
    };
    let model = ConsolidationModel::new(&routes, &points)?.with_counting(counting);
    let results = model
        .sweep(&grid, mode)
        .map_err(|e| Failure::input(e.to_string()))?;
    let mut table = Table::new(
        "sweep",
        &[
            "t",
            "beta",
            "lambda",
            "activated",
            "adopters",
            "parcels_consolidated",
            "g_norm",
            "reduction",
            "g_total_system",
        ],
    );
    for r in &results {
        table.push(vec![
            Cell::text(r.params.threshold_t.to_string()),
            Cell::text(r.params.beta.to_string()),
            Cell::text(r.params.lambda_accept.to_string()),
            Cell::num(100.0 * r.activated_share, 2),
            Cell::num(100.0 * r.adopter_share, 2),
            Cell::num(100.0 * r.parcels_consolidated_share, 2),
            Cell::num(r.g_norm_delivery, 4),
            Cell::num(r.reduction_vs_baseline, 2),
            Cell::num(r.g_total_system, 4),
        ]);
    }
    if let Some(first) = results.first() {
        report
            .notes
            .push(format!("baseline g_norm = {:.4}", first.baseline_g_norm));
    }
    report.notes.push(match mode {
        SimulationMode::Expectation => "mode = expectation".into(),
        SimulationMode::MonteCarlo { seed } => format!("mode = monte_carlo, seed = {seed}"),
    });
    report
        .notes
        .push("activated, adopters, parcels_consolidated and reduction are percentages".into());
    report.tables.push(table);
    Ok(report)
}

fn fit_row(table: &mut Table, scope: &str, points: &[(f64, f64)]) -> Result<(), Failure> {
    let usable = points.iter().filter(|p| p.0 < 1.0 - 1e-6).count();
    let outcome = if usable < 2 {
        Err(format!("{usable} usable point(s), need 2"))
    } else {
        fit(points).map_err(|e| e.to_string())
    };
    match outcome {
        Ok(f) => table.push(vec![
            Cell::text(scope),
            Cell::num(f.kappa, 4),
            Cell::num(f.r_squared, 6),
            Cell::Int(f.n_points as u64),
            Cell::num(f.residual_std, 4),
            Cell::Int(f.excluded_points as u64),
            Cell::text("ok"),
        ]),
        Err(reason) if scope == "all" => {
            return Err(Failure::computation(format!("fit failed: {reason}")))
        }
        Err(reason) => table.push(vec![
            Cell::text(scope),
            Cell::Empty,
            Cell::Empty,
            Cell::Int(usable as u64),
            Cell::Empty,
            Cell::Int((points.len() - usable) as u64),
            Cell::text(reason),
        ]),
    }
    Ok(())
}

pub fn fit_kappa(args: &DatasetArgs) -> Result<Report, Failure> {
    let mut report = Report::default();
    let routes = load_dataset(args, &mut report)?;
    let mut all = Vec::new();
    let mut by_city: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut skipped = 0;
    for r in &routes {
        let m = route_metrics(r)?;
        match (m.profile.g_norm, m.distance_km) {
            (Some(g), Some(d)) => {
                all.push((g, d));
                by_city.entry(m.city).or_default().push((g, d));
            }
            _ => skipped += 1,
        }
    }
    let mut table = Table::new(
        "fits",
        &[
            "scope",
            "kappa",
            "r_squared",
            "n_points",
            "residual_std",
            "excluded_points",
            "status",
        ],
    );
    fit_row(&mut table, "all", &all)?;
    if by_city.keys().any(|c| !c.is_empty()) {
        for (city, pts) in &by_city {
            fit_row(&mut table, &format!("city:{city}"), pts)?;
        }
    }
    if skipped > 0 {
        report.notes.push(format!(
            "{skipped} route(s) without G_norm or distance left out"
        ));
    }
    report.tables.push(table);
    Ok(report)
}

pub fn scenarios(path: &Path) -> Result<Report, Failure> {
    let text = read_input(path)?;
    let file = scenario::parse(path, &text).map_err(Failure::input)?;
    let mut report = Report::default();
    for doc in &file.scenarios {
        let s = doc.scenario();
        s.validate()
            .map_err(|e| Failure::validation(format!("scenario {}: {e}", doc.name)))?;
        let context = |e: lastmile_entropy::Error| -> Failure {
            let mut f = Failure::from(e);
            f.message = format!("scenario {}: {}", doc.name, f.message);
            f
        };
        let mut table = Table::new(
            doc.name.clone(),
            &["evaluator", "delivery", "pickup", "total", "gap", "flagged"],
        );
        for (label, term) in [
            ("general_per_customer", HomeTerm::PerCustomer),
            ("general_pooled", HomeTerm::Pooled),
        ] {
            let g = general_total_entropy(&s, term).map_err(context)?;
            table.push(vec![
                Cell::text(label),
                Cell::num(g.delivery, 6),
                Cell::num(g.pickup, 6),
                Cell::num(g.total, 6),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
        let cases = doc.special_cases();
        let grid: Vec<_> = cases.iter().map(|&c| (c, s.clone())).collect();
        for row in consistency_report(&grid, HomeTerm::PerCustomer).map_err(context)? {
            table.push(vec![
                Cell::text(format!("special_{}", row.case.name())),
                Cell::Empty,
                Cell::Empty,
                Cell::num(row.special, 6),
                Cell::num(row.gap, 6),
                Cell::text(if row.flagged { "yes" } else { "no" }),
            ]);
        }
        report.tables.push(table);
        if !doc.multipliers.is_empty() {
            let case = cases[0];
            let scaling =
                linear_scaling_check(&s, &doc.multipliers, |sc| special_case_entropy(case, sc))
                    .map_err(context)?;
            let mut t = Table::new(
                format!("{}_scaling", doc.name),
                &["multiplier", "n", "g_total", "g_per_parcel", "deviation"],
            );
            for (i, &m) in scaling.multipliers.iter().enumerate() {
                t.push(vec![
                    Cell::Int(m),
                    Cell::num(scaling.n_values[i], 4),
                    Cell::num(scaling.totals[i], 6),
                    Cell::num(scaling.totals[i] / scaling.n_values[i], 6),
                    if i == 0 {
                        Cell::Empty
                    } else {
                        Cell::num(scaling.deviations[i - 1], 6)
                    },
                ]);
            }
            report.tables.push(t);
            report.notes.push(format!(
                "{}: slope {:.6}, max relative deviation from linear {:.6}, deviation shrinks: {}",
                doc.name,
                scaling.slope,
                scaling.max_relative_deviation,
                if scaling.deviation_shrinks {
                    "yes"
                } else {
                    "no"
                }
            ));
        }
    }
    report
        .notes
        .push("gap = special - general_per_customer; flagged when |gap| > 1e-6".into());
    Ok(report)
}
