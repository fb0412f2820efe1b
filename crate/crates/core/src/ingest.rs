//! Route datasets: JSON and CSV readers/writers, validation into a rejection
//! report, conversion to allocations, great-circle geometry and dataset
//! summaries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{profile, Allocation, EntropyProfile};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const EARTH_RADIUS_KM: f64 = 6371.0;

pub const CSV_HEADER: [&str; 9] = [
    "route_id",
    "city",
    "stop_id",
    "seq",
    "lat",
    "lon",
    "kind",
    "parcel_count",
    "total_distance_km",
];

pub const POINTS_HEADER: [&str; 3] = ["point_id", "lat", "lon"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopKind {
    Home,
    /// Already located at a pickup point.
    Pickup,
    /// Depot or station; never demand.
    Station,
}

impl StopKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StopKind::Home => "home",
            StopKind::Pickup => "pickup",
            StopKind::Station => "station",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "home" => Some(StopKind::Home),
            "pickup" => Some(StopKind::Pickup),
            "station" => Some(StopKind::Station),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub stop_id: String,
    pub lat: f64,
    pub lon: f64,
    pub kind: StopKind,
    pub parcel_count: u64,
}

impl StopRecord {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub route_id: String,
    pub city: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_distance_km: Option<f64>,
    /// Delivery sequence order.
    pub stops: Vec<StopRecord>,
}

impl RouteRecord {
    /// Checks a route against the dataset rules, returning the first
    /// violation as a human-readable reason.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.route_id.is_empty() {
            return Err("missing route id".into());
        }
        if self.stops.is_empty() {
            return Err("empty stop list".into());
        }
        if let Some(d) = self.total_distance_km {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(format!("total distance {d} is not a non-negative number"));
            }
        }
        for s in &self.stops {
            if !(-90.0..=90.0).contains(&s.lat) {
                return Err(format!(
                    "stop {}: latitude out of range ({})",
                    s.stop_id, s.lat
                ));
            }
            if !(-180.0..=180.0).contains(&s.lon) {
                return Err(format!(
                    "stop {}: longitude out of range ({})",
                    s.stop_id, s.lon
                ));
            }
            if s.kind == StopKind::Station && s.parcel_count > 0 {
                return Err(format!("stop {}: station carries parcels", s.stop_id));
            }
        }
        if self.stops.iter().all(|s| s.kind == StopKind::Station) {
            return Err("no non-station stop".into());
        }
        if self.stops.iter().all(|s| s.parcel_count == 0) {
            return Err("route carries no parcels".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Json,
    Csv,
}

impl DatasetFormat {
    /// Guesses from a file extension; anything but `.csv` reads as JSON.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub route_id: Option<String>,
    /// First input line of the route (CSV only).
    pub line: Option<u64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParsedDataset {
    pub routes: Vec<RouteRecord>,
    pub rejections: Vec<Rejection>,
}

impl ParsedDataset {
    /// The valid routes, or a validation error listing every rejection.
    pub fn into_clean(self) -> Result<Vec<RouteRecord>> {
        if self.rejections.is_empty() {
            return Ok(self.routes);
        }
        let lines: Vec<String> = self
            .rejections
            .iter()
            .map(|r| {
                format!(
                    "route {}: {}",
                    r.route_id.as_deref().unwrap_or("?"),
                    r.reason
                )
            })
            .collect();
        Err(Error::Validation(lines.join("; ")))
    }
}

pub fn parse_routes(document: &str, format: DatasetFormat) -> Result<ParsedDataset> {
    match format {
        DatasetFormat::Json => parse_json(document),
        DatasetFormat::Csv => parse_csv(document),
    }
}

#[derive(Deserialize)]
struct RawDocument {
    schema_version: u32,
    routes: Vec<serde_json::Value>,
}

fn parse_json(document: &str) -> Result<ParsedDataset> {
    let raw: RawDocument = serde_json::from_str(document)
        .map_err(|e| Error::format(Some(e.line() as u64), None, e.to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::format(
            None,
            Some("schema_version"),
            format!("unsupported schema version {}", raw.schema_version),
        ));
    }
    let mut out = ParsedDataset::default();
    let mut seen = HashMap::new();
    for value in raw.routes {
        let id = value
            .get("route_id")
            .and_then(|v| v.as_str())
            .map(str::to_owned);
        let verdict = serde_json::from_value::<RouteRecord>(value)
            .map_err(|e| format!("malformed route: {e}"))
            .and_then(|r| r.check().map(|_| r));
        let verdict = verdict.and_then(|r| match seen.insert(r.route_id.clone(), ()) {
            Some(()) => Err("duplicate route id".to_string()),
            None => Ok(r),
        });
        match verdict {
            Ok(r) => out.routes.push(r),
            Err(reason) => out.rejections.push(Rejection {
                route_id: id,
                line: None,
                reason,
            }),
        }
    }
    Ok(out)
}

struct RouteBuilder {
    route_id: String,
    city: String,
    total: Option<f64>,
    line: u64,
    stops: Vec<(u64, StopRecord)>,
    error: Option<String>,
}

impl RouteBuilder {
    fn fail(&mut self, reason: String) {
        self.error.get_or_insert(reason);
    }
}

fn header_index(headers: &csv::StringRecord, expected: &[&str]) -> Result<Vec<usize>> {
    expected
        .iter()
        .map(|&name| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::format(Some(1), Some(name), "missing required column"))
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    Error::format(line, None, e.to_string())
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_csv(document: &str) -> Result<ParsedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(document.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let idx = header_index(&headers, &CSV_HEADER)?;
    let mut builders: Vec<RouteBuilder> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(idx[i]).unwrap_or("").trim();
        let route_id = field(0).to_owned();
        let slot = *by_id.entry(route_id.clone()).or_insert_with(|| {
            builders.push(RouteBuilder {
                route_id: route_id.clone(),
                city: field(1).to_owned(),
                total: parse_f64(field(8)),
                line,
                stops: Vec::new(),
                error: None,
            });
            builders.len() - 1
        });
        let b = &mut builders[slot];
        if b.city != field(1) {
            b.fail(format!("line {line}: inconsistent city"));
        }
        let total_raw = field(8);
        let total = if total_raw.is_empty() {
            None
        } else {
            match parse_f64(total_raw) {
                Some(v) => Some(v),
                None => {
                    b.fail(format!(
                        "line {line}: invalid total_distance_km '{total_raw}'"
                    ));
                    None
                }
            }
        };
        if b.total != total {
            b.fail(format!("line {line}: inconsistent total_distance_km"));
        }
        let seq = field(3).parse::<u64>();
        let lat = parse_f64(field(4));
        let lon = parse_f64(field(5));
        let kind = StopKind::parse(field(6));
        let parcels = field(7).parse::<u64>();
        match (seq, lat, lon, kind, parcels) {
            (Ok(seq), Some(lat), Some(lon), Some(kind), Ok(parcel_count)) => b.stops.push((
                seq,
                StopRecord {
                    stop_id: field(2).to_owned(),
                    lat,
                    lon,
                    kind,
                    parcel_count,
                },
            )),
            (seq, lat, lon, kind, parcels) => {
                let bad = if seq.is_err() {
                    "seq"
                } else if lat.is_none() {
                    "lat"
                } else if lon.is_none() {
                    "lon"
                } else if kind.is_none() {
                    "kind"
                } else {
                    debug_assert!(parcels.is_err());
                    "parcel_count"
                };
                b.fail(format!("line {line}: invalid {bad}"));
            }
        }
    }
    let mut out = ParsedDataset::default();
    for mut b in builders {
        b.stops.sort_by_key(|(seq, _)| *seq);
        if b.stops.windows(2).any(|w| w[0].0 == w[1].0) {
            b.fail("duplicate seq".into());
        }
        let route = RouteRecord {
            route_id: b.route_id,
            city: b.city,
            total_distance_km: b.total,
            stops: b.stops.into_iter().map(|(_, s)| s).collect(),
        };
        match b.error.map_or_else(|| route.check(), Err) {
            Ok(()) => out.routes.push(route),
            Err(reason) => out.rejections.push(Rejection {
                route_id: Some(route.route_id),
                line: Some(b.line),
                reason,
            }),
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    schema_version: u32,
    routes: &'a [RouteRecord],
}

pub fn write_routes(routes: &[RouteRecord], format: DatasetFormat) -> Result<String> {
    match format {
        DatasetFormat::Json => {
            let doc = DocumentOut {
                schema_version: SCHEMA_VERSION,
                routes,
            };
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::format(None, None, e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        DatasetFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).map_err(csv_error)?;
            for r in routes {
                let total = r
                    .total_distance_km
                    .map(|d| d.to_string())
                    .unwrap_or_default();
                for (i, s) in r.stops.iter().enumerate() {
                    w.write_record([
                        r.route_id.as_str(),
                        r.city.as_str(),
                        s.stop_id.as_str(),
                        &(i + 1).to_string(),
                        &s.lat.to_string(),
                        &s.lon.to_string(),
                        s.kind.as_str(),
                        &s.parcel_count.to_string(),
                        &total,
                    ])
                    .map_err(csv_error)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickupPoint {
    pub point_id: String,
    pub lat: f64,
    pub lon: f64,
}

impl PickupPoint {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

pub fn parse_pickup_points(document: &str) -> Result<Vec<PickupPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(document.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let idx = header_index(&headers, &POINTS_HEADER)?;
    let mut points = Vec::new();
    let mut seen = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line());
        let field = |i: usize| record.get(idx[i]).unwrap_or("").trim();
        let coord = |i: usize, name: &str| {
            parse_f64(field(i)).ok_or_else(|| Error::format(line, Some(name), "not a number"))
        };
        let point = PickupPoint {
            point_id: field(0).to_owned(),
            lat: coord(1, "lat")?,
            lon: coord(2, "lon")?,
        };
        let at = line.map_or(String::new(), |l| format!("line {l}: "));
        if point.point_id.is_empty() {
            return Err(Error::Validation(format!("{at}missing point id")));
        }
        if !(-90.0..=90.0).contains(&point.lat) {
            return Err(Error::Validation(format!("{at}latitude out of range")));
        }
        if !(-180.0..=180.0).contains(&point.lon) {
            return Err(Error::Validation(format!("{at}longitude out of range")));
        }
        if seen.insert(point.point_id.clone(), ()).is_some() {
            return Err(Error::Validation(format!(
                "{at}duplicate point id {}",
                point.point_id
            )));
        }
        points.push(point);
    }
    Ok(points)
}

pub fn write_pickup_points(points: &[PickupPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(POINTS_HEADER).map_err(csv_error)?;
    for p in points {
        w.write_record([p.point_id.as_str(), &p.lat.to_string(), &p.lon.to_string()])
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Parcel counts of the non-station stops holding at least one parcel, in
/// stop order.
pub fn to_allocation(r: &RouteRecord) -> Result<Allocation> {
    let counts: Vec<u64> = r
        .stops
        .iter()
        .filter(|s| s.kind != StopKind::Station && s.parcel_count > 0)
        .map(|s| s.parcel_count)
        .collect();
    if counts.is_empty() {
        return Err(Error::domain(format!(
            "route {} has no parcels to allocate",
            r.route_id
        )));
    }
    Allocation::new(counts)
}

pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.min(1.0).sqrt().asin()
}

/// The recorded total when present, otherwise the sum of great-circle legs
/// between consecutive stops.
pub fn route_distance_km(r: &RouteRecord) -> Result<f64> {
    if let Some(d) = r.total_distance_km {
        return Ok(d);
    }
    if r.stops.len() < 2 {
        return Err(Error::domain(format!(
            "route {}: distance needs at least two stops",
            r.route_id
        )));
    }
    Ok(r.stops
        .windows(2)
        .map(|w| haversine_km(w[0].point(), w[1].point()))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    /// Routes on which the metric is defined; the statistics are NaN when 0.
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    pub fn from_values(metric: &str, values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                metric: metric.into(),
                count: 0,
                mean: f64::NAN,
                std_dev: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        Self {
            metric: metric.into(),
            count: n,
            // an average of equal values can land an ulp outside them
            mean: mean.clamp(
                values.iter().copied().fold(f64::INFINITY, f64::min),
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            std_dev: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

pub const SUMMARY_METRICS: [&str; 7] = ["n", "k", "n_per_k", "g", "g_norm", "h", "h_norm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub route_count: usize,
    /// Occupied non-station stops across all routes.
    pub stop_count: usize,
    pub single_parcel_share: f64,
    pub over_five_share: f64,
    /// Always `"population"`.
    pub std_dev_kind: String,
    /// One entry per name in [`SUMMARY_METRICS`], same order.
    pub metrics: Vec<MetricSummary>,
}

impl DatasetSummary {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

pub fn summarize(routes: &[RouteRecord]) -> Result<DatasetSummary> {
    if routes.is_empty() {
        return Err(Error::domain("cannot summarize an empty dataset"));
    }
    let mut columns: [Vec<f64>; 7] = Default::default();
    let (mut stops, mut singles, mut over_five) = (0usize, 0usize, 0usize);
    for r in routes {
        let alloc = to_allocation(r)?;
        let p: EntropyProfile<f64> = profile(&alloc);
        columns[0].push(p.n as f64);
        columns[1].push(p.k as f64);
        columns[2].push(alloc.mean_per_stop());
        columns[3].push(p.g);
        columns[4].extend(p.g_norm);
        columns[5].push(p.h);
        columns[6].extend(p.h_norm);
        for c in alloc.occupied() {
            stops += 1;
            singles += usize::from(c == 1);
            over_five += usize::from(c > 5);
        }
    }
    Ok(DatasetSummary {
        route_count: routes.len(),
        stop_count: stops,
        single_parcel_share: singles as f64 / stops as f64,
        over_five_share: over_five as f64 / stops as f64,
        std_dev_kind: "population".into(),
        metrics: SUMMARY_METRICS
            .iter()
            .zip(&columns)
            .map(|(name, v)| MetricSummary::from_values(name, v))
            .collect(),
    })
}
