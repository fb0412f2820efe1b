//! Scenario documents for the `scenarios` command, in JSON or TOML.

use std::path::Path;

use lastmile_entropy::generalized::{ClassSpec, FailureModel, GeneralScenario, SpecialCase};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenarios: Vec<ScenarioDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    Baseline,
    SingleAttemptFailure,
    /// Evaluated under both readings of the attempt term.
    MultipleAttemptFailure,
    DirectToPickup,
    SingleAttemptMixed,
    FullyHeterogeneous,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDoc {
    pub n_parcels: f64,
    pub eta: f64,
    #[serde(default)]
    pub eligible_points: Vec<usize>,
    #[serde(default)]
    pub pickup_allocation: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    pub case: CaseName,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub lambda_cap: u32,
    #[serde(default)]
    pub n_points: usize,
    #[serde(default)]
    pub c_pickup: u64,
    pub classes: Vec<ClassDoc>,
    /// Scale factors for the linear-scaling check; none means no check.
    #[serde(default)]
    pub multipliers: Vec<u64>,
}

fn one() -> u32 {
    1
}

impl ScenarioDoc {
    pub fn scenario(&self) -> GeneralScenario<f64> {
        GeneralScenario {
            classes: self
                .classes
                .iter()
                .map(|c| ClassSpec {
                    n_parcels: c.n_parcels,
                    eta: c.eta,
                    eligible_points: c.eligible_points.clone(),
                    pickup_allocation: c.pickup_allocation.clone(),
                })
                .collect(),
            failure: FailureModel {
                alpha: self.alpha,
                lambda_cap: self.lambda_cap,
            },
            n_points: self.n_points,
            c_pickup: self.c_pickup,
        }
    }

    /// Closed forms to evaluate for this document's case.
    pub fn special_cases(&self) -> Vec<SpecialCase> {
        use lastmile_entropy::generalized::ExpectedLogReading::{AsPrinted, ScaledByN};
        match self.case {
            CaseName::Baseline => vec![SpecialCase::Baseline],
            CaseName::SingleAttemptFailure => vec![SpecialCase::SingleAttemptFailure],
            CaseName::MultipleAttemptFailure => vec![
                SpecialCase::MultipleAttemptFailure { reading: AsPrinted },
                SpecialCase::MultipleAttemptFailure { reading: ScaledByN },
            ],
            CaseName::DirectToPickup => vec![SpecialCase::DirectToPickup],
            CaseName::SingleAttemptMixed => vec![SpecialCase::SingleAttemptMixed],
            CaseName::FullyHeterogeneous => vec![SpecialCase::FullyHeterogeneous],
        }
    }
}

/// Parses by extension (`.toml` as TOML, anything else as JSON); errors name
/// the offending field path.
pub fn parse(path: &Path, text: &str) -> Result<ScenarioFile, String> {
    let is_toml = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        let de = toml::Deserializer::parse(text).map_err(|e| e.to_string())?;
        serde_path_to_error::deserialize(de).map_err(|e| describe(e.path(), e.inner()))
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| describe(e.path(), e.inner()))
    }
}

fn describe(path: &serde_path_to_error::Path, inner: &dyn std::fmt::Display) -> String {
    let path = path.to_string();
    if path.is_empty() || path == "." {
        inner.to_string()
    } else {
        format!("at {path}: {inner}")
    }
}
