use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::measures::MeasureId;

/// Environment variable naming a JSON file of tolerance overrides, e.g.
/// `{"l1": 1e-6, "weight": 2e-3}`.
pub const TOLERANCE_ENV: &str = "SUPERPOSITION_TOLERANCES";

const CLOSED_FORM: f64 = 1e-6;
const SOLVER: f64 = 1e-3;

/// Per-measure campaign tolerances: closed-form measures get `1e-6`,
/// solver-based ones `1e-3`, unless overridden.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ToleranceTable {
    overrides: BTreeMap<MeasureId, f64>,
}

impl ToleranceTable {
    pub fn get(&self, measure: MeasureId) -> f64 {
        self.overrides.get(&measure).copied().unwrap_or(if measure.is_solver_based() { SOLVER } else { CLOSED_FORM })
    }

    pub fn set(&mut self, measure: MeasureId, tol: f64) {
        self.overrides.insert(measure, tol);
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, f64> = serde_json::from_str(text)?;
        let mut table = Self::default();
        for (name, tol) in raw {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(Error::ParameterOutOfRange(format!(
                    "tolerance for {name} must be finite and non-negative"
                )));
            }
            table.set(name.parse()?, tol);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Defaults, overridden by the file named in [`TOLERANCE_ENV`] if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(TOLERANCE_ENV) {
            Some(path) if !path.is_empty() => Self::load(Path::new(&path)),
            _ => Ok(Self::default()),
        }
    }
}
