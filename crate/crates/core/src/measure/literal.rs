//! JSON measure literals.
//!
//! ```json
//! {"type": "atomic", "atoms": [[-1, 0.5], [1, 0.5]]}
//! {"type": "parametric", "family": "gaussian", "params": [0, 1]}
//! {"type": "empirical", "samples": [0.1, -0.3, 0.2]}
//! {"type": "standardized", "of": {"type": "parametric", "family": "exponential", "params": [1]}}
//! {"type": "perturbed", "of": {...}, "amplitude": 0.001}
//! ```

use serde::{Deserialize, Serialize};

use super::Measure;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureLiteral {
    Atomic { atoms: Vec<(f64, f64)> },
    Parametric { family: String, params: Vec<f64> },
    Empirical { samples: Vec<f64> },
    Standardized { of: Box<MeasureLiteral> },
    Perturbed { of: Box<MeasureLiteral>, amplitude: f64 },
}

impl MeasureLiteral {
    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureLiteral::Atomic { atoms } => Measure::atomic(atoms.iter().copied()),
            MeasureLiteral::Parametric { family, params } => Measure::parametric(family, params),
            MeasureLiteral::Empirical { samples } => Measure::empirical(samples.clone()),
            MeasureLiteral::Standardized { of } => of.build()?.standardize(),
            MeasureLiteral::Perturbed { of, amplitude } => Ok(of.build()?.perturbed(*amplitude)),
        }
    }
}
