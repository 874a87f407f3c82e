//! Filter definitions: builtin names or JSON files
//! `{"kind": "...", "samples": [...], "symmetrize": bool}`.

use std::path::Path;

use lowpass_core::lattice::{DigitAverageFilter, LatticeFilter, LatticeMatrix, SeparableFilter};
use lowpass_core::{FilterKind, PeriodicFilter};
use serde::{Deserialize, Serialize};

use crate::error::{input, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDef {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(default)]
    pub symmetrize: bool,
}

impl FilterDef {
    pub fn build(&self) -> CliResult<PeriodicFilter> {
        let kind: FilterKind = self.kind.parse()?;
        match (kind, &self.samples) {
            (FilterKind::Sampled, Some(s)) => Ok(PeriodicFilter::sampled(s.clone(), self.symmetrize)?),
            (FilterKind::Sampled, None) => input("a sampled filter needs \"samples\""),
            (_, Some(_)) => input(format!("builtin filter {} takes no samples", kind)),
            (k, None) => Ok(PeriodicFilter::builtin(k)?),
        }
    }
}

/// The filter as run, echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEcho {
    pub spec: String,
    pub definition: FilterDef,
}

pub fn resolve(spec: &str) -> CliResult<(FilterEcho, PeriodicFilter)> {
    let def = match spec.parse::<FilterKind>() {
        Ok(k) if k != FilterKind::Sampled => FilterDef {
            kind: k.name().into(),
            samples: None,
            symmetrize: false,
        },
        _ => {
            let path = Path::new(spec);
            if !path.is_file() {
                return input(format!("unknown filter {spec:?}: not a builtin name or a readable file"));
            }
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("filter file {spec}: {e}")))?
        }
    };
    let filter = def.build()?;
    Ok((
        FilterEcho {
            spec: spec.into(),
            definition: def,
        },
        filter,
    ))
}

pub const DIGIT_AVERAGE: &str = "digit-average";

pub enum MdFilter {
    DigitAverage(DigitAverageFilter),
    Separable(SeparableFilter<PeriodicFilter>),
}

impl LatticeFilter for MdFilter {
    fn dim(&self) -> usize {
        match self {
            MdFilter::DigitAverage(f) => f.dim(),
            MdFilter::Separable(f) => f.dim(),
        }
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            MdFilter::DigitAverage(f) => f.eval(xi),
            MdFilter::Separable(f) => f.eval(xi),
        }
    }
}

/// `digit-average` (alias `digit-haar`) or a scalar filter applied in every coordinate.
pub fn resolve_lattice(spec: &str, a: &LatticeMatrix) -> CliResult<(FilterEcho, MdFilter)> {
    if spec == DIGIT_AVERAGE || spec == "digit-haar" {
        return Ok((
            FilterEcho {
                spec: spec.into(),
                definition: FilterDef {
                    kind: DIGIT_AVERAGE.into(),
                    samples: None,
                    symmetrize: false,
                },
            },
            MdFilter::DigitAverage(DigitAverageFilter::for_matrix(a)?),
        ));
    }
    let (echo, f) = resolve(spec)?;
    let sep = SeparableFilter::new(vec![f; a.dim()])?;
    Ok((echo, MdFilter::Separable(sep)))
}
