//! Report envelope shared by every subcommand.
//!
//! Field order is fixed by the struct definitions and maps are ordered, so the
//! same configuration always produces the same bytes.

use std::io::Write;
use std::path::Path;

use lowpass_core::diagnostics::{Answer, LimitStatus, Tightness};
use lowpass_core::tail::RetainedBound;
use lowpass_core::Phase;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::filter_spec::FilterEcho;

/// A frequency: exact on the circle, floating point on the cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XiKey {
    Scalar(Phase),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicLimits {
    pub plus: LimitStatus,
    pub minus: LimitStatus,
    /// `(k, last term, status)` per sequence.
    pub sequences: Vec<(i64, f64, LimitStatus)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct XiEntry {
    pub xi: Option<XiKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_value: Option<f64>,
    /// Probe points are listed after the grid.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub probe: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_curve: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<Vec<RetainedBound>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_eps: Option<Vec<Option<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tightness: Option<Tightness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_k: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_at_zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyadic_limits: Option<DyadicLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl XiEntry {
    pub fn at(xi: &Phase) -> Self {
        Self {
            xi: Some(XiKey::Scalar(*xi)),
            xi_value: Some(xi.value()),
            ..Self::default()
        }
    }

    pub fn at_vector(xi: &[f64]) -> Self {
        Self {
            xi: Some(XiKey::Vector(xi.to_vec())),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    /// Headline outcome of the command: `yes`, `no`, `inconclusive`, `tight`,
    /// `not_tight`, `pass` or `fail`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_ae: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_ok: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_pass: Option<Answer>,
    /// Infimum of `|φ̂|²` over the sampled frequencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond1_inf: Option<f64>,
    /// Infimum over frequencies of the best translate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond2_inf: Option<f64>,
    /// Sampled points where the headline property fails or cannot be decided.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failing: Vec<XiKey>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub filter: Option<FilterEcho>,
    pub config: RunConfig,
    #[serde(default)]
    pub per_xi: Vec<XiEntry>,
    #[serde(default)]
    pub aggregate: Aggregate,
    /// Command-specific payload.
    #[serde(default)]
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, filter: Option<FilterEcho>, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            filter,
            config: config.clone(),
            per_xi: Vec::new(),
            aggregate: Aggregate::default(),
            details: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::error::CliError::Input(format!("cannot read report {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn answer_name(a: Answer) -> &'static str {
    match a {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Inconclusive => "inconclusive",
    }
}

pub fn tightness_name(t: Tightness) -> &'static str {
    match t {
        Tightness::Tight => "tight",
        Tightness::NotTight => "not_tight",
        Tightness::Inconclusive => "inconclusive",
    }
}

/// A named CSV table held in memory until the command finishes.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn write_to<W: Write>(&self, w: W) -> CliResult<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Shortest round-trip float formatting.
pub fn num(x: f64) -> String {
    x.to_string()
}
