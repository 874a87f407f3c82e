//! Effective run configuration, echoed verbatim in every report.

use std::path::PathBuf;

use lowpass_core::Phase;
use serde::{Deserialize, Serialize};

use crate::error::{input, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin name or path to a filter JSON file. Lattice commands also accept
    /// `digit-average`. Filled with the command's default when absent.
    pub filter: Option<String>,
    /// Uniform frequency grid size (per axis for lattice grids).
    pub grid: usize,
    pub probes: Vec<Phase>,
    #[serde(rename = "N_max")]
    pub n_max: u32,
    #[serde(rename = "K")]
    pub big_k: i64,
    #[serde(rename = "J_max")]
    pub j_max: u32,
    pub eps: Vec<f64>,
    /// Dyadic limits use `k ∈ [−k_max, k_max)`.
    pub k_max: i64,
    /// Terms `j = 1..=dyadic_depth` of each dyadic-limit sequence.
    pub dyadic_depth: u32,
    /// Convergence tolerance for dyadic limits.
    pub tol: f64,
    /// Tolerance of the QMF checks.
    pub qmf_tol: f64,
    /// Condition-(C) witness floor.
    pub floor: f64,
    /// Deepest window `[−2^L, 2^L)` of the certified tail bounds.
    pub max_level: u32,
    /// Residue classes lighter than this are dropped from the tail bounds.
    pub prune_mass: f64,
    pub seed: u64,
    /// Single frequency: `p/q` or decimal for scalar commands, JSON array for lattice ones.
    pub xi: Option<String>,
    pub matrix: Option<Vec<Vec<i64>>>,
    /// Lattice vector for `expand`.
    pub vector: Option<Vec<i64>>,
    /// Tile depth `J`.
    pub depth: u32,
    /// Random tile points; exhaustive enumeration when absent.
    pub samples: Option<usize>,
    /// Monte Carlo trials for measure estimates.
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            filter: None,
            grid: 1024,
            probes: Vec::new(),
            n_max: 12,
            big_k: 64,
            j_max: 64,
            eps: vec![1e-2, 1e-4],
            k_max: 8,
            dyadic_depth: 40,
            tol: 1e-6,
            qmf_tol: 1e-12,
            floor: 1e-3,
            max_level: 64,
            prune_mass: 1e-8,
            seed: 0,
            xi: None,
            matrix: None,
            vector: None,
            depth: 6,
            samples: None,
            trials: 100_000,
            out: None,
            format: Format::Json,
            threads: None,
        }
    }
}

/// Commands on the circle and commands on `Z^d` start from different defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Scalar,
    Lattice,
}

impl RunConfig {
    pub fn defaults(family: Family) -> Self {
        match family {
            Family::Scalar => Self {
                filter: Some("haar".into()),
                ..Self::default()
            },
            Family::Lattice => Self {
                filter: Some(crate::filter_spec::DIGIT_AVERAGE.into()),
                grid: 16,
                n_max: 4,
                j_max: 40,
                eps: vec![1e-2],
                ..Self::default()
            },
        }
    }

    /// Family defaults overlaid with the fields present in a JSON config file.
    pub fn load_over(path: &std::path::Path, family: Family) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let patch: serde_json::Value = serde_json::from_str(&text)?;
        let serde_json::Value::Object(patch) = patch else {
            return input("config file must hold a JSON object");
        };
        let mut base = serde_json::to_value(Self::defaults(family))?;
        if let serde_json::Value::Object(map) = &mut base {
            for (k, v) in patch {
                map.insert(k, v);
            }
        }
        Ok(serde_json::from_value(base)?)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.grid == 0 {
            return input("grid must contain at least one point");
        }
        if self.n_max == 0
            || self.big_k <= 0
            || self.j_max == 0
            || self.k_max <= 0
            || self.max_level == 0
            || self.dyadic_depth == 0
        {
            return input("truncations N_max, K, J_max, k_max, dyadic_depth and max_level must be positive");
        }
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return input("eps values must lie in (0,1)");
        }
        if !(self.tol >= 0.0 && self.qmf_tol >= 0.0 && self.floor >= 0.0 && self.prune_mass >= 0.0) {
            return input("tolerances must be nonnegative");
        }
        if self.trials == 0 {
            return input("trials must be positive");
        }
        if self.threads == Some(0) {
            return input("threads must be positive");
        }
        Ok(())
    }
}
