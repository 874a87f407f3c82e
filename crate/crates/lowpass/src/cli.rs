//! The `lowpass` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lowpass_core::diagnostics::{
    condition_c_at, dyadic_limits_at, orthonormality_check, tightness_at, theorem1_from_parts, ConditionCConfig,
    ConditionCReport, DyadicConfig, DyadicLimitReport, DyadicPoint, Tightness, TightnessConfig, TightnessPoint,
    TightnessReport, WitnessPoint,
};
use lowpass_core::lattice::{
    analyze_matrix, build_digit_system, choose_power, cube_grid, m_tilde, multidim_condition_c, multidim_qmf_check,
    multidim_tightness, sample_tile, tile_measure_by_membership, tile_measure_estimate, translate_overlaps,
    DigitSystem, LatticeMatrix, MdTightnessConfig, MdTightnessReport, TileMode,
};
use lowpass_core::measure::{limit_mass, p_table, qmf_gate};
use lowpass_core::numeric::ProductMode;
use lowpass_core::phase::uniform_grid;
use lowpass_core::tail::TailOptions;
use lowpass_core::{Phase, PeriodicFilter};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Family, Format, RunConfig};
use crate::error::{input, CliError, CliResult};
use crate::filter_spec::{resolve, resolve_lattice, FilterEcho, MdFilter};
use crate::plot::{emit_plot_data, tail_tables, xi_label};
use crate::report::{answer_name, num, tightness_name, CsvTable, DyadicLimits, Report, XiEntry, XiKey};

const MODE: ProductMode = ProductMode::Compensated;

#[derive(Debug, Parser)]
#[command(name = "lowpass", version, about = "Numerical checks of low-pass filters and lattice digit systems")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// QMF identity and normalisation of a filter.
    Validate,
    /// Tail curves, certified tail bounds and n(ε) per frequency.
    Tightness,
    /// Heaviest translate and its mass per frequency.
    ConditionC,
    /// Limits of |φ̂|² along dyadic sequences.
    DyadicLimits,
    /// Combined low-pass verdict.
    Verdict,
    /// 1 − Σ_{|k| ≤ K} |φ̂(ξ+k)|² per frequency.
    Orthonormality,
    /// The finite measure P_ξ^N and truncated limit masses at one frequency.
    Table,
    /// CSV curves from an existing JSON report.
    PlotData {
        #[arg(long)]
        report: PathBuf,
    },
    /// Determinant, eigenvalue moduli and power of a dilation matrix.
    MatrixAnalyze,
    /// Coset digits of B = (A^T)^p.
    Digits,
    /// Base-B digit expansion of a lattice vector.
    Expand,
    /// Point cloud of the depth-J tile approximation.
    Tile,
    /// Monte Carlo measure of the tile and of its overlaps with translates.
    TileMeasure,
    /// Coset identities of a multidimensional filter.
    MdQmf,
    /// Retained mass on the nested digit sets Z_n.
    MdTightness,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Tightness => "tightness",
            Command::ConditionC => "condition-c",
            Command::DyadicLimits => "dyadic-limits",
            Command::Verdict => "verdict",
            Command::Orthonormality => "orthonormality",
            Command::Table => "table",
            Command::PlotData { .. } => "plot-data",
            Command::MatrixAnalyze => "matrix-analyze",
            Command::Digits => "digits",
            Command::Expand => "expand",
            Command::Tile => "tile",
            Command::TileMeasure => "tile-measure",
            Command::MdQmf => "md-qmf",
            Command::MdTightness => "md-tightness",
        }
    }

    fn family(&self) -> Family {
        match self {
            Command::MatrixAnalyze
            | Command::Digits
            | Command::Expand
            | Command::Tile
            | Command::TileMeasure
            | Command::MdQmf
            | Command::MdTightness => Family::Lattice,
            _ => Family::Scalar,
        }
    }
}

/// Flags override the config file, which overrides the command's defaults.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// JSON run configuration; the effective configuration is echoed in every report.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Builtin filter name or path to a filter JSON file.
    #[arg(long, global = true)]
    pub filter: Option<String>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Extra frequency, `p/q` or decimal; repeatable.
    #[arg(long = "probe", global = true, value_delimiter = ',')]
    pub probes: Vec<String>,
    #[arg(long = "K", global = true)]
    pub big_k: Option<i64>,
    #[arg(long = "N-max", global = true)]
    pub n_max: Option<u32>,
    #[arg(long = "J-max", global = true)]
    pub j_max: Option<u32>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long = "k-max", global = true)]
    pub k_max: Option<i64>,
    #[arg(long = "dyadic-depth", global = true)]
    pub dyadic_depth: Option<u32>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "qmf-tol", global = true)]
    pub qmf_tol: Option<f64>,
    #[arg(long, global = true)]
    pub floor: Option<f64>,
    #[arg(long = "max-level", global = true)]
    pub max_level: Option<u32>,
    #[arg(long = "prune-mass", global = true)]
    pub prune_mass: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// One frequency instead of the grid; a JSON array for lattice commands.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Row-major JSON integer matrix, e.g. "[[1,1],[-1,1]]".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// JSON integer vector for `expand`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vector: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Random tile points instead of full enumeration.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "LOWPASS_OUT_DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    serde_json::from_str(s).map_err(|e| CliError::Input(format!("cannot parse {what} {s:?}: {e}")))
}

impl Overrides {
    pub fn resolve(&self, family: Family) -> CliResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load_over(p, family)?,
            None => RunConfig::defaults(family),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = v.clone(); })*};
        }
        set!(grid, big_k, n_max, j_max, k_max, dyadic_depth, tol, qmf_tol, floor, max_level, prune_mass, seed, depth, trials);
        if self.filter.is_some() {
            c.filter = self.filter.clone();
        }
        if c.filter.is_none() {
            c.filter = RunConfig::defaults(family).filter;
        }
        if !self.probes.is_empty() {
            c.probes = self.probes.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        }
        if !self.eps.is_empty() {
            c.eps = self.eps.clone();
        }
        if self.xi.is_some() {
            c.xi = self.xi.clone();
        }
        if let Some(m) = &self.matrix {
            c.matrix = Some(parse_json("matrix", m)?);
        }
        if let Some(v) = &self.vector {
            c.vector = Some(parse_json("vector", v)?);
        }
        if self.samples.is_some() {
            c.samples = self.samples;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if let Some(f) = self.format {
            c.format = f;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = cli.opts.resolve(cli.command.family())?;
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| dispatch(&cli.command, &cfg))
        }
        None => dispatch(&cli.command, &cfg),
    }
}

/// What a command produces, written once at the end.
struct Output {
    report: Report,
    tables: Vec<CsvTable>,
    /// Write the CSV tables even in JSON format, and print the first one on stdout.
    csv_primary: bool,
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> CliResult<()> {
    let out = match cmd {
        Command::Validate => cmd_validate(cfg)?,
        Command::Tightness => cmd_tightness(cfg)?,
        Command::ConditionC => cmd_condition_c(cfg)?,
        Command::DyadicLimits => cmd_dyadic(cfg)?,
        Command::Verdict => cmd_verdict(cfg)?,
        Command::Orthonormality => cmd_orthonormality(cfg)?,
        Command::Table => cmd_table(cfg)?,
        Command::PlotData { report } => cmd_plot_data(cfg, report)?,
        Command::MatrixAnalyze => cmd_matrix(cfg)?,
        Command::Digits => cmd_digits(cfg)?,
        Command::Expand => cmd_expand(cfg)?,
        Command::Tile => cmd_tile(cfg)?,
        Command::TileMeasure => cmd_tile_measure(cfg)?,
        Command::MdQmf => cmd_md_qmf(cfg)?,
        Command::MdTightness => cmd_md_tightness(cfg)?,
    };
    emit(cmd.name(), cfg, out)
}

fn emit(name: &str, cfg: &RunConfig, out: Output) -> CliResult<()> {
    let json = out.report.to_json()?;
    let want_csv = out.csv_primary || cfg.format == Format::Csv;
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.json")), json)?;
            if want_csv {
                for t in &out.tables {
                    let f = std::fs::File::create(dir.join(format!("{}.csv", t.name)))?;
                    t.write_to(std::io::BufWriter::new(f))?;
                }
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let written = match out.tables.first() {
                Some(t) if want_csv => t.write_to(&mut lock),
                _ => lock.write_all(json.as_bytes()).map_err(CliError::from),
            }
            .and_then(|()| lock.flush().map_err(CliError::from));
            // A closed reader (`| head`) is not a failure.
            match written {
                Err(e) if is_broken_pipe(&e) => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn is_broken_pipe(e: &CliError) -> bool {
    match e {
        CliError::Io(io) => io.kind() == std::io::ErrorKind::BrokenPipe,
        CliError::Csv(c) => matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe),
        _ => false,
    }
}

fn out(report: Report, tables: Vec<CsvTable>) -> Output {
    Output {
        report,
        tables,
        csv_primary: false,
    }
}

// Scalar commands -------------------------------------------------------------

fn scalar_filter(cfg: &RunConfig) -> CliResult<(FilterEcho, PeriodicFilter)> {
    resolve(cfg.filter.as_deref().unwrap_or("haar"))
}

/// The frequencies to scan (`xi` alone if given, else the uniform grid) and the probes.
fn frequencies(cfg: &RunConfig) -> CliResult<(Vec<Phase>, Vec<Phase>)> {
    let grid = match &cfg.xi {
        Some(s) => vec![s.parse::<Phase>()?],
        None => uniform_grid(cfg.grid)?,
    };
    Ok((grid, cfg.probes.clone()))
}

fn tightness_config(cfg: &RunConfig) -> TightnessConfig {
    let base = TightnessConfig::default();
    TightnessConfig {
        n_max: cfg.n_max,
        eps: cfg.eps.clone(),
        big_k: cfg.big_k,
        j_max: cfg.j_max,
        tail: TailOptions {
            max_level: cfg.max_level,
            prune_mass: cfg.prune_mass,
            mode: MODE,
            ..base.tail
        },
        ..base
    }
}

fn dyadic_config(cfg: &RunConfig) -> DyadicConfig {
    DyadicConfig {
        k_max: cfg.k_max,
        j_max: cfg.dyadic_depth,
        phi_terms: cfg.j_max,
        tol: cfg.tol,
        mode: MODE,
        ..DyadicConfig::default()
    }
}

fn condition_c_config(cfg: &RunConfig) -> ConditionCConfig {
    ConditionCConfig {
        big_k: cfg.big_k,
        j_max: cfg.j_max,
        floor: cfg.floor,
        mode: MODE,
    }
}

fn par_map<T, F>(xs: &[Phase], f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(&Phase) -> lowpass_core::Result<T> + Sync + Send,
{
    Ok(xs.par_iter().map(f).collect::<Result<Vec<_>, _>>()?)
}

fn fill_tightness(e: &mut XiEntry, p: &TightnessPoint) {
    e.tail_curve = Some(p.tail_curve.clone());
    e.certified = Some(p.certified.clone());
    e.n_eps = Some(p.n_eps.clone());
    e.retained_mass = Some(p.retained_mass);
    e.tightness = Some(p.verdict);
}

fn fill_witness(e: &mut XiEntry, w: &WitnessPoint) {
    e.witness_k = Some(json!(w.witness_k));
    e.witness_mass = Some(w.witness_mass);
    e.mass_at_zero = Some(w.mass_at_zero);
}

fn fill_dyadic(e: &mut XiEntry, d: &DyadicPoint) {
    e.dyadic_limits = Some(DyadicLimits {
        plus: d.plus,
        minus: d.minus,
        sequences: d
            .sequences
            .iter()
            .map(|s| (s.k, s.values.last().copied().unwrap_or(f64::NAN), s.status))
            .collect(),
    });
}

fn entries(grid: &[Phase], probes: &[Phase]) -> Vec<XiEntry> {
    grid.iter()
        .map(XiEntry::at)
        .chain(probes.iter().map(|p| XiEntry {
            probe: true,
            ..XiEntry::at(p)
        }))
        .collect()
}

fn cmd_validate(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    let v = f.validate_qmf(cfg.grid, cfg.qmf_tol)?;
    let mut r = Report::new("validate", Some(echo), cfg);
    r.aggregate.verdict = Some(if v.pass { "pass" } else { "fail" }.into());
    r.details = json!({ "qmf": v, "exact_qmf": f.kind().exact_qmf(), "smoothness": f.smoothness_note() });
    Ok(out(r, Vec::new()))
}

fn cmd_tightness(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    let tcfg = tightness_config(cfg);
    qmf_gate(&f)?;
    tcfg.validate()?;
    let (grid, probes) = frequencies(cfg)?;
    let all: Vec<Phase> = grid.iter().chain(&probes).copied().collect();
    let points = par_map(&all, |xi| tightness_at(&f, xi, &tcfg))?;
    let mut r = Report::new("tightness", Some(echo), cfg);
    r.per_xi = entries(&grid, &probes);
    for (e, p) in r.per_xi.iter_mut().zip(&points) {
        fill_tightness(e, p);
    }
    let agg = TightnessReport::from_points(points);
    r.aggregate.verdict = Some(tightness_name(agg.aggregate).into());
    r.aggregate.failing = agg.failing.iter().map(|x| XiKey::Scalar(*x)).collect();
    let (tails, bounds) = tail_tables(&r);
    Ok(out(r, vec![tails, bounds]))
}

fn witness_table(r: &Report) -> CsvTable {
    let mut t = CsvTable::new("witness", &["xi", "witness_k", "witness_mass", "mass_at_zero"]);
    for e in &r.per_xi {
        if let (Some(k), Some(m), Some(z)) = (&e.witness_k, e.witness_mass, e.mass_at_zero) {
            t.push([xi_label(&e.xi), k.to_string(), num(m), num(z)]);
        }
    }
    t
}

fn cmd_condition_c(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    qmf_gate(&f)?;
    let ccfg = condition_c_config(cfg);
    let (grid, probes) = frequencies(cfg)?;
    let all: Vec<Phase> = grid.iter().chain(&probes).copied().collect();
    let points = par_map(&all, |xi| condition_c_at(&f, xi, &ccfg))?;
    let mut r = Report::new("condition-c", Some(echo), cfg);
    r.per_xi = entries(&grid, &probes);
    for (e, w) in r.per_xi.iter_mut().zip(&points) {
        fill_witness(e, w);
    }
    let c = ConditionCReport::from_points(points, cfg.floor);
    r.aggregate.delta_hat = Some(c.delta_hat);
    r.aggregate.cond1_inf = Some(c.cond1_inf);
    r.aggregate.cond2_inf = Some(c.cond2_inf);
    r.aggregate.verdict = Some(if c.failures.is_empty() { "pass" } else { "fail" }.into());
    r.aggregate.failing = c.failures.iter().map(|x| XiKey::Scalar(*x)).collect();
    r.details = json!({ "argmin": c.argmin, "intervals": c.intervals });
    let t = witness_table(&r);
    Ok(out(r, vec![t]))
}

fn dyadic_table(r: &Report) -> CsvTable {
    let mut t = CsvTable::new("dyadic_limits", &["xi", "k", "last_value", "status"]);
    for e in &r.per_xi {
        for (k, v, s) in e.dyadic_limits.iter().flat_map(|d| &d.sequences) {
            let status = serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            t.push([xi_label(&e.xi), k.to_string(), num(*v), status]);
        }
    }
    t
}

fn cmd_dyadic(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    qmf_gate(&f)?;
    let dcfg = dyadic_config(cfg);
    let (grid, probes) = frequencies(cfg)?;
    let all: Vec<Phase> = grid.iter().chain(&probes).copied().collect();
    let points = par_map(&all, |xi| dyadic_limits_at(&f, xi, &dcfg))?;
    let mut r = Report::new("dyadic-limits", Some(echo), cfg);
    r.per_xi = entries(&grid, &probes);
    for (e, d) in r.per_xi.iter_mut().zip(&points) {
        fill_dyadic(e, d);
    }
    let d = DyadicLimitReport::from_points(points);
    r.aggregate.l_plus = Some(d.l_plus);
    r.aggregate.l_minus = Some(d.l_minus);
    r.aggregate.c_ok = Some(d.c_ok);
    r.aggregate.verdict = Some(answer_name(d.c_ok).into());
    let t = dyadic_table(&r);
    Ok(out(r, vec![t]))
}

fn cmd_verdict(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    let tcfg = tightness_config(cfg);
    let dcfg = dyadic_config(cfg);
    let ccfg = condition_c_config(cfg);
    qmf_gate(&f)?;
    tcfg.validate()?;
    let (grid, probes) = frequencies(cfg)?;
    let all: Vec<Phase> = grid.iter().chain(&probes).copied().collect();
    let tight = par_map(&all, |xi| tightness_at(&f, xi, &tcfg))?;
    let dyadic = par_map(&grid, |xi| dyadic_limits_at(&f, xi, &dcfg))?;
    let witness = par_map(&all, |xi| condition_c_at(&f, xi, &ccfg))?;

    let mut r = Report::new("verdict", Some(echo), cfg);
    r.per_xi = entries(&grid, &probes);
    for (i, e) in r.per_xi.iter_mut().enumerate() {
        fill_tightness(e, &tight[i]);
        fill_witness(e, &witness[i]);
        if let Some(d) = dyadic.get(i) {
            fill_dyadic(e, d);
        }
    }
    let (grid_points, probe_points) = tight.split_at(grid.len());
    let dy = DyadicLimitReport::from_points(dyadic);
    let v = theorem1_from_parts(grid_points, probe_points, &dy);
    let c = ConditionCReport::from_points(witness, cfg.floor);
    let a = &mut r.aggregate;
    a.delta_hat = Some(c.delta_hat);
    a.cond1_inf = Some(c.cond1_inf);
    a.cond2_inf = Some(c.cond2_inf);
    a.verdict = Some(answer_name(v.low_pass).into());
    a.b_ok = Some(v.b_ok);
    a.b_ae = Some(v.b_ae);
    a.c_ok = Some(v.c_ok);
    a.l_plus = Some(v.l_plus);
    a.l_minus = Some(v.l_minus);
    a.low_pass = Some(v.low_pass);
    a.failing = v.exceptional.iter().map(|(x, _)| XiKey::Scalar(*x)).collect();
    a.evidence = v.evidence.clone();
    r.details = json!({
        "exceptional": v.exceptional.iter().map(|(x, t)| json!({"xi": x, "tightness": t})).collect::<Vec<_>>(),
        "witness_intervals": c.intervals,
    });
    let (tails, bounds) = tail_tables(&r);
    let w = witness_table(&r);
    let d = dyadic_table(&r);
    Ok(out(r, vec![tails, bounds, w, d]))
}

fn cmd_orthonormality(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    qmf_gate(&f)?;
    let (grid, probes) = frequencies(cfg)?;
    let all: Vec<Phase> = grid.iter().chain(&probes).copied().collect();
    let res = par_map(&all, |xi| {
        orthonormality_check(&f, std::slice::from_ref(xi), cfg.big_k, cfg.j_max, MODE).map(|mut v| v.remove(0))
    })?;
    let mut r = Report::new("orthonormality", Some(echo), cfg);
    r.per_xi = entries(&grid, &probes);
    let mut t = CsvTable::new("orthonormality", &["xi", "residual"]);
    let mut worst: Option<(Phase, f64)> = None;
    for (e, o) in r.per_xi.iter_mut().zip(&res) {
        e.residual = Some(o.residual);
        t.push([o.xi.to_string(), num(o.residual)]);
        if worst.map_or(true, |(_, w)| o.residual.abs() > w.abs()) {
            worst = Some((o.xi, o.residual));
        }
    }
    r.details = json!({
        "max_abs_residual": worst.map(|w| w.1.abs()),
        "argmax": worst.map(|w| w.0),
    });
    Ok(out(r, vec![t]))
}

fn cmd_table(cfg: &RunConfig) -> CliResult<Output> {
    let (echo, f) = scalar_filter(cfg)?;
    let Some(xi) = &cfg.xi else {
        return input("table needs --xi");
    };
    let xi: Phase = xi.parse()?;
    let table = p_table(&f, &xi, cfg.n_max, MODE)?;
    let limits = (-cfg.big_k..=cfg.big_k)
        .map(|k| limit_mass(&f, &xi, k, cfg.j_max, cfg.tol, MODE))
        .collect::<Result<Vec<_>, _>>()?;
    let mut r = Report::new("table", Some(echo), cfg);
    let mut e = XiEntry::at(&xi);
    e.tail_curve = Some(table.tail_curve());
    r.per_xi.push(e);
    let mut t = CsvTable::new("table", &["k", "mass"]);
    for (k, m) in table.iter() {
        t.push([k.to_string(), num(m)]);
    }
    let (argmax, max) = table.argmax();
    r.details = json!({
        "level": table.level(),
        "total": table.total(),
        "argmax": argmax,
        "max_mass": max,
        "limit_masses": limits,
    });
    Ok(out(r, vec![t]))
}

fn cmd_plot_data(cfg: &RunConfig, path: &PathBuf) -> CliResult<Output> {
    if cfg.out.is_none() {
        return input("plot-data writes several files and needs --out or LOWPASS_OUT_DIR");
    }
    let src = Report::read(path)?;
    let tables = emit_plot_data(&src);
    let mut r = Report::new("plot-data", src.filter.clone(), cfg);
    r.details = json!({
        "source": path,
        "files": tables.iter().map(|t| json!({"file": format!("{}.csv", t.name), "columns": t.header, "rows": t.rows.len()})).collect::<Vec<_>>(),
    });
    Ok(Output {
        report: r,
        tables,
        csv_primary: true,
    })
}

// Lattice commands ----------------------------------------------------------

fn lattice_matrix(cfg: &RunConfig) -> CliResult<LatticeMatrix> {
    let Some(rows) = &cfg.matrix else {
        return input("this command needs --matrix");
    };
    Ok(analyze_matrix(rows)?)
}

fn digit_system(cfg: &RunConfig) -> CliResult<(LatticeMatrix, DigitSystem)> {
    let a = lattice_matrix(cfg)?;
    let sys = build_digit_system(&a)?;
    Ok((a, sys))
}

fn system_json(sys: &DigitSystem) -> serde_json::Value {
    json!({
        "power": sys.power(),
        "b": sys.b().rows(),
        "det_b": sys.det().to_string(),
        "digit_count": sys.digit_count(),
        "lambda": sys.lambda(),
        "tile_radius": sys.tile_radius(),
    })
}

fn cmd_matrix(cfg: &RunConfig) -> CliResult<Output> {
    let a = lattice_matrix(cfg)?;
    let ok = a.require_expansive_similarity().is_ok();
    let power = if ok { Some(choose_power(&a)?) } else { None };
    let mut r = Report::new("matrix-analyze", None, cfg);
    r.aggregate.verdict = Some(if ok { "pass" } else { "fail" }.into());
    r.details = json!({
        "matrix": a.matrix().rows(),
        "det": a.det().to_string(),
        "moduli": a.moduli(),
        "expansive": a.is_expansive(),
        "similarity": a.is_similarity(),
        "lambda": a.lambda(),
        "power": power,
        "reason": a.require_expansive_similarity().err().map(|e| e.to_string()),
    });
    Ok(out(r, Vec::new()))
}

fn cmd_digits(cfg: &RunConfig) -> CliResult<Output> {
    let (_, sys) = digit_system(cfg)?;
    let mut r = Report::new("digits", None, cfg);
    let mut details = system_json(&sys);
    details["digits"] = json!(sys.digits());
    details["zero_digit"] = json!(sys.zero_digit());
    r.details = details;
    let cols: Vec<String> = (1..=sys.dim()).map(|i| format!("r{i}")).collect();
    let mut header = vec!["index"];
    header.extend(cols.iter().map(String::as_str));
    let mut t = CsvTable::new("digits", &header);
    for (i, d) in sys.digits().iter().enumerate() {
        t.push(std::iter::once(i.to_string()).chain(d.iter().map(|x| x.to_string())));
    }
    Ok(out(r, vec![t]))
}

fn cmd_expand(cfg: &RunConfig) -> CliResult<Output> {
    let (_, sys) = digit_system(cfg)?;
    let Some(v) = &cfg.vector else {
        return input("expand needs --vector");
    };
    let e = sys.expand(v)?;
    let back = sys.reconstruct(&e.digit_indices)?;
    let mut r = Report::new("expand", None, cfg);
    r.aggregate.verdict = Some(if &back == v { "pass" } else { "fail" }.into());
    let mut details = system_json(&sys);
    details["expansion"] = json!(e);
    details["digits_used"] = json!(e.digit_indices.iter().map(|&i| &sys.digits()[i]).collect::<Vec<_>>());
    details["reconstructed"] = json!(back);
    r.details = details;
    Ok(out(r, Vec::new()))
}

fn tile_mode(cfg: &RunConfig) -> TileMode {
    match cfg.samples {
        Some(count) => TileMode::MonteCarlo { count, seed: cfg.seed },
        None => TileMode::Exhaustive,
    }
}

fn cmd_tile(cfg: &RunConfig) -> CliResult<Output> {
    let (_, sys) = digit_system(cfg)?;
    let s = sample_tile(&sys, cfg.depth, tile_mode(cfg))?;
    let header: Vec<String> = (1..=s.dim).map(|i| format!("x{i}")).collect();
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = CsvTable::new("tile_points", &header_ref);
    for p in s.points() {
        t.push(p.iter().map(|x| num(*x)));
    }
    let mut r = Report::new("tile", None, cfg);
    let (lo, hi) = if s.is_empty() { (Vec::new(), Vec::new()) } else { s.bounds() };
    let mut details = system_json(&sys);
    details["points"] = json!(s.len());
    details["bounds"] = json!({"lo": lo, "hi": hi});
    details["max_norm"] = json!(if s.is_empty() { None } else { Some(s.max_norm()) });
    r.details = details;
    Ok(Output {
        report: r,
        tables: vec![t],
        csv_primary: true,
    })
}

fn cmd_tile_measure(cfg: &RunConfig) -> CliResult<Output> {
    let (_, sys) = digit_system(cfg)?;
    let s = sample_tile(&sys, cfg.depth, tile_mode(cfg))?;
    let m = tile_measure_estimate(&s, cfg.trials, cfg.seed)?;
    let overlaps = if s.is_empty() {
        Vec::new()
    } else {
        translate_overlaps(&s, m.radius, 1, cfg.trials, cfg.seed.wrapping_add(1))?
    };
    let (mem, mem_se) = tile_measure_by_membership(&sys, cfg.depth, cfg.trials, cfg.seed.wrapping_add(2))?;
    let mut t = CsvTable::new("overlaps", &["k", "estimate", "std_error"]);
    for o in &overlaps {
        let k: Vec<String> = o.k.iter().map(|x| x.to_string()).collect();
        t.push([k.join(" "), num(o.estimate), num(o.std_error)]);
    }
    let mut r = Report::new("tile-measure", None, cfg);
    let mut details = system_json(&sys);
    details["points"] = json!(s.len());
    details["measure"] = json!(m);
    details["membership"] = json!({"estimate": mem, "std_error": mem_se});
    details["overlaps"] = json!(overlaps);
    r.details = details;
    Ok(out(r, vec![t]))
}

fn md_filter(cfg: &RunConfig, a: &LatticeMatrix) -> CliResult<(FilterEcho, MdFilter)> {
    resolve_lattice(cfg.filter.as_deref().unwrap_or(crate::filter_spec::DIGIT_AVERAGE), a)
}

fn cmd_md_qmf(cfg: &RunConfig) -> CliResult<Output> {
    let (a, sys) = digit_system(cfg)?;
    let (echo, m) = md_filter(cfg, &a)?;
    let v = multidim_qmf_check(&m, &sys, cfg.grid, cfg.qmf_tol)?;
    let mut r = Report::new("md-qmf", Some(echo), cfg);
    r.aggregate.verdict = Some(if v.pass { "pass" } else { "fail" }.into());
    let mut details = system_json(&sys);
    details["qmf"] = json!(v);
    r.details = details;
    Ok(out(r, Vec::new()))
}

fn cmd_md_tightness(cfg: &RunConfig) -> CliResult<Output> {
    let (a, sys) = digit_system(cfg)?;
    let (echo, m) = md_filter(cfg, &a)?;
    let mt = m_tilde(m, &a, sys.power())?;
    let points: Vec<Vec<f64>> = match &cfg.xi {
        Some(s) => {
            let xi: Vec<f64> = parse_json("xi", s)?;
            if xi.len() != sys.dim() {
                return input(format!("xi has {} coordinates, the matrix is {}x{}", xi.len(), sys.dim(), sys.dim()));
            }
            vec![xi]
        }
        None => cube_grid(sys.dim(), cfg.grid)?,
    };
    let tcfg = MdTightnessConfig {
        eps: cfg.eps.clone(),
        n_max: cfg.n_max,
        j_max: cfg.j_max,
        ..MdTightnessConfig::default()
    };
    let results = points
        .par_iter()
        .map(|xi| {
            let t = multidim_tightness(&mt, &sys, xi, &tcfg)?;
            let c = multidim_condition_c(&mt, &sys, std::slice::from_ref(xi), cfg.n_max, cfg.j_max)?;
            Ok((t, c))
        })
        .collect::<Result<Vec<_>, lowpass_core::Error>>()?;
    let mut r = Report::new("md-tightness", Some(echo), cfg);
    let mut t = CsvTable::new("md_tail", &["xi", "n", "finite", "limit"]);
    let mut delta_hat = f64::INFINITY;
    let mut any_not = false;
    let mut budget_limited = false;
    for (rep, c) in &results {
        let rep: &MdTightnessReport = rep;
        let mut e = XiEntry::at_vector(&rep.xi);
        e.n_eps = Some(rep.n_eps.clone());
        e.tightness = Some(rep.verdict);
        e.tail_curve = Some(rep.limit.iter().map(|m| 1.0 - m).collect());
        if let Some(w) = c.points.first() {
            e.witness_k = Some(json!(w.k));
            e.witness_mass = Some(w.mass);
        }
        delta_hat = delta_hat.min(c.delta_hat);
        budget_limited |= rep.budget_limited;
        if rep.verdict != Tightness::Tight {
            any_not |= rep.verdict == Tightness::NotTight;
            r.aggregate.failing.push(XiKey::Vector(rep.xi.clone()));
        }
        let label = xi_label(&e.xi);
        for (n, (f, l)) in rep.finite.iter().zip(&rep.limit).enumerate() {
            t.push([label.clone(), n.to_string(), num(*f), num(*l)]);
        }
        r.per_xi.push(e);
    }
    let verdict = if r.aggregate.failing.is_empty() {
        Tightness::Tight
    } else if any_not {
        Tightness::NotTight
    } else {
        Tightness::Inconclusive
    };
    r.aggregate.verdict = Some(tightness_name(verdict).into());
    r.aggregate.delta_hat = Some(delta_hat);
    let mut details = system_json(&sys);
    details["budget_limited"] = json!(budget_limited);
    details["domain"] = json!("unit cube [0,1)^d");
    r.details = details;
    Ok(out(r, vec![t]))
}
