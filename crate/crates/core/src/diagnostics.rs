//! Verification questions on a grid of frequencies.
//!
//! - [`tightness_at`]: is `P_ξ` concentrated on finite sequences (`P_ξ(Z) = 1`)?
//! - [`condition_c_at`]: the best witness `max_{|k| ≤ K} P_ξ(k)`.
//! - [`dyadic_limits_at`]: does `|φ̂((ξ+k)/2^j)|² → 1` for every `k ≥ 0` / `k ≤ −1`?
//! - [`theorem1_verdict`]: both conditions together, with the evidence.
//!
//! "Almost everywhere" is checked at every sampled point; probe points are
//! reported separately so isolated exceptional points stay visible.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::UnitFilter;
use crate::measure::{limit_mass, p_table_unchecked, qmf_gate, TABLE_LEVEL_CAP};
use crate::numeric::{NeumaierSum, Product, ProductMode};
use crate::phase::Phase;
use crate::tail::{retained_bounds, RetainedBound, TailOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Tightness {
    Tight,
    NotTight,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Answer {
    Yes,
    No,
    Inconclusive,
}

// Tightness ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightnessConfig {
    /// Level of the table behind the finite-`N` tail curve.
    pub n_max: u32,
    pub eps: Vec<f64>,
    /// Truncation `|k| ≤ K` of the retained-mass sum.
    pub big_k: i64,
    /// Factors in each limit product.
    pub j_max: u32,
    pub tail: TailOptions,
    /// A point is not tight when even the upper retained bound at the largest
    /// window stays at or below this value.
    pub escape_ceiling: f64,
}

impl Default for TightnessConfig {
    fn default() -> Self {
        Self {
            n_max: 12,
            eps: alloc::vec![1e-2, 1e-4],
            big_k: 64,
            j_max: 64,
            tail: TailOptions {
                max_level: 64,
                prune_mass: 1e-8,
                max_atoms: 1 << 19,
                ..TailOptions::default()
            },
            escape_ceiling: 0.5,
        }
    }
}

impl TightnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max > TABLE_LEVEL_CAP {
            return Err(Error::LevelCap {
                level: self.n_max,
                cap: TABLE_LEVEL_CAP,
            });
        }
        if self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::InvalidParameter("eps values must lie in (0,1)".into()));
        }
        if self.big_k < 0 || self.j_max == 0 {
            return Err(Error::InvalidParameter("K must be >= 0 and J_max >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightnessPoint {
    pub xi: Phase,
    pub xi_value: f64,
    /// `n ↦ sup_{N ≤ N_max} Σ_{msb(k) ≥ n} P_ξ^N(k)` for `n = 1..=N_max+1`.
    pub tail_curve: Vec<f64>,
    /// Bounds on `P_ξ([−2^L, 2^L))`, valid for every `N`.
    pub certified: Vec<RetainedBound>,
    /// Smallest `n` whose certified tail `sup_N Σ_{msb ≥ n}` is at most `ε`.
    pub n_eps: Vec<Option<u32>>,
    /// `Σ_{|k| ≤ K} P_ξ(k)`.
    pub retained_mass: f64,
    pub verdict: Tightness,
}

/// Retained mass `Σ_{|k| ≤ K} P_ξ(k)` from truncated limit products.
pub fn retained_mass<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    big_k: i64,
    j_max: u32,
    mode: ProductMode,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for k in -big_k..=big_k {
        acc.add(limit_mass(filter, xi, k, j_max, 0.0, mode)?.value);
    }
    Ok(acc.value())
}

/// `n(ε)` from certified bounds: the smallest `n = L + 1` with `1 − lower(L) ≤ ε`.
pub fn n_eps_from_bounds(bounds: &[RetainedBound], eps: f64) -> Option<u32> {
    bounds
        .iter()
        .find(|b| b.tail_upper() <= eps)
        .map(|b| b.level + 1)
}

pub fn tightness_at<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    cfg: &TightnessConfig,
) -> Result<TightnessPoint> {
    let table = p_table_unchecked(filter, xi, cfg.n_max, cfg.tail.mode)?;
    let tail_curve = table.tail_curve();
    let smallest_eps = cfg.eps.iter().copied().fold(1.0, f64::min);
    let mut tail = cfg.tail;
    tail.stop_above = tail.stop_above.min(1.0 - smallest_eps);
    let certified = retained_bounds(filter, xi, &tail)?;
    let n_eps: Vec<Option<u32>> = cfg
        .eps
        .iter()
        .map(|&e| n_eps_from_bounds(&certified, e))
        .collect();
    let last_upper = certified.last().map_or(1.0, |b| b.upper);
    let verdict = if n_eps.iter().all(Option::is_some) {
        Tightness::Tight
    } else if last_upper <= cfg.escape_ceiling {
        Tightness::NotTight
    } else {
        Tightness::Inconclusive
    };
    Ok(TightnessPoint {
        xi: *xi,
        xi_value: xi.value(),
        tail_curve,
        certified,
        n_eps,
        retained_mass: retained_mass(filter, xi, cfg.big_k, cfg.j_max, cfg.tail.mode)?,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightnessReport {
    pub points: Vec<TightnessPoint>,
    pub aggregate: Tightness,
    /// Points whose verdict is not `tight`.
    pub failing: Vec<Phase>,
}

impl TightnessReport {
    /// Aggregate: tight if every point is, not tight if some point provably
    /// loses mass, inconclusive otherwise.
    pub fn from_points(points: Vec<TightnessPoint>) -> Self {
        let failing: Vec<Phase> = points
            .iter()
            .filter(|p| p.verdict != Tightness::Tight)
            .map(|p| p.xi)
            .collect();
        let aggregate = if failing.is_empty() {
            Tightness::Tight
        } else if points.iter().any(|p| p.verdict == Tightness::NotTight) {
            Tightness::NotTight
        } else {
            Tightness::Inconclusive
        };
        Self {
            points,
            aggregate,
            failing,
        }
    }
}

pub fn tightness_scan<F: UnitFilter + ?Sized>(
    filter: &F,
    grid: &[Phase],
    cfg: &TightnessConfig,
) -> Result<TightnessReport> {
    qmf_gate(filter)?;
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    let points = grid
        .iter()
        .map(|xi| tightness_at(filter, xi, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(TightnessReport::from_points(points))
}

// Condition (C) --------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionCConfig {
    pub big_k: i64,
    pub j_max: u32,
    /// Witness masses below this are flagged.
    pub floor: f64,
    pub mode: ProductMode,
}

impl Default for ConditionCConfig {
    fn default() -> Self {
        Self {
            big_k: 64,
            j_max: 64,
            floor: 1e-3,
            mode: ProductMode::Compensated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessPoint {
    pub xi: Phase,
    pub xi_value: f64,
    pub witness_k: i64,
    pub witness_mass: f64,
    /// `P_ξ(0) = |φ̂(ξ)|²`.
    pub mass_at_zero: f64,
}

/// Integers `0, −1, 1, −2, 2, …` with `|k| ≤ K`.
fn centered_order(big_k: i64) -> impl Iterator<Item = i64> {
    core::iter::once(0).chain((1..=big_k).flat_map(|m| [-m, m]))
}

pub fn condition_c_at<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    cfg: &ConditionCConfig,
) -> Result<WitnessPoint> {
    let mut best = (0i64, -1.0f64);
    let mut at_zero = 0.0;
    for k in centered_order(cfg.big_k) {
        let m = limit_mass(filter, xi, k, cfg.j_max, 0.0, cfg.mode)?.value;
        if k == 0 {
            at_zero = m;
        }
        if m > best.1 {
            best = (k, m);
        }
    }
    Ok(WitnessPoint {
        xi: *xi,
        xi_value: xi.value(),
        witness_k: best.0,
        witness_mass: best.1,
        mass_at_zero: at_zero,
    })
}

/// Consecutive sampled points sharing a witness `k` with mass at least `δ̂/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessInterval {
    pub lo: f64,
    pub hi: f64,
    pub k: i64,
    pub min_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionCReport {
    pub points: Vec<WitnessPoint>,
    /// `min_ξ max_{|k| ≤ K} P_ξ(k)` over the grid.
    pub delta_hat: f64,
    pub argmin: Option<Phase>,
    /// Points whose witness mass is below the floor.
    pub failures: Vec<Phase>,
    pub intervals: Vec<WitnessInterval>,
    /// `min_ξ |φ̂(ξ)|²`, the single-translate form of the condition.
    pub cond1_inf: f64,
    /// `min_ξ sup_k |φ̂(ξ+k)|²`, equal to `delta_hat`.
    pub cond2_inf: f64,
}

impl ConditionCReport {
    pub fn from_points(mut points: Vec<WitnessPoint>, floor: f64) -> Self {
        points.sort_by(|a, b| a.xi_value.total_cmp(&b.xi_value));
        let (delta_hat, argmin) = points
            .iter()
            .map(|p| (p.witness_mass, Some(p.xi)))
            .fold((f64::INFINITY, None), |acc, x| if x.0 < acc.0 { x } else { acc });
        let delta_hat = if points.is_empty() { 0.0 } else { delta_hat };
        let failures = points
            .iter()
            .filter(|p| p.witness_mass < floor)
            .map(|p| p.xi)
            .collect();
        let mut intervals: Vec<WitnessInterval> = Vec::new();
        let mut open = false;
        for p in &points {
            if p.witness_mass < delta_hat / 2.0 {
                open = false;
                continue;
            }
            match intervals.last_mut() {
                Some(iv) if open && iv.k == p.witness_k => {
                    iv.hi = p.xi_value;
                    iv.min_mass = iv.min_mass.min(p.witness_mass);
                }
                _ => {
                    intervals.push(WitnessInterval {
                        lo: p.xi_value,
                        hi: p.xi_value,
                        k: p.witness_k,
                        min_mass: p.witness_mass,
                    });
                    open = true;
                }
            }
        }
        let cond1_inf = points
            .iter()
            .map(|p| p.mass_at_zero)
            .fold(f64::INFINITY, f64::min);
        Self {
            points,
            delta_hat,
            argmin,
            failures,
            intervals,
            cond1_inf: if cond1_inf.is_finite() { cond1_inf } else { 0.0 },
            cond2_inf: delta_hat,
        }
    }
}

pub fn condition_c_scan<F: UnitFilter + ?Sized>(
    filter: &F,
    grid: &[Phase],
    cfg: &ConditionCConfig,
) -> Result<ConditionCReport> {
    if cfg.big_k < 1 || cfg.j_max == 0 {
        return Err(Error::InvalidParameter("K and J_max must be at least 1".into()));
    }
    let points = grid
        .iter()
        .map(|xi| condition_c_at(filter, xi, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionCReport::from_points(points, cfg.floor))
}

// Dyadic limits ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicConfig {
    /// `k` ranges over `[−k_max, k_max − 1]`.
    pub k_max: i64,
    pub j_max: u32,
    /// Factors in each `|φ̂|²` product.
    pub phi_terms: u32,
    pub tol: f64,
    /// A sequence ending at or below `1 − away` is counted as not converging.
    pub away: f64,
    pub mode: ProductMode,
}

impl Default for DyadicConfig {
    fn default() -> Self {
        Self {
            k_max: 8,
            j_max: 40,
            phi_terms: 64,
            tol: 1e-6,
            away: 0.5,
            mode: ProductMode::Compensated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LimitStatus {
    Converged,
    Unsettled,
    Away,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicSequence {
    pub k: i64,
    /// `|φ̂((ξ+k)/2^j)|²` for `j = 1..=j_max`.
    pub values: Vec<f64>,
    pub status: LimitStatus,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicPoint {
    pub xi: Phase,
    pub xi_value: f64,
    pub sequences: Vec<DyadicSequence>,
    /// Every `k ≥ 0` converges to 1.
    pub plus: LimitStatus,
    /// Every `k ≤ −1` converges to 1.
    pub minus: LimitStatus,
}

fn combine(statuses: impl Iterator<Item = LimitStatus>) -> LimitStatus {
    let mut out = LimitStatus::Converged;
    for s in statuses {
        match s {
            LimitStatus::Away => return LimitStatus::Away,
            LimitStatus::Unsettled => out = LimitStatus::Unsettled,
            LimitStatus::Converged => {}
        }
    }
    out
}

pub fn dyadic_limits_at<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    cfg: &DyadicConfig,
) -> Result<DyadicPoint> {
    if cfg.j_max == 0 || cfg.k_max < 1 {
        return Err(Error::InvalidParameter("J_max and k range must be positive".into()));
    }
    let mut sequences = Vec::with_capacity(2 * cfg.k_max as usize);
    for k in -cfg.k_max..cfg.k_max {
        let total = cfg.j_max + cfg.phi_terms;
        let factors: Vec<f64> = (1..=total)
            .map(|i| filter.eval_point(&xi.orbit(k as i128, i)))
            .collect();
        let values: Vec<f64> = (1..=cfg.j_max)
            .map(|j| {
                let mut p = Product::new(cfg.mode);
                for f in &factors[j as usize..(j + cfg.phi_terms) as usize] {
                    p.mul(*f);
                }
                p.value()
            })
            .collect();
        let last = *values.last().unwrap_or(&0.0);
        let status = if libm::fabs(last - 1.0) <= cfg.tol {
            LimitStatus::Converged
        } else if last <= 1.0 - cfg.away {
            LimitStatus::Away
        } else {
            LimitStatus::Unsettled
        };
        sequences.push(DyadicSequence { k, values, status });
    }
    let plus = combine(sequences.iter().filter(|s| s.k >= 0).map(|s| s.status));
    let minus = combine(sequences.iter().filter(|s| s.k < 0).map(|s| s.status));
    Ok(DyadicPoint {
        xi: *xi,
        xi_value: xi.value(),
        sequences,
        plus,
        minus,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicLimitReport {
    pub points: Vec<DyadicPoint>,
    /// Fraction of sampled points in `L⁺`.
    pub l_plus: f64,
    /// Fraction of sampled points in `L⁻`.
    pub l_minus: f64,
    /// `L⁺` and `L⁻` both nonempty on the grid.
    pub c_ok: Answer,
}

impl DyadicLimitReport {
    pub fn from_points(points: Vec<DyadicPoint>) -> Self {
        let n = points.len().max(1) as f64;
        let frac = |f: &dyn Fn(&DyadicPoint) -> bool| points.iter().filter(|p| f(p)).count() as f64 / n;
        let l_plus = frac(&|p| p.plus == LimitStatus::Converged);
        let l_minus = frac(&|p| p.minus == LimitStatus::Converged);
        let plus_away = frac(&|p| p.plus == LimitStatus::Away);
        let minus_away = frac(&|p| p.minus == LimitStatus::Away);
        let c_ok = if l_plus > 0.0 && l_minus > 0.0 {
            Answer::Yes
        } else if (l_plus == 0.0 && plus_away == 1.0) || (l_minus == 0.0 && minus_away == 1.0) {
            Answer::No
        } else {
            Answer::Inconclusive
        };
        Self {
            points,
            l_plus,
            l_minus,
            c_ok,
        }
    }
}

pub fn dyadic_limit_scan<F: UnitFilter + ?Sized>(
    filter: &F,
    grid: &[Phase],
    cfg: &DyadicConfig,
) -> Result<DyadicLimitReport> {
    let points = grid
        .iter()
        .map(|xi| dyadic_limits_at(filter, xi, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(DyadicLimitReport::from_points(points))
}

// Orthonormality ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrthonormalityResidual {
    pub xi: Phase,
    pub xi_value: f64,
    /// `1 − Σ_{|k| ≤ K} |φ̂(ξ+k)|²`.
    pub residual: f64,
}

pub fn orthonormality_check<F: UnitFilter + ?Sized>(
    filter: &F,
    grid: &[Phase],
    big_k: i64,
    j_max: u32,
    mode: ProductMode,
) -> Result<Vec<OrthonormalityResidual>> {
    grid.iter()
        .map(|xi| {
            Ok(OrthonormalityResidual {
                xi: *xi,
                xi_value: xi.value(),
                residual: 1.0 - retained_mass(filter, xi, big_k, j_max, mode)?,
            })
        })
        .collect()
}

// Verdict -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerdictConfig {
    pub grid: Vec<Phase>,
    pub probes: Vec<Phase>,
    pub tightness: TightnessConfig,
    pub dyadic: DyadicConfig,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoremOneVerdict {
    /// Tight at every sampled point, probes included.
    pub b_ok: bool,
    /// Concentration on finite sequences judged from the uniform grid.
    pub b_ae: Answer,
    /// Sampled points that are not tight, with their verdicts.
    pub exceptional: Vec<(Phase, Tightness)>,
    pub c_ok: Answer,
    pub l_plus: f64,
    pub l_minus: f64,
    pub low_pass: Answer,
    pub evidence: Vec<String>,
}

/// `b_ae` from the uniform-grid points in grid order: yes if all are tight, no
/// if two neighbouring points both lose mass, inconclusive otherwise.
pub fn almost_everywhere(grid_points: &[TightnessPoint]) -> Answer {
    if grid_points.iter().all(|p| p.verdict == Tightness::Tight) {
        return Answer::Yes;
    }
    let n = grid_points.len();
    let escapes = |i: usize| grid_points[i % n].verdict == Tightness::NotTight;
    if n >= 2 && (0..n).any(|i| escapes(i) && escapes(i + 1)) {
        return Answer::No;
    }
    Answer::Inconclusive
}

pub fn theorem1_from_parts(
    grid_points: &[TightnessPoint],
    probe_points: &[TightnessPoint],
    dyadic: &DyadicLimitReport,
) -> TheoremOneVerdict {
    let exceptional: Vec<(Phase, Tightness)> = grid_points
        .iter()
        .chain(probe_points)
        .filter(|p| p.verdict != Tightness::Tight)
        .map(|p| (p.xi, p.verdict))
        .collect();
    let b_ok = exceptional.is_empty();
    let b_ae = almost_everywhere(grid_points);
    let low_pass = match (b_ae, dyadic.c_ok) {
        (Answer::Yes, Answer::Yes) => Answer::Yes,
        (Answer::No, _) | (_, Answer::No) => Answer::No,
        _ => Answer::Inconclusive,
    };
    let mut evidence = alloc::vec![format!(
        "almost-everywhere statements are checked on {} uniform grid points and {} probe points only",
        grid_points.len(),
        probe_points.len()
    )];
    for (xi, v) in &exceptional {
        evidence.push(format!("xi = {xi}: {v:?}"));
    }
    if !exceptional.is_empty() && b_ae == Answer::Yes {
        evidence.push("failures occur only at probe points, a set of measure zero".into());
    }
    evidence.push(format!(
        "dyadic limits: L+ on {:.4} of the grid, L- on {:.4}",
        dyadic.l_plus, dyadic.l_minus
    ));
    TheoremOneVerdict {
        b_ok,
        b_ae,
        exceptional,
        c_ok: dyadic.c_ok,
        l_plus: dyadic.l_plus,
        l_minus: dyadic.l_minus,
        low_pass,
        evidence,
    }
}

pub fn theorem1_verdict<F: UnitFilter + ?Sized>(
    filter: &F,
    cfg: &VerdictConfig,
) -> Result<TheoremOneVerdict> {
    qmf_gate(filter)?;
    cfg.tightness.validate()?;
    if cfg.grid.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    let grid_points = cfg
        .grid
        .iter()
        .map(|xi| tightness_at(filter, xi, &cfg.tightness))
        .collect::<Result<Vec<_>>>()?;
    let probe_points = cfg
        .probes
        .iter()
        .map(|xi| tightness_at(filter, xi, &cfg.tightness))
        .collect::<Result<Vec<_>>>()?;
    let dyadic = dyadic_limit_scan(filter, &cfg.grid, &cfg.dyadic)?;
    Ok(theorem1_from_parts(&grid_points, &probe_points, &dyadic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{FilterKind, PeriodicFilter};
    use crate::phase::uniform_grid;

    fn f(kind: FilterKind) -> PeriodicFilter {
        PeriodicFilter::builtin(kind).unwrap()
    }

    fn ph(n: i128, d: i128) -> Phase {
        Phase::new(n, d).unwrap()
    }

    fn quick() -> TightnessConfig {
        TightnessConfig {
            n_max: 8,
            eps: alloc::vec![1e-2],
            big_k: 16,
            j_max: 48,
            tail: TailOptions {
                max_level: 24,
                prune_mass: 1e-7,
                ..TailOptions::default()
            },
            escape_ceiling: 0.5,
        }
    }

    #[test]
    fn shannon_tight_with_n_one() {
        let grid = [ph(1, 10), ph(3, 10), ph(7, 10), ph(9, 10)];
        let cfg = TightnessConfig {
            eps: alloc::vec![1e-6],
            ..quick()
        };
        let r = tightness_scan(&f(FilterKind::Shannon), &grid, &cfg).unwrap();
        assert_eq!(r.aggregate, Tightness::Tight);
        assert!(r.points.iter().all(|p| p.n_eps == [Some(1)]));
    }

    #[test]
    fn cusp_exceptional_point_is_not_tight() {
        let c = f(FilterKind::CuspCounterexample);
        let p = tightness_at(&c, &ph(1, 3), &quick()).unwrap();
        assert_eq!(p.verdict, Tightness::NotTight);
        assert_eq!(p.retained_mass, 0.0);
        let q = tightness_at(&c, &ph(3, 10), &quick()).unwrap();
        assert!(q.retained_mass > 0.8);
    }

    #[test]
    fn n_eps_monotone_in_eps() {
        let cfg = TightnessConfig {
            eps: alloc::vec![1e-1, 1e-2, 1e-3],
            ..quick()
        };
        let p = tightness_at(&f(FilterKind::Haar), &ph(1, 4), &cfg).unwrap();
        let ns: Vec<u32> = p.n_eps.iter().map(|n| n.unwrap()).collect();
        assert!(ns.windows(2).all(|w| w[0] <= w[1]), "{ns:?}");
        assert!(p.tail_curve.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn condition_c_examples() {
        let grid = uniform_grid(64).unwrap();
        let cfg = ConditionCConfig {
            big_k: 4,
            j_max: 48,
            ..Default::default()
        };
        let r = condition_c_scan(&f(FilterKind::Haar), &grid, &cfg).unwrap();
        assert!(r.delta_hat >= 0.4, "{}", r.delta_hat);
        assert!(r.points.iter().all(|p| p.witness_k == 0 || p.witness_k == -1));
        assert!(r.points.iter().all(|p| r.delta_hat <= p.witness_mass));
        let r = condition_c_scan(&f(FilterKind::Shannon), &grid, &cfg).unwrap();
        assert_eq!(r.delta_hat, 1.0);
        let g = [ph(1, 3), ph(1, 2)];
        let r = condition_c_scan(&f(FilterKind::CuspCounterexample), &g, &cfg).unwrap();
        assert!(r.points[0].witness_mass < 0.01);
        assert_eq!(r.failures, alloc::vec![ph(1, 3)]);
    }

    #[test]
    fn witness_intervals_merge_neighbours() {
        let grid = uniform_grid(16).unwrap();
        let r = condition_c_scan(&f(FilterKind::Shannon), &grid, &ConditionCConfig::default()).unwrap();
        assert_eq!(r.intervals.len(), 2);
        assert_eq!((r.intervals[0].k, r.intervals[0].lo, r.intervals[0].hi), (0, 0.0, 0.4375));
        assert_eq!((r.intervals[1].k, r.intervals[1].lo), (-1, 0.5));
    }

    #[test]
    fn dyadic_examples() {
        let cfg = DyadicConfig::default();
        let p = dyadic_limits_at(&f(FilterKind::Haar), &ph(1, 2), &cfg).unwrap();
        let s0 = p.sequences.iter().find(|s| s.k == 0).unwrap();
        assert!(s0.values[4] >= 0.999);
        assert_eq!(p.plus, LimitStatus::Converged);
        assert_eq!(p.minus, LimitStatus::Converged);
        let pal = f(FilterKind::Paluszynski);
        let r = dyadic_limit_scan(&pal, &uniform_grid(16).unwrap(), &cfg).unwrap();
        assert_eq!(r.l_minus, 0.0);
        assert_eq!(r.l_plus, 1.0);
        assert_eq!(r.c_ok, Answer::No);
        let p = dyadic_limits_at(&f(FilterKind::Shannon), &ph(3, 10), &cfg).unwrap();
        assert_eq!(p.sequences.iter().find(|s| s.k == 0).unwrap().values[0], 1.0);
    }

    #[test]
    fn orthonormality_is_one_minus_retained() {
        let g = [ph(1, 4), ph(7, 10)];
        let r = orthonormality_check(&f(FilterKind::Haar), &g, 16, 48, ProductMode::Compensated).unwrap();
        for o in &r {
            let m = retained_mass(&f(FilterKind::Haar), &o.xi, 16, 48, ProductMode::Compensated).unwrap();
            assert_eq!(o.residual, 1.0 - m);
        }
        let r = orthonormality_check(&f(FilterKind::Shannon), &g, 1, 48, ProductMode::Compensated).unwrap();
        assert!(r.iter().all(|o| o.residual == 0.0));
    }

    #[test]
    fn verdicts() {
        let cfg = VerdictConfig {
            grid: uniform_grid(16).unwrap(),
            probes: alloc::vec![],
            tightness: quick(),
            dyadic: DyadicConfig::default(),
        };
        let v = theorem1_verdict(&f(FilterKind::Shannon), &cfg).unwrap();
        assert_eq!(v.low_pass, Answer::Yes);
        let v = theorem1_verdict(&f(FilterKind::Paluszynski), &cfg).unwrap();
        assert!(v.b_ok);
        assert_eq!(v.c_ok, Answer::No);
        assert_eq!(v.low_pass, Answer::No);
    }
}
