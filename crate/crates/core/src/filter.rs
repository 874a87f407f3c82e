//! One-periodic squared-modulus filters `M(ξ) = |m(2πξ)|²`.
//!
//! Filters are evaluated on the centered representative `t ∈ [−½,½)` of `ξ mod 1`
//! (see [`crate::numeric::center`]); this keeps arguments near zero at full
//! relative precision, which matters for the long products built from them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::center;
use crate::phase::OrbitPoint;

/// Anything that can be evaluated as a one-periodic filter.
pub trait UnitFilter: Sync {
    /// Value at the centered argument `t ∈ [−½,½)`.
    fn eval_centered(&self, t: f64) -> f64;

    /// `M(ξ mod 1)`.
    fn evaluate(&self, xi: f64) -> f64 {
        self.eval_centered(center(xi))
    }

    /// Value at an orbit point; filters with sharp features compare against
    /// the exact rational when one is available.
    fn eval_point(&self, t: &OrbitPoint) -> f64 {
        self.eval_centered(t.value())
    }

    /// `(a, b)` such that `eval_point` and `eval_centered` return exactly
    /// `1.0` on `[−a, b]`; `(0, 0)` if unknown.
    fn flat_interval(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

impl<F: UnitFilter + ?Sized> UnitFilter for &F {
    fn eval_centered(&self, t: f64) -> f64 {
        (**self).eval_centered(t)
    }

    fn eval_point(&self, t: &OrbitPoint) -> f64 {
        (**self).eval_point(t)
    }

    fn flat_interval(&self) -> (f64, f64) {
        (**self).flat_interval()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FilterKind {
    Haar,
    Shannon,
    DaubechiesD4,
    CuspCounterexample,
    /// `M = χ_[0,½)`: satisfies the QMF identity but `φ̂ = χ_[0,1)` has
    /// non-orthonormal translates.
    Paluszynski,
    Sampled,
}

impl FilterKind {
    pub const BUILTIN: [FilterKind; 5] = [
        FilterKind::Haar,
        FilterKind::Shannon,
        FilterKind::DaubechiesD4,
        FilterKind::CuspCounterexample,
        FilterKind::Paluszynski,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Haar => "haar",
            FilterKind::Shannon => "shannon",
            FilterKind::DaubechiesD4 => "d4",
            FilterKind::CuspCounterexample => "cusp",
            FilterKind::Paluszynski => "paluszynski",
            FilterKind::Sampled => "sampled",
        }
    }

    /// Whether the QMF identity holds bit-for-bit on dyadic grids.
    pub fn exact_qmf(&self) -> bool {
        matches!(
            self,
            FilterKind::Shannon | FilterKind::CuspCounterexample | FilterKind::Paluszynski
        )
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Ok(match key.as_str() {
            "haar" => FilterKind::Haar,
            "shannon" => FilterKind::Shannon,
            "d4" | "db2" | "daubechiesd4" | "daubechies4" => FilterKind::DaubechiesD4,
            "cusp" | "cuspcounterexample" => FilterKind::CuspCounterexample,
            "paluszynski" => FilterKind::Paluszynski,
            "sampled" => FilterKind::Sampled,
            _ => return Err(Error::InvalidParameter(format!("unknown filter kind {s:?}"))),
        })
    }
}

/// A one-periodic filter with values in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicFilter {
    kind: FilterKind,
    samples: Option<Vec<f64>>,
    smoothness_note: String,
}

impl PeriodicFilter {
    /// Built-in filter. Fails for [`FilterKind::Sampled`].
    pub fn builtin(kind: FilterKind) -> Result<Self> {
        let note = match kind {
            FilterKind::Haar => "cos^2(pi xi); Lipschitz",
            FilterKind::Shannon => "indicator of [0,1/4) u [3/4,1); discontinuous",
            FilterKind::DaubechiesD4 => "cos^4(pi xi)(1 + 2 sin^2(pi xi)); smooth",
            FilterKind::CuspCounterexample => {
                "smooth near 0 and 1/2; logarithmic cusps at 1/3 and 2/3"
            }
            FilterKind::Paluszynski => "indicator of [0,1/2); discontinuous",
            FilterKind::Sampled => return Err(Error::NotBuiltin("sampled")),
        };
        Ok(Self {
            kind,
            samples: None,
            smoothness_note: note.into(),
        })
    }

    /// Piecewise-linear filter through `samples[i] = M(i/n)`.
    ///
    /// With `symmetrize`, the second half is overwritten by `1 − M` of the first
    /// half so the QMF identity holds at every grid point.
    pub fn sampled(mut samples: Vec<f64>, symmetrize: bool) -> Result<Self> {
        let n = samples.len();
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidSamples(format!(
                "grid size {n} must be even and at least 2"
            )));
        }
        if let Some((i, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidSamples(format!("sample {i} = {v} outside [0,1]")));
        }
        if symmetrize {
            let h = n / 2;
            for i in 0..h {
                samples[i + h] = 1.0 - samples[i];
            }
        }
        Ok(Self {
            kind: FilterKind::Sampled,
            samples: Some(samples),
            smoothness_note: "piecewise linear".into(),
        })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn samples(&self) -> Option<&[f64]> {
        self.samples.as_deref()
    }

    pub fn smoothness_note(&self) -> &str {
        &self.smoothness_note
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.smoothness_note = note.into();
        self
    }

    pub fn reflect(self) -> ReflectedFilter {
        ReflectedFilter { base: self }
    }

    /// Check `M(0) = 1` and `|M(ξ) + M(ξ+½) − 1| ≤ tol` on `ξ = j/grid_n`.
    pub fn validate_qmf(&self, grid_n: usize, tol: f64) -> Result<ValidationOutcome> {
        validate_qmf(self, grid_n, tol)
    }
}

impl UnitFilter for PeriodicFilter {
    fn eval_centered(&self, t: f64) -> f64 {
        let v = match self.kind {
            FilterKind::Haar => {
                let c = libm::cos(PI * t);
                c * c
            }
            FilterKind::Shannon => {
                if (-0.25..0.25).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            FilterKind::DaubechiesD4 => {
                let c = libm::cos(PI * t);
                let s = libm::sin(PI * t);
                let c2 = c * c;
                c2 * c2 * (1.0 + 2.0 * s * s)
            }
            FilterKind::CuspCounterexample => cusp(t),
            FilterKind::Paluszynski => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FilterKind::Sampled => {
                interpolate(self.samples.as_deref().unwrap_or(&[1.0, 0.0]), t)
            }
        };
        v.clamp(0.0, 1.0)
    }

    fn eval_point(&self, t: &OrbitPoint) -> f64 {
        if !t.is_exact() {
            return self.eval_centered(t.value());
        }
        match self.kind {
            FilterKind::Shannon => {
                if t.offset_from(1, 4) < 0.0 && t.offset_from(-1, 4) >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FilterKind::Paluszynski => {
                if t.signum() >= 0 {
                    1.0
                } else {
                    0.0
                }
            }
            FilterKind::CuspCounterexample => {
                // Away from the cusps the rounded argument is accurate enough.
                let v = t.value();
                let near = [1.0 / 6.0, 1.0 / 3.0]
                    .iter()
                    .any(|c| libm::fabs(libm::fabs(v) - c) < CUSP_EXACT_ZONE);
                if near {
                    cusp_exact(t).clamp(0.0, 1.0)
                } else {
                    self.eval_centered(v)
                }
            }
            _ => self.eval_centered(t.value()),
        }
    }

    fn flat_interval(&self) -> (f64, f64) {
        match self.kind {
            FilterKind::Shannon => (0.25, 0.125),
            // Left of 0 the value 1 − ½σ(12|t|) rounds to 1 once σ(12|t|) < 2^−54.
            FilterKind::CuspCounterexample => (1.0 / 512.0, 1.0 / 24.0),
            FilterKind::Paluszynski => (0.0, 0.25),
            _ => (0.0, 0.0),
        }
    }
}

fn interpolate(samples: &[f64], t: f64) -> f64 {
    let n = samples.len();
    let x = if t < 0.0 { t + 1.0 } else { t };
    let pos = x * n as f64;
    let i = libm::floor(pos);
    let w = pos - i;
    let i = (i as usize) % n;
    let a = samples[i];
    let b = samples[(i + 1) % n];
    a + w * (b - a)
}

/// `M̃(ξ) = M(−ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedFilter {
    pub base: PeriodicFilter,
}

impl ReflectedFilter {
    pub fn reflect(self) -> PeriodicFilter {
        self.base
    }
}

impl UnitFilter for ReflectedFilter {
    fn eval_centered(&self, t: f64) -> f64 {
        self.base.eval_centered(center(-t))
    }

    fn eval_point(&self, t: &OrbitPoint) -> f64 {
        self.base.eval_point(&t.neg())
    }

    fn flat_interval(&self) -> (f64, f64) {
        let (a, b) = self.base.flat_interval();
        (b, a)
    }
}

// Cusp counterexample ------------------------------------------------------

fn h(delta: f64) -> f64 {
    if delta <= 0.0 {
        0.0
    } else {
        1.0 / libm::log(E + 1.0 / delta)
    }
}

/// `h(1/8) = 1/ln(e + 8)`.
const H_EIGHTH: f64 = 0.421_593_893_238_872_15;
/// `h(1/12) = 1/ln(e + 12)`.
const H_TWELFTH: f64 = 0.371_872_959_855_590_33;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / t)
    }
}

/// Smooth step: 0 on `(−∞,0]`, 1 on `[1,∞)`, all derivatives vanish at both ends.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump(t);
    a / (a + bump(1.0 - t))
}

#[derive(Clone, Copy)]
enum Anchor {
    A1,
    Sixth,
    Third,
    Quarter,
    A3,
    Half,
}

/// The positive-half profile of the cusp filter, written in terms of signed
/// distances `x − c` to the anchor points `c`.
fn cusp_half(dist: impl Fn(Anchor) -> f64) -> f64 {
    let h8 = H_EIGHTH;
    let h12 = H_TWELFTH;
    if dist(Anchor::A1) <= 0.0 {
        1.0
    } else if dist(Anchor::Sixth) <= 0.0 {
        h(-dist(Anchor::Sixth)) / h8
    } else if dist(Anchor::Quarter) <= 0.0 {
        0.5 * h(dist(Anchor::Sixth)) / h12
    } else if dist(Anchor::Third) <= 0.0 {
        1.0 - 0.5 * h(-dist(Anchor::Third)) / h12
    } else if dist(Anchor::A3) <= 0.0 {
        1.0 - 0.5 * h(dist(Anchor::Third)) / h12
    } else {
        0.5 * smooth_step(-dist(Anchor::Half) * 12.0)
    }
}

/// Rounded landmarks reached through `ξ − 1` or `1 − ξ`, mapped to the rounded
/// centered landmark they stand for.
fn cusp_alias(t: f64) -> f64 {
    let aliases = [
        (5.0 / 6.0 - 1.0, -1.0 / 6.0),
        (2.0 / 3.0 - 1.0, -1.0 / 3.0),
        (1.0 - 5.0 / 6.0, 1.0 / 6.0),
        (1.0 - 2.0 / 3.0, 1.0 / 3.0),
    ];
    aliases
        .iter()
        .find(|(a, _)| *a == t)
        .map_or(t, |(_, c)| *c)
}

fn cusp(t: f64) -> f64 {
    let t = cusp_alias(t);
    if t >= 0.0 {
        return cusp_half(|a| {
            t - match a {
                Anchor::A1 => 1.0 / 24.0,
                Anchor::Sixth => 1.0 / 6.0,
                Anchor::Quarter => 0.25,
                Anchor::Third => 1.0 / 3.0,
                Anchor::A3 => 5.0 / 12.0,
                Anchor::Half => 0.5,
            }
        });
    }
    // M(t) = 1 − M(t + ½) for t ∈ [−½,0). When t + ½ is exact this keeps the
    // identity bit-for-bit; otherwise, and at the shifted anchors themselves,
    // distances are measured from the shifted anchors so the zeros and ones at
    // −1/6 and −1/3 are hit exactly.
    let shifted = |a| match a {
        Anchor::A1 => -11.0 / 24.0,
        Anchor::Sixth => -1.0 / 3.0,
        Anchor::Quarter => -0.25,
        Anchor::Third => -1.0 / 6.0,
        Anchor::A3 => -1.0 / 12.0,
        Anchor::Half => 0.0,
    };
    let on_anchor = [Anchor::A1, Anchor::Sixth, Anchor::Third, Anchor::A3]
        .into_iter()
        .any(|a| shifted(a) == t);
    let x = t + 0.5;
    if !on_anchor && x - 0.5 == t {
        return 1.0 - cusp(x);
    }
    1.0 - cusp_half(|a| t - shifted(a))
}

/// Within this distance of `±1/6` and `±1/3` the cusp filter is evaluated from
/// the exact argument.
const CUSP_EXACT_ZONE: f64 = 1e-3;

fn anchor_ratio(a: Anchor) -> (i64, i64) {
    match a {
        Anchor::A1 => (1, 24),
        Anchor::Sixth => (1, 6),
        Anchor::Quarter => (1, 4),
        Anchor::Third => (1, 3),
        Anchor::A3 => (5, 12),
        Anchor::Half => (1, 2),
    }
}

/// The cusp filter at an exact argument: every branch test and distance is
/// taken against the rational anchors.
fn cusp_exact(t: &OrbitPoint) -> f64 {
    if t.signum() >= 0 {
        cusp_half(|a| {
            let (p, q) = anchor_ratio(a);
            t.offset_from(p, q)
        })
    } else {
        1.0 - cusp_half(|a| {
            let (p, q) = anchor_ratio(a);
            t.offset_from(2 * p - q, 2 * q)
        })
    }
}

// QMF validation -----------------------------------------------------------

/// Result of a QMF check; failure is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationOutcome {
    pub pass: bool,
    /// Value of the filter at the origin.
    pub at_zero: f64,
    pub worst_xi: f64,
    pub worst_residual: f64,
    pub tol: f64,
    pub grid_n: usize,
}

pub fn validate_qmf<F: UnitFilter + ?Sized>(
    filter: &F,
    grid_n: usize,
    tol: f64,
) -> Result<ValidationOutcome> {
    if grid_n < 2 || grid_n % 2 != 0 {
        return Err(Error::InvalidGrid(grid_n));
    }
    let at_zero = filter.evaluate(0.0);
    let mut worst_xi = 0.0;
    let mut worst = libm::fabs(at_zero - 1.0);
    for j in 0..grid_n {
        let xi = j as f64 / grid_n as f64;
        let r = libm::fabs(filter.evaluate(xi) + filter.evaluate(xi + 0.5) - 1.0);
        if r > worst {
            worst = r;
            worst_xi = xi;
        }
    }
    Ok(ValidationOutcome {
        pass: worst <= tol,
        at_zero,
        worst_xi,
        worst_residual: worst,
        tol,
        grid_n,
    })
}
