//! Certified bounds on the retained mass of the limiting measure.
//!
//! Write `S_L = [−2^L, 2^L)` and `x_L(r) = (ξ + r)/2^L mod 1`. Grouping `k` by
//! its residue `r = k mod 2^L`,
//!
//! ```text
//! P_ξ(S_L) = Σ_{0 ≤ r < 2^L} Q_ξ^L(r) · (Φ⁺(x_L(r)) + Φ⁻(x_L(r))),
//! Φ⁺(x) = ∏_{i≥1} M(x/2^i),   Φ⁻(x) = ∏_{i≥1} M((x−1)/2^i),
//! ```
//!
//! and `Σ_r Q_ξ^L(r) = 1`. An atom `(r, Q_ξ^L(r))` splits into the two residues
//! `r` and `r + 2^L` of the next level, and its subtree contributes to every
//! later window between `Q·(Φ⁺+Φ⁻)` and `Q`. Atoms whose retained fraction is
//! already within `ρ` of one are retired, atoms lighter than `τ` are pruned, and
//! both are booked as a certain part plus slack. The result is a lower and an
//! upper bound on `P_ξ(S_L)` for every `L`, valid for all `N` at once since
//! `P_ξ^N(S_L)` decreases to `P_ξ(S_L)`.
//!
//! The bounds are exact up to floating-point rounding in the products.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::UnitFilter;
use crate::numeric::{NeumaierSum, Product, ProductMode};
use crate::phase::{OrbitPoint, Phase};

/// Arguments below this magnitude are treated as contributing a factor of 1.
pub const NEGLIGIBLE_ARGUMENT: f64 = 1.0 / (1u64 << 60) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailOptions {
    /// Largest window `L`; bounds are reported for `0..=max_level`.
    pub max_level: u32,
    /// Atoms lighter than this are pruned (`τ`).
    pub prune_mass: f64,
    /// Atoms retaining at least `1 − ρ` of their mass are retired.
    pub retire_slack: f64,
    /// Live-atom cap; the lightest atoms are pruned beyond it.
    pub max_atoms: usize,
    /// Stop once the lower bound reaches this value.
    pub stop_above: f64,
    pub mode: ProductMode,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            max_level: 64,
            prune_mass: 1e-9,
            retire_slack: 1e-12,
            max_atoms: 1 << 20,
            stop_above: 1.0,
            mode: ProductMode::Compensated,
        }
    }
}

/// Bounds on `P_ξ([−2^L, 2^L))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RetainedBound {
    pub level: u32,
    pub lower: f64,
    pub upper: f64,
    pub live_atoms: usize,
}

impl RetainedBound {
    /// Upper bound on `sup_N P_ξ^N(msb_index ≥ L+1)`.
    pub fn tail_upper(&self) -> f64 {
        (1.0 - self.lower).max(0.0)
    }
}

/// `Φ⁺(x) + Φ⁻(x)` from the pair `(x, x − 1)`.
pub fn retained_fraction<F: UnitFilter + ?Sized>(
    filter: &F,
    x: &OrbitPoint,
    x_minus_one: &OrbitPoint,
    mode: ProductMode,
) -> f64 {
    scaled_product(filter, x, mode) + scaled_product(filter, x_minus_one, mode)
}

/// `∏_{i≥1} M(y/2^i)` for `|y| ≤ 1`.
fn scaled_product<F: UnitFilter + ?Sized>(filter: &F, y: &OrbitPoint, mode: ProductMode) -> f64 {
    let (left, right) = filter.flat_interval();
    let left = left.max(NEGLIGIBLE_ARGUMENT);
    let right = right.max(NEGLIGIBLE_ARGUMENT);
    let mut p = Product::new(mode);
    let mut t = *y;
    loop {
        t = t.half();
        let v = t.value();
        if v >= -left && v <= right {
            break;
        }
        p.mul(filter.eval_point(&t));
        if p.is_zero() {
            break;
        }
    }
    p.value()
}

/// A residue class `r mod 2^L`, stored as the numerator of
/// `x = (ξ + r)/2^L mod 1` over the common denominator `den(ξ)·2^L`, with its
/// mass `Q_ξ^L(r)` and, when known from the parent, one of its tail products.
#[derive(Clone, Copy)]
struct Atom {
    num: i128,
    approx: f64,
    mass: f64,
    plus: Option<f64>,
    minus: Option<f64>,
}

/// Lower and upper bounds on `P_ξ(S_L)` for `L = 0..=max_level`, or up to the
/// first level whose lower bound reaches `stop_above`.
pub fn retained_bounds<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    opts: &TailOptions,
) -> Result<Vec<RetainedBound>> {
    let cap = 126u32.saturating_sub(xi.den_bits());
    if opts.max_level > cap {
        return Err(Error::LevelCap {
            level: opts.max_level,
            cap,
        });
    }
    if !(opts.prune_mass >= 0.0 && opts.retire_slack >= 0.0) || opts.max_atoms == 0 {
        return Err(Error::InvalidParameter("tail options must be nonnegative".into()));
    }
    let mut out = Vec::with_capacity(opts.max_level as usize + 1);
    let mut den = xi.den();
    let num0 = xi.num().rem_euclid(den);
    let mut atoms = alloc::vec![Atom {
        num: num0,
        approx: num0 as f64 / den as f64,
        mass: 1.0,
        plus: None,
        minus: None,
    }];
    let mut settled = NeumaierSum::new();
    let mut slack = NeumaierSum::new();
    let mut state: Vec<(f64, f64)> = Vec::new();
    for level in 0..=opts.max_level {
        if atoms.len() > opts.max_atoms {
            let mut masses: Vec<f64> = atoms.iter().map(|a| a.mass).collect();
            let cut = atoms.len() - opts.max_atoms;
            masses.select_nth_unstable_by(cut, |a, b| a.total_cmp(b));
            let keep_min = masses[cut];
            atoms.retain(|a| {
                if a.mass < keep_min {
                    slack.add(a.mass);
                    false
                } else {
                    true
                }
            });
        }
        let point = |a: &Atom| OrbitPoint::exact_with_value(a.num, den, a.approx);
        let point_m1 = |a: &Atom| OrbitPoint::exact_with_value(a.num - den, den, a.approx - 1.0);
        state.clear();
        let mut live = NeumaierSum::new();
        for a in &atoms {
            let plus = a
                .plus
                .unwrap_or_else(|| scaled_product(filter, &point(a), opts.mode));
            let minus = a
                .minus
                .unwrap_or_else(|| scaled_product(filter, &point_m1(a), opts.mode));
            live.add(a.mass * (plus + minus));
            state.push((plus, minus));
        }
        let lower = settled.value() + live.value();
        out.push(RetainedBound {
            level,
            lower: lower.min(1.0),
            upper: (lower + slack.value()).min(1.0),
            live_atoms: atoms.len(),
        });
        if level == opts.max_level || lower >= opts.stop_above {
            break;
        }
        let mut next = Vec::with_capacity(2 * atoms.len());
        for (a, &(plus, minus)) in atoms.iter().zip(&state) {
            let s = plus + minus;
            if s >= 1.0 - opts.retire_slack || a.mass < opts.prune_mass {
                settled.add(a.mass * s);
                slack.add(a.mass * (1.0 - s));
                continue;
            }
            // Φ⁺(x) = M(x/2)·Φ⁺(x/2) and Φ⁻(x) = M((x−1)/2)·Φ⁻((x+1)/2 − 1).
            let stay = filter.eval_point(&point(a).half());
            let flip = filter.eval_point(&point_m1(a).half());
            if stay > 0.0 {
                next.push(Atom {
                    num: a.num,
                    approx: 0.5 * a.approx,
                    mass: a.mass * stay,
                    plus: Some((plus / stay).min(1.0)),
                    minus: None,
                });
            }
            if flip > 0.0 {
                next.push(Atom {
                    num: a.num + den,
                    approx: 0.5 * (a.approx + 1.0),
                    mass: a.mass * flip,
                    plus: None,
                    minus: Some((minus / flip).min(1.0)),
                });
            }
        }
        atoms = next;
        den *= 2;
    }
    Ok(out)
}
