//! Product measures on `Z^d` for a digit system.
//!
//! `P_ξ^N(k) = ∏_{j=1}^N M̃(B^{-j}(ξ + k))`. Writing `k = r_{i_0} + B r_{i_1} + …`,
//! periodicity gives `M̃(B^{-j}(ξ + k)) = M̃(η_j)` with
//! `η_j = B^{-1}(η_{j−1} + r_{i_{j−1}})`, `η_0 = ξ`, so every argument stays
//! bounded and the level-`n` masses come from a walk over digit strings.

use alloc::vec;
use alloc::vec::Vec;

use super::digits::DigitSystem;
use super::filter::LatticeFilter;
use super::EXHAUSTIVE_BUDGET;
use crate::diagnostics::Tightness;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

fn strings_needed(sys: &DigitSystem, n: u32) -> Result<u128> {
    let q = sys.digit_count() as u128;
    let mut t: u128 = 1;
    for _ in 0..n {
        t = t.checked_mul(q).ok_or(Error::Overflow)?;
        if t > EXHAUSTIVE_BUDGET {
            return Err(Error::BudgetExceeded {
                needed: t,
                budget: EXHAUSTIVE_BUDGET,
            });
        }
    }
    Ok(t)
}

struct Walk<'a, F: ?Sized> {
    filter: &'a F,
    sys: &'a DigitSystem,
    /// `B^j r_i` for `j < n`, indexed `[j][i]`.
    shifted: Vec<Vec<Vec<i64>>>,
    n: usize,
    factors: usize,
}

impl<F: LatticeFilter + ?Sized> Walk<'_, F> {
    fn tail(&self, mut eta: [f64; 3], mut mass: f64) -> f64 {
        let d = self.sys.dim();
        let mut next = [0.0; 3];
        for _ in self.n..self.factors {
            if mass == 0.0 {
                break;
            }
            self.sys.b_inv_apply(&eta[..d], &mut next[..d]);
            eta = next;
            mass *= self.filter.eval(&eta[..d]);
        }
        mass
    }

    fn descend(
        &self,
        level: usize,
        eta: [f64; 3],
        mass: f64,
        k: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64], f64),
    ) {
        let d = self.sys.dim();
        if level == self.n {
            visit(k, self.tail(eta, mass));
            return;
        }
        let mut y = [0.0; 3];
        let mut next = [0.0; 3];
        for (i, r) in self.sys.digits().iter().enumerate() {
            for c in 0..d {
                y[c] = eta[c] + r[c] as f64;
            }
            self.sys.b_inv_apply(&y[..d], &mut next[..d]);
            let m = mass * self.filter.eval(&next[..d]);
            if m == 0.0 {
                continue;
            }
            for c in 0..d {
                k[c] += self.shifted[level][i][c];
            }
            self.descend(level + 1, next, m, k, visit);
            for c in 0..d {
                k[c] -= self.shifted[level][i][c];
            }
        }
    }
}

/// Visit `(k, P_ξ^{factors}(k))` for every `k ∈ Z_n` with nonzero mass.
pub fn walk_level<F: LatticeFilter + ?Sized>(
    filter: &F,
    sys: &DigitSystem,
    xi: &[f64],
    n: u32,
    factors: u32,
    visit: &mut dyn FnMut(&[i64], f64),
) -> Result<()> {
    let d = sys.dim();
    if xi.len() != d || filter.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if xi.len() != d { xi.len() } else { filter.dim() },
        });
    }
    if factors < n {
        return Err(Error::InvalidParameter("factor count below digit length".into()));
    }
    if let Some(x) = xi.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(*x));
    }
    strings_needed(sys, n)?;
    let powers = sys.b_powers(n as usize)?;
    let shifted = powers
        .iter()
        .map(|bj| sys.digits().iter().map(|r| bj.apply(r)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let walk = Walk {
        filter,
        sys,
        shifted,
        n: n as usize,
        factors: factors as usize,
    };
    let mut eta = [0.0; 3];
    eta[..d].copy_from_slice(xi);
    let mut k = vec![0i64; d];
    walk.descend(0, eta, 1.0, &mut k, visit);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdMass {
    pub k: Vec<i64>,
    pub mass: f64,
}

/// `P_ξ^N` on `Z_N`, nonzero entries only.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdTable {
    pub xi: Vec<f64>,
    pub level: u32,
    pub entries: Vec<MdMass>,
}

impl MdTable {
    pub fn total(&self) -> f64 {
        crate::numeric::sum(self.entries.iter().map(|e| e.mass))
    }

    pub fn get(&self, k: &[i64]) -> Option<f64> {
        self.entries.iter().find(|e| e.k == k).map(|e| e.mass)
    }
}

pub fn multidim_p_table<F: LatticeFilter + ?Sized>(
    m_tilde: &F,
    sys: &DigitSystem,
    xi: &[f64],
    n: u32,
) -> Result<MdTable> {
    if n == 0 {
        return Err(Error::InvalidParameter("table level must be at least 1".into()));
    }
    let mut entries = Vec::new();
    walk_level(m_tilde, sys, xi, n, n, &mut |k, mass| {
        entries.push(MdMass { k: k.to_vec(), mass })
    })?;
    Ok(MdTable {
        xi: xi.to_vec(),
        level: n,
        entries,
    })
}

/// `P_ξ^{factors}(Z_n)`.
pub fn retained_on_level<F: LatticeFilter + ?Sized>(
    m_tilde: &F,
    sys: &DigitSystem,
    xi: &[f64],
    n: u32,
    factors: u32,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    walk_level(m_tilde, sys, xi, n, factors, &mut |_, m| acc.add(m))?;
    Ok(acc.value())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdTightnessConfig {
    pub eps: Vec<f64>,
    pub n_max: u32,
    /// Factors used for the limiting masses.
    pub j_max: u32,
    pub escape_ceiling: f64,
}

impl Default for MdTightnessConfig {
    fn default() -> Self {
        Self {
            eps: vec![1e-2],
            n_max: 4,
            j_max: 40,
            escape_ceiling: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdTightnessReport {
    pub xi: Vec<f64>,
    /// `P_ξ^{N_max}(Z_n)` for `n = 0, 1, …`.
    pub finite: Vec<f64>,
    /// `P_ξ(Z_n)` from `max(J_max, N_max)` factors; never above `finite`.
    pub limit: Vec<f64>,
    /// Smallest `n` with `P_ξ(Z_n) ≥ 1 − ε`.
    pub n_eps: Vec<Option<u32>>,
    /// Levels skipped because the digit-string budget ran out.
    pub budget_limited: bool,
    pub verdict: Tightness,
}

/// Retained mass on the nested sets `Z_n` under the deepest measures.
///
/// The limit masses bound every `P_ξ^{N+j}(Z_N)` from below, so reaching
/// `1 − ε` there certifies the condition for all `j`.
pub fn multidim_tightness<F: LatticeFilter + ?Sized>(
    m_tilde: &F,
    sys: &DigitSystem,
    xi: &[f64],
    cfg: &MdTightnessConfig,
) -> Result<MdTightnessReport> {
    if cfg.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidParameter("eps values must lie in (0,1)".into()));
    }
    let deep = cfg.j_max.max(cfg.n_max);
    let mut finite = Vec::new();
    let mut limit = Vec::new();
    let mut budget_limited = false;
    let smallest = cfg.eps.iter().copied().fold(1.0, f64::min);
    for n in 0..=cfg.n_max {
        if strings_needed(sys, n).is_err() {
            budget_limited = true;
            break;
        }
        finite.push(retained_on_level(m_tilde, sys, xi, n, cfg.n_max)?);
        limit.push(retained_on_level(m_tilde, sys, xi, n, deep)?);
        if limit[limit.len() - 1] >= 1.0 - smallest {
            break;
        }
    }
    let n_eps: Vec<Option<u32>> = cfg
        .eps
        .iter()
        .map(|&e| limit.iter().position(|&m| m >= 1.0 - e).map(|n| n as u32))
        .collect();
    let verdict = if n_eps.iter().all(Option::is_some) {
        Tightness::Tight
    } else if limit.last().map_or(false, |&m| m <= cfg.escape_ceiling) {
        Tightness::NotTight
    } else {
        Tightness::Inconclusive
    };
    Ok(MdTightnessReport {
        xi: xi.to_vec(),
        finite,
        limit,
        n_eps,
        budget_limited,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdWitness {
    pub xi: Vec<f64>,
    pub k: Vec<i64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdConditionC {
    pub points: Vec<MdWitness>,
    /// `min_ξ max_{k ∈ Z_n} P_ξ(k)`.
    pub delta_hat: f64,
}

pub fn multidim_condition_c<F: LatticeFilter + ?Sized>(
    m_tilde: &F,
    sys: &DigitSystem,
    grid: &[Vec<f64>],
    n: u32,
    j_max: u32,
) -> Result<MdConditionC> {
    let mut points = Vec::with_capacity(grid.len());
    for xi in grid {
        let mut best = (vec![0i64; sys.dim()], 0.0f64);
        walk_level(m_tilde, sys, xi, n, j_max.max(n), &mut |k, m| {
            if m > best.1 {
                best = (k.to_vec(), m);
            }
        })?;
        points.push(MdWitness {
            xi: xi.clone(),
            k: best.0,
            mass: best.1,
        });
    }
    let delta_hat = points.iter().map(|p| p.mass).fold(f64::INFINITY, f64::min);
    Ok(MdConditionC {
        delta_hat: if points.is_empty() { 0.0 } else { delta_hat },
        points,
    })
}
