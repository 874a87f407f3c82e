//! One-periodic filters on `R^d` and the QMF identities for a dilation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::digits::{coset_representatives, DigitSystem};
use super::matrix::{IntMatrix, LatticeMatrix};
use crate::error::{Error, Result};
use crate::filter::UnitFilter;

/// A one-periodic function on `R^d` with values in `[0, 1]`.
pub trait LatticeFilter {
    fn dim(&self) -> usize;
    fn eval(&self, xi: &[f64]) -> f64;
}

impl<F: LatticeFilter + ?Sized> LatticeFilter for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        (**self).eval(xi)
    }
}

fn dot_frac(r: &[i64], xi: &[f64]) -> f64 {
    let s: f64 = r.iter().zip(xi).map(|(&a, &x)| a as f64 * (x - libm::round(x))).sum();
    s - libm::round(s)
}

/// `|q^{-1} Σ_r e^{2πi r·ξ}|²` over a digit set of `Z^d / A^T(Z^d)`.
///
/// With `A = 2I` this is the separable Haar filter `∏ cos²(πξ_i)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DigitAverageFilter {
    d: usize,
    digits: Vec<Vec<i64>>,
}

impl DigitAverageFilter {
    pub fn for_matrix(a: &LatticeMatrix) -> Result<Self> {
        Ok(Self {
            d: a.dim(),
            digits: coset_representatives(&a.matrix().transpose())?,
        })
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }
}

impl LatticeFilter for DigitAverageFilter {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        let (mut c, mut s) = (0.0, 0.0);
        for r in &self.digits {
            let t = 2.0 * PI * dot_frac(r, xi);
            c += libm::cos(t);
            s += libm::sin(t);
        }
        let q = self.digits.len() as f64;
        ((c * c + s * s) / (q * q)).clamp(0.0, 1.0)
    }
}

/// `∏_i M_i(ξ_i)` from scalar filters.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableFilter<F> {
    factors: Vec<F>,
}

impl<F: UnitFilter> SeparableFilter<F> {
    pub fn new(factors: Vec<F>) -> Result<Self> {
        if factors.is_empty() || factors.len() > super::matrix::MAX_DIM {
            return Err(Error::DimensionCap(factors.len()));
        }
        Ok(Self { factors })
    }
}

impl<F: UnitFilter> LatticeFilter for SeparableFilter<F> {
    fn dim(&self) -> usize {
        self.factors.len()
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        let mut p = 1.0;
        for (f, &x) in self.factors.iter().zip(xi) {
            p *= f.evaluate(x);
            if p == 0.0 {
                break;
            }
        }
        p
    }
}

/// `M̃(ξ) = ∏_{j=0}^{p−1} M((A^T)^j ξ)`, one-periodic since `A^T(Z^d) ⊂ Z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MTilde<F> {
    base: F,
    at: IntMatrix,
    p: u32,
}

pub fn m_tilde<F: LatticeFilter>(base: F, a: &LatticeMatrix, p: u32) -> Result<MTilde<F>> {
    if base.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: base.dim(),
        });
    }
    Ok(MTilde {
        base,
        at: a.matrix().transpose(),
        p,
    })
}

impl<F> MTilde<F> {
    pub fn base(&self) -> &F {
        &self.base
    }
    pub fn power(&self) -> u32 {
        self.p
    }
}

impl<F: LatticeFilter> LatticeFilter for MTilde<F> {
    fn dim(&self) -> usize {
        self.at.dim()
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        let d = self.dim();
        let mut x = [0.0; 3];
        for i in 0..d {
            x[i] = xi[i] - libm::round(xi[i]);
        }
        let mut prod = 1.0;
        for j in 0..self.p {
            if j > 0 {
                let mut y = [0.0; 3];
                for i in 0..d {
                    let s: f64 = (0..d).map(|l| self.at.get(i, l) as f64 * x[l]).sum();
                    y[i] = s - libm::round(s);
                }
                x = y;
            }
            prod *= self.base.eval(&x[..d]);
            if prod == 0.0 {
                break;
            }
        }
        prod
    }
}

/// Points `j/n` of the cube `[0,1)^d`, last coordinate fastest.
pub fn cube_grid(d: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidGrid(n));
    }
    let total = (n as u128).pow(d as u32);
    if total > super::EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget: super::EXHAUSTIVE_BUDGET,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total as usize {
        let mut rem = idx;
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            x[i] = (rem % n) as f64 / n as f64;
            rem /= n;
        }
        out.push(x);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdValidation {
    pub pass: bool,
    pub at_zero: f64,
    /// Worst `|Σ_r M(ξ + (A^T)^{-1} r) − 1|` over the grid.
    pub a_level_residual: f64,
    /// Worst `|Σ_i M̃(ξ + B^{-1} r_i) − 1|` over the grid.
    pub b_level_residual: f64,
    pub worst_xi: Vec<f64>,
    pub tol: f64,
    pub grid_n: usize,
}

fn shifts(c: &IntMatrix, reps: &[Vec<i64>]) -> Result<Vec<Vec<f64>>> {
    let inv = c.inverse_f64()?;
    let d = c.dim();
    Ok(reps
        .iter()
        .map(|r| {
            (0..d)
                .map(|i| (0..d).map(|j| inv[i * d + j] * r[j] as f64).sum())
                .collect()
        })
        .collect())
}

fn coset_sum<F: LatticeFilter + ?Sized>(m: &F, xi: &[f64], shifts: &[Vec<f64>]) -> f64 {
    let mut y = [0.0; 3];
    let d = xi.len();
    shifts
        .iter()
        .map(|s| {
            for i in 0..d {
                y[i] = xi[i] + s[i];
            }
            m.eval(&y[..d])
        })
        .sum()
}

/// Check both coset identities on an `n^d` grid: the one for `A^T` with `M`,
/// and the one for `B = (A^T)^p` with `M̃`, plus `M(0) = 1`.
pub fn multidim_qmf_check<F: LatticeFilter>(
    m: &F,
    sys: &DigitSystem,
    grid_n: usize,
    tol: f64,
) -> Result<MdValidation> {
    let d = sys.dim();
    if m.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.dim(),
        });
    }
    let at = sys.a().matrix().transpose();
    let a_shifts = shifts(&at, &coset_representatives(&at)?)?;
    let b_shifts = shifts(sys.b(), sys.digits())?;
    let mt = m_tilde(m, sys.a(), sys.power())?;
    let at_zero = m.eval(&vec![0.0; d]);
    let mut out = MdValidation {
        pass: false,
        at_zero,
        a_level_residual: 0.0,
        b_level_residual: 0.0,
        worst_xi: vec![0.0; d],
        tol,
        grid_n,
    };
    let mut worst = -1.0;
    for xi in cube_grid(d, grid_n)? {
        let ra = libm::fabs(coset_sum(m, &xi, &a_shifts) - 1.0);
        let rb = libm::fabs(coset_sum(&mt, &xi, &b_shifts) - 1.0);
        out.a_level_residual = out.a_level_residual.max(ra);
        out.b_level_residual = out.b_level_residual.max(rb);
        if ra.max(rb) > worst {
            worst = ra.max(rb);
            out.worst_xi = xi;
        }
    }
    out.pass = libm::fabs(at_zero - 1.0) <= tol
        && out.a_level_residual <= tol
        && out.b_level_residual <= tol;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::digits::build_digit_system;
    use super::super::matrix::analyze_matrix;
    use super::*;
    use crate::filter::{FilterKind, PeriodicFilter};

    struct Constant(usize, f64);
    impl LatticeFilter for Constant {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval(&self, _: &[f64]) -> f64 {
            self.1
        }
    }

    fn mat(rows: &[&[i64]]) -> LatticeMatrix {
        analyze_matrix(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn scalar_reduction_matches_haar() {
        let a = mat(&[&[2]]);
        let f = DigitAverageFilter::for_matrix(&a).unwrap();
        let h = PeriodicFilter::builtin(FilterKind::Haar).unwrap();
        for i in 0..100 {
            let x = i as f64 / 37.0 - 1.3;
            assert!((f.eval(&[x]) - h.evaluate(x)).abs() < 1e-14);
        }
        let sys = build_digit_system(&a).unwrap();
        let v = multidim_qmf_check(&f, &sys, 256, 1e-12).unwrap();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn separable_haar_for_two_i() {
        let a = mat(&[&[2, 0], &[0, 2]]);
        let f = DigitAverageFilter::for_matrix(&a).unwrap();
        let h = PeriodicFilter::builtin(FilterKind::Haar).unwrap();
        let s = SeparableFilter::new(vec![h.clone(), h]).unwrap();
        for xi in cube_grid(2, 9).unwrap() {
            assert!((f.eval(&xi) - s.eval(&xi)).abs() < 1e-14);
        }
        let sys = build_digit_system(&a).unwrap();
        assert!(multidim_qmf_check(&s, &sys, 32, 1e-12).unwrap().pass);
    }

    #[test]
    fn quincunx_digit_average_passes_separable_fails() {
        let a = mat(&[&[1, 1], &[-1, 1]]);
        let sys = build_digit_system(&a).unwrap();
        let f = DigitAverageFilter::for_matrix(&a).unwrap();
        assert!(multidim_qmf_check(&f, &sys, 32, 1e-12).unwrap().pass);
        let h = PeriodicFilter::builtin(FilterKind::Haar).unwrap();
        let s = SeparableFilter::new(vec![h.clone(), h]).unwrap();
        assert!(!multidim_qmf_check(&s, &sys, 32, 1e-6).unwrap().pass);
    }

    #[test]
    fn constant_fails_at_zero() {
        let a = mat(&[&[2]]);
        let sys = build_digit_system(&a).unwrap();
        let v = multidim_qmf_check(&Constant(1, 0.5), &sys, 16, 1e-12).unwrap();
        assert!(v.a_level_residual < 1e-15);
        assert!(!v.pass);
        assert_eq!(v.at_zero, 0.5);
    }

    #[test]
    fn m_tilde_two_step_haar() {
        let a = mat(&[&[2]]);
        let h = PeriodicFilter::builtin(FilterKind::Haar).unwrap();
        let s = SeparableFilter::new(vec![h.clone()]).unwrap();
        let mt = m_tilde(&s, &a, 2).unwrap();
        let m1 = m_tilde(&s, &a, 1).unwrap();
        for i in 0..50 {
            let x = i as f64 * 0.0731 - 0.9;
            let c1 = libm::cos(PI * x);
            let c2 = libm::cos(2.0 * PI * x);
            assert!((mt.eval(&[x]) - c1 * c1 * c2 * c2).abs() < 1e-14);
            assert_eq!(m1.eval(&[x]), s.eval(&[x - libm::round(x)]));
        }
    }
}
