//! Digit systems: coset representatives of `Z^d / B(Z^d)` and base-`B` expansions.

use alloc::vec;
use alloc::vec::Vec;

use super::matrix::{choose_power, IntMatrix, LatticeMatrix};
use crate::error::{Error, Result};

pub const EXPANSION_CAP: usize = 1000;

/// Exact test `C^{-1} x ∈ (−½, ½]^d` given `adj(C)` and `det(C)`.
fn in_half_open_box(adj: &IntMatrix, det: i128, x: &[i128]) -> Result<bool> {
    let y = adj.apply_wide(x)?;
    let s = det.signum();
    let a = det.abs();
    Ok(y.iter().all(|&yi| {
        let t = 2 * s * yi;
        -a < t && t <= a
    }))
}

/// `Z^d ∩ C((−½, ½]^d)`, a complete residue system of `Z^d / C(Z^d)`, sorted.
pub fn coset_representatives(c: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let d = c.dim();
    let det = c.det();
    if det == 0 {
        return Err(Error::Singular);
    }
    let adj = c.adjugate()?;
    let half: Vec<i64> = (0..d)
        .map(|i| (0..d).map(|j| c.get(i, j).abs()).sum::<i64>() / 2 + 1)
        .collect();
    let total: u128 = half.iter().map(|&h| (2 * h + 1) as u128).product();
    if total > super::EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget: super::EXHAUSTIVE_BUDGET,
        });
    }
    let mut out = Vec::new();
    let mut x: Vec<i64> = half.iter().map(|h| -h).collect();
    loop {
        let wide: Vec<i128> = x.iter().map(|&v| v as i128).collect();
        if in_half_open_box(&adj, det, &wide)? {
            out.push(x.clone());
        }
        // odometer
        let mut i = 0;
        loop {
            if i == d {
                out.sort();
                let expected = det.unsigned_abs() as usize;
                if out.len() != expected {
                    return Err(Error::DigitCount {
                        found: out.len(),
                        expected,
                    });
                }
                return Ok(out);
            }
            if x[i] < half[i] {
                x[i] += 1;
                break;
            }
            x[i] = -half[i];
            i += 1;
        }
    }
}

/// `B = (A^T)^p` with the digits `Z^d ∩ B((−½, ½]^d)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DigitSystem {
    a: LatticeMatrix,
    b: IntMatrix,
    p: u32,
    digits: Vec<Vec<i64>>,
    lambda: f64,
    adj: IntMatrix,
    det: i128,
    b_inv: Vec<f64>,
    /// `(adj(B) r mod |det B|, digit index)`, sorted by key.
    keys: Vec<(Vec<i128>, usize)>,
}

pub fn build_digit_system(a: &LatticeMatrix) -> Result<DigitSystem> {
    let p = choose_power(a)?;
    digit_system_with_power(a, p)
}

/// Digit system for an explicit power; the expansion guarantee needs
/// `|λ|^p > 1 + √d`, which [`build_digit_system`] picks automatically.
pub fn digit_system_with_power(a: &LatticeMatrix, p: u32) -> Result<DigitSystem> {
    a.require_expansive_similarity()?;
    if p == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    let b = a.matrix().transpose().pow(p)?;
    let det = b.det();
    let adj = b.adjugate()?;
    let digits = coset_representatives(&b)?;
    let modulus = det.abs();
    let mut keys = Vec::with_capacity(digits.len());
    for (i, r) in digits.iter().enumerate() {
        let wide: Vec<i128> = r.iter().map(|&v| v as i128).collect();
        let key: Vec<i128> = adj.apply_wide(&wide)?.iter().map(|v| v.rem_euclid(modulus)).collect();
        keys.push((key, i));
    }
    keys.sort();
    for w in keys.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::CongruentDigits(w[0].1, w[1].1));
        }
    }
    Ok(DigitSystem {
        lambda: libm::pow(a.lambda(), p as f64),
        b_inv: b.inverse_f64()?,
        a: a.clone(),
        b,
        p,
        digits,
        adj,
        det,
        keys,
    })
}

/// `k = Σ_j B^j r_{i_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeExpansion {
    pub k: Vec<i64>,
    pub digit_indices: Vec<usize>,
    pub n: usize,
}

impl DigitSystem {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn a(&self) -> &LatticeMatrix {
        &self.a
    }

    pub fn b(&self) -> &IntMatrix {
        &self.b
    }

    pub fn power(&self) -> u32 {
        self.p
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }

    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    /// Eigenvalue modulus of `B`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn det(&self) -> i128 {
        self.det
    }

    pub fn zero_digit(&self) -> usize {
        self.digits
            .iter()
            .position(|r| r.iter().all(|&v| v == 0))
            .expect("zero is always a digit")
    }

    /// Apply `B^{-1}` in floating point.
    pub fn b_inv_apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            out[i] = (0..d).map(|j| self.b_inv[i * d + j] * x[j]).sum();
        }
    }

    /// Radius `(√d/2)·|λ|/(|λ| − 1)` of a ball holding the tile.
    pub fn tile_radius(&self) -> f64 {
        libm::sqrt(self.dim() as f64) / 2.0 * self.lambda / (self.lambda - 1.0)
    }

    /// Index of the digit congruent to `k` modulo `B(Z^d)`.
    pub fn digit_of(&self, k: &[i128]) -> Result<usize> {
        let m = self.det.abs();
        let key: Vec<i128> = self.adj.apply_wide(k)?.iter().map(|v| v.rem_euclid(m)).collect();
        let pos = self
            .keys
            .binary_search_by(|(kk, _)| kk.cmp(&key))
            .map_err(|_| Error::DigitCount {
                found: self.digits.len(),
                expected: self.det.unsigned_abs() as usize,
            })?;
        Ok(self.keys[pos].1)
    }

    pub fn expand(&self, k: &[i64]) -> Result<LatticeExpansion> {
        if k.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: k.len(),
            });
        }
        let mut cur: Vec<i128> = k.iter().map(|&v| v as i128).collect();
        let mut digit_indices = Vec::new();
        while cur.iter().any(|&v| v != 0) {
            if digit_indices.len() >= EXPANSION_CAP {
                return Err(Error::ExpansionDiverged(EXPANSION_CAP));
            }
            let i = self.digit_of(&cur)?;
            for (c, r) in cur.iter_mut().zip(&self.digits[i]) {
                *c -= *r as i128;
            }
            cur = self
                .adj
                .apply_wide(&cur)?
                .into_iter()
                .map(|v| {
                    debug_assert_eq!(v % self.det, 0);
                    v / self.det
                })
                .collect();
            digit_indices.push(i);
        }
        Ok(LatticeExpansion {
            k: k.to_vec(),
            n: digit_indices.len(),
            digit_indices,
        })
    }

    /// `Σ_j B^j r_{i_j}` evaluated by Horner's rule.
    pub fn reconstruct(&self, digit_indices: &[usize]) -> Result<Vec<i64>> {
        let mut acc = vec![0i64; self.dim()];
        for &i in digit_indices.iter().rev() {
            acc = self.b.apply(&acc)?;
            for (a, r) in acc.iter_mut().zip(&self.digits[i]) {
                *a = a.checked_add(*r).ok_or(Error::Overflow)?;
            }
        }
        Ok(acc)
    }

    /// `B^j` for `j = 0..n`.
    pub fn b_powers(&self, n: usize) -> Result<Vec<IntMatrix>> {
        let mut out = Vec::with_capacity(n);
        if n > 0 {
            out.push(IntMatrix::identity(self.dim())?);
        }
        while out.len() < n {
            let next = out[out.len() - 1].mul(&self.b)?;
            out.push(next);
        }
        Ok(out)
    }
}
