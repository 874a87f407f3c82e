//! Small integer matrices acting on `Z^d`, `d ≤ 3`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;
/// Relative spread of eigenvalue moduli still accepted as a similarity.
pub const SIMILARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntMatrix {
    d: usize,
    /// Row-major.
    entries: Vec<i64>,
}

fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow)
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::DimensionCap(d));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare);
        }
        Ok(Self {
            d,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::DimensionCap(d));
        }
        let mut entries = vec![0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        Ok(Self { d, entries })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.d).map(<[i64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j);
            }
        }
        Self { d, entries }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.d;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                let s: i128 = (0..d)
                    .map(|l| self.get(i, l) as i128 * other.get(l, j) as i128)
                    .sum();
                entries[i * d + j] = narrow(s)?;
            }
        }
        Ok(Self { d, entries })
    }

    pub fn pow(&self, p: u32) -> Result<Self> {
        let mut out = Self::identity(self.d)?;
        for _ in 0..p {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn det(&self) -> i128 {
        let g = |i: usize, j: usize| self.get(i, j) as i128;
        match self.d {
            1 => g(0, 0),
            2 => g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0),
            _ => {
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                    - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
        }
    }

    /// `adj(A)` with `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> Result<Self> {
        let d = self.d;
        let g = |i: usize, j: usize| self.get(i, j) as i128;
        let mut entries = vec![0; d * d];
        match d {
            1 => entries[0] = 1,
            2 => {
                entries[0] = narrow(g(1, 1))?;
                entries[1] = narrow(-g(0, 1))?;
                entries[2] = narrow(-g(1, 0))?;
                entries[3] = narrow(g(0, 0))?;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        // cofactor C_ji
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        entries[i * 3 + j] = narrow(g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0))?;
                    }
                }
            }
        }
        Ok(Self { d, entries })
    }

    pub fn apply(&self, x: &[i64]) -> Result<Vec<i64>> {
        self.apply_wide(&x.iter().map(|&v| v as i128).collect::<Vec<_>>())?
            .into_iter()
            .map(narrow)
            .collect()
    }

    pub fn apply_wide(&self, x: &[i128]) -> Result<Vec<i128>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        (0..self.d)
            .map(|i| {
                (0..self.d).try_fold(0i128, |acc, j| {
                    (self.get(i, j) as i128)
                        .checked_mul(x[j])
                        .and_then(|v| acc.checked_add(v))
                        .ok_or(Error::Overflow)
                })
            })
            .collect()
    }

    /// Entries of `A^{-1}` as floats, row-major.
    pub fn inverse_f64(&self) -> Result<Vec<f64>> {
        let det = self.det();
        if det == 0 {
            return Err(Error::Singular);
        }
        let adj = self.adjugate()?;
        Ok(adj.entries.iter().map(|&a| a as f64 / det as f64).collect())
    }

    /// Eigenvalue moduli in ascending order.
    pub fn eigen_moduli(&self) -> Vec<f64> {
        let g = |i: usize, j: usize| self.get(i, j) as f64;
        let mut out = match self.d {
            1 => vec![libm::fabs(g(0, 0))],
            2 => {
                let tr = (self.get(0, 0) as i128) + self.get(1, 1) as i128;
                let det = self.det();
                let disc = tr * tr - 4 * det;
                if disc < 0 {
                    let m = libm::sqrt(det as f64);
                    vec![m, m]
                } else {
                    let s = libm::sqrt(disc as f64);
                    let big = (libm::fabs(tr as f64) + s) / 2.0;
                    let small = if big == 0.0 { 0.0 } else { libm::fabs(det as f64) / big };
                    vec![small, big]
                }
            }
            _ => {
                let tr = g(0, 0) + g(1, 1) + g(2, 2);
                let minors = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) + g(0, 0) * g(2, 2)
                    - g(0, 2) * g(2, 0)
                    + g(1, 1) * g(2, 2)
                    - g(1, 2) * g(2, 1);
                let det = self.det() as f64;
                cubic_moduli(-tr, minors, -det)
            }
        };
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Root moduli of `λ³ + aλ² + bλ + c`.
fn cubic_moduli(a: f64, b: f64, c: f64) -> Vec<f64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let t = if disc > 0.0 {
        let s = libm::sqrt(disc);
        libm::cbrt(-q / 2.0 + s) + libm::cbrt(-q / 2.0 - s)
    } else if p == 0.0 {
        0.0
    } else {
        let m = 2.0 * libm::sqrt(-p / 3.0);
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        m * libm::cos(libm::acos(arg) / 3.0)
    };
    let mut r = t - a / 3.0;
    for _ in 0..4 {
        let f = ((r + a) * r + b) * r + c;
        let df = (3.0 * r + 2.0 * a) * r + b;
        if df == 0.0 {
            break;
        }
        r -= f / df;
    }
    // deflate by (λ − r)
    let qb = r + a;
    let qc = if r == 0.0 { b } else { -c / r };
    let qdisc = qb * qb - 4.0 * qc;
    let mut out = vec![libm::fabs(r)];
    if qdisc < 0.0 {
        let m = libm::sqrt(libm::fabs(qc));
        out.extend([m, m]);
    } else {
        let s = libm::sqrt(qdisc);
        let big = (libm::fabs(qb) + s) / 2.0;
        let small = if big == 0.0 { 0.0 } else { libm::fabs(qc) / big };
        out.extend([small, big]);
    }
    out
}

/// An integer matrix with its determinant and eigenvalue moduli.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeMatrix {
    matrix: IntMatrix,
    det: i128,
    moduli: Vec<f64>,
}

pub fn analyze_matrix(rows: &[Vec<i64>]) -> Result<LatticeMatrix> {
    let matrix = IntMatrix::from_rows(rows)?;
    let det = matrix.det();
    if det == 0 {
        return Err(Error::Singular);
    }
    let moduli = matrix.eigen_moduli();
    Ok(LatticeMatrix { matrix, det, moduli })
}

impl LatticeMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn det(&self) -> i128 {
        self.det
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn min_modulus(&self) -> f64 {
        self.moduli[0]
    }

    pub fn max_modulus(&self) -> f64 {
        self.moduli[self.moduli.len() - 1]
    }

    pub fn is_expansive(&self) -> bool {
        self.min_modulus() > 1.0 + SIMILARITY_TOL
    }

    pub fn is_similarity(&self) -> bool {
        self.max_modulus() - self.min_modulus() <= SIMILARITY_TOL * self.max_modulus()
    }

    /// Common eigenvalue modulus `|det|^{1/d}` of a similarity.
    pub fn lambda(&self) -> f64 {
        libm::pow(self.det.unsigned_abs() as f64, 1.0 / self.dim() as f64)
    }

    pub fn require_expansive_similarity(&self) -> Result<()> {
        if !self.is_similarity() {
            return Err(Error::NotSimilarity {
                min: self.min_modulus(),
                max: self.max_modulus(),
            });
        }
        if !self.is_expansive() {
            return Err(Error::NotExpansive(self.min_modulus()));
        }
        Ok(())
    }
}

/// Smallest `p` with `|λ|^p > 1 + √d`, decided exactly through `|λ|^d = |det|`.
pub fn choose_power(a: &LatticeMatrix) -> Result<u32> {
    a.require_expansive_similarity()?;
    let det = a.det().unsigned_abs();
    // |det|^p > (1 + √d)^d  ⇔  |det|^p − u > v√d  with (1 + √d)^d = u + v√d
    let (u, v, d): (u128, u128, u128) = match a.dim() {
        1 => (2, 0, 1),
        2 => (3, 2, 2),
        _ => (10, 6, 3),
    };
    let mut pow: u128 = 1;
    for p in 1..=128u32 {
        pow = pow.checked_mul(det).ok_or(Error::Overflow)?;
        if pow > u {
            let lhs = pow - u;
            let passes = match lhs.checked_mul(lhs) {
                Some(sq) => sq > v * v * d,
                None => true,
            };
            if passes {
                return Ok(p);
            }
        }
    }
    Err(Error::Overflow)
}
