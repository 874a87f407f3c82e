//! Partial-product measures on the signed dyadic integers.
//!
//! For a frequency `ξ` and level `N`:
//!
//! - `Q_ξ^N(k) = ∏_{j=1}^N M((ξ+k)/2^j)` for `0 ≤ k < 2^N`,
//! - `Q̃_η^N(ℓ) = ∏_{j=1}^N M̃((η+ℓ)/2^j)` with `M̃(ξ) = M(−ξ)`,
//! - `P_ξ^N(k) = Q_ξ^{N+1}(k)` for `0 ≤ k < 2^N` and `Q̃_{1−ξ}^{N+1}(−(k+1))` for
//!   `−2^N ≤ k < 0`.
//!
//! Both branches equal `∏_{j=1}^{N+1} M((ξ+k)/2^j)`, so a table is the set of
//! leaf products of a binary tree of depth `N+1` whose level-`m` edges carry
//! the factors `M((ξ+r)/2^m)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::msb_index;
use crate::error::{Error, Result};
use crate::filter::{validate_qmf, UnitFilter};
use crate::numeric::{sum, NeumaierSum, Product, ProductMode};
use crate::phase::Phase;

/// Largest level for which a dense table is built.
pub const TABLE_LEVEL_CAP: u32 = 24;
/// QMF residual above which table construction is refused.
pub const QMF_GATE_TOL: f64 = 1e-9;
/// Grid used by the QMF gate.
pub const QMF_GATE_GRID: usize = 1024;

fn check_range(k: i64, lo: i64, hi: i64) -> Result<()> {
    if k < lo || k >= hi {
        Err(Error::OutOfRange { k, lo, hi })
    } else {
        Ok(())
    }
}

fn level_bound(n: u32) -> Result<i64> {
    if n > 62 {
        return Err(Error::LevelCap { level: n, cap: 62 });
    }
    Ok(1i64 << n)
}

/// `Q_ξ^N(k)` for `0 ≤ k < 2^N`.
pub fn q_mass<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    n: u32,
    k: i64,
    mode: ProductMode,
) -> Result<f64> {
    check_range(k, 0, level_bound(n)?)?;
    Ok(crate::numeric::product(
        (1..=n).map(|j| filter.eval_point(&xi.orbit(k as i128, j))),
        mode,
    ))
}

/// `Q̃_η^N(ℓ)` for `0 ≤ ℓ < 2^N`; `η` may be `1` (see [`Phase::one_minus`]).
pub fn reflected_q_mass<F: UnitFilter + ?Sized>(
    filter: &F,
    eta: &Phase,
    n: u32,
    l: i64,
    mode: ProductMode,
) -> Result<f64> {
    check_range(l, 0, level_bound(n)?)?;
    Ok(crate::numeric::product(
        (1..=n).map(|j| filter.eval_point(&eta.reflected_orbit(l as i128, j))),
        mode,
    ))
}

/// `P_ξ^N(k)` for a single `k ∈ [−2^N, 2^N)`, assembled from the two branches.
pub fn p_mass<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    n: u32,
    k: i64,
    mode: ProductMode,
) -> Result<f64> {
    let b = level_bound(n)?;
    check_range(k, -b, b)?;
    if k >= 0 {
        q_mass(filter, xi, n + 1, k, mode)
    } else {
        reflected_q_mass(filter, &xi.one_minus(), n + 1, -(k + 1), mode)
    }
}

/// Fail unless the filter satisfies the QMF identity at [`QMF_GATE_TOL`].
pub fn qmf_gate<F: UnitFilter + ?Sized>(filter: &F) -> Result<()> {
    let out = validate_qmf(filter, QMF_GATE_GRID, QMF_GATE_TOL)?;
    if out.pass {
        Ok(())
    } else {
        Err(Error::QmfViolation {
            xi: out.worst_xi,
            residual: out.worst_residual,
        })
    }
}

/// The family `{P_ξ^N(k) : −2^N ≤ k < 2^N}` for one `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasureTable {
    xi: Phase,
    level: u32,
    mode: ProductMode,
    masses: Vec<f64>,
}

impl ProductMeasureTable {
    pub fn xi(&self) -> Phase {
        self.xi
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mode(&self) -> ProductMode {
        self.mode
    }

    pub fn log_space(&self) -> bool {
        self.mode == ProductMode::LogSum
    }

    fn half(&self) -> i64 {
        1i64 << self.level
    }

    /// Masses ordered by `k = −2^N, …, 2^N − 1`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        let h = self.half();
        if k < -h || k >= h {
            None
        } else {
            Some(self.masses[(k + h) as usize])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let h = self.half();
        self.masses.iter().enumerate().map(move |(i, &m)| (i as i64 - h, m))
    }

    pub fn total(&self) -> f64 {
        sum(self.masses.iter().copied())
    }

    /// `Σ P_ξ^N(k)` over `msb_index(k) ≥ n`.
    pub fn tail_mass(&self, n: u32) -> f64 {
        if n == 0 {
            return self.total();
        }
        if n > self.level {
            return 0.0;
        }
        // msb_index(k) ≥ n  ⇔  k ∉ [−2^{n−1}, 2^{n−1})
        let h = self.half();
        let inner = 1i64 << (n - 1);
        let mut acc = NeumaierSum::new();
        for (k, m) in self.iter() {
            if k < -inner || k >= inner {
                acc.add(m);
            }
        }
        debug_assert!(self.iter().all(|(k, _)| k >= -h && k < h));
        acc.value()
    }

    /// `n ↦ tail_mass(n)` for `n = 1..=N+1`, one pass.
    pub fn tail_curve(&self) -> Vec<f64> {
        let mut by_msb = vec![NeumaierSum::new(); self.level as usize + 1];
        for (k, m) in self.iter() {
            by_msb[msb_index(k) as usize].add(m);
        }
        let mut out = vec![0.0; self.level as usize + 1];
        let mut acc = NeumaierSum::new();
        for n in (1..=self.level as usize).rev() {
            acc.add(by_msb[n].value());
            out[n - 1] = acc.value();
        }
        out
    }

    /// `Σ_{|k| ≤ K} P_ξ^N(k)`.
    pub fn retained(&self, big_k: i64) -> f64 {
        let mut acc = NeumaierSum::new();
        for (k, m) in self.iter() {
            if k.unsigned_abs() <= big_k.unsigned_abs() {
                acc.add(m);
            }
        }
        acc.value()
    }

    /// Largest mass and its location (smallest `|k|` on ties).
    pub fn argmax(&self) -> (i64, f64) {
        let mut best = (0i64, f64::NEG_INFINITY);
        for (k, m) in self.iter() {
            if m > best.1 || (m == best.1 && k.unsigned_abs() < best.0.unsigned_abs()) {
                best = (k, m);
            }
        }
        best
    }
}

/// Build `P_ξ^N` after checking the QMF identity.
pub fn p_table<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    n: u32,
    mode: ProductMode,
) -> Result<ProductMeasureTable> {
    qmf_gate(filter)?;
    p_table_unchecked(filter, xi, n, mode)
}

/// Build `P_ξ^N` without the QMF gate.
pub fn p_table_unchecked<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    n: u32,
    mode: ProductMode,
) -> Result<ProductMeasureTable> {
    if n > TABLE_LEVEL_CAP {
        return Err(Error::LevelCap {
            level: n,
            cap: TABLE_LEVEL_CAP,
        });
    }
    let depth = n + 1;
    let size = 1usize << depth;
    let mut masses = vec![0.0; size];
    let mut walk = TreeWalk {
        filter,
        xi,
        depth,
        half: 1usize << n,
        masses: &mut masses,
    };
    walk.descend(0, 0, Product::new(mode));
    Ok(ProductMeasureTable {
        xi: *xi,
        level: n,
        mode,
        masses,
    })
}

struct TreeWalk<'a, F: ?Sized> {
    filter: &'a F,
    xi: &'a Phase,
    depth: u32,
    half: usize,
    masses: &'a mut [f64],
}

impl<F: UnitFilter + ?Sized> TreeWalk<'_, F> {
    /// `r` holds the low `m` bits of `k mod 2^{N+1}`; `acc` the first `m` factors.
    fn descend(&mut self, m: u32, r: usize, acc: Product) {
        if acc.is_zero() {
            return;
        }
        if m == self.depth {
            let idx = (r + self.half) & (2 * self.half - 1);
            self.masses[idx] = acc.value();
            return;
        }
        for bit in 0..2 {
            let r2 = r | (bit << m);
            let mut next = acc;
            next.mul(self.filter.eval_point(&self.xi.orbit(r2 as i128, m + 1)));
            self.descend(m + 1, r2, next);
        }
    }
}

/// Truncated infinite product `P_ξ(k) = ∏_{j≥1} M((ξ+k)/2^j) = |φ̂(ξ+k)|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitMassEstimate {
    pub k: i64,
    pub value: f64,
    pub truncation_level: u32,
    /// The last `⌈J/4⌉` factors multiply to at least `1 − tol`, or the value is 0.
    pub converged: bool,
}

/// `P_ξ(k)` truncated after `j_max` factors.
pub fn limit_mass<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    k: i64,
    j_max: u32,
    tol: f64,
    mode: ProductMode,
) -> Result<LimitMassEstimate> {
    if j_max == 0 {
        return Err(Error::InvalidParameter("J_max must be at least 1".into()));
    }
    let block = j_max.div_ceil(4);
    let mut head = Product::new(mode);
    let mut last = Product::new(mode);
    for j in 1..=j_max {
        let f = filter.eval_point(&xi.orbit(k as i128, j));
        if j <= j_max - block {
            head.mul(f);
        } else {
            last.mul(f);
        }
        if head.is_zero() || last.is_zero() {
            return Ok(LimitMassEstimate {
                k,
                value: 0.0,
                truncation_level: j_max,
                converged: true,
            });
        }
    }
    let mut total = head;
    total.mul(last.value());
    Ok(LimitMassEstimate {
        k,
        value: total.value(),
        truncation_level: j_max,
        converged: last.value() >= 1.0 - tol,
    })
}

/// Partial products `j ↦ ∏_{i ≤ j} M((ξ+k)/2^i)` for `j = 1..=j_max`.
pub fn partial_products<F: UnitFilter + ?Sized>(
    filter: &F,
    xi: &Phase,
    k: i64,
    j_max: u32,
    mode: ProductMode,
) -> Vec<f64> {
    let mut acc = Product::new(mode);
    (1..=j_max)
        .map(|j| {
            acc.mul(filter.eval_point(&xi.orbit(k as i128, j)));
            acc.value()
        })
        .collect()
}

/// `|φ̂(x)|² ≈ ∏_{j=1}^J M(x/2^j)` at a real point.
pub fn phi_hat_sq<F: UnitFilter + ?Sized>(filter: &F, x: f64, j_max: u32, mode: ProductMode) -> f64 {
    crate::numeric::product(
        (1..=j_max).map(|j| filter.evaluate(libm::scalbn(x, -(j as i32)))),
        mode,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{FilterKind, PeriodicFilter};

    fn f(kind: FilterKind) -> PeriodicFilter {
        PeriodicFilter::builtin(kind).unwrap()
    }

    fn ph(num: i128, den: i128) -> Phase {
        Phase::new(num, den).unwrap()
    }

    const MODE: ProductMode = ProductMode::Compensated;

    #[test]
    fn q_examples() {
        let haar = f(FilterKind::Haar);
        assert_eq!(q_mass(&haar, &Phase::ZERO, 10, 0, MODE).unwrap(), 1.0);
        let sh = f(FilterKind::Shannon);
        assert_eq!(q_mass(&sh, &ph(3, 10), 4, 0, MODE).unwrap(), 1.0);
        let expect = (2.0 / core::f64::consts::PI).powi(2);
        assert!((q_mass(&haar, &ph(1, 2), 30, 0, MODE).unwrap() - expect).abs() < 1e-8);
        assert!(q_mass(&haar, &ph(1, 2), 3, 8, MODE).is_err());
        assert!(q_mass(&haar, &ph(1, 2), 3, -1, MODE).is_err());
    }

    #[test]
    fn reflected_examples() {
        let sh = f(FilterKind::Shannon);
        assert_eq!(reflected_q_mass(&sh, &Phase::ZERO, 5, 0, MODE).unwrap(), 1.0);
        assert_eq!(reflected_q_mass(&sh, &ph(3, 10), 3, 0, MODE).unwrap(), 1.0);
        let haar = f(FilterKind::Haar);
        let expect = (2.0 / core::f64::consts::PI).powi(2);
        let v = reflected_q_mass(&haar, &ph(1, 2), 30, 0, MODE).unwrap();
        assert!((v - expect).abs() < 1e-8);
    }

    #[test]
    fn table_matches_branchwise_products() {
        for kind in FilterKind::BUILTIN {
            let filt = f(kind);
            for xi in [ph(0, 1), ph(1, 3), ph(3, 10), ph(7, 10), ph(5, 8)] {
                let t = p_table(&filt, &xi, 6, MODE).unwrap();
                for (k, m) in t.iter() {
                    let direct = p_mass(&filt, &xi, 6, k, MODE).unwrap();
                    assert!((m - direct).abs() <= 1e-15, "{kind} {xi} {k}: {m} vs {direct}");
                }
                assert!((t.total() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shannon_point_masses() {
        let sh = f(FilterKind::Shannon);
        let t = p_table(&sh, &ph(3, 10), 6, MODE).unwrap();
        assert_eq!(t.get(0), Some(1.0));
        assert_eq!(t.total(), 1.0);
        let t = p_table(&sh, &ph(7, 10), 6, MODE).unwrap();
        assert_eq!(t.get(-1), Some(1.0));
        assert_eq!(t.total(), 1.0);
        let t = p_table(&sh, &ph(3, 10), 8, MODE).unwrap();
        assert_eq!(t.tail_mass(1), 0.0);
    }

    #[test]
    fn tail_queries() {
        let haar = f(FilterKind::Haar);
        let t = p_table(&haar, &ph(1, 4), 10, MODE).unwrap();
        let curve = t.tail_curve();
        for n in 1..=11u32 {
            assert!((curve[n as usize - 1] - t.tail_mass(n)).abs() < 1e-15);
        }
        assert_eq!(t.tail_mass(11), 0.0);
        assert_eq!(t.tail_mass(40), 0.0);
        assert!(curve.windows(2).all(|w| w[0] >= w[1]));
        assert!((t.retained(1 << 11) - t.total()).abs() < 1e-15);
        assert_eq!(t.argmax().0, 0);
    }

    #[test]
    fn gate_rejects_non_qmf() {
        let s = PeriodicFilter::sampled(alloc::vec![1.0, 0.9, 0.2, 0.4], false).unwrap();
        assert!(matches!(
            p_table(&s, &Phase::ZERO, 3, MODE),
            Err(Error::QmfViolation { .. })
        ));
        assert!(matches!(
            p_table(&f(FilterKind::Haar), &Phase::ZERO, 25, MODE),
            Err(Error::LevelCap { .. })
        ));
    }

    #[test]
    fn limits() {
        let haar = f(FilterKind::Haar);
        let e = limit_mass(&haar, &ph(1, 2), 0, 60, 1e-12, MODE).unwrap();
        assert!((e.value - (2.0 / core::f64::consts::PI).powi(2)).abs() < 1e-12);
        assert!(e.converged);
        assert_eq!(limit_mass(&haar, &Phase::ZERO, 0, 5, 0.0, MODE).unwrap().value, 1.0);
        let cusp = f(FilterKind::CuspCounterexample);
        let e = limit_mass(&cusp, &ph(1, 3), 0, 1000, 1e-6, MODE).unwrap();
        assert_eq!(e.value, 0.0);
        let pp = partial_products(&haar, &ph(3, 10), 2, 40, MODE);
        assert!(pp.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn phi_hat_shapes() {
        let sh = f(FilterKind::Shannon);
        assert_eq!(phi_hat_sq(&sh, 0.3, 40, MODE), 1.0);
        assert_eq!(phi_hat_sq(&sh, -0.5, 40, MODE), 1.0);
        assert_eq!(phi_hat_sq(&sh, 0.5, 40, MODE), 0.0);
        let pal = f(FilterKind::Paluszynski);
        assert_eq!(phi_hat_sq(&pal, 0.7, 40, MODE), 1.0);
        assert_eq!(phi_hat_sq(&pal, -0.1, 40, MODE), 0.0);
    }
}
