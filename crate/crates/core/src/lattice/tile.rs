//! Point clouds of the self-affine tile `T = {Σ_{j≥1} B^{-j} r_{i_j}}` and
//! Monte Carlo estimates of its measure.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::digits::DigitSystem;
use super::EXHAUSTIVE_BUDGET;
use crate::error::{Error, Result};

/// Points per independent random stream.
const STREAM_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TileMode {
    Exhaustive,
    MonteCarlo { count: usize, seed: u64 },
}

/// Depth-`J` partial sums `Σ_{j=1}^J B^{-j} r_{i_j}`, stored flat.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TileSample {
    pub dim: usize,
    pub depth: u32,
    pub mode: TileMode,
    /// Eigenvalue modulus of `B`.
    pub lambda: f64,
    /// Radius of a ball around the origin holding `T`.
    pub radius: f64,
    pub coords: Vec<f64>,
}

impl TileSample {
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Componentwise `(min, max)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for i in 0..self.dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }

    pub fn max_norm(&self) -> f64 {
        self.points()
            .map(|p| libm::sqrt(p.iter().map(|x| x * x).sum()))
            .fold(0.0, f64::max)
    }

    /// Distance within which every tile point has a sample point.
    pub fn covering_radius(&self) -> f64 {
        self.radius * libm::pow(self.lambda, -(self.depth as f64))
    }
}

/// `B^{-j} r_i` for `j = 1..=depth`, indexed `[j−1][i]`.
fn scaled_digits(sys: &DigitSystem, depth: u32) -> Vec<Vec<[f64; 3]>> {
    let d = sys.dim();
    let mut cur: Vec<[f64; 3]> = sys
        .digits()
        .iter()
        .map(|r| {
            let mut v = [0.0; 3];
            for c in 0..d {
                v[c] = r[c] as f64;
            }
            v
        })
        .collect();
    let mut out = Vec::with_capacity(depth as usize);
    for _ in 0..depth {
        for v in cur.iter_mut() {
            let mut w = [0.0; 3];
            sys.b_inv_apply(&v[..d], &mut w[..d]);
            *v = w;
        }
        out.push(cur.clone());
    }
    out
}

pub fn sample_tile(sys: &DigitSystem, depth: u32, mode: TileMode) -> Result<TileSample> {
    let d = sys.dim();
    let table = scaled_digits(sys, depth);
    let q = sys.digit_count();
    let mut coords = Vec::new();
    if depth > 0 {
        match mode {
            TileMode::Exhaustive => {
                let needed = (q as u128).checked_pow(depth).unwrap_or(u128::MAX);
                if needed > EXHAUSTIVE_BUDGET {
                    return Err(Error::BudgetExceeded {
                        needed,
                        budget: EXHAUSTIVE_BUDGET,
                    });
                }
                coords.reserve(needed as usize * d);
                let mut idx = vec![0usize; depth as usize];
                loop {
                    let mut x = [0.0; 3];
                    for (j, &i) in idx.iter().enumerate() {
                        for c in 0..d {
                            x[c] += table[j][i][c];
                        }
                    }
                    coords.extend_from_slice(&x[..d]);
                    let mut j = 0;
                    while j < idx.len() {
                        idx[j] += 1;
                        if idx[j] < q {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == idx.len() {
                        break;
                    }
                }
            }
            TileMode::MonteCarlo { count, seed } => {
                coords.reserve(count * d);
                for chunk in 0..count.div_ceil(STREAM_CHUNK) {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(chunk as u64);
                    let n = STREAM_CHUNK.min(count - chunk * STREAM_CHUNK);
                    for _ in 0..n {
                        let mut x = [0.0; 3];
                        // deepest digits first so small terms are added first
                        for j in (0..depth as usize).rev() {
                            let i = rng.random_range(0..q);
                            for c in 0..d {
                                x[c] += table[j][i][c];
                            }
                        }
                        coords.extend_from_slice(&x[..d]);
                    }
                }
            }
        }
    }
    Ok(TileSample {
        dim: d,
        depth,
        mode,
        lambda: sys.lambda(),
        radius: sys.tile_radius(),
        coords,
    })
}

/// Points bucketed on a grid with cell size `h` for radius queries.
struct Buckets<'a> {
    dim: usize,
    h: f64,
    keys: Vec<([i64; 3], u32)>,
    coords: &'a [f64],
}

impl<'a> Buckets<'a> {
    fn new(sample: &'a TileSample, h: f64) -> Self {
        let dim = sample.dim;
        let mut keys: Vec<([i64; 3], u32)> = sample
            .points()
            .enumerate()
            .map(|(i, p)| (Self::key(dim, h, p), i as u32))
            .collect();
        keys.sort_unstable();
        Self {
            dim,
            h,
            keys,
            coords: &sample.coords,
        }
    }

    fn key(dim: usize, h: f64, p: &[f64]) -> [i64; 3] {
        let mut k = [0i64; 3];
        for c in 0..dim {
            k[c] = libm::floor(p[c] / h) as i64;
        }
        k
    }

    fn any_within(&self, x: &[f64], r: f64) -> bool {
        let base = Self::key(self.dim, self.h, x);
        let cells = 3usize.pow(self.dim as u32);
        for o in 0..cells {
            let mut k = base;
            let mut rem = o;
            for c in 0..self.dim {
                k[c] += (rem % 3) as i64 - 1;
                rem /= 3;
            }
            let start = self.keys.partition_point(|e| e.0 < k);
            for e in self.keys[start..].iter().take_while(|e| e.0 == k) {
                let p = &self.coords[e.1 as usize * self.dim..][..self.dim];
                let dist2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist2 <= r * r {
                    return true;
                }
            }
        }
        false
    }
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => core::f64::consts::PI,
        _ => 4.0 / 3.0 * core::f64::consts::PI,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TileMeasure {
    pub estimate: f64,
    pub std_error: f64,
    /// Neighbourhood radius used around sample points.
    pub radius: f64,
    pub trials: usize,
    pub warning: Option<String>,
}

/// Expected number of sample points per neighbourhood ball for random samples.
pub const MC_BALL_OCCUPANCY: f64 = 3.0;

fn uniform_in_box(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    for c in 0..lo.len() {
        out[c] = lo[c] + (hi[c] - lo[c]) * rng.random::<f64>();
    }
}

/// Measure of the union of radius-`r` balls around the sample points, by
/// uniform trials in the padded bounding box.
fn covered_volume(sample: &TileSample, r: f64, trials: usize, seed: u64) -> (f64, f64) {
    let d = sample.dim;
    let (mut lo, mut hi) = sample.bounds();
    for c in 0..d {
        lo[c] -= r;
        hi[c] += r;
    }
    let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let buckets = Buckets::new(sample, r);
    let mut hits = 0usize;
    let mut x = [0.0; 3];
    for chunk in 0..trials.div_ceil(STREAM_CHUNK) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        for _ in 0..STREAM_CHUNK.min(trials - chunk * STREAM_CHUNK) {
            uniform_in_box(&mut rng, &lo, &hi, &mut x[..d]);
            if buckets.any_within(&x[..d], r) {
                hits += 1;
            }
        }
    }
    let f = hits as f64 / trials as f64;
    (vol * f, vol * libm::sqrt(f * (1.0 - f) / trials as f64))
}

/// Lebesgue measure of the tile from a point cloud.
///
/// Exhaustive clouds use the covering radius `R|λ|^{-J}`. Random clouds also
/// need the typical spacing: the radius is chosen so each ball expects
/// [`MC_BALL_OCCUPANCY`] sample points (using a first-pass volume), and the
/// result is divided by the Poisson coverage `1 − e^{−occupancy}`.
pub fn tile_measure_estimate(sample: &TileSample, trials: usize, seed: u64) -> Result<TileMeasure> {
    if sample.is_empty() || sample.depth == 0 {
        return Ok(TileMeasure {
            estimate: 0.0,
            std_error: 0.0,
            radius: 0.0,
            trials: 0,
            warning: Some("depth 0 sample carries no tile information".into()),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let d = sample.dim;
    let cover = sample.covering_radius();
    let (estimate, std_error, radius) = match sample.mode {
        TileMode::Exhaustive => {
            let (v, se) = covered_volume(sample, cover, trials, seed);
            (v, se, cover)
        }
        TileMode::MonteCarlo { .. } => {
            let spacing = |vol: f64| {
                libm::pow(
                    MC_BALL_OCCUPANCY * vol / (sample.len() as f64 * unit_ball_volume(d)),
                    1.0 / d as f64,
                )
            };
            let (lo, hi) = sample.bounds();
            let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).max(cover)).product();
            let r0 = spacing(box_vol).max(cover);
            let (v0, _) = covered_volume(sample, r0, trials, seed);
            let r = spacing(v0.max(f64::MIN_POSITIVE)).max(cover);
            let (v, se) = covered_volume(sample, r, trials, seed ^ 0x9e37_79b9_7f4a_7c15);
            let occupancy = sample.len() as f64 * unit_ball_volume(d) * libm::pow(r, d as f64) / v.max(f64::MIN_POSITIVE);
            let coverage = 1.0 - libm::exp(-occupancy.min(MC_BALL_OCCUPANCY));
            (v / coverage, se / coverage, r)
        }
    };
    Ok(TileMeasure {
        estimate,
        std_error,
        radius,
        trials,
        warning: None,
    })
}

/// Measure of the depth-`depth` outer approximation
/// `⋃_{m ∈ Z_depth} B^{-depth}(m + ball)`, by exact digit expansion of nearby
/// lattice points. Independent of any point cloud.
pub fn tile_measure_by_membership(
    sys: &DigitSystem,
    depth: u32,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let d = sys.dim();
    let r = sys.tile_radius();
    let bj = sys.b().pow(depth)?;
    let half = r + 0.5;
    let vol = libm::pow(2.0 * half, d as f64);
    let lo = vec![-half; d];
    let hi = vec![half; d];
    let mut hits = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = [0.0; 3];
    let span = libm::ceil(r) as i64;
    for _ in 0..trials {
        uniform_in_box(&mut rng, &lo, &hi, &mut x[..d]);
        // y = B^depth x
        let mut y = [0.0; 3];
        for i in 0..d {
            y[i] = (0..d).map(|j| bj.get(i, j) as f64 * x[j]).sum();
        }
        let mut m = [0i64; 3];
        let cells = (2 * span as usize + 1).pow(d as u32);
        let mut hit = false;
        for o in 0..cells {
            let mut rem = o;
            let mut dist2 = 0.0;
            for c in 0..d {
                m[c] = libm::round(y[c]) as i64 + (rem % (2 * span as usize + 1)) as i64 - span;
                rem /= 2 * span as usize + 1;
                dist2 += (y[c] - m[c] as f64) * (y[c] - m[c] as f64);
            }
            if dist2 <= r * r && sys.expand(&m[..d])?.n <= depth as usize {
                hit = true;
                break;
            }
        }
        if hit {
            hits += 1;
        }
    }
    let f = hits as f64 / trials as f64;
    Ok((vol * f, vol * libm::sqrt(f * (1.0 - f) / trials as f64)))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TranslateOverlap {
    pub k: Vec<i64>,
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimated `|T ∩ (T + k)|` for every nonzero `k` with `‖k‖_∞ ≤ max_shift`
/// whose bounding boxes meet, using the same neighbourhoods as
/// [`tile_measure_estimate`].
pub fn translate_overlaps(
    sample: &TileSample,
    radius: f64,
    max_shift: i64,
    trials: usize,
    seed: u64,
) -> Result<Vec<TranslateOverlap>> {
    if sample.is_empty() || radius <= 0.0 || trials == 0 {
        return Err(Error::InvalidParameter("overlap needs a nonempty sample, radius and trials".into()));
    }
    let d = sample.dim;
    let (lo, hi) = sample.bounds();
    let buckets = Buckets::new(sample, radius);
    let side = (2 * max_shift + 1) as usize;
    let mut out = Vec::new();
    let mut x = [0.0; 3];
    let mut xs = [0.0; 3];
    for o in 0..side.pow(d as u32) {
        let mut rem = o;
        let k: Vec<i64> = (0..d)
            .map(|_| {
                let v = (rem % side) as i64 - max_shift;
                rem /= side;
                v
            })
            .collect();
        if k.iter().all(|&v| v == 0) {
            continue;
        }
        let blo: Vec<f64> = (0..d).map(|c| lo[c].max(lo[c] + k[c] as f64) - radius).collect();
        let bhi: Vec<f64> = (0..d).map(|c| hi[c].min(hi[c] + k[c] as f64) + radius).collect();
        if (0..d).any(|c| blo[c] >= bhi[c]) {
            continue;
        }
        let vol: f64 = blo.iter().zip(&bhi).map(|(a, b)| b - a).product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(o as u64);
        let mut hits = 0usize;
        for _ in 0..trials {
            uniform_in_box(&mut rng, &blo, &bhi, &mut x[..d]);
            for c in 0..d {
                xs[c] = x[c] - k[c] as f64;
            }
            if buckets.any_within(&x[..d], radius) && buckets.any_within(&xs[..d], radius) {
                hits += 1;
            }
        }
        let f = hits as f64 / trials as f64;
        out.push(TranslateOverlap {
            k,
            estimate: vol * f,
            std_error: vol * libm::sqrt(f * (1.0 - f) / trials as f64),
        });
    }
    Ok(out)
}
