//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//!
//! Runs without the libtest harness so every line is printed even when a
//! criterion fails; the process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use lowpass_core::diagnostics::{
    condition_c_scan, theorem1_verdict, tightness_at, Answer, ConditionCConfig, DyadicConfig, Tightness,
    TightnessConfig, VerdictConfig,
};
use lowpass_core::lattice::{
    analyze_matrix, build_digit_system, m_tilde, sample_tile, tile_measure_by_membership, tile_measure_estimate,
    translate_overlaps, DigitAverageFilter, DigitSystem, LatticeFilter, TileMode,
};
use lowpass_core::measure::{limit_mass, p_table};
use lowpass_core::numeric::ProductMode;
use lowpass_core::phase::uniform_grid;
use lowpass_core::tail::TailOptions;
use lowpass_core::{FilterKind, PeriodicFilter, Phase};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const MODE: ProductMode = ProductMode::Compensated;
const SEED: u64 = 20_240_611;

// Criterion 1
const QMF_GRID: usize = 4096;
const QMF_TOL: f64 = 1e-12;
const QMF_TIME: Duration = Duration::from_secs(1);
// Criterion 2
const AXIOM_CASES: usize = 200;
const AXIOM_MAX_N: u32 = 14;
const TOTAL_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-12;
const AXIOM_TIME: Duration = Duration::from_secs(30);
// Criterion 3
const HAAR_CASES: usize = 1000;
const HAAR_J: u32 = 40;
const HAAR_K: i64 = 32;
const HAAR_TOL: f64 = 1e-8;
// Criterion 4
const SHANNON_GRID: usize = 1024;
const SHANNON_N: u32 = 10;
// Criterion 5
const CUSP_GRID: usize = 64;
const CUSP_EXCLUSION: f64 = 1.0 / 64.0;
const CUSP_RETAINED: f64 = 0.99;
const CUSP_PRUNE: f64 = 1e-8;
const CUSP_LEVELS: u32 = 96;
const ESCAPE_K: i64 = 64;
const ESCAPE_MAX_N: u32 = 14;
const ESCAPE_BELOW: f64 = 0.05;
const REFINEMENTS: u32 = 6;
const CUSP_TIME: Duration = Duration::from_secs(300);
// Criterion 6
const VERDICT_GRID: usize = 64;
// Criterion 7
const ROUND_TRIP_RADIUS: i64 = 20;
const DIGIT_TIME: Duration = Duration::from_secs(10);
// Criterion 8
const BASE_FOUR_DEPTH: u32 = 8;
const BASE_FOUR_MEASURE_TOL: f64 = 0.05;
const QUINCUNX_MEASURE_TOL: f64 = 0.10;
const MC_POINTS: usize = 100_000;
const MC_DEPTH: u32 = 12;
const MC_TRIALS: usize = 100_000;
const OVERLAP_MAX: f64 = 0.02;
// Criterion 9
const TELESCOPE_CASES: usize = 100;
const TELESCOPE_MAX_J: u32 = 8;
const TELESCOPE_TOL: f64 = 1e-12;

const QUINCUNX: [[i64; 2]; 2] = [[1, 1], [-1, 1]];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn filter(kind: FilterKind) -> PeriodicFilter {
    PeriodicFilter::builtin(kind).expect("builtin filter")
}

fn phase(n: i128, d: i128) -> Phase {
    Phase::new(n, d).expect("valid phase")
}

fn matrix(rows: &[&[i64]]) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

fn system(rows: &[&[i64]]) -> DigitSystem {
    let a = analyze_matrix(&matrix(rows)).expect("matrix");
    build_digit_system(&a).expect("digit system")
}

fn qmf_validation() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for kind in [FilterKind::Haar, FilterKind::DaubechiesD4] {
        let v = filter(kind).validate_qmf(QMF_GRID, QMF_TOL).unwrap();
        pass &= v.pass && v.at_zero == 1.0;
        notes.push(format!("{kind} residual {:.1e}", v.worst_residual));
    }
    for kind in [FilterKind::Shannon, FilterKind::CuspCounterexample] {
        let v = filter(kind).validate_qmf(QMF_GRID, 0.0).unwrap();
        pass &= v.pass && v.worst_residual == 0.0 && v.at_zero == 1.0;
        notes.push(format!("{kind} residual {:e}", v.worst_residual));
    }
    let t = start.elapsed();
    pass &= t < QMF_TIME;
    outcome(pass, format!("{}; {:.2?}", notes.join(", "), t))
}

fn measure_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED);
    let kinds = FilterKind::BUILTIN;
    let (mut worst_total, mut worst_cons) = (0.0f64, 0.0f64);
    for _ in 0..AXIOM_CASES {
        let f = filter(kinds[rng.random_range(0..kinds.len())]);
        let den: i128 = rng.random_range(1..=1 << 20);
        let xi = phase(rng.random_range(0..den), den);
        let n = rng.random_range(0..=AXIOM_MAX_N);
        let t = p_table(&f, &xi, n, MODE).unwrap();
        let t1 = p_table(&f, &xi, n + 1, MODE).unwrap();
        worst_total = worst_total.max((t.total() - 1.0).abs()).max((t1.total() - 1.0).abs());
        // P^N(k) is the mass of the cylinder {k' ≡ k mod 2^{N+1}} under P^{N+1}.
        let period = 1i64 << (n + 1);
        for (k, m) in t.iter() {
            let up = t1.get(k).unwrap() + t1.get(if k < 0 { k + period } else { k - period }).unwrap();
            worst_cons = worst_cons.max((up - m).abs());
        }
    }
    let t = start.elapsed();
    let pass = worst_total <= TOTAL_TOL && worst_cons <= CONSISTENCY_TOL && t < AXIOM_TIME;
    outcome(
        pass,
        format!("max |total-1| {worst_total:.1e}, max consistency gap {worst_cons:.1e}; {t:.2?}"),
    )
}

fn sinc_sq(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let a = std::f64::consts::PI * x;
        (a.sin() / a).powi(2)
    }
}

fn haar_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 3);
    let f = filter(FilterKind::Haar);
    let mut worst = 0.0f64;
    for _ in 0..HAAR_CASES {
        let xi = phase(rng.random_range(0..1i128 << 40), 1 << 40);
        let k = rng.random_range(-HAAR_K..=HAAR_K);
        let p = limit_mass(&f, &xi, k, HAAR_J, 0.0, MODE).unwrap().value;
        worst = worst.max((p - sinc_sq(xi.value() + k as f64)).abs());
    }
    outcome(worst <= HAAR_TOL, format!("max deviation from sinc^2 {worst:.1e}"))
}

fn shannon_dichotomy() -> Outcome {
    let f = filter(FilterKind::Shannon);
    let mut bad = Vec::new();
    for xi in uniform_grid(SHANNON_GRID).unwrap() {
        let site = if xi.value() < 0.5 { 0 } else { -1 };
        let t = p_table(&f, &xi, SHANNON_N, MODE).unwrap();
        let limit = limit_mass(&f, &xi, site, 64, 0.0, MODE).unwrap().value;
        let point_mass = t.iter().all(|(k, m)| m == if k == site { 1.0 } else { 0.0 });
        if !point_mass || limit != 1.0 {
            bad.push(xi.to_string());
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} frequencies, exceptions {:?}", SHANNON_GRID, bad),
    )
}

fn cusp_escape() -> Outcome {
    let start = Instant::now();
    let f = filter(FilterKind::CuspCounterexample);
    let mut notes = Vec::new();

    // Tightness away from the exceptional orbit.
    let cfg = TightnessConfig {
        n_max: 8,
        eps: vec![1.0 - CUSP_RETAINED],
        tail: TailOptions {
            max_level: CUSP_LEVELS,
            prune_mass: CUSP_PRUNE,
            ..TightnessConfig::default().tail
        },
        ..TightnessConfig::default()
    };
    let mut tight_ok = true;
    let mut worst = (String::new(), 1.0f64);
    for xi in uniform_grid(CUSP_GRID).unwrap() {
        let x = xi.value();
        if (x - 1.0 / 3.0).abs() < CUSP_EXCLUSION || (x - 2.0 / 3.0).abs() < CUSP_EXCLUSION {
            continue;
        }
        let p = tightness_at(&f, &xi, &cfg).unwrap();
        let lower = p.certified.iter().map(|b| b.lower).fold(0.0, f64::max);
        tight_ok &= p.verdict == Tightness::Tight && lower >= CUSP_RETAINED;
        if lower < worst.1 {
            worst = (xi.to_string(), lower);
        }
    }
    notes.push(format!(
        "grid tight={tight_ok} (lowest certified retained mass {:.5} at {})",
        worst.1, worst.0
    ));

    // Escape at 1/3 and 2/3.
    let mut strict = true;
    let mut below = true;
    for xi in [phase(1, 3), phase(2, 3)] {
        let seq: Vec<f64> = (1..=ESCAPE_MAX_N)
            .map(|n| p_table(&f, &xi, n, MODE).unwrap().retained(ESCAPE_K))
            .collect();
        strict &= seq.windows(2).all(|w| w[1] < w[0]);
        let first = seq.iter().position(|&r| r < ESCAPE_BELOW).map(|i| i as u32 + 1);
        below &= first.is_some();
        notes.push(format!("xi={xi}: retained {seq:?}, first N below {ESCAPE_BELOW}: {first:?}"));
    }
    notes.push(format!("strictly decreasing={strict}, eventually below={below}"));

    // Condition (C) on grids closing in on 1/3.
    let ccfg = ConditionCConfig::default();
    let deltas: Vec<f64> = (1..=REFINEMENTS)
        .map(|r| {
            let m = 4 + 2 * r;
            let den = 3i128 << m;
            let grid: Vec<Phase> = (1..=8)
                .flat_map(|i| [phase((1 << m) + 3 * i, den), phase((1 << m) - 3 * i, den)])
                .collect();
            condition_c_scan(&f, &grid, &ccfg).unwrap().delta_hat
        })
        .collect();
    let monotone = deltas.windows(2).all(|w| w[1] < w[0]);
    notes.push(format!("delta-hat near 1/3 {deltas:.4?}, decreasing={monotone}"));

    let t = start.elapsed();
    notes.push(format!("{t:.1?}"));
    outcome(
        tight_ok && strict && below && monotone && t < CUSP_TIME,
        notes.join("; "),
    )
}

fn verdicts() -> Outcome {
    let cfg = VerdictConfig {
        grid: uniform_grid(VERDICT_GRID).unwrap(),
        probes: Vec::new(),
        tightness: TightnessConfig::default(),
        dyadic: DyadicConfig::default(),
    };
    let v = |k| theorem1_verdict(&filter(k), &cfg).unwrap();
    let shannon = v(FilterKind::Shannon);
    let haar = v(FilterKind::Haar);
    let pal = v(FilterKind::Paluszynski);
    let pass = shannon.low_pass == Answer::Yes
        && haar.low_pass == Answer::Yes
        && pal.b_ok
        && pal.b_ae == Answer::Yes
        && pal.c_ok == Answer::No
        && pal.l_minus == 0.0
        && pal.low_pass == Answer::No;
    outcome(
        pass,
        format!(
            "shannon {:?}, haar {:?}, paluszynski b_ok={} c={:?} L+={} L-={} -> {:?}",
            shannon.low_pass, haar.low_pass, pal.b_ok, pal.c_ok, pal.l_plus, pal.l_minus, pal.low_pass
        ),
    )
}

fn congruent(sys: &DigitSystem, a: &[i64], b: &[i64]) -> bool {
    let diff: Vec<i128> = a.iter().zip(b).map(|(x, y)| (*x - *y) as i128).collect();
    // diff ∈ B(Z^d) iff adj(B)·diff ≡ 0 mod det B.
    let rows = sys.b().adjugate().unwrap();
    let m = sys.det().abs();
    rows.apply_wide(&diff).unwrap().iter().all(|v| v.rem_euclid(m) == 0)
}

fn digit_systems() -> Outcome {
    let start = Instant::now();
    let four = system(&[&[4]]);
    let mut base_four: Vec<i64> = four.digits().iter().map(|d| d[0]).collect();
    base_four.sort();
    let quincunx = system(&[&QUINCUNX[0], &QUINCUNX[1]]);
    let q = quincunx.digits();
    let distinct = (0..q.len()).all(|i| (0..i).all(|j| !congruent(&quincunx, &q[i], &q[j])));
    let quincunx_ok = quincunx.power() == 3 && q.len() == 8 && distinct;

    let systems: [&[&[i64]]; 7] = [
        &[&[2]],
        &[&[3]],
        &[&[4]],
        &[&[-2]],
        &[&QUINCUNX[0], &QUINCUNX[1]],
        &[&[2, 0], &[0, 2]],
        &[&[0, -2], &[1, 0]],
    ];
    let mut failures = Vec::new();
    for rows in systems {
        let sys = system(rows);
        let d = sys.dim();
        let r = ROUND_TRIP_RADIUS;
        let side = (2 * r + 1) as usize;
        for idx in 0..side.pow(d as u32) {
            let mut k = vec![0i64; d];
            let mut rem = idx;
            for c in k.iter_mut() {
                *c = (rem % side) as i64 - r;
                rem /= side;
            }
            let ok = sys
                .expand(&k)
                .and_then(|e| sys.reconstruct(&e.digit_indices))
                .map_or(false, |back| back == k);
            if !ok {
                failures.push((matrix(rows), k));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        base_four == [-1, 0, 1, 2] && quincunx_ok && failures.is_empty() && t < DIGIT_TIME,
        format!(
            "base four digits {base_four:?}; quincunx p={} with {} non-congruent digits={distinct}; round-trip failures {}; {t:.2?}",
            quincunx.power(),
            q.len(),
            failures.len()
        ),
    )
}

fn tiling() -> Outcome {
    let four = system(&[&[4]]);
    let hull = sample_tile(&four, BASE_FOUR_DEPTH, TileMode::Exhaustive).unwrap();
    let (lo, hi) = hull.bounds();
    let slack = 4f64.powi(-(BASE_FOUR_DEPTH as i32));
    let hull_ok = (lo[0] + 1.0 / 3.0).abs() <= slack && (hi[0] - 2.0 / 3.0).abs() <= slack;
    let mc = |sys: &DigitSystem, seed| {
        let s = sample_tile(
            sys,
            MC_DEPTH,
            TileMode::MonteCarlo {
                count: MC_POINTS,
                seed,
            },
        )
        .unwrap();
        let m = tile_measure_estimate(&s, MC_TRIALS, seed + 1).unwrap();
        (s, m)
    };
    let (_, m4) = mc(&four, SEED);
    let quincunx = system(&[&QUINCUNX[0], &QUINCUNX[1]]);
    let (sq, mq) = mc(&quincunx, SEED + 10);
    let overlaps = translate_overlaps(&sq, mq.radius, 1, MC_TRIALS, SEED + 12).unwrap();
    let worst_overlap = overlaps.iter().map(|o| o.estimate).fold(0.0, f64::max);
    let (oracle, oracle_se) = tile_measure_by_membership(&quincunx, 6, MC_TRIALS, SEED + 13).unwrap();
    let pass = hull_ok
        && (m4.estimate - 1.0).abs() <= BASE_FOUR_MEASURE_TOL
        && (mq.estimate - 1.0).abs() <= QUINCUNX_MEASURE_TOL
        && worst_overlap <= OVERLAP_MAX;
    outcome(
        pass,
        format!(
            "base four hull [{:.6}, {:.6}] measure {:.4}; quincunx measure {:.4} (membership check {:.4} ± {:.4}), max overlap {:.4}",
            lo[0], hi[0], m4.estimate, mq.estimate, oracle, oracle_se, worst_overlap
        ),
    )
}

/// `(A^T)^{-1}` in floating point, by cofactors.
fn inverse_transpose(a: &[Vec<i64>]) -> Vec<Vec<f64>> {
    match a.len() {
        1 => vec![vec![1.0 / a[0][0] as f64]],
        2 => {
            let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) as f64;
            // A^T = [[a00, a10], [a01, a11]]
            vec![
                vec![a[1][1] as f64 / det, -a[1][0] as f64 / det],
                vec![-a[0][1] as f64 / det, a[0][0] as f64 / det],
            ]
        }
        _ => unreachable!(),
    }
}

fn telescoping() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 9);
    let mut worst = 0.0f64;
    for rows in [vec![vec![2i64]], QUINCUNX.iter().map(|r| r.to_vec()).collect::<Vec<_>>()] {
        let a = analyze_matrix(&rows).unwrap();
        let sys = build_digit_system(&a).unwrap();
        let m = DigitAverageFilter::for_matrix(&a).unwrap();
        let mt = m_tilde(&m, &a, sys.power()).unwrap();
        let inv = inverse_transpose(&rows);
        let d = sys.dim();
        for _ in 0..TELESCOPE_CASES {
            let xi: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let big_j = rng.random_range(1..=TELESCOPE_MAX_J);
            let mut eta = xi.clone();
            let mut lhs = 1.0;
            for _ in 0..big_j {
                let mut next = vec![0.0; d];
                sys.b_inv_apply(&eta, &mut next);
                eta = next;
                lhs *= mt.eval(&eta);
            }
            let mut x = xi.clone();
            let mut rhs = 1.0;
            for _ in 0..sys.power() * big_j {
                x = (0..d).map(|i| (0..d).map(|j| inv[i][j] * x[j]).sum()).collect();
                rhs *= m.eval(&x);
            }
            worst = worst.max((lhs - rhs).abs());
        }
    }
    outcome(worst <= TELESCOPE_TOL, format!("max gap {worst:.1e} over both systems"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 qmf validation", qmf_validation),
        ("2 measure axioms", measure_axioms),
        ("3 haar sinc^2 oracle", haar_oracle),
        ("4 shannon dichotomy", shannon_dichotomy),
        ("5 cusp escape at 1/3 and 2/3", cusp_escape),
        ("6 low-pass verdicts", verdicts),
        ("7 digit systems", digit_systems),
        ("8 tiling", tiling),
        ("9 telescoping product", telescoping),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
