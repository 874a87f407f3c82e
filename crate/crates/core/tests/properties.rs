use lowpass_core::diagnostics::{
    condition_c_at, dyadic_limits_at, orthonormality_check, tightness_at, ConditionCConfig, DyadicConfig,
    LimitStatus, Tightness, TightnessConfig,
};
use lowpass_core::dyadic::{decode, encode, msb_index};
use lowpass_core::lattice::{analyze_matrix, build_digit_system, m_tilde, multidim_p_table, DigitAverageFilter};
use lowpass_core::measure::{limit_mass, p_table, partial_products};
use lowpass_core::numeric::ProductMode;
use lowpass_core::tail::{retained_bounds, TailOptions};
use lowpass_core::{FilterKind, PeriodicFilter, Phase};
use proptest::prelude::*;

const MODE: ProductMode = ProductMode::Compensated;

fn builtin() -> impl Strategy<Value = PeriodicFilter> {
    prop::sample::select(FilterKind::BUILTIN.to_vec()).prop_map(|k| PeriodicFilter::builtin(k).unwrap())
}

fn smooth() -> impl Strategy<Value = PeriodicFilter> {
    prop::sample::select(vec![FilterKind::Haar, FilterKind::DaubechiesD4, FilterKind::Shannon])
        .prop_map(|k| PeriodicFilter::builtin(k).unwrap())
}

fn phase() -> impl Strategy<Value = Phase> {
    (1i128..1 << 24).prop_flat_map(|den| (0..den).prop_map(move |num| Phase::new(num, den).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tables_are_probability_measures(f in builtin(), xi in phase(), n in 0u32..12) {
        let t = p_table(&f, &xi, n, MODE).unwrap();
        prop_assert!(t.iter().all(|(_, m)| (0.0..=1.0 + 1e-15).contains(&m)));
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_curve_is_nonincreasing(f in builtin(), xi in phase(), n in 1u32..12) {
        let c = p_table(&f, &xi, n, MODE).unwrap().tail_curve();
        prop_assert!(c.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn partial_products_decrease_to_the_limit(f in builtin(), xi in phase(), k in -64i64..64) {
        let pp = partial_products(&f, &xi, k, 48, MODE);
        prop_assert!(pp.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-15)));
        let lim = limit_mass(&f, &xi, k, 48, 0.0, MODE).unwrap().value;
        prop_assert!((lim - pp[47]).abs() <= 1e-15);
    }

    #[test]
    fn certified_bounds_are_ordered(f in smooth(), xi in phase()) {
        let opts = TailOptions { max_level: 20, prune_mass: 1e-6, ..TailOptions::default() };
        let b = retained_bounds(&f, &xi, &opts).unwrap();
        prop_assert!(b.iter().all(|r| r.lower <= r.upper + 1e-12 && r.upper <= 1.0 + 1e-12));
        prop_assert!(b.windows(2).all(|w| w[1].lower + 1e-12 >= w[0].lower));
    }

    #[test]
    fn orthonormality_residual_is_the_missing_limit_mass(f in builtin(), xi in phase(), big_k in 1i64..40) {
        let r = orthonormality_check(&f, &[xi], big_k, 40, MODE).unwrap()[0].residual;
        let mut acc = lowpass_core::numeric::NeumaierSum::new();
        for k in -big_k..=big_k {
            acc.add(limit_mass(&f, &xi, k, 40, 0.0, MODE).unwrap().value);
        }
        prop_assert_eq!(r, 1.0 - acc.value());
    }

    #[test]
    fn shannon_is_a_point_mass(xi in phase(), n in 0u32..10) {
        let f = PeriodicFilter::builtin(FilterKind::Shannon).unwrap();
        let site = if xi.value() < 0.5 { 0 } else { -1 };
        let t = p_table(&f, &xi, n, MODE).unwrap();
        prop_assert_eq!(t.get(site), Some(1.0));
        prop_assert_eq!(t.total(), 1.0);
    }

    /// A heavy translate forces tightness.
    #[test]
    fn witness_implies_tight(f in smooth(), xi in phase()) {
        let w = condition_c_at(&f, &xi, &ConditionCConfig::default()).unwrap();
        prop_assume!(w.witness_mass > 0.05);
        let cfg = TightnessConfig {
            n_max: 6,
            eps: vec![1e-2],
            tail: TailOptions { max_level: 40, prune_mass: 1e-7, ..TailOptions::default() },
            ..TightnessConfig::default()
        };
        prop_assert_eq!(tightness_at(&f, &xi, &cfg).unwrap().verdict, Tightness::Tight);
    }

    #[test]
    fn signed_code_round_trips(k in any::<i32>()) {
        let k = i64::from(k);
        prop_assert_eq!(decode(&encode(k)).unwrap(), k);
        let m = msb_index(k);
        if m > 0 {
            let h = 1i64 << (m - 1);
            prop_assert!(k < -h || k >= h);
        }
        prop_assert!(k >= -(1i64 << m) && k < 1i64 << m);
    }

    #[test]
    fn quincunx_levels_sum_to_one(x in 0.0f64..1.0, y in 0.0f64..1.0, n in 1u32..4) {
        let a = analyze_matrix(&[vec![1, 1], vec![-1, 1]]).unwrap();
        let sys = build_digit_system(&a).unwrap();
        let mt = m_tilde(DigitAverageFilter::for_matrix(&a).unwrap(), &a, sys.power()).unwrap();
        let t = multidim_p_table(&mt, &sys, &[x, y], n).unwrap();
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansions_round_trip_in_three_dimensions(k in prop::collection::vec(-200i64..200, 3)) {
        let a = analyze_matrix(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]).unwrap();
        let sys = build_digit_system(&a).unwrap();
        let e = sys.expand(&k).unwrap();
        prop_assert_eq!(sys.reconstruct(&e.digit_indices).unwrap(), k);
    }
}

/// The per-frequency dyadic outcome is the same on the whole grid, apart from
/// the cusp's orbit {1/3, 2/3}.
#[test]
fn dyadic_outcome_is_constant_across_the_grid() {
    let cfg = DyadicConfig::default();
    for kind in [FilterKind::Haar, FilterKind::Shannon, FilterKind::CuspCounterexample] {
        let f = PeriodicFilter::builtin(kind).unwrap();
        for j in 0..48 {
            let xi = Phase::new(j, 48).unwrap();
            let p = dyadic_limits_at(&f, &xi, &cfg).unwrap();
            let exceptional = kind == FilterKind::CuspCounterexample && (j == 16 || j == 32);
            if !exceptional {
                assert_eq!((p.plus, p.minus), (LimitStatus::Converged, LimitStatus::Converged), "{kind} at {xi}");
            }
        }
    }
}
