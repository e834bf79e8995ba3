use num_bigint::BigUint;
use proptest::prelude::*;

use robustlab_core::concentration::rho;
use robustlab_core::harness::{
    collision_search, estimate_crossing, fit_loglog, read_scan_csv, run_scan, scan_csv, two_phase_simulation,
    zero_sum_search, DGrid, ScanConfig, TwoPhaseConfig,
};
use robustlab_core::moments::alpha_exact;
use robustlab_core::{
    generate, is_kernel_vector, is_s_robust, kernel_basis, rank, spark, ColumnSelection, ExactProb, FieldSpec,
    FpVector, SeedSpec, Spark,
};

fn field_strategy() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![Just(FieldSpec::Rationals), Just(FieldSpec::PrimeField(3)), Just(FieldSpec::PrimeField(17))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_dimension_is_nullity(n in 1usize..8, d in 1usize..12, seed in any::<u64>(), field in field_strategy()) {
        let m = generate(n, d, SeedSpec::new(seed, 0));
        let r = rank(&m, field);
        prop_assert!(r.rank <= n.min(d));
        let basis = kernel_basis(&m, field).unwrap();
        prop_assert_eq!(basis.len(), r.deficiency);
        for v in &basis {
            prop_assert!(is_kernel_vector(&m, v));
        }
    }

    #[test]
    fn rank_mod_p_never_exceeds_rank_over_q(n in 1usize..8, d in 1usize..12, seed in any::<u64>()) {
        let m = generate(n, d, SeedSpec::new(seed, 0));
        prop_assert!(rank(&m, FieldSpec::PrimeField(3)).rank <= rank(&m, FieldSpec::Rationals).rank);
    }

    #[test]
    fn spark_witness_is_minimal_and_sound(n in 2usize..6, d in 2usize..9, seed in any::<u64>()) {
        let m = generate(n, d, SeedSpec::new(seed, 0));
        let r = spark(&m, FieldSpec::Rationals, None);
        match r.spark {
            Spark::Finite(k) => {
                let w = r.witness.unwrap();
                prop_assert_eq!(w.support_size(), k);
                prop_assert!(is_kernel_vector(&m, &w));
                prop_assert!(!is_s_robust(&m, k, FieldSpec::Rationals).unwrap().robust);
                prop_assert!(is_s_robust(&m, k - 1, FieldSpec::Rationals).unwrap().robust || k == 1);
            }
            Spark::Infinite => prop_assert_eq!(rank(&m, FieldSpec::Rationals).deficiency, 0),
            Spark::AboveCap(_) => prop_assert!(false, "no cap was given"),
        }
    }

    /// Columns are generated as a prefix-stable stream, so appending a
    /// column can only destroy robustness.
    #[test]
    fn adding_columns_never_restores_robustness(n in 3usize..7, d in 3usize..10, s in 2usize..4, seed in any::<u64>()) {
        let small = generate(n, d, SeedSpec::new(seed, 0));
        let big = generate(n, d + 1, SeedSpec::new(seed, 0));
        prop_assert_eq!(&big.select_columns(&ColumnSelection::all(d)).unwrap(), &small);
        if is_s_robust(&big, s, FieldSpec::Rationals).unwrap().robust {
            prop_assert!(is_s_robust(&small, s, FieldSpec::Rationals).unwrap().robust);
        }
    }

    #[test]
    fn rho_is_sign_and_order_invariant(entries in proptest::collection::vec(-9i64..=9, 1..12), p in prop_oneof![Just(0u64), Just(5), Just(13)]) {
        prop_assume!(entries.iter().any(|&x| if p == 0 { x != 0 } else { x.rem_euclid(p as i64) != 0 }));
        let a = FpVector::new(p, entries.clone()).unwrap();
        let mut flipped: Vec<i64> = entries.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { -x } else { x }).collect();
        flipped.reverse();
        let r = rho(&a).unwrap();
        prop_assert_eq!(&r, &rho(&FpVector::new(p, flipped).unwrap()).unwrap());
        prop_assert!(r <= ExactProb::new(1u32, 1));
    }

    #[test]
    fn exact_prob_matches_rationals(a in 0u64..1000, e in 0u64..20, b in 0u64..1000, f in 0u64..20) {
        let (x, y) = (ExactProb::new(BigUint::from(a), e), ExactProb::new(BigUint::from(b), f));
        prop_assert_eq!(x.add(&y).to_rational(), x.to_rational() + y.to_rational());
        prop_assert_eq!(x.mul(&y).to_rational(), x.to_rational() * y.to_rational());
        prop_assert_eq!(x.cmp(&y), x.to_rational().cmp(&y.to_rational()));
    }

    #[test]
    fn alpha_at_zero_overlap_is_one(half in 1usize..40) {
        prop_assert_eq!(alpha_exact(2 * half, 0).unwrap(), num_rational::BigRational::from_integer(1.into()));
    }

    #[test]
    fn search_witnesses_verify(n in 3usize..10, d in 6usize..40, half in 1usize..4, seed in any::<u64>()) {
        let s = 2 * half;
        prop_assume!(s <= d);
        let m = generate(n, d, SeedSpec::new(seed, 0));
        if let Some(w) = collision_search(&m, s, 20_000, SeedSpec::new(seed, 1)).unwrap() {
            prop_assert!(is_kernel_vector(&m, &w));
            prop_assert!(w.support_size() <= s);
        }
        if let Some(sel) = zero_sum_search(&m, s, 20_000, SeedSpec::new(seed, 2)).unwrap() {
            prop_assert_eq!(sel.len(), s);
            for i in 0..n {
                prop_assert_eq!(m.signed_row_sum(i, &sel), 0);
            }
        }
    }

    #[test]
    fn two_phase_rank_is_monotone(n in 4usize..16, extra in 0usize..20, s in 1usize..12, beta in 0.1f64..0.9, seed in any::<u64>()) {
        let d = s + extra;
        let cfg = TwoPhaseConfig { n, d, s, beta, field: FieldSpec::PrimeField(17), seed: SeedSpec::new(seed, 0) };
        let trace = two_phase_simulation(&cfg, &ColumnSelection::new((extra..d).collect()).unwrap()).unwrap();
        prop_assert_eq!(trace.n1 + trace.n2, n);
        let mut prev = trace.initial_rank;
        for &r in &trace.ranks {
            prop_assert!(r == prev || r == prev + 1);
            prev = r;
        }
        prop_assert_eq!(prev, trace.final_rank);
        prop_assert!(trace.final_rank <= s.min(n));
    }

    #[test]
    fn loglog_fit_recovers_power_laws(exp in 0.5f64..3.0, scale in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = [4.0, 9.0, 15.0, 40.0].iter().map(|&x: &f64| (x, scale * x.powf(exp))).collect();
        let fit = fit_loglog(&pts).unwrap();
        prop_assert!((fit.slope - exp).abs() < 1e-9);
    }
}

#[test]
fn scan_rows_are_ordered_and_round_trip() {
    let cfg = ScanConfig {
        delta: 0.5,
        n_list: vec![10, 8],
        d_grid: DGrid::Columns(vec![14, 10]),
        trials: 20,
        base_seed: 4,
        ..ScanConfig::default()
    };
    let out = run_scan(&cfg).unwrap();
    let keys: Vec<(usize, usize)> = out.rows.iter().map(|r| (r.n, r.d)).collect();
    assert_eq!(keys, vec![(8, 10), (8, 14), (10, 10), (10, 14)]);
    for r in &out.rows {
        assert_eq!(r.robust_count + r.witness_count + r.capped, r.trials);
    }
    let csv = scan_csv(&out.rows);
    assert_eq!(read_scan_csv(&csv).unwrap(), out.rows);
    // Two n values with decided trials: crossing estimation accepts the table.
    assert!(estimate_crossing(&out.rows).is_ok());
}
