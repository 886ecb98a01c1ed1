use num_complex::Complex64;
use proptest::prelude::*;

use polycap::capacity::{capacity_dual, energy, HOperator};
use polycap::kernels::sample_h;
use polycap::series::{self, CoeffArray};
use polycap::setspec::arc_line;
use polycap::{GridMeasure, GridSet, TorusGrid};

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * (1.0 + y.norm()))
}

prop_compose! {
    fn coeffs(max_n: usize)(n in 1..=max_n)
        (shape in proptest::collection::vec(1usize..6, n), d in 1usize..3, seed in any::<u64>())
        -> CoeffArray {
        series::generate_random_coeffs(seed, &shape, 1.7, d).unwrap()
    }
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..std::f64::consts::TAU, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_sums_are_linear(f in coeffs(3), seed in any::<u64>(), s in -2.0f64..2.0) {
        let g = series::generate_random_coeffs(seed, f.shape(), 2.0, f.d()).unwrap();
        let theta: Vec<f64> = (0..f.n()).map(|j| 0.3 + j as f64).collect();
        let cap: Vec<usize> = f.shape().iter().map(|k| k - 1).collect();
        let combo = f.scaled(Complex64::new(s, 0.5)).add(&g).unwrap();
        let lhs = series::rect_partial_sum(&combo, &cap, &theta).unwrap();
        let a = series::rect_partial_sum(&f, &cap, &theta).unwrap();
        let b = series::rect_partial_sum(&g, &cap, &theta).unwrap();
        let rhs: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * Complex64::new(s, 0.5) + y).collect();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn axis_permutation_commutes_with_evaluation(f in coeffs(3), theta_seed in point(3), r in 0.0f64..0.95) {
        let n = f.n();
        let theta = &theta_seed[..n];
        let perm: Vec<usize> = (0..n).rev().collect();
        let g = f.permute_axes(&perm).unwrap();
        let permuted_theta: Vec<f64> = perm.iter().map(|&p| theta[p]).collect();
        let cap: Vec<usize> = f.shape().iter().map(|k| k - 1).collect();
        let permuted_cap: Vec<usize> = perm.iter().map(|&p| cap[p]).collect();
        let a = series::rect_partial_sum(&f, &cap, theta).unwrap();
        let b = series::rect_partial_sum(&g, &permuted_cap, &permuted_theta).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
        let a = series::abel_mean(&f, &vec![r; n], theta).unwrap();
        let b = series::abel_mean(&g, &vec![r; n], &permuted_theta).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
        prop_assert!((f.dirichlet_norm() - g.dirichlet_norm()).abs() < 1e-12);
    }

    #[test]
    fn abel_mean_at_origin_is_constant_term(f in coeffs(3), theta in point(3)) {
        let v = series::abel_mean(&f, &vec![0.0; f.n()], &theta[..f.n()]).unwrap();
        prop_assert!(close(&v, f.get(&vec![0; f.n()]), 1e-15));
    }

    #[test]
    fn parts_form_equals_abel_mean(f in coeffs(2), theta in point(2), r in 0.0f64..0.99) {
        let n = f.n();
        let last: Vec<usize> = f.shape().iter().map(|k| k - 1).collect();
        let direct = series::abel_mean(&f, &vec![r; n], &theta[..n]).unwrap();
        let parts = series::abel_by_parts(&f, &vec![r; n], &theta[..n], &last).unwrap();
        prop_assert!(close(&parts.value, &direct, 1e-11));
        prop_assert_eq!(parts.tail_bound, 0.0);
    }

    #[test]
    fn partial_sum_table_last_entry_is_full_sum(f in coeffs(2), theta in point(2)) {
        let n = f.n();
        let last: Vec<usize> = f.shape().iter().map(|k| k - 1).collect();
        let table = series::partial_sum_table(&f, &theta[..n], &last).unwrap();
        let full = series::rect_partial_sum(&f, &last, &theta[..n]).unwrap();
        prop_assert!(close(&table[table.len() - f.d()..], &full, 1e-12));
    }

    #[test]
    fn scan_sup_dominates_final(f in coeffs(2), theta in point(2)) {
        let n = f.n();
        let last: Vec<usize> = f.shape().iter().map(|k| k - 1).collect();
        let s = series::pringsheim_scan(&f, &theta[..n], &last, 1e-9).unwrap();
        prop_assert!(s.sup_norm + 1e-12 >= series::vec_norm(&s.final_value));
        prop_assert!(s.oscillation_tail >= 0.0);
    }

    #[test]
    fn coefficient_json_round_trip(f in coeffs(3)) {
        let text = serde_json::to_string(&f).unwrap();
        let back: CoeffArray = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn fejer_gap_within_uniform_constant(seed in any::<u64>(), n in 1usize..60, theta in 0.0f64..std::f64::consts::TAU) {
        let f = series::generate_random_coeffs(seed, &[64], 1.6, 1).unwrap();
        let gap = series::fejer_gap(&f, n, theta, 0).unwrap();
        prop_assert!(gap <= series::FEJER_GAP_CONSTANT * f.dirichlet_norm());
    }

    #[test]
    fn energy_is_positive(weights in proptest::collection::vec(0.0f64..1.0, 32)) {
        prop_assume!(weights.iter().any(|&w| w > 0.0));
        let g = TorusGrid::new(1, 32).unwrap();
        let mu = GridMeasure::new(g, weights).unwrap();
        let e = energy(&sample_h(32).unwrap(), &mu).unwrap();
        prop_assert!(e > 0.0);
    }

    #[test]
    fn dilation_and_translation(start in 0.0f64..6.0, len in 0.1f64..2.0, shift in 0usize..64, radius in 0usize..5) {
        let g = TorusGrid::new(1, 64).unwrap();
        let e = GridSet::from_mask(g, arc_line(64, start, start + len)).unwrap();
        prop_assert!(e.is_subset_of(&e.dilate(radius)));
        let t = e.translate(&[shift]);
        prop_assert_eq!(t.count(), e.count());
        prop_assert_eq!(t.translate(&[64 - shift]), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn capacity_is_translation_invariant(start in 0.0f64..6.0, len in 0.2f64..2.0, shift in 1usize..64) {
        let g = TorusGrid::new(1, 64).unwrap();
        let e = GridSet::from_mask(g, arc_line(64, start, start + len)).unwrap();
        let a = capacity_dual(&e, 1e-4, 100_000).unwrap();
        let b = capacity_dual(&e.translate(&[shift]), 1e-4, 100_000).unwrap();
        prop_assert!((a - b).abs() <= 1e-4 * a, "{a} vs {b}");
    }

    #[test]
    fn capacity_is_monotone(start in 0.0f64..6.0, len in 0.2f64..2.0, extra in 1usize..8) {
        let g = TorusGrid::new(1, 64).unwrap();
        let e = GridSet::from_mask(g, arc_line(64, start, start + len)).unwrap();
        let bigger = e.dilate(extra);
        let a = capacity_dual(&e, 1e-4, 100_000).unwrap();
        let b = capacity_dual(&bigger, 1e-4, 100_000).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-4), "{a} > {b}");
    }

    #[test]
    fn potential_is_linear(w1 in proptest::collection::vec(0.0f64..1.0, 64), w2 in proptest::collection::vec(0.0f64..1.0, 64), s in 0.0f64..3.0) {
        let g = TorusGrid::new(2, 8).unwrap();
        let op = HOperator::new(g).unwrap();
        let combo: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| s * a + b).collect();
        let lhs = op.apply(&combo);
        let (a, b) = (op.apply(&w1), op.apply(&w2));
        for i in 0..64 {
            prop_assert!((lhs[i] - (s * a[i] + b[i])).abs() <= 1e-10 * (1.0 + lhs[i].abs()));
        }
    }
}
