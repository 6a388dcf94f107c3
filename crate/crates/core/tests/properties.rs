use mpmc::discrepancy::{l2_discrepancy, star_discrepancy, warnock_l2_squared};
use mpmc::finance::asian_payoff;
use mpmc::generators::{halton, random_shift, van_der_corput};
use mpmc::points::{parse_csv, to_csv};
use mpmc::{AsianOption64, PointSet64, ProjectionIndexSet};
use proptest::prelude::*;

fn point_set(max_n: usize, max_d: usize) -> impl Strategy<Value = PointSet64> {
    (1..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
        prop::collection::vec(0.0..=1.0f64, n * d).prop_map(move |c| PointSet64::new(n, d, c).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrepancies_are_ordered(p in point_set(12, 3)) {
        let l2 = l2_discrepancy(&p).unwrap();
        let star = star_discrepancy(&p).unwrap().value;
        prop_assert!(l2 >= 0.0);
        prop_assert!(l2 <= star + 1e-12);
        prop_assert!(star <= 1.0);
        prop_assert!(star >= 0.5 / p.n_points() as f64 - 1e-15);
    }

    #[test]
    fn warnock_ignores_row_order(p in point_set(12, 3)) {
        let perm: Vec<usize> = (0..p.n_points()).rev().collect();
        let a = warnock_l2_squared(&p).unwrap();
        let b = warnock_l2_squared(&p.permute_rows(&perm).unwrap()).unwrap();
        // Rounding scales with the 3^-d leading term, not with the cancelled result.
        let scale = a.max(3f64.powi(-(p.dim() as i32)));
        prop_assert!((a - b).abs() <= 1e-14 * scale);
    }

    #[test]
    fn csv_round_trip_is_exact(p in point_set(10, 4)) {
        let q: PointSet64 = parse_csv(to_csv(&p).as_bytes(), Some(p.dim())).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn shifted_points_stay_in_cube(p in point_set(10, 3), seed in any::<u64>(), bound in 0.01..=1.0f64) {
        let q = random_shift(&p, seed, bound).unwrap();
        prop_assert!(q.coords().iter().all(|&c| (0.0..1.0).contains(&c)));
    }

    #[test]
    fn projection_onto_all_dims_is_identity(p in point_set(10, 4)) {
        let full = ProjectionIndexSet::full(p.dim());
        prop_assert_eq!(p.project(&full).unwrap(), p);
    }

    #[test]
    fn halton_columns_are_van_der_corput(n in 1usize..200, start in 0u64..50) {
        let h: PointSet64 = halton(n, 3, start).unwrap();
        for (k, base) in [2u64, 3, 5].into_iter().enumerate() {
            let v: PointSet64 = van_der_corput(n, base, start).unwrap();
            prop_assert_eq!(h.column(k), v.column(0));
        }
    }

    #[test]
    fn payoff_is_finite_and_non_negative(u in prop::collection::vec(0.0..=1.0f64, 32)) {
        let v = asian_payoff(&u, &AsianOption64::default()).unwrap();
        prop_assert!(v.is_finite() && v >= 0.0);
    }
}
