use proptest::prelude::*;

use mcnd::condense::{condense_once_reference, factor_pivot, PivotAxis};
use mcnd::matrix::{read_csv, read_matrix, write_csv, write_matrix};
use mcnd::{det_cofactor, logdet_condensation, CondenseState, DenseMatrix, LogDet, Sign};

fn square(n: usize, entries: impl Strategy<Value = f64>) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(entries, n * n).prop_map(move |v| DenseMatrix::new(n, n, v).unwrap())
}

fn uniform(n: usize) -> impl Strategy<Value = DenseMatrix> {
    square(n, -1.0f64..1.0)
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

/// Condenses with pivot rows chosen by `pick(active_len)` and finishes.
fn logdet_in_order(a: &DenseMatrix, mut pick: impl FnMut(usize) -> usize) -> LogDet {
    let mut st = CondenseState::new(a.clone()).unwrap();
    while st.n_col_active() > 1 {
        let idx = pick(st.active_rows().len());
        let row = st.active_rows()[idx];
        if st.condense_step(row).is_err() {
            return LogDet::SINGULAR;
        }
    }
    st.finish()
}

proptest! {
    #[test]
    fn swap_columns_is_an_involution(
        (a, j1, j2) in (1usize..8).prop_flat_map(|n| (square(n, finite()), 0..n, 0..n))
    ) {
        let mut b = a.clone();
        b.swap_columns(j1, j2).unwrap();
        b.swap_columns(j1, j2).unwrap();
        let same = a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn files_round_trip_bitwise(
        (rows, cols) in (1usize..6, 1usize..6),
        seed in any::<u64>(),
        v in prop::collection::vec(finite(), 36),
    ) {
        let data: Vec<f64> = v.iter().cycle().skip((seed % 36) as usize).take(rows * cols).copied().collect();
        let a = DenseMatrix::new(rows, cols, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("m.mcnd");
        let csv = dir.path().join("m.csv");
        write_matrix(&a, &bin).unwrap();
        write_csv(&a, &csv).unwrap();
        for b in [read_matrix(&bin).unwrap(), read_csv(&csv).unwrap()] {
            prop_assert_eq!((b.n_rows(), b.n_cols()), (rows, cols));
            let same = a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits());
            prop_assert!(same);
        }
    }

    #[test]
    fn row_and_column_factoring_agree((a, k, l) in (3usize..=5).prop_flat_map(|n| (uniform(n), 0..n, 0..n))) {
        prop_assume!(a.get(k, l).abs() > 1e-3);
        let by_row = condense_once_reference(&factor_pivot(&a, k, l, PivotAxis::Row).unwrap(), k, l).unwrap();
        let by_col = condense_once_reference(&factor_pivot(&a, k, l, PivotAxis::Column).unwrap(), k, l).unwrap();
        for (x, y) in by_row.as_slice().iter().zip(by_col.as_slice()) {
            prop_assert!(close(*x, *y, 1e-12), "{} vs {}", x, y);
        }
    }

    #[test]
    fn compact_step_matches_reference((a, k) in (3usize..=7).prop_flat_map(|n| (uniform(n), 0..n))) {
        let n = a.n_rows();
        let mut st = CondenseState::new(a.clone()).unwrap();
        let choice = st.condense_step(k).unwrap();
        let l = choice.col;
        let compact = st.active_submatrix().unwrap();
        let reference = condense_once_reference(&factor_pivot(&a, k, l, PivotAxis::Column).unwrap(), k, l).unwrap();
        // compact column c holds original column c, except slot l which holds
        // the original last column; the reference drops column l in place
        let ref_col = |orig: usize| if orig < l { orig } else { orig - 1 };
        for i in 0..n - 1 {
            for c in 0..n - 1 {
                let orig = if c == l { n - 1 } else { c };
                let (x, y) = (compact.get(i, c), reference.get(i, ref_col(orig)));
                prop_assert!(close(x, y, 1e-12), "({i},{c}): {x} vs {y}");
            }
        }
    }

    #[test]
    fn pivot_row_order_is_free(a in uniform(6), choices in prop::collection::vec(any::<prop::sample::Index>(), 5)) {
        let bottom_up = logdet_in_order(&a, |len| len - 1);
        let mut it = choices.into_iter();
        let shuffled = logdet_in_order(&a, |len| it.next().unwrap().index(len));
        prop_assert!(bottom_up.agrees_with(&shuffled, 10), "{} vs {}", bottom_up, shuffled);
    }

    #[test]
    fn scaling_a_row_shifts_logabs(
        (a, i) in (2usize..=8).prop_flat_map(|n| (square(n, -1.0f64..1.0), 0..n)),
        c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
    ) {
        // diagonal shift keeps the inputs well conditioned
        let n = a.n_rows();
        let mut a = a;
        for d in 0..n {
            a.set(d, d, a.get(d, d) + n as f64).unwrap();
        }
        let mut b = a.clone();
        b.scale_row(i, c).unwrap();
        let before = logdet_condensation(&a).unwrap();
        let after = logdet_condensation(&b).unwrap();
        prop_assert_eq!(after.sign, before.sign * Sign::of(c));
        prop_assert!((after.log_abs - before.log_abs - c.abs().ln()).abs() <= 1e-12);
    }

    #[test]
    fn condensation_identity_signed((a, k, l) in (3usize..=7).prop_flat_map(|n| (uniform(n), 0..n, 0..n))) {
        prop_assume!(a.get(k, l) != 0.0);
        let n = a.n_rows() as i32;
        let akl = a.get(k, l);
        let det_a = det_cofactor(&a).unwrap();
        let b = condense_once_reference(&a, k, l).unwrap();
        let parity = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = parity * det_cofactor(&b).unwrap() / akl.powi(n - 2);
        prop_assert!((lhs - det_a).abs() <= 1e-9 * det_a.abs().max(1e-300), "{lhs} vs {det_a}");
    }

    #[test]
    fn cofactor_row_swap_negates_exactly(
        (a, i1, i2) in (2usize..=6).prop_flat_map(|n| (square(n, (-9i32..=9).prop_map(f64::from)), 0..n, 0..n))
    ) {
        prop_assume!(i1 != i2);
        let mut b = a.clone();
        b.swap_rows(i1, i2).unwrap();
        prop_assert_eq!(det_cofactor(&b).unwrap(), -det_cofactor(&a).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sign_matches_cofactor_on_five_by_five(a in uniform(5)) {
        let det = det_cofactor(&a).unwrap();
        let ld = logdet_condensation(&a).unwrap();
        prop_assert_eq!(ld.sign, Sign::of(det));
    }
}

#[test]
fn sign_matches_cofactor_on_generated_matrices() {
    use mcnd::{MatrixKind, MatrixSpec};
    for seed in 0..1000 {
        for kind in [MatrixKind::UniformRandom, MatrixKind::ScaledCorrelation] {
            let a = mcnd::matrix::generate(&MatrixSpec::new(5, kind, seed)).unwrap();
            let det = det_cofactor(&a).unwrap();
            assert_eq!(
                logdet_condensation(&a).unwrap().sign,
                Sign::of(det),
                "{kind} seed {seed}"
            );
        }
    }
}

#[test]
fn generator_is_deterministic() {
    use mcnd::{MatrixKind, MatrixSpec};
    for kind in MatrixKind::ALL {
        for size in [1, 2, 7, 33] {
            let spec = MatrixSpec::new(size, kind, 77);
            let a = mcnd::matrix::generate(&spec).unwrap();
            let b = mcnd::matrix::generate(&spec).unwrap();
            let same = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            assert!(same, "{kind} size {size}");
        }
    }
}

#[test]
fn pivot_row_order_on_fixed_orders() {
    use mcnd::{MatrixKind, MatrixSpec};
    for seed in 0..50 {
        let a =
            mcnd::matrix::generate(&MatrixSpec::new(6, MatrixKind::UniformRandom, seed)).unwrap();
        let bottom_up = logdet_in_order(&a, |len| len - 1);
        for first in [0, 1, 2] {
            let other = logdet_in_order(&a, |len| first.min(len - 1));
            assert!(
                bottom_up.agrees_with(&other, 10),
                "seed {seed}: {bottom_up} vs {other}"
            );
        }
    }
}
