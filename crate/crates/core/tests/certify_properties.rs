use cpr_core::certify::{
    lemma31_check, mixed_nsp_check, nsp_constant, nsp_constant_estimate, phaseless_io_condition_estimate,
    rip_constant, snsp_constant, srip_bounds,
};
use cpr_core::measurements::{row_submatrix, sample_gaussian, MeasurementMatrix};
use cpr_core::signals::sigma_k_of;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(a: &MeasurementMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.m(), a.n(), |i, j| a[(i, j)])
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Orthonormal null-space basis as columns.
fn null_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut sq = DMatrix::zeros(a.nrows().max(n), n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.unwrap();
    let top = svd.singular_values.max().max(1.0);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= 1e-10 * top)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rip_delta_is_monotone_in_order(seed in any::<u64>(), m in 3usize..8, n in 2usize..7) {
        let a = sample_gaussian::<f64>(m, n, seed).unwrap();
        let mut prev = 0.0;
        for k in 1..=n {
            let d = rip_constant(&a, k).unwrap().delta;
            prop_assert!(d >= prev - 1e-12);
            prev = d;
        }
    }

    #[test]
    fn srip_bounds_widen_with_order(seed in any::<u64>(), m in 2usize..8, n in 2usize..6) {
        let a = sample_gaussian::<f64>(m, n, seed).unwrap();
        let mut prev = srip_bounds(&a, 1).unwrap();
        for k in 2..=n {
            let r = srip_bounds(&a, k).unwrap();
            prop_assert!(r.theta_minus <= prev.theta_minus + 1e-12);
            prop_assert!(r.theta_plus >= prev.theta_plus - 1e-12);
            prev = r;
        }
    }

    #[test]
    fn srip_witness_reproduces_bounds(seed in any::<u64>(), m in 2usize..8, n in 2usize..6, k in 1usize..3) {
        let k = k.min(n);
        let a = sample_gaussian::<f64>(m, n, seed).unwrap();
        let r = srip_bounds(&a, k).unwrap();
        prop_assert_eq!(r.witness.rows.len(), m.div_ceil(2));
        let na = to_na(&a);
        let sub = na.select_rows(&r.witness.rows).select_columns(&r.witness.support);
        let lo = (sub.transpose() * &sub).symmetric_eigen().eigenvalues.min();
        prop_assert!((lo - r.theta_minus).abs() <= 1e-10);
        let sub = na.select_columns(&r.witness_plus);
        let hi = (sub.transpose() * &sub).symmetric_eigen().eigenvalues.max();
        prop_assert!((hi - r.theta_plus).abs() <= 1e-10);
    }

    #[test]
    fn nsp_witness_attains_and_dominates_samples(seed in any::<u64>(), m in 1usize..4, extra in 1usize..3, k in 1usize..3) {
        let n = m + extra + 1;
        let a = sample_gaussian::<f64>(m, n, seed).unwrap();
        let r = nsp_constant(&a, k).unwrap();
        prop_assert!(!r.vacuous);
        prop_assert!(r.constant >= 1.0);
        let w = r.witness.clone().unwrap();
        let w = w.as_slice();
        let na = to_na(&a);
        let aw = &na * DVector::from_column_slice(w);
        prop_assert!(aw.norm() <= 1e-9 * l1(w).max(1.0));
        if r.infinite {
            prop_assert!(sigma_k_of(w, k, 1.0) <= 1e-9 * l1(w));
            return Ok(());
        }
        prop_assert!((l1(w) / sigma_k_of(w, k, 1.0) - r.constant).abs() <= 1e-7 * r.constant);
        let basis = null_basis(&na);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..300 {
            let c = DVector::from_fn(basis.ncols(), |_, _| rng.random_range(-1.0..1.0));
            let eta: Vec<f64> = (&basis * c).iter().copied().collect();
            let ratio = l1(&eta) / sigma_k_of(&eta, k, 1.0);
            prop_assert!(ratio <= r.constant * (1.0 + 1e-9));
        }
    }

    #[test]
    fn estimates_never_exceed_exact(seed in any::<u64>()) {
        let a = sample_gaussian::<f64>(2, 5, seed).unwrap();
        let exact = nsp_constant(&a, 1).unwrap();
        let est = nsp_constant_estimate(&a, 1, 200, seed).unwrap();
        prop_assert!(!est.exact);
        prop_assert!(est.constant <= exact.constant * (1.0 + 1e-9));
    }

    #[test]
    fn lemma31_has_no_violations_on_valid_certificates(seed in 0u64..400) {
        let a = sample_gaussian::<f64>(10, 5, seed).unwrap();
        let r = srip_bounds(&a, 2).unwrap();
        prop_assume!(r.valid);
        let rep = lemma31_check(&a, 1, r.theta_minus, 300, seed).unwrap();
        prop_assert_eq!(rep.violations, 0);
        prop_assert!(rep.worst_margin >= -1e-10);
    }
}

#[test]
fn snsp_with_duplicated_rows_equals_nsp() {
    for seed in 0..5 {
        let base = sample_gaussian::<f64>(1, 4, 17 + seed).unwrap();
        let r = base.row(0).to_vec();
        let dup = MeasurementMatrix::from_rows(&[r.clone(), r]).unwrap();
        let s = snsp_constant(&dup, 1).unwrap();
        let plain = nsp_constant(&dup, 1).unwrap();
        let single = nsp_constant(&base, 1).unwrap();
        assert!((s.constant - plain.constant).abs() <= 1e-9 * plain.constant);
        assert!((s.constant - single.constant).abs() <= 1e-9 * plain.constant);
    }
}

#[test]
fn snsp_witness_rows_reproduce_constant() {
    for seed in 0..5 {
        let a = sample_gaussian::<f64>(4, 5, 40 + seed).unwrap();
        let s = snsp_constant(&a, 1).unwrap();
        let rows = s.witness_rows.clone().unwrap();
        assert_eq!(rows.len(), 2);
        let sub = nsp_constant(&row_submatrix(&a, &rows).unwrap(), 1).unwrap();
        assert!((sub.constant - s.constant).abs() <= 1e-9 * s.constant);
    }
}

#[test]
fn io_estimate_and_mixed_check_are_seeded() {
    let a = sample_gaussian::<f64>(4, 6, 9).unwrap();
    let e1 = phaseless_io_condition_estimate(&a, 1, 50, 3).unwrap();
    let e2 = phaseless_io_condition_estimate(&a, 1, 50, 3).unwrap();
    assert_eq!(e1, e2);
    assert!(!e1.vacuous && e1.estimate > 0.0);
    let m1 = mixed_nsp_check(&a, 1, 2.0, 1.0, 1.0, 50, 4).unwrap();
    let m2 = mixed_nsp_check(&a, 1, 2.0, 1.0, m1.worst_ratio * 1.0001, 50, 4).unwrap();
    assert!(m1.violations > 0);
    assert_eq!(m2.violations, 0);
    assert!(mixed_nsp_check(&a, 1, 1.0, 2.0, 1.0, 10, 4).is_err());
}
