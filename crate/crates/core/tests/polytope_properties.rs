use cpr_core::polytope::{polytope_membership, sparse_decompose, tail_power_bound};
use cpr_core::signals::Signal;
use proptest::prelude::*;

fn member() -> impl Strategy<Value = (Vec<f64>, f64, usize)> {
    (1usize..9, 0.1f64..4.0).prop_flat_map(|(n, alpha)| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), -1.0f64..=1.0, Just(1.0), Just(-1.0)], n),
            Just(alpha),
            1usize..=n,
            0.0f64..=1.0,
        )
            .prop_map(|(raw, alpha, s, fill)| {
                let mut v: Vec<f64> = raw.iter().map(|x| x * alpha).collect();
                let l1: f64 = v.iter().map(|x| x.abs()).sum();
                let cap = alpha * s as f64;
                if l1 > 0.0 {
                    // either push onto the ℓ1 face or stay inside
                    let f = if l1 > cap { cap / l1 } else { 1.0 };
                    let f = if fill > 0.8 { (cap / l1).min(1.0) } else { f };
                    v.iter_mut().for_each(|x| *x *= f);
                }
                (v, alpha, s)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn decomposition_invariants((v, alpha, s) in member()) {
        let sig = Signal::new(v.clone()).unwrap();
        prop_assert!(polytope_membership(&sig, alpha, s));
        let d = sparse_decompose(&sig, alpha, s).unwrap();
        prop_assert!(d.atoms.len() <= v.len() + 1);
        prop_assert!((d.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        let mut recon = vec![0.0; v.len()];
        for (u, w) in d.atoms.iter().zip(&d.weights) {
            prop_assert!(*w >= 0.0);
            let u = u.as_slice();
            prop_assert!(u.iter().filter(|x| **x != 0.0).count() <= s);
            prop_assert!(u.iter().zip(&v).all(|(a, b)| *a == 0.0 || (*b != 0.0 && a.signum() == b.signum())));
            prop_assert!((u.iter().map(|x| x.abs()).sum::<f64>() - l1).abs() <= 1e-9);
            prop_assert!(u.iter().all(|x| x.abs() <= alpha + 1e-12));
            for (r, x) in recon.iter_mut().zip(u) {
                *r += w * x;
            }
        }
        prop_assert!(recon.iter().zip(&v).all(|(r, x)| (r - x).abs() <= 1e-9));
    }

    #[test]
    fn membership_is_sign_and_permutation_invariant((v, alpha, s) in member(), rot in 0usize..8) {
        let mut w: Vec<f64> = v.iter().map(|x| -x).collect();
        let r = rot % w.len();
        w.rotate_left(r);
        prop_assert_eq!(
            polytope_membership(&Signal::new(v).unwrap(), alpha, s),
            polytope_membership(&Signal::new(w).unwrap(), alpha, s)
        );
    }

    #[test]
    fn outside_points_are_rejected((v, alpha, s) in member()) {
        let mut w = v.clone();
        w[0] = alpha * 1.01 * if v[0] < 0.0 { -1.0 } else { 1.0 };
        let sig = Signal::new(w).unwrap();
        prop_assert!(!polytope_membership(&sig, alpha, s));
        prop_assert!(sparse_decompose(&sig, alpha, s).is_err());
    }

    #[test]
    fn tail_bound_without_lambda(mut a in prop::collection::vec(0.0f64..3.0, 1..12), r in 1usize..12, alpha in 1.0f64..4.0) {
        a.sort_by(|x, y| y.total_cmp(x));
        let r = r.min(a.len());
        let head: f64 = a[..r].iter().sum();
        let tail: f64 = a[r..].iter().sum();
        prop_assume!(head >= tail);
        let t = tail_power_bound(&a, r, 0.0, alpha).unwrap();
        prop_assert!(t.holds);
        let head_pow: f64 = a[..r].iter().map(|x| x.powf(alpha)).sum();
        prop_assert!(t.lhs <= head_pow * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn tail_bound_rejects_failed_hypothesis() {
    let e = tail_power_bound(&[1.0, 1.0, 1.0, 1.0], 1, 0.5, 2.0).unwrap_err();
    assert!(matches!(e, cpr_core::Error::Precondition(_)));
    assert!(tail_power_bound(&[1.0, 2.0], 1, 0.0, 2.0).is_err());
    assert!(tail_power_bound(&[2.0, 1.0], 1, 0.0, 0.5).is_err());
}

#[test]
fn zero_vector_is_one_atom() {
    let d = sparse_decompose(&Signal::new(vec![0.0; 4]).unwrap(), 1.0, 2).unwrap();
    assert_eq!(d.atoms.len(), 1);
    assert!(d.atoms[0].as_slice().iter().all(|x| *x == 0.0));
}
