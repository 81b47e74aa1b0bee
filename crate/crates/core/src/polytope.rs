//! Sparse convex decompositions of `T(α,s) = {‖u‖∞ ≤ α, ‖u‖₁ ≤ sα}` and
//! the tail power-sum inequality.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::scalar::Real;
use crate::signals::Signal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct PolytopeDecomposition<T> {
    pub atoms: Vec<Signal<T>>,
    pub weights: Vec<T>,
    pub alpha: T,
    pub s: usize,
}

fn slack<T: Real>(scale: T) -> T {
    T::lit(1e-12) * scale.max(T::one())
}

pub fn polytope_membership<T: Real>(v: &Signal<T>, alpha: T, s: usize) -> bool {
    if !(alpha > T::zero()) || s == 0 {
        return false;
    }
    let x = v.as_slice();
    let inf = x.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    let l1: T = x.iter().map(|e| e.abs()).sum();
    let cap = alpha * T::from_usize_lossy(s);
    inf <= alpha + slack(alpha) && l1 <= cap + slack(cap)
}

/// Writes `v` as a convex combination of vectors with at most `s` nonzeros,
/// the same ℓ1 norm as `v` and entries bounded by `alpha`.
///
/// Works on magnitudes inside the capped simplex
/// `{0 ≤ u ≤ α, Σu = ‖v‖₁}` restricted to `supp(v)`: repeatedly peels off
/// the vertex that fills the largest entries up to `α`, with the largest step
/// that keeps the remainder inside the simplex. Each step pins one more
/// coordinate to `0` or `α`, so there are at most `N + 1` atoms.
pub fn sparse_decompose<T: Real>(v: &Signal<T>, alpha: T, s: usize) -> Result<PolytopeDecomposition<T>> {
    if !(alpha > T::zero()) || s == 0 {
        return input("alpha must be positive and s at least 1");
    }
    if !polytope_membership(v, alpha, s) {
        return input("vector is not a member of T(alpha, s)");
    }
    let n = v.len();
    let x = v.as_slice();
    let single = |sig: Signal<T>| PolytopeDecomposition {
        atoms: vec![sig],
        weights: vec![T::one()],
        alpha,
        s,
    };
    let nnz = x.iter().filter(|e| **e != T::zero()).count();
    if nnz <= s {
        return Ok(single(v.clone()));
    }

    let signs: Vec<T> = x.iter().map(|e| if *e < T::zero() { -T::one() } else { T::one() }).collect();
    let mut w: Vec<T> = x.iter().map(|e| e.abs().min(alpha)).collect();
    let snap = T::lit(1e-11) * alpha;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut remaining = T::one();
    let to_signal = |u: &[T]| Signal::new(u.iter().zip(&signs).map(|(a, b)| *a * *b).collect());

    for _ in 0..=2 * n + 2 {
        let live = w.iter().filter(|e| **e > T::zero()).count();
        if live <= s {
            break;
        }
        // greedy vertex on the largest entries; ties keep the lower index
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| w[j].partial_cmp(&w[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
        let mut u = vec![T::zero(); n];
        // mass of the remainder, which snapping may move off ‖v‖₁ by a crumb
        let mut left: T = w.iter().copied().sum();
        for &i in &order {
            if left <= snap {
                break;
            }
            let take = left.min(alpha);
            u[i] = take;
            left -= take;
        }
        let mut lambda = T::one();
        for i in 0..n {
            if u[i] > T::zero() {
                lambda = lambda.min(w[i] / u[i]);
            }
            if u[i] < alpha {
                lambda = lambda.min((alpha - w[i]) / (alpha - u[i]));
            }
        }
        if !(lambda > T::zero()) {
            return Err(Error::Solver("polytope peeling stalled".into()));
        }
        if lambda >= T::one() - T::epsilon() {
            break;
        }
        atoms.push(to_signal(&u)?);
        weights.push(remaining * lambda);
        remaining *= T::one() - lambda;
        for i in 0..n {
            let mut val = (w[i] - lambda * u[i]) / (T::one() - lambda);
            if val.abs() <= snap {
                val = T::zero();
            } else if (alpha - val).abs() <= snap {
                val = alpha;
            }
            w[i] = val.max(T::zero()).min(alpha);
        }
    }
    if w.iter().filter(|e| **e > T::zero()).count() > s {
        return Err(Error::Solver("polytope peeling did not terminate".into()));
    }
    atoms.push(to_signal(&w)?);
    weights.push(remaining);
    Ok(PolytopeDecomposition { atoms, weights, alpha, s })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// `Σ_{j>r} a_j^α ≤ r((Σ_{i≤r} a_i^α / r)^{1/α} + λ/r)^α` for a
/// nonincreasing nonnegative `a` with `Σ_{i≤r} a_i + λ ≥ Σ_{i>r} a_i`.
/// `r` counts entries, so the head is `a[..r]`.
pub fn tail_power_bound<T: Real>(a: &[T], r: usize, lambda: T, alpha: T) -> Result<TailBound<T>> {
    if r == 0 || r > a.len() {
        return input(format!("need 1 <= r <= {}, got {r}", a.len()));
    }
    if !(alpha >= T::one()) || !alpha.is_finite() {
        return input(format!("alpha = {alpha} must be at least 1"));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return input(format!("lambda = {lambda} must be nonnegative"));
    }
    if a.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
        return input("sequence must be finite and nonnegative");
    }
    if a.windows(2).any(|w| w[1] > w[0]) {
        return input("sequence must be nonincreasing");
    }
    let head: T = a[..r].iter().copied().sum();
    let tail: T = a[r..].iter().copied().sum();
    if head + lambda < tail - slack(tail) {
        return Err(Error::Precondition(format!(
            "head sum {head} plus lambda {lambda} is below tail sum {tail}"
        )));
    }
    let rf = T::from_usize_lossy(r);
    let lhs: T = a[r..].iter().map(|v| v.powf(alpha)).sum();
    let head_pow: T = a[..r].iter().map(|v| v.powf(alpha)).sum();
    let rhs = rf * ((head_pow / rf).powf(T::one() / alpha) + lambda / rf).powf(alpha);
    let holds = lhs <= rhs + T::lit(1e-12) * rhs.max(T::one());
    Ok(TailBound { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: &[f64]) -> Signal<f64> {
        Signal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(polytope_membership(&sig(&[0.5, 0.5]), 1.0, 1));
        assert!(!polytope_membership(&sig(&[1.2, 0.0]), 1.0, 3));
        assert!(!polytope_membership(&sig(&[0.9, 0.9]), 1.0, 1));
    }

    #[test]
    fn sparse_member_is_its_own_atom() {
        let v = sig(&[0.0, 0.3, 0.0, -0.2]);
        let d = sparse_decompose(&v, 1.0, 2).unwrap();
        assert_eq!(d.atoms, vec![v]);
        assert_eq!(d.weights, vec![1.0]);
        let z = sig(&[0.0, 0.0]);
        assert_eq!(sparse_decompose(&z, 1.0, 1).unwrap().atoms, vec![z]);
    }

    #[test]
    fn symmetric_split() {
        let d = sparse_decompose(&sig(&[0.5, 0.5]), 1.0, 1).unwrap();
        assert_eq!(d.atoms.len(), 2);
        assert_eq!(d.atoms[0].as_slice(), &[1.0, 0.0]);
        assert_eq!(d.atoms[1].as_slice(), &[0.0, 1.0]);
        assert_eq!(d.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn nonmember_rejected() {
        assert!(matches!(sparse_decompose(&sig(&[0.9, 0.9]), 1.0, 1), Err(Error::Input(_))));
    }

    #[test]
    fn tail_examples() {
        let t = tail_power_bound(&[1.0f64, 1.0, 1.0, 1.0], 2, 0.0, 2.0).unwrap();
        assert_eq!((t.lhs, t.rhs, t.holds), (2.0, 2.0, true));
        let t = tail_power_bound(&[3.0f64, 2.0, 1.0], 1, 0.0, 2.0).unwrap();
        assert_eq!((t.lhs, t.rhs, t.holds), (5.0, 9.0, true));
        let t = tail_power_bound(&[1.0f64, 1.0, 1.0], 1, 1.0, 1.0).unwrap();
        assert_eq!((t.lhs, t.rhs, t.holds), (2.0, 2.0, true));
        assert!(matches!(
            tail_power_bound(&[1.0f64, 1.0, 1.0], 1, 0.0, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(tail_power_bound(&[1.0f64, 2.0], 1, 0.0, 1.0).is_err());
    }
}
