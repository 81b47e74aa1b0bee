//! Signal vectors, ℓp norms, best k-term approximation and the sign-modded
//! distance `min(‖x−y‖, ‖x+y‖)`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::scalar::Real;

/// Default tolerance for [`canonical_sign`].
pub const SIGN_TOL: f64 = 1e-9;

/// A finite real N-vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Signal<T> {
    entries: Vec<T>,
}

impl<T: Real> Signal<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return input("signal must have at least one entry");
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return input(format!("signal entry {i} is not finite"));
        }
        Ok(Signal { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Signal {
            entries: vec![T::zero(); n.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn negated(&self) -> Self {
        Signal {
            entries: self.entries.iter().map(|&v| -v).collect(),
        }
    }

    /// Number of entries with magnitude above `tol`.
    pub fn support_size(&self, tol: T) -> usize {
        self.entries.iter().filter(|v| v.abs() > tol).count()
    }

    pub fn is_k_sparse(&self, k: usize, tol: T) -> bool {
        self.support_size(tol) <= k
    }

    /// One CSV row, `x_1,...,x_N` order.
    pub fn to_csv_row(&self) -> String {
        self.entries
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl<T: Real> TryFrom<Vec<T>> for Signal<T> {
    type Error = crate::error::Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Signal::new(v)
    }
}

impl<T> From<Signal<T>> for Vec<T> {
    fn from(s: Signal<T>) -> Vec<T> {
        s.entries
    }
}

pub fn csv_header(n: usize) -> String {
    (1..=n).map(|i| format!("x_{i}")).collect::<Vec<_>>().join(",")
}

/// Norm selector. `L0` is the support-counting "norm".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Norm<T> {
    L0,
    Lp(T),
    Inf,
}

impl<T: Real> Norm<T> {
    pub fn l1() -> Self {
        Norm::Lp(T::one())
    }

    pub fn l2() -> Self {
        Norm::Lp(T::lit(2.0))
    }

    /// Maps `p = ∞` onto [`Norm::Inf`].
    pub fn from_p(p: T) -> Result<Self> {
        if p.is_infinite() && p > T::zero() {
            Ok(Norm::Inf)
        } else if p > T::zero() {
            Ok(Norm::Lp(p))
        } else {
            input(format!("norm exponent must be positive, got {p}"))
        }
    }
}

/// ℓp norm of a raw slice. `p` must be positive (callers validate).
pub fn norm_of<T: Real>(x: &[T], norm: Norm<T>) -> T {
    match norm {
        Norm::L0 => T::from_usize_lossy(x.iter().filter(|v| **v != T::zero()).count()),
        Norm::Inf => x.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        Norm::Lp(p) if p == T::one() => x.iter().map(|v| v.abs()).sum(),
        Norm::Lp(p) if p == T::lit(2.0) => crate::linalg::norm2(x),
        Norm::Lp(p) => {
            let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if scale == T::zero() {
                return T::zero();
            }
            let s: T = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
            scale * s.powf(T::one() / p)
        }
    }
}

pub fn lp_norm<T: Real>(x: &Signal<T>, norm: Norm<T>) -> Result<T> {
    if let Norm::Lp(p) = norm {
        if !(p > T::zero()) {
            return input(format!("norm exponent must be positive, got {p}"));
        }
    }
    Ok(norm_of(x.as_slice(), norm))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct SparseApprox<T> {
    /// σ_k(x)_q
    pub value: T,
    /// Retained indices, ascending, 0-based.
    pub support: Vec<usize>,
    /// `x` with the retained entries zeroed.
    pub residual: Signal<T>,
}

/// Indices of the `k` largest-magnitude entries, ascending. Ties go to the
/// lower index.
pub fn top_k_indices<T: Real>(x: &[T], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| {
        x[j].abs()
            .partial_cmp(&x[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut kept: Vec<usize> = order.into_iter().take(k).collect();
    kept.sort_unstable();
    kept
}

/// σ_k(x)_q of a raw slice (q ≥ 1, unchecked).
pub fn sigma_k_of<T: Real>(x: &[T], k: usize, q: T) -> T {
    if k >= x.len() {
        return T::zero();
    }
    let kept = top_k_indices(x, k);
    let mut r = x.to_vec();
    for i in kept {
        r[i] = T::zero();
    }
    norm_of(&r, q_norm(q))
}

fn q_norm<T: Real>(q: T) -> Norm<T> {
    if q.is_infinite() {
        Norm::Inf
    } else {
        Norm::Lp(q)
    }
}

pub fn best_k_term<T: Real>(x: &Signal<T>, k: usize, q: T) -> Result<SparseApprox<T>> {
    if k > x.len() {
        return input(format!("k = {k} exceeds signal length {}", x.len()));
    }
    if !(q >= T::one()) {
        return input(format!("best k-term error needs q >= 1, got {q}"));
    }
    let support = top_k_indices(x.as_slice(), k);
    let mut r = x.as_slice().to_vec();
    for &i in &support {
        r[i] = T::zero();
    }
    let value = norm_of(&r, q_norm(q));
    Ok(SparseApprox {
        value,
        support,
        residual: Signal { entries: r },
    })
}

pub fn sim_distance_of<T: Real>(x: &[T], y: &[T], norm: Norm<T>) -> T {
    let d: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
    let s: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a + b).collect();
    norm_of(&d, norm).min(norm_of(&s, norm))
}

/// `min(‖x−y‖, ‖x+y‖)`
pub fn sim_distance<T: Real>(x: &Signal<T>, y: &Signal<T>, norm: Norm<T>) -> Result<T> {
    if x.len() != y.len() {
        return input(format!("length mismatch: {} vs {}", x.len(), y.len()));
    }
    if let Norm::Lp(p) = norm {
        if !(p > T::zero()) {
            return input(format!("norm exponent must be positive, got {p}"));
        }
    }
    Ok(sim_distance_of(x.as_slice(), y.as_slice(), norm))
}

/// Picks the representative of `{x, −x}` whose first entry above `tol` in
/// magnitude is positive.
pub fn canonical_sign<T: Real>(x: &Signal<T>, tol: T) -> Signal<T> {
    match x.as_slice().iter().find(|v| v.abs() > tol) {
        Some(v) if *v < T::zero() => x.negated(),
        _ => x.clone(),
    }
}

pub(crate) fn canonical_sign_vec<T: Real>(x: Vec<T>, tol: T) -> Vec<T> {
    match x.iter().find(|v| v.abs() > tol) {
        Some(v) if *v < T::zero() => x.into_iter().map(|v| -v).collect(),
        _ => x,
    }
}
