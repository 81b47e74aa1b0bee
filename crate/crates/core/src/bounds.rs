//! Closed-form constants and thresholds for the stability and instance
//! optimality guarantees.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::scalar::Real;

fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

fn check_theta<T: Real>(name: &str, v: T) -> Result<()> {
    if !(v > T::zero() && v < T::lit(2.0)) {
        return domain(format!("{name} = {v} must lie in (0, 2)"));
    }
    Ok(())
}

/// `c₁`, `c₂` of the RIP stability bound together with the slack `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants<T> {
    pub c1: T,
    pub c2: T,
    pub delta: T,
    pub t: T,
    pub rho: T,
}

impl<T: Real> StabilityConstants<T> {
    /// `c₁ε + c₂(2σ + ρ)/√k`.
    pub fn rhs(&self, eps: T, sigma: T, k: usize) -> T {
        let k = T::from_usize_lossy(k.max(1));
        self.c1 * eps + self.c2 * (T::lit(2.0) * sigma + self.rho) / k.sqrt()
    }
}

pub fn stability_constants<T: Real>(delta: T, t: T, rho: T) -> Result<StabilityConstants<T>> {
    let one = T::one();
    if !(t > one) || !t.is_finite() {
        return domain(format!("t = {t} must exceed 1"));
    }
    if !(rho >= T::zero()) {
        return domain(format!("slack rho = {rho} must be nonnegative"));
    }
    if !(delta >= T::zero()) {
        return domain(format!("delta = {delta} must be nonnegative"));
    }
    let limit = ((t - one) / t).sqrt();
    if delta >= limit {
        return domain(format!(
            "delta = {delta} >= sqrt((t-1)/t) = {limit}: denominator 1 - sqrt(t/(t-1))*delta is not positive"
        ));
    }
    let two = T::lit(2.0);
    let den1 = one - (t / (t - one)).sqrt() * delta;
    let c1 = (two * (one + delta)).sqrt() / den1;
    let s = (t * (t - one)).sqrt();
    let den2 = s - delta * t;
    let c2 = (two.sqrt() * delta + ((s - delta * t) * delta).sqrt()) / den2 + one;
    Ok(StabilityConstants { c1, c2, delta, t, rho })
}

/// Smallest `t` for which S-RIP constants `θ₋, θ₊` yield stability.
pub fn srip_stability_threshold<T: Real>(theta_minus: T, theta_plus: T) -> Result<T> {
    check_theta("theta_minus", theta_minus)?;
    check_theta("theta_plus", theta_plus)?;
    let two = T::lit(2.0);
    let lo = T::one() / (two * theta_minus - theta_minus * theta_minus);
    let hi = T::one() / (two * theta_plus - theta_plus * theta_plus);
    Ok(lo.max(hi))
}

/// RIP constant implied by S-RIP bounds.
pub fn rip_from_srip<T: Real>(theta_minus: T, theta_plus: T) -> Result<T> {
    check_theta("theta_minus", theta_minus)?;
    check_theta("theta_plus", theta_plus)?;
    let one = T::one();
    Ok((one - theta_minus).max(theta_plus - one).max(T::zero()))
}

/// `1 + √(a(1+δ)/(b(1−δ)))`.
pub fn nsp_const_from_rip<T: Real>(a: usize, b: usize, delta: T) -> Result<T> {
    if a == 0 || b == 0 {
        return domain("a and b must be positive integers");
    }
    if !(delta >= T::zero() && delta < T::one()) {
        return domain(format!("delta = {delta} must lie in [0, 1)"));
    }
    let one = T::one();
    let ratio = T::from_usize_lossy(a) * (one + delta) / (T::from_usize_lossy(b) * (one - delta));
    Ok(one + ratio.sqrt())
}

/// The instance-optimality factor `2C₀/(2−C₀)`, or a tag when `C₀ ≥ 2`
/// leaves the guarantee vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum IoFactor<T> {
    Finite(T),
    BoundaryDegenerate,
}

impl<T: Real> IoFactor<T> {
    pub fn finite(&self) -> Option<T> {
        match *self {
            IoFactor::Finite(v) => Some(v),
            IoFactor::BoundaryDegenerate => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IoConstants<T> {
    pub c0: T,
    pub c: IoFactor<T>,
    pub t: T,
    /// `max{2/θ₋, 2/(2−θ₊)}`.
    pub threshold: T,
    pub theta_minus: T,
    pub theta_plus: T,
    pub delta: T,
}

pub fn l1_io_threshold<T: Real>(theta_minus: T, theta_plus: T) -> Result<T> {
    check_theta("theta_minus", theta_minus)?;
    check_theta("theta_plus", theta_plus)?;
    let two = T::lit(2.0);
    Ok((two / theta_minus).max(two / (two - theta_plus)))
}

pub fn l1_io_constants<T: Real>(theta_minus: T, theta_plus: T, t: T) -> Result<IoConstants<T>> {
    let threshold = l1_io_threshold(theta_minus, theta_plus)?;
    if !(t >= threshold * (T::one() - T::lit(1e-12))) {
        return domain(format!("t = {t} is below the required threshold {threshold}"));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let delta = rip_from_srip(theta_minus, theta_plus)?;
    let c0 = one + ((one + delta) / ((t - one) * (one - delta))).sqrt();
    let c = if c0 < two {
        IoFactor::Finite(two * c0 / (two - c0))
    } else {
        IoFactor::BoundaryDegenerate
    };
    Ok(IoConstants {
        c0,
        c,
        t,
        threshold,
        theta_minus,
        theta_plus,
        delta,
    })
}

/// `k̃ = k(N/k)^{2−2/q}`.
pub fn mixed_ktilde<T: Real>(k: usize, n: usize, q: T) -> Result<T> {
    if k == 0 || k > n {
        return input(format!("need 1 <= k <= N, got k = {k}, N = {n}"));
    }
    let (one, two) = (T::one(), T::lit(2.0));
    if !(q >= one && q <= two) {
        return input(format!("q = {q} must lie in [1, 2]"));
    }
    let (kf, nf) = (T::from_usize_lossy(k), T::from_usize_lossy(n));
    if q == one {
        return Ok(kf);
    }
    if q == two {
        return Ok(nf);
    }
    Ok(kf * (nf / kf).powf(two - two / q))
}

/// `2^{1/p+1/2}√((1+δ)/(1−δ)) + 2^{1/p−1/q}`.
pub fn mixed_nsp_constant<T: Real>(delta: T, p: T, q: T) -> Result<T> {
    let (one, two) = (T::one(), T::lit(2.0));
    if !(delta >= T::zero() && delta < one) {
        return input(format!("delta = {delta} must lie in [0, 1)"));
    }
    if !(q >= one && q <= p && p <= two) {
        return input(format!("need 1 <= q <= p <= 2, got p = {p}, q = {q}"));
    }
    let half = T::lit(0.5);
    Ok(two.powf(one / p + half) * ((one + delta) / (one - delta)).sqrt() + two.powf(one / p - one / q))
}

/// Rounds a real order `t·k` up to an integer: returns `(⌈tk⌉, ⌈tk⌉/k)`.
/// Products within `1e-9` of an integer are snapped to it first.
pub fn round_order<T: Real>(t: T, k: usize) -> Result<(usize, T)> {
    if k == 0 {
        return input("k must be positive");
    }
    if !(t > T::zero()) || !t.is_finite() {
        return input(format!("t = {t} must be positive and finite"));
    }
    let tk = t * T::from_usize_lossy(k);
    let near = tk.round();
    let order = if (tk - near).abs() <= T::lit(1e-9) * near.max(T::one()) {
        near
    } else {
        tk.ceil()
    };
    let order = order.to_usize().ok_or_else(|| Error::Input(format!("order {tk} too large")))?;
    Ok((order, T::from_usize_lossy(order) / T::from_usize_lossy(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stability_examples() {
        let s = stability_constants(0.0f64, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(s.c1, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(s.c2, 1.0);
        let s = stability_constants(0.5f64, 4.0, 0.0).unwrap();
        assert_abs_diff_eq!(s.c1, 4.09808, epsilon = 1e-4);
        assert_abs_diff_eq!(s.c2, 2.06735, epsilon = 1e-4);
        let lim = (0.75f64).sqrt();
        assert!(matches!(stability_constants(lim, 4.0, 0.0), Err(Error::Domain(_))));
        let near = stability_constants(lim - 1e-9, 4.0, 0.0).unwrap();
        assert!(near.c1 > 1e6);
    }

    #[test]
    fn rhs_uses_slack() {
        let s = stability_constants(0.0f64, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.rhs(0.0, 0.0, 4), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rhs(1.0, 0.5, 1), 2f64.sqrt() + 2.0, epsilon = 1e-15);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(srip_stability_threshold(1.0f64, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(srip_stability_threshold(0.5f64, 1.5).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(srip_stability_threshold(1e-12f64, 1.0).unwrap() > 1e11);
        assert!(srip_stability_threshold(0.0f64, 1.0).is_err());
        assert!(srip_stability_threshold(1.0f64, 2.0).is_err());
    }

    #[test]
    fn rip_from_srip_examples() {
        assert_eq!(rip_from_srip(1.0f64, 1.0).unwrap(), 0.0);
        assert_eq!(rip_from_srip(0.5f64, 1.5).unwrap(), 0.5);
        assert_abs_diff_eq!(rip_from_srip(0.9f64, 1.05).unwrap(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn nsp_from_rip_examples() {
        assert_eq!(nsp_const_from_rip(3, 3, 0.0f64).unwrap(), 2.0);
        assert_abs_diff_eq!(nsp_const_from_rip(2, 1, 0.5f64).unwrap(), 1.0 + 6f64.sqrt(), epsilon = 1e-14);
        assert!(nsp_const_from_rip(2, 1, 1.0f64).is_err());
        assert!(nsp_const_from_rip(2, 1, 1.0 - 1e-12f64).unwrap() > 1e5);
    }

    #[test]
    fn io_examples() {
        let c = l1_io_constants(1.0f64, 1.0, 2.0).unwrap();
        assert_eq!(c.threshold, 2.0);
        assert_eq!(c.c0, 2.0);
        assert_eq!(c.c, IoFactor::BoundaryDegenerate);
        let c = l1_io_constants(0.5f64, 1.5, 4.0).unwrap();
        assert_eq!(c.threshold, 4.0);
        assert_eq!(c.c, IoFactor::BoundaryDegenerate);
        let c = l1_io_constants(0.5f64, 1.5, 8.0).unwrap();
        assert_abs_diff_eq!(c.c0, 1.65465, epsilon = 1e-4);
        assert_abs_diff_eq!(c.c.finite().unwrap(), 9.58258, epsilon = 1e-4);
        match l1_io_constants(0.5f64, 1.5, 3.0) {
            Err(Error::Domain(msg)) => assert!(msg.contains('4')),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_examples() {
        assert_eq!(mixed_ktilde(3, 7, 1.0f64).unwrap(), 3.0);
        assert_eq!(mixed_ktilde(3, 7, 2.0f64).unwrap(), 7.0);
        assert_abs_diff_eq!(mixed_ktilde(4, 64, 4.0f64 / 3.0).unwrap(), 16.0, epsilon = 1e-12);
        assert!(mixed_ktilde(0, 7, 1.5f64).is_err());
        assert!(mixed_ktilde(2, 7, 2.5f64).is_err());
        assert_abs_diff_eq!(mixed_nsp_constant(0.0f64, 2.0, 1.0).unwrap(), 2.0 + 0.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(mixed_nsp_constant(0.0f64, 1.0, 1.0).unwrap(), 8f64.sqrt() + 1.0, epsilon = 1e-14);
        assert!(mixed_nsp_constant(0.0f64, 1.0, 2.0).is_err());
    }

    #[test]
    fn order_rounding() {
        assert_eq!(round_order(2.0f64, 3).unwrap(), (6, 2.0));
        assert_eq!(round_order(4.0f64 / 3.0, 3).unwrap(), (4, 4.0 / 3.0));
        let (o, ts) = round_order(1.1f64, 2).unwrap();
        assert_eq!(o, 3);
        assert_eq!(ts, 1.5);
    }

    #[test]
    fn works_in_f32() {
        let s = stability_constants(0.5f32, 4.0, 0.0).unwrap();
        assert!((s.c1 - 4.09808).abs() < 1e-3);
    }
}
