//! Phaseless ℓ1 decoders. The exact ones enumerate sign patterns `s` with
//! `s₁ = +1` and solve a convex problem for `Ax ≈ s∘b` under each.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::{stability_constants, StabilityConstants};
use crate::combin::{binomial, Combinations};
use crate::error::{input, Error, Result};
use crate::linalg::{self, norm2, Matrix};
use crate::measurements::{sign_of, MeasurementMatrix, Observation};
use crate::optim::{
    min_l1_offsupport_affine_with, residual_ball_capped, LpOptions, ResidualBallOptions,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Real;
use crate::signals::{canonical_sign_vec, sigma_k_of, sim_distance_of, Norm, Signal, SIGN_TOL};

/// A vector in `{−1, +1}^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|s| *s != 1 && *s != -1) {
            return input("sign pattern entries must be +1 or -1");
        }
        Ok(SignPattern { signs })
    }

    /// The `index`-th pattern of length `m` with first entry `+1`, in
    /// lexicographic order where `+1` precedes `−1`.
    pub fn from_index(m: usize, index: u64) -> Self {
        let signs = (0..m)
            .map(|j| {
                if j == 0 {
                    1
                } else if index >> (m - 1 - j) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        SignPattern { signs }
    }

    /// `sign(v)` entrywise with `sign(0) = +1`.
    pub fn of_values<T: Real>(v: &[T]) -> Self {
        SignPattern {
            signs: v.iter().map(|x| if sign_of(*x) < T::zero() { -1 } else { 1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn negated(&self) -> Self {
        SignPattern {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// Representative of `{s, −s}` with first entry `+1`.
    pub fn canonical(&self) -> Self {
        if self.signs.first() == Some(&-1) {
            self.negated()
        } else {
            self.clone()
        }
    }

    /// `s∘b`.
    pub fn apply<T: Real>(&self, b: &[T]) -> Vec<T> {
        self.signs
            .iter()
            .zip(b)
            .map(|(s, v)| if *s < 0 { -*v } else { *v })
            .collect()
    }
}

impl TryFrom<Vec<i8>> for SignPattern {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        SignPattern::new(v)
    }
}

impl From<SignPattern> for Vec<i8> {
    fn from(p: SignPattern) -> Vec<i8> {
        p.signs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct DecodeResult<T> {
    /// Sign-canonical: first significant entry positive.
    pub x_hat: Signal<T>,
    /// `‖x̂‖₁`, or `σ_k(x̂)₁` for the σ_k decoder.
    pub objective: T,
    /// Pattern (modulo global flip) under which `x̂` or `−x̂` is optimal.
    pub pattern: SignPattern,
    /// Excess of `‖|Ax̂| − b‖₂` over the allowed radius.
    pub feasibility_residual: T,
    pub patterns_explored: u64,
    pub exact: bool,
    pub converged: bool,
    /// Objective after each accepted iteration of the alternating decoder.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions<T> {
    /// Largest `m` for pattern enumeration.
    pub max_m: usize,
    /// Largest `C(N,k)·2^{m−1}` for the σ_k decoder.
    pub max_sigma_subproblems: u128,
    /// Patterns whose objective is within `tie_tol·(1+best)` of the best
    /// lose to the earlier pattern.
    pub tie_tol: T,
    /// Relative tolerance of the range test `Ax = s∘b`.
    pub feas_tol: T,
    pub lp: LpOptions<T>,
    pub ball: ResidualBallOptions<T>,
}

impl<T: Real> Default for DecodeOptions<T> {
    fn default() -> Self {
        DecodeOptions {
            max_m: 20,
            max_sigma_subproblems: 10_000_000,
            tie_tol: T::lit(1e-9),
            feas_tol: T::lit(1e-8),
            lp: LpOptions::default(),
            ball: ResidualBallOptions::default(),
        }
    }
}

fn check_dims<T: Real>(a: &MeasurementMatrix<T>, obs: &Observation<T>) -> Result<()> {
    if obs.len() != a.m() {
        return input(format!("observation has {} entries, matrix has {} rows", obs.len(), a.m()));
    }
    Ok(())
}

fn check_cap<T: Real>(m: usize, opts: &DecodeOptions<T>) -> Result<()> {
    if m > opts.max_m || m > 62 {
        return Err(Error::Capacity(format!(
            "m = {m} exceeds the enumeration cap of {}; use the alternating decoder",
            opts.max_m
        )));
    }
    Ok(())
}

fn check_noiseless<T: Real>(obs: &Observation<T>) -> Result<()> {
    if obs.noise_level > T::zero() {
        return Err(Error::Precondition(format!(
            "exact-equality decoder needs a noiseless observation, noise level is {}",
            obs.noise_level
        )));
    }
    Ok(())
}

fn abs_residual<T: Real>(a: &Matrix<T>, x: &[T], b: &[T]) -> T {
    let ax: Vec<T> = a.matvec(x).into_iter().map(|v| v.abs()).collect();
    norm2(&linalg::sub(&ax, b))
}

fn improves<T: Real>(candidate: T, best: Option<T>, tie_tol: T) -> bool {
    match best {
        None => true,
        Some(b) => candidate < b - tie_tol * (T::one() + b.abs()),
    }
}

/// Screens patterns whose `s∘b` is not in the range of `A`.
struct RangeTest<T> {
    basis: Vec<Vec<T>>,
    scale: T,
}

impl<T: Real> RangeTest<T> {
    fn new(a: &Matrix<T>, b: &[T]) -> Self {
        RangeTest {
            basis: linalg::range_basis(a, T::lit(1e-11).max(T::epsilon() * T::lit(64.0))),
            scale: T::one() + norm2(b),
        }
    }

    fn floor(&self, d: &[T]) -> T {
        linalg::residual_off_basis(&self.basis, d)
    }
}

/// `min ‖x‖₁ s.t. |Ax| = b`.
pub fn decode_noiseless_l1<T: Real>(a: &MeasurementMatrix<T>, obs: &Observation<T>) -> Result<DecodeResult<T>> {
    decode_noiseless_l1_with(a, obs, &DecodeOptions::default())
}

pub fn decode_noiseless_l1_with<T: Real>(
    a: &MeasurementMatrix<T>,
    obs: &Observation<T>,
    opts: &DecodeOptions<T>,
) -> Result<DecodeResult<T>> {
    check_dims(a, obs)?;
    check_noiseless(obs)?;
    check_cap(a.m(), opts)?;
    exact_equality(a, &obs.b, opts)
}

fn exact_equality<T: Real>(a: &MeasurementMatrix<T>, b: &[T], opts: &DecodeOptions<T>) -> Result<DecodeResult<T>> {
    let m = a.m();
    let mat = a.matrix();
    let range = RangeTest::new(mat, b);
    let count = 1u64 << (m - 1);
    let mut best: Option<(T, Vec<T>, SignPattern)> = None;
    let mut min_floor = T::infinity();
    for idx in 0..count {
        let pattern = SignPattern::from_index(m, idx);
        let d = pattern.apply(b);
        let floor = range.floor(&d);
        min_floor = min_floor.min(floor);
        if floor > opts.feas_tol * range.scale {
            continue;
        }
        let lp = min_l1_offsupport_affine_with(mat, &d, &[], &opts.lp)?;
        if !lp.is_optimal() {
            continue;
        }
        if improves(lp.objective, best.as_ref().map(|b| b.0), opts.tie_tol) {
            best = Some((lp.objective, lp.point, pattern));
        }
    }
    let (_, x, pattern) = best.ok_or_else(|| Error::Infeasible {
        message: "no sign pattern makes Ax = s∘b consistent".into(),
        min_residual: min_floor.to_f64_lossy(),
    })?;
    let x = canonical_sign_vec(x, T::lit(SIGN_TOL));
    let objective = x.iter().map(|v| v.abs()).sum();
    let feasibility_residual = abs_residual(mat, &x, b);
    Ok(DecodeResult {
        x_hat: Signal::new(x)?,
        objective,
        pattern,
        feasibility_residual,
        patterns_explored: count,
        exact: true,
        converged: true,
        objective_trace: Vec::new(),
    })
}

/// `min ‖x‖₁ s.t. ‖|Ax| − b⁺‖₂ ≤ eps` with `b⁺ = max(b, 0)`.
pub fn decode_noisy_l1<T: Real>(a: &MeasurementMatrix<T>, obs: &Observation<T>, eps: T) -> Result<DecodeResult<T>> {
    decode_noisy_l1_with(a, obs, eps, &DecodeOptions::default())
}

pub fn decode_noisy_l1_with<T: Real>(
    a: &MeasurementMatrix<T>,
    obs: &Observation<T>,
    eps: T,
    opts: &DecodeOptions<T>,
) -> Result<DecodeResult<T>> {
    check_dims(a, obs)?;
    if !(eps >= T::zero()) || !eps.is_finite() {
        return input(format!("eps must be finite and nonnegative, got {eps}"));
    }
    check_cap(a.m(), opts)?;
    let b = obs.clamped_values();
    if eps == T::zero() {
        return exact_equality(a, &b, opts);
    }
    let m = a.m();
    let mat = a.matrix();
    let range = RangeTest::new(mat, &b);
    let count = 1u64 << (m - 1);
    let mut best: Option<(T, Vec<T>, SignPattern)> = None;
    let mut min_floor = T::infinity();
    for idx in 0..count {
        let pattern = SignPattern::from_index(m, idx);
        let d = pattern.apply(&b);
        let floor = range.floor(&d);
        min_floor = min_floor.min(floor);
        if floor > eps * (T::one() + T::lit(1e-12)) {
            continue;
        }
        let cap = best.as_ref().map(|b| b.0);
        let sol = match residual_ball_capped(mat, &d, eps, cap, &opts.ball) {
            Ok(Some(sol)) => sol,
            Ok(None) | Err(Error::Infeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        if improves(sol.objective, cap, opts.tie_tol) {
            best = Some((sol.objective, sol.x, pattern));
        }
    }
    let (_, x, pattern) = best.ok_or_else(|| Error::Infeasible {
        message: format!("no x satisfies ‖|Ax| − b⁺‖₂ ≤ {eps}"),
        min_residual: min_floor.to_f64_lossy(),
    })?;
    let x = canonical_sign_vec(x, T::lit(SIGN_TOL));
    let objective = x.iter().map(|v| v.abs()).sum();
    let feasibility_residual = (abs_residual(mat, &x, &b) - eps).max(T::zero());
    Ok(DecodeResult {
        x_hat: Signal::new(x)?,
        objective,
        pattern,
        feasibility_residual,
        patterns_explored: count,
        exact: true,
        converged: true,
        objective_trace: Vec::new(),
    })
}

/// `min σ_k(x)₁ s.t. |Ax| = b`, by enumerating patterns and supports.
pub fn decode_sigma_k<T: Real>(a: &MeasurementMatrix<T>, obs: &Observation<T>, k: usize, q: T) -> Result<DecodeResult<T>> {
    decode_sigma_k_with(a, obs, k, q, &DecodeOptions::default())
}

pub fn decode_sigma_k_with<T: Real>(
    a: &MeasurementMatrix<T>,
    obs: &Observation<T>,
    k: usize,
    q: T,
    opts: &DecodeOptions<T>,
) -> Result<DecodeResult<T>> {
    if q != T::one() {
        return Err(Error::Unsupported(format!(
            "exact σ_k decoding is only available for q = 1, got q = {q}"
        )));
    }
    check_dims(a, obs)?;
    check_noiseless(obs)?;
    let (m, n) = (a.m(), a.n());
    if k > n {
        return input(format!("k = {k} exceeds N = {n}"));
    }
    check_cap(m, opts)?;
    let work = binomial(n, k).saturating_mul(1u128 << (m - 1));
    if work > opts.max_sigma_subproblems {
        return Err(Error::Capacity(format!(
            "C(N,k)·2^(m-1) = {work} exceeds the cap of {}",
            opts.max_sigma_subproblems
        )));
    }
    let mat = a.matrix();
    let b = &obs.b;
    let range = RangeTest::new(mat, b);
    let count = 1u64 << (m - 1);
    let mut best: Option<(T, Vec<T>, SignPattern)> = None;
    let mut min_floor = T::infinity();
    for idx in 0..count {
        let pattern = SignPattern::from_index(m, idx);
        let d = pattern.apply(b);
        let floor = range.floor(&d);
        min_floor = min_floor.min(floor);
        if floor > opts.feas_tol * range.scale {
            continue;
        }
        for support in Combinations::new(n, k) {
            let lp = min_l1_offsupport_affine_with(mat, &d, &support, &opts.lp)?;
            if !lp.is_optimal() {
                continue;
            }
            if improves(lp.objective, best.as_ref().map(|b| b.0), opts.tie_tol) {
                best = Some((lp.objective, lp.point, pattern.clone()));
            }
        }
    }
    let (_, x, pattern) = best.ok_or_else(|| Error::Infeasible {
        message: "no sign pattern makes Ax = s∘b consistent".into(),
        min_residual: min_floor.to_f64_lossy(),
    })?;
    let x = canonical_sign_vec(x, T::lit(SIGN_TOL));
    let objective = sigma_k_of(&x, k, T::one());
    let feasibility_residual = abs_residual(mat, &x, b);
    Ok(DecodeResult {
        x_hat: Signal::new(x)?,
        objective,
        pattern,
        feasibility_residual,
        patterns_explored: count,
        exact: true,
        converged: true,
        objective_trace: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingOptions<T> {
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Starting point of the first restart; the rest start from Gaussian draws.
    pub init: Option<Vec<T>>,
    /// While a pattern is infeasible the step solves the ℓ1 problem with
    /// radius `relax·floor`; values `<= 1` fall back to least squares.
    pub relax: T,
    pub ball: ResidualBallOptions<T>,
}

impl<T: Real> Default for AlternatingOptions<T> {
    fn default() -> Self {
        AlternatingOptions {
            max_iters: 50,
            restarts: 10,
            seed: 0,
            init: None,
            relax: T::lit(2.0),
            ball: ResidualBallOptions::default(),
        }
    }
}

struct Run<T> {
    x: Vec<T>,
    pattern: SignPattern,
    feasible: bool,
    objective: T,
    converged: bool,
    iters: u64,
    trace: Vec<T>,
}

/// Alternates `s ← sign(Ax)` with the convex solve for that pattern. While
/// the pattern admits no point in the residual ball, the radius is widened
/// to a multiple of the least-squares floor for that step.
pub fn decode_alternating<T: Real>(
    a: &MeasurementMatrix<T>,
    obs: &Observation<T>,
    eps: T,
    opts: &AlternatingOptions<T>,
) -> Result<DecodeResult<T>> {
    check_dims(a, obs)?;
    if opts.max_iters == 0 {
        return input("max_iters must be at least 1");
    }
    if !(eps >= T::zero()) || !eps.is_finite() {
        return input(format!("eps must be finite and nonnegative, got {eps}"));
    }
    let n = a.n();
    if let Some(init) = &opts.init {
        if init.len() != n {
            return input(format!("initial point has {} entries, N = {n}", init.len()));
        }
    }
    let b = obs.clamped_values();
    let mat = a.matrix();
    let restarts = opts.restarts.max(1);
    let mut best: Option<Run<T>> = None;
    let mut total_iters = 0u64;
    for r in 0..restarts {
        let start = match (&opts.init, r) {
            (Some(init), 0) => init.clone(),
            _ => {
                let mut rng = rng_from_seed(derive_seed(opts.seed, r as u64));
                (0..n)
                    .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            }
        };
        let run = alternate(mat, &b, eps, start, opts)?;
        total_iters += run.iters;
        let better = match &best {
            None => true,
            Some(cur) => match (run.feasible, cur.feasible) {
                (true, false) => true,
                (false, true) => false,
                _ => run.objective < cur.objective - T::lit(1e-12) * (T::one() + cur.objective),
            },
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    let x = canonical_sign_vec(run.x, T::lit(SIGN_TOL));
    let objective = x.iter().map(|v| v.abs()).sum();
    let feasibility_residual = (abs_residual(mat, &x, &b) - eps).max(T::zero());
    Ok(DecodeResult {
        x_hat: Signal::new(x)?,
        objective,
        pattern: run.pattern.canonical(),
        feasibility_residual,
        patterns_explored: total_iters,
        exact: false,
        converged: run.converged,
        objective_trace: run.trace,
    })
}

fn alternate<T: Real>(mat: &Matrix<T>, b: &[T], eps: T, start: Vec<T>, opts: &AlternatingOptions<T>) -> Result<Run<T>> {
    let mut x = start;
    let mut prev: Option<SignPattern> = None;
    let mut run = Run {
        x: x.clone(),
        pattern: SignPattern::of_values(&mat.matvec(&x)),
        feasible: false,
        objective: T::infinity(),
        converged: false,
        iters: 0,
        trace: Vec::new(),
    };
    for _ in 0..opts.max_iters {
        run.iters += 1;
        let pattern = SignPattern::of_values(&mat.matvec(&x));
        if prev.as_ref() == Some(&pattern) {
            run.converged = true;
            break;
        }
        let d = pattern.apply(b);
        match residual_ball_capped(mat, &d, eps, None, &opts.ball) {
            Ok(Some(sol)) => {
                // a feasible iterate stays feasible for the next pattern, so
                // the objective cannot go up; guard against solver noise
                if run.feasible && sol.objective > run.objective {
                    run.converged = true;
                    break;
                }
                run.feasible = true;
                run.objective = sol.objective;
                run.trace.push(sol.objective);
                run.x = sol.x.clone();
                run.pattern = pattern.clone();
                x = sol.x;
            }
            Ok(None) => unreachable!("uncapped solve"),
            Err(Error::Infeasible { min_residual, .. }) => {
                if run.feasible {
                    run.converged = true;
                    break;
                }
                // ℓ1 step in a ball of `relax` times the floor; keeps the
                // iterates sparse where plain least squares would not
                let r = (T::lit(min_residual) * opts.relax).max(eps);
                let relaxed = if opts.relax > T::one() {
                    residual_ball_capped(mat, &d, r, None, &opts.ball).ok().flatten()
                } else {
                    None
                };
                let x_new = match relaxed {
                    Some(sol) => sol.x,
                    None => linalg::least_squares(mat, &d).0,
                };
                run.x = x_new.clone();
                run.pattern = pattern.clone();
                x = x_new;
            }
            Err(e) => return Err(e),
        }
        prev = Some(pattern);
    }
    if !run.feasible {
        run.objective = run.x.iter().map(|v| v.abs()).sum();
    }
    Ok(run)
}

/// Error of a decoded signal against the truth and the stability bound
/// `c₁ε + c₂(2σ_k(x₀)₁ + ρ)/√k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport<T> {
    pub dist_l1: T,
    pub dist_l2: T,
    pub sigma_k_l1: T,
    pub c1: T,
    pub c2: T,
    pub rhs: T,
    pub bound_satisfied: bool,
}

/// Absolute slack added to the right-hand side when comparing.
pub const BOUND_SLACK: f64 = 1e-8;

pub fn error_report<T: Real>(x_hat: &Signal<T>, x0: &Signal<T>, k: usize, eps: T, delta: T, t: T) -> Result<ErrorReport<T>> {
    let consts = stability_constants(delta, t, T::zero())?;
    error_report_with(x_hat, x0, k, eps, &consts)
}

pub fn error_report_with<T: Real>(
    x_hat: &Signal<T>,
    x0: &Signal<T>,
    k: usize,
    eps: T,
    consts: &StabilityConstants<T>,
) -> Result<ErrorReport<T>> {
    if x_hat.len() != x0.len() {
        return input(format!("length mismatch: {} vs {}", x_hat.len(), x0.len()));
    }
    if k == 0 || k > x0.len() {
        return input(format!("need 1 <= k <= N, got k = {k}"));
    }
    let (xh, x) = (x_hat.as_slice(), x0.as_slice());
    let dist_l1 = sim_distance_of(xh, x, Norm::l1());
    let dist_l2 = sim_distance_of(xh, x, Norm::l2());
    let sigma_k_l1 = sigma_k_of(x, k, T::one());
    let rhs = consts.rhs(eps, sigma_k_l1, k);
    Ok(ErrorReport {
        dist_l1,
        dist_l2,
        sigma_k_l1,
        c1: consts.c1,
        c2: consts.c2,
        rhs,
        bound_satisfied: dist_l2 <= rhs + T::lit(BOUND_SLACK),
    })
}
