//! Exhaustive certification of RIP, S-RIP, NSP and S-NSP constants on small
//! matrices, plus randomized checks for the conditions that have no finite
//! certificate.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::{binomial, Combinations};
use crate::error::{input, Error, Result};
use crate::linalg::{self, norm2, sym_eigen, sym_extremes, Matrix};
use crate::measurements::MeasurementMatrix;
use crate::optim::{solve_lp, LpOptions, LpStatus};
use crate::rng::rng_from_seed;
use crate::scalar::Real;
use crate::signals::{norm_of, sigma_k_of, Norm, Signal};

/// Serialises non-finite values as `null` and reads `null` back as `+∞`.
pub(crate) mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Real;

    pub fn serialize<S: Serializer, T: Real + Serialize>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Real + Deserialize<'de>>(d: D) -> Result<T, D::Error> {
        Ok(Option::<T>::deserialize(d)?.unwrap_or_else(T::infinity))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Cap on the number of eigenproblems or LPs an exact routine may solve.
    pub max_subproblems: u128,
    /// Largest `N` for orthant enumeration in the NSP routines.
    pub max_nsp_n: usize,
    /// Largest `m` for the all-subsets S-RIP oracle.
    pub max_naive_m: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_subproblems: 10_000_000,
            max_nsp_n: 12,
            max_naive_m: 12,
        }
    }
}

fn capacity(what: &str, work: u128, cap: u128, hint: &str) -> Error {
    Error::Capacity(format!("{what} needs {work} subproblems, cap is {cap}; {hint}"))
}

fn check_order(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return input(format!("order must satisfy 1 <= k <= N = {n}, got {k}"));
    }
    Ok(())
}

/// Principal submatrix of an `n×n` row-major matrix.
fn principal<T: Real>(g: &[T], n: usize, idx: &[usize]) -> Vec<T> {
    let mut out = Vec::with_capacity(idx.len() * idx.len());
    for &a in idx {
        for &b in idx {
            out.push(g[a * n + b]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct RipReport<T> {
    pub k: usize,
    /// Smallest restricted eigenvalue `L_k`.
    pub lower: T,
    /// Largest restricted eigenvalue `U_k`.
    pub upper: T,
    /// `max(1 − L_k, U_k − 1)`.
    pub delta: T,
    pub witness_support: Vec<usize>,
    /// `delta < 1`.
    pub valid: bool,
}

/// Extremal eigenvalues of `A_Sᵀ A_S` over all supports `|S| = k`.
pub fn rip_constant<T: Real>(a: &MeasurementMatrix<T>, k: usize) -> Result<RipReport<T>> {
    rip_constant_with(a, k, &CertifyOptions::default())
}

pub fn rip_constant_with<T: Real>(a: &MeasurementMatrix<T>, k: usize, opts: &CertifyOptions) -> Result<RipReport<T>> {
    let n = a.n();
    check_order(k, n)?;
    let work = binomial(n, k);
    if work > opts.max_subproblems {
        return Err(capacity("RIP enumeration", work, opts.max_subproblems, "estimate by sampling supports instead"));
    }
    let g = a.full_gram();
    let supports: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let ext: Vec<(T, T)> = supports
        .par_iter()
        .map(|s| sym_extremes(&principal(&g, n, s), k))
        .collect();
    let (mut lo, mut lo_at) = (T::infinity(), 0);
    let (mut hi, mut hi_at) = (T::neg_infinity(), 0);
    for (i, &(l, u)) in ext.iter().enumerate() {
        if l < lo {
            lo = l;
            lo_at = i;
        }
        if u > hi {
            hi = u;
            hi_at = i;
        }
    }
    let one = T::one();
    let delta = (one - lo).max(hi - one).max(T::zero());
    let witness = if one - lo >= hi - one { lo_at } else { hi_at };
    Ok(RipReport {
        k,
        lower: lo,
        upper: hi,
        delta,
        witness_support: supports[witness].clone(),
        valid: delta < one,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SripWitness {
    pub support: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct SripReport<T> {
    pub k: usize,
    pub theta_minus: T,
    pub theta_plus: T,
    /// Support and row set attaining `theta_minus`.
    pub witness: SripWitness,
    /// Support attaining `theta_plus` (always on the full row set).
    pub witness_plus: Vec<usize>,
    /// Smallest row-subset size considered, `⌈m/2⌉`.
    pub min_rows: usize,
    /// True when only `|I| = ⌈m/2⌉` was enumerated.
    pub reduced: bool,
    /// Both bounds in `(0, 2)`.
    pub valid: bool,
}

fn theta_valid<T: Real>(lo: T, hi: T) -> bool {
    let two = T::lit(2.0);
    lo > T::zero() && lo < two && hi > T::zero() && hi < two
}

/// S-RIP bounds with the row quantifier reduced to `|I| = ⌈m/2⌉` for `θ₋`
/// and the full row set for `θ₊`; both reductions follow from
/// `A_Iᵀ A_I ⪯ A_Jᵀ A_J` for `I ⊆ J`.
pub fn srip_bounds<T: Real>(a: &MeasurementMatrix<T>, k: usize) -> Result<SripReport<T>> {
    srip_bounds_with(a, k, &CertifyOptions::default())
}

pub fn srip_bounds_with<T: Real>(a: &MeasurementMatrix<T>, k: usize, opts: &CertifyOptions) -> Result<SripReport<T>> {
    let (m, n) = (a.m(), a.n());
    check_order(k, n)?;
    let h = m.div_ceil(2);
    let work = binomial(n, k).saturating_mul(binomial(m, h));
    if work > opts.max_subproblems {
        return Err(capacity("S-RIP enumeration", work, opts.max_subproblems, "reduce N, m or k"));
    }
    let supports: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let row_sets: Vec<Vec<usize>> = Combinations::new(m, h).collect();
    let all: Vec<usize> = (0..n).collect();
    let per_rows: Vec<(T, usize)> = row_sets
        .par_iter()
        .map(|rows| {
            let g = a.gram(rows, &all);
            let mut best = (T::infinity(), 0);
            for (si, s) in supports.iter().enumerate() {
                let l = sym_extremes(&principal(&g, n, s), k).0;
                if l < best.0 {
                    best = (l, si);
                }
            }
            best
        })
        .collect();
    let (mut lo, mut at) = (T::infinity(), (0, 0));
    for (ri, &(l, si)) in per_rows.iter().enumerate() {
        if l < lo {
            lo = l;
            at = (ri, si);
        }
    }
    let full = rip_constant_with(a, k, opts)?;
    let g = a.full_gram();
    let witness_plus = supports
        .iter()
        .find(|s| sym_extremes(&principal(&g, n, s), k).1 == full.upper)
        .cloned()
        .unwrap_or_default();
    let theta_plus = full.upper;
    Ok(SripReport {
        k,
        theta_minus: lo,
        theta_plus,
        witness: SripWitness {
            support: supports[at.1].clone(),
            rows: row_sets[at.0].clone(),
        },
        witness_plus,
        min_rows: h,
        reduced: true,
        valid: theta_valid(lo, theta_plus),
    })
}

/// Direct form of the S-RIP bounds: every row set with `|I| ≥ ⌈m/2⌉` and
/// a full eigendecomposition per block.
pub fn srip_bounds_naive<T: Real>(a: &MeasurementMatrix<T>, k: usize) -> Result<SripReport<T>> {
    srip_bounds_naive_with(a, k, &CertifyOptions::default())
}

pub fn srip_bounds_naive_with<T: Real>(a: &MeasurementMatrix<T>, k: usize, opts: &CertifyOptions) -> Result<SripReport<T>> {
    let (m, n) = (a.m(), a.n());
    check_order(k, n)?;
    if m > opts.max_naive_m {
        return Err(Error::Capacity(format!(
            "naive S-RIP enumeration is limited to m <= {}, got {m}",
            opts.max_naive_m
        )));
    }
    let h = m.div_ceil(2);
    let supports: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let mut lo = (T::infinity(), Vec::new(), Vec::new());
    let mut hi = (T::neg_infinity(), Vec::new());
    for size in h..=m {
        for rows in Combinations::new(m, size) {
            for s in &supports {
                let e = sym_eigen(&a.gram(&rows, s), k);
                let (l, u) = (e.values[0], e.values[k - 1]);
                if l < lo.0 {
                    lo = (l, s.clone(), rows.clone());
                }
                if u > hi.0 {
                    hi = (u, s.clone());
                }
            }
        }
    }
    Ok(SripReport {
        k,
        theta_minus: lo.0,
        theta_plus: hi.0,
        witness: SripWitness { support: lo.1, rows: lo.2 },
        witness_plus: hi.1,
        min_rows: h,
        reduced: false,
        valid: theta_valid(lo.0, hi.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Lemma31Report<T> {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `‖|Ax|−|Ay|‖₂² − θ₋·min(‖x−y‖₂², ‖x+y‖₂²)` seen.
    pub worst_margin: T,
    pub worst_pair: Option<(Signal<T>, Signal<T>)>,
}

/// Slack below which a negative margin counts as a violation.
pub const LEMMA31_SLACK: f64 = 1e-10;

fn gaussian_vec<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect()
}

fn sparse_sample<T: Real>(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    for i in sample(rng, n, k.min(n)).into_iter() {
        x[i] = T::lit(rng.sample::<f64, _>(StandardNormal));
    }
    x
}

/// Samples pairs `x, y ∈ Σ_k` and tests
/// `‖|Ax|−|Ay|‖₂² ≥ θ₋·min(‖x−y‖₂², ‖x+y‖₂²)`. A third of the pairs put
/// `y` near `±x` on the same support, where the margin is tightest.
pub fn lemma31_check<T: Real>(
    a: &MeasurementMatrix<T>,
    k: usize,
    theta_minus: T,
    trials: usize,
    seed: u64,
) -> Result<Lemma31Report<T>> {
    let n = a.n();
    check_order(k, n)?;
    let mut rng = rng_from_seed(seed);
    let mut report = Lemma31Report {
        trials,
        violations: 0,
        worst_margin: T::infinity(),
        worst_pair: None,
    };
    for t in 0..trials {
        let x: Vec<T> = sparse_sample(&mut rng, n, k);
        let y: Vec<T> = if t % 3 == 2 {
            let flip = if rng.random_bool(0.5) { -T::one() } else { T::one() };
            let scale = T::lit(rng.random_range(1e-3..0.5));
            x.iter()
                .map(|&v| {
                    if v == T::zero() {
                        T::zero()
                    } else {
                        flip * v + scale * T::lit(rng.sample::<f64, _>(StandardNormal))
                    }
                })
                .collect()
        } else {
            sparse_sample(&mut rng, n, k)
        };
        let ax = a.matvec(&x);
        let ay = a.matvec(&y);
        let lhs: T = ax.iter().zip(&ay).map(|(p, q)| (p.abs() - q.abs()).powi(2)).sum();
        let minus: T = x.iter().zip(&y).map(|(p, q)| (*p - *q).powi(2)).sum();
        let plus: T = x.iter().zip(&y).map(|(p, q)| (*p + *q).powi(2)).sum();
        let margin = lhs - theta_minus * minus.min(plus);
        if margin < -T::lit(LEMMA31_SLACK) {
            report.violations += 1;
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_pair = Some((Signal::new(x)?, Signal::new(y)?));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct NspReport<T> {
    pub order: usize,
    /// Smallest `C` with `‖η‖₁ ≤ C·σ_order(η)₁` on the null space(s);
    /// `+∞` (JSON `null`) when a null space holds an order-sparse vector.
    #[serde(with = "inf_as_null")]
    pub constant: T,
    pub infinite: bool,
    /// Trivial null space: the property holds with any constant.
    pub vacuous: bool,
    pub witness: Option<Signal<T>>,
    /// Row subset whose null space holds the witness (S-NSP only).
    pub witness_rows: Option<Vec<usize>>,
    pub exact: bool,
}

/// Exact NSP constant in ℓ1: for each support `T` and orthant, maximise
/// `‖η‖₁` over `Aη = 0`, `‖η_{Tᶜ}‖₁ ≤ 1` by LP. Orthants are taken modulo
/// `η ↦ −η`.
pub fn nsp_constant<T: Real>(a: &MeasurementMatrix<T>, order: usize) -> Result<NspReport<T>> {
    nsp_constant_with(a, order, &CertifyOptions::default())
}

pub fn nsp_constant_with<T: Real>(a: &MeasurementMatrix<T>, order: usize, opts: &CertifyOptions) -> Result<NspReport<T>> {
    let n = a.n();
    check_order(order, n)?;
    nsp_check_caps(n, order, 1, opts)?;
    nsp_exact(a.matrix(), order)
}

fn nsp_check_caps(n: usize, order: usize, row_sets: u128, opts: &CertifyOptions) -> Result<()> {
    if n > opts.max_nsp_n {
        return Err(Error::Capacity(format!(
            "orthant enumeration is limited to N <= {}, got {n}; use nsp_constant_estimate for a lower bound",
            opts.max_nsp_n
        )));
    }
    let work = binomial(n, order)
        .saturating_mul(1u128 << (n - 1))
        .saturating_mul(row_sets);
    if work > opts.max_subproblems {
        return Err(capacity("NSP enumeration", work, opts.max_subproblems, "use nsp_constant_estimate for a lower bound"));
    }
    Ok(())
}

fn null_tol<T: Real>() -> T {
    T::lit(1e-11).max(T::epsilon() * T::lit(256.0))
}

fn nsp_exact<T: Real>(a: &Matrix<T>, order: usize) -> Result<NspReport<T>> {
    let n = a.cols();
    let mut report = NspReport {
        order,
        constant: T::zero(),
        infinite: false,
        vacuous: false,
        witness: None,
        witness_rows: None,
        exact: true,
    };
    let g = a.full_gram();
    let scale = (0..n).fold(T::zero(), |s, i| s.max(g[i * n + i]));
    if a.rows() > 0 && linalg::null_space(a, null_tol()).is_empty() {
        report.vacuous = true;
        return Ok(report);
    }
    // an order-sparse null vector exists iff some A_T is rank deficient
    for t in Combinations::new(n, order) {
        let sub = principal(&g, n, &t);
        let e = sym_eigen(&sub, order);
        if e.values[0] <= null_tol::<T>() * scale.max(T::min_positive_value()) {
            let mut eta = vec![T::zero(); n];
            for (&i, &v) in t.iter().zip(&e.vectors[0]) {
                eta[i] = v;
            }
            report.constant = T::infinity();
            report.infinite = true;
            report.witness = Some(Signal::new(eta)?);
            return Ok(report);
        }
    }
    let lp_opts = LpOptions::default();
    let jobs: Vec<(Vec<usize>, u64)> = Combinations::new(n, order)
        .flat_map(|t| (0..1u64 << (n - 1)).map(move |o| (t.clone(), o)))
        .collect();
    let results: Vec<Result<Option<(T, Vec<T>)>>> = jobs
        .par_iter()
        .map(|(t, o)| orthant_lp(a, t, *o, &lp_opts))
        .collect();
    let mut best: Option<(T, Vec<T>)> = None;
    for r in results {
        match r? {
            Some((v, eta)) if v.is_infinite() => {
                report.constant = T::infinity();
                report.infinite = true;
                report.witness = Some(Signal::new(eta)?);
                return Ok(report);
            }
            Some((v, eta)) => {
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, eta));
                }
            }
            None => {}
        }
    }
    if let Some((v, eta)) = best {
        report.constant = v;
        report.witness = Some(Signal::new(eta)?);
    }
    Ok(report)
}

/// Orthant index `o` encodes signs of entries `1..N` (entry 0 is `+`).
fn orthant_lp<T: Real>(a: &Matrix<T>, t: &[usize], o: u64, opts: &LpOptions<T>) -> Result<Option<(T, Vec<T>)>> {
    let (m, n) = (a.rows(), a.cols());
    let sigma: Vec<T> = (0..n)
        .map(|i| if i > 0 && (o >> (i - 1)) & 1 == 1 { -T::one() } else { T::one() })
        .collect();
    let mut e = Matrix::zeros(m + 1, n + 1);
    for r in 0..m {
        for c in 0..n {
            e[(r, c)] = a[(r, c)] * sigma[c];
        }
    }
    for c in 0..n {
        if !t.contains(&c) {
            e[(m, c)] = T::one();
        }
    }
    e[(m, n)] = T::one();
    let mut f = vec![T::zero(); m + 1];
    f[m] = T::one();
    let mut cost = vec![-T::one(); n + 1];
    cost[n] = T::zero();
    let sol = solve_lp(&cost, &e, &f, &vec![true; n + 1], opts)?;
    match sol.status {
        LpStatus::Optimal => {
            let eta: Vec<T> = (0..n).map(|i| sigma[i] * sol.point[i]).collect();
            Ok(Some((-sol.objective, eta)))
        }
        LpStatus::Unbounded => Ok(Some((T::infinity(), vec![T::zero(); n]))),
        LpStatus::Infeasible => Ok(None),
    }
}

/// S-NSP constant: worst NSP constant of `A_I` over `|I| = ⌈m/2⌉`.
pub fn snsp_constant<T: Real>(a: &MeasurementMatrix<T>, order: usize) -> Result<NspReport<T>> {
    snsp_constant_with(a, order, &CertifyOptions::default())
}

pub fn snsp_constant_with<T: Real>(a: &MeasurementMatrix<T>, order: usize, opts: &CertifyOptions) -> Result<NspReport<T>> {
    let (m, n) = (a.m(), a.n());
    check_order(order, n)?;
    let h = m.div_ceil(2);
    nsp_check_caps(n, order, binomial(m, h), opts)?;
    let mut worst: Option<NspReport<T>> = None;
    for rows in Combinations::new(m, h) {
        let mut r = nsp_exact(&a.select_rows(&rows), order)?;
        r.witness_rows = Some(rows);
        let replace = match &worst {
            None => true,
            Some(w) => !w.infinite && (r.infinite || r.constant > w.constant),
        };
        if replace {
            let stop = r.infinite;
            worst = Some(r);
            if stop {
                break;
            }
        }
    }
    Ok(worst.expect("at least one row subset"))
}

/// Randomized lower bound on the NSP constant when enumeration is over cap.
pub fn nsp_constant_estimate<T: Real>(a: &MeasurementMatrix<T>, order: usize, budget: usize, seed: u64) -> Result<NspReport<T>> {
    let n = a.n();
    check_order(order, n)?;
    let basis = linalg::null_space(a.matrix(), null_tol());
    let mut report = NspReport {
        order,
        constant: T::zero(),
        infinite: false,
        vacuous: basis.is_empty(),
        witness: None,
        witness_rows: None,
        exact: false,
    };
    if basis.is_empty() {
        return Ok(report);
    }
    let ratio = |eta: &[T]| nsp_ratio(eta, order, Norm::l1(), Norm::l1(), 0.0);
    let mut rng = rng_from_seed(seed);
    for _ in 0..budget.max(1) {
        let (r, eta, _) = refine(&basis, &[], gaussian_vec(&mut rng, basis.len()), Vec::new(), |e, _| ratio(e), 40);
        if r > report.constant {
            report.constant = r;
            report.infinite = r.is_infinite();
            report.witness = Some(Signal::new(eta)?);
        }
    }
    Ok(report)
}

/// `‖η‖_p / (k^{−s} σ_k(η)_q)` with `s` supplied; `+∞` when only the
/// denominator vanishes and `0` when both do.
fn nsp_ratio<T: Real>(eta: &[T], k: usize, p: Norm<T>, q: Norm<T>, s: f64) -> T {
    let num = norm_of(eta, p);
    let qv = match q {
        Norm::Lp(v) => v,
        _ => T::one(),
    };
    let den = sigma_k_of(eta, k, qv) * T::from_usize_lossy(k).powf(-T::lit(s));
    let tiny = T::lit(1e-13) * num;
    if num == T::zero() {
        T::zero()
    } else if den <= tiny {
        T::infinity()
    } else {
        num / den
    }
}

fn combine<T: Real>(basis: &[Vec<T>], c: &[T], n: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    for (b, &ci) in basis.iter().zip(c) {
        for (vi, &bi) in v.iter_mut().zip(b) {
            *vi += ci * bi;
        }
    }
    v
}

/// Coordinate ascent of `f(η₁, η₂)` over coefficients in two null-space
/// bases. Returns the best value with `η₁` and `η₂`.
fn refine<T: Real, F>(
    b1: &[Vec<T>],
    b2: &[Vec<T>],
    mut c1: Vec<T>,
    mut c2: Vec<T>,
    f: F,
    sweeps: usize,
) -> (T, Vec<T>, Vec<T>)
where
    F: Fn(&[T], &[T]) -> T,
{
    let n = b1.first().or(b2.first()).map_or(0, |v| v.len());
    let eval = |c1: &[T], c2: &[T]| f(&combine(b1, c1, n), &combine(b2, c2, n));
    let mut val = eval(&c1, &c2);
    let mut step = T::lit(0.5);
    for _ in 0..sweeps {
        if val.is_infinite() {
            break;
        }
        let mut moved = false;
        for which in 0..2 {
            let len = if which == 0 { c1.len() } else { c2.len() };
            for j in 0..len {
                for dir in [T::one(), -T::one()] {
                    let (mut t1, mut t2) = (c1.clone(), c2.clone());
                    let tgt = if which == 0 { &mut t1 } else { &mut t2 };
                    let sc = norm2(tgt).max(T::one());
                    tgt[j] += dir * step * sc;
                    let v = eval(&t1, &t2);
                    if v > val {
                        val = v;
                        c1 = t1;
                        c2 = t2;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step /= T::lit(2.0);
            if step < T::lit(1e-6) {
                break;
            }
        }
    }
    (val, combine(b1, &c1, n), combine(b2, &c2, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct IoEstimate<T> {
    /// Largest sampled `4·min(‖η₁‖₁,‖η₂‖₁)/(σ_k(η₁−η₂)₁+σ_k(η₁+η₂)₁)`: a
    /// lower bound on the smallest valid `C₀`, not a certificate.
    #[serde(with = "inf_as_null")]
    pub estimate: T,
    /// No sampled row split had two nontrivial null spaces.
    pub vacuous: bool,
    pub witness: Option<(Signal<T>, Signal<T>)>,
    pub witness_rows: Option<Vec<usize>>,
    pub samples: usize,
}

fn io_ratio<T: Real>(e1: &[T], e2: &[T], k: usize) -> T {
    let n1: T = e1.iter().map(|v| v.abs()).sum();
    let n2: T = e2.iter().map(|v| v.abs()).sum();
    let num = T::lit(4.0) * n1.min(n2);
    let d: Vec<T> = e1.iter().zip(e2).map(|(a, b)| *a - *b).collect();
    let s: Vec<T> = e1.iter().zip(e2).map(|(a, b)| *a + *b).collect();
    let den = sigma_k_of(&d, k, T::one()) + sigma_k_of(&s, k, T::one());
    if num == T::zero() {
        T::zero()
    } else if den <= T::lit(1e-13) * num {
        T::infinity()
    } else {
        num / den
    }
}

fn rows_null_space<T: Real>(a: &Matrix<T>, rows: &[usize]) -> Vec<Vec<T>> {
    let n = a.cols();
    if rows.is_empty() {
        return (0..n)
            .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
    }
    linalg::null_space(&a.select_rows(rows), null_tol())
}

/// Randomized search for the smallest `C₀` in the pairwise null-space
/// condition for phaseless instance optimality.
pub fn phaseless_io_condition_estimate<T: Real>(
    a: &MeasurementMatrix<T>,
    k: usize,
    budget: usize,
    seed: u64,
) -> Result<IoEstimate<T>> {
    let (m, n) = (a.m(), a.n());
    check_order(k, n)?;
    if budget == 0 {
        return input("budget must be at least 1");
    }
    let mut out = IoEstimate {
        estimate: T::zero(),
        vacuous: true,
        witness: None,
        witness_rows: None,
        samples: budget,
    };
    let mut rng = rng_from_seed(seed);
    for _ in 0..budget {
        let rows: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
        let rest: Vec<usize> = (0..m).filter(|i| !rows.contains(i)).collect();
        let b1 = rows_null_space(a.matrix(), &rows);
        let b2 = rows_null_space(a.matrix(), &rest);
        if b1.is_empty() || b2.is_empty() {
            continue;
        }
        out.vacuous = false;
        let c1 = gaussian_vec(&mut rng, b1.len());
        let c2 = gaussian_vec(&mut rng, b2.len());
        let f = |e1: &[T], e2: &[T]| io_ratio(e1, e2, k);
        let (val, e1, e2) = refine(&b1, &b2, c1, c2, f, 30);
        if val > out.estimate {
            out.estimate = val;
            out.witness = Some((Signal::new(e1)?, Signal::new(e2)?));
            out.witness_rows = Some(rows);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct MixedNspReport<T> {
    pub constant: T,
    /// `s = 1/q − 1/p`.
    pub s: T,
    #[serde(with = "inf_as_null")]
    pub worst_ratio: T,
    pub violations: usize,
    pub samples: usize,
    pub witness: Option<Signal<T>>,
    pub witness_rows: Option<Vec<usize>>,
}

/// Randomized falsification of `‖η‖_p ≤ C k^{−s} σ_k(η)_q` on null spaces of
/// half-row submatrices.
#[allow(clippy::too_many_arguments)]
pub fn mixed_nsp_check<T: Real>(
    a: &MeasurementMatrix<T>,
    k: usize,
    p: T,
    q: T,
    constant: T,
    budget: usize,
    seed: u64,
) -> Result<MixedNspReport<T>> {
    let (m, n) = (a.m(), a.n());
    check_order(k, n)?;
    let (one, two) = (T::one(), T::lit(2.0));
    if !(q >= one && q <= p && p <= two) {
        return input(format!("need 1 <= q <= p <= 2, got p = {p}, q = {q}"));
    }
    let s = one / q - one / p;
    let h = m.div_ceil(2);
    let mut out = MixedNspReport {
        constant,
        s,
        worst_ratio: T::zero(),
        violations: 0,
        samples: budget,
        witness: None,
        witness_rows: None,
    };
    let (pn, qn) = (Norm::from_p(p)?, Norm::Lp(q));
    let s64 = s.to_f64_lossy();
    let mut rng = rng_from_seed(seed);
    for i in 0..budget {
        let mut rows: Vec<usize> = sample(&mut rng, m, h).into_vec();
        rows.sort_unstable();
        let basis = rows_null_space(a.matrix(), &rows);
        if basis.is_empty() {
            continue;
        }
        let c = gaussian_vec(&mut rng, basis.len());
        let f = |e: &[T], _: &[T]| nsp_ratio(e, k, pn, qn, s64);
        let (val, eta) = if i % 2 == 0 {
            let (v, e, _) = refine(&basis, &[], c, Vec::new(), f, 30);
            (v, e)
        } else {
            let eta = combine(&basis, &c, n);
            (f(&eta, &[]), eta)
        };
        if val > constant * (one + T::lit(1e-12)) {
            out.violations += 1;
        }
        if val > out.worst_ratio {
            out.worst_ratio = val;
            out.witness = Some(Signal::new(eta)?);
            out.witness_rows = Some(rows);
        }
    }
    Ok(out)
}
