//! Convex engines: a dense two-phase simplex with Bland's rule, ℓ1
//! minimisation over affine sets, Euclidean projection onto the ℓ1 ball and
//! ℓ1 minimisation over a residual ball by root finding on the Pareto curve
//! `φ(τ) = min_{‖x‖₁≤τ} ‖Mx − d‖₂`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{self, dot, lu_solve, norm2, Matrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct LpSolution<T> {
    pub point: Vec<T>,
    pub objective: T,
    pub status: LpStatus,
    /// `‖Ez − f‖∞ / (1 + ‖f‖∞)`, including bound violations.
    pub primal_residual: T,
    /// `|cᵀz − fᵀy| / (1 + |cᵀz|)` for the recovered duals `y`.
    pub duality_gap: T,
    pub pivots: usize,
}

impl<T: Real> LpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_point(status: LpStatus, n: usize, pivots: usize) -> Self {
        let objective = match status {
            LpStatus::Unbounded => T::neg_infinity(),
            _ => T::infinity(),
        };
        LpSolution {
            point: vec![T::zero(); n],
            objective,
            status,
            primal_residual: T::infinity(),
            duality_gap: T::infinity(),
            pivots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions<T> {
    pub feas_tol: T,
    pub gap_tol: T,
    pub pivot_tol: T,
    pub max_pivots: usize,
}

impl<T: Real> Default for LpOptions<T> {
    fn default() -> Self {
        LpOptions {
            feas_tol: T::lit(1e-9),
            gap_tol: T::lit(1e-9),
            pivot_tol: T::lit(1e-11),
            max_pivots: 100_000,
        }
    }
}

struct Tableau<T> {
    rows: usize,
    width: usize,
    // rows × width, last column is the right-hand side
    data: Vec<T>,
    obj: Vec<T>,
    basis: Vec<usize>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl<T: Real> Tableau<T> {
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> T {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        let prow: Vec<T> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != T::zero() {
                for j in 0..w {
                    self.data[i * w + j] -= f * prow[j];
                }
                self.data[i * w + c] = T::zero();
            }
        }
        let f = self.obj[c];
        if f != T::zero() {
            for j in 0..w {
                self.obj[j] -= f * prow[j];
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic
    /// variable among minimum-ratio rows.
    fn run(&mut self, allowed: usize, rc_tol: T, piv_tol: T, max_pivots: usize) -> Result<Step> {
        loop {
            if self.pivots > max_pivots {
                return Err(Error::Solver(format!(
                    "simplex exceeded {max_pivots} pivots"
                )));
            }
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -rc_tol) else {
                return Ok(Step::Optimal);
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > piv_tol {
                    let ratio = self.rhs(i).max(T::zero()) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= T::lit(1e-12) * (T::one() + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Ok(Step::Unbounded),
            }
        }
    }
}

/// Minimises `cᵀz` subject to `E z = f` and `z_i ≥ 0` wherever
/// `nonneg[i]` is set.
pub fn solve_lp<T: Real>(
    c: &[T],
    e: &Matrix<T>,
    f: &[T],
    nonneg: &[bool],
    opts: &LpOptions<T>,
) -> Result<LpSolution<T>> {
    let n = c.len();
    let m = e.rows();
    if e.cols() != n || nonneg.len() != n || f.len() != m {
        return input(format!(
            "LP dimensions: c {}, E {}x{}, f {}, mask {}",
            n,
            e.rows(),
            e.cols(),
            f.len(),
            nonneg.len()
        ));
    }
    if c.iter().chain(f).any(|v| !v.is_finite()) || !e.is_finite() {
        return input("LP data must be finite");
    }

    // standard form: free variables split into a difference of two columns
    let mut col_map: Vec<(usize, T)> = Vec::new();
    for j in 0..n {
        col_map.push((j, T::one()));
        if !nonneg[j] {
            col_map.push((j, -T::one()));
        }
    }
    let ns = col_map.len();
    let flip: Vec<T> = f.iter().map(|&v| if v < T::zero() { -T::one() } else { T::one() }).collect();
    let std_entry = |i: usize, k: usize| -> T {
        let (j, s) = col_map[k];
        e[(i, j)] * s * flip[i]
    };
    let c_std: Vec<T> = col_map.iter().map(|&(j, s)| c[j] * s).collect();

    if m == 0 {
        // no constraints: optimum 0 unless some cost can decrease forever
        if c_std.iter().any(|&v| v < T::zero()) {
            return Ok(LpSolution::without_point(LpStatus::Unbounded, n, 0));
        }
        return Ok(LpSolution {
            point: vec![T::zero(); n],
            objective: T::zero(),
            status: LpStatus::Optimal,
            primal_residual: T::zero(),
            duality_gap: T::zero(),
            pivots: 0,
        });
    }

    let width = ns + m + 1;
    let mut data = vec![T::zero(); m * width];
    for i in 0..m {
        for k in 0..ns {
            data[i * width + k] = std_entry(i, k);
        }
        data[i * width + ns + i] = T::one();
        data[i * width + width - 1] = f[i] * flip[i];
    }
    // phase one: minimise the sum of artificials
    let mut obj = vec![T::zero(); width];
    for i in 0..m {
        for j in 0..ns {
            obj[j] -= data[i * width + j];
        }
        obj[width - 1] -= data[i * width + width - 1];
    }
    let mut tab = Tableau {
        rows: m,
        width,
        data,
        obj,
        basis: (ns..ns + m).collect(),
        pivots: 0,
    };
    let scale_e = e.max_abs().max(T::one());
    let piv_tol = opts.pivot_tol * scale_e;
    let f_inf = f.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    tab.run(ns, opts.pivot_tol, piv_tol, opts.max_pivots)?;
    let infeas = -tab.obj[width - 1];
    if infeas > opts.feas_tol * (T::one() + f_inf) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, n, tab.pivots));
    }

    // drive artificials out of the basis; rows that cannot be cleared are redundant
    let mut active = vec![true; m];
    for i in 0..m {
        if tab.basis[i] >= ns {
            let mut best: Option<(usize, T)> = None;
            for j in 0..ns {
                let a = tab.at(i, j).abs();
                if a > piv_tol && best.map_or(true, |(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => tab.pivot(i, j),
                None => active[i] = false,
            }
        }
    }

    // phase two objective row: reduced costs c_j - c_Bᵀ B⁻¹ A_j
    let mut obj = vec![T::zero(); width];
    obj[..ns].copy_from_slice(&c_std);
    for i in 0..m {
        if !active[i] {
            continue;
        }
        let cb = if tab.basis[i] < ns { c_std[tab.basis[i]] } else { T::zero() };
        if cb != T::zero() {
            for j in 0..width {
                obj[j] -= cb * tab.at(i, j);
            }
        }
    }
    for i in 0..m {
        if !active[i] {
            // zero the redundant row so it never constrains a ratio test
            for j in 0..width {
                tab.data[i * width + j] = T::zero();
            }
        }
    }
    tab.obj = obj;
    let c_scale = c.iter().fold(T::zero(), |a, v| a.max(v.abs())).max(T::one());
    match tab.run(ns, opts.pivot_tol * c_scale, piv_tol, opts.max_pivots)? {
        Step::Unbounded => return Ok(LpSolution::without_point(LpStatus::Unbounded, n, tab.pivots)),
        Step::Optimal => {}
    }

    // refine on the final basis with a fresh factorisation
    let rows: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
    let bcols: Vec<usize> = rows.iter().map(|&i| tab.basis[i]).collect();
    let r = rows.len();
    let mut bmat = vec![T::zero(); r * r];
    for (a, &i) in rows.iter().enumerate() {
        for (b, &k) in bcols.iter().enumerate() {
            bmat[a * r + b] = std_entry(i, k);
        }
    }
    let rhs: Vec<T> = rows.iter().map(|&i| f[i] * flip[i]).collect();
    let mut xs = vec![T::zero(); ns];
    match lu_solve(&bmat, r, &rhs, T::epsilon()) {
        Some(xb) => {
            for (b, &k) in bcols.iter().enumerate() {
                xs[k] = xb[b];
            }
        }
        None => {
            return Err(Error::Solver(format!(
                "numerically singular final basis ({r}x{r}) after {} pivots",
                tab.pivots
            )))
        }
    }
    for v in xs.iter_mut() {
        if *v < T::zero() && *v > -opts.feas_tol {
            *v = T::zero();
        }
    }
    let mut bt = vec![T::zero(); r * r];
    for a in 0..r {
        for b in 0..r {
            bt[a * r + b] = bmat[b * r + a];
        }
    }
    let cb: Vec<T> = bcols.iter().map(|&k| c_std[k]).collect();
    let y = lu_solve(&bt, r, &cb, T::epsilon()).unwrap_or_else(|| vec![T::zero(); r]);

    let mut z = vec![T::zero(); n];
    for (k, &(j, s)) in col_map.iter().enumerate() {
        z[j] += s * xs[k];
    }
    let objective = dot(c, &z);
    let ez = e.matvec(&z);
    let mut viol = ez
        .iter()
        .zip(f)
        .fold(T::zero(), |a, (&p, &q)| a.max((p - q).abs()));
    for j in 0..n {
        if nonneg[j] && z[j] < T::zero() {
            viol = viol.max(-z[j]);
        }
    }
    let primal_residual = viol / (T::one() + f_inf);
    let dual_obj = rows
        .iter()
        .zip(&y)
        .fold(T::zero(), |a, (&i, &yi)| a + yi * f[i] * flip[i]);
    let duality_gap = (objective - dual_obj).abs() / (T::one() + objective.abs());
    if primal_residual > opts.feas_tol || duality_gap > opts.gap_tol {
        return Err(Error::Solver(format!(
            "simplex lost accuracy: primal residual {:e}, duality gap {:e}",
            primal_residual.to_f64_lossy(),
            duality_gap.to_f64_lossy()
        )));
    }
    Ok(LpSolution {
        point: z,
        objective,
        status: LpStatus::Optimal,
        primal_residual,
        duality_gap,
        pivots: tab.pivots,
    })
}

/// `min ‖x‖₁ s.t. Mx = d`.
pub fn min_l1_affine<T: Real>(m: &Matrix<T>, d: &[T]) -> Result<LpSolution<T>> {
    min_l1_offsupport_affine_with(m, d, &[], &LpOptions::default())
}

/// `min ‖x_{Tᶜ}‖₁ s.t. Mx = d`; entries on `support` are unpenalised.
pub fn min_l1_offsupport_affine<T: Real>(
    m: &Matrix<T>,
    d: &[T],
    support: &[usize],
) -> Result<LpSolution<T>> {
    min_l1_offsupport_affine_with(m, d, support, &LpOptions::default())
}

pub fn min_l1_offsupport_affine_with<T: Real>(
    m: &Matrix<T>,
    d: &[T],
    support: &[usize],
    opts: &LpOptions<T>,
) -> Result<LpSolution<T>> {
    let n = m.cols();
    if n == 0 {
        return input("matrix needs at least one column");
    }
    if d.len() != m.rows() {
        return input(format!("rhs has {} entries, matrix has {} rows", d.len(), m.rows()));
    }
    if let Some(&j) = support.iter().find(|&&j| j >= n) {
        return input(format!("support index {j} out of range for N = {n}"));
    }
    let mut free = vec![false; n];
    for &j in support {
        free[j] = true;
    }
    // columns: x_j (free) for j in T, else u_j, v_j >= 0 with x_j = u_j - v_j
    let mut layout: Vec<(usize, T)> = Vec::new();
    for j in 0..n {
        if free[j] {
            layout.push((j, T::one()));
        } else {
            layout.push((j, T::one()));
            layout.push((j, -T::one()));
        }
    }
    let k = layout.len();
    let mut e = Matrix::zeros(m.rows(), k);
    for i in 0..m.rows() {
        for (c, &(j, s)) in layout.iter().enumerate() {
            e[(i, c)] = m[(i, j)] * s;
        }
    }
    let cost: Vec<T> = layout
        .iter()
        .map(|&(j, _)| if free[j] { T::zero() } else { T::one() })
        .collect();
    let mask: Vec<bool> = layout.iter().map(|&(j, _)| !free[j]).collect();
    let lp = solve_lp(&cost, &e, d, &mask, opts)?;
    if !lp.is_optimal() {
        return Ok(LpSolution {
            point: vec![T::zero(); n],
            ..lp
        });
    }
    let mut x = vec![T::zero(); n];
    for (c, &(j, s)) in layout.iter().enumerate() {
        x[j] += s * lp.point[c];
    }
    let objective = (0..n).filter(|&j| !free[j]).map(|j| x[j].abs()).sum();
    Ok(LpSolution {
        point: x,
        objective,
        ..lp
    })
}

/// Euclidean projection of `v` onto `{w : ‖w‖₁ ≤ tau}`.
pub fn project_l1_ball<T: Real>(v: &[T], tau: T) -> Result<Vec<T>> {
    if !(tau >= T::zero()) {
        return input(format!("l1 ball radius must be >= 0, got {tau}"));
    }
    Ok(project_l1_ball_unchecked(v, tau))
}

fn project_l1_ball_unchecked<T: Real>(v: &[T], tau: T) -> Vec<T> {
    let l1: T = v.iter().map(|x| x.abs()).sum();
    if l1 <= tau {
        return v.to_vec();
    }
    if tau == T::zero() {
        return vec![T::zero(); v.len()];
    }
    let mut mags: Vec<T> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut level = T::zero();
    for (i, &u) in mags.iter().enumerate() {
        cum += u;
        let cand = (cum - tau) / T::from_usize_lossy(i + 1);
        if u > cand {
            level = cand;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - level).max(T::zero()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualBallOptions<T> {
    pub feas_tol: T,
    pub obj_tol: T,
    /// Bisection stops once the τ-bracket is below `tau_rel_tol·(1+τ)`.
    pub tau_rel_tol: T,
    /// ... or once `eps − φ(τ)` is within this.
    pub resid_tol: T,
    pub max_bisections: usize,
    pub max_inner: usize,
    pub lp: LpOptions<T>,
}

impl<T: Real> Default for ResidualBallOptions<T> {
    fn default() -> Self {
        ResidualBallOptions {
            feas_tol: T::lit(1e-9),
            obj_tol: T::lit(1e-6),
            tau_rel_tol: T::lit(1e-10),
            resid_tol: T::lit(1e-9),
            max_bisections: 200,
            max_inner: 20_000,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct ResidualBallSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub residual: T,
    pub bisections: usize,
    /// `(τ, φ(τ))` pairs in evaluation order.
    pub pareto_trace: Vec<(T, T)>,
}

/// `min ‖x‖₁ s.t. ‖Mx − d‖₂ ≤ eps`.
pub fn min_l1_residual_ball<T: Real>(m: &Matrix<T>, d: &[T], eps: T) -> Result<ResidualBallSolution<T>> {
    min_l1_residual_ball_with(m, d, eps, &ResidualBallOptions::default())
}

pub fn min_l1_residual_ball_with<T: Real>(
    m: &Matrix<T>,
    d: &[T],
    eps: T,
    opts: &ResidualBallOptions<T>,
) -> Result<ResidualBallSolution<T>> {
    Ok(residual_ball_capped(m, d, eps, None, opts)?.expect("uncapped solve always returns"))
}

/// Same as [`min_l1_residual_ball_with`] but gives up (returns `None`) as
/// soon as it is certain the optimum exceeds `cap`.
pub(crate) fn residual_ball_capped<T: Real>(
    m: &Matrix<T>,
    d: &[T],
    eps: T,
    cap: Option<T>,
    opts: &ResidualBallOptions<T>,
) -> Result<Option<ResidualBallSolution<T>>> {
    let n = m.cols();
    if n == 0 {
        return input("matrix needs at least one column");
    }
    if d.len() != m.rows() {
        return input(format!("rhs has {} entries, matrix has {} rows", d.len(), m.rows()));
    }
    if !(eps >= T::zero()) || !eps.is_finite() {
        return input(format!("residual radius must be finite and >= 0, got {eps}"));
    }
    let dn = norm2(d);
    if dn <= eps {
        return Ok(Some(ResidualBallSolution {
            x: vec![T::zero(); n],
            objective: T::zero(),
            residual: dn,
            bisections: 0,
            pareto_trace: vec![(T::zero(), dn)],
        }));
    }
    let (x_ls, floor) = linalg::least_squares(m, d);
    if eps == T::zero() {
        let lp = min_l1_offsupport_affine_with(m, d, &[], &opts.lp)?;
        if !lp.is_optimal() {
            return Err(Error::Infeasible {
                message: "no x satisfies Mx = d".into(),
                min_residual: floor.to_f64_lossy(),
            });
        }
        if cap.is_some_and(|c| lp.objective > c + opts.obj_tol * (T::one() + c)) {
            return Ok(None);
        }
        let residual = norm2(&linalg::sub(&m.matvec(&lp.point), d));
        return Ok(Some(ResidualBallSolution {
            objective: lp.objective,
            residual,
            x: lp.point,
            bisections: 0,
            pareto_trace: vec![],
        }));
    }
    if floor > eps * (T::one() + T::lit(1e-12)) {
        return Err(Error::Infeasible {
            message: format!("residual radius {eps} is below the least-squares floor"),
            min_residual: floor.to_f64_lossy(),
        });
    }

    let pareto = Pareto::new(m, d, &x_ls, floor, opts);
    let mut trace = vec![(T::zero(), dn)];
    let ls_tau: T = x_ls.iter().map(|v| v.abs()).sum();
    let mut lo = T::zero();
    let (mut hi, mut x_hi, mut r_hi) = (ls_tau, x_ls.clone(), floor);
    trace.push((ls_tau, floor));

    if let Some(c) = cap {
        if c < ls_tau {
            let half_eps_sq = eps * eps / T::lit(2.0);
            let eval = pareto.eval(c, &x_ls, Some(half_eps_sq));
            trace.push((c, eval.residual));
            if eval.residual > eps {
                return Ok(None);
            }
            hi = c;
            x_hi = eval.x;
            r_hi = eval.residual;
        }
    }

    let mut bisections = 0;
    while hi - lo > opts.tau_rel_tol * (T::one() + hi) && bisections < opts.max_bisections {
        if eps - r_hi <= opts.resid_tol {
            break;
        }
        bisections += 1;
        let mid = (lo + hi) / T::lit(2.0);
        let eval = pareto.eval(mid, &x_hi, None);
        trace.push((mid, eval.residual));
        if eval.residual <= eps {
            hi = mid;
            x_hi = eval.x;
            r_hi = eval.residual;
        } else {
            lo = mid;
        }
    }
    let residual = norm2(&linalg::sub(&m.matvec(&x_hi), d));
    let objective = x_hi.iter().map(|v| v.abs()).sum();
    Ok(Some(ResidualBallSolution {
        x: x_hi,
        objective,
        residual,
        bisections,
        pareto_trace: trace,
    }))
}

struct ParetoEval<T> {
    x: Vec<T>,
    residual: T,
}

/// Evaluator for `φ(τ)` by accelerated projected gradient, with an exact
/// active-set polish whenever the iterate's support and signs settle.
struct Pareto<'a, T> {
    m: &'a Matrix<T>,
    d: &'a [T],
    x_ls: &'a [T],
    floor: T,
    lipschitz: T,
    opts: &'a ResidualBallOptions<T>,
}

impl<'a, T: Real> Pareto<'a, T> {
    fn new(m: &'a Matrix<T>, d: &'a [T], x_ls: &'a [T], floor: T, opts: &'a ResidualBallOptions<T>) -> Self {
        Pareto {
            m,
            d,
            x_ls,
            floor,
            lipschitz: linalg::spectral_norm_sq(m),
            opts,
        }
    }

    fn residual_of(&self, x: &[T]) -> T {
        norm2(&linalg::sub(&self.m.matvec(x), self.d))
    }

    /// With `decide = Some(h)`, returns early once the value `½φ(τ)²` is
    /// known to be above or at/below `h`.
    fn eval(&self, tau: T, warm: &[T], decide: Option<T>) -> ParetoEval<T> {
        let ls_l1: T = self.x_ls.iter().map(|v| v.abs()).sum();
        if ls_l1 <= tau {
            return ParetoEval {
                x: self.x_ls.to_vec(),
                residual: self.floor,
            };
        }
        if tau == T::zero() || self.lipschitz == T::zero() {
            let x = vec![T::zero(); self.m.cols()];
            let residual = self.residual_of(&x);
            return ParetoEval { x, residual };
        }
        let step = T::one() / self.lipschitz;
        let mut x = project_l1_ball_unchecked(warm, tau);
        if let Some(p) = self.polish(&x, tau) {
            return p;
        }
        let mut y = x.clone();
        let mut t = T::one();
        for it in 1..=self.opts.max_inner {
            let r = linalg::sub(&self.m.matvec(&y), self.d);
            let g = self.m.tr_matvec(&r);
            let z: Vec<T> = y.iter().zip(&g).map(|(&yi, &gi)| yi - step * gi).collect();
            let x_next = project_l1_ball_unchecked(&z, tau);
            let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
            let beta = (t - T::one()) / t_next;
            y = x_next
                .iter()
                .zip(&x)
                .map(|(&a, &b)| a + beta * (a - b))
                .collect();
            x = x_next;
            t = t_next;
            if it % 25 == 0 {
                if let Some(p) = self.polish(&x, tau) {
                    return p;
                }
                let r = linalg::sub(&self.m.matvec(&x), self.d);
                let g = self.m.tr_matvec(&r);
                let f = dot(&r, &r) / T::lit(2.0);
                let ginf = g.iter().fold(T::zero(), |a, v| a.max(v.abs()));
                let gap = (dot(&g, &x) + tau * ginf).max(T::zero());
                if let Some(h) = decide {
                    if f - gap > h || f <= h {
                        return ParetoEval {
                            residual: (T::lit(2.0) * f).sqrt(),
                            x,
                        };
                    }
                }
                if gap <= T::epsilon() * T::lit(16.0) * (T::one() + f) {
                    break;
                }
            }
        }
        let residual = self.residual_of(&x);
        ParetoEval { x, residual }
    }

    /// Solves the equality-constrained least-squares problem on the support
    /// and signs of `x`; accepted only if the KKT conditions of the
    /// ball-constrained problem verify.
    fn polish(&self, x: &[T], tau: T) -> Option<ParetoEval<T>> {
        let xmax = x.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if xmax == T::zero() {
            return None;
        }
        let cut = xmax * T::lit(1e-9);
        let supp: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() > cut).collect();
        let s = supp.len();
        if s > self.m.rows() {
            return None;
        }
        let signs: Vec<T> = supp.iter().map(|&i| x[i].signum()).collect();
        let rows: Vec<usize> = (0..self.m.rows()).collect();
        let g = self.m.gram(&rows, &supp);
        let k = s + 1;
        let mut kkt = vec![T::zero(); k * k];
        for a in 0..s {
            for b in 0..s {
                kkt[a * k + b] = g[a * s + b];
            }
            kkt[a * k + s] = signs[a];
            kkt[s * k + a] = signs[a];
        }
        let mtd = self.m.tr_matvec(self.d);
        let mut rhs: Vec<T> = supp.iter().map(|&i| mtd[i]).collect();
        rhs.push(tau);
        let sol = lu_solve(&kkt, k, &rhs, T::lit(1e-13))?;
        let mu = sol[s];
        if mu < T::zero() {
            return None;
        }
        let mut cand = vec![T::zero(); x.len()];
        for (a, &i) in supp.iter().enumerate() {
            if sol[a] * signs[a] < T::zero() {
                return None;
            }
            cand[i] = sol[a];
        }
        let r = linalg::sub(self.d, &self.m.matvec(&cand));
        let corr = self.m.tr_matvec(&r);
        let slack = T::lit(1e-9) * (T::one() + mu) ;
        for j in 0..x.len() {
            if cand[j] == T::zero() && corr[j].abs() > mu + slack {
                return None;
            }
        }
        Some(ParetoEval {
            residual: norm2(&r),
            x: cand,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn lp_small_examples() {
        let o = LpOptions::default();
        let s = solve_lp(&[1.0], &mat(&[&[1.0]]), &[3.0], &[true], &o).unwrap();
        assert!(s.is_optimal());
        assert_eq!(s.objective, 3.0);

        let s = solve_lp(&[1.0, 1.0], &mat(&[&[1.0, 1.0]]), &[2.0], &[true, true], &o).unwrap();
        assert_eq!(s.objective, 2.0);
        let again = solve_lp(&[1.0, 1.0], &mat(&[&[1.0, 1.0]]), &[2.0], &[true, true], &o).unwrap();
        assert_eq!(s, again);

        let s = solve_lp(&[1.0], &mat(&[&[1.0]]), &[-1.0], &[true], &o).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);

        let s = solve_lp(&[-1.0, 0.0], &mat(&[&[1.0, -1.0]]), &[0.0], &[true, true], &o).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);

        // free variable: min x s.t. x + y = 1, y in [0,inf) is unbounded below;
        // min y with x free, x + y = 1 is 0
        let s = solve_lp(&[0.0, 1.0], &mat(&[&[1.0, 1.0]]), &[1.0], &[false, true], &o).unwrap();
        assert!(s.is_optimal() && s.objective == 0.0);

        // redundant equality rows
        let s = solve_lp(
            &[1.0, 2.0],
            &mat(&[&[1.0, 1.0], &[2.0, 2.0]]),
            &[1.0, 2.0],
            &[true, true],
            &o,
        )
        .unwrap();
        assert!(s.is_optimal());
        assert!((s.objective - 1.0).abs() < 1e-12);

        assert!(solve_lp(&[1.0], &mat(&[&[1.0, 2.0]]), &[1.0], &[true], &o).is_err());
    }

    #[test]
    fn min_l1_affine_examples() {
        let s = min_l1_affine(&Matrix::identity(3), &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(s.point, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.objective, 3.5);
        let s = min_l1_affine(&mat(&[&[1.0, 2.0]]), &[2.0]).unwrap();
        assert!((s.point[0]).abs() < 1e-15 && (s.point[1] - 1.0).abs() < 1e-15);
        assert_eq!(s.objective, 1.0);
        let s = min_l1_affine(&mat(&[&[1.0, 2.0], &[0.5, -1.0]]), &[0.0, 0.0]).unwrap();
        assert_eq!(s.objective, 0.0);
        // M = 0 is feasible iff d = 0
        let z = mat(&[&[0.0, 0.0]]);
        assert_eq!(min_l1_affine(&z, &[0.0]).unwrap().point, vec![0.0, 0.0]);
        assert_eq!(min_l1_affine(&z, &[1.0]).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn offsupport_examples() {
        let m = mat(&[&[1.0, 2.0, -1.0]]);
        let all = min_l1_offsupport_affine(&m, &[3.0], &[0, 1, 2]).unwrap();
        assert_eq!(all.objective, 0.0);
        let none = min_l1_offsupport_affine(&m, &[3.0], &[]).unwrap();
        assert_eq!(none.objective, min_l1_affine(&m, &[3.0]).unwrap().objective);
        let one = min_l1_offsupport_affine(&m, &[3.0], &[2]).unwrap();
        assert_eq!(one.objective, 0.0);
        assert!((one.point[2] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_l1_ball(&[0.2, -0.3], 1.0).unwrap(), vec![0.2, -0.3]);
        assert_eq!(project_l1_ball(&[3.0, 0.0], 1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_l1_ball(&[2.0, 1.0], 1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_l1_ball(&[2.0, -1.0], 0.0).unwrap(), vec![0.0, 0.0]);
        assert!(project_l1_ball(&[1.0], -1.0).is_err());
        let w = project_l1_ball(&[1.0f64, -1.0, 0.5], 1.0).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] + 0.5).abs() < 1e-15 && w[2] == 0.0);
    }

    #[test]
    fn residual_ball_examples() {
        let id = Matrix::identity(2);
        let s = min_l1_residual_ball(&id, &[2.0f64, 0.0], 1.0).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9 && s.x[1].abs() < 1e-12);
        assert!(s.residual <= 1.0 + 1e-9);

        let s = min_l1_residual_ball(&id, &[0.3, 0.4], 0.5).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);

        let s = min_l1_residual_ball(&mat(&[&[1.0, 2.0]]), &[2.0], 0.0).unwrap();
        assert_eq!(s.objective, 1.0);

        let over = mat(&[&[1.0], &[1.0]]);
        match min_l1_residual_ball(&over, &[1.0, -1.0], 0.5) {
            Err(Error::Infeasible { min_residual, .. }) => {
                assert!((min_residual - 2f64.sqrt()).abs() < 1e-12)
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert!(min_l1_residual_ball(&over, &[1.0, 1.0], -0.1).is_err());
    }

    #[test]
    fn pareto_trace_is_monotone() {
        let m = mat(&[
            &[0.3, -1.2, 0.5, 0.8],
            &[1.1, 0.4, -0.7, 0.2],
            &[-0.6, 0.9, 0.3, -1.0],
        ]);
        let s = min_l1_residual_ball(&m, &[1.0, -0.5, 0.7], 0.2).unwrap();
        let mut tr = s.pareto_trace.clone();
        tr.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in tr.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "{w:?}");
        }
        assert!(s.residual <= 0.2 + 1e-9);
    }
}
