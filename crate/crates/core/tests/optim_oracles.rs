use cpr_core::linalg::{range_basis, Matrix};
use cpr_core::optim::{
    min_l1_affine, min_l1_offsupport_affine, min_l1_residual_ball, project_l1_ball, solve_lp,
    LpOptions, LpStatus,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix<f64> {
    let data = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::new(m, n, data).unwrap()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Plain Gaussian elimination, kept separate from the crate's LU.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
        let mut r = r.clone();
        r.push(v);
        r
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Minimum over all basic feasible solutions of `min cᵀz, Ez = f, z ≥ 0`.
fn vertex_enumeration(c: &[f64], e: &Matrix<f64>, f: &[f64]) -> Option<f64> {
    let (m, n) = (e.rows(), e.cols());
    let mut best: Option<f64> = None;
    for cols in combinations(n, m) {
        let a: Vec<Vec<f64>> = (0..m).map(|i| cols.iter().map(|&j| e[(i, j)]).collect()).collect();
        if let Some(x) = solve_dense(&a, f) {
            if x.iter().all(|&v| v >= -1e-10) {
                let obj: f64 = cols.iter().zip(&x).map(|(&j, &v)| c[j] * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = LpOptions::default();
    for trial in 0..200 {
        let n = rng.random_range(3..=8);
        let m = rng.random_range(1..n.min(4));
        let e = rand_matrix(&mut rng, m, n);
        let z0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let f = e.matvec(&z0);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let sol = solve_lp(&c, &e, &f, &vec![true; n], &opts).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
        let oracle = vertex_enumeration(&c, &e, &f).unwrap();
        assert!((sol.objective - oracle).abs() < 1e-9, "trial {trial}: {} vs {oracle}", sol.objective);
        assert!(sol.primal_residual <= 1e-9 && sol.duality_gap <= 1e-9);
        // determinism
        assert_eq!(sol, solve_lp(&c, &e, &f, &vec![true; n], &opts).unwrap());
    }
}

#[test]
fn lp_reports_infeasible() {
    // z1 + z2 = -1 with z >= 0
    let e = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    let s = solve_lp(&[1.0, 1.0], &e, &[-1.0], &[true, true], &LpOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
}

#[test]
fn min_l1_affine_is_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let m = rand_matrix(&mut rng, 3, 6);
        let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let base = min_l1_affine(&m, &d).unwrap().objective;
        for t in [0.5, 2.0, 7.0] {
            let dt: Vec<f64> = d.iter().map(|v| v * t).collect();
            let o = min_l1_affine(&m, &dt).unwrap().objective;
            assert!((o - t * base).abs() < 1e-9 * (1.0 + t * base));
        }
    }
}

/// Eliminates the unpenalised columns with the projector onto
/// `range(M_T)^⊥`, then runs plain ℓ1 minimisation on what is left.
#[test]
fn offsupport_matches_elimination_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let m = rand_matrix(&mut rng, 3, 6);
        let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t: Vec<usize> = vec![rng.random_range(0..3), rng.random_range(3..6)];
        let sol = min_l1_offsupport_affine(&m, &d, &t).unwrap();

        let basis = range_basis(&m.select_cols(&t), 1e-12);
        let project = |v: &[f64]| -> Vec<f64> {
            let mut r = v.to_vec();
            for q in &basis {
                let p: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= p * qi;
                }
            }
            r
        };
        let rest: Vec<usize> = (0..6).filter(|j| !t.contains(j)).collect();
        let mr = m.select_cols(&rest);
        let mut pm = Matrix::zeros(3, rest.len());
        for j in 0..rest.len() {
            let col: Vec<f64> = (0..3).map(|i| mr[(i, j)]).collect();
            for (i, v) in project(&col).into_iter().enumerate() {
                pm[(i, j)] = v;
            }
        }
        let oracle = min_l1_affine(&pm, &project(&d)).unwrap().objective;
        assert!((sol.objective - oracle).abs() < 1e-8, "{} vs {oracle}", sol.objective);
        let resid: f64 = m
            .matvec(&sol.point)
            .iter()
            .zip(&d)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(resid < 1e-9);
    }
}

/// Exact active-set enumeration for `min ‖x‖₁ s.t. ‖Mx − d‖₂ ≤ eps`: on each
/// support/sign pair the optimality conditions reduce to a scalar quadratic
/// in the multiplier.
fn residual_ball_oracle(m: &Matrix<f64>, d: &[f64], eps: f64) -> f64 {
    let (rows, n) = (m.rows(), m.cols());
    let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if dn <= eps {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for size in 1..=rows.min(n) {
        for supp in combinations(n, size) {
            for signs in 0u32..(1 << size) {
                let z: Vec<f64> = (0..size).map(|a| if signs >> a & 1 == 1 { -1.0 } else { 1.0 }).collect();
                let g: Vec<Vec<f64>> = (0..size)
                    .map(|a| (0..size).map(|b| (0..rows).map(|i| m[(i, supp[a])] * m[(i, supp[b])]).sum()).collect())
                    .collect();
                let mtd: Vec<f64> = supp.iter().map(|&j| (0..rows).map(|i| m[(i, j)] * d[i]).sum()).collect();
                // x(λ) = u - λ w
                let Some(u) = solve_dense(&g, &mtd) else { continue };
                let Some(w) = solve_dense(&g, &z) else { continue };
                let mu: Vec<f64> = (0..rows).map(|i| supp.iter().zip(&u).map(|(&j, &v)| m[(i, j)] * v).sum()).collect();
                let mw: Vec<f64> = (0..rows).map(|i| supp.iter().zip(&w).map(|(&j, &v)| m[(i, j)] * v).sum()).collect();
                // r(λ) = d - Mu + λ Mw
                let r0: Vec<f64> = d.iter().zip(&mu).map(|(a, b)| a - b).collect();
                let qa: f64 = mw.iter().map(|v| v * v).sum();
                let qb: f64 = 2.0 * r0.iter().zip(&mw).map(|(a, b)| a * b).sum::<f64>();
                let qc: f64 = r0.iter().map(|v| v * v).sum::<f64>() - eps * eps;
                let disc = qb * qb - 4.0 * qa * qc;
                if qa < 1e-14 || disc < 0.0 {
                    continue;
                }
                for lam in [(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)] {
                    if lam <= 0.0 {
                        continue;
                    }
                    let x: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - lam * b).collect();
                    if x.iter().zip(&z).any(|(v, s)| v * s < -1e-12) {
                        continue;
                    }
                    let r: Vec<f64> = r0.iter().zip(&mw).map(|(a, b)| a + lam * b).collect();
                    let ok = (0..n).filter(|j| !supp.contains(j)).all(|j| {
                        let c: f64 = (0..rows).map(|i| m[(i, j)] * r[i]).sum();
                        c.abs() <= lam * (1.0 + 1e-9)
                    });
                    if ok {
                        best = best.min(x.iter().map(|v| v.abs()).sum());
                    }
                }
            }
        }
    }
    best
}

#[test]
fn residual_ball_matches_active_set_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..25 {
        let m = rand_matrix(&mut rng, 4, 6);
        let d: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let eps = dn * rng.random_range(0.05..0.8);
        let sol = min_l1_residual_ball(&m, &d, eps).unwrap();
        let oracle = residual_ball_oracle(&m, &d, eps);
        assert!(
            (sol.objective - oracle).abs() < 1e-5,
            "trial {trial}: {} vs oracle {oracle}",
            sol.objective
        );
        assert!(sol.residual <= eps + 1e-9);
    }
}

proptest! {
    #[test]
    fn projection_is_feasible_and_variational(
        v in prop::collection::vec(-5.0f64..5.0, 1..8),
        tau in 0.0f64..4.0,
        u_raw in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let w = project_l1_ball(&v, tau).unwrap();
        let l1: f64 = w.iter().map(|x| x.abs()).sum();
        prop_assert!(l1 <= tau + 1e-12);
        // sampled feasible u: scale into the ball
        let u: Vec<f64> = u_raw[..v.len()].to_vec();
        let ul1: f64 = u.iter().map(|x| x.abs()).sum();
        let u: Vec<f64> = if ul1 > tau && ul1 > 0.0 { u.iter().map(|x| x * tau / ul1).collect() } else { u };
        let inner: f64 = v.iter().zip(&w).zip(&u).map(|((vi, wi), ui)| (vi - wi) * (ui - wi)).sum();
        prop_assert!(inner <= 1e-10);
    }
}
