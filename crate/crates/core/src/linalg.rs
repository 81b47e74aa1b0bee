//! Small dense linear algebra: row-major matrices, a cyclic Jacobi
//! eigensolver, LU solves and least-squares helpers.
//!
//! Everything here is sized for desk-scale problems (tens of rows and
//! columns) and favours determinism over raw speed.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return input(format!(
                "matrix data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return input("ragged rows");
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Mᵀ v`
    pub fn tr_matvec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Matrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// `diag(s) M`
    pub fn scale_rows(&self, s: &[T]) -> Self {
        let mut out = self.clone();
        for (i, &si) in s.iter().enumerate() {
            for v in &mut out.data[i * self.cols..(i + 1) * self.cols] {
                *v *= si;
            }
        }
        out
    }

    /// `Mᵀ M` restricted to the given rows and columns.
    pub fn gram(&self, rows: &[usize], cols: &[usize]) -> Vec<T> {
        let k = cols.len();
        let mut g = vec![T::zero(); k * k];
        for &i in rows {
            let r = self.row(i);
            for a in 0..k {
                let ra = r[cols[a]];
                if ra == T::zero() {
                    continue;
                }
                for b in a..k {
                    g[a * k + b] += ra * r[cols[b]];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                g[a * k + b] = g[b * k + a];
            }
        }
        g
    }

    pub fn full_gram(&self) -> Vec<T> {
        let rows: Vec<usize> = (0..self.rows).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        self.gram(&rows, &cols)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    // scaled to avoid overflow on large entries
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = a.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Eigen-decomposition of a symmetric `n×n` matrix (row-major) by cyclic
/// Jacobi rotations. Eigenvalues are returned ascending; `vectors[j]` is the
/// unit eigenvector for `values[j]`.
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

pub fn sym_eigen<T: Real>(sym: &[T], n: usize) -> SymEigen<T> {
    assert_eq!(sym.len(), n * n, "sym_eigen: expected {n}x{n} input");
    let mut a = sym.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = a[i * n + j] * a[i * n + j];
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    SymEigen {
        values: order.iter().map(|&i| a[i * n + i]).collect(),
        vectors: order
            .iter()
            .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
            .collect(),
    }
}

/// Extremal eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
pub fn sym_extremes<T: Real>(sym: &[T], n: usize) -> (T, T) {
    match n {
        0 => (T::zero(), T::zero()),
        1 => (sym[0], sym[0]),
        2 => {
            let (a, b, d) = (sym[0], sym[1], sym[3]);
            let mean = (a + d) / T::lit(2.0);
            let half = (a - d) / T::lit(2.0);
            let r = (half * half + b * b).sqrt();
            (mean - r, mean + r)
        }
        _ => {
            let e = sym_eigen(sym, n);
            (e.values[0], e.values[n - 1])
        }
    }
}

/// Solves `a x = b` for square `a` (row-major) by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `tol` relative
/// to the largest entry.
pub fn lu_solve<T: Real>(a: &[T], n: usize, b: &[T], tol: T) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if scale == T::zero() {
        return if n == 0 { Some(vec![]) } else { None };
    }
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= tol * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for k in (r + 1)..n {
            s -= m[r * n + k] * x[k];
        }
        x[r] = s / m[r * n + r];
    }
    Some(x)
}

/// Orthonormal basis of the column space of `m` (modified Gram-Schmidt with
/// column pivoting and one re-orthogonalisation pass).
pub fn range_basis<T: Real>(m: &Matrix<T>, rel_tol: T) -> Vec<Vec<T>> {
    let mut cols: Vec<Vec<T>> = (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)]).collect())
        .collect();
    let ref_norm = cols.iter().fold(T::zero(), |s, c| s.max(norm2(c)));
    let mut basis: Vec<Vec<T>> = Vec::new();
    if ref_norm == T::zero() {
        return basis;
    }
    while !cols.is_empty() && basis.len() < m.rows() {
        let (best, bnorm) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm2(c)))
            .fold((0, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
        if bnorm <= rel_tol * ref_norm {
            break;
        }
        let mut q = cols.swap_remove(best);
        for _ in 0..2 {
            for b in &basis {
                let p = dot(b, &q);
                for (qi, &bi) in q.iter_mut().zip(b) {
                    *qi -= p * bi;
                }
            }
        }
        let qn = norm2(&q);
        if qn <= rel_tol * ref_norm {
            continue;
        }
        for qi in &mut q {
            *qi /= qn;
        }
        for c in cols.iter_mut() {
            let p = dot(&q, c);
            for (ci, &qi) in c.iter_mut().zip(&q) {
                *ci -= p * qi;
            }
        }
        basis.push(q);
    }
    basis
}

/// Euclidean norm of the component of `d` orthogonal to `basis`.
pub fn residual_off_basis<T: Real>(basis: &[Vec<T>], d: &[T]) -> T {
    let mut r = d.to_vec();
    for _ in 0..2 {
        for q in basis {
            let p = dot(q, &r);
            for (ri, &qi) in r.iter_mut().zip(q) {
                *ri -= p * qi;
            }
        }
    }
    norm2(&r)
}

/// Minimum-norm least-squares solution of `m x ≈ d` and its residual norm.
pub fn least_squares<T: Real>(m: &Matrix<T>, d: &[T]) -> (Vec<T>, T) {
    let n = m.cols();
    let g = m.full_gram();
    let eig = sym_eigen(&g, n);
    let lmax = eig.values.iter().fold(T::zero(), |a, &b| a.max(b));
    let cut = lmax * T::lit(1e-13).max(T::epsilon() * T::lit(64.0));
    let mtd = m.tr_matvec(d);
    let mut x = vec![T::zero(); n];
    for (lam, vec) in eig.values.iter().zip(&eig.vectors) {
        if *lam > cut && *lam > T::zero() {
            let coef = dot(vec, &mtd) / *lam;
            for (xi, &vi) in x.iter_mut().zip(vec) {
                *xi += coef * vi;
            }
        }
    }
    let basis = range_basis(m, T::lit(1e-11).max(T::epsilon() * T::lit(64.0)));
    let floor = residual_off_basis(&basis, d);
    (x, floor)
}

/// Orthonormal basis of the null space of `m`.
pub fn null_space<T: Real>(m: &Matrix<T>, rel_tol: T) -> Vec<Vec<T>> {
    let n = m.cols();
    if m.rows() == 0 {
        return (0..n)
            .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
    }
    let g = m.full_gram();
    let eig = sym_eigen(&g, n);
    let lmax = eig.values.iter().fold(T::zero(), |a, &b| a.max(b));
    if lmax == T::zero() {
        return eig.vectors;
    }
    eig.values
        .iter()
        .zip(eig.vectors)
        .filter(|(lam, _)| **lam <= rel_tol * lmax)
        .map(|(_, v)| v)
        .collect()
}

/// Largest eigenvalue of `MᵀM`, i.e. the Lipschitz constant of the
/// least-squares gradient.
pub fn spectral_norm_sq<T: Real>(m: &Matrix<T>) -> T {
    let n = m.cols();
    if n == 0 || m.rows() == 0 {
        return T::zero();
    }
    sym_extremes(&m.full_gram(), n).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_diagonal_and_rotation() {
        let e = sym_eigen(&[2.0f64, 1.0, 1.0, 2.0], 2);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let v = &e.vectors[1];
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-12);

        let a = [4.0f64, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let e = sym_eigen(&a, 3);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lu_detects_singular() {
        assert!(lu_solve(&[1.0, 2.0, 2.0, 4.0], 2, &[1.0, 1.0], 1e-12).is_none());
        let x = lu_solve(&[0.0f64, 1.0, 1.0, 0.0], 2, &[3.0, 4.0], 1e-12).unwrap();
        assert_eq!(x, vec![4.0, 3.0]);
    }

    #[test]
    fn least_squares_floor_and_null_space() {
        let m = Matrix::from_rows(&[vec![1.0f64, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let (x, floor) = least_squares(&m, &[1.0, 1.0, 2.0]);
        assert!(floor < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let (_, floor) = least_squares(&m, &[1.0, 1.0, 0.0]);
        // residual of (1,1,0) off span{(1,0,1),(0,1,1)} is |(1,1,-1)|·2/3
        assert!((floor - 2.0 / 3.0f64.sqrt()).abs() < 1e-12);

        let a = Matrix::from_rows(&[vec![1.0f64, 1.0]]).unwrap();
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0] + ns[0][1]).abs() < 1e-12);
    }
}
