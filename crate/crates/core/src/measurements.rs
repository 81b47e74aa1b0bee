//! Measurement matrices, the phaseless operator `x ↦ |Ax|`, noise
//! injection and row-subset utilities.

use std::ops::Deref;

use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{dot, norm2, Matrix};
use crate::rng::rng_from_seed;
use crate::scalar::Real;
use crate::signals::Signal;

/// Dense `m×N` measurement matrix `A = [a_1, …, a_m]ᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct MeasurementMatrix<T> {
    matrix: Matrix<T>,
    pub seed: Option<u64>,
}

impl<T: Real> MeasurementMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return input("measurement matrix needs m >= 1 and N >= 1");
        }
        if !matrix.is_finite() {
            return input("measurement matrix has non-finite entries");
        }
        Ok(MeasurementMatrix { matrix, seed: None })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// Text form: `m N` on the first line, then one row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m(), self.n());
        for i in 0..self.m() {
            let row: Vec<String> = self.matrix.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut dim = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Input(format!("matrix file: missing {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::Input(format!("matrix file: bad {what}: {e}")))
        };
        let m = dim("row count")?;
        let n = dim("column count")?;
        let values: Vec<&str> = tokens.collect();
        if values.len() != m * n {
            return input(format!(
                "matrix file: expected {} entries for {m}x{n}, found {}",
                m * n,
                values.len()
            ));
        }
        let data = values
            .iter()
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| Error::Input(format!("matrix file: cannot parse `{s}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        Self::new(Matrix::new(m, n, data)?)
    }
}

impl<T> Deref for MeasurementMatrix<T> {
    type Target = Matrix<T>;
    fn deref(&self) -> &Matrix<T> {
        &self.matrix
    }
}

/// Phaseless measurements `b` together with the ℓ2 size of the noise that
/// was added to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct Observation<T> {
    pub b: Vec<T>,
    pub noise_level: T,
    pub clamped: bool,
}

impl<T: Real> Observation<T> {
    pub fn new(b: Vec<T>, noise_level: T) -> Result<Self> {
        if b.iter().any(|v| !v.is_finite()) {
            return input("observation has non-finite entries");
        }
        if !(noise_level >= T::zero()) {
            return input("noise level must be nonnegative");
        }
        let clamped = b.iter().all(|v| *v >= T::zero());
        Ok(Observation {
            b,
            noise_level,
            clamped,
        })
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `b⁺ = max(b, 0)` entrywise.
    pub fn clamped_values(&self) -> Vec<T> {
        self.b.iter().map(|v| v.max(T::zero())).collect()
    }
}

/// i.i.d. `N(0, 1/m)` entries (standard deviation `1/√m`).
pub fn sample_gaussian<T: Real>(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix<T>> {
    if m == 0 || n == 0 {
        return input(format!("gaussian ensemble needs m, N >= 1 (got {m}x{n})"));
    }
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, 1.0 / (m as f64).sqrt()).expect("valid std");
    let data = (0..m * n).map(|_| T::lit(normal.sample(&mut rng))).collect();
    let mut a = MeasurementMatrix::new(Matrix::new(m, n, data)?)?;
    a.seed = Some(seed);
    Ok(a)
}

/// Two-column frame with rows `√(2·gain/m)·(cos(πj/m + phase), sin(πj/m + phase))`,
/// so that `AᵀA = gain·I` for `m ≥ 2`.
pub fn harmonic_frame<T: Real>(m: usize, phase: T, gain: T) -> Result<MeasurementMatrix<T>> {
    if m < 2 {
        return input(format!("harmonic frame needs m >= 2, got {m}"));
    }
    if !(gain > T::zero()) || !gain.is_finite() || !phase.is_finite() {
        return input("harmonic frame needs a finite phase and a positive gain");
    }
    let mf = T::from_usize_lossy(m);
    let amp = (T::lit(2.0) * gain / mf).sqrt();
    let pi = T::lit(std::f64::consts::PI);
    let mut data = Vec::with_capacity(2 * m);
    for j in 0..m {
        let ang = pi * T::from_usize_lossy(j) / mf + phase;
        data.push(amp * ang.cos());
        data.push(amp * ang.sin());
    }
    MeasurementMatrix::new(Matrix::new(m, 2, data)?)
}

pub fn phaseless_measure<T: Real>(a: &MeasurementMatrix<T>, x: &Signal<T>) -> Result<Observation<T>> {
    if a.n() != x.len() {
        return input(format!("matrix has {} columns, signal has {} entries", a.n(), x.len()));
    }
    let b = a.matvec(x.as_slice()).into_iter().map(|v| v.abs()).collect();
    Ok(Observation {
        b,
        noise_level: T::zero(),
        clamped: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub enum NoiseModel<T> {
    /// Gaussian direction rescaled to the requested ℓ2 magnitude.
    Gaussian,
    /// Uniform `[-1, 1]` direction rescaled to the requested ℓ2 magnitude.
    Uniform,
    /// Caller-supplied error vector, added as is.
    Adversarial(Vec<T>),
}

/// Adds noise to `obs`. The recorded `noise_level` grows by the exact ℓ2
/// norm of the added vector.
pub fn add_noise<T: Real>(
    obs: &Observation<T>,
    model: &NoiseModel<T>,
    magnitude: T,
    seed: u64,
) -> Result<Observation<T>> {
    if !(magnitude >= T::zero()) || !magnitude.is_finite() {
        return input(format!("noise magnitude must be finite and >= 0, got {magnitude}"));
    }
    let m = obs.len();
    let e: Vec<T> = match model {
        NoiseModel::Adversarial(e) => {
            if e.len() != m {
                return input(format!("noise vector has {} entries, observation has {m}", e.len()));
            }
            if e.iter().any(|v| !v.is_finite()) {
                return input("noise vector has non-finite entries");
            }
            e.clone()
        }
        NoiseModel::Gaussian | NoiseModel::Uniform => {
            if magnitude == T::zero() {
                return Ok(obs.clone());
            }
            let mut rng = rng_from_seed(seed);
            let raw: Vec<f64> = match model {
                NoiseModel::Gaussian => {
                    let d = Normal::new(0.0, 1.0).expect("unit normal");
                    (0..m).map(|_| d.sample(&mut rng)).collect()
                }
                _ => {
                    let d = Uniform::new_inclusive(-1.0, 1.0).expect("unit interval");
                    (0..m).map(|_| d.sample(&mut rng)).collect()
                }
            };
            let raw: Vec<T> = raw.into_iter().map(T::lit).collect();
            let nrm = norm2(&raw);
            if nrm == T::zero() {
                return Ok(obs.clone());
            }
            raw.into_iter().map(|v| v / nrm * magnitude).collect()
        }
    };
    let level = norm2(&e);
    Ok(Observation {
        b: obs.b.iter().zip(&e).map(|(&b, &e)| b + e).collect(),
        noise_level: obs.noise_level + level,
        clamped: false,
    })
}

/// `A_I`: rows of `A` listed in `rows`, taken in ascending order with
/// duplicates removed.
pub fn row_submatrix<T: Real>(a: &MeasurementMatrix<T>, rows: &[usize]) -> Result<MeasurementMatrix<T>> {
    let mut idx = rows.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() {
        return input("row subset must be nonempty");
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= a.m()) {
        return input(format!("row index {bad} out of range for m = {}", a.m()));
    }
    let mut sub = MeasurementMatrix::new(a.select_rows(&idx))?;
    sub.seed = a.seed;
    Ok(sub)
}

/// Sign of `v` with `sign(0) = +1`.
pub fn sign_of<T: Real>(v: T) -> T {
    if v < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

/// Splits the rows into `T = {j : sign⟨a_j,x⟩ = sign⟨a_j,y⟩}` and its
/// complement.
pub fn sign_partition<T: Real>(
    a: &MeasurementMatrix<T>,
    x: &Signal<T>,
    y: &Signal<T>,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if x.len() != a.n() || y.len() != a.n() {
        return input("sign_partition: dimension mismatch");
    }
    let mut same = Vec::new();
    let mut flipped = Vec::new();
    for j in 0..a.m() {
        let r = a.row(j);
        if sign_of(dot(r, x.as_slice())) == sign_of(dot(r, y.as_slice())) {
            same.push(j);
        } else {
            flipped.push(j);
        }
    }
    Ok((same, flipped))
}
