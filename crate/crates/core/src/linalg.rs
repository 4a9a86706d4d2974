//! Dense square matrices and the norms used by the quadratic-form bounds.
//!
//! Besides the Hilbert-Schmidt and operator norms this module provides the
//! diagonal splitting `A = A₀ + diag(a_ii)` and the Gram matrix `B = A₀ᵀA₀`
//! whose diagonal `b_ii = Σ_{j≠i} a_ji²` drives the off-diagonal MGF bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig17;

/// Largest accepted dimension.
pub const MAX_DIM: usize = 4096;
/// Default relative tolerance of [`op_norm`].
pub const OP_NORM_TOL: f64 = 1e-10;
/// Iteration cap of [`op_norm`].
pub const OP_NORM_MAX_ITER: usize = 10_000;

/// Dense real `n × n` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if n > MAX_DIM {
            return Err(Error::invalid(format!(
                "matrix dimension {n} exceeds the cap of {MAX_DIM}"
            )));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) is not finite",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::invalid(format!(
                "row {} has {} entries, expected {n}",
                bad,
                rows[bad].len()
            )));
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = *d;
        }
        Self::new(n, entries)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|v| v * c).collect())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self { n, entries }
    }

    /// `A v`
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        self.entries
            .chunks_exact(self.n)
            .map(|row| dot(row, v))
            .collect()
    }

    /// `Aᵀ v`
    pub fn matvec_t(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (row, vi) in self.entries.chunks_exact(self.n).zip(v) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }

    /// `vᵀ A v`, summed row by row in index order.
    #[inline]
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.entries
            .chunks_exact(self.n)
            .zip(v)
            .map(|(row, vi)| vi * dot(row, v))
            .sum()
    }

    /// Right multiplication by `diag(d)`: column `j` scaled by `d_j`.
    pub fn scale_columns(&self, d: &[f64]) -> Self {
        let entries = self
            .entries
            .chunks_exact(self.n)
            .flat_map(|row| row.iter().zip(d).map(|(a, s)| a * s))
            .collect();
        Self { n: self.n, entries }
    }

    /// Left multiplication by `diag(d)`: row `i` scaled by `d_i`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let entries = self
            .entries
            .chunks_exact(self.n)
            .zip(d)
            .flat_map(|(row, s)| row.iter().map(move |a| a * s))
            .collect();
        Self { n: self.n, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!(
                            "line {}: cannot parse {:?} as a number",
                            lineno + 1,
                            tok.trim()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("matrix CSV contains no rows".into()));
        }
        Self::from_rows(&rows)
    }

    /// One row per line, 17 significant digits, so that reading back is bit-exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in self.entries.chunks_exact(self.n) {
            let line: Vec<String> = row.iter().map(|v| sig17(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
        Self::new(file.n, file.entries)
    }

    pub fn to_json_string(&self) -> String {
        let file = MatrixFile {
            n: self.n,
            entries: self.entries.clone(),
        };
        serde_json::to_string(&file).expect("matrix entries are finite")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    entries: Vec<f64>,
}

/// Standard deviations `σ_1..σ_n`, the diagonal of `D_σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SigmaDiag(Vec<f64>);

impl SigmaDiag {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = sigmas.iter().position(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid(format!(
                "sigma[{bad}] = {} must be finite and nonnegative",
                sigmas[bad]
            )));
        }
        Ok(Self(sigmas))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Accepts a bare array `[1.0, 2.0]` or an object `{"sigmas": [...]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bare(Vec<f64>),
            Wrapped { sigmas: Vec<f64> },
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("sigmas JSON: {e}")))?;
        match raw {
            Raw::Bare(v) | Raw::Wrapped { sigmas: v } => Self::new(v),
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// Norms of `A` and its `D_σ`-scaled versions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormStats {
    /// `‖A‖_HS`
    pub hs: f64,
    /// `‖A‖_op`
    pub op: f64,
    /// `‖A D_σ‖_HS`
    pub hs_right_scaled: f64,
    /// `‖D_σ A D_σ‖_HS`
    pub hs_double_scaled: f64,
    /// `‖D_σ A D_σ‖_op`
    pub op_double_scaled: f64,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn euclid(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Hilbert-Schmidt (Frobenius) norm `√(Σ a_ij²)`.
pub fn hs_norm(a: &SquareMatrix) -> f64 {
    euclid(&a.entries)
}

/// Largest singular value, by power iteration on `AᵀA`.
///
/// Starts from the normalized all-ones vector, so the result is a
/// deterministic function of `a` and `tol`. Iteration stops once the
/// Rayleigh quotient changes by less than `tol` relative. If the start
/// vector lies in the kernel of `A` the iteration restarts from the basis
/// vector of the heaviest column.
pub fn op_norm(a: &SquareMatrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("op_norm tolerance must be positive"));
    }
    let n = a.n();
    let hs = hs_norm(a);
    if hs == 0.0 {
        return Ok(0.0);
    }

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut av = a.matvec(&v);
    if euclid(&av) <= 1e-8 * hs {
        let heaviest = (0..n)
            .max_by(|&i, &j| column_norm2(a, i).total_cmp(&column_norm2(a, j)))
            .unwrap_or(0);
        v = vec![0.0; n];
        v[heaviest] = 1.0;
        av = a.matvec(&v);
    }

    let mut estimate = dot(&av, &av);
    for _ in 0..OP_NORM_MAX_ITER {
        let w = a.matvec_t(&av);
        let norm_w = euclid(&w);
        if norm_w == 0.0 {
            return Ok(0.0);
        }
        v = w.into_iter().map(|x| x / norm_w).collect();
        av = a.matvec(&v);
        let next = dot(&av, &av);
        if (next - estimate).abs() <= tol * next {
            return Ok(next.sqrt());
        }
        estimate = next;
    }
    Err(Error::NonConvergence {
        iterations: OP_NORM_MAX_ITER,
    })
}

fn column_norm2(a: &SquareMatrix, j: usize) -> f64 {
    (0..a.n()).map(|i| a.get(i, j).powi(2)).sum()
}

/// `A₀`: `A` with its diagonal set to zero.
pub fn strip_diagonal(a: &SquareMatrix) -> SquareMatrix {
    let mut out = a.clone();
    for i in 0..a.n {
        out.entries[i * a.n + i] = 0.0;
    }
    out
}

/// `B = A₀ᵀA₀` and its diagonal `b_ii = Σ_{j≠i} a_ji²`.
pub fn offdiag_gram(a: &SquareMatrix) -> (SquareMatrix, Vec<f64>) {
    let a0 = strip_diagonal(a);
    let n = a.n;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let bij: f64 = (0..n).map(|k| a0.get(k, i) * a0.get(k, j)).sum();
            entries[i * n + j] = bij;
            entries[j * n + i] = bij;
        }
    }
    let b = SquareMatrix { n, entries };
    let b_diag = b.diag();
    (b, b_diag)
}

/// All five norms used by the bounds.
pub fn scaled_norm_stats(a: &SquareMatrix, sig: &SigmaDiag, tol: f64) -> Result<NormStats> {
    sig.check_dim(a.n())?;
    let s = sig.as_slice();
    let right = a.scale_columns(s);
    let double = right.scale_rows(s);
    Ok(NormStats {
        hs: hs_norm(a),
        op: op_norm(a, tol)?,
        hs_right_scaled: hs_norm(&right),
        hs_double_scaled: hs_norm(&double),
        op_double_scaled: op_norm(&double, tol)?,
    })
}
