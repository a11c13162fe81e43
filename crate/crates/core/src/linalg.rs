//! Dense complex matrices and the handful of factorizations the optimizer
//! needs: LU solve, log-determinant, rank-one eigen extraction and unitary
//! basis completion.
//!
//! Everything here is sized for the small matrices that appear in the
//! per-element updates (a few receive antennas by a few dozen transmit
//! antennas); no blocking or SIMD is attempted.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::tolerances;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular (pivot {pivot:.3e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("determinant is not positive real (phase {phase})")]
    NonPositiveDeterminant { phase: C64 },
    #[error("matrix is numerically zero")]
    ZeroMatrix,
    #[error("vector norm {norm} is not one")]
    NotUnit { norm: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LinalgError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn column_vector(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `a bᴴ`
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `self += s · a bᴴ`
    pub fn add_outer(&mut self, s: C64, a: &[C64], b: &[C64]) {
        assert_eq!(
            (a.len(), b.len()),
            self.shape(),
            "outer update shape mismatch"
        );
        for (i, &ai) in a.iter().enumerate() {
            let sa = s * ai;
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (x, &bj) in row.iter_mut().zip(b) {
                *x += sa * bj.conj();
            }
        }
    }

    /// `self · selfᴴ`, exactly Hermitian.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let z: C64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(&a, &b)| a * b.conj())
                    .sum();
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        for i in 0..self.rows {
            out[(i, i)].im = 0.0;
        }
        out
    }

    /// Largest entrywise deviation from `selfᴴ`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Copy of the rows `0..r` and columns `0..c`.
    pub fn top_left(&self, r: usize, c: usize) -> Self {
        Self::from_fn(r, c, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.shape(),
            rhs.shape(),
            "matrix difference shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `aᴴ b`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(&x, &y)| x.conj() * y).sum()
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    factors: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::Shape(format!(
                "LU of a non-square {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let threshold = tolerances::PIVOT_RELATIVE * a.max_abs();
        let mut f = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, mag) = (k..n)
                .map(|i| (i, f[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if mag <= threshold || mag == 0.0 {
                return Err(LinalgError::SingularMatrix {
                    column: k,
                    pivot: mag,
                });
            }
            if p != k {
                for j in 0..n {
                    f.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = f[(k, k)];
            for i in k + 1..n {
                let m = f[(i, k)] / pivot;
                f[(i, k)] = m;
                if m == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = f[(k, j)];
                    f[(i, j)] -= m * u;
                }
            }
        }
        Ok(Self {
            n,
            factors: f,
            perm,
            swaps,
        })
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if b.rows != self.n {
            return Err(LinalgError::Shape(format!(
                "right-hand side has {} rows, system has {}",
                b.rows, self.n
            )));
        }
        let n = self.n;
        let mut x = ComplexMatrix::from_fn(n, b.cols, |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.factors[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.factors[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.factors[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
        Ok(self.solve(&ComplexMatrix::column_vector(b))?.data)
    }

    /// `(log₂|det|, unit phase of det)`, accumulated pivot by pivot.
    pub fn log2_det(&self) -> (f64, C64) {
        let mut log_mag = 0.0;
        let mut phase = if self.swaps.is_multiple_of(2) {
            ONE
        } else {
            -ONE
        };
        for i in 0..self.n {
            let p = self.factors[(i, i)];
            let m = p.norm();
            log_mag += m.log2();
            phase *= p / m;
        }
        (log_mag, phase)
    }
}

/// Solves `A·X = B`.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Lu::new(a)?.solve(b)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    lu_solve(a, &ComplexMatrix::identity(a.rows))
}

/// `log₂|det A|` for a matrix whose determinant is real and positive.
pub fn logdet(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    let (log_mag, phase) = Lu::new(a)?.log2_det();
    if phase.re <= tolerances::DETERMINANT_PHASE {
        return Err(LinalgError::NonPositiveDeterminant { phase });
    }
    Ok(log_mag)
}

/// Determinant by Gaussian elimination with partial pivoting; zero for an
/// exactly singular matrix.
pub fn det(a: &ComplexMatrix) -> Result<C64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape(
            "determinant of a non-square matrix".into(),
        ));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut d = ONE;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm()))
            .expect("non-empty");
        if m[(p, k)] == ZERO {
            return Ok(ZERO);
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            d = -d;
        }
        let pivot = m[(k, k)];
        d *= pivot;
        for i in k + 1..n {
            let f = m[(i, k)] / pivot;
            for j in k + 1..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
        }
    }
    Ok(d)
}

/// Largest size for which [`log2_det_identity_plus`] expands in minors.
const MINOR_EXPANSION_MAX: usize = 8;

/// `log₂|det(I + D)|` for a determinant that is real and positive. Up to
/// [`MINOR_EXPANSION_MAX`], `det(I + D) − 1` is summed from the principal
/// minors of `D`, which keeps full relative accuracy when `D` is small.
pub fn log2_det_identity_plus(d: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !d.is_square() {
        return Err(LinalgError::Shape(
            "determinant of a non-square matrix".into(),
        ));
    }
    let n = d.rows();
    if n > MINOR_EXPANSION_MAX {
        return logdet(&(&ComplexMatrix::identity(n) + d));
    }
    let mut excess = ZERO;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let minor = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| d[(idx[i], idx[j])]);
        excess += det(&minor)?;
    }
    let total = ONE + excess;
    let phase = if total == ZERO {
        ZERO
    } else {
        total / total.norm()
    };
    if phase.re <= tolerances::DETERMINANT_PHASE {
        return Err(LinalgError::NonPositiveDeterminant { phase });
    }
    Ok(excess.re.ln_1p() / std::f64::consts::LN_2)
}

/// The non-zero eigenpair of a rank-one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Eigen {
    pub eigenvalue: C64,
    /// Unit norm.
    pub eigenvector: Vec<C64>,
}

/// Eigenpair of `M = a·bᴴ`: the eigenvalue is `trace(M) = bᴴa` and the
/// eigenvector is `a`. Pass `a` as `left_factor` when it is known; otherwise
/// the largest column of `M` is used.
pub fn rank1_eigen(
    m: &ComplexMatrix,
    left_factor: Option<&[C64]>,
) -> Result<Rank1Eigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(
            "eigenpair of a non-square matrix".into(),
        ));
    }
    let scale = m.max_abs();
    if scale <= tolerances::ZERO_MATRIX {
        return Err(LinalgError::ZeroMatrix);
    }
    debug_assert!(
        {
            // rank ≤ 1 implies M² = trace(M)·M
            let sq = m * m;
            let lin = m.scale(m.trace());
            (&sq - &lin).max_abs() <= 1e-6 * scale * scale.max(m.trace().norm())
        },
        "rank1_eigen called on a matrix of rank > 1"
    );
    let v = match left_factor {
        Some(a) => a.to_vec(),
        None => {
            let j = (0..m.cols)
                .max_by(|&x, &y| {
                    vec_norm(&m.column(x))
                        .partial_cmp(&vec_norm(&m.column(y)))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            m.column(j)
        }
    };
    let norm = vec_norm(&v);
    if norm == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok(Rank1Eigen {
        eigenvalue: m.trace(),
        eigenvector: v.iter().map(|&z| z / norm).collect(),
    })
}

/// Unitary `dim×dim` matrix whose first column is `u`.
///
/// Built from the Householder reflection that maps `e^{jφ}e₁` onto `u`
/// (φ the phase of `u₁`), followed by a phase on the first column, so the
/// result depends only on `u`.
pub fn complete_basis(u: &[C64], dim: usize) -> Result<ComplexMatrix, LinalgError> {
    if u.len() != dim {
        return Err(LinalgError::Shape(format!(
            "vector of length {} for a basis of dimension {dim}",
            u.len()
        )));
    }
    let norm = vec_norm(u);
    if (norm - 1.0).abs() > tolerances::UNIT_NORM {
        return Err(LinalgError::NotUnit { norm });
    }
    let phase = if u[0].norm() > 0.0 {
        u[0] / u[0].norm()
    } else {
        ONE
    };
    // w = e^{jφ}e₁ − u
    let mut w: Vec<C64> = u.iter().map(|&z| -z).collect();
    w[0] += phase;
    let w2 = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut h = ComplexMatrix::identity(dim);
    if w2 > 1e-30 {
        h.add_outer(C64::new(-2.0 / w2, 0.0), &w, &w);
    }
    for i in 0..dim {
        h[(i, 0)] *= phase;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, r: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, k, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    /// Cofactor expansion; exponential but exact enough for n ≤ 5.
    fn det_cofactor(m: &ComplexMatrix) -> C64 {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut total = ZERO;
        for j in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, n - 1, |r, s| {
                m[(r + 1, if s < j { s } else { s + 1 })]
            });
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += m[(0, j)] * det_cofactor(&minor) * sign;
        }
        total
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_matrix(&mut rng, 2, 3);
        let x = lu_solve(&ComplexMatrix::identity(2), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_diagonal() {
        let a = ComplexMatrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let x = lu_solve(&a, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(x, ComplexMatrix::diag(&[c(0.5, 0.0), c(0.25, 0.0)]));
    }

    #[test]
    fn solve_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = &random_matrix(&mut rng, 5, 5) + &ComplexMatrix::identity(5).scale_real(3.0);
            let x = random_matrix(&mut rng, 5, 2);
            let back = lu_solve(&a, &(&a * &x)).unwrap();
            assert!((&back - &x).max_abs() <= 1e-9 * x.max_abs());
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = ComplexMatrix::outer(&[c(1.0, 0.0), c(2.0, 1.0)], &[c(0.5, 0.5), c(1.0, 0.0)]);
        assert!(matches!(
            lu_solve(&a, &ComplexMatrix::identity(2)),
            Err(LinalgError::SingularMatrix { .. })
        ));
        assert!(matches!(
            logdet(&a),
            Err(LinalgError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn logdet_simple_cases() {
        assert_eq!(logdet(&ComplexMatrix::identity(4)).unwrap(), 0.0);
        let d = ComplexMatrix::diag(&[c(2.0, 0.0), c(2.0, 0.0)]);
        assert!((logdet(&d).unwrap() - 2.0).abs() < 1e-15);
        let neg = ComplexMatrix::diag(&[c(-2.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            logdet(&neg),
            Err(LinalgError::NonPositiveDeterminant { .. })
        ));
    }

    #[test]
    fn logdet_matches_determinant_lemma() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let v = random_vec(&mut rng, n);
            let mut m = ComplexMatrix::identity(n);
            m.add_outer(ONE, &v, &v);
            let expected = (1.0 + vec_norm(&v).powi(2)).log2();
            assert!((logdet(&m).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn logdet_matches_cofactor_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..5 {
            let g = random_matrix(&mut rng, n, n + 1);
            let m = &ComplexMatrix::identity(n) + &g.gram();
            let d = det_cofactor(&m);
            assert!(d.im.abs() < 1e-10 * d.re);
            assert!((logdet(&m).unwrap() - d.re.log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn elimination_determinant_matches_cofactors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..5 {
            let m = random_matrix(&mut rng, n, n);
            assert!((det(&m).unwrap() - det_cofactor(&m)).norm() < 1e-12);
        }
        assert_eq!(det(&ComplexMatrix::zeros(2, 2)).unwrap(), ZERO);
    }

    #[test]
    fn identity_plus_small_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..4 {
            let v = random_vec(&mut rng, n);
            let mut d = ComplexMatrix::zeros(n, n);
            d.add_outer(c(1e-9, 0.0), &v, &v);
            let expected = (1e-9 * vec_norm(&v).powi(2)).ln_1p() / std::f64::consts::LN_2;
            let got = log2_det_identity_plus(&d).unwrap();
            assert!(((got - expected) / expected).abs() < 1e-12);
            let g = random_matrix(&mut rng, n, n + 1).gram();
            let full = logdet(&(&ComplexMatrix::identity(n) + &g)).unwrap();
            assert!((log2_det_identity_plus(&g).unwrap() - full).abs() < 1e-12);
        }
        let neg = ComplexMatrix::diag(&[c(-2.0, 0.0)]);
        assert!(matches!(
            log2_det_identity_plus(&neg),
            Err(LinalgError::NonPositiveDeterminant { .. })
        ));
    }

    #[test]
    fn rank1_projector() {
        let a = [c(1.0, 0.0), c(0.0, 0.0)];
        let e = rank1_eigen(&ComplexMatrix::outer(&a, &a), None).unwrap();
        assert_eq!(e.eigenvalue, ONE);
        assert_eq!(e.eigenvector, a.to_vec());
    }

    #[test]
    fn rank1_zero_matrix_is_flagged() {
        assert_eq!(
            rank1_eigen(&ComplexMatrix::zeros(3, 3), None),
            Err(LinalgError::ZeroMatrix)
        );
    }

    #[test]
    fn rank1_eigenvalue_is_a_root_of_the_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = random_vec(&mut rng, 3);
            let b = random_vec(&mut rng, 3);
            let m = ComplexMatrix::outer(&a, &b);
            let e = rank1_eigen(&m, None).unwrap();
            assert!((e.eigenvalue - inner(&b, &a)).norm() < 1e-12);
            // det(M − λI) must vanish at the reported eigenvalue
            let shifted = &m - &ComplexMatrix::identity(3).scale(e.eigenvalue);
            let scale = e.eigenvalue.norm().powi(3).max(1e-12);
            assert!(det_cofactor(&shifted).norm() < 1e-10 * scale);
            let mv = m.matvec(&e.eigenvector);
            for (x, y) in mv.iter().zip(&e.eigenvector) {
                assert!((x - e.eigenvalue * y).norm() < 1e-9 * m.frobenius_norm());
            }
        }
    }

    #[test]
    fn complete_basis_of_e1_is_identity() {
        let u = [ONE, ZERO];
        assert_eq!(complete_basis(&u, 2).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn complete_basis_is_unitary_with_given_first_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for dim in 1..6 {
            for _ in 0..20 {
                let v = random_vec(&mut rng, dim);
                let n = vec_norm(&v);
                let u: Vec<C64> = v.iter().map(|&z| z / n).collect();
                let q = complete_basis(&u, dim).unwrap();
                let defect = &(&q.adjoint() * &q) - &ComplexMatrix::identity(dim);
                assert!(defect.max_abs() <= 1e-10);
                for i in 0..dim {
                    assert!((q[(i, 0)] - u[i]).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn complete_basis_rejects_non_unit() {
        assert!(matches!(
            complete_basis(&[c(2.0, 0.0), ZERO], 2),
            Err(LinalgError::NotUnit { .. })
        ));
    }

    #[test]
    fn construction_rejects_nan() {
        let r = ComplexMatrix::from_row_major(1, 2, vec![ONE, c(f64::NAN, 0.0)]);
        assert_eq!(r, Err(LinalgError::NonFinite { row: 0, col: 1 }));
    }
}
