//! Dense complex matrices and the bipartite identities built on them.
//!
//! A bipartite pure state on `C^dA ⊗ C^dB` is stored as a `(dA·dB) × 1`
//! column with the index of `|i⟩|j⟩` equal to `i·dB + j`. Under that ordering
//! the map `vec : |i⟩⟨j| ↦ |i⟩|j⟩` is plain row-major flattening, and every
//! state `ψ` has a coefficient matrix `D` with `vec(D) = ψ`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Global default tolerance for all approximate predicates.
pub const DEFAULT_EPS: f64 = 1e-9;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix of shape {rows}x{cols} cannot hold {len} entries")]
    InvalidShape { rows: usize, cols: usize, len: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("state is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::InvalidShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(
            n,
            n,
            |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn column(entries: Vec<C64>) -> Self {
        let rows = entries.len();
        assert!(rows > 0, "empty column");
        Self {
            rows,
            cols: 1,
            data: entries,
        }
    }

    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim, 1);
        v.data[index] = C64::new(1.0, 0.0);
        v
    }

    /// Diagonal matrix with real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(values[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
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

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let dst = &mut out[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(C64, C64) -> C64) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ_ij self_ij · other_ij`, i.e. `tr(self · otherᵀ)`.
    pub fn bilinear_pairing(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `⟨self|other⟩` for column vectors (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Outer product `|self⟩⟨other|` of two column vectors.
    pub fn outer(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, other.rows, |r, c| self.data[r] * other.data[c].conj())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)];
            }
        }
        out
    }

    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖M² − M‖_F`; infinite for non-square input.
    pub fn idempotence_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let sq = self.checked_mul(self).expect("square");
        sq.checked_sub(self).expect("same shape").frobenius_norm()
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.hermitian_residual() <= eps
    }

    pub fn is_psd(&self, eps: f64) -> bool {
        self.is_hermitian(eps) && hermitian_eigen(self).0.iter().all(|&l| l >= -eps)
    }

    pub fn is_projector(&self, eps: f64) -> bool {
        self.is_hermitian(eps) && self.idempotence_residual() <= eps
    }

    pub fn is_unit_vector(&self, eps: f64) -> bool {
        self.cols == 1 && (self.frobenius_norm() - 1.0).abs() <= eps
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Column `j` as an `rows × 1` matrix.
    pub fn column_at(&self, j: usize) -> Self {
        Self::column((0..self.rows).map(|r| self[(r, j)]).collect())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum dimension mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix difference dimension mismatch")
    }
}

/// Eigen-decomposition of the Hermitian part of `m`: ascending eigenvalues
/// and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    assert!(m.is_square(), "eigendecomposition needs a square matrix");
    let herm = (&m.to_nalgebra() + m.to_nalgebra().adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.rows(), m.rows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn check_psd(m: &ComplexMatrix, eps: f64) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let residual = m.hermitian_residual();
    if residual > eps {
        return Err(LinalgError::NotHermitian { residual });
    }
    let (values, vectors) = hermitian_eigen(m);
    if let Some(&min) = values.first() {
        if min < -eps {
            return Err(LinalgError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok((values, vectors))
}

/// Orthogonal projector onto the span of eigenvectors of `m` with eigenvalue above `eps`.
pub fn support_projector(m: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix, LinalgError> {
    let (values, vectors) = check_psd(m, eps)?;
    let n = m.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &l) in values.iter().enumerate() {
        if l > eps {
            let v = vectors.column_at(k);
            p = &p + &v.outer(&v);
        }
    }
    Ok(p)
}

/// Principal square root of a PSD matrix; eigenvalues within `eps` below zero are clamped.
pub fn psd_sqrt(m: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix, LinalgError> {
    let (values, vectors) = check_psd(m, eps)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &l) in values.iter().enumerate() {
        if l > 0.0 {
            let v = vectors.column_at(k);
            out = &out + &v.outer(&v).scale_real(l.sqrt());
        }
    }
    Ok(out)
}

/// Frobenius norm of `[a, b] = ab − ba`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch {
            op: "commutator",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok((&(a * b) - &(b * a)).frobenius_norm())
}

/// `vec : |i⟩⟨j| ↦ |i⟩|j⟩`, extended linearly.
pub fn vec_map(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column(m.entries().to_vec())
}

/// Inverse of [`vec_map`].
pub fn unvec(v: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<ComplexMatrix, LinalgError> {
    if v.cols() != 1 || v.rows() != d_a * d_b {
        return Err(LinalgError::DimensionMismatch {
            op: "unvec",
            left: v.shape(),
            right: (d_a, d_b),
        });
    }
    ComplexMatrix::new(d_a, d_b, v.entries().to_vec())
}

/// `⟨ψ|A⊗B|ψ⟩` evaluated as `tr(D†·A·D·Bᵀ)` with `vec(D) = ψ`.
pub fn bipartite_expectation(a: &ComplexMatrix, b: &ComplexMatrix, psi: &ComplexMatrix) -> Result<C64, LinalgError> {
    if !a.is_square() || !b.is_square() || psi.cols() != 1 || psi.rows() != a.rows() * b.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "bipartite_expectation",
            left: (a.rows(), b.rows()),
            right: psi.shape(),
        });
    }
    let d = unvec(psi, a.rows(), b.rows())?;
    let left = &(&d.adjoint() * a) * &d;
    Ok(left.bilinear_pairing(b))
}

/// `tr_B |ψ⟩⟨ψ| = D·D†`.
pub fn partial_trace_b(psi: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<ComplexMatrix, LinalgError> {
    let d = unvec(psi, d_a, d_b)?;
    Ok(&d * &d.adjoint())
}

/// `tr_A |ψ⟩⟨ψ| = (D†·D)ᵀ`.
pub fn partial_trace_a(psi: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<ComplexMatrix, LinalgError> {
    let d = unvec(psi, d_a, d_b)?;
    Ok((&d.adjoint() * &d).transpose())
}

/// Schmidt form `ψ = Σ λ_i |α_i⟩|β_i⟩` of a bipartite unit vector.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    d_a: usize,
    d_b: usize,
    /// Descending, length `min(dA, dB)`.
    pub coefficients: Vec<f64>,
    /// `dA × k`, orthonormal columns `|α_i⟩`.
    pub left_basis: ComplexMatrix,
    /// `dB × k`, orthonormal columns `|β_i⟩`.
    pub right_basis: ComplexMatrix,
    pub rank: usize,
}

impl SchmidtDecomposition {
    pub fn local_dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn full_schmidt_rank(&self) -> bool {
        self.d_a == self.d_b && self.rank == self.d_a
    }

    pub fn alpha(&self, i: usize) -> ComplexMatrix {
        self.left_basis.column_at(i)
    }

    pub fn beta(&self, i: usize) -> ComplexMatrix {
        self.right_basis.column_at(i)
    }

    /// State with the given weights on the Schmidt basis vectors.
    pub fn state_with_coefficients(&self, weights: &[f64]) -> ComplexMatrix {
        assert_eq!(weights.len(), self.coefficients.len());
        let mut out = ComplexMatrix::zeros(self.d_a * self.d_b, 1);
        for (i, &w) in weights.iter().enumerate() {
            let term = self.alpha(i).kron(&self.beta(i)).scale_real(w);
            out = &out + &term;
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.state_with_coefficients(&self.coefficients)
    }

    /// `(1/√k) Σ_i |α_i⟩|β_i⟩` in the Schmidt basis of this state.
    pub fn maximally_entangled(&self) -> ComplexMatrix {
        let k = self.coefficients.len();
        self.state_with_coefficients(&vec![1.0 / (k as f64).sqrt(); k])
    }

    /// `D = Σ λ_i |α_i⟩⟨α_i| = √(tr_B |ψ⟩⟨ψ|)`, acting on Alice's space.
    pub fn reduced_root_a(&self) -> ComplexMatrix {
        let mut d = ComplexMatrix::zeros(self.d_a, self.d_a);
        for (i, &l) in self.coefficients.iter().enumerate() {
            let a = self.alpha(i);
            d = &d + &a.outer(&a).scale_real(l);
        }
        d
    }

    /// `Σ λ_i |β_i⟩⟨β_i| = √(tr_A |ψ⟩⟨ψ|)`, acting on Bob's space.
    pub fn reduced_root_b(&self) -> ComplexMatrix {
        let mut d = ComplexMatrix::zeros(self.d_b, self.d_b);
        for (i, &l) in self.coefficients.iter().enumerate() {
            let b = self.beta(i);
            d = &d + &b.outer(&b).scale_real(l);
        }
        d
    }

    /// Groups Schmidt indices into runs of coefficients equal within `eps`.
    pub fn coefficient_classes(&self, eps: f64) -> Vec<Vec<usize>> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in self.coefficients.iter().enumerate() {
            match classes.last_mut() {
                Some(class) if (self.coefficients[class[0]] - l).abs() <= eps => class.push(i),
                _ => classes.push(vec![i]),
            }
        }
        classes
    }
}

/// Thin singular value decomposition `M = U·diag(σ)·V†` by one-sided Jacobi
/// rotations, with `σ` descending and `k = min(rows, cols)` columns in `U`
/// and `V`.
///
/// Columns of `U` belonging to zero singular values are completed to an
/// orthonormal set.
pub fn svd(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    if m.rows() < m.cols() {
        let (u, s, v) = svd(&m.adjoint());
        return (v, s, u);
    }
    let (rows, cols) = m.shape();
    // work on columns: a_j ← M v_j
    let mut a: Vec<Vec<C64>> = (0..cols).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|j| {
            (0..cols)
                .map(|i| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<C64>();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&a[p], &a[p]).re;
                let beta = dot(&a[q], &a[q]).re;
                let gamma = dot(&a[p], &a[q]);
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols_of in [&mut a, &mut v] {
                    let (left, right) = cols_of.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let yq = *y * phase;
                        let xp = *x;
                        *x = xp * c - yq * s;
                        *y = xp * s + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = a.iter().map(|col| dot(col, col).re.sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut vm = ComplexMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    let mut filled: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        for i in 0..cols {
            vm[(i, k)] = v[j][i];
        }
        let col: Vec<C64> = if norms[j] > scale * 1e-13 && norms[j] > 0.0 {
            a[j].iter().map(|z| z / norms[j]).collect()
        } else {
            complete_orthonormal(&filled, rows)
        };
        for i in 0..rows {
            u[(i, k)] = col[i];
        }
        filled.push(col);
    }
    (u, sigma, vm)
}

/// A unit vector orthogonal to every vector in `basis` (assumed orthonormal).
fn complete_orthonormal(basis: &[Vec<C64>], dim: usize) -> Vec<C64> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for e in 0..dim {
        let mut x: Vec<C64> = (0..dim)
            .map(|i| C64::new(if i == e { 1.0 } else { 0.0 }, 0.0))
            .collect();
        for _ in 0..2 {
            for b in basis {
                let proj: C64 = b.iter().zip(&x).map(|(p, q)| p.conj() * q).sum();
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= proj * bi;
                }
            }
        }
        let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, x));
        }
    }
    let (n, x) = best.expect("dimension is positive");
    x.into_iter().map(|z| z / n).collect()
}

/// Schmidt decomposition via the singular value decomposition of `D`, `vec(D) = ψ`.
///
/// With `D = U Σ V†` the state is `Σ σ_i |u_i⟩ ⊗ |v̄_i⟩`. Each `|α_i⟩` is
/// rephased so its first component above `eps` is real positive.
pub fn schmidt_decompose(
    psi: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
    eps: f64,
) -> Result<SchmidtDecomposition, LinalgError> {
    let norm = psi.frobenius_norm();
    if psi.cols() != 1 || (norm - 1.0).abs() > eps {
        return Err(LinalgError::NotUnitVector { norm });
    }
    let d = unvec(psi, d_a, d_b)?;
    let (u, coefficients, v) = svd(&d);
    let k = coefficients.len();
    let mut left = ComplexMatrix::zeros(d_a, k);
    let mut right = ComplexMatrix::zeros(d_b, k);
    for col in 0..k {
        let phase = (0..d_a)
            .map(|r| u[(r, col)])
            .find(|z| z.norm() > eps)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(C64::new(1.0, 0.0));
        for r in 0..d_a {
            left[(r, col)] = u[(r, col)] * phase;
        }
        for r in 0..d_b {
            right[(r, col)] = v[(r, col)].conj() * phase.conj();
        }
    }
    let rank = coefficients.iter().filter(|&&l| l > eps).count();
    Ok(SchmidtDecomposition {
        d_a,
        d_b,
        coefficients,
        left_basis: left,
        right_basis: right,
        rank,
    })
}

/// `(1/√d) Σ_i |ii⟩`.
pub fn max_entangled_state(d: usize) -> ComplexMatrix {
    let amp = 1.0 / (d as f64).sqrt();
    let mut v = ComplexMatrix::zeros(d * d, 1);
    for i in 0..d {
        v[(i * d + i, 0)] = C64::new(amp, 0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn vec_of_basis_ketbra() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        let v = vec_map(&m);
        assert_eq!(v.shape(), (4, 1));
        let expected: Vec<C64> = [0.0, 1.0, 0.0, 0.0].iter().map(|&x| c(x, 0.0)).collect();
        assert_eq!(v.entries(), expected.as_slice());
        assert_eq!(unvec(&v, 2, 2).unwrap(), m);
    }

    #[test]
    fn vec_of_identity_is_scaled_max_entangled() {
        let v = vec_map(&ComplexMatrix::identity(2));
        let target = max_entangled_state(2).scale_real(2f64.sqrt());
        assert!((&v - &target).frobenius_norm() < 1e-15);
    }

    #[test]
    fn schmidt_of_product_state() {
        let psi = ComplexMatrix::basis_vector(4, 0);
        let s = schmidt_decompose(&psi, 2, 2, DEFAULT_EPS).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(s.coefficients[1].abs() < 1e-12);
        assert_eq!(s.rank, 1);
        assert!(!s.full_schmidt_rank());
    }

    #[test]
    fn schmidt_of_max_entangled() {
        for d in 2..=5 {
            let s = schmidt_decompose(&max_entangled_state(d), d, d, DEFAULT_EPS).unwrap();
            for &l in &s.coefficients {
                assert!((l - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
            }
            assert!(s.full_schmidt_rank());
            assert_eq!(s.coefficient_classes(DEFAULT_EPS).len(), 1);
        }
    }

    #[test]
    fn schmidt_of_state_already_in_schmidt_form() {
        let mut psi = ComplexMatrix::zeros(4, 1);
        psi[(0, 0)] = c(0.8f64.sqrt(), 0.0);
        psi[(3, 0)] = c(0.2f64.sqrt(), 0.0);
        let s = schmidt_decompose(&psi, 2, 2, DEFAULT_EPS).unwrap();
        assert!((s.coefficients[0] - 0.8f64.sqrt()).abs() < 1e-12);
        assert!((s.coefficients[1] - 0.2f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.rank, 2);
        assert!((&s.reconstruct() - &psi).frobenius_norm() < 1e-12);
        // phase convention: leading component of each α is real positive
        for i in 0..2 {
            let a = s.alpha(i);
            let lead = a.entries().iter().find(|z| z.norm() > 1e-9).unwrap();
            assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
        }
    }

    #[test]
    fn schmidt_rejects_non_unit() {
        let psi = ComplexMatrix::basis_vector(4, 0).scale_real(2.0);
        assert!(matches!(
            schmidt_decompose(&psi, 2, 2, DEFAULT_EPS),
            Err(LinalgError::NotUnitVector { .. })
        ));
    }

    #[test]
    fn schmidt_rectangular_dims() {
        // |0⟩(|0⟩+|2⟩)/√2 ⊕ ... on C^2 ⊗ C^3
        let mut psi = ComplexMatrix::zeros(6, 1);
        psi[(0, 0)] = c(0.6, 0.0);
        psi[(4, 0)] = c(0.0, 0.8);
        for (da, db) in [(2, 3), (3, 2)] {
            let s = schmidt_decompose(&psi, da, db, DEFAULT_EPS).unwrap();
            assert_eq!(s.coefficients.len(), 2);
            assert!((&s.reconstruct() - &psi).frobenius_norm() < 1e-12);
            assert!(!s.full_schmidt_rank());
        }
    }

    #[test]
    fn reduced_root_matches_partial_trace() {
        let mut psi = ComplexMatrix::zeros(4, 1);
        psi[(0, 0)] = c(0.5, 0.0);
        psi[(1, 0)] = c(0.5, 0.1);
        psi[(2, 0)] = c(-0.3, 0.2);
        psi[(3, 0)] = c(0.1, 0.4);
        let psi = psi.scale_real(1.0 / psi.frobenius_norm());
        let s = schmidt_decompose(&psi, 2, 2, DEFAULT_EPS).unwrap();
        let root = psd_sqrt(&partial_trace_b(&psi, 2, 2).unwrap(), DEFAULT_EPS).unwrap();
        assert!((&s.reduced_root_a() - &root).frobenius_norm() < 1e-10);
        let root_b = psd_sqrt(&partial_trace_a(&psi, 2, 2).unwrap(), DEFAULT_EPS).unwrap();
        assert!((&s.reduced_root_b() - &root_b).frobenius_norm() < 1e-10);
    }

    #[test]
    fn expectation_identity_is_one() {
        let psi = max_entangled_state(3);
        let e = bipartite_expectation(&ComplexMatrix::identity(3), &ComplexMatrix::identity(3), &psi).unwrap();
        assert!((e - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn expectation_on_max_entangled_is_normalized_trace() {
        // E, F PSD on |Ψ_d⟩ → tr(E Fᵀ)/d
        let e = ComplexMatrix::from_fn(2, 2, |r, col| match (r, col) {
            (0, 0) => c(0.7, 0.0),
            (0, 1) => c(0.1, 0.2),
            (1, 0) => c(0.1, -0.2),
            _ => c(0.3, 0.0),
        });
        let f = ComplexMatrix::from_fn(2, 2, |r, col| match (r, col) {
            (0, 0) => c(0.4, 0.0),
            (0, 1) => c(0.0, 0.3),
            (1, 0) => c(0.0, -0.3),
            _ => c(0.6, 0.0),
        });
        let got = bipartite_expectation(&e, &f, &max_entangled_state(2)).unwrap();
        let want = (&e * &f.transpose()).trace() / 2.0;
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let err = bipartite_expectation(
            &ComplexMatrix::identity(2),
            &ComplexMatrix::identity(3),
            &max_entangled_state(2),
        );
        assert!(matches!(err, Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn support_projector_edge_cases() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(support_projector(&z, DEFAULT_EPS).unwrap().frobenius_norm(), 0.0);

        let v = ComplexMatrix::column(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let p = v.outer(&v);
        assert!((&support_projector(&p, DEFAULT_EPS).unwrap() - &p).frobenius_norm() < 1e-12);

        let not_psd = ComplexMatrix::diagonal(&[1.0, -0.5]);
        assert!(matches!(
            support_projector(&not_psd, DEFAULT_EPS),
            Err(LinalgError::NotPsd { .. })
        ));
    }

    #[test]
    fn commutator_examples() {
        let a = ComplexMatrix::diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::diagonal(&[3.0, -1.0]);
        assert_eq!(commutator_norm(&a, &b).unwrap(), 0.0);

        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((commutator_norm(&a, &swap).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        assert!(commutator_norm(&a, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn predicates() {
        let p = ComplexMatrix::diagonal(&[1.0, 0.0]);
        assert!(p.is_projector(DEFAULT_EPS));
        assert!(p.is_psd(DEFAULT_EPS));
        let h = ComplexMatrix::diagonal(&[0.5, 0.5]);
        assert!(!h.is_projector(DEFAULT_EPS));
        assert!(h.is_psd(DEFAULT_EPS));
        assert!(max_entangled_state(3).is_unit_vector(DEFAULT_EPS));
        let mut skew = ComplexMatrix::zeros(2, 2);
        skew[(0, 1)] = c(1.0, 0.0);
        assert!(!skew.is_hermitian(DEFAULT_EPS));
    }

    #[test]
    fn direct_sum_and_kron_shapes() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert_eq!(a.direct_sum(&b), ComplexMatrix::identity(5));
        assert_eq!(a.kron(&b), ComplexMatrix::identity(6));
    }

    fn dft(n: usize) -> ComplexMatrix {
        let w = 2.0 * std::f64::consts::PI / n as f64;
        ComplexMatrix::from_fn(n, n, |i, j| {
            C64::from_polar(1.0 / (n as f64).sqrt(), w * (i * j) as f64)
        })
    }

    fn check_svd(m: &ComplexMatrix, expected: &[f64]) {
        let (u, s, v) = svd(m);
        let k = s.len();
        for (got, want) in s.iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "{s:?} vs {expected:?}");
        }
        let sigma = ComplexMatrix::diagonal(&s);
        assert!((&(&(&u * &sigma) * &v.adjoint()) - m).frobenius_norm() < 1e-13);
        assert!((&(&u.adjoint() * &u) - &ComplexMatrix::identity(k)).frobenius_norm() < 1e-13);
        assert!((&(&v.adjoint() * &v) - &ComplexMatrix::identity(k)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn svd_degenerate_and_rank_deficient() {
        let phases = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                C64::from_polar(1.0, 0.7 * i as f64)
            } else {
                c(0.0, 0.0)
            }
        });
        let v = &phases * &dft(3);
        for values in [[0.6, 0.6, 0.3], [0.5, 0.5, 0.5], [0.9, 0.0, 0.0], [1e-7, 1e-7, 0.2]] {
            let m = &(&dft(3) * &ComplexMatrix::diagonal(&values)) * &v.adjoint();
            let mut sorted = values.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            check_svd(&m, &sorted);
        }
    }

    #[test]
    fn svd_rectangular() {
        let m = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0]]);
        check_svd(&m, &[3.0, 2.0]);
        check_svd(&m.adjoint(), &[3.0, 2.0]);
        check_svd(&ComplexMatrix::zeros(2, 3), &[0.0, 0.0]);
    }
}
