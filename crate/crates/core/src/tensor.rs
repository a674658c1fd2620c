//! Complex linear algebra on `ℂⁿ` with its standard unitary basis `Z₁..Zₙ`.
//!
//! Brackets are linear maps `Λ²ℂⁿ → ℂⁿ`, endomorphisms of `Λ²ℂⁿ` are
//! "wedge endomorphisms", and all inner products are the Hermitian ones
//! induced from the fixed basis: `⟨A, B⟩ = tr(A B*)` for maps between any
//! two of these spaces. `Λ²ℂⁿ` uses the basis `Z_i ∧ Z_j` (`i < j`) in
//! lexicographic order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// An `n × n` operator on `ℂⁿ` in the unitary basis.
pub type Endomorphism = CMatrix;

/// An operator on `Λ²ℂⁿ`, stored as an `N × N` matrix with `N = n(n-1)/2`.
pub type WedgeEndomorphism = CMatrix;

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `ℂⁿ` with its fixed unitary basis and the induced basis of `Λ²ℂⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianSpace {
    dim: usize,
}

impl HermitianSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wedge_dim(&self) -> usize {
        wedge_dim(self.dim)
    }

    /// Index of `Z_i ∧ Z_j` for `i < j` (0-based).
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        pair_index(self.dim, i, j)
    }

    /// Basis pairs `(i, j)`, `i < j`, in storage order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.dim)
    }
}

pub fn wedge_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic index of `Z_i ∧ Z_j`, `i < j < n`.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(wedge_dim(n));
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// Coordinates of `v ∧ w` in the basis `Z_i ∧ Z_j`.
pub fn wedge_vectors(v: &CVector, w: &CVector) -> CVector {
    let n = v.len();
    let mut out = CVector::zeros(wedge_dim(n));
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        out[k] = v[i] * w[j] - v[j] * w[i];
    }
    out
}

/// `(A ∧ B)(v ∧ w) = Av ∧ Bw + Bv ∧ Aw`.
pub fn wedge_endo(a: &Endomorphism, b: &Endomorphism) -> Result<WedgeEndomorphism> {
    let n = a.nrows();
    for m in [a, b] {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
    }
    if b.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    let ps = pairs(n);
    let big_n = ps.len();
    let mut out = CMatrix::zeros(big_n, big_n);
    for (col, &(i, j)) in ps.iter().enumerate() {
        for (row, &(p, q)) in ps.iter().enumerate() {
            out[(row, col)] =
                a[(p, i)] * b[(q, j)] - a[(q, i)] * b[(p, j)] + b[(p, i)] * a[(q, j)] - b[(q, i)] * a[(p, j)];
        }
    }
    Ok(out)
}

/// `id ∧ A`, which acts on `v ∧ w` as `Av ∧ w + v ∧ Aw`.
pub fn id_wedge(a: &Endomorphism) -> WedgeEndomorphism {
    let n = a.nrows();
    let ps = pairs(n);
    let big_n = ps.len();
    let mut out = CMatrix::zeros(big_n, big_n);
    for (col, &(i, j)) in ps.iter().enumerate() {
        // A Z_i ∧ Z_j: replaces index i by every p with weight A[p,i].
        for p in 0..n {
            let c = a[(p, i)];
            if c != ZERO && p != j {
                let (row, sign) = signed_pair(n, p, j);
                out[(row, col)] += c * sign;
            }
            let c = a[(p, j)];
            if c != ZERO && p != i {
                let (row, sign) = signed_pair(n, i, p);
                out[(row, col)] += c * sign;
            }
        }
    }
    out
}

/// Index and orientation sign of `Z_a ∧ Z_b` for `a != b`.
#[inline]
pub fn signed_pair(n: usize, a: usize, b: usize) -> (usize, f64) {
    if a < b {
        (pair_index(n, a, b), 1.0)
    } else {
        (pair_index(n, b, a), -1.0)
    }
}

/// Adjoint (conjugate transpose) of any linear map in unitary bases.
pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// `⟨A, B⟩ = tr(A B*) = Σ A_ij conj(B_ij)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm_sq(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)))
}

/// `m = U diag(s) V*` with `s` sorted nonincreasing. `u` is `rows × k` and
/// `v` is `cols × k'`; the right factor is always complete (`k' = cols`) so
/// that kernels can be read off it.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular value decomposition. The thin form is used unless `m` is wide,
/// in which case the full form supplies the missing right singular vectors.
pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd { u: CMatrix::zeros(rows, 0), s: Vec::new(), v: CMatrix::identity(cols, cols) };
    }
    let a = to_faer(m);
    let dec = if rows < cols { a.svd() } else { a.thin_svd() }.expect("SVD iteration converges");
    let k = rows.min(cols);
    let diag = dec.S().column_vector();
    let s = (0..k).map(|i| diag[i].re).collect();
    Svd { u: from_faer(dec.U()), s, v: from_faer(dec.V()) }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("SVD iteration converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Minimum-norm least-squares solution of `m x = b`, dropping singular
/// directions below `cutoff · σ_max`.
pub fn lstsq_min_norm(m: &CMatrix, b: &CMatrix, cutoff: f64) -> CMatrix {
    let dec = svd(m);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut x = CMatrix::zeros(m.ncols(), b.ncols());
    for (k, &sk) in dec.s.iter().enumerate() {
        if sk <= cutoff * smax || sk == 0.0 {
            break;
        }
        let coeff = dec.u.column(k).adjoint() * b / C64::new(sk, 0.0);
        x += dec.v.column(k) * coeff;
    }
    x
}

/// Real counterpart of [`lstsq_min_norm`].
pub fn lstsq_min_norm_real(m: &DMatrix<f64>, b: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut x = DMatrix::zeros(cols, b.ncols());
    if rows == 0 || cols == 0 {
        return x;
    }
    let a = faer::Mat::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = a.thin_svd().expect("SVD iteration converges");
    let diag = dec.S().column_vector();
    let (u, v) = (dec.U(), dec.V());
    let k = rows.min(cols);
    let smax = if k > 0 { diag[0] } else { 0.0 };
    for c in 0..k {
        let sk = diag[c];
        if sk <= cutoff * smax || sk == 0.0 {
            break;
        }
        for col in 0..b.ncols() {
            let coeff: f64 = (0..rows).map(|r| u[(r, c)] * b[(r, col)]).sum::<f64>() / sk;
            for r in 0..cols {
                x[(r, col)] += v[(r, c)] * coeff;
            }
        }
    }
    x
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`: right
/// singular vectors whose singular value is below `rel_tol · σ_max`.
/// The zero map returns the whole space.
pub fn kernel_basis(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let smax = largest_singular_value(m);
    kernel_basis_abs(m, rel_tol * smax)
}

/// Kernel with an absolute singular-value threshold.
pub fn kernel_basis_abs(m: &CMatrix, abs_tol: f64) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.iter().all(|x| *x == ZERO) {
        return CMatrix::identity(cols, cols);
    }
    let dec = svd(m);
    let rank = dec.s.iter().filter(|&&x| x > abs_tol).count();
    dec.v.columns(rank, cols - rank).into_owned()
}

/// Orthonormal basis (as columns) of the numerical column space of `m`.
pub fn range_basis(m: &CMatrix, abs_tol: f64) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let dec = svd(m);
    let rank = dec.s.iter().filter(|&&x| x > abs_tol).count();
    dec.u.columns(0, rank).into_owned()
}

pub fn largest_singular_value(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Spectral norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    largest_singular_value(m)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q`.
pub fn orthogonal_complement(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    if q.ncols() == 0 {
        return CMatrix::identity(n, n);
    }
    if q.ncols() >= n {
        return CMatrix::zeros(n, 0);
    }
    kernel_basis_abs(&q.adjoint(), 1e-12)
}

/// Orthogonal projector `Q Q*` onto the span of orthonormal columns `q`.
pub fn projector(q: &CMatrix, n: usize) -> CMatrix {
    if q.ncols() == 0 {
        return CMatrix::zeros(n, n);
    }
    q * q.adjoint()
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal columns. `None` when the dimensions differ.
pub fn subspace_angle(a: &CMatrix, b: &CMatrix) -> Option<f64> {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return None;
    }
    if a.ncols() == 0 {
        return Some(0.0);
    }
    let n = a.nrows();
    let residual = (CMatrix::identity(n, n) - projector(b, n)) * a;
    Some(op_norm(&residual))
}
