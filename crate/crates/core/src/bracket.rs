//! Complex Lie brackets `μ: Λ²ℂⁿ → ℂⁿ` and their structural invariants.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::tensor::{
    id_wedge, kernel_basis, largest_singular_value, lstsq_min_norm, orthogonal_complement, pair_index, pairs,
    projector, range_basis, signed_pair, singular_values, wedge_dim, wedge_endo, wedge_vectors, CMatrix, CVector,
    Endomorphism, C64, ONE, ZERO,
};

/// Brackets with Jacobi residual above `JACOBI_REL_TOL · ‖μ‖²` are not Lie
/// brackets for the purposes of ingestion.
pub const JACOBI_REL_TOL: f64 = 1e-8;

/// Structure constants `μ(Z_i ∧ Z_j) = Σ_k c_ij^k Z_k`, stored as the
/// `n × n(n-1)/2` matrix of the linear map `Λ²ℂⁿ → ℂⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    dim: usize,
    mat: CMatrix,
}

impl Bracket {
    pub fn zero(dim: usize) -> Self {
        Self { dim, mat: CMatrix::zeros(dim, wedge_dim(dim)) }
    }

    /// Wraps an `n × N` matrix; fails if the shape is not that of a bracket.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if mat.ncols() != wedge_dim(dim) {
            return Err(Error::DimensionMismatch { expected: wedge_dim(dim), found: mat.ncols() });
        }
        Ok(Self { dim, mat })
    }

    /// Builds a bracket from `(i, j, k, c)` entries meaning `μ(Z_i ∧ Z_j) ∋ c Z_k`
    /// (0-based). Entries with `i > j` are stored with the opposite sign.
    pub fn from_constants<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, C64)>,
    {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut mu = Self::zero(dim);
        for (i, j, k, c) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: i.max(j).max(k) + 1 });
            }
            if i == j {
                return Err(Error::Degenerate(format!("μ(Z{i} ∧ Z{i}) is always zero")));
            }
            mu.add_constant(i, j, k, c);
        }
        Ok(mu)
    }

    fn add_constant(&mut self, i: usize, j: usize, k: usize, c: C64) {
        if i < j {
            self.mat[(k, pair_index(self.dim, i, j))] += c;
        } else {
            self.mat[(k, pair_index(self.dim, j, i))] -= c;
        }
    }

    pub fn abelian(dim: usize) -> Self {
        Self::zero(dim)
    }

    /// `μ(Z₁ ∧ Z₂) = Z₃`.
    pub fn heisenberg3() -> Self {
        Self::from_constants(3, [(0, 1, 2, ONE)]).expect("valid")
    }

    /// `μ(Z₁ ∧ Z₂) = Z₃`, `μ(Z₁ ∧ Z₃) = Z₄`.
    pub fn filiform4() -> Self {
        Self::from_constants(4, [(0, 1, 2, ONE), (0, 2, 3, ONE)]).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wedge_dim(&self) -> usize {
        self.mat.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `c_ij^k` with antisymmetry in `(i, j)`.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> C64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.mat[(k, pair_index(self.dim, i, j))],
            std::cmp::Ordering::Greater => -self.mat[(k, pair_index(self.dim, j, i))],
            std::cmp::Ordering::Equal => ZERO,
        }
    }

    /// Nonzero constants `(i, j, k, c)` with `i < j`, in storage order.
    pub fn nonzero_constants(&self) -> Vec<(usize, usize, usize, C64)> {
        let mut out = Vec::new();
        for (col, (i, j)) in pairs(self.dim).into_iter().enumerate() {
            for k in 0..self.dim {
                let c = self.mat[(k, col)];
                if c != ZERO {
                    out.push((i, j, k, c));
                }
            }
        }
        out
    }

    /// `μ(v ∧ w)`.
    pub fn apply(&self, v: &CVector, w: &CVector) -> CVector {
        &self.mat * wedge_vectors(v, w)
    }

    /// Matrix of `ad_{Z_a} = μ(Z_a ∧ ·)`.
    pub fn ad(&self, a: usize) -> Endomorphism {
        let n = self.dim;
        let mut out = CMatrix::zeros(n, n);
        for b in 0..n {
            if a == b {
                continue;
            }
            let (col, sign) = if a < b { (pair_index(n, a, b), 1.0) } else { (pair_index(n, b, a), -1.0) };
            for k in 0..n {
                out[(k, b)] = self.mat[(k, col)] * sign;
            }
        }
        out
    }

    /// The adjoint `μ*: ℂⁿ → Λ²ℂⁿ`.
    pub fn adjoint(&self) -> CMatrix {
        self.mat.adjoint()
    }

    pub fn norm_sq(&self) -> f64 {
        self.mat.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// `⟨μ, ν⟩ = tr(μ ν*)`.
    pub fn inner(&self, other: &Bracket) -> C64 {
        crate::tensor::inner(&self.mat, &other.mat)
    }

    pub fn scale(&self, c: f64) -> Bracket {
        Bracket { dim: self.dim, mat: &self.mat * C64::new(c, 0.0) }
    }

    pub fn scale_complex(&self, c: C64) -> Bracket {
        Bracket { dim: self.dim, mat: &self.mat * c }
    }

    /// Left composition `A ∘ μ` by an endomorphism of the target.
    pub fn compose_left(&self, a: &Endomorphism) -> Bracket {
        Bracket { dim: self.dim, mat: a * &self.mat }
    }

    /// Right composition `μ ∘ W` by an endomorphism of `Λ²ℂⁿ`.
    pub fn compose_right(&self, w: &CMatrix) -> Bracket {
        Bracket { dim: self.dim, mat: &self.mat * w }
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|c| *c == ZERO)
    }
}

impl Add for &Bracket {
    type Output = Bracket;
    fn add(self, rhs: &Bracket) -> Bracket {
        assert_eq!(self.dim, rhs.dim, "bracket dimensions differ");
        Bracket { dim: self.dim, mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Bracket {
    type Output = Bracket;
    fn sub(self, rhs: &Bracket) -> Bracket {
        assert_eq!(self.dim, rhs.dim, "bracket dimensions differ");
        Bracket { dim: self.dim, mat: &self.mat - &rhs.mat }
    }
}

impl Mul<f64> for &Bracket {
    type Output = Bracket;
    fn mul(self, rhs: f64) -> Bracket {
        self.scale(rhs)
    }
}

/// Norm of the cyclic sum `μ(μ(x,y),z) + μ(μ(y,z),x) + μ(μ(z,x),y)` over all
/// basis triples `i < j < k`.
pub fn jacobi_residual(mu: &Bracket) -> f64 {
    let n = mu.dim();
    let ads: Vec<Endomorphism> = (0..n).map(|a| mu.ad(a)).collect();
    // μ(x, Z_k) for a vector x.
    let left = |x: CVector, k: usize| -> CVector {
        let mut out = CVector::zeros(n);
        for (a, xa) in x.iter().enumerate() {
            if *xa != ZERO {
                out += ads[a].column(k) * *xa;
            }
        }
        out
    };
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let ij = ads[i].column(j).into_owned();
                let jk = ads[j].column(k).into_owned();
                let ki = ads[k].column(i).into_owned();
                let cyc = left(ij, k) + left(jk, i) + left(ki, j);
                total += cyc.norm_squared();
            }
        }
    }
    total.sqrt()
}

/// Bilinear Jacobi form `J(o, i)(a, b, c) = Σ_cyc o(i(Z_a, Z_b), Z_c)` for
/// all triples `a < b < c`, stacked `n` entries per triple. `J(μ, μ)` vanishes
/// exactly on Lie brackets.
pub fn jacobi_form(outer: &CMatrix, inner: &CMatrix) -> CVector {
    let n = outer.nrows();
    let triples = if n < 3 { 0 } else { n * (n - 1) * (n - 2) / 6 };
    let mut out = CVector::zeros(n * triples);
    // o(x, Z_c) for a vector x.
    let left = |x: CVector, c: usize| -> CVector {
        let mut acc = CVector::zeros(n);
        for (l, xl) in x.iter().enumerate() {
            if *xl != ZERO && l != c {
                let (col, sign) = signed_pair(n, l, c);
                acc += outer.column(col) * (*xl * sign);
            }
        }
        acc
    };
    let mut row = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let ab = inner.column(pair_index(n, a, b)).into_owned();
                let bc = inner.column(pair_index(n, b, c)).into_owned();
                let ca = -inner.column(pair_index(n, a, c)).into_owned();
                let v = left(ab, c) + left(bc, a) + left(ca, b);
                out.rows_mut(row, n).copy_from(&v);
                row += n;
            }
        }
    }
    out
}

/// Gauss-Newton correction of `m` towards the Jacobi variety. Only the
/// entries listed in `free` (as `(row, column)`) are moved; `None` frees all
/// of them. Stops early once the residual is below `1e-14‖m‖²`.
pub fn project_to_jacobi(m: &mut CMatrix, free: Option<&[(usize, usize)]>, iterations: usize) {
    let n = m.nrows();
    let all: Vec<(usize, usize)>;
    let free = match free {
        Some(f) => f,
        None => {
            all = (0..m.ncols()).flat_map(|c| (0..n).map(move |k| (k, c))).collect();
            &all
        }
    };
    if n < 3 || free.is_empty() {
        return;
    }
    for _ in 0..iterations {
        let residual = jacobi_form(m, m);
        if residual.norm() <= 1e-14 * m.norm_squared() {
            break;
        }
        let mut lin = CMatrix::zeros(residual.len(), free.len());
        let mut e = CMatrix::zeros(n, m.ncols());
        for (idx, &(k, c)) in free.iter().enumerate() {
            e[(k, c)] = ONE;
            let col = jacobi_form(&e, m) + jacobi_form(m, &e);
            lin.set_column(idx, &col);
            e[(k, c)] = ZERO;
        }
        let step = lstsq_min_norm(&lin, &CMatrix::from_column_slice(residual.len(), 1, residual.as_slice()), 1e-10);
        for (idx, &(k, c)) in free.iter().enumerate() {
            m[(k, c)] -= step[(idx, 0)];
        }
    }
}

/// Whether `μ` passes the ingestion gate `jacobi_residual ≤ 1e-8 ‖μ‖²`.
pub fn is_lie_bracket(mu: &Bracket) -> bool {
    jacobi_residual(mu) <= JACOBI_REL_TOL * mu.norm_sq().max(f64::MIN_POSITIVE)
}

/// `Λ²g`, acting as `v ∧ w ↦ gv ∧ gw`.
pub fn wedge_square(g: &Endomorphism) -> CMatrix {
    wedge_endo(g, g).expect("square") * C64::new(0.5, 0.0)
}

/// Change-of-basis action `h·μ = h μ(h⁻¹·, h⁻¹·)`.
pub fn act_gl(h: &Endomorphism, mu: &Bracket) -> Result<Bracket> {
    if h.nrows() != mu.dim() || !h.is_square() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: h.nrows() });
    }
    let sv = singular_values(h);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax.is_nan() || smax <= 0.0 || smin <= 1e-14 * smax {
        return Err(Error::SingularMatrix);
    }
    let inv = h.clone().try_inverse().ok_or(Error::SingularMatrix)?;
    Ok(Bracket { dim: mu.dim(), mat: h * &mu.mat * wedge_square(&inv) })
}

/// `π(A)μ = Aμ − μ(A·,·) − μ(·,A·) = Aμ − μ∘(id ∧ A)`.
///
/// Panics if `A` is not `n × n`.
pub fn pi_action(a: &Endomorphism, mu: &Bracket) -> Bracket {
    assert_eq!(a.nrows(), mu.dim(), "endomorphism and bracket dimensions differ");
    Bracket { dim: mu.dim(), mat: a * &mu.mat - &mu.mat * id_wedge(a) }
}

/// Matrix of the linear map `v ↦ μ(v ∧ ·)` from `ℂⁿ` to `Hom(ℂⁿ, ℂⁿ)`.
fn ad_map(mu: &Bracket) -> CMatrix {
    let n = mu.dim();
    let mut out = CMatrix::zeros(n * n, n);
    for a in 0..n {
        let ad = mu.ad(a);
        for (r, v) in ad.iter().enumerate() {
            out[(r, a)] = *v;
        }
    }
    out
}

/// Whether a singular value of `v ↦ μ(v ∧ ·)` lies just above the rank
/// threshold, within a factor 1000, so that the centre dimension is fragile.
pub fn centre_near_rank_drop(mu: &Bracket, rel_tol: f64) -> bool {
    let sv = singular_values(&ad_map(mu));
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tol = rel_tol * smax;
    sv.iter().any(|&s| s > tol && s <= 1e3 * tol)
}

/// Orthonormal basis (columns) of the centre.
pub fn centre(mu: &Bracket, rel_tol: f64) -> CMatrix {
    kernel_basis(&ad_map(mu), rel_tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nilpotency {
    /// Smallest `k` with `C^k(μ) = 0`; the abelian bracket has degree 1.
    Degree(usize),
    NotNilpotent,
}

impl Nilpotency {
    pub fn degree(self) -> Option<usize> {
        match self {
            Nilpotency::Degree(k) => Some(k),
            Nilpotency::NotNilpotent => None,
        }
    }
}

/// Lower central series `C¹ = μ(𝔤, 𝔤)`, `C^{j+1} = μ(𝔤, C^j)`, with rank
/// decisions at `rel_tol` relative to the largest singular value of `μ`.
pub fn lower_central_series(mu: &Bracket, rel_tol: f64) -> (Vec<CMatrix>, Nilpotency) {
    let n = mu.dim();
    let scale = largest_singular_value(mu.matrix());
    if scale == 0.0 {
        return (vec![CMatrix::zeros(n, 0)], Nilpotency::Degree(1));
    }
    let tol = rel_tol * scale;
    let ads: Vec<Endomorphism> = (0..n).map(|a| mu.ad(a)).collect();
    let mut series = vec![range_basis(mu.matrix(), tol)];
    loop {
        let current = series.last().expect("nonempty");
        let d = current.ncols();
        if d == 0 {
            let k = series.len();
            return (series, Nilpotency::Degree(k));
        }
        let mut span = CMatrix::zeros(n, n * d);
        for (a, ad) in ads.iter().enumerate() {
            let block = ad * current;
            span.view_mut((0, a * d), (n, d)).copy_from(&block);
        }
        let next = range_basis(&span, tol);
        if next.ncols() >= d {
            series.push(next);
            return (series, Nilpotency::NotNilpotent);
        }
        series.push(next);
    }
}

pub fn nilpotency_degree(mu: &Bracket, rel_tol: f64) -> Nilpotency {
    lower_central_series(mu, rel_tol).1
}

/// Unitary basis adapted to the lower central series: the columns of
/// `basis` list `C⁰ ⊖ C¹`, then `C¹ ⊖ C²`, and so on, with `layer[k]` the
/// index of the step that column `k` belongs to. In this basis a nilpotent
/// bracket only has constants `c_ij^k` with `layer[k] > max(layer[i], layer[j])`.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    pub basis: CMatrix,
    pub layer: Vec<usize>,
}

impl AdaptedFrame {
    /// Entries `(k, pair)` of a bracket matrix allowed by the layer pattern.
    pub fn free_entries(&self) -> Vec<(usize, usize)> {
        let n = self.layer.len();
        let mut out = Vec::new();
        for (c, (i, j)) in pairs(n).into_iter().enumerate() {
            for k in 0..n {
                if self.layer[k] > self.layer[i].max(self.layer[j]) {
                    out.push((k, c));
                }
            }
        }
        out
    }

    /// Zeroes every entry outside the layer pattern.
    pub fn truncate(&self, m: &mut CMatrix) {
        let n = self.layer.len();
        for (c, (i, j)) in pairs(n).into_iter().enumerate() {
            for k in 0..n {
                if self.layer[k] <= self.layer[i].max(self.layer[j]) {
                    m[(k, c)] = ZERO;
                }
            }
        }
    }
}

/// `None` unless `μ` is nilpotent at `rel_tol`.
pub fn adapted_frame(mu: &Bracket, rel_tol: f64) -> Option<AdaptedFrame> {
    let n = mu.dim();
    let (series, nil) = lower_central_series(mu, rel_tol);
    nil.degree()?;
    let mut blocks = Vec::new();
    let mut layer = Vec::new();
    let mut prev = CMatrix::identity(n, n);
    for (li, q) in series.iter().enumerate() {
        let rest = CMatrix::identity(n, n) - projector(q, n);
        let part = range_basis(&(rest * &prev), 1e-8);
        layer.extend(std::iter::repeat_n(li, part.ncols()));
        blocks.push(part);
        prev = q.clone();
    }
    let mut basis = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        if off + b.ncols() > n {
            return None;
        }
        basis.view_mut((0, off), (n, b.ncols())).copy_from(&b);
        off += b.ncols();
    }
    (off == n).then_some(AdaptedFrame { basis, layer })
}

/// Unitary decomposition `𝔤 = 𝔷 ⊕ 𝔷^⊥` and `μ = μ₀ + μ₁`.
#[derive(Clone, Debug)]
pub struct CentreSplit {
    pub centre: CMatrix,
    pub complement: CMatrix,
    /// `Pr_𝔷 μ`.
    pub mu0: Bracket,
    /// `Pr_{𝔷⊥} μ`.
    pub mu1: Bracket,
    /// Set when the centre is trivial; the split is then `μ₀ = 0, μ₁ = μ`.
    pub trivial_centre: bool,
}

impl CentreSplit {
    pub fn centre_projector(&self) -> CMatrix {
        projector(&self.centre, self.mu0.dim())
    }

    pub fn centre_dim(&self) -> usize {
        self.centre.ncols()
    }
}

pub fn centre_split(mu: &Bracket, rel_tol: f64) -> CentreSplit {
    let z = centre(mu, rel_tol);
    split_along(mu, z)
}

/// Splits `μ` along a given orthonormal basis of a subspace.
pub fn split_along(mu: &Bracket, z: CMatrix) -> CentreSplit {
    let n = mu.dim();
    let pz = projector(&z, n);
    let mu0 = mu.compose_left(&pz);
    let mu1 = mu - &mu0;
    let complement = orthogonal_complement(&z);
    CentreSplit { trivial_centre: z.ncols() == 0, centre: z, complement, mu0, mu1 }
}

/// Orthonormal basis of `Der(μ) ⊂ 𝔤𝔩ₙ(ℂ)` for the Frobenius inner product.
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub basis: Vec<Endomorphism>,
}

impl DerivationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Matrix of `B ↦ π(B)μ` from `𝔤𝔩ₙ` (column-major `vec(B)`) to brackets.
pub fn pi_map(mu: &Bracket) -> CMatrix {
    let n = mu.dim();
    let rows = n * mu.wedge_dim();
    let mut out = CMatrix::zeros(rows, n * n);
    for q in 0..n {
        for p in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(p, q)] = ONE;
            let img = pi_action(&e, mu);
            let col = p + q * n;
            for (r, v) in img.matrix().iter().enumerate() {
                out[(r, col)] = *v;
            }
        }
    }
    out
}

pub fn derivation_space(mu: &Bracket, rel_tol: f64) -> DerivationSpace {
    let n = mu.dim();
    let k = kernel_basis(&pi_map(mu), rel_tol);
    let basis = (0..k.ncols()).map(|c| CMatrix::from_iterator(n, n, k.column(c).iter().copied())).collect();
    DerivationSpace { basis }
}

/// Bracket on `ℂZ₀ ⊕ ℂⁿ` with `μ(Z₀ ∧ Z_i) = A Z_i` and an abelian ideal.
pub fn make_almost_abelian(a: &Endomorphism) -> Result<Bracket> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let n = a.nrows();
    let mut mu = Bracket::zero(n + 1);
    for i in 1..=n {
        let col = pair_index(n + 1, 0, i);
        for p in 1..=n {
            mu.mat[(p, col)] = a[(p - 1, i - 1)];
        }
    }
    Ok(mu)
}

/// Recovers `A` from an almost-abelian bracket (the `Z₀ ∧ ·` block).
pub fn almost_abelian_matrix(mu: &Bracket) -> Endomorphism {
    let n = mu.dim() - 1;
    let mut a = CMatrix::zeros(n, n);
    for i in 1..=n {
        let col = pair_index(n + 1, 0, i);
        for p in 1..=n {
            a[(p - 1, i - 1)] = mu.mat[(p, col)];
        }
    }
    a
}
