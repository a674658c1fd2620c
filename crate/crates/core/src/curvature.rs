//! Curvature endomorphisms `P_μ`, `Q_μ`, the form `Θ`, and soliton fits.

use nalgebra::DMatrix;

use crate::bracket::{centre_split, derivation_space, pi_action, Bracket};
use crate::error::{Error, Result};
use crate::tensor::{adjoint, commutator, inner, lstsq_min_norm_real, CMatrix, Endomorphism, C64};

/// `P_μ = μ μ*`.
pub fn p_endo(mu: &Bracket) -> Endomorphism {
    mu.matrix() * mu.adjoint()
}

/// `Q_μ` with `⟨Q_μ v, w⟩ = Σ_i ⟨μ(v ∧ Z_i), μ(w ∧ Z_i)⟩`, i.e.
/// `(Q_μ)_{ab} = ⟨ad_{Z_b}, ad_{Z_a}⟩`.
pub fn q_endo(mu: &Bracket) -> Endomorphism {
    let n = mu.dim();
    let ads: Vec<Endomorphism> = (0..n).map(|a| mu.ad(a)).collect();
    CMatrix::from_fn(n, n, |a, b| inner(&ads[b], &ads[a]))
}

/// Operator `H` of the Hermitian form `Θ_μ` relative to the background
/// product, `Θ(v, w̄) = ⟨Hv, w⟩`, evaluated from the index-sum formula
/// `Θ(Z_i, Z̄_j) = ½ Σ_{k,r} conj(c_kr^i) c_kr^j` over ordered pairs.
pub fn theta_form(mu: &Bracket) -> CMatrix {
    let n = mu.dim();
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for r in 0..n {
                    acc += mu.constant(k, r, i).conj() * mu.constant(k, r, j);
                }
            }
            h[(j, i)] = acc * 0.5;
        }
    }
    h
}

/// `|tr((P_μ − Q_μ)E) − ⟨π(E)μ, μ⟩|`.
pub fn moment_identity_residual(mu: &Bracket, e: &Endomorphism) -> f64 {
    let lhs = ((p_endo(mu) - q_endo(mu)) * e).trace();
    let rhs = pi_action(e, mu).inner(mu);
    (lhs - rhs).norm()
}

/// `|‖π(D*)μ‖² + tr(Q_μ [D, D*])|`.
pub fn git_soliton_identity_residual(mu: &Bracket, d: &Endomorphism) -> f64 {
    let ds = adjoint(d);
    let first = pi_action(&ds, mu).norm_sq();
    let second = (q_endo(mu) * commutator(d, &ds)).trace();
    (C64::new(first, 0.0) + second).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    Static,
    Algebraic,
    SemiAlgebraic,
}

#[derive(Clone, Debug)]
pub struct SolitonFit {
    pub kind: FitKind,
    pub lambda: f64,
    /// Imaginary part of the Rayleigh quotient; only set by algebraic fits.
    pub lambda_imag: f64,
    pub derivation: Option<Endomorphism>,
    pub residual: f64,
}

impl SolitonFit {
    /// Acceptance rule `residual < 1e-9 ‖μ‖²`.
    pub fn is_soliton(&self, mu: &Bracket) -> bool {
        self.residual < SOLITON_REL_TOL * mu.norm_sq().max(f64::MIN_POSITIVE)
    }

    /// Whether the imaginary part of `λ` exceeds the anomaly threshold.
    pub fn lambda_anomaly(&self) -> bool {
        self.lambda_imag.abs() > 1e-10
    }
}

pub const SOLITON_REL_TOL: f64 = 1e-9;

/// Best multiple of the identity: `λ = tr P_μ / n`, residual `‖P_μ − λ id‖`.
pub fn static_fit(mu: &Bracket) -> SolitonFit {
    let n = mu.dim();
    let p = p_endo(mu);
    let lambda = p.trace().re / n as f64;
    let residual = (p - CMatrix::identity(n, n) * C64::new(lambda, 0.0)).norm();
    SolitonFit { kind: FitKind::Static, lambda, lambda_imag: 0.0, derivation: None, residual }
}

/// `λ = −⟨π(P_μ)μ, μ⟩/‖μ‖²`, residual `‖π(P_μ)μ + λμ‖`, derivation `P_μ − λ id`.
pub fn algebraic_soliton_fit(mu: &Bracket) -> Result<SolitonFit> {
    let nsq = mu.norm_sq();
    if nsq == 0.0 {
        return Err(Error::ZeroBracket);
    }
    let p = p_endo(mu);
    let field = pi_action(&p, mu);
    let q = -field.inner(mu) / nsq;
    let residual = (&field + &mu.scale(q.re)).norm();
    let n = mu.dim();
    let d = p - CMatrix::identity(n, n) * C64::new(q.re, 0.0);
    Ok(SolitonFit { kind: FitKind::Algebraic, lambda: q.re, lambda_imag: q.im, derivation: Some(d), residual })
}

fn push_real_column(m: &mut DMatrix<f64>, col: usize, a: &CMatrix) {
    let len = a.len();
    for (r, v) in a.iter().enumerate() {
        m[(r, col)] = v.re;
        m[(r + len, col)] = v.im;
    }
}

/// Least squares over `λ ∈ ℝ` and `D ∈ Der(μ)` for
/// `min ‖P_μ − λ id − ½(D + D*)‖`, taking the minimum-norm solution.
pub fn semialgebraic_soliton_fit(mu: &Bracket, rel_tol: f64) -> Result<SolitonFit> {
    if mu.norm_sq() == 0.0 {
        return Err(Error::ZeroBracket);
    }
    let n = mu.dim();
    let p = p_endo(mu);
    let ders = derivation_space(mu, rel_tol).basis;
    let cols = 1 + 2 * ders.len();
    let mut m = DMatrix::<f64>::zeros(2 * n * n, cols);
    push_real_column(&mut m, 0, &CMatrix::identity(n, n));
    let i = C64::new(0.0, 1.0);
    for (k, d) in ders.iter().enumerate() {
        let re_part = (d + adjoint(d)) * C64::new(0.5, 0.0);
        let im_part = (d * i + adjoint(&(d * i))) * C64::new(0.5, 0.0);
        push_real_column(&mut m, 1 + 2 * k, &re_part);
        push_real_column(&mut m, 2 + 2 * k, &im_part);
    }
    let mut rhs = DMatrix::<f64>::zeros(2 * n * n, 1);
    push_real_column(&mut rhs, 0, &p);

    let x = lstsq_min_norm_real(&m, &rhs, 1e-12);
    let lambda = x[(0, 0)];
    let mut d = CMatrix::zeros(n, n);
    for (k, basis) in ders.iter().enumerate() {
        d += basis * C64::new(x[(1 + 2 * k, 0)], x[(2 + 2 * k, 0)]);
    }
    let herm = (&d + adjoint(&d)) * C64::new(0.5, 0.0);
    let residual = (p - CMatrix::identity(n, n) * C64::new(lambda, 0.0) - herm).norm();
    Ok(SolitonFit { kind: FitKind::SemiAlgebraic, lambda, lambda_imag: 0.0, derivation: Some(d), residual })
}

/// Block relations of a soliton in the centre-split basis `𝔷 ⊕ 𝔷^⊥`.
#[derive(Clone, Copy, Debug)]
pub struct BlockResiduals {
    /// `‖μ₀μ₀* − λ id − ½(D₀₀ + D₀₀*)‖` on `𝔷`.
    pub centre_block: f64,
    /// `‖μ₁μ₁* − λ id − ½(D₁₁ + D₁₁*)‖` on `𝔷^⊥`.
    pub complement_block: f64,
    /// `‖μ₀μ₁* − ½ D₀₁‖`.
    pub cross_block: f64,
    /// `‖Pr_{𝔷⊥} D|_𝔷‖`, zero when `D` preserves the centre.
    pub centre_leak: f64,
}

impl BlockResiduals {
    pub fn max(&self) -> f64 {
        self.centre_block.max(self.complement_block).max(self.cross_block).max(self.centre_leak)
    }
}

pub fn soliton_block_residuals(mu: &Bracket, lambda: f64, d: &Endomorphism, rel_tol: f64) -> BlockResiduals {
    let split = centre_split(mu, rel_tol);
    let z = &split.centre;
    let c = &split.complement;
    let lam = C64::new(lambda, 0.0);
    let block = |mu_a: &Bracket, basis: &CMatrix| -> f64 {
        let dd = basis.adjoint() * d * basis;
        let pa = basis.adjoint() * mu_a.matrix() * mu_a.adjoint() * basis;
        let k = basis.ncols();
        (pa - CMatrix::identity(k, k) * lam - (&dd + dd.adjoint()) * C64::new(0.5, 0.0)).norm()
    };
    let cross = z.adjoint() * split.mu0.matrix() * split.mu1.adjoint() * c;
    let d01 = z.adjoint() * d * c;
    BlockResiduals {
        centre_block: block(&split.mu0, z),
        complement_block: block(&split.mu1, c),
        cross_block: (cross - d01 * C64::new(0.5, 0.0)).norm(),
        centre_leak: (c.adjoint() * d * z).norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::make_almost_abelian;
    use crate::tensor::{from_real, CVector, DEFAULT_REL_TOL};

    fn diag(vals: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&x| C64::new(x, 0.0))))
    }

    #[test]
    fn p_examples() {
        assert_eq!(p_endo(&Bracket::zero(3)), CMatrix::zeros(3, 3));
        assert_eq!(p_endo(&Bracket::heisenberg3()), diag(&[0.0, 0.0, 1.0]));
        let aa = make_almost_abelian(&diag(&[1.0, 2.0])).unwrap();
        assert_eq!(p_endo(&aa), diag(&[0.0, 1.0, 4.0]));
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_endo(&Bracket::zero(3)), CMatrix::zeros(3, 3));
        assert_eq!(q_endo(&Bracket::heisenberg3()), diag(&[1.0, 1.0, 0.0]));
        let aa = make_almost_abelian(&diag(&[1.0, 2.0])).unwrap();
        assert_eq!(q_endo(&aa), diag(&[5.0, 1.0, 4.0]));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_form(&Bracket::heisenberg3()), diag(&[0.0, 0.0, 1.0]));
        let f = Bracket::filiform4().scale_complex(C64::new(0.3, -1.2));
        assert!((theta_form(&f) - p_endo(&f)).norm() < 1e-14);
        let s = theta_form(&f.scale(2.0));
        assert!((s - theta_form(&f) * C64::new(4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn moment_identity_examples() {
        let e = from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(moment_identity_residual(&Bracket::zero(3), &e), 0.0);
        let h = Bracket::heisenberg3();
        assert!(moment_identity_residual(&h, &e) < 1e-15);
        let tr = ((p_endo(&h) - q_endo(&h)) * &e).trace();
        assert!((tr - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn git_identity_examples() {
        let h = Bracket::heisenberg3();
        assert!(git_soliton_identity_residual(&h, &diag(&[1.0, 1.0, 2.0])) < 1e-15);
        let e12 = from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(git_soliton_identity_residual(&h, &e12).is_finite());
    }

    #[test]
    fn static_examples() {
        let z = static_fit(&Bracket::zero(2));
        assert_eq!((z.lambda, z.residual), (0.0, 0.0));
        let h = static_fit(&Bracket::heisenberg3());
        assert!((h.lambda - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.residual - 6f64.sqrt() / 3.0).abs() < 1e-15);
        let solv = make_almost_abelian(&diag(&[1.0, 2.0])).unwrap();
        assert!(static_fit(&solv).residual > 0.1);
    }

    #[test]
    fn algebraic_examples() {
        let h = algebraic_soliton_fit(&Bracket::heisenberg3()).unwrap();
        assert!((h.lambda + 1.0).abs() < 1e-15 && h.residual < 1e-15);
        assert!(h.is_soliton(&Bracket::heisenberg3()));
        let normal = from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let aa = algebraic_soliton_fit(&make_almost_abelian(&normal).unwrap()).unwrap();
        assert!(aa.lambda.abs() < 1e-15 && aa.residual < 1e-15);
        assert!(algebraic_soliton_fit(&Bracket::filiform4()).unwrap().residual > 0.1);
        assert!(matches!(algebraic_soliton_fit(&Bracket::zero(2)), Err(Error::ZeroBracket)));
    }

    #[test]
    fn semialgebraic_examples() {
        let h = Bracket::heisenberg3();
        let fit = semialgebraic_soliton_fit(&h, DEFAULT_REL_TOL).unwrap();
        assert!(fit.residual < 1e-12, "{}", fit.residual);
        assert!((fit.lambda + 1.0).abs() < 1e-12, "{}", fit.lambda);
        let d = fit.derivation.unwrap();
        let herm = (&d + d.adjoint()) * C64::new(0.5, 0.0);
        assert!((herm - diag(&[1.0, 1.0, 2.0])).norm() < 1e-12);

        let jordan = from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let fit = semialgebraic_soliton_fit(&make_almost_abelian(&jordan).unwrap(), DEFAULT_REL_TOL).unwrap();
        assert!(fit.residual > 1e-3, "{}", fit.residual);
        assert!(matches!(semialgebraic_soliton_fit(&Bracket::zero(2), DEFAULT_REL_TOL), Err(Error::ZeroBracket)));
    }

    #[test]
    fn heisenberg_blocks() {
        let h = Bracket::heisenberg3();
        let b = soliton_block_residuals(&h, -1.0, &diag(&[1.0, 1.0, 2.0]), DEFAULT_REL_TOL);
        assert!(b.max() < 1e-14, "{b:?}");
    }
}
