//! Bracket flow `μ̇ = −π(P_μ)μ` and its gauged, normalized and centre-split
//! variants, with per-sample diagnostics.

pub mod ode;

use crate::bracket::{
    adapted_frame, centre, centre_near_rank_drop, centre_split, jacobi_residual, nilpotency_degree, project_to_jacobi,
    wedge_square, Bracket, Nilpotency,
};
use crate::curvature::algebraic_soliton_fit;
use crate::error::{Error, Result};
use crate::tensor::{id_wedge, inner, projector, subspace_angle, CMatrix, Endomorphism, C64, DEFAULT_REL_TOL};

use ode::{integrate, Schedule};
pub use ode::{Integrator, Outcome};

#[derive(Clone, Copy, Debug)]
pub struct FlowConfig {
    pub integrator: Integrator,
    pub t_end: f64,
    pub record_stride: f64,
    /// Field-norm threshold for fixed-point detection.
    pub eps_fix: f64,
    pub dwell: f64,
    /// Allowed `|‖μ̃‖ − 1|` for normalized flows.
    pub drift_tol: f64,
    /// End the run once a fixed point has been detected.
    pub stop_at_fixed_point: bool,
    /// Rank tolerance for centre and nilpotency decisions.
    pub rel_tol: f64,
    /// Correct normalized runs back onto the Jacobi variety after each step.
    pub jacobi_projection: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            integrator: Integrator::default(),
            t_end: 10.0,
            record_stride: 0.1,
            eps_fix: 1e-8,
            dwell: 1.0,
            drift_tol: 1e-10,
            stop_at_fixed_point: true,
            rel_tol: DEFAULT_REL_TOL,
            jacobi_projection: true,
        }
    }
}

impl FlowConfig {
    pub fn with_t_end(mut self, t_end: f64, record_stride: f64) -> Self {
        self.t_end = t_end;
        self.record_stride = record_stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("t_end", self.t_end)?;
        positive("record_stride", self.record_stride)?;
        positive("eps_fix", self.eps_fix)?;
        positive("drift_tol", self.drift_tol)?;
        positive("rel_tol", self.rel_tol)?;
        if !(self.dwell >= 0.0 && self.dwell.is_finite()) {
            return Err(Error::InvalidConfig(format!("dwell must be nonnegative, got {}", self.dwell)));
        }
        match self.integrator {
            Integrator::Rk4 { step } => positive("step", step)?,
            Integrator::Adaptive { abs_tol, rel_tol } => {
                positive("abs_tol", abs_tol)?;
                positive("rel_tol", rel_tol)?;
            }
        }
        if (self.t_end / self.record_stride) > 1e7 {
            return Err(Error::InvalidConfig("more than 10^7 samples requested".into()));
        }
        Ok(())
    }

    fn schedule(&self) -> Schedule {
        Schedule {
            integrator: self.integrator,
            t_end: self.t_end,
            stride: self.record_stride,
            stop_at_fixed_point: self.stop_at_fixed_point.then_some((self.eps_fix, self.dwell)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    Bracket,
    Gauged,
    Normalized,
    SplitNormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub norm_sq: f64,
    /// Norm of the vector field of the flow being integrated.
    pub field_norm: f64,
    pub lambda_hat: f64,
    pub lambda_imag: f64,
    pub soliton_residual: f64,
    pub phi: Option<f64>,
    pub centre_dim: usize,
    pub jacobi_residual: f64,
    /// Gauged flow only: sine of the largest angle between the current centre
    /// and the centre of the initial bracket.
    pub centre_angle: Option<f64>,
    /// Gauged flow only: mismatch between the projected field and the
    /// component equations for `ν₀`, `ν₁`.
    pub split_residual: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub bracket: Bracket,
    pub diag: Diagnostics,
}

#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub kind: FlowKind,
    pub samples: Vec<Sample>,
    pub outcome: Outcome,
    pub warnings: Vec<String>,
}

impl FlowTrace {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("traces hold at least the initial sample")
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn max_jacobi_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.diag.jacobi_residual).fold(0.0, f64::max)
    }
}

/// Matrix form of `π(A)m = A m − m (id ∧ A)`.
pub(crate) fn pi_mat(a: &Endomorphism, m: &CMatrix) -> CMatrix {
    a * m - m * id_wedge(a)
}

/// `−π(P_μ)μ`.
pub fn bracket_field(mu: &CMatrix) -> CMatrix {
    let p = mu * mu.adjoint();
    -pi_mat(&p, mu)
}

/// `S_ν = ν₁ν₀* − ν₀ν₁*` for the projector `pz` onto the centre.
pub fn gauge_field(nu: &CMatrix, pz: &CMatrix) -> Endomorphism {
    let nu0 = pz * nu;
    let nu1 = nu - &nu0;
    &nu1 * nu0.adjoint() - &nu0 * nu1.adjoint()
}

/// `−π(P_ν − S_ν)ν`.
pub fn gauged_field(nu: &CMatrix, pz: &CMatrix) -> CMatrix {
    let p = nu * nu.adjoint();
    let s = gauge_field(nu, pz);
    -pi_mat(&(p - s), nu)
}

/// Component equations of the gauged flow:
/// `ν̇₀ = ν₀(id∧ν₁ν₁* − 2ν₁*ν₁ − ν₀*ν₀)` and `ν̇₁ = −π(P_{ν₁})ν₁`.
pub fn split_field(nu0: &CMatrix, nu1: &CMatrix) -> (CMatrix, CMatrix) {
    let inner_op = id_wedge(&(nu1 * nu1.adjoint())) - nu1.adjoint() * nu1 * C64::new(2.0, 0.0) - nu0.adjoint() * nu0;
    (nu0 * inner_op, bracket_field(nu1))
}

/// `α/‖μ‖²` scaled form of the normalizing coefficient, `−Re⟨π(P)μ, μ⟩/‖μ‖²`.
/// It agrees with `α_μ = −⟨π(P_μ)μ, μ⟩` on the unit sphere and makes the
/// sphere invariant rather than repelling.
pub fn normalizing_alpha(mu: &CMatrix) -> f64 {
    let nsq = mu.norm_squared();
    if nsq == 0.0 {
        return 0.0;
    }
    let p = mu * mu.adjoint();
    -inner(&pi_mat(&p, mu), mu).re / nsq
}

/// `−π(P_μ)μ − αμ`.
pub fn normalized_field(mu: &CMatrix) -> CMatrix {
    let alpha = normalizing_alpha(mu);
    bracket_field(mu) - mu * C64::new(alpha, 0.0)
}

fn diagnose(mu: &Bracket, field_norm: f64, rel_tol: f64, warnings: &mut Vec<String>, t: f64) -> Diagnostics {
    let (lambda_hat, lambda_imag, soliton_residual) = match algebraic_soliton_fit(mu) {
        Ok(fit) => {
            if fit.lambda_anomaly() && !warnings.iter().any(|w| w.starts_with("lambda")) {
                warnings.push(format!("lambda has imaginary part {:e} at t = {t}", fit.lambda_imag));
            }
            (fit.lambda, fit.lambda_imag, fit.residual)
        }
        Err(_) => (0.0, 0.0, 0.0),
    };
    if centre_near_rank_drop(mu, rel_tol) && !warnings.iter().any(|w| w.starts_with("centre")) {
        warnings.push(format!("centre rank decision is near the tolerance at t = {t}"));
    }
    Diagnostics {
        norm_sq: mu.norm_sq(),
        field_norm,
        lambda_hat,
        lambda_imag,
        soliton_residual,
        phi: None,
        centre_dim: centre(mu, rel_tol).ncols(),
        jacobi_residual: jacobi_residual(mu),
        centre_angle: None,
        split_residual: None,
    }
}

fn bracket_of(m: &CMatrix) -> Bracket {
    Bracket::from_matrix(m.clone()).expect("state keeps bracket shape")
}

/// Integrates `μ̇ = −π(P_μ)μ`. With `cfg.jacobi_projection` set, the run
/// is carried in the adapted frame described at [`integrate_normalized_flow`]
/// (without the sphere projection).
pub fn integrate_bracket_flow(mu0: &Bracket, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    integrate_framed(mu0.matrix().clone(), cfg, false)
}

fn require_nilpotent(mu: &Bracket, rel_tol: f64) -> Result<usize> {
    match nilpotency_degree(mu, rel_tol) {
        Nilpotency::Degree(k) => Ok(k),
        Nilpotency::NotNilpotent => Err(Error::NotNilpotent),
    }
}

/// Integrates the gauged flow `ν̇ = −π(P_ν − S_ν)ν`, with the centre of `μ₀`
/// held fixed as the splitting subspace.
pub fn integrate_gauged_flow(mu0: &Bracket, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    require_nilpotent(mu0, cfg.rel_tol)?;
    let n = mu0.dim();
    let z0 = centre(mu0, cfg.rel_tol);
    let pz = projector(&z0, n);
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    let field_fn = |y: &CMatrix| gauged_field(y, &pz);
    let outcome = integrate(
        mu0.matrix().clone(),
        field_fn,
        |_| {},
        &cfg.schedule(),
        |t, y| {
            let f = gauged_field(y, &pz);
            let nu0 = &pz * y;
            let nu1 = y - &nu0;
            let (f0, f1) = split_field(&nu0, &nu1);
            let split_residual = (&pz * &f - f0).norm() + (&f - &pz * &f - f1).norm();
            let field = f.norm();
            let nu = bracket_of(y);
            let mut diag = diagnose(&nu, field, cfg.rel_tol, &mut warnings, t);
            let zt = centre(&nu, cfg.rel_tol);
            diag.centre_angle = subspace_angle(&zt, &z0);
            diag.split_residual = Some(split_residual);
            samples.push(Sample { t, bracket: nu, diag });
            field
        },
    );
    Ok(FlowTrace { kind: FlowKind::Gauged, samples, outcome, warnings })
}

#[derive(Clone, Debug)]
pub struct GaugeReport {
    /// `max_t ‖ν_t − k_t·μ_t‖`.
    pub max_discrepancy: f64,
    /// `max_t ‖k_t* k_t − id‖`.
    pub max_unitarity_defect: f64,
    pub path: GaugePath,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub struct GaugePath {
    pub times: Vec<f64>,
    pub k: Vec<Endomorphism>,
}

/// `h·μ` on raw matrices; `None` if `h` is not invertible.
fn act_mat(h: &Endomorphism, mu: &CMatrix) -> Option<CMatrix> {
    let inv = h.clone().try_inverse()?;
    let w = crate::tensor::wedge_endo(&inv, &inv).ok()? * C64::new(0.5, 0.0);
    Some(h * mu * w)
}

/// Co-integrates `μ_t`, `ν_t` and `k̇ = S_{k·μ} k` from `k₀ = id`.
pub fn verify_gauge_equivalence(mu0: &Bracket, cfg: &FlowConfig) -> Result<GaugeReport> {
    cfg.validate()?;
    require_nilpotent(mu0, cfg.rel_tol)?;
    let n = mu0.dim();
    let big_n = mu0.wedge_dim();
    let pz = projector(&centre(mu0, cfg.rel_tol), n);
    let mut y0 = CMatrix::zeros(n, 2 * big_n + n);
    y0.view_mut((0, 0), (n, big_n)).copy_from(mu0.matrix());
    y0.view_mut((0, big_n), (n, big_n)).copy_from(mu0.matrix());
    y0.view_mut((0, 2 * big_n), (n, n)).copy_from(&CMatrix::identity(n, n));
    let unpack = |y: &CMatrix| {
        (y.columns(0, big_n).into_owned(), y.columns(big_n, big_n).into_owned(), y.columns(2 * big_n, n).into_owned())
    };
    let rhs = |y: &CMatrix| {
        let (mu, nu, k) = unpack(y);
        let mut out = CMatrix::zeros(n, y.ncols());
        out.view_mut((0, 0), (n, big_n)).copy_from(&bracket_field(&mu));
        out.view_mut((0, big_n), (n, big_n)).copy_from(&gauged_field(&nu, &pz));
        let kmu = act_mat(&k, &mu).unwrap_or_else(|| CMatrix::from_element(n, big_n, C64::new(f64::NAN, 0.0)));
        out.view_mut((0, 2 * big_n), (n, n)).copy_from(&(gauge_field(&kmu, &pz) * k));
        out
    };
    let mut cfg = *cfg;
    cfg.stop_at_fixed_point = false;
    let mut max_discrepancy: f64 = 0.0;
    let mut max_unitarity_defect: f64 = 0.0;
    let mut path = GaugePath { times: Vec::new(), k: Vec::new() };
    let outcome = integrate(
        y0,
        rhs,
        |_| {},
        &cfg.schedule(),
        |t, y| {
            let (mu, nu, k) = unpack(y);
            let disc = act_mat(&k, &mu).map_or(f64::INFINITY, |kmu| (nu - kmu).norm());
            max_discrepancy = max_discrepancy.max(disc);
            max_unitarity_defect = max_unitarity_defect.max((k.adjoint() * &k - CMatrix::identity(n, n)).norm());
            path.times.push(t);
            path.k.push(k);
            f64::INFINITY
        },
    );
    Ok(GaugeReport { max_discrepancy, max_unitarity_defect, path, outcome })
}

fn normalize_in_place(y: &mut CMatrix) {
    let norm = y.norm();
    if norm > 0.0 {
        *y /= C64::new(norm, 0.0);
    }
}

/// Lower-triangular representative `P − S` of `P` modulo anti-Hermitian
/// matrices: `S` has `S_ab = −P_ab`, `S_ba = conj(P_ab)` for `a > b`.
fn triangular_gauge(p: &Endomorphism) -> (Endomorphism, Endomorphism) {
    let n = p.nrows();
    let mut lower = CMatrix::zeros(n, n);
    let mut s = CMatrix::zeros(n, n);
    for a in 0..n {
        lower[(a, a)] = p[(a, a)];
        for b in 0..a {
            lower[(a, b)] = p[(a, b)] * 2.0;
            s[(a, b)] = -p[(a, b)];
            s[(b, a)] = p[(a, b)].conj();
        }
    }
    (lower, s)
}

/// Integrates the normalized flow from `μ₀/‖μ₀‖`, projecting back to the unit
/// sphere after every accepted step.
///
/// With `cfg.jacobi_projection` set, each accepted step is also pulled back
/// onto the Jacobi variety by a Gauss-Newton correction. For nilpotent input
/// the state is additionally carried in a unitary frame adapted to the lower
/// central series under the gauge `ν̇ = −π(P − S + α)ν`, `k̇ = S k`, which keeps
/// the layer pattern (and hence nilpotency) exact. Samples report
/// `μ = k⁻¹·ν`, a solution of the ungauged equation.
pub fn integrate_normalized_flow(mu0: &Bracket, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    if mu0.norm_sq() == 0.0 {
        return Err(Error::ZeroBracket);
    }
    integrate_framed(mu0.matrix() / C64::new(mu0.norm(), 0.0), cfg, true)
}

/// Shared driver for the bracket and normalized flows; the state is `[ν | k]`.
fn integrate_framed(start: CMatrix, cfg: &FlowConfig, normalized: bool) -> Result<FlowTrace> {
    let n = start.nrows();
    let big_n = start.ncols();
    let unit = bracket_of(&start);
    let frame = if cfg.jacobi_projection && !unit.is_zero() { adapted_frame(&unit, cfg.rel_tol) } else { None };
    let (nu0, k0) = match &frame {
        Some(f) => {
            let u = &f.basis;
            let mut nu = u.adjoint() * &start * wedge_square(u);
            f.truncate(&mut nu);
            (nu, u.adjoint())
        }
        None => (start, CMatrix::identity(n, n)),
    };
    let free = frame.as_ref().map(|f| f.free_entries());
    let gauged = frame.is_some();
    let mut y0 = CMatrix::zeros(n, big_n + n);
    y0.view_mut((0, 0), (n, big_n)).copy_from(&nu0);
    y0.view_mut((0, big_n), (n, n)).copy_from(&k0);
    let plain_field = |nu: &CMatrix| if normalized { normalized_field(nu) } else { bracket_field(nu) };

    let rhs = |y: &CMatrix| {
        let nu = y.columns(0, big_n).into_owned();
        let mut out = CMatrix::zeros(n, big_n + n);
        if gauged {
            let k = y.columns(big_n, n);
            let alpha = if normalized { normalizing_alpha(&nu) } else { 0.0 };
            let (lower, s) = triangular_gauge(&(&nu * nu.adjoint()));
            let a = lower + CMatrix::identity(n, n) * C64::new(alpha, 0.0);
            out.view_mut((0, 0), (n, big_n)).copy_from(&(-pi_mat(&a, &nu)));
            out.view_mut((0, big_n), (n, n)).copy_from(&(s * k));
        } else {
            out.view_mut((0, 0), (n, big_n)).copy_from(&plain_field(&nu));
        }
        out
    };
    let project = |y: &mut CMatrix| {
        if !normalized && !cfg.jacobi_projection {
            return;
        }
        let mut nu = y.columns(0, big_n).into_owned();
        if cfg.jacobi_projection {
            project_to_jacobi(&mut nu, free.as_deref(), 2);
        }
        if normalized {
            normalize_in_place(&mut nu);
        }
        y.columns_mut(0, big_n).copy_from(&nu);
    };
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    let drift_tol = cfg.drift_tol;
    let outcome = integrate(y0, rhs, project, &cfg.schedule(), |t, y| {
        let nu = y.columns(0, big_n).into_owned();
        let m = if gauged {
            let k = y.columns(big_n, n).into_owned();
            k.adjoint() * nu * wedge_square(&k)
        } else {
            nu
        };
        let field = plain_field(&m).norm();
        let mu = bracket_of(&m);
        if normalized {
            let drift = (mu.norm() - 1.0).abs();
            if drift > drift_tol && !warnings.iter().any(|w: &String| w.starts_with("norm drift")) {
                warnings.push(format!("norm drift {drift:e} exceeds tolerance at t = {t}"));
            }
        }
        let diag = diagnose(&mu, field, cfg.rel_tol, &mut warnings, t);
        samples.push(Sample { t, bracket: mu, diag });
        field
    });
    let kind = if normalized { FlowKind::Normalized } else { FlowKind::Bracket };
    Ok(FlowTrace { kind, samples, outcome, warnings })
}

/// `φ(η) = ½(‖η₀η₁*‖² + ‖id∧η₁η₁* − η₁*η₁ − η₀*η₀ − α_{η₁} id‖²)` with
/// `α_{η₁} = −⟨π(P_{η₁})η₁, η₁⟩`.
pub fn phi(eta0: &Bracket, eta1: &Bracket) -> f64 {
    let e0 = eta0.matrix();
    let e1 = eta1.matrix();
    let alpha = -inner(&pi_mat(&(e1 * e1.adjoint()), e1), e1).re;
    let big_n = e1.ncols();
    let f = id_wedge(&(e1 * e1.adjoint()))
        - e1.adjoint() * e1
        - e0.adjoint() * e0
        - CMatrix::identity(big_n, big_n) * C64::new(alpha, 0.0);
    0.5 * ((e0 * e1.adjoint()).norm_squared() + f.norm_squared())
}

/// Dissipation bound `‖η₀F‖² + ‖η₀*η₀η₁*‖²` with
/// `F = id∧η₁η₁* − η₁*η₁ − η₀*η₀ − α_{η₁} id`. While `η₁` is stationary,
/// `dφ/dt` is at most minus this quantity, which vanishes exactly when
/// `η̇₀ = 0`.
pub fn phi_dissipation(eta0: &Bracket, eta1: &Bracket) -> f64 {
    let e0 = eta0.matrix();
    let e1 = eta1.matrix();
    let alpha = -inner(&pi_mat(&(e1 * e1.adjoint()), e1), e1).re;
    let big_n = e1.ncols();
    let f = id_wedge(&(e1 * e1.adjoint()))
        - e1.adjoint() * e1
        - e0.adjoint() * e0
        - CMatrix::identity(big_n, big_n) * C64::new(alpha, 0.0);
    (e0 * f).norm_squared() + (e0.adjoint() * e0 * e1.adjoint()).norm_squared()
}

/// Right-hand side of the centre-split normalized system on `[η₀ | η₁]`.
fn eta_field(y: &CMatrix, big_n: usize) -> (CMatrix, CMatrix) {
    let n = y.nrows();
    let e0 = y.columns(0, big_n).into_owned();
    let e1 = y.columns(big_n, big_n).into_owned();
    let alpha = normalizing_alpha(&e1);
    let op = id_wedge(&(&e1 * e1.adjoint()))
        - e1.adjoint() * &e1 * C64::new(2.0, 0.0)
        - e0.adjoint() * &e0
        - CMatrix::identity(big_n, big_n) * C64::new(alpha, 0.0);
    let d0 = &e0 * op;
    let d1 = bracket_field(&e1) - &e1 * C64::new(alpha, 0.0);
    debug_assert_eq!(d0.nrows(), n);
    (d0, d1)
}

#[derive(Clone, Debug)]
pub struct SplitTrace {
    /// `η = η₀ + η₁` with `φ` recorded and the full field norm.
    pub combined: FlowTrace,
    /// `η₀` samples; `field_norm` is `‖η̇₀‖`.
    pub eta0: FlowTrace,
    /// `η₁` samples; `field_norm` is `‖η̇₁‖`.
    pub eta1: FlowTrace,
    /// [`phi_dissipation`] at each sample.
    pub dissipation: Vec<f64>,
}

/// Integrates the normalized centre-split system from
/// `(μ₀/‖μ₁‖, μ₁/‖μ₁‖)`.
pub fn integrate_split_normalized_flow(mu0: &Bracket, cfg: &FlowConfig) -> Result<SplitTrace> {
    if mu0.norm_sq() == 0.0 {
        return Err(Error::ZeroBracket);
    }
    let split = centre_split(mu0, cfg.rel_tol);
    integrate_split_from(&split.mu0, &split.mu1, cfg)
}

/// Integrates the η-system from explicit components. `eta1` is rescaled to
/// unit norm and `eta0` by the same factor.
pub fn integrate_split_from(mu_0: &Bracket, mu_1: &Bracket, cfg: &FlowConfig) -> Result<SplitTrace> {
    cfg.validate()?;
    let norm1 = mu_1.norm();
    if norm1 <= cfg.rel_tol * (mu_0.norm() + norm1) || norm1 == 0.0 {
        return Err(Error::Degenerate("complement component μ₁ vanishes (bracket is at most 2-step nilpotent)".into()));
    }
    let n = mu_0.dim();
    let big_n = mu_0.wedge_dim();
    let scale = C64::new(1.0 / norm1, 0.0);
    let mut y0 = CMatrix::zeros(n, 2 * big_n);
    y0.view_mut((0, 0), (n, big_n)).copy_from(&(mu_0.matrix() * scale));
    y0.view_mut((0, big_n), (n, big_n)).copy_from(&(mu_1.matrix() * scale));
    let rhs = |y: &CMatrix| {
        let (d0, d1) = eta_field(y, big_n);
        let mut out = CMatrix::zeros(n, 2 * big_n);
        out.view_mut((0, 0), (n, big_n)).copy_from(&d0);
        out.view_mut((0, big_n), (n, big_n)).copy_from(&d1);
        out
    };
    let project = |y: &mut CMatrix| {
        let norm = y.columns(big_n, big_n).norm();
        if norm > 0.0 {
            let mut e1 = y.columns_mut(big_n, big_n);
            e1 /= C64::new(norm, 0.0);
        }
    };
    let mut combined = Vec::new();
    let mut s0 = Vec::new();
    let mut s1 = Vec::new();
    let mut dissipation = Vec::new();
    let mut warnings = Vec::new();
    let outcome = integrate(y0, rhs, project, &cfg.schedule(), |t, y| {
        let (d0, d1) = eta_field(y, big_n);
        let e0 = bracket_of(&y.columns(0, big_n).into_owned());
        let e1 = bracket_of(&y.columns(big_n, big_n).into_owned());
        let drift = (e1.norm() - 1.0).abs();
        if drift > cfg.drift_tol && !warnings.iter().any(|w: &String| w.starts_with("norm drift")) {
            warnings.push(format!("norm drift {drift:e} of η₁ exceeds tolerance at t = {t}"));
        }
        let full = (d0.norm_squared() + d1.norm_squared()).sqrt();
        let value = phi(&e0, &e1);
        dissipation.push(phi_dissipation(&e0, &e1));
        let eta = &e0 + &e1;
        let mut diag = diagnose(&eta, full, cfg.rel_tol, &mut warnings, t);
        diag.phi = Some(value);
        combined.push(Sample { t, bracket: eta, diag });
        let mut d = diagnose(&e0, d0.norm(), cfg.rel_tol, &mut Vec::new(), t);
        d.phi = Some(value);
        s0.push(Sample { t, bracket: e0, diag: d });
        let d = diagnose(&e1, d1.norm(), cfg.rel_tol, &mut Vec::new(), t);
        s1.push(Sample { t, bracket: e1, diag: d });
        full
    });
    let wrap =
        |samples, warnings| FlowTrace { kind: FlowKind::SplitNormalized, samples, outcome: outcome.clone(), warnings };
    Ok(SplitTrace {
        combined: wrap(combined, warnings),
        eta0: wrap(s0, Vec::new()),
        eta1: wrap(s1, Vec::new()),
        dissipation,
    })
}

/// First sample after which the field norm stays below `eps` for at least
/// `dwell` time units.
pub fn detect_fixed_point(trace: &FlowTrace, eps: f64, dwell: f64) -> Option<(f64, Bracket)> {
    let samples = &trace.samples;
    let mut start: Option<usize> = None;
    for (idx, s) in samples.iter().enumerate() {
        if s.diag.field_norm < eps {
            let i = *start.get_or_insert(idx);
            if s.t - samples[i].t >= dwell {
                return Some((samples[i].t, samples[i].bracket.clone()));
            }
        } else {
            start = None;
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub applicable: bool,
    /// `sup_t t‖μ(t)‖²`.
    pub sup_t_norm_sq: f64,
    /// Largest rise of `t‖μ‖²` over the trailing half of the samples,
    /// relative to its value at the start of that half.
    pub trailing_increase: f64,
    pub bounded: bool,
    /// `Ĉ = max 2‖π(P_μ)μ‖/‖μ‖³`.
    pub c_hat: f64,
    /// `min_t ‖μ(t)‖² (Ĉt + ‖μ₀‖⁻²) − 1`; nonnegative when the lower envelope holds.
    pub lower_margin: f64,
    pub lower_ok: bool,
}

/// Slack on the trailing-half increase of `t‖μ‖²`.
pub const GROWTH_SLACK: f64 = 1e-10;
/// Relative slack on the lower envelope, which is an equality for `heisenberg3`.
pub const ENVELOPE_REL_SLACK: f64 = 1e-9;

/// Checks `sup t‖μ‖² < ∞` and `‖μ(t)‖² ≥ 1/(Ĉt + ‖μ₀‖⁻²)` along a bracket-flow trace.
pub fn growth_envelope_check(trace: &FlowTrace, rel_tol: f64) -> GrowthReport {
    let mut report = GrowthReport {
        applicable: false,
        sup_t_norm_sq: 0.0,
        trailing_increase: 0.0,
        bounded: true,
        c_hat: 0.0,
        lower_margin: 0.0,
        lower_ok: true,
    };
    let Some(first) = trace.samples.first() else { return report };
    if trace.kind != FlowKind::Bracket || nilpotency_degree(&first.bracket, rel_tol) == Nilpotency::NotNilpotent {
        return report;
    }
    report.applicable = true;
    let g: Vec<f64> = trace.samples.iter().map(|s| s.t * s.diag.norm_sq).collect();
    report.sup_t_norm_sq = g.iter().copied().fold(0.0, f64::max);
    let half = g.len() / 2;
    let base = g[half];
    report.trailing_increase = g[half..].iter().map(|v| v - base).fold(0.0, f64::max);
    report.bounded = report.sup_t_norm_sq.is_finite() && report.trailing_increase <= GROWTH_SLACK;

    let n0 = first.diag.norm_sq;
    if n0 == 0.0 {
        return report;
    }
    report.c_hat = trace
        .samples
        .iter()
        .filter(|s| s.diag.norm_sq > 0.0)
        .map(|s| 2.0 * s.diag.field_norm / s.diag.norm_sq.powf(1.5))
        .fold(0.0, f64::max);
    report.lower_margin = trace
        .samples
        .iter()
        .map(|s| s.diag.norm_sq * (report.c_hat * s.t + 1.0 / n0) - 1.0)
        .fold(f64::INFINITY, f64::min);
    report.lower_ok = report.lower_margin >= -ENVELOPE_REL_SLACK;
    report
}

#[cfg(test)]
mod tests;
