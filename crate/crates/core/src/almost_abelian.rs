//! Almost-abelian brackets `μ_A`: the matrix flow `Ȧ = A[A, A*]`, soliton
//! classification, and the canonical form of nilpotent solitons.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flow::ode::{integrate, Schedule};
use crate::flow::{FlowConfig, Outcome};
use crate::io::{fmt_f64, matrix_rows};
use crate::tensor::{
    commutator, kernel_basis_abs, op_norm, orthogonal_complement, singular_values, CMatrix, CVector, Endomorphism, C64,
};

/// Matrix `A` acting on the abelian ideal `ℂⁿ` of `μ_A`.
pub type AaMatrix = Endomorphism;

/// `A[A, A*]`.
pub fn matrix_field(a: &CMatrix) -> CMatrix {
    a * commutator(a, &a.adjoint())
}

/// `‖[A, A*]‖`.
pub fn normality_defect(a: &AaMatrix) -> f64 {
    commutator(a, &a.adjoint()).norm()
}

fn trace_powers(a: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.nrows());
    let mut power = a.clone();
    for _ in 0..a.nrows() {
        out.push(power.trace());
        power = &power * a;
    }
    out
}

#[derive(Clone, Debug)]
pub struct MatrixSample {
    pub t: f64,
    pub a: AaMatrix,
    pub norm_sq: f64,
    pub field_norm: f64,
    pub normality_defect: f64,
    /// `max_m |tr(A_t^m) − tr(A₀^m)|`.
    pub trace_power_drift: f64,
}

#[derive(Clone, Debug)]
pub struct MatrixTrace {
    pub samples: Vec<MatrixSample>,
    pub outcome: Outcome,
}

impl MatrixTrace {
    pub fn last(&self) -> &MatrixSample {
        self.samples.last().expect("traces hold at least the initial sample")
    }
}

/// Integrates `Ȧ = A[A, A*]`.
pub fn integrate_matrix_flow(a0: &AaMatrix, cfg: &FlowConfig) -> Result<MatrixTrace> {
    cfg.validate()?;
    if !a0.is_square() || a0.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: a0.nrows(), found: a0.ncols() });
    }
    let reference = trace_powers(a0);
    let schedule = Schedule {
        integrator: cfg.integrator,
        t_end: cfg.t_end,
        stride: cfg.record_stride,
        stop_at_fixed_point: cfg.stop_at_fixed_point.then_some((cfg.eps_fix, cfg.dwell)),
    };
    let mut samples = Vec::new();
    let outcome = integrate(
        a0.clone(),
        matrix_field,
        |_| {},
        &schedule,
        |t, a| {
            let field_norm = matrix_field(a).norm();
            let drift = trace_powers(a).iter().zip(&reference).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            samples.push(MatrixSample {
                t,
                a: a.clone(),
                norm_sq: a.norm_squared(),
                field_norm,
                normality_defect: normality_defect(a),
                trace_power_drift: drift,
            });
            field_norm
        },
    );
    Ok(MatrixTrace { samples, outcome })
}

/// Largest trace-power drift over the trace.
pub fn trace_power_drift(trace: &MatrixTrace) -> f64 {
    trace.samples.iter().map(|s| s.trace_power_drift).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixClass {
    Zero,
    Nilpotent,
    Semisimple,
    Neither,
}

impl fmt::Display for MatrixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixClass::Zero => "zero",
            MatrixClass::Nilpotent => "nilpotent",
            MatrixClass::Semisimple => "semisimple",
            MatrixClass::Neither => "neither",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub class: MatrixClass,
    /// Eigenvalues from the complex Schur form (empty for the zero class).
    pub eigenvalues: Vec<C64>,
    /// Set when distinct computed eigenvalues were merged into one cluster or
    /// a rank decision fell close to its threshold.
    pub conditioning_warning: bool,
    pub rel_tol: f64,
}

/// Eigenvalues of `a` with algebraic multiplicity, from a complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
        .eigenvalues()
        .map_err(|e| Error::Degenerate(format!("eigenvalue iteration failed: {e:?}")))
}

/// Single-linkage clusters of `vals` at distance `radius`, as index lists.
fn cluster(vals: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..vals.len()).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            if (vals[i] - vals[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..vals.len() {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(p) => groups[p].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Decides zero / nilpotent / semisimple / neither with rank tolerance `rel_tol`.
pub fn classify_matrix(a: &AaMatrix, rel_tol: f64) -> Result<Classification> {
    let n = a.nrows();
    if !a.is_square() || n == 0 {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let scale = op_norm(a);
    let mut out =
        Classification { class: MatrixClass::Zero, eigenvalues: Vec::new(), conditioning_warning: false, rel_tol };
    if a.norm() < rel_tol {
        return Ok(out);
    }
    let mut power = a.clone();
    for _ in 1..n {
        power = &power * a;
    }
    out.eigenvalues = eigenvalues(a)?;
    if op_norm(&power) <= rel_tol * scale.powi(n as i32) {
        out.class = MatrixClass::Nilpotent;
        return Ok(out);
    }

    // Defective eigenvalues of multiplicity m split by about eps^{1/m}.
    let radius = (1e-8f64).max(10.0 * f64::EPSILON.powf(1.0 / n as f64)) * scale;
    let mut semisimple = true;
    for group in cluster(&out.eigenvalues, radius) {
        let mean = group.iter().map(|&i| out.eigenvalues[i]).sum::<C64>() / C64::new(group.len() as f64, 0.0);
        let spread = group.iter().map(|&i| (out.eigenvalues[i] - mean).norm()).fold(0.0, f64::max);
        if spread > 100.0 * f64::EPSILON * scale {
            out.conditioning_warning = true;
        }
        let shifted = a - CMatrix::identity(n, n) * mean;
        let sv = singular_values(&shifted);
        let tol = (10.0 * spread).max(rel_tol * scale);
        let geometric = sv.iter().filter(|&&s| s <= tol).count();
        if sv.iter().any(|&s| s > tol && s <= 1e3 * tol) {
            // Rank decision is not separated from the threshold.
            out.conditioning_warning = true;
            semisimple = false;
        }
        if geometric < group.len() {
            semisimple = false;
        }
    }
    out.class = if semisimple { MatrixClass::Semisimple } else { MatrixClass::Neither };
    Ok(out)
}

/// Kernel-filtration dimensions `(dim V₀, …, dim V_k)` of a nilpotent matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanType {
    dims: Vec<usize>,
}

impl JordanType {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidJordanType("empty sequence".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidJordanType("entries must be positive".into()));
        }
        if dims.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidJordanType(format!("{dims:?} is not weakly decreasing")));
        }
        Ok(Self { dims })
    }

    /// From Jordan block sizes, in any order.
    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidJordanType("block sizes must be positive".into()));
        }
        let k = *sizes.iter().max().expect("nonempty");
        Self::new((1..=k).map(|i| sizes.iter().filter(|&&s| s >= i).count()).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Number of `i × i` Jordan blocks, indexed from `i = 1`.
    pub fn block_counts(&self) -> Vec<usize> {
        (0..self.dims.len()).map(|i| self.dims[i] - self.dims.get(i + 1).copied().unwrap_or(0)).collect()
    }

    /// All Jordan types of total dimension `n` (one per partition of `n`).
    pub fn all(n: usize) -> Vec<JordanType> {
        fn partitions(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if n == 0 {
                out.push(prefix.clone());
                return;
            }
            for part in (1..=n.min(max)).rev() {
                prefix.push(part);
                partitions(n - part, part, prefix, out);
                prefix.pop();
            }
        }
        let mut parts = Vec::new();
        partitions(n, n, &mut Vec::new(), &mut parts);
        parts.into_iter().map(|p| Self::from_block_sizes(&p).expect("partition")).collect()
    }
}

impl fmt::Display for JordanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for JordanType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidJordanType(format!("`{tok}` is not a positive integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        let total = dims.iter().try_fold(0usize, |acc, &d| acc.checked_add(d));
        if total.is_none_or(|t| t > crate::io::MAX_DIM) {
            return Err(Error::InvalidJordanType(format!("total dimension exceeds {}", crate::io::MAX_DIM)));
        }
        Self::new(dims)
    }
}

/// `d_i = dim ker A^{i+1} − dim ker A^i`, with kernels of `A^i` taken at
/// `rel_tol · ‖A‖^i`.
pub fn jordan_type_of_nilpotent(a: &AaMatrix, rel_tol: f64) -> Result<JordanType> {
    let class = classify_matrix(a, rel_tol)?.class;
    let n = a.nrows();
    match class {
        MatrixClass::Zero => return JordanType::new(vec![n]),
        MatrixClass::Nilpotent => {}
        _ => return Err(Error::NotNilpotent),
    }
    let scale = op_norm(a);
    let mut dims = Vec::new();
    let mut prev = 0;
    let mut power = CMatrix::identity(n, n);
    for i in 1..=n {
        power = &power * a;
        let k = kernel_basis_abs(&power, rel_tol * scale.powi(i as i32)).ncols();
        if k <= prev {
            return Err(Error::InvalidJordanType(format!("kernel filtration stalled at power {i}")));
        }
        dims.push(k - prev);
        prev = k;
        if k == n {
            break;
        }
    }
    if prev != n {
        return Err(Error::NotNilpotent);
    }
    let msg = format!("inconsistent kernel filtration {dims:?}");
    JordanType::new(dims).map_err(|_| Error::InvalidJordanType(msg))
}

/// Integer squares `σ_ij²` of the canonical entries, by level `i = 1..k`.
pub fn canonical_sigma_squares(jt: &JordanType) -> Vec<Vec<u64>> {
    let d = jt.dims();
    let k = d.len() - 1;
    let mut levels: Vec<Vec<u64>> = vec![Vec::new(); k];
    for i in (1..=k).rev() {
        levels[i - 1] = (0..d[i]).map(|j| if i < k && j < d[i + 1] { 1 + levels[i][j] } else { 1 }).collect();
    }
    levels
}

/// Block-superdiagonal canonical soliton with `Σ_i: V_i → V_{i−1}` placed at
/// rows of `V_{i−1}` and columns of `V_i`; nonzero entries on the leading
/// diagonal of each block.
pub fn nilpotent_soliton_canonical(jt: &JordanType) -> AaMatrix {
    let d = jt.dims();
    let n = jt.n();
    let offsets: Vec<usize> = d
        .iter()
        .scan(0, |acc, &x| {
            let o = *acc;
            *acc += x;
            Some(o)
        })
        .collect();
    let mut b = CMatrix::zeros(n, n);
    for (level, squares) in canonical_sigma_squares(jt).iter().enumerate() {
        let i = level + 1;
        for (j, &s) in squares.iter().enumerate() {
            b[(offsets[i - 1] + j, offsets[i] + j)] = C64::new((s as f64).sqrt(), 0.0);
        }
    }
    b
}

#[derive(Clone, Debug)]
pub struct SolitonCheck {
    /// `‖B[B, B*] + B‖`.
    pub residual: f64,
    /// Largest `‖E_i*E_i − E_{i+1}E_{i+1}* − id‖` (or `‖E_k*E_k − id‖`) in the
    /// recovered kernel splitting; `None` if the splitting did not terminate.
    pub system_residual: Option<f64>,
    /// Largest `‖B₁B₂*‖` over the recursive splittings.
    pub cross_residual: Option<f64>,
    /// Dimensions of the recovered `V₀, V₁, …`.
    pub levels: Vec<usize>,
}

/// Residual of `B[B, B*] = −B` and the relations of its kernel splitting.
pub fn verify_nilpotent_soliton(b: &AaMatrix) -> SolitonCheck {
    let residual = (matrix_field(b) + b).norm();
    let n = b.nrows();
    let tol = 1e-8 * op_norm(b).max(1.0);
    let mut bases: Vec<CMatrix> = Vec::new();
    let mut rest = CMatrix::identity(n, n);
    let mut cross: f64 = 0.0;
    let mut ok = true;
    while rest.ncols() > 0 {
        let restricted = rest.adjoint() * b * &rest;
        let k = kernel_basis_abs(&restricted, tol);
        if k.ncols() == 0 {
            ok = false;
            break;
        }
        let level = &rest * &k;
        let comp = orthogonal_complement(&k);
        let next = &rest * &comp;
        if next.ncols() > 0 {
            // B₁ = Pr_{V_i} B|_{rest'}, B₂ = Pr_{rest'} B|_{rest'}.
            let b1 = level.adjoint() * b * &next;
            let b2 = next.adjoint() * b * &next;
            cross = cross.max((b1 * b2.adjoint()).norm());
        }
        bases.push(level);
        rest = next;
    }
    let levels: Vec<usize> = bases.iter().map(|v| v.ncols()).collect();
    if !ok {
        return SolitonCheck { residual, system_residual: None, cross_residual: None, levels };
    }
    let e: Vec<CMatrix> = (1..bases.len()).map(|i| bases[i - 1].adjoint() * b * &bases[i]).collect();
    let mut system: f64 = 0.0;
    for i in 0..e.len() {
        let m = e[i].ncols();
        let mut lhs = e[i].adjoint() * &e[i];
        if i + 1 < e.len() {
            lhs -= &e[i + 1] * e[i + 1].adjoint();
        }
        system = system.max((lhs - CMatrix::identity(m, m)).norm());
    }
    SolitonCheck { residual, system_residual: Some(system), cross_residual: Some(cross), levels }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolitonType {
    Steady,
    Expanding,
    None,
}

impl fmt::Display for SolitonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolitonType::Steady => "steady",
            SolitonType::Expanding => "expanding",
            SolitonType::None => "none",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolitonReport {
    pub class: MatrixClass,
    pub exists: bool,
    pub soliton_type: SolitonType,
    pub representative: Option<AaMatrix>,
    pub jordan_type: Option<JordanType>,
    pub lambda: f64,
    pub residual: f64,
    pub conditioning_warning: bool,
    pub rel_tol: f64,
}

impl SolitonReport {
    /// Flat `key=value` lines. The representative uses matrix-file row
    /// syntax with rows separated by `;`.
    pub fn to_record(&self) -> String {
        let mut lines = vec![
            format!("class={}", self.class),
            format!("exists={}", self.exists),
            format!("type={}", self.soliton_type),
            format!("lambda={}", fmt_f64(self.lambda)),
            format!("residual={}", fmt_f64(self.residual)),
            format!("conditioning_warning={}", self.conditioning_warning),
            format!("rel_tol={}", fmt_f64(self.rel_tol)),
        ];
        if let Some(jt) = &self.jordan_type {
            lines.push(format!("jordan_type={jt}"));
        }
        if let Some(rep) = &self.representative {
            lines.push(format!("representative=dim {};{}", rep.nrows(), matrix_rows(rep).join(";")));
        }
        if self.soliton_type == SolitonType::Expanding {
            lines.push("scaling=B -> cB gives lambda -> c^2 lambda".into());
        }
        lines.join("\n") + "\n"
    }
}

/// Classifies `A` and, when a soliton exists, returns a representative.
pub fn soliton_decision(a: &AaMatrix, rel_tol: f64) -> Result<SolitonReport> {
    let c = classify_matrix(a, rel_tol)?;
    let n = a.nrows();
    let mut report = SolitonReport {
        class: c.class,
        exists: false,
        soliton_type: SolitonType::None,
        representative: None,
        jordan_type: None,
        lambda: 0.0,
        residual: 0.0,
        conditioning_warning: c.conditioning_warning,
        rel_tol,
    };
    match c.class {
        MatrixClass::Zero => {
            report.exists = true;
            report.soliton_type = SolitonType::Steady;
            report.representative = Some(CMatrix::zeros(n, n));
        }
        MatrixClass::Semisimple => {
            let rep = CMatrix::from_diagonal(&CVector::from_vec(c.eigenvalues.clone()));
            report.exists = true;
            report.soliton_type = SolitonType::Steady;
            report.residual = matrix_field(&rep).norm();
            report.representative = Some(rep);
        }
        MatrixClass::Nilpotent => {
            let jt = jordan_type_of_nilpotent(a, rel_tol)?;
            let rep = nilpotent_soliton_canonical(&jt);
            report.exists = true;
            report.soliton_type = SolitonType::Expanding;
            report.lambda = -1.0;
            report.residual = verify_nilpotent_soliton(&rep).residual;
            report.representative = Some(rep);
            report.jordan_type = Some(jt);
        }
        MatrixClass::Neither => {}
    }
    Ok(report)
}

/// Tolerance for treating a matrix as a solution of `B[B, B*] = −B`.
pub fn soliton_tolerance(b: &AaMatrix) -> f64 {
    1e-9 * b.norm_squared().max(1.0)
}

/// Whether two nilpotent solitons are unitarily similar, decided by their
/// Jordan types. Fails if either input is not a soliton.
pub fn canonical_compare(b1: &AaMatrix, b2: &AaMatrix, rel_tol: f64) -> Result<bool> {
    for b in [b1, b2] {
        let residual = verify_nilpotent_soliton(b).residual;
        if residual >= soliton_tolerance(b) {
            return Err(Error::NotASoliton { residual });
        }
    }
    if b1.nrows() != b2.nrows() {
        return Ok(false);
    }
    Ok(jordan_type_of_nilpotent(b1, rel_tol)? == jordan_type_of_nilpotent(b2, rel_tol)?)
}

#[cfg(test)]
mod tests;
