//! Built-in verification suites. Each suite checks a handful of properties and
//! prints one line per property.

use hcflow_core::almost_abelian::{integrate_matrix_flow, trace_power_drift};
use hcflow_core::bracket::{centre_split, Bracket};
use hcflow_core::curvature::{moment_identity_residual, p_endo, q_endo, theta_form};
use hcflow_core::flow::{
    detect_fixed_point, growth_envelope_check, integrate_bracket_flow, integrate_normalized_flow, integrate_split_from,
    integrate_split_normalized_flow, verify_gauge_equivalence, FlowConfig, SplitTrace,
};
use hcflow_core::random::{
    gaussian_matrix, heisenberg_extension, random_nilpotent_sample, random_nilpotent_sample_in, unit_matrix,
};
use hcflow_core::CMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{Suite, VerifyArgs};
use crate::input::{load_bracket, load_matrix, CliError};

pub struct Property {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn property(name: &'static str, pass: bool, detail: String) -> Property {
    Property { name, pass, detail }
}

pub fn run(args: &VerifyArgs) -> Result<Vec<Property>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    match args.suite {
        Suite::MomentMap => moment_map(args, &mut rng),
        Suite::GaugeEquivalence => gauge_equivalence(args, &mut rng),
        Suite::PhiMonotonicity => phi_monotonicity(args, &mut rng),
        Suite::Isospectrality => isospectrality(args, &mut rng),
        Suite::Envelope => envelope(args, &mut rng),
    }
}

fn has_bracket_input(args: &VerifyArgs) -> bool {
    args.bracket.is_some() || args.matrix.is_some() || args.example.is_some()
}

/// The user's bracket if one was given, else `sample` drawn `cases` times.
fn brackets(
    args: &VerifyArgs,
    rng: &mut ChaCha8Rng,
    default_cases: usize,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> Bracket,
) -> Result<Vec<Bracket>, CliError> {
    if has_bracket_input(args) {
        return Ok(vec![load_bracket(args.bracket.as_ref(), args.matrix.as_ref(), args.example.as_deref())?]);
    }
    Ok((0..args.cases.unwrap_or(default_cases)).map(|_| sample(rng)).collect())
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn moment_map(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, CliError> {
    let list = brackets(args, rng, 100, |r| random_nilpotent_sample(r, 5))?;
    let per_bracket = if list.len() == 1 { 100 } else { 1 };
    let mut identity: f64 = 0.0;
    let mut psd_defect: f64 = 0.0;
    let mut theta: f64 = 0.0;
    for mu in &list {
        let n = mu.dim();
        for _ in 0..per_bracket {
            let e = gaussian_matrix(rng, n, n);
            identity = identity.max(moment_identity_residual(mu, &e));
        }
        let scale = mu.norm_sq().max(f64::MIN_POSITIVE);
        for m in [p_endo(mu), q_endo(mu)] {
            let herm = (&m - m.adjoint()).norm();
            let h: CMatrix = (&m + m.adjoint()) / hcflow_core::C64::new(2.0, 0.0);
            let low = h.map(|z| z.re).symmetric_eigenvalues().min();
            psd_defect = psd_defect.max(herm / scale).max(-low / scale);
        }
        theta = theta.max((theta_form(mu) - p_endo(mu)).norm() / scale);
    }
    let cases = list.len() * per_bracket;
    Ok(vec![
        property(
            "moment identity",
            identity < 1e-10,
            format!("max |tr((P−Q)E) − ⟨π(E)μ, μ⟩| {identity:.3e} over {cases} pairs (bound 1e-10)"),
        ),
        property(
            "P and Q Hermitian PSD",
            psd_defect < 1e-12,
            format!("max relative defect {psd_defect:.3e} over {} brackets (bound 1e-12)", list.len()),
        ),
        property("theta equals P", theta < 1e-12, format!("max relative ‖Θ − P‖ {theta:.3e} (bound 1e-12)")),
    ])
}

fn gauge_equivalence(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, CliError> {
    let list = if has_bracket_input(args) {
        brackets(args, rng, 0, |r| random_nilpotent_sample(r, 5))?
    } else {
        let mut list = vec![Bracket::heisenberg3(), Bracket::filiform4()];
        list.extend((0..args.cases.unwrap_or(3)).map(|_| random_nilpotent_sample(rng, 5)));
        list
    };
    let cfg = FlowConfig { stop_at_fixed_point: false, ..args.integration.config(5.0, 0.05) };
    let mut disc: f64 = 0.0;
    let mut unit: f64 = 0.0;
    let mut aborted = 0;
    for mu in &list {
        let report = verify_gauge_equivalence(mu, &cfg)?;
        disc = disc.max(report.max_discrepancy);
        unit = unit.max(report.max_unitarity_defect);
        aborted += usize::from(report.outcome.is_aborted());
    }
    Ok(vec![
        property("runs complete", aborted == 0, format!("{aborted} of {} runs aborted", list.len())),
        property("gauged matches transported", disc < 1e-6, format!("max ‖ν − k·μ‖ {disc:.3e} (bound 1e-6)")),
        property("gauge path unitary", unit < 1e-8, format!("max ‖k*k − id‖ {unit:.3e} (bound 1e-8)")),
    ])
}

/// Runs the split system from a sampled extension of a Heisenberg bracket,
/// starting its complement at the normalized-flow fixed point.
fn split_from_extension(mu: &Bracket, cfg: &FlowConfig) -> Result<Option<SplitTrace>, CliError> {
    let split = centre_split(mu, cfg.rel_tol);
    let pre = FlowConfig { t_end: 100.0, record_stride: 0.5, ..*cfg };
    let trace = integrate_normalized_flow(&split.mu1, &pre)?;
    let Some((_, fixed)) = detect_fixed_point(&trace, pre.eps_fix, pre.dwell) else { return Ok(None) };
    let scale = 1.0 / split.mu1.norm();
    Ok(Some(integrate_split_from(&split.mu0.scale(scale), &fixed, cfg)?))
}

fn phi_monotonicity(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, CliError> {
    let cfg = args.integration.config(200.0, 0.5);
    let runs: Vec<Option<SplitTrace>> = if has_bracket_input(args) {
        let mu = load_bracket(args.bracket.as_ref(), args.matrix.as_ref(), args.example.as_deref())?;
        vec![Some(integrate_split_normalized_flow(&mu, &cfg)?)]
    } else {
        let mut out = Vec::new();
        for _ in 0..args.cases.unwrap_or(3) {
            out.push(split_from_extension(&heisenberg_extension(rng), &cfg)?);
        }
        out
    };
    let started = runs.iter().flatten().count();
    let mut rise = f64::NEG_INFINITY;
    let mut stationary = 0;
    let mut bad = 0;
    let mut aborted = 0;
    for run in runs.iter().flatten() {
        aborted += usize::from(run.combined.outcome.is_aborted());
        let phis: Vec<f64> = run.combined.samples.iter().filter_map(|s| s.diag.phi).collect();
        rise = phis.windows(2).map(|w| w[1] - w[0]).fold(rise, f64::max);
        for (s, &bound) in run.eta0.samples.iter().zip(&run.dissipation) {
            // dφ/dt is bounded above by −dissipation, so a vanishing bound
            // marks a stationary point of φ.
            if bound <= 1e-16 {
                stationary += 1;
                bad += usize::from(s.diag.field_norm >= 1e-8);
            }
        }
    }
    Ok(vec![
        property(
            "runs complete",
            started == runs.len() && aborted == 0,
            format!("{started}/{} runs reached the split system, {aborted} aborted", runs.len()),
        ),
        property("phi non-increasing", rise <= 1e-10, format!("largest step increase {rise:.3e} (slack 1e-10)")),
        property(
            "stationary points are fixed",
            bad == 0,
            format!("{stationary} stationary samples, {bad} with ‖η̇₀‖ ≥ 1e-8"),
        ),
    ])
}

fn isospectrality(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, CliError> {
    if args.bracket.is_some() {
        return Err(CliError::input("the isospectrality suite takes --matrix or --example"));
    }
    let list = if args.matrix.is_some() || args.example.is_some() {
        vec![load_matrix(args.matrix.as_ref(), args.example.as_deref())?]
    } else {
        (0..args.cases.unwrap_or(20))
            .map(|_| {
                let n = rng.random_range(2..=5);
                unit_matrix(rng, n)
            })
            .collect()
    };
    let cfg = FlowConfig { stop_at_fixed_point: false, ..args.integration.config(20.0, 0.5) };
    let mut drift: f64 = 0.0;
    let mut rise: f64 = 0.0;
    let mut aborted = 0;
    for a in &list {
        let trace = integrate_matrix_flow(a, &cfg)?;
        aborted += usize::from(trace.outcome.is_aborted());
        drift = drift.max(trace_power_drift(&trace));
        rise = max(trace.samples.windows(2).map(|w| w[1].norm_sq - w[0].norm_sq)).max(rise);
    }
    Ok(vec![
        property("runs complete", aborted == 0, format!("{aborted} of {} runs aborted", list.len())),
        property("trace powers conserved", drift < 1e-8, format!("max drift {drift:.3e} (bound 1e-8)")),
        property("norm non-increasing", rise <= 1e-12, format!("largest step increase {rise:.3e} (bound 1e-12)")),
    ])
}

fn envelope(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, CliError> {
    let list = if has_bracket_input(args) {
        brackets(args, rng, 0, |r| random_nilpotent_sample(r, 5))?
    } else {
        let mut list = vec![Bracket::heisenberg3(), Bracket::filiform4()];
        list.extend((0..args.cases.unwrap_or(3)).map(|_| random_nilpotent_sample_in(rng, 4, 5)));
        list
    };
    let t_end = args.integration.t_end.unwrap_or(1e8);
    let cfg = FlowConfig { stop_at_fixed_point: false, ..args.integration.config(t_end, t_end / 200.0) };
    let mut applicable = 0;
    let mut unbounded = 0;
    let mut lower_fail = 0;
    let mut aborted = 0;
    let mut inc: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for mu in &list {
        let trace = integrate_bracket_flow(mu, &cfg)?;
        let r = growth_envelope_check(&trace, cfg.rel_tol);
        aborted += usize::from(trace.outcome.is_aborted());
        applicable += usize::from(r.applicable);
        unbounded += usize::from(!r.bounded);
        lower_fail += usize::from(!r.lower_ok);
        inc = inc.max(r.trailing_increase);
        margin = margin.min(r.lower_margin);
    }
    Ok(vec![
        property(
            "nilpotent inputs",
            applicable == list.len() && aborted == 0,
            format!("{applicable}/{} nilpotent, {aborted} aborted", list.len()),
        ),
        property(
            "t‖μ‖² bounded",
            unbounded == 0,
            format!("{unbounded} failures, trailing increase {inc:.3e} (bound 1e-10)"),
        ),
        property("lower envelope", lower_fail == 0, format!("{lower_fail} failures, minimum margin {margin:.3e}")),
    ])
}
