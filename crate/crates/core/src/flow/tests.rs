use super::*;
use crate::bracket::make_almost_abelian;
use crate::tensor::{from_real, ONE};

fn cfg(t_end: f64, stride: f64) -> FlowConfig {
    FlowConfig { stop_at_fixed_point: false, ..FlowConfig::default() }.with_t_end(t_end, stride)
}

#[test]
fn zero_bracket_is_constant() {
    let trace = integrate_bracket_flow(&Bracket::zero(3), &cfg(2.0, 0.5)).unwrap();
    assert_eq!(trace.samples.len(), 5);
    assert!(trace.samples.iter().all(|s| s.bracket.is_zero() && s.diag.field_norm == 0.0));
}

#[test]
fn heisenberg_closed_form() {
    let trace = integrate_bracket_flow(&Bracket::heisenberg3(), &cfg(2.0, 0.25)).unwrap();
    for s in &trace.samples {
        let exact = 1.0 / (1.0 + 2.0 * s.t);
        assert!((s.diag.norm_sq - exact).abs() < 1e-9 * exact, "t={}", s.t);
    }
    assert!((trace.last().diag.norm_sq - 0.2).abs() < 1e-6);
    assert!(trace.max_jacobi_residual() < 1e-8);
    assert_eq!(trace.outcome, Outcome::Completed);
}

#[test]
fn normal_almost_abelian_is_fixed() {
    let a = from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let mu = make_almost_abelian(&a).unwrap();
    let trace = integrate_bracket_flow(&mu, &cfg(3.0, 1.0)).unwrap();
    for s in &trace.samples {
        assert!((s.bracket.matrix() - mu.matrix()).norm() < 1e-14);
    }
}

#[test]
fn norm_derivative_matches_field() {
    let mu = Bracket::filiform4().scale_complex(C64::new(0.7, 0.4));
    let h = 1e-3;
    let trace = integrate_bracket_flow(&mu, &cfg(1.0, h)).unwrap();
    for w in trace.samples.windows(3).step_by(97) {
        let fd = (w[2].diag.norm_sq - w[0].diag.norm_sq) / (2.0 * h);
        let m = w[1].bracket.matrix();
        let exact = 2.0 * inner(&bracket_field(m), m).re;
        assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}

#[test]
fn gauged_heisenberg_matches_ungauged() {
    let h = Bracket::heisenberg3();
    let a = integrate_bracket_flow(&h, &cfg(2.0, 0.5)).unwrap();
    let b = integrate_gauged_flow(&h, &cfg(2.0, 0.5)).unwrap();
    // Step sequences differ because the framed run also carries the gauge.
    for (x, y) in a.samples.iter().zip(&b.samples) {
        let d = (x.bracket.matrix() - y.bracket.matrix()).norm();
        assert!(d < 1e-9, "t = {}: {d:e}", x.t);
    }
}

#[test]
fn gauged_filiform_keeps_centre() {
    let trace = integrate_gauged_flow(&Bracket::filiform4(), &cfg(5.0, 0.5)).unwrap();
    for s in &trace.samples {
        assert_eq!(s.diag.centre_dim, 1);
        assert!(s.diag.centre_angle.unwrap() < 1e-8);
        assert!(s.diag.split_residual.unwrap() < 1e-12, "{:?}", s.diag.split_residual);
    }
}

#[test]
fn gauged_rejects_non_nilpotent() {
    let solv = make_almost_abelian(&from_real(2, 2, &[1.0, 0.0, 0.0, 2.0])).unwrap();
    assert!(matches!(integrate_gauged_flow(&solv, &cfg(1.0, 0.5)), Err(Error::NotNilpotent)));
}

#[test]
fn gauge_equivalence_examples() {
    let r = verify_gauge_equivalence(&Bracket::heisenberg3(), &cfg(2.0, 0.5)).unwrap();
    assert!(r.max_discrepancy < 1e-14);
    for k in &r.path.k {
        assert!((k - CMatrix::identity(3, 3)).norm() < 1e-14);
    }
    let r = verify_gauge_equivalence(&Bracket::filiform4(), &cfg(5.0, 0.5)).unwrap();
    assert!(r.max_discrepancy < 1e-6, "{}", r.max_discrepancy);
    assert!(r.max_unitarity_defect < 1e-8, "{}", r.max_unitarity_defect);
    let r = verify_gauge_equivalence(&Bracket::zero(2), &cfg(1.0, 0.5)).unwrap();
    assert_eq!(r.max_discrepancy, 0.0);
}

#[test]
fn normalized_heisenberg_is_fixed() {
    let trace = integrate_normalized_flow(&Bracket::heisenberg3().scale(3.0), &FlowConfig::default()).unwrap();
    assert!(matches!(trace.outcome, Outcome::FixedPoint { since } if since == 0.0));
    let (t, fixed) = detect_fixed_point(&trace, 1e-8, 1.0).unwrap();
    assert_eq!(t, 0.0);
    assert!((fixed.norm() - 1.0).abs() < 1e-15);
    assert!(normalizing_alpha(fixed.matrix()) + 1.0 < 1e-15);
}

#[test]
fn normalized_filiform_converges() {
    let c = FlowConfig { t_end: 200.0, record_stride: 0.5, ..FlowConfig::default() };
    let trace = integrate_normalized_flow(&Bracket::filiform4(), &c).unwrap();
    for s in &trace.samples {
        assert!((s.diag.norm_sq.sqrt() - 1.0).abs() < 1e-10);
    }
    let (_, limit) = detect_fixed_point(&trace, 1e-8, 1.0).expect("fixed point");
    assert!(algebraic_soliton_fit(&limit).unwrap().residual < 1e-6);
}

#[test]
fn unnormalized_heisenberg_is_not_a_fixed_point() {
    let trace = integrate_bracket_flow(&Bracket::heisenberg3(), &cfg(20.0, 0.5)).unwrap();
    assert!(detect_fixed_point(&trace, 1e-8, 1.0).is_none());
}

#[test]
fn split_flow_errors() {
    assert!(matches!(
        integrate_split_normalized_flow(&Bracket::heisenberg3(), &cfg(1.0, 0.5)),
        Err(Error::Degenerate(_))
    ));
    assert!(matches!(integrate_split_normalized_flow(&Bracket::zero(3), &cfg(1.0, 0.5)), Err(Error::ZeroBracket)));
}

#[test]
fn split_eta1_follows_normalized_flow() {
    let f = Bracket::filiform4().scale_complex(C64::new(0.3, 0.9));
    let c = cfg(5.0, 0.5);
    let split = integrate_split_normalized_flow(&f, &c).unwrap();
    let mu1 = centre_split(&f, DEFAULT_REL_TOL).mu1;
    let reference = integrate_normalized_flow(&mu1, &c).unwrap();
    for (a, b) in split.eta1.samples.iter().zip(&reference.samples) {
        assert!((a.bracket.matrix() - b.bracket.matrix()).norm() < 1e-8);
        assert!((a.bracket.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn phi_examples() {
    let eta1 = Bracket::heisenberg3();
    let zero = Bracket::zero(3);
    // α = −1, F = id∧P − μ*μ + id, evaluated by hand: Λ² basis (12, 13, 23),
    // id∧diag(0,0,1) = diag(0,1,1), μ*μ = E_{(12),(12)}.
    let expected = 0.5 * ((0.0f64 - 1.0 + 1.0).powi(2) + 2.0 * (1.0f64 + 1.0).powi(2));
    assert!((phi(&zero, &eta1) - expected).abs() < 1e-14);

    let split = centre_split(&Bracket::filiform4(), DEFAULT_REL_TOL);
    let s = 1.0 / split.mu1.norm();
    let (e0, e1) = (split.mu0.scale(s), split.mu1.scale(s));
    // η₀ = (13 ↦ 4), η₁ = (12 ↦ 3): η₀η₁* = 0 and F is diagonal on
    // (12, 13, 14, 23, 24, 34) with entries computed termwise.
    let diag_f = [-1.0 + 1.0, 1.0 - 1.0 + 1.0, 0.0 + 1.0, 1.0 + 1.0, 0.0 + 1.0, 1.0 + 1.0];
    let expected = 0.5 * diag_f.iter().map(|x| x * x).sum::<f64>();
    assert!((phi(&e0, &e1) - expected).abs() < 1e-14, "{} vs {expected}", phi(&e0, &e1));
    assert!(phi(&e0, &e1) > 0.0);
    let _ = ONE;
}

#[test]
fn growth_envelope_examples() {
    let trace = integrate_bracket_flow(&Bracket::heisenberg3(), &cfg(100.0, 1.0)).unwrap();
    let r = growth_envelope_check(&trace, DEFAULT_REL_TOL);
    assert!(r.applicable && r.lower_ok);
    assert!(r.sup_t_norm_sq <= 0.5);
    assert!((r.c_hat - 2.0).abs() < 1e-9);
    let trace = integrate_bracket_flow(&Bracket::zero(3), &cfg(10.0, 1.0)).unwrap();
    let r = growth_envelope_check(&trace, DEFAULT_REL_TOL);
    assert!(r.bounded && r.lower_ok);
    let trace = integrate_bracket_flow(&Bracket::filiform4(), &cfg(100.0, 1.0)).unwrap();
    let r = growth_envelope_check(&trace, DEFAULT_REL_TOL);
    assert!(r.lower_ok, "{r:?}");
    assert!(r.sup_t_norm_sq.is_finite() && r.sup_t_norm_sq < 1.5);
}

#[test]
fn config_validation() {
    assert!(FlowConfig::default().validate().is_ok());
    let bad = FlowConfig { t_end: -1.0, ..FlowConfig::default() };
    assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    let bad = FlowConfig { integrator: Integrator::Rk4 { step: 0.0 }, ..FlowConfig::default() };
    assert!(bad.validate().is_err());
}
