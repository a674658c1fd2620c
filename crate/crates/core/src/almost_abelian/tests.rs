use super::*;
use crate::tensor::{from_real, DEFAULT_REL_TOL};

fn cfg(t_end: f64, stride: f64) -> FlowConfig {
    FlowConfig { stop_at_fixed_point: false, ..FlowConfig::default() }.with_t_end(t_end, stride)
}

fn e12() -> CMatrix {
    from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])
}

fn jordan2() -> CMatrix {
    from_real(2, 2, &[1.0, 1.0, 0.0, 1.0])
}

#[test]
fn normal_matrix_is_constant() {
    let a = from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let trace = integrate_matrix_flow(&a, &cfg(5.0, 1.0)).unwrap();
    assert!(trace.samples.iter().all(|s| s.a == a));
    assert_eq!(trace_power_drift(&trace), 0.0);
}

#[test]
fn nilpotent_closed_form() {
    let trace = integrate_matrix_flow(&e12(), &cfg(4.5, 0.5)).unwrap();
    for s in &trace.samples {
        assert!((s.norm_sq - 1.0 / (1.0 + 2.0 * s.t)).abs() < 1e-9);
    }
    assert!((trace.last().norm_sq - 0.1).abs() < 1e-6);
    assert!(trace_power_drift(&trace) < 1e-12);
}

#[test]
fn jordan_block_conserves_traces() {
    let trace = integrate_matrix_flow(&jordan2(), &cfg(50.0, 1.0)).unwrap();
    assert!(trace_power_drift(&trace) < 1e-8);
    for w in trace.samples.windows(2) {
        assert!(w[1].norm_sq <= w[0].norm_sq + 1e-12);
    }
}

#[test]
fn normality_examples() {
    let d = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(0.0, 1.0), C64::new(3.0, 0.0)]));
    assert_eq!(normality_defect(&d), 0.0);
    assert!((normality_defect(&e12()) - 2f64.sqrt()).abs() < 1e-15);
    assert!((normality_defect(&jordan2()) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn classification_examples() {
    let class = |a: &CMatrix| classify_matrix(a, DEFAULT_REL_TOL).unwrap().class;
    assert_eq!(class(&from_real(2, 2, &[1.0, 0.0, 0.0, 2.0])), MatrixClass::Semisimple);
    assert_eq!(class(&e12()), MatrixClass::Nilpotent);
    assert_eq!(class(&jordan2()), MatrixClass::Neither);
    assert_eq!(class(&CMatrix::zeros(3, 3)), MatrixClass::Zero);
    assert_eq!(class(&CMatrix::identity(3, 3)), MatrixClass::Semisimple);
    // Diagonalizable but not normal.
    assert_eq!(class(&from_real(2, 2, &[1.0, 5.0, 0.0, 2.0])), MatrixClass::Semisimple);
    // Jordan block plus a separate eigenvalue.
    let mixed = from_real(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
    assert_eq!(class(&mixed), MatrixClass::Neither);
}

#[test]
fn perturbed_jordan_block_warns() {
    let a = from_real(2, 2, &[1.0, 1.0, 1e-17, 1.0]);
    let c = classify_matrix(&a, DEFAULT_REL_TOL).unwrap();
    assert_eq!(c.class, MatrixClass::Neither);
}

#[test]
fn jordan_type_examples() {
    let jt = |a: &CMatrix| jordan_type_of_nilpotent(a, DEFAULT_REL_TOL).unwrap();
    assert_eq!(jt(&CMatrix::zeros(2, 2)).dims(), &[2]);
    assert_eq!(jt(&e12()).dims(), &[1, 1]);
    let b = from_real(3, 3, &[0.0, 2f64.sqrt(), 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(jt(&b).dims(), &[1, 1, 1]);
    assert!(matches!(jordan_type_of_nilpotent(&jordan2(), DEFAULT_REL_TOL), Err(Error::NotNilpotent)));
}

#[test]
fn jordan_type_validation_and_parsing() {
    assert!(JordanType::new(vec![1, 2]).is_err());
    assert!(JordanType::new(vec![2, 0]).is_err());
    assert!(JordanType::new(vec![]).is_err());
    let jt: JordanType = "2,1,1".parse().unwrap();
    assert_eq!(jt.n(), 4);
    assert_eq!(jt.block_counts(), vec![1, 0, 1]);
    assert_eq!(jt.to_string(), "2,1,1");
    assert_eq!(JordanType::from_block_sizes(&[3, 1]).unwrap(), jt);
    assert!("1,x".parse::<JordanType>().is_err());
    assert!("18446744073709551615,1".parse::<JordanType>().is_err());
    let counts: Vec<usize> = (1..=8).map(|n| JordanType::all(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22]);
}

#[test]
fn canonical_examples() {
    let b = nilpotent_soliton_canonical(&JordanType::new(vec![1, 1]).unwrap());
    assert_eq!(b, e12());
    let b = nilpotent_soliton_canonical(&JordanType::new(vec![1, 1, 1]).unwrap());
    let expected = from_real(3, 3, &[0.0, 2f64.sqrt(), 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(b, expected);
    assert!(verify_nilpotent_soliton(&b).residual < 1e-15);
    let b = nilpotent_soliton_canonical(&JordanType::new(vec![2, 1]).unwrap());
    let expected = from_real(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(b, expected);
    let b = nilpotent_soliton_canonical(&JordanType::new(vec![3]).unwrap());
    assert_eq!(b, CMatrix::zeros(3, 3));
}

#[test]
fn canonical_sigma_recursion() {
    let jt = JordanType::from_block_sizes(&[4, 2, 1]).unwrap();
    assert_eq!(jt.dims(), &[3, 2, 1, 1]);
    assert_eq!(canonical_sigma_squares(&jt), vec![vec![3, 1], vec![2], vec![1]]);
}

#[test]
fn verify_examples() {
    let check = verify_nilpotent_soliton(&e12());
    assert_eq!(check.residual, 0.0);
    assert!(check.system_residual.unwrap() < 1e-15);
    assert_eq!(check.levels, vec![1, 1]);
    assert!(verify_nilpotent_soliton(&(e12() * C64::new(2.0, 0.0))).residual > 1.0);
    let b = nilpotent_soliton_canonical(&JordanType::from_block_sizes(&[3, 2, 2, 1]).unwrap());
    let check = verify_nilpotent_soliton(&b);
    assert!(check.residual < 1e-14);
    assert!(check.system_residual.unwrap() < 1e-12 && check.cross_residual.unwrap() < 1e-12);
    assert_eq!(check.levels, vec![4, 3, 1]);
}

#[test]
fn decision_examples() {
    let r = soliton_decision(&jordan2(), DEFAULT_REL_TOL).unwrap();
    assert!(!r.exists && r.soliton_type == SolitonType::None);

    let r = soliton_decision(&e12(), DEFAULT_REL_TOL).unwrap();
    assert_eq!(r.soliton_type, SolitonType::Expanding);
    assert_eq!(r.representative.as_ref().unwrap(), &e12());
    assert_eq!(r.lambda, -1.0);
    assert!(r.residual < 1e-12);

    let rot = from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let r = soliton_decision(&rot, DEFAULT_REL_TOL).unwrap();
    assert_eq!(r.soliton_type, SolitonType::Steady);
    let rep = r.representative.unwrap();
    let mut eig: Vec<f64> = (0..2).map(|i| rep[(i, i)].im).collect();
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] + 1.0).abs() < 1e-12 && (eig[1] - 1.0).abs() < 1e-12);
    assert!(rep[(0, 1)] == C64::new(0.0, 0.0) && r.residual < 1e-12);
}

#[test]
fn report_record_format() {
    let r = soliton_decision(&e12(), DEFAULT_REL_TOL).unwrap();
    let text = r.to_record();
    assert!(text.contains("class=nilpotent\n"));
    assert!(text.contains("exists=true\n"));
    assert!(text.contains("type=expanding\n"));
    assert!(text.contains("jordan_type=1,1\n"));
    let rep = text.lines().find_map(|l| l.strip_prefix("representative=")).unwrap();
    let parsed = crate::io::parse_matrix(&rep.replace(';', "\n")).unwrap();
    assert_eq!(parsed, e12());
}

#[test]
fn compare_examples() {
    let b = nilpotent_soliton_canonical(&JordanType::new(vec![1, 1, 1]).unwrap());
    let c = nilpotent_soliton_canonical(&JordanType::new(vec![2, 1]).unwrap());
    // A permutation is unitary.
    let p = from_real(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let conj = p.adjoint() * &b * &p;
    assert!(canonical_compare(&b, &conj, DEFAULT_REL_TOL).unwrap());
    assert!(!canonical_compare(&b, &c, DEFAULT_REL_TOL).unwrap());
    let doubled = &b * C64::new(2.0, 0.0);
    assert!(matches!(canonical_compare(&b, &doubled, DEFAULT_REL_TOL), Err(Error::NotASoliton { .. })));
}
