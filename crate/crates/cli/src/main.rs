mod args;
mod input;
mod output;
mod verify;

use std::io::Write as _;
use std::process::ExitCode;

use clap::Parser;
use hcflow_core::almost_abelian::{
    integrate_matrix_flow, jordan_type_of_nilpotent, nilpotent_soliton_canonical, soliton_decision, trace_power_drift,
    verify_nilpotent_soliton, JordanType,
};
use hcflow_core::flow::{
    detect_fixed_point, growth_envelope_check, integrate_bracket_flow, integrate_gauged_flow,
    integrate_normalized_flow, integrate_split_normalized_flow, FlowKind, FlowTrace, Outcome,
};
use hcflow_core::io::{matrix_rows, write_bracket, write_matrix};
use hcflow_core::library::{bracket_example, matrix_example, BRACKET_EXAMPLES, MATRIX_EXAMPLES};

use args::{AaArgs, Cli, Command, FlowArgs, VerifyArgs};
use input::{load_bracket, load_matrix, prepare_out_dir, write_file, CliError, EXIT_ABORTED};
use output::{bracket_csv, matrix_csv, Record};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Flow(a) => cmd_flow(a),
        Command::Aa(a) => cmd_aa(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Examples { name } => cmd_examples(name.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn kind_name(kind: FlowKind) -> &'static str {
    match kind {
        FlowKind::Bracket => "bracket",
        FlowKind::Gauged => "gauged",
        FlowKind::Normalized => "normalized",
        FlowKind::SplitNormalized => "split-normalized",
    }
}

fn finish(outcome: &Outcome) -> ExitCode {
    if outcome.is_aborted() {
        ExitCode::from(EXIT_ABORTED)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_flow(args: &FlowArgs) -> Result<ExitCode, CliError> {
    let mu = load_bracket(args.bracket.as_ref(), args.matrix.as_ref(), args.example.as_deref())?;
    let cfg = args.integration.config(10.0, 0.1);
    cfg.validate()?;
    prepare_out_dir(&args.out)?;

    let mut phi_rise = None;
    let trace: FlowTrace = if args.split || (args.normalized && args.gauged) {
        let run = integrate_split_normalized_flow(&mu, &cfg)?;
        let phis: Vec<f64> = run.combined.samples.iter().filter_map(|s| s.diag.phi).collect();
        phi_rise = Some(phis.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max));
        run.combined
    } else if args.normalized {
        integrate_normalized_flow(&mu, &cfg)?
    } else if args.gauged {
        integrate_gauged_flow(&mu, &cfg)?
    } else {
        integrate_bracket_flow(&mu, &cfg)?
    };

    write_file(&args.out, "trace.csv", &bracket_csv(&trace))?;
    let last = trace.last();
    let mut rec = Record::default();
    rec.put("flow", kind_name(trace.kind));
    rec.put("n", mu.dim());
    rec.outcome("", &trace.outcome);
    rec.real("t_final", last.t);
    rec.put("samples", trace.samples.len());
    rec.real("norm_sq", last.diag.norm_sq);
    rec.real("field_norm", last.diag.field_norm);
    rec.real("lambda_hat", last.diag.lambda_hat);
    rec.real("lambda_imag", last.diag.lambda_imag);
    rec.real("soliton_residual", last.diag.soliton_residual);
    rec.put("centre_dim", last.diag.centre_dim);
    rec.real("max_jacobi_residual", trace.max_jacobi_residual());
    let fixed = match trace.outcome {
        Outcome::FixedPoint { since } => Some(since),
        _ => detect_fixed_point(&trace, cfg.eps_fix, cfg.dwell).map(|(t, _)| t),
    };
    rec.put("fixed_point", fixed.is_some());
    if let Some(t) = fixed {
        rec.real("fixed_point_t", t);
    }
    let env = growth_envelope_check(&trace, cfg.rel_tol);
    rec.put("envelope_applicable", env.applicable);
    if env.applicable {
        rec.put("envelope_bounded", env.bounded);
        rec.put("envelope_lower_ok", env.lower_ok);
        rec.real("sup_t_norm_sq", env.sup_t_norm_sq);
        rec.real("c_hat", env.c_hat);
    }
    if let Some(rise) = phi_rise {
        rec.real("phi_max_increase", rise);
    }
    for w in &trace.warnings {
        rec.put("warning", w);
    }
    let summary = rec.render();
    write_file(&args.out, "summary.txt", &summary)?;
    emit(&summary);
    Ok(finish(&trace.outcome))
}

fn cmd_aa(args: &AaArgs) -> Result<ExitCode, CliError> {
    let cfg = args.integration.config(10.0, 0.1);
    cfg.validate()?;
    let given_type = args.jordan_type.as_deref().map(str::parse::<JordanType>).transpose()?;
    let a = match &given_type {
        Some(jt) => nilpotent_soliton_canonical(jt),
        None => load_matrix(args.matrix.as_ref(), args.example.as_deref())?,
    };
    prepare_out_dir(&args.out)?;

    let mut rec = Record::default();
    rec.put("n", a.nrows());
    if args.classify {
        rec.extend_raw(&soliton_decision(&a, cfg.rel_tol)?.to_record());
    }
    if args.construct {
        let jt = match given_type {
            Some(jt) => jt,
            None => jordan_type_of_nilpotent(&a, cfg.rel_tol)
                .map_err(|e| CliError::input(format!("--construct needs a nilpotent input or --jordan-type ({e})")))?,
        };
        let canon = nilpotent_soliton_canonical(&jt);
        write_file(&args.out, "canonical.txt", &write_matrix(&canon))?;
        rec.put("construct_jordan_type", &jt);
        rec.real("construct_residual", verify_nilpotent_soliton(&canon).residual);
        rec.put("canonical", format!("dim {};{}", canon.nrows(), matrix_rows(&canon).join(";")));
    }
    let mut outcome = Outcome::Completed;
    if args.flow {
        let trace = integrate_matrix_flow(&a, &cfg)?;
        write_file(&args.out, "trace.csv", &matrix_csv(&trace))?;
        let last = trace.last();
        rec.outcome("flow_", &trace.outcome);
        rec.real("flow_t_final", last.t);
        rec.put("flow_samples", trace.samples.len());
        rec.real("flow_norm_sq", last.norm_sq);
        rec.real("flow_field_norm", last.field_norm);
        rec.real("flow_normality_defect", last.normality_defect);
        rec.real("flow_trace_power_drift", trace_power_drift(&trace));
        outcome = trace.outcome;
    }
    let report = rec.render();
    write_file(&args.out, "report.txt", &report)?;
    emit(&report);
    Ok(finish(&outcome))
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let props = verify::run(args)?;
    let failed = props.iter().filter(|p| !p.pass).count();
    let mut text: String =
        props.iter().map(|p| format!("{} {}: {}\n", if p.pass { "PASS" } else { "FAIL" }, p.name, p.detail)).collect();
    text.push_str(&format!("{} of {} properties passed\n", props.len() - failed, props.len()));
    emit(&text);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_examples(name: Option<&str>) -> Result<ExitCode, CliError> {
    match name {
        None => {
            let list = |names: &[&str]| names.iter().map(|n| format!("  {n}\n")).collect::<String>();
            emit(&format!(
                "brackets (flow --example, verify --example):\n{}matrices (aa --example, verify isospectrality --example):\n{}",
                list(BRACKET_EXAMPLES),
                list(MATRIX_EXAMPLES)
            ));
        }
        Some(name) => match bracket_example(name) {
            Ok(mu) => emit(&write_bracket(&mu)),
            Err(_) => emit(&write_matrix(&matrix_example(name)?)),
        },
    }
    Ok(ExitCode::SUCCESS)
}
