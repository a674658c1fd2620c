use std::fmt::{Display, Write as _};

use hcflow_core::almost_abelian::MatrixTrace;
use hcflow_core::flow::{FlowTrace, Outcome};
use hcflow_core::io::fmt_f64;

pub const BRACKET_HEADER: &str = "t,norm_sq,field_norm,lambda_hat,soliton_residual,phi,centre_dim,jacobi_residual";
pub const MATRIX_HEADER: &str = "t,norm_sq,field_norm,normality_defect,trace_power_drift";

pub fn bracket_csv(trace: &FlowTrace) -> String {
    let mut out = String::from(BRACKET_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let d = &s.diag;
        let phi = d.phi.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(d.norm_sq),
            fmt_f64(d.field_norm),
            fmt_f64(d.lambda_hat),
            fmt_f64(d.soliton_residual),
            phi,
            d.centre_dim,
            fmt_f64(d.jacobi_residual)
        );
    }
    out
}

pub fn matrix_csv(trace: &MatrixTrace) -> String {
    let mut out = String::from(MATRIX_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.norm_sq),
            fmt_f64(s.field_norm),
            fmt_f64(s.normality_defect),
            fmt_f64(s.trace_power_drift)
        );
    }
    out
}

/// Ordered `key=value` lines.
#[derive(Default)]
pub struct Record(Vec<(String, String)>);

impl Record {
    pub fn put(&mut self, key: &str, value: impl Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn real(&mut self, key: &str, value: f64) {
        self.put(key, fmt_f64(value));
    }

    /// Appends `outcome`, and `abort_t`/`abort_reason` when the run aborted.
    pub fn outcome(&mut self, prefix: &str, outcome: &Outcome) {
        let name = match outcome {
            Outcome::Completed => "completed",
            Outcome::FixedPoint { .. } => "fixed_point",
            Outcome::Aborted { .. } => "aborted",
        };
        self.put(&format!("{prefix}outcome"), name);
        if let Outcome::Aborted { t, reason } = outcome {
            self.real(&format!("{prefix}abort_t"), *t);
            self.put(&format!("{prefix}abort_reason"), reason);
        }
    }

    /// Appends lines already in `key=value` form.
    pub fn extend_raw(&mut self, text: &str) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.put(k, v);
            }
        }
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
