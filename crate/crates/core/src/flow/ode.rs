//! Explicit Runge–Kutta integration of matrix-valued ODEs with sampling on a
//! fixed time grid `t_k = k · stride`.

use crate::tensor::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    /// Classical RK4. Each record interval is split into equal substeps no
    /// longer than `step`, so runs are bit-reproducible.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with per-entry error weights `abs + rel·|y|`.
    Adaptive { abs_tol: f64, rel_tol: f64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Adaptive { abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

/// Why an integration ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Completed,
    /// The field norm stayed below the fixed-point threshold for the dwell
    /// time, starting at `since`.
    FixedPoint {
        since: f64,
    },
    /// Step size underflow or a non-finite state; the trace is partial.
    Aborted {
        t: f64,
        reason: String,
    },
}

impl Outcome {
    pub fn is_aborted(&self) -> bool {
        matches!(self, Outcome::Aborted { .. })
    }
}

/// Options consumed by [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub integrator: Integrator,
    pub t_end: f64,
    pub stride: f64,
    /// Stop once the recorded field norm stays below `eps` for `dwell`.
    pub stop_at_fixed_point: Option<(f64, f64)>,
}

impl Schedule {
    /// Record times `0, stride, …, floor(t_end/stride)·stride`.
    pub fn record_times(&self) -> Vec<f64> {
        let count = record_count(self.t_end, self.stride);
        (0..count).map(|k| k as f64 * self.stride).collect()
    }
}

/// `floor(t_end / stride) + 1`, robust to `t_end` being a rounded multiple.
pub fn record_count(t_end: f64, stride: f64) -> usize {
    let ratio = t_end / stride;
    let nearest = ratio.round();
    let k = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { ratio.floor() };
    k as usize + 1
}

fn axpy(y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            out += *k * C64::new(h * c, 0.0);
        }
    }
    out
}

fn rk4_step<F: Fn(&CMatrix) -> CMatrix>(f: &F, y: &CMatrix, h: f64) -> CMatrix {
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(0.5, &k1)]));
    let k3 = f(&axpy(y, h, &[(0.5, &k2)]));
    let k4 = f(&axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)])
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step: new state and the scaled RMS error estimate.
fn dopri_step<F: Fn(&CMatrix) -> CMatrix>(f: &F, y: &CMatrix, h: f64, abs_tol: f64, rel_tol: f64) -> (CMatrix, f64) {
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(A21, &k1)]));
    let k3 = f(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y_new);
    let err = axpy(
        &CMatrix::zeros(y.nrows(), y.ncols()),
        h,
        &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
    );
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y.iter()).zip(y_new.iter()) {
        let scale = abs_tol + rel_tol * a.norm().max(b.norm());
        let r = e.norm() / scale;
        acc += r * r;
    }
    let rms = (acc / err.len().max(1) as f64).sqrt();
    (y_new, rms)
}

fn is_finite(y: &CMatrix) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Integrates `ẏ = f(y)` from `y0`, calling `record(t, y)` at each grid time.
/// `record` returns the field norm used for fixed-point stopping. `project`
/// is applied after every accepted step.
pub fn integrate<F, P, R>(y0: CMatrix, f: F, project: P, schedule: &Schedule, mut record: R) -> Outcome
where
    F: Fn(&CMatrix) -> CMatrix,
    P: Fn(&mut CMatrix),
    R: FnMut(f64, &CMatrix) -> f64,
{
    let times = schedule.record_times();
    let mut y = y0;
    project(&mut y);
    let mut t = 0.0;
    let mut below_since: Option<f64> = None;
    let mut check_fixed = |t: f64, field: f64| -> Option<Outcome> {
        let (eps, dwell) = schedule.stop_at_fixed_point?;
        if field < eps {
            let since = *below_since.get_or_insert(t);
            if t - since >= dwell {
                return Some(Outcome::FixedPoint { since });
            }
        } else {
            below_since = None;
        }
        None
    };
    let field = record(0.0, &y);
    if let Some(out) = check_fixed(0.0, field) {
        return out;
    }
    let mut h = match schedule.integrator {
        Integrator::Rk4 { step } => step,
        Integrator::Adaptive { .. } => initial_step(&f, &y, schedule.stride),
    };
    for &target in &times[1..] {
        match schedule.integrator {
            Integrator::Rk4 { step } => {
                let span = target - t;
                let substeps = (span / step).ceil().max(1.0) as usize;
                let dt = span / substeps as f64;
                for _ in 0..substeps {
                    y = rk4_step(&f, &y, dt);
                    project(&mut y);
                }
                if !is_finite(&y) {
                    return Outcome::Aborted { t, reason: "non-finite state".into() };
                }
            }
            Integrator::Adaptive { abs_tol, rel_tol } => {
                while t < target {
                    let remaining = target - t;
                    let last = h >= remaining;
                    let dt = if last { remaining } else { h };
                    if dt <= 1e-14 * t.abs().max(1.0) && !last {
                        return Outcome::Aborted { t, reason: format!("step size underflow (h = {dt:e})") };
                    }
                    let (y_new, err) = dopri_step(&f, &y, dt, abs_tol, rel_tol);
                    if !err.is_finite() {
                        h = dt * 0.1;
                        if h <= 1e-14 * t.abs().max(1.0) {
                            return Outcome::Aborted { t, reason: "non-finite state".into() };
                        }
                        continue;
                    }
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if err <= 1.0 {
                        y = y_new;
                        project(&mut y);
                        t = if last { target } else { t + dt };
                        // A step shortened to hit the grid does not shrink the next proposal.
                        h = if last { h.max(dt * factor) } else { dt * factor };
                    } else {
                        h = dt * factor;
                        if h <= 1e-14 * t.abs().max(1.0) {
                            return Outcome::Aborted { t, reason: format!("step size underflow (h = {h:e})") };
                        }
                    }
                }
            }
        }
        t = target;
        let field = record(t, &y);
        if let Some(out) = check_fixed(t, field) {
            return out;
        }
    }
    Outcome::Completed
}

fn initial_step<F: Fn(&CMatrix) -> CMatrix>(f: &F, y: &CMatrix, stride: f64) -> f64 {
    let fy = f(y).norm();
    let ny = y.norm();
    let guess = if fy > 0.0 && ny > 0.0 { 0.01 * ny / fy } else { stride };
    guess.min(stride).max(1e-8 * stride)
}
