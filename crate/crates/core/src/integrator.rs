//! Adaptive TR-BDF2 with damped Newton iterations and banded LU.
//!
//! Each step is a trapezoidal stage to `t + g dt` (`g = 2 - sqrt 2`)
//! followed by a BDF2 stage to `t + dt`. Both stages share the iteration
//! matrix `I - (g/2) dt J`. The local error estimate is the third divided
//! difference of the stage derivatives, filtered through that matrix so
//! stiff components are not over-penalised.
//!
//! Rows listed by [`SemiDiscrete::constraints`] are held algebraically at
//! their prescribed values in every stage and are excluded from the error
//! norm.

use serde::{Deserialize, Serialize};

use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::residual::fd_band_jacobian;

/// `2 - sqrt(2)`: L-stable choice with equal diagonal coefficients.
pub const GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;
const D: f64 = GAMMA / 2.0;
const ERROR_CONSTANT: f64 = (3.0 * GAMMA * GAMMA - 4.0 * GAMMA + 2.0) / (12.0 * (2.0 - GAMMA));
const MAX_CONSECUTIVE_REJECTIONS: usize = 10;
/// Newton increments below this fraction of the error weights count as converged.
const INCREMENT_TOL: f64 = 1e-3;
/// Bound on the projected remaining Newton error, in error-weight units.
const NEWTON_KAPPA: f64 = 1e-2;
/// Contraction rate above which the iteration matrix is rebuilt.
const STALL_RATE: f64 = 0.25;

/// A method-of-lines system `du/dt = f(t, u)` with optional algebraic rows.
pub trait SemiDiscrete {
    fn dim(&self) -> usize;

    /// Lower and upper half-bandwidths of `df/du`.
    fn bandwidth(&self) -> (usize, usize);

    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()>;

    /// Rows held at prescribed values at time `t`, as `(index, value)`.
    fn constraints(&self, _t: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
    }

    fn jacobian(&self, t: f64, u: &[f64], f: &[f64]) -> Result<BandMatrix> {
        fd_band_jacobian(self, t, u, f)
    }

    /// Called once before every step attempt with the last accepted state.
    fn begin_step(&mut self, _t: f64, _u: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Times at which the data has a kink; steps land on them exactly.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub dt_init: f64,
    pub dt_max: f64,
    pub safety: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            newton_tol: 1e-10,
            max_newton: 12,
            dt_init: 1e-3,
            dt_max: 0.05,
            safety: 0.9,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("newton_tol", self.newton_tol),
            ("dt_init", self.dt_init),
            ("dt_max", self.dt_max),
            ("safety", self.safety),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {value}")));
            }
        }
        if self.max_newton == 0 {
            return Err(Error::param("max_newton", "must be at least 1"));
        }
        if self.safety > 1.0 {
            return Err(Error::param("safety", "must not exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t_reached: f64,
    pub dt_used: f64,
    pub newton_iters: usize,
    /// Weighted RMS norm of the local error estimate.
    pub error_estimate: f64,
    pub accepted: bool,
}

/// Aggregate counters for one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub newton_iters: usize,
    pub jacobians: usize,
    pub min_dt: f64,
    pub max_dt: f64,
}

impl StepStats {
    fn record(&mut self, report: &StepReport) {
        if report.accepted {
            self.accepted += 1;
            if self.min_dt == 0.0 || report.dt_used < self.min_dt {
                self.min_dt = report.dt_used;
            }
            self.max_dt = self.max_dt.max(report.dt_used);
        } else {
            self.rejected += 1;
        }
        self.newton_iters += report.newton_iters;
    }
}

struct StageOutcome {
    lu: BandLu,
    iterations: usize,
    jacobians: usize,
}

fn weights(cfg: &IntegratorConfig, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| cfg.abs_tol + cfg.rel_tol * x.abs().max(y.abs()))
        .collect()
}

fn weighted_rms(x: &[f64], w: &[f64], free: &[bool]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..x.len() {
        if free[i] {
            let r = x[i] / w[i];
            sum += r * r;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

fn free_mask(n: usize, cons: &[(usize, f64)]) -> Vec<bool> {
    let mut free = vec![true; n];
    for &(i, _) in cons {
        free[i] = false;
    }
    free
}

/// Stage residual scaled by `max(1, |z|)`; returns the max norm.
fn stage_residual(z: &[f64], f: &[f64], b: &[f64], coef: f64, free: &[bool], r: &mut [f64]) -> f64 {
    let mut norm = 0.0f64;
    for i in 0..z.len() {
        r[i] = if free[i] { z[i] - coef * f[i] - b[i] } else { 0.0 };
        norm = norm.max(r[i].abs() / z[i].abs().max(1.0));
    }
    norm
}

fn iteration_matrix<P: SemiDiscrete + ?Sized>(
    problem: &P,
    t: f64,
    z: &[f64],
    f: &[f64],
    coef: f64,
    free: &[bool],
) -> Result<BandLu> {
    let jac = problem.jacobian(t, z, f)?;
    let mut m = jac.shifted_identity(coef);
    for (i, &is_free) in free.iter().enumerate() {
        if !is_free {
            m.set_identity_row(i);
        }
    }
    m.factor()
}

/// Solves `z - coef f(t, z) = b` on the free rows by damped Newton.
#[allow(clippy::too_many_arguments)]
fn solve_stage<P: SemiDiscrete + ?Sized>(
    problem: &P,
    t: f64,
    b: &[f64],
    z: &mut [f64],
    coef: f64,
    cons: &[(usize, f64)],
    cfg: &IntegratorConfig,
    w: &[f64],
) -> Result<StageOutcome> {
    let n = z.len();
    let free = free_mask(n, cons);
    for &(i, value) in cons {
        z[i] = value;
    }
    let mut f = vec![0.0; n];
    let mut r = vec![0.0; n];
    problem.rhs(t, z, &mut f)?;
    let mut norm = stage_residual(z, &f, b, coef, &free, &mut r);
    let mut lu = iteration_matrix(problem, t, z, &f, coef, &free)?;
    let mut jacobians = 1;
    if norm <= cfg.newton_tol {
        return Ok(StageOutcome {
            lu,
            iterations: 0,
            jacobians,
        });
    }

    let mut growth = 0usize;
    let mut previous_increment = f64::NAN;
    let mut trial = vec![0.0; n];
    let mut f_trial = vec![0.0; n];
    let mut r_trial = vec![0.0; n];
    for iteration in 1..=cfg.max_newton {
        let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
        lu.solve_in_place(&mut delta);
        for (i, d) in delta.iter_mut().enumerate() {
            if !free[i] {
                *d = 0.0;
            }
        }
        let increment = weighted_rms(&delta, w, &free);
        if !increment.is_finite() {
            break;
        }

        // damped update: halve until the residual drops
        let mut lambda = 1.0;
        let mut accepted_norm = f64::INFINITY;
        for _ in 0..5 {
            for i in 0..n {
                trial[i] = z[i] + lambda * delta[i];
            }
            if problem.rhs(t, &trial, &mut f_trial).is_ok() {
                let trial_norm = stage_residual(&trial, &f_trial, b, coef, &free, &mut r_trial);
                if trial_norm.is_finite() {
                    accepted_norm = trial_norm;
                    if trial_norm < norm {
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted_norm.is_finite() {
            break;
        }
        z.copy_from_slice(&trial);
        std::mem::swap(&mut f, &mut f_trial);
        std::mem::swap(&mut r, &mut r_trial);
        let previous = norm;
        norm = accepted_norm;

        // contraction rate from successive increments
        let rate = increment / previous_increment;
        previous_increment = increment;
        let projected = if rate.is_finite() && rate < 1.0 {
            rate / (1.0 - rate) * increment
        } else {
            f64::INFINITY
        };
        let full_step = lambda == 1.0;
        if norm <= cfg.newton_tol || (full_step && (increment <= INCREMENT_TOL || projected <= NEWTON_KAPPA)) {
            return Ok(StageOutcome {
                lu,
                iterations: iteration,
                jacobians,
            });
        }
        if norm > previous {
            growth += 1;
            if growth >= 2 {
                break;
            }
        } else {
            growth = 0;
        }
        if !full_step || rate > STALL_RATE || norm > 0.5 * previous {
            lu = iteration_matrix(problem, t, z, &f, coef, &free)?;
            jacobians += 1;
            previous_increment = f64::NAN;
        }
    }
    Err(Error::NewtonDivergence {
        iterations: cfg.max_newton,
        residual: norm,
    })
}

/// Result of one TR-BDF2 step attempt.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: Vec<f64>,
    pub report: StepReport,
    pub jacobians: usize,
}

/// One TR-BDF2 step of size `dt` from `(t, u)`; `f_n = f(t, u)`.
///
/// The returned report is marked accepted when the weighted error estimate
/// is at most one. Newton failure is returned as an error.
pub fn step<P: SemiDiscrete + ?Sized>(
    problem: &P,
    t: f64,
    u: &[f64],
    f_n: &[f64],
    dt: f64,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", "step size must be positive"));
    }
    let n = u.len();
    let coef = D * dt;
    let mut cons = Vec::new();

    // trapezoidal stage
    let t1 = t + GAMMA * dt;
    problem.constraints(t1, &mut cons);
    let b1: Vec<f64> = u.iter().zip(f_n).map(|(x, f)| x + coef * f).collect();
    let mut z1: Vec<f64> = u.iter().zip(f_n).map(|(x, f)| x + GAMMA * dt * f).collect();
    let w = weights(cfg, u, u);
    let stage1 = solve_stage(problem, t1, &b1, &mut z1, coef, &cons, cfg, &w)?;
    let free1 = free_mask(n, &cons);

    // BDF2 stage
    let t2 = t + dt;
    problem.constraints(t2, &mut cons);
    let a1 = 1.0 / (GAMMA * (2.0 - GAMMA));
    let a0 = (1.0 - GAMMA) * (1.0 - GAMMA) / (GAMMA * (2.0 - GAMMA));
    let b2: Vec<f64> = z1.iter().zip(u).map(|(zg, x)| a1 * zg - a0 * x).collect();
    let extrap = (1.0 - GAMMA) / GAMMA;
    let mut z2: Vec<f64> = z1.iter().zip(u).map(|(zg, x)| zg + extrap * (zg - x)).collect();
    let stage2 = solve_stage(problem, t2, &b2, &mut z2, coef, &cons, cfg, &w)?;
    let free2 = free_mask(n, &cons);

    // stage derivatives recovered from the stage equations
    let mut est = vec![0.0; n];
    for i in 0..n {
        if free1[i] && free2[i] {
            let f_g = (z1[i] - b1[i]) / coef;
            let f_1 = (z2[i] - b2[i]) / coef;
            est[i] = 2.0
                * ERROR_CONSTANT
                * dt
                * (f_n[i] / GAMMA - f_g / (GAMMA * (1.0 - GAMMA)) + f_1 / (1.0 - GAMMA));
        }
    }
    stage2.lu.solve_in_place(&mut est);
    let w_err = weights(cfg, u, &z2);
    let free_both: Vec<bool> = free1.iter().zip(&free2).map(|(a, b)| *a && *b).collect();
    let error_estimate = weighted_rms(&est, &w_err, &free_both);

    Ok(StepResult {
        state: z2,
        report: StepReport {
            t_reached: t2,
            dt_used: dt,
            newton_iters: stage1.iterations + stage2.iterations,
            error_estimate,
            accepted: error_estimate <= 1.0,
        },
        jacobians: stage1.jacobians + stage2.jacobians,
    })
}

/// Integrates with `n_steps` equal steps, ignoring the error estimate.
pub fn integrate_fixed<P: SemiDiscrete + ?Sized>(
    problem: &mut P,
    t0: f64,
    u0: &[f64],
    t_end: f64,
    n_steps: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let dt = (t_end - t0) / n_steps as f64;
    let mut u = u0.to_vec();
    let mut f = vec![0.0; u.len()];
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        problem.begin_step(t, &u)?;
        problem.rhs(t, &u, &mut f)?;
        u = step(problem, t, &u, &f, dt, cfg)?.state;
    }
    Ok(u)
}

/// Why an adaptive integration stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub t_last_good: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// States at the requested output times that were reached.
    pub outputs: Vec<(f64, Vec<f64>)>,
    pub stats: StepStats,
    pub aborted: Option<Abort>,
}

/// Adaptive integration from `t0` to `t_end`, landing exactly on every
/// output time and breakpoint.
///
/// `observer` sees every accepted step.
pub fn integrate<P, F>(
    problem: &mut P,
    t0: f64,
    u0: &[f64],
    t_end: f64,
    output_times: &[f64],
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<Trajectory>
where
    P: SemiDiscrete + ?Sized,
    F: FnMut(f64, &[f64], &StepReport),
{
    cfg.validate()?;
    if output_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("snapshot_times", "must be sorted"));
    }
    if output_times
        .iter()
        .any(|&s| s < t0 || s > t_end || !s.is_finite())
    {
        return Err(Error::param("snapshot_times", "must lie within [t0, t_end]"));
    }

    let mut stops: Vec<f64> = output_times
        .iter()
        .copied()
        .chain(problem.breakpoints())
        .chain(std::iter::once(t_end))
        .filter(|&s| s > t0 && s <= t_end)
        .collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();

    let mut outputs = Vec::new();
    let mut pending = output_times.iter().copied().peekable();
    while let Some(&s) = pending.peek() {
        if s == t0 {
            outputs.push((t0, u0.to_vec()));
            pending.next();
        } else {
            break;
        }
    }

    let mut stats = StepStats::default();
    let mut t = t0;
    let mut u = u0.to_vec();
    let mut f = vec![0.0; u.len()];
    let mut dt = cfg.dt_init.min(cfg.dt_max);
    let mut rejections = 0usize;
    let mut stop_idx = 0usize;

    while stop_idx < stops.len() {
        let stop = stops[stop_idx];
        problem.begin_step(t, &u)?;
        problem.rhs(t, &u, &mut f)?;

        let proposed = dt.min(cfg.dt_max);
        let remaining = stop - t;
        let (dt_try, landing) = if remaining <= 1.1 * proposed {
            (remaining, true)
        } else if remaining < 2.0 * proposed {
            (0.5 * remaining, false)
        } else {
            (proposed, false)
        };

        let attempt = step(problem, t, &u, &f, dt_try, cfg);
        let (accepted, factor) = match attempt {
            Ok(result) => {
                stats.jacobians += result.jacobians;
                let err = result.report.error_estimate;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (cfg.safety * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
                };
                let mut report = result.report;
                stats.record(&report);
                if report.accepted {
                    t = if landing { stop } else { t + dt_try };
                    report.t_reached = t;
                    u = result.state;
                    observer(t, &u, &report);
                    (true, factor)
                } else {
                    (false, factor.min(0.9))
                }
            }
            Err(Error::NewtonDivergence { .. }) | Err(Error::SingularMatrix(_)) | Err(Error::NonFinite) => {
                stats.newton_failures += 1;
                stats.rejected += 1;
                (false, 0.5)
            }
            Err(Error::ViscositySingularity { .. }) | Err(Error::ConcentrationDomain(_)) => {
                stats.newton_failures += 1;
                stats.rejected += 1;
                (false, 0.5)
            }
            Err(e) => return Err(e),
        };

        if accepted {
            rejections = 0;
            dt = if landing {
                proposed * factor.min(1.0)
            } else {
                dt_try * factor
            };
            if landing {
                while pending.peek().is_some_and(|&s| s == stop) {
                    outputs.push((t, u.clone()));
                    pending.next();
                }
                stop_idx += 1;
            }
        } else {
            rejections += 1;
            dt = dt_try * factor;
            if rejections >= MAX_CONSECUTIVE_REJECTIONS || dt < 1e-14 * t.abs().max(1.0) {
                return Ok(Trajectory {
                    outputs,
                    stats,
                    aborted: Some(Abort {
                        t_last_good: t,
                        reason: format!(
                            "{rejections} consecutive step rejections (last dt {dt_try:e})"
                        ),
                    }),
                });
            }
        }
    }

    Ok(Trajectory {
        outputs,
        stats,
        aborted: None,
    })
}

/// Constant-coefficient linear system `du/dt = A u` with a band matrix.
#[derive(Debug, Clone)]
pub struct LinearOde {
    pub matrix: BandMatrix,
}

impl SemiDiscrete for LinearOde {
    fn dim(&self) -> usize {
        self.matrix.n()
    }

    fn bandwidth(&self) -> (usize, usize) {
        (self.matrix.lower(), self.matrix.upper())
    }

    fn rhs(&self, _t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        let y = self.matrix.mul_vec(u);
        out.copy_from_slice(&y);
        Ok(())
    }

    fn jacobian(&self, _t: f64, _u: &[f64], _f: &[f64]) -> Result<BandMatrix> {
        Ok(self.matrix.clone())
    }
}
