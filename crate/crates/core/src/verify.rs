//! Acceptance checks: analytic oracles, convergence orders and the
//! qualitative behaviour of the standard runs.
//!
//! Expensive runs are computed once per [`Verifier`] and shared between
//! criteria.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{ConstitutiveModel, ModelKind};
use crate::error::Result;
use crate::forcing::{AxialForcing, BcMode, WallMotion, C_INITIAL, C_PLATEAU};
use crate::grid::RadialGrid;
use crate::integrator::{integrate_fixed, IntegratorConfig, LinearOde};
use crate::oracle::{couette, dense_propagator, diffusion_matrix, poiseuille_annulus, to_dense};
use crate::output::{snapshot_csv, CriterionSummary};
use crate::params::NondimParams;
use crate::residual::Drive;
use crate::study::{run, InputGroup, RunOutput, Snapshot, StudyConfig};

/// Snapshot schedule of the standard runs, in cycles.
pub const STUDY_CYCLES: [f64; 3] = [3.5, 12.5, 34.5];
pub const COUETTE_WALL: f64 = 2.0;
pub const POISEUILLE_G: f64 = 1.0;
pub const STEADY_T_END: f64 = 200.0;
pub const STEADY_NODES: usize = 401;
pub const ORACLE_TOL: f64 = 1e-6;
pub const ORACLE_RUNTIME_S: f64 = 30.0;
pub const ORDER_NODES: [usize; 3] = [51, 101, 201];
pub const ORDER_RANGE: (f64, f64) = (3.5, 4.5);
pub const TEMPORAL_NODES: usize = 21;
pub const TEMPORAL_PE: f64 = 1.0;
pub const TEMPORAL_STEPS: [usize; 3] = [10, 20, 40];
pub const W_NULL_TOL: f64 = 1e-12;
pub const C_SLACK: f64 = 1e-9;
/// Round-off allowance for the monotonicity of `c` in `r`.
pub const MONOTONE_SLACK: f64 = 1e-12;
pub const REST_TOL: f64 = 1e-14;
pub const SELF_CONVERGENCE_TOL: f64 = 1e-4;
pub const STUDY_NODES: usize = 201;
pub const FAST_STUDY_NODES: usize = 101;
pub const FINE_NODES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u8, passed: bool, detail: String) -> Self {
        CriterionOutcome {
            id,
            name: criterion_name(id).to_string(),
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            detail,
        }
    }

    fn skipped(id: u8, detail: &str) -> Self {
        CriterionOutcome {
            id,
            name: criterion_name(id).to_string(),
            verdict: Verdict::Skipped,
            detail: detail.to_string(),
        }
    }

    fn failed(id: u8, err: String) -> Self {
        Self::new(id, false, format!("error: {err}"))
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn summary(&self) -> CriterionSummary {
        CriterionSummary {
            id: self.id,
            name: self.name.clone(),
            passed: self.verdict != Verdict::Fail,
            skipped: self.verdict == Verdict::Skipped,
            detail: self.detail.clone(),
        }
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    (id as usize)
        .checked_sub(1)
        .and_then(|k| NAMES.get(k))
        .copied()
        .unwrap_or("unknown criterion")
}

pub const NAMES: [&str; 12] = [
    "steady Couette oracle",
    "annular Poiseuille oracle",
    "spatial order",
    "temporal order",
    "Newtonian axial nullity",
    "concentration properties",
    "viscosity growth",
    "concavity signature",
    "axial suppression with gradient",
    "model proximity",
    "rest preservation and determinism",
    "self-convergence 201 vs 401",
];

type Shared = Arc<OnceLock<std::result::Result<Arc<RunOutput>, String>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RunKey {
    Study { kind: ModelKind, gradient: bool, n: usize },
    Couette(usize),
    Poiseuille(usize),
}

impl RunKey {
    fn config(self) -> StudyConfig {
        match self {
            RunKey::Study { kind, gradient, n } => StudyConfig {
                n_nodes: n,
                ..StudyConfig::standard(kind, gradient, &STUDY_CYCLES)
            },
            RunKey::Couette(n) => steady_config(
                n,
                Drive {
                    wall: WallMotion::Steady(COUETTE_WALL),
                    axial: AxialForcing::Steady(0.0),
                },
            ),
            RunKey::Poiseuille(n) => steady_config(
                n,
                Drive {
                    wall: WallMotion::Steady(0.0),
                    axial: AxialForcing::Steady(POISEUILLE_G),
                },
            ),
        }
    }
}

/// Newtonian run with fixed walls or forcing, integrated to steady state.
fn steady_config(n: usize, drive: Drive) -> StudyConfig {
    let model = ConstitutiveModel::builtin(ModelKind::Newtonian);
    StudyConfig {
        inputs: InputGroup::Nondim(NondimParams::standard(&model, false)),
        model,
        n_nodes: n,
        integrator: IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            newton_tol: 1e-12,
            dt_max: 1.0,
            ..IntegratorConfig::default()
        },
        bc: BcMode::Fixed(C_INITIAL),
        cycles: vec![STEADY_T_END / TAU],
        drive,
    }
}

/// Runs and caches the simulations needed by the criteria.
pub struct Verifier {
    fast: bool,
    cache: Mutex<HashMap<RunKey, Shared>>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn last(out: &RunOutput) -> std::result::Result<&Snapshot, String> {
    out.snapshots.last().ok_or_else(|| "no snapshot".to_string())
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|p| p[0] / p[1]).collect()
}

fn in_order_range(r: &[f64]) -> bool {
    r.iter().all(|x| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(x))
}

impl Verifier {
    pub fn new(fast: bool) -> Self {
        Verifier {
            fast,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn is_fast(&self) -> bool {
        self.fast
    }

    fn standard_nodes(&self) -> usize {
        if self.fast {
            FAST_STUDY_NODES
        } else {
            STUDY_NODES
        }
    }

    fn order_nodes(&self) -> &'static [usize] {
        if self.fast {
            &ORDER_NODES[..2]
        } else {
            &ORDER_NODES
        }
    }

    fn fetch(&self, key: RunKey) -> std::result::Result<Arc<RunOutput>, String> {
        let cell = {
            let mut map = self.cache.lock().unwrap_or_else(|e| e.into_inner());
            map.entry(key).or_default().clone()
        };
        cell.get_or_init(|| {
            let out = run(&key.config()).map_err(|e| e.to_string())?;
            match &out.status {
                crate::study::RunStatus::Complete => Ok(Arc::new(out)),
                crate::study::RunStatus::Aborted { t_last_good, reason } => {
                    Err(format!("run aborted at t = {t_last_good}: {reason}"))
                }
            }
        })
        .clone()
    }

    fn standard(&self, kind: ModelKind, gradient: bool) -> std::result::Result<Arc<RunOutput>, String> {
        self.fetch(RunKey::Study {
            kind,
            gradient,
            n: self.standard_nodes(),
        })
    }

    fn keys(&self, criteria: &[u8]) -> Vec<RunKey> {
        let mut keys = Vec::new();
        let n = self.standard_nodes();
        for &id in criteria {
            match id {
                1 if !self.fast => keys.push(RunKey::Couette(STEADY_NODES)),
                2 if !self.fast => keys.push(RunKey::Poiseuille(STEADY_NODES)),
                3 => {
                    for &m in self.order_nodes() {
                        keys.push(RunKey::Couette(m));
                        keys.push(RunKey::Poiseuille(m));
                    }
                }
                5..=8 | 10 => {
                    for kind in ModelKind::ALL {
                        keys.push(RunKey::Study { kind, gradient: false, n });
                    }
                }
                9 => {
                    for kind in [ModelKind::Model1, ModelKind::Model2a, ModelKind::Model2b] {
                        keys.push(RunKey::Study { kind, gradient: true, n });
                    }
                }
                12 if !self.fast => {
                    for kind in ModelKind::ALL {
                        keys.push(RunKey::Study { kind, gradient: false, n: STUDY_NODES });
                        keys.push(RunKey::Study { kind, gradient: false, n: FINE_NODES });
                    }
                }
                _ => {}
            }
        }
        keys.sort_by_key(|k| format!("{k:?}"));
        keys.dedup();
        keys
    }

    /// Computes the simulations behind `criteria` in parallel.
    pub fn prefetch(&self, criteria: &[u8]) {
        self.keys(criteria).into_par_iter().for_each(|k| {
            let _ = self.fetch(k);
        });
    }

    pub fn check(&self, id: u8) -> CriterionOutcome {
        let result = match id {
            1 => self.steady_oracle(1),
            2 => self.steady_oracle(2),
            3 => self.spatial_order(),
            4 => temporal_order(),
            5 => self.w_nullity(),
            6 => self.concentration(),
            7 => self.viscosity_growth(),
            8 => self.concavity(),
            9 => self.axial_suppression(),
            10 => self.model_proximity(),
            11 => rest_and_determinism(),
            12 => self.self_convergence(),
            _ => Err(format!("no criterion {id}")),
        };
        result.unwrap_or_else(|e| CriterionOutcome::failed(id, e))
    }

    pub fn check_all(&self) -> Vec<CriterionOutcome> {
        let ids: Vec<u8> = (1..=12).collect();
        self.prefetch(&ids);
        ids.into_iter().map(|id| self.check(id)).collect()
    }

    fn steady_error(&self, key: RunKey) -> std::result::Result<(f64, f64), String> {
        let out = self.fetch(key)?;
        let snap = last(&out)?;
        let grid = RadialGrid::new(snap.n_nodes(), out.params.p_g).map_err(|e| e.to_string())?;
        let err = match key {
            RunKey::Couette(_) => {
                let exact = couette(COUETTE_WALL, out.params.p_g).map_err(|e| e.to_string())?;
                max_abs_diff(&snap.v, &exact.sample(&grid))
            }
            RunKey::Poiseuille(_) => {
                let exact = poiseuille_annulus(POISEUILLE_G, out.params.re, out.params.p_g)
                    .map_err(|e| e.to_string())?;
                max_abs_diff(&snap.w, &exact.sample(&grid))
            }
            RunKey::Study { .. } => unreachable!(),
        };
        Ok((err, out.wall_clock_s))
    }

    fn steady_oracle(&self, id: u8) -> std::result::Result<CriterionOutcome, String> {
        if self.fast {
            return Ok(CriterionOutcome::skipped(id, "needs N = 401"));
        }
        let key = if id == 1 {
            RunKey::Couette(STEADY_NODES)
        } else {
            RunKey::Poiseuille(STEADY_NODES)
        };
        let (err, secs) = self.steady_error(key)?;
        let runtime_ok = id != 1 || secs <= ORACLE_RUNTIME_S;
        Ok(CriterionOutcome::new(
            id,
            err <= ORACLE_TOL && runtime_ok,
            format!("N = {STEADY_NODES}, t = {STEADY_T_END}: max error {err:.3e} (limit {ORACLE_TOL:e}), run {secs:.1} s"),
        ))
    }

    fn spatial_order(&self) -> std::result::Result<CriterionOutcome, String> {
        let nodes = self.order_nodes();
        let mut couette_err = Vec::new();
        let mut poiseuille_err = Vec::new();
        for &n in nodes {
            couette_err.push(self.steady_error(RunKey::Couette(n))?.0);
            poiseuille_err.push(self.steady_error(RunKey::Poiseuille(n))?.0);
        }
        let rc = ratios(&couette_err);
        let rp = ratios(&poiseuille_err);
        Ok(CriterionOutcome::new(
            3,
            in_order_range(&rc) && in_order_range(&rp),
            format!(
                "N = {nodes:?}: Couette errors {} ratios {rc:.3?}; Poiseuille errors {} ratios {rp:.3?}",
                sci(&couette_err),
                sci(&poiseuille_err)
            ),
        ))
    }

    fn w_nullity(&self) -> std::result::Result<CriterionOutcome, String> {
        let out = self.standard(ModelKind::Newtonian, false)?;
        let worst = out.snapshots.iter().map(|s| max_abs(&s.w)).fold(0.0, f64::max);
        Ok(CriterionOutcome::new(
            5,
            worst <= W_NULL_TOL && out.snapshots.len() == STUDY_CYCLES.len(),
            format!("max |w| over snapshots {worst:e} (limit {W_NULL_TOL:e})"),
        ))
    }

    fn concentration(&self) -> std::result::Result<CriterionOutcome, String> {
        let runs: Vec<Arc<RunOutput>> = ModelKind::ALL
            .iter()
            .map(|&k| self.standard(k, false))
            .collect::<std::result::Result<_, _>>()?;
        let lo = runs.iter().map(|r| r.monitor.min).fold(f64::INFINITY, f64::min);
        let hi = runs.iter().map(|r| r.monitor.max).fold(f64::NEG_INFINITY, f64::max);
        let outer = runs.iter().map(|r| r.monitor.outer_deviation).fold(0.0, f64::max);
        let mono = runs.iter().map(|r| r.monitor.monotonicity_violation).fold(0.0, f64::max);
        let mut spread = 0.0f64;
        for k in 0..STUDY_CYCLES.len() {
            let base = &runs[0].snapshots[k].c;
            for r in &runs[1..] {
                spread = spread.max(max_abs_diff(base, &r.snapshots[k].c));
            }
        }
        let cfg = IntegratorConfig::default();
        let spread_tol = cfg.abs_tol + cfg.rel_tol * C_PLATEAU;
        let passed = lo >= C_INITIAL - C_SLACK
            && hi <= C_PLATEAU + C_SLACK
            && outer == 0.0
            && mono <= MONOTONE_SLACK
            && spread <= spread_tol;
        Ok(CriterionOutcome::new(
            6,
            passed,
            format!(
                "range [{lo:.15}, {hi:.15}], outer deviation {outer:e}, monotonicity defect {mono:.1e}, \
                 spread across models {spread:.2e} (limit {spread_tol:.1e})"
            ),
        ))
    }

    fn center_index(snap: &Snapshot) -> usize {
        (snap.n_nodes() - 1) / 2
    }

    fn viscosity_growth(&self) -> std::result::Result<CriterionOutcome, String> {
        let mut passed = true;
        let mut parts = Vec::new();
        for kind in [ModelKind::Model1, ModelKind::Model2a, ModelKind::Model2b] {
            let out = self.standard(kind, false)?;
            let mu: Vec<f64> = out.snapshots.iter().map(|s| s.mu[Self::center_index(s)]).collect();
            passed &= mu.len() == 3 && mu.windows(2).all(|p| p[1] > p[0]);
            parts.push(format!("{kind} {mu:.4?}"));
        }
        Ok(CriterionOutcome::new(7, passed, format!("mid-gap mu: {}", parts.join(", "))))
    }

    fn concavity(&self) -> std::result::Result<CriterionOutcome, String> {
        let mut passed = true;
        let mut parts = Vec::new();
        for kind in ModelKind::ALL {
            let out = self.standard(kind, false)?;
            for cycles in [12.5, 34.5] {
                let s = out.snapshot_at(cycles).ok_or("missing snapshot")?;
                let (lo, hi) = second_difference_range(s, 0.2, 0.8);
                let ok = if kind == ModelKind::Newtonian { lo >= 0.0 } else { hi <= 0.0 };
                passed &= ok;
                if !ok {
                    parts.push(format!("{kind} at {cycles}: [{lo:.2e}, {hi:.2e}]"));
                }
            }
        }
        let detail = if parts.is_empty() {
            "concave for models 1/2a/2b, convex for Newtonian at cycles 12.5 and 34.5".to_string()
        } else {
            format!("wrong sign: {}", parts.join(", "))
        };
        Ok(CriterionOutcome::new(8, passed, detail))
    }

    fn axial_suppression(&self) -> std::result::Result<CriterionOutcome, String> {
        let mut passed = true;
        let mut parts = Vec::new();
        for kind in [ModelKind::Model1, ModelKind::Model2a, ModelKind::Model2b] {
            let out = self.standard(kind, true)?;
            let amps: Vec<f64> = STUDY_CYCLES
                .iter()
                .map(|&c| cycle_amplitude(&out, c))
                .collect();
            passed &= amps.windows(2).all(|p| p[1] < p[0]);
            parts.push(format!("{kind} {amps:.4?}"));
        }
        Ok(CriterionOutcome::new(
            9,
            passed,
            format!("mid-gap |w| amplitude per cycle: {}", parts.join(", ")),
        ))
    }

    fn model_proximity(&self) -> std::result::Result<CriterionOutcome, String> {
        let v = |k| -> std::result::Result<Vec<f64>, String> {
            let out = self.standard(k, false)?;
            Ok(out.snapshot_at(34.5).ok_or("missing snapshot")?.v.clone())
        };
        let a = v(ModelKind::Model2a)?;
        let d_2b = max_abs_diff(&a, &v(ModelKind::Model2b)?);
        let d_1 = max_abs_diff(&a, &v(ModelKind::Model1)?);
        Ok(CriterionOutcome::new(
            10,
            d_2b < d_1,
            format!("|2a - 2b| = {d_2b:.4e}, |2a - 1| = {d_1:.4e}"),
        ))
    }

    fn self_convergence(&self) -> std::result::Result<CriterionOutcome, String> {
        if self.fast {
            return Ok(CriterionOutcome::skipped(12, "needs N = 401"));
        }
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for kind in ModelKind::ALL {
            let coarse = self.fetch(RunKey::Study { kind, gradient: false, n: STUDY_NODES })?;
            let fine = self.fetch(RunKey::Study { kind, gradient: false, n: FINE_NODES })?;
            let mut d = 0.0f64;
            for (a, b) in coarse.snapshots.iter().zip(&fine.snapshots) {
                let sub: Vec<f64> = b.v.iter().step_by(2).copied().collect();
                d = d.max(max_abs_diff(&a.v, &sub));
            }
            worst = worst.max(d);
            parts.push(format!("{kind} {d:.2e}"));
        }
        Ok(CriterionOutcome::new(
            12,
            worst <= SELF_CONVERGENCE_TOL,
            format!("max |v_201 - v_401|: {} (limit {SELF_CONVERGENCE_TOL:e})", parts.join(", ")),
        ))
    }
}

/// Extremes of `v_{j+1} - 2 v_j + v_{j-1}` over nodes with `r` in `[lo, hi]`.
pub fn second_difference_range(s: &Snapshot, lo: f64, hi: f64) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for j in 1..s.n_nodes() - 1 {
        if s.r[j] >= lo - 1e-12 && s.r[j] <= hi + 1e-12 {
            let d2 = s.v[j + 1] - 2.0 * s.v[j] + s.v[j - 1];
            min = min.min(d2);
            max = max.max(d2);
        }
    }
    (min, max)
}

/// Largest mid-gap `|w|` over the cycle ending at `cycles`.
pub fn cycle_amplitude(out: &RunOutput, cycles: f64) -> f64 {
    let end = TAU * cycles;
    let start = end - TAU;
    out.centerline
        .iter()
        .filter(|s| s.t_hat >= start - 1e-9 && s.t_hat <= end + 1e-9)
        .fold(0.0, |m, s| m.max(s.w.abs()))
}

/// Global error of fixed-step integration on the linear diffusion subsystem.
pub fn temporal_errors() -> Result<Vec<f64>> {
    let grid = RadialGrid::new(TEMPORAL_NODES, 5.0)?;
    let band = diffusion_matrix(&grid, TEMPORAL_PE);
    let mut c0 = grid.sample(|r| (0.5 * std::f64::consts::PI * r).cos());
    c0[TEMPORAL_NODES - 1] = 0.0;
    let exact = dense_propagator(&to_dense(&band), 1.0)? * DVector::from_column_slice(&c0);
    let cfg = IntegratorConfig::default();
    TEMPORAL_STEPS
        .iter()
        .map(|&steps| {
            let mut p = LinearOde { matrix: band.clone() };
            let c = integrate_fixed(&mut p, 0.0, &c0, 1.0, steps, &cfg)?;
            Ok(c.iter().zip(exact.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
        })
        .collect()
}

fn temporal_order() -> std::result::Result<CriterionOutcome, String> {
    let errs = temporal_errors().map_err(|e| e.to_string())?;
    let r = ratios(&errs);
    Ok(CriterionOutcome::new(
        4,
        in_order_range(&r),
        format!("steps {TEMPORAL_STEPS:?}: errors {}, ratios {r:.3?}", sci(&errs)),
    ))
}

/// Quiescent configuration: walls at rest, no forcing, uniform `c`.
pub fn rest_config(kind: ModelKind) -> StudyConfig {
    StudyConfig {
        n_nodes: 51,
        bc: BcMode::Fixed(C_INITIAL),
        drive: Drive {
            wall: WallMotion::Steady(0.0),
            axial: AxialForcing::Steady(0.0),
        },
        ..StudyConfig::standard(kind, false, &[0.5, 1.0])
    }
}

fn rest_and_determinism() -> std::result::Result<CriterionOutcome, String> {
    let mut drift = 0.0f64;
    for kind in ModelKind::ALL {
        let out = run(&rest_config(kind)).map_err(|e| e.to_string())?;
        for s in &out.snapshots {
            drift = drift
                .max(max_abs(&s.v))
                .max(max_abs(&s.w))
                .max(s.c.iter().fold(0.0, |m, c| m.max((c - C_INITIAL).abs())));
        }
    }
    let cfg = StudyConfig {
        n_nodes: 51,
        ..StudyConfig::standard(ModelKind::Model2b, true, &[0.5, 1.0])
    };
    let a = run(&cfg).map_err(|e| e.to_string())?;
    let b = run(&cfg).map_err(|e| e.to_string())?;
    let identical = a.snapshots.len() == b.snapshots.len()
        && a.snapshots
            .iter()
            .zip(&b.snapshots)
            .all(|(x, y)| snapshot_csv(x) == snapshot_csv(y));
    Ok(CriterionOutcome::new(
        11,
        drift <= REST_TOL && identical,
        format!("rest drift {drift:e} (limit {REST_TOL:e}); repeated run CSVs identical: {identical}"),
    ))
}
