//! Study driver: builds the problem from a configuration, integrates it and
//! collects snapshots at the requested cycle counts.

use std::f64::consts::TAU;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constitutive::{ConstitutiveModel, ModelKind};
use crate::error::{Error, Result};
use crate::forcing::{BcMode, C_PLATEAU, RAMP_END};
use crate::grid::RadialGrid;
use crate::integrator::{integrate, Abort, IntegratorConfig, StepStats};
use crate::params::{NondimParams, PhysicalInputs};
use crate::pressure::radial_profile;
use crate::residual::{ic, iv, iw, AnnulusProblem, Drive, StateVector};

/// Default node count, fixed by the 201/401 self-convergence check.
pub const DEFAULT_NODES: usize = 201;

/// Where the dimensionless group comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputGroup {
    Physical(PhysicalInputs),
    Nondim(NondimParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub model: ConstitutiveModel,
    pub inputs: InputGroup,
    pub n_nodes: usize,
    pub integrator: IntegratorConfig,
    pub bc: BcMode,
    /// Snapshot times in wall cycles (`t = 2 pi cycles`).
    pub cycles: Vec<f64>,
    pub drive: Drive,
}

impl StudyConfig {
    /// Standard settings for `kind`, with or without the axial gradient.
    pub fn standard(kind: ModelKind, gradient: bool, cycles: &[f64]) -> Self {
        let model = ConstitutiveModel::builtin(kind);
        StudyConfig {
            inputs: InputGroup::Nondim(NondimParams::standard(&model, gradient)),
            model,
            n_nodes: DEFAULT_NODES,
            integrator: IntegratorConfig::default(),
            bc: BcMode::Ramp,
            cycles: cycles.to_vec(),
            drive: Drive::default(),
        }
    }

    pub fn params(&self) -> Result<NondimParams> {
        match &self.inputs {
            InputGroup::Physical(p) => p.derive_nondim(&self.model),
            InputGroup::Nondim(p) => {
                p.validate()?;
                Ok(*p)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.integrator.validate()?;
        self.bc.validate()?;
        if let Some(v) = self.model.validate().violations.first() {
            return Err(Error::param("model", v.clone()));
        }
        RadialGrid::new(self.n_nodes, 1.0)?;
        if self.cycles.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("cycles", "must be finite and non-negative"));
        }
        if self.cycles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("cycles", "must be strictly increasing"));
        }
        Ok(())
    }

    /// Final time: the last requested snapshot.
    pub fn t_end(&self) -> f64 {
        self.cycles.last().map_or(0.0, |c| TAU * c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t_hat: f64,
    pub cycle_count: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub mu: Vec<f64>,
    pub h: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(problem: &AnnulusProblem, state: &StateVector, cycle_count: f64) -> Result<Self> {
        let g = problem.grid();
        Ok(Snapshot {
            t_hat: state.t,
            cycle_count,
            r: g.nodes(),
            mu: problem.viscosity_profile(&state.v, &state.w, &state.c)?,
            h: radial_profile(&state.v, g)?,
            v: state.v.clone(),
            w: state.w.clone(),
            c: state.c.clone(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.r.len()
    }
}

/// Mid-gap values after every accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterlineSample {
    pub t_hat: f64,
    pub v: f64,
    pub w: f64,
    pub c: f64,
    pub mu: f64,
}

/// Concentration bounds seen over all accepted steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationMonitor {
    pub min: f64,
    pub max: f64,
    /// Largest `|c(1) - 0.3|` after the ramp; only tracked in ramp mode.
    pub outer_deviation: f64,
    /// Largest `c_j - c_{j+1}` after the ramp, floored at zero.
    pub monotonicity_violation: f64,
}

impl ConcentrationMonitor {
    fn new() -> Self {
        ConcentrationMonitor {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            outer_deviation: 0.0,
            monotonicity_violation: 0.0,
        }
    }

    fn observe(&mut self, t: f64, c: &[f64], ramp: bool) {
        for &x in c {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        if ramp && t > RAMP_END {
            let last = c[c.len() - 1];
            self.outer_deviation = self.outer_deviation.max((last - C_PLATEAU).abs());
            for pair in c.windows(2) {
                self.monotonicity_violation = self.monotonicity_violation.max(pair[0] - pair[1]);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Aborted { t_last_good: f64, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    pub params: NondimParams,
    pub snapshots: Vec<Snapshot>,
    pub centerline: Vec<CenterlineSample>,
    pub stats: StepStats,
    pub monitor: ConcentrationMonitor,
    pub status: RunStatus,
    pub wall_clock_s: f64,
}

impl RunOutput {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    /// Snapshot closest to `cycles`.
    pub fn snapshot_at(&self, cycles: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.cycle_count - cycles).abs() < 1e-9)
    }
}

/// Builds the problem described by `config`.
pub fn build_problem(config: &StudyConfig) -> Result<AnnulusProblem> {
    config.validate()?;
    let params = config.params()?;
    let grid = RadialGrid::new(config.n_nodes, params.p_g)?;
    AnnulusProblem::new(grid, config.model, params, config.drive, config.bc)
}

/// Runs the study. An integrator abort is reported in the status with the
/// snapshots reached so far.
pub fn run(config: &StudyConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let mut problem = build_problem(config)?;
    let params = *problem.params();
    let n = problem.grid().n_nodes();
    let mid = problem.grid().nearest(0.5);
    let ramp = matches!(config.bc, BcMode::Ramp);

    let initial = problem.initial_state();
    let u0 = initial.pack();
    let times: Vec<f64> = config.cycles.iter().map(|c| TAU * c).collect();
    let t_end = config.t_end();

    let mut monitor = ConcentrationMonitor::new();
    monitor.observe(0.0, &initial.c, ramp);
    let mut centerline = Vec::new();
    let sample_problem = problem.clone();
    let mut sample_error = None;
    let mut record = |t: f64, u: &[f64]| {
        let v = [u[iv(mid - 1)], u[iv(mid)], u[iv(mid + 1)]];
        let w = [u[iw(mid - 1)], u[iw(mid)], u[iw(mid + 1)]];
        let c = u[ic(mid)];
        match sample_problem.centerline_viscosity(mid, v, w, c) {
            Ok(mu) => centerline.push(CenterlineSample {
                t_hat: t,
                v: v[1],
                w: w[1],
                c,
                mu,
            }),
            Err(e) => {
                sample_error.get_or_insert(e);
            }
        }
    };
    record(0.0, &u0);

    let trajectory = integrate(&mut problem, 0.0, &u0, t_end, &times, &config.integrator, |t, u, _| {
        let c: Vec<f64> = (0..n).map(|j| u[ic(j)]).collect();
        monitor.observe(t, &c, ramp);
        record(t, u);
    })?;
    if let Some(e) = sample_error {
        return Err(e);
    }

    let mut snapshots = Vec::with_capacity(trajectory.outputs.len());
    for ((t, u), cycles) in trajectory.outputs.iter().zip(&config.cycles) {
        let state = StateVector::unpack(*t, u);
        snapshots.push(Snapshot::from_state(&problem, &state, *cycles)?);
    }
    let status = match trajectory.aborted {
        None => RunStatus::Complete,
        Some(Abort { t_last_good, reason }) => RunStatus::Aborted { t_last_good, reason },
    };
    Ok(RunOutput {
        params,
        snapshots,
        centerline,
        stats: trajectory.stats,
        monitor,
        status,
        wall_clock_s: started.elapsed().as_secs_f64(),
    })
}
