//! Semi-discrete right-hand side `dU/dt = R(U, t)` of the coupled
//! swirl / axial / concentration system and its banded Jacobian.
//!
//! Unknowns are interleaved per node as `[v_j, w_j, c_j]`, so nearest
//! neighbour coupling of the three fields fits in a half-bandwidth of 5.
//! Dirichlet boundary rows are reported to the integrator as algebraic
//! constraints; their right-hand-side entry is the time derivative of the
//! boundary data.

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::constitutive::{ConstitutiveModel, ShearState};
use crate::error::{Error, Result};
use crate::forcing::{
    feedback_outer_bc, outer_concentration_ramp, outer_concentration_ramp_rate, AxialForcing,
    BcMode, OuterConcentrationRow, WallMotion,
};
use crate::grid::{div_axial_half_into, div_theta_half_into, theta_shear_half, RadialGrid};
use crate::integrator::SemiDiscrete;
use crate::params::NondimParams;

/// Fields per node.
pub const FIELDS: usize = 3;
/// Half-bandwidth of the interleaved system.
pub const HALF_BANDWIDTH: usize = 5;

#[inline]
pub fn iv(j: usize) -> usize {
    FIELDS * j
}

#[inline]
pub fn iw(j: usize) -> usize {
    FIELDS * j + 1
}

#[inline]
pub fn ic(j: usize) -> usize {
    FIELDS * j + 2
}

/// Nodal `(v, w, c)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub t: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
}

impl StateVector {
    /// Fluid at rest with uniform concentration.
    pub fn rest(n_nodes: usize, c0: f64) -> Self {
        StateVector {
            t: 0.0,
            v: vec![0.0; n_nodes],
            w: vec![0.0; n_nodes],
            c: vec![c0; n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.v.len()
    }

    pub fn pack(&self) -> Vec<f64> {
        let n = self.v.len();
        let mut u = vec![0.0; FIELDS * n];
        for j in 0..n {
            u[iv(j)] = self.v[j];
            u[iw(j)] = self.w[j];
            u[ic(j)] = self.c[j];
        }
        u
    }

    pub fn unpack(t: f64, u: &[f64]) -> Self {
        let n = u.len() / FIELDS;
        StateVector {
            t,
            v: (0..n).map(|j| u[iv(j)]).collect(),
            w: (0..n).map(|j| u[iw(j)]).collect(),
            c: (0..n).map(|j| u[ic(j)]).collect(),
        }
    }

    fn check(&self, grid: &RadialGrid) -> Result<()> {
        grid.check(&self.v)?;
        grid.check(&self.w)?;
        grid.check(&self.c)?;
        let finite = self
            .v
            .iter()
            .chain(&self.w)
            .chain(&self.c)
            .all(|x| x.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// Time derivatives of the three nodal fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub dv: Vec<f64>,
    pub dw: Vec<f64>,
    pub dc: Vec<f64>,
}

/// Time-dependent drive of the two walls and the axial forcing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Drive {
    pub wall: WallMotion,
    pub axial: AxialForcing,
}

/// The annular-flow system on a fixed grid.
#[derive(Debug, Clone)]
pub struct AnnulusProblem {
    grid: RadialGrid,
    model: ConstitutiveModel,
    params: NondimParams,
    drive: Drive,
    bc: BcMode,
    outer: OuterRowState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum OuterRowState {
    Ramp,
    Fixed(f64),
    Frozen(OuterConcentrationRow),
}

impl AnnulusProblem {
    pub fn new(
        grid: RadialGrid,
        model: ConstitutiveModel,
        params: NondimParams,
        drive: Drive,
        bc: BcMode,
    ) -> Result<Self> {
        params.validate()?;
        bc.validate()?;
        let validation = model.validate();
        if let Some(v) = validation.violations.first() {
            return Err(Error::param("model", v.clone()));
        }
        if (grid.p_g() - params.p_g).abs() > 1e-12 * params.p_g {
            return Err(Error::param("p_g", "grid and parameter offsets differ"));
        }
        let outer = match bc {
            BcMode::Ramp => OuterRowState::Ramp,
            BcMode::Fixed(c) => OuterRowState::Fixed(c),
            BcMode::FeedbackSwitch { c_tilde, .. } => {
                OuterRowState::Frozen(OuterConcentrationRow::Dirichlet(c_tilde))
            }
        };
        Ok(AnnulusProblem {
            grid,
            model,
            params,
            drive,
            bc,
            outer,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn model(&self) -> &ConstitutiveModel {
        &self.model
    }

    pub fn params(&self) -> &NondimParams {
        &self.params
    }

    pub fn drive(&self) -> Drive {
        self.drive
    }

    pub fn bc(&self) -> BcMode {
        self.bc
    }

    /// Outer concentration row currently in force.
    pub fn outer_row(&self, t: f64) -> OuterConcentrationRow {
        match self.outer {
            OuterRowState::Ramp => OuterConcentrationRow::Dirichlet(outer_concentration_ramp(t)),
            OuterRowState::Fixed(c) => OuterConcentrationRow::Dirichlet(c),
            OuterRowState::Frozen(row) => row,
        }
    }

    /// Re-evaluates the feedback switch on `c`; a no-op for other modes.
    pub fn refresh_outer_row(&mut self, c: &[f64]) -> Result<()> {
        if let BcMode::FeedbackSwitch { .. } = self.bc {
            self.outer = OuterRowState::Frozen(feedback_outer_bc(c, &self.grid, &self.bc)?);
        }
        Ok(())
    }

    /// Initial state: rest, `c = 0.1` (or the fixed outer value in that mode).
    pub fn initial_state(&self) -> StateVector {
        let c0 = match self.bc {
            BcMode::Fixed(c) => c,
            _ => crate::forcing::C_INITIAL,
        };
        let mut s = StateVector::rest(self.grid.n_nodes(), c0);
        let n = self.grid.n_nodes();
        s.v[n - 1] = self.drive.wall.velocity(0.0);
        s
    }

    /// Apparent viscosity on the `n - 1` half-nodes.
    pub fn half_node_viscosity(&self, v: &[f64], w: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        let g = &self.grid;
        let h = g.h();
        (0..g.n_nodes() - 1)
            .map(|j| {
                let c_half = 0.5 * (c[j] + c[j + 1]);
                let shear = ShearState::new(theta_shear_half(g, v, j), (w[j + 1] - w[j]) / h);
                self.model
                    .apparent_viscosity(self.params.p_beta, self.params.p_gamma, c_half, shear)
            })
            .collect()
    }

    /// Nodal apparent viscosity using second-order nodal shear.
    pub fn viscosity_profile(&self, v: &[f64], w: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        let g = &self.grid;
        let dv = g.derivative(v)?;
        let dw = g.derivative(w)?;
        (0..g.n_nodes())
            .map(|j| {
                let shear = ShearState::new(dv[j] - v[j] / g.rho(j), dw[j]);
                self.model
                    .apparent_viscosity(self.params.p_beta, self.params.p_gamma, c[j], shear)
            })
            .collect()
    }

    /// Viscosity at interior node `j` from the three-point neighbourhoods of `v` and `w`.
    pub fn centerline_viscosity(&self, j: usize, v: [f64; 3], w: [f64; 3], c: f64) -> Result<f64> {
        let g = &self.grid;
        let two_h = 2.0 * g.h();
        let shear = ShearState::new((v[2] - v[0]) / two_h - v[1] / g.rho(j), (w[2] - w[0]) / two_h);
        self.model
            .apparent_viscosity(self.params.p_beta, self.params.p_gamma, c, shear)
    }

    /// Time derivatives of all nodal fields.
    pub fn rates(&self, state: &StateVector) -> Result<Rates> {
        state.check(&self.grid)?;
        let u = state.pack();
        let mut out = vec![0.0; u.len()];
        self.rhs(state.t, &u, &mut out)?;
        let s = StateVector::unpack(state.t, &out);
        Ok(Rates {
            dv: s.v,
            dw: s.w,
            dc: s.c,
        })
    }

    /// Banded Jacobian `dR/dU` at `state`.
    pub fn jacobian_at(&self, state: &StateVector) -> Result<BandMatrix> {
        state.check(&self.grid)?;
        let u = state.pack();
        let mut f0 = vec![0.0; u.len()];
        self.rhs(state.t, &u, &mut f0)?;
        fd_band_jacobian(self, state.t, &u, &f0)
    }
}

impl SemiDiscrete for AnnulusProblem {
    fn dim(&self) -> usize {
        FIELDS * self.grid.n_nodes()
    }

    fn bandwidth(&self) -> (usize, usize) {
        (HALF_BANDWIDTH, HALF_BANDWIDTH)
    }

    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        let g = &self.grid;
        let n = g.n_nodes();
        let h = g.h();
        let p = &self.params;
        let s = StateVector::unpack(t, u);
        let mu_half = self.half_node_viscosity(&s.v, &s.w, &s.c)?;

        let mut dv = vec![0.0; n];
        let mut dw = vec![0.0; n];
        let mut dc = vec![0.0; n];
        div_theta_half_into(g, &mu_half, &s.v, &mut dv);
        div_axial_half_into(g, &mu_half, &s.w, &mut dw);
        let ones = vec![1.0; n - 1];
        div_axial_half_into(g, &ones, &s.c, &mut dc);

        let forcing = self.drive.axial.value(t, p.p_a, p.p_b, p.p_f);
        let inv_re = 1.0 / p.re;
        let inv_pe = 1.0 / p.pe;
        for j in 1..n - 1 {
            out[iv(j)] = inv_re * dv[j];
            out[iw(j)] = inv_re * dw[j] + forcing;
            out[ic(j)] = inv_pe * dc[j];
        }

        out[iv(0)] = 0.0;
        out[iw(0)] = 0.0;
        out[iv(n - 1)] = self.drive.wall.acceleration(t);
        out[iw(n - 1)] = 0.0;
        // reflected ghost node enforces dc/dr = 0
        out[ic(0)] = inv_pe * 2.0 * (s.c[1] - s.c[0]) / (h * h);
        out[ic(n - 1)] = match self.outer {
            OuterRowState::Ramp => outer_concentration_ramp_rate(t),
            OuterRowState::Fixed(_) | OuterRowState::Frozen(OuterConcentrationRow::Dirichlet(_)) => 0.0,
            OuterRowState::Frozen(OuterConcentrationRow::ZeroFlux) => {
                inv_pe * 2.0 * (s.c[n - 2] - s.c[n - 1]) / (h * h)
            }
        };
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn constraints(&self, t: f64, out: &mut Vec<(usize, f64)>) {
        let n = self.grid.n_nodes();
        out.clear();
        out.push((iv(0), 0.0));
        out.push((iw(0), 0.0));
        out.push((iv(n - 1), self.drive.wall.velocity(t)));
        out.push((iw(n - 1), 0.0));
        if let OuterConcentrationRow::Dirichlet(c) = self.outer_row(t) {
            out.push((ic(n - 1), c));
        }
    }

    fn begin_step(&mut self, _t: f64, u: &[f64]) -> Result<()> {
        if let BcMode::FeedbackSwitch { .. } = self.bc {
            let n = self.grid.n_nodes();
            let c: Vec<f64> = (0..n).map(|j| u[ic(j)]).collect();
            self.refresh_outer_row(&c)?;
        }
        Ok(())
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.bc.breakpoints().to_vec()
    }
}

/// Column-grouped one-sided difference Jacobian.
///
/// Columns whose indices are congruent modulo the full bandwidth never share
/// a row, so each group costs one right-hand-side evaluation.
pub fn fd_band_jacobian<P: SemiDiscrete + ?Sized>(
    problem: &P,
    t: f64,
    u: &[f64],
    f0: &[f64],
) -> Result<BandMatrix> {
    let n = problem.dim();
    let (kl, ku) = problem.bandwidth();
    let colors = kl + ku + 1;
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut jac = BandMatrix::zeros(n, kl, ku);
    let mut perturbed = u.to_vec();
    let mut f1 = vec![0.0; n];
    let mut steps = vec![0.0; n];
    for color in 0..colors.min(n) {
        for j in (color..n).step_by(colors) {
            let delta = sqrt_eps * u[j].abs().max(1.0);
            perturbed[j] = u[j] + delta;
            steps[j] = perturbed[j] - u[j];
        }
        problem.rhs(t, &perturbed, &mut f1)?;
        for j in (color..n).step_by(colors) {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                jac.set(i, j, (f1[i] - f0[i]) / steps[j]);
            }
            perturbed[j] = u[j];
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ModelKind;
    use crate::grid::div_c;
    use approx::assert_abs_diff_eq;

    fn problem(kind: ModelKind, n: usize, gradient: bool) -> AnnulusProblem {
        let model = ConstitutiveModel::builtin(kind);
        let params = NondimParams::standard(&model, gradient);
        let grid = RadialGrid::new(n, params.p_g).unwrap();
        AnnulusProblem::new(grid, model, params, Drive::default(), BcMode::Ramp).unwrap()
    }

    #[test]
    fn rest_state_rates() {
        let model = ConstitutiveModel::builtin(ModelKind::Model1);
        let mut params = NondimParams::standard(&model, true);
        params.p_a = -1.0;
        params.p_b = 1.0;
        let grid = RadialGrid::new(21, params.p_g).unwrap();
        let p = AnnulusProblem::new(grid, model, params, Drive::default(), BcMode::Ramp).unwrap();
        let rates = p.rates(&p.initial_state()).unwrap();
        assert!(rates.dv.iter().all(|&x| x == 0.0));
        assert!(rates.dw.iter().all(|&x| x == 0.0));
        assert!(rates.dc[..20].iter().all(|&x| x == 0.0));
        assert_eq!(rates.dc[20], 0.1);
    }

    #[test]
    fn rigid_rotation_is_steady() {
        let p = problem(ModelKind::Newtonian, 31, false);
        let g = p.grid().clone();
        let mut s = p.initial_state();
        s.t = 1.3;
        let omega = crate::forcing::wall_velocity(s.t) / (1.0 + g.p_g());
        s.v = g.sample(|r| omega * (r + g.p_g()));
        let rates = p.rates(&s).unwrap();
        for j in 1..30 {
            assert!(rates.dv[j].abs() < 1e-12, "{}", rates.dv[j]);
        }
    }

    #[test]
    fn logarithmic_concentration_is_nearly_steady() {
        let errs: Vec<f64> = [21usize, 41]
            .iter()
            .map(|&n| {
                let p = problem(ModelKind::Model2a, n, false);
                let g = p.grid().clone();
                let pg = g.p_g();
                let mut s = p.initial_state();
                let scale = (1.0 + 1.0 / pg).ln();
                s.c = g.sample(|r| 0.1 + 0.2 * ((r + pg) / pg).ln() / scale);
                let rates = p.rates(&s).unwrap();
                rates.dc[1..n - 1].iter().fold(0.0f64, |m, x| m.max(x.abs()))
            })
            .collect();
        assert!(errs[0] < 1e-7);
        let ratio = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn interior_rates_match_operators() {
        let p = problem(ModelKind::Newtonian, 11, false);
        let g = p.grid().clone();
        let mut s = p.initial_state();
        s.c = g.sample(|r| 0.1 + 0.1 * r * r);
        s.v = g.sample(|r| r * (1.0 - r));
        let rates = p.rates(&s).unwrap();
        let dc = div_c(&g, &s.c).unwrap();
        let dv = crate::grid::div_theta(&g, &[1.0; 11], &s.v).unwrap();
        for j in 1..10 {
            assert_abs_diff_eq!(rates.dc[j], dc[j] / 1000.0, epsilon = 1e-15);
            assert_abs_diff_eq!(rates.dv[j], dv[j] / 10.0, epsilon = 1e-13);
        }
    }

    fn hand_theta_stencil(g: &RadialGrid, j: usize, re: f64) -> (f64, f64, f64) {
        // (1/Re) * (F_{j+1/2} - F_{j-1/2}) / (h rho_j^2) with mu = 1
        let h = g.h();
        let rp = g.rho_half(j);
        let rm = g.rho_half(j - 1);
        let scale = 1.0 / (re * h * g.rho(j).powi(2));
        let left = scale * (rm * rm) * (1.0 / h + 0.5 / rm);
        let right = scale * (rp * rp) * (1.0 / h - 0.5 / rp);
        let centre = scale * (-(rp * rp) * (1.0 / h + 0.5 / rp) - (rm * rm) * (1.0 / h - 0.5 / rm));
        (left, centre, right)
    }

    #[test]
    fn newtonian_jacobian_matches_hand_stencil() {
        let p = problem(ModelKind::Newtonian, 9, false);
        let g = p.grid().clone();
        let jac = p.jacobian_at(&p.initial_state()).unwrap();
        for j in 1..8 {
            let (l, c, r) = hand_theta_stencil(&g, j, 10.0);
            assert_abs_diff_eq!(jac.get(iv(j), iv(j - 1)), l, epsilon = 1e-6);
            assert_abs_diff_eq!(jac.get(iv(j), iv(j)), c, epsilon = 1e-6);
            assert_abs_diff_eq!(jac.get(iv(j), iv(j + 1)), r, epsilon = 1e-6);
            for k in [j - 1, j, j + 1] {
                assert_eq!(jac.get(iv(j), iw(k)), 0.0);
                assert_eq!(jac.get(iv(j), ic(k)), 0.0);
            }
        }
    }

    #[test]
    fn concentration_rows_ignore_velocity() {
        for kind in ModelKind::ALL {
            let p = problem(kind, 15, true);
            let g = p.grid().clone();
            let mut s = p.initial_state();
            s.t = 4.0;
            s.v = g.sample(|r| 2.0 * r * r);
            s.w = g.sample(|r| r * (1.0 - r));
            s.c = g.sample(|r| 0.1 + 0.2 * r.powi(3));
            let jac = p.jacobian_at(&s).unwrap();
            for j in 0usize..15 {
                for k in j.saturating_sub(1)..=(j + 1).min(14) {
                    assert_eq!(jac.get(ic(j), iv(k)), 0.0);
                    assert_eq!(jac.get(ic(j), iw(k)), 0.0);
                }
            }
        }
    }

    #[test]
    fn jacobian_perturbation_consistency() {
        let p = problem(ModelKind::Model2b, 15, true);
        let g = p.grid().clone();
        let mut s = p.initial_state();
        s.t = 3.0;
        s.v = g.sample(|r| 1.5 * r + 0.3 * (3.0 * r).sin());
        s.w = g.sample(|r| 0.4 * r * (1.0 - r));
        s.c = g.sample(|r| 0.1 + 0.2 * r * r);
        let u = s.pack();
        let jac = p.jacobian_at(&s).unwrap();
        let mut f0 = vec![0.0; u.len()];
        p.rhs(s.t, &u, &mut f0).unwrap();
        let dir: Vec<f64> = (0..u.len()).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        let mut defects = Vec::new();
        for eps in [1e-3, 5e-4] {
            let up: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + eps * d).collect();
            let mut f1 = vec![0.0; u.len()];
            p.rhs(s.t, &up, &mut f1).unwrap();
            let jd = jac.mul_vec(&dir.iter().map(|d| eps * d).collect::<Vec<_>>());
            let defect = f1
                .iter()
                .zip(&f0)
                .zip(&jd)
                .map(|((a, b), c)| (a - b - c).abs())
                .fold(0.0, f64::max);
            defects.push(defect);
        }
        let ratio = defects[0] / defects[1];
        assert!((3.0..=5.0).contains(&ratio), "{defects:?}");
    }

    #[test]
    fn odd_symmetry_in_swirl() {
        let p = problem(ModelKind::Model1, 15, false);
        let g = p.grid().clone();
        let mut s = p.initial_state();
        s.v = g.sample(|r| 1.2 * r + 0.2 * (4.0 * r).sin());
        s.c = g.sample(|r| 0.1 + 0.2 * r * r);
        let a = p.rates(&s).unwrap();
        s.v.iter_mut().for_each(|x| *x = -*x);
        let b = p.rates(&s).unwrap();
        for j in 1..14 {
            assert_eq!(a.dv[j], -b.dv[j]);
            assert_eq!(a.dc[j], b.dc[j]);
        }
    }

    #[test]
    fn newtonian_without_forcing_keeps_w_zero() {
        let p = problem(ModelKind::Newtonian, 15, false);
        let g = p.grid().clone();
        let mut s = p.initial_state();
        s.t = 2.5;
        s.v = g.sample(|r| r * (2.0 - r));
        let rates = p.rates(&s).unwrap();
        assert!(rates.dw.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn feedback_row_switches() {
        let model = ConstitutiveModel::builtin(ModelKind::Newtonian);
        let params = NondimParams::standard(&model, false);
        let grid = RadialGrid::new(11, params.p_g).unwrap();
        let mut p = AnnulusProblem::new(grid, model, params, Drive::default(), BcMode::feedback_default()).unwrap();
        let mut s = p.initial_state();
        s.c = vec![0.3; 11];
        p.begin_step(0.0, &s.pack()).unwrap();
        assert_eq!(p.outer_row(0.0), OuterConcentrationRow::ZeroFlux);
        let mut cons = Vec::new();
        p.constraints(0.0, &mut cons);
        assert_eq!(cons.len(), 4);
        s.c = vec![0.1; 11];
        p.begin_step(0.0, &s.pack()).unwrap();
        assert_eq!(p.outer_row(0.0), OuterConcentrationRow::Dirichlet(0.3));
        p.constraints(0.0, &mut cons);
        assert_eq!(cons.last(), Some(&(ic(10), 0.3)));
    }
}
