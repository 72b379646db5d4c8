//! Non-dimensional parameter group and its derivation from physical inputs.

use serde::{Deserialize, Serialize};

use crate::constitutive::ConstitutiveModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondimParams {
    pub re: f64,
    pub pe: f64,
    /// Axial-to-swirl frequency ratio.
    pub p_f: f64,
    /// Geometric offset `r_i / (r_o - r_i)`.
    pub p_g: f64,
    pub p_gamma: f64,
    pub p_beta: f64,
    pub p_a: f64,
    pub p_b: f64,
}

impl NondimParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("re", self.re), ("pe", self.pe), ("p_g", self.p_g)];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {value}")));
            }
        }
        let non_negative = [("p_gamma", self.p_gamma), ("p_beta", self.p_beta)];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::param(name, format!("must be non-negative, got {value}")));
            }
        }
        for (name, value) in [("p_f", self.p_f), ("p_a", self.p_a), ("p_b", self.p_b)] {
            if !value.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Reference settings: `r_i = 1`, `r_o = 1.2`, unit swirl
    /// amplitude, `Re = 10`, `Pe = 1000`, `p_f = 1`. With `gradient` the axial
    /// forcing is `p_a = -p_b = 1`, otherwise it is switched off.
    pub fn standard(model: &ConstitutiveModel, gradient: bool) -> Self {
        let geometry = PhysicalInputs {
            r_i: 1.0,
            r_o: 1.2,
            omega_theta: 1.0,
            ..PhysicalInputs::unit()
        };
        let (p_a, p_b) = if gradient { (1.0, -1.0) } else { (0.0, 0.0) };
        NondimParams {
            re: 10.0,
            pe: 1000.0,
            p_f: 1.0,
            p_g: geometry.r_i / (geometry.r_o - geometry.r_i),
            p_gamma: geometry.p_gamma(model.gamma),
            p_beta: model.beta,
            p_a,
            p_b,
        }
    }
}

/// Dimensional description of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInputs {
    pub r_i: f64,
    pub r_o: f64,
    /// Swirl amplitude of the outer wall's angular velocity.
    pub omega_theta: f64,
    pub f_theta: f64,
    pub f_z: f64,
    /// Mean axial pressure gradient.
    pub a: f64,
    /// Oscillatory axial pressure gradient amplitude.
    pub b: f64,
    pub rho_f: f64,
    /// Plasma viscosity.
    pub mu0: f64,
    pub d_c: f64,
}

impl PhysicalInputs {
    fn unit() -> Self {
        PhysicalInputs {
            r_i: 1.0,
            r_o: 2.0,
            omega_theta: 1.0,
            f_theta: 1.0,
            f_z: 1.0,
            a: 0.0,
            b: 0.0,
            rho_f: 1.0,
            mu0: 1.0,
            d_c: 1.0,
        }
    }

    fn p_gamma(&self, gamma: f64) -> f64 {
        let gap = self.r_o - self.r_i;
        2.0 * gamma * self.r_o * self.r_o * self.omega_theta * self.omega_theta / (gap * gap)
    }

    /// Non-dimensional group for `model` in this geometry.
    pub fn derive_nondim(&self, model: &ConstitutiveModel) -> Result<NondimParams> {
        let fields = [
            ("r_i", self.r_i),
            ("r_o", self.r_o),
            ("omega_theta", self.omega_theta),
            ("f_theta", self.f_theta),
            ("f_z", self.f_z),
            ("a", self.a),
            ("b", self.b),
            ("rho_f", self.rho_f),
            ("mu0", self.mu0),
            ("d_c", self.d_c),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.r_i <= 0.0 {
            return Err(Error::param("r_i", "must be positive"));
        }
        if self.r_o <= self.r_i {
            return Err(Error::param("r_o", "must exceed r_i"));
        }
        for (name, value) in [
            ("omega_theta", self.omega_theta),
            ("f_theta", self.f_theta),
            ("rho_f", self.rho_f),
            ("mu0", self.mu0),
            ("d_c", self.d_c),
        ] {
            if value <= 0.0 {
                return Err(Error::param(name, "must be positive"));
            }
        }
        let gap = self.r_o - self.r_i;
        let pressure_scale = self.rho_f * self.r_o * self.omega_theta * self.f_theta;
        let params = NondimParams {
            re: self.rho_f * self.f_theta * gap * gap / self.mu0,
            pe: self.f_theta * gap * gap / self.d_c,
            p_f: self.f_z / self.f_theta,
            p_g: self.r_i / gap,
            p_gamma: self.p_gamma(model.gamma),
            p_beta: model.beta,
            p_a: self.a / pressure_scale,
            p_b: self.b / pressure_scale,
        };
        params.validate()?;
        Ok(params)
    }
}
