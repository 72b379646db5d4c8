//! Concentration- and shear-rate-dependent apparent viscosity.
//!
//! All four fluids share the generalized power-law form
//!
//! ```text
//! mu = mu0(c) * { p_beta + p_gamma * (s_theta^2 + s_z^2) }^n(c)
//! ```
//!
//! in non-dimensional variables. The Newtonian fluid has `n = 0` and
//! `mu0 = 1`; Model 1 carries the concentration in the zero-shear
//! viscosity `mu0 = exp(alpha c)` with a constant index; Models 2a and 2b
//! keep `mu0 = 1` and let the shear index depend on concentration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Newtonian,
    Model1,
    Model2a,
    Model2b,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Newtonian,
        ModelKind::Model1,
        ModelKind::Model2a,
        ModelKind::Model2b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Newtonian => "newtonian",
            ModelKind::Model1 => "model1",
            ModelKind::Model2a => "model2a",
            ModelKind::Model2b => "model2b",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "newtonian" => Ok(ModelKind::Newtonian),
            "model1" | "model_1" | "1" => Ok(ModelKind::Model1),
            "model2a" | "model_2a" | "2a" => Ok(ModelKind::Model2a),
            "model2b" | "model_2b" | "2b" => Ok(ModelKind::Model2b),
            other => Err(format!(
                "unknown model `{other}` (expected newtonian, model1, model2a or model2b)"
            )),
        }
    }
}

/// Model kind plus its material parameters.
///
/// `gamma` is the coefficient multiplying `tr(A1^2)`, i.e. one quarter of
/// the value quoted for models written in terms of the stretching tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstitutiveModel {
    pub kind: ModelKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Amplitude of the Model 2b shear index.
    pub sigma: f64,
    /// Constant shear index of Model 1.
    pub n_const: f64,
}

impl ConstitutiveModel {
    /// Built-in parameter set for `kind`.
    pub fn builtin(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Newtonian => ConstitutiveModel {
                kind,
                alpha: 0.0,
                beta: 1.0,
                gamma: 0.0,
                sigma: 0.0,
                n_const: 0.0,
            },
            ModelKind::Model1 => ConstitutiveModel {
                kind,
                alpha: 21.3,
                beta: 1.0,
                gamma: 6.96 / 4.0,
                sigma: 0.0,
                n_const: -0.28,
            },
            ModelKind::Model2a => ConstitutiveModel {
                kind,
                alpha: 3.3,
                beta: 7.1e-9,
                gamma: 5.8e-8 / 4.0,
                sigma: 0.0,
                n_const: 0.0,
            },
            ModelKind::Model2b => ConstitutiveModel {
                kind,
                alpha: 31.0,
                beta: 1.3e-8,
                gamma: 8.5e-8 / 4.0,
                sigma: 0.44,
                n_const: 0.0,
            },
        }
    }

    /// Power-law exponent `n(c)`; negative means shear-thinning.
    pub fn shear_index(&self, c: f64) -> Result<f64> {
        check_concentration(c)?;
        Ok(self.shear_index_unchecked(c))
    }

    #[inline]
    fn shear_index_unchecked(&self, c: f64) -> f64 {
        match self.kind {
            ModelKind::Newtonian => 0.0,
            ModelKind::Model1 => self.n_const,
            ModelKind::Model2a => 0.5 * (-self.alpha * c).exp_m1(),
            ModelKind::Model2b => self.sigma * (1.0 / (self.alpha * c * c + 1.0) - 1.0),
        }
    }

    /// Zero-shear viscosity relative to the plasma viscosity, `mu0(c) / mu0_bar`.
    pub fn zero_shear_ratio(&self, c: f64) -> Result<f64> {
        check_concentration(c)?;
        Ok(self.zero_shear_ratio_unchecked(c))
    }

    #[inline]
    fn zero_shear_ratio_unchecked(&self, c: f64) -> f64 {
        match self.kind {
            ModelKind::Model1 => (self.alpha * c).exp(),
            _ => 1.0,
        }
    }

    /// Non-dimensional apparent viscosity at concentration `c` and shear `shear`.
    pub fn apparent_viscosity(
        &self,
        p_beta: f64,
        p_gamma: f64,
        c: f64,
        shear: ShearState,
    ) -> Result<f64> {
        check_concentration(c)?;
        let index = self.shear_index_unchecked(c);
        let mu0 = self.zero_shear_ratio_unchecked(c);
        if index == 0.0 {
            return Ok(mu0);
        }
        let base = p_beta + p_gamma * shear.magnitude_sq();
        if base <= 0.0 || !base.is_finite() {
            return Err(Error::ViscositySingularity { base, index });
        }
        Ok(mu0 * (index * base.ln()).exp())
    }

    /// Checks the dissipation constraint and parameter sanity.
    pub fn validate(&self) -> Validation {
        let mut report = Validation::default();
        let finite = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("sigma", self.sigma),
            ("n", self.n_const),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                report.violations.push(format!("{name} not finite"));
            }
        }
        if self.gamma < 0.0 {
            report.violations.push("gamma negative".to_string());
        }
        if self.beta < 0.0 {
            report.violations.push("beta negative".to_string());
        }
        if self.beta == 0.0 && self.kind != ModelKind::Newtonian {
            report
                .warnings
                .push("zero-shear singularity possible when n<0".to_string());
        }
        report
    }
}

/// Outcome of [`ConstitutiveModel::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The two non-dimensional shear measures of the annular flow.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShearState {
    /// `dv/dr - v/(r + p_g)`
    pub s_theta: f64,
    /// `dw/dr`
    pub s_z: f64,
}

impl ShearState {
    pub fn new(s_theta: f64, s_z: f64) -> Self {
        ShearState { s_theta, s_z }
    }

    #[inline]
    pub fn magnitude_sq(&self) -> f64 {
        self.s_theta * self.s_theta + self.s_z * self.s_z
    }
}

#[inline]
fn check_concentration(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::ConcentrationDomain(c))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn builtin_presets() {
        let m1 = ConstitutiveModel::builtin(ModelKind::Model1);
        assert_eq!(m1.alpha, 21.3);
        assert_eq!(m1.beta, 1.0);
        assert_relative_eq!(m1.gamma, 1.74, max_relative = 1e-15);
        assert_eq!(m1.n_const, -0.28);

        let m2b = ConstitutiveModel::builtin(ModelKind::Model2b);
        assert_eq!(m2b.alpha, 31.0);
        assert_eq!(m2b.beta, 1.3e-8);
        assert_relative_eq!(m2b.gamma, 2.125e-8, max_relative = 1e-15);
        assert_eq!(m2b.sigma, 0.44);

        let m2a = ConstitutiveModel::builtin(ModelKind::Model2a);
        assert_eq!(m2a.gamma, 5.8e-8 / 4.0);

        let newt = ConstitutiveModel::builtin(ModelKind::Newtonian);
        assert_eq!((newt.alpha, newt.beta, newt.gamma, newt.n_const), (0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn shear_index_values() {
        let m2a = ConstitutiveModel::builtin(ModelKind::Model2a);
        let m2b = ConstitutiveModel::builtin(ModelKind::Model2b);
        assert_eq!(m2a.shear_index(0.0).unwrap(), 0.0);
        assert_eq!(m2b.shear_index(0.0).unwrap(), 0.0);
        // mpmath, 30 digits
        assert_relative_eq!(
            m2a.shear_index(0.1).unwrap(),
            -0.140538133284036915,
            max_relative = 1e-14
        );
        assert!(matches!(
            m2a.shear_index(1.5),
            Err(Error::ConcentrationDomain(_))
        ));
        assert!(m2b.shear_index(-0.01).is_err());
    }

    #[test]
    fn zero_shear_ratio_values() {
        let m1 = ConstitutiveModel::builtin(ModelKind::Model1);
        assert_eq!(m1.zero_shear_ratio(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            m1.zero_shear_ratio(0.1).unwrap(),
            8.41486681144012934,
            max_relative = 1e-14
        );
        let m2a = ConstitutiveModel::builtin(ModelKind::Model2a);
        assert_eq!(m2a.zero_shear_ratio(0.3).unwrap(), 1.0);
    }

    #[test]
    fn apparent_viscosity_values() {
        let newt = ConstitutiveModel::builtin(ModelKind::Newtonian);
        assert_eq!(
            newt.apparent_viscosity(1.0, 0.0, 0.2, ShearState::new(3.0, -2.0))
                .unwrap(),
            1.0
        );

        let m2a = ConstitutiveModel::builtin(ModelKind::Model2a);
        let mu = m2a
            .apparent_viscosity(7.1e-9, 1.0, 0.1, ShearState::default())
            .unwrap();
        assert_relative_eq!(mu, 13.9704031939135540, max_relative = 1e-12);

        let m1 = ConstitutiveModel::builtin(ModelKind::Model1);
        let mu = m1
            .apparent_viscosity(1.0, 125.28, 0.0, ShearState::new(0.1, 0.0))
            .unwrap();
        assert_relative_eq!(mu, 0.796595156590932372, max_relative = 1e-13);
    }

    #[test]
    fn singular_base_is_rejected() {
        let m1 = ConstitutiveModel::builtin(ModelKind::Model1);
        let err = m1
            .apparent_viscosity(0.0, 1.0, 0.1, ShearState::default())
            .unwrap_err();
        assert!(matches!(err, Error::ViscositySingularity { .. }));
        // Newtonian never touches the base
        let newt = ConstitutiveModel::builtin(ModelKind::Newtonian);
        assert_eq!(
            newt.apparent_viscosity(0.0, 0.0, 0.1, ShearState::default())
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn validation() {
        assert!(ConstitutiveModel::builtin(ModelKind::Model2b).validate().is_ok());

        let mut bad = ConstitutiveModel::builtin(ModelKind::Model1);
        bad.gamma = -1.0;
        let v = bad.validate();
        assert_eq!(v.violations, vec!["gamma negative".to_string()]);

        let mut zero_beta = ConstitutiveModel::builtin(ModelKind::Model1);
        zero_beta.beta = 0.0;
        let v = zero_beta.validate();
        assert!(v.is_ok());
        assert_eq!(
            v.warnings,
            vec!["zero-shear singularity possible when n<0".to_string()]
        );
    }

    #[test]
    fn model_kind_parse() {
        assert_eq!("Model2A".parse::<ModelKind>().unwrap(), ModelKind::Model2a);
        assert!("model3".parse::<ModelKind>().is_err());
    }

    fn any_model() -> impl Strategy<Value = ConstitutiveModel> {
        prop::sample::select(ModelKind::ALL.to_vec()).prop_map(ConstitutiveModel::builtin)
    }

    fn standard_p_gamma(m: &ConstitutiveModel) -> f64 {
        2.0 * m.gamma * 1.44 / 0.04
    }

    proptest! {
        #[test]
        fn positive_and_finite(m in any_model(), c in 0.0..=1.0f64,
                               st in -50.0..50.0f64, sz in -50.0..50.0f64) {
            let mu = m.apparent_viscosity(m.beta, standard_p_gamma(&m), c, ShearState::new(st, sz)).unwrap();
            prop_assert!(mu > 0.0 && mu.is_finite());
            // reduced stress power
            prop_assert!(mu * (st * st + sz * sz) >= 0.0);
        }

        #[test]
        fn monotone_thinning(m in any_model(), c in 0.0..=1.0f64,
                             a in 0.0..30.0f64, b in 0.0..30.0f64, sz in -5.0..5.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let pg = standard_p_gamma(&m);
            let mu_lo = m.apparent_viscosity(m.beta, pg, c, ShearState::new(lo, sz)).unwrap();
            let mu_hi = m.apparent_viscosity(m.beta, pg, c, ShearState::new(hi, sz)).unwrap();
            prop_assert!(m.shear_index(c).unwrap() <= 0.0);
            prop_assert!(mu_hi <= mu_lo * (1.0 + 1e-14));
        }

        #[test]
        fn newtonian_is_unity(c in 0.0..=1.0f64, pb in 0.0..10.0f64, pg in 0.0..1e3f64,
                              st in -1e3..1e3f64, sz in -1e3..1e3f64) {
            let m = ConstitutiveModel::builtin(ModelKind::Newtonian);
            prop_assert_eq!(m.apparent_viscosity(pb, pg, c, ShearState::new(st, sz)).unwrap(), 1.0);
        }

        #[test]
        fn zero_concentration_collapse(st in -1e3..1e3f64, sz in -1e3..1e3f64) {
            for kind in [ModelKind::Model2a, ModelKind::Model2b] {
                let m = ConstitutiveModel::builtin(kind);
                let mu = m.apparent_viscosity(m.beta, standard_p_gamma(&m), 0.0, ShearState::new(st, sz)).unwrap();
                prop_assert_eq!(mu, 1.0);
            }
        }
    }
}
