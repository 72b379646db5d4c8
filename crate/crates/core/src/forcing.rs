//! Time-dependent boundary data and volumetric forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Ramp duration of the outer concentration.
pub const RAMP_END: f64 = 2.0;
pub const C_INITIAL: f64 = 0.1;
pub const C_PLATEAU: f64 = 0.3;

/// Outer wall velocity `1 - cos t` (inner wall fixed).
#[inline]
pub fn wall_velocity(t: f64) -> f64 {
    1.0 - t.cos()
}

/// Axial pressure-gradient forcing `p_a + p_b cos(p_f t)`.
#[inline]
pub fn pressure_forcing(t: f64, p_a: f64, p_b: f64, p_f: f64) -> f64 {
    p_a + p_b * (p_f * t).cos()
}

/// Outer concentration: linear rise from 0.1 to 0.3 over `t in [0, 2]`, then held.
#[inline]
pub fn outer_concentration_ramp(t: f64) -> f64 {
    if t <= RAMP_END {
        C_INITIAL + 0.1 * t
    } else {
        C_PLATEAU
    }
}

/// Left derivative of [`outer_concentration_ramp`].
#[inline]
pub fn outer_concentration_ramp_rate(t: f64) -> f64 {
    if t <= RAMP_END {
        0.1
    } else {
        0.0
    }
}

/// Motion of the outer cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum WallMotion {
    /// `v(1, t) = 1 - cos t`
    #[default]
    Oscillating,
    /// Wall held at a fixed velocity (verification runs).
    Steady(f64),
}

impl WallMotion {
    pub fn velocity(self, t: f64) -> f64 {
        match self {
            WallMotion::Oscillating => wall_velocity(t),
            WallMotion::Steady(v) => v,
        }
    }

    pub fn acceleration(self, t: f64) -> f64 {
        match self {
            WallMotion::Oscillating => t.sin(),
            WallMotion::Steady(_) => 0.0,
        }
    }
}

/// Source term of the axial momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum AxialForcing {
    /// `p_a + p_b cos(p_f t)` from the study parameters.
    #[default]
    PressureGradient,
    /// Constant forcing `G` (verification runs).
    Steady(f64),
}

impl AxialForcing {
    pub fn value(self, t: f64, p_a: f64, p_b: f64, p_f: f64) -> f64 {
        match self {
            AxialForcing::PressureGradient => pressure_forcing(t, p_a, p_b, p_f),
            AxialForcing::Steady(g) => g,
        }
    }
}

/// Outer-wall concentration condition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcMode {
    /// Prescribed ramp `0.1 + 0.1 t`, held at 0.3 after `t = 2`.
    #[default]
    Ramp,
    /// Prescribe `c_tilde` while the mean over `[r_bar, 1]` is below `c_bar`,
    /// zero flux once it reaches `c_bar`.
    FeedbackSwitch {
        c_tilde: f64,
        c_bar: f64,
        r_bar: f64,
    },
    /// Constant prescribed value (verification runs).
    Fixed(f64),
}

impl BcMode {
    pub const DEFAULT_C_TILDE: f64 = 0.3;
    pub const DEFAULT_C_BAR: f64 = 0.25;
    pub const DEFAULT_R_BAR: f64 = 0.75;

    pub fn feedback_default() -> Self {
        BcMode::FeedbackSwitch {
            c_tilde: Self::DEFAULT_C_TILDE,
            c_bar: Self::DEFAULT_C_BAR,
            r_bar: Self::DEFAULT_R_BAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BcMode::Ramp => Ok(()),
            BcMode::FeedbackSwitch {
                c_tilde,
                c_bar,
                r_bar,
            } => {
                if !(0.0..=1.0).contains(&c_tilde) {
                    return Err(Error::param("c_tilde", "must lie in [0, 1]"));
                }
                if !(0.0..=1.0).contains(&c_bar) {
                    return Err(Error::param("c_bar", "must lie in [0, 1]"));
                }
                if !(0.0..1.0).contains(&r_bar) {
                    return Err(Error::param("r_bar", "must lie in [0, 1)"));
                }
                Ok(())
            }
            BcMode::Fixed(c) => {
                if (0.0..=1.0).contains(&c) {
                    Ok(())
                } else {
                    Err(Error::param("c_fixed", "must lie in [0, 1]"))
                }
            }
        }
    }

    /// Time after which the boundary data has a kink the integrator must land on.
    pub fn breakpoints(&self) -> &'static [f64] {
        match self {
            BcMode::Ramp => &[RAMP_END],
            _ => &[],
        }
    }
}

/// Boundary row at the outer wall for the concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterConcentrationRow {
    Dirichlet(f64),
    ZeroFlux,
}

/// Trapezoidal average of `c` over `[r_bar, 1]`; the partial cell at
/// `r_bar` uses the linearly interpolated value.
pub fn mean_concentration(c: &[f64], grid: &RadialGrid, r_bar: f64) -> Result<f64> {
    grid.check(c)?;
    if !(0.0..1.0).contains(&r_bar) {
        return Err(Error::Range {
            value: r_bar,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let h = grid.h();
    let n = grid.n_nodes();
    let k = ((r_bar / h).floor() as usize).min(n - 2);
    let frac = (r_bar - grid.r(k)) / h;
    let c_bar_node = c[k] + frac * (c[k + 1] - c[k]);
    let mut integral = 0.5 * (grid.r(k + 1) - r_bar) * (c_bar_node + c[k + 1]);
    for j in k + 1..n - 1 {
        integral += 0.5 * h * (c[j] + c[j + 1]);
    }
    Ok(integral / (1.0 - r_bar))
}

/// Chooses the outer concentration row for the current profile.
pub fn feedback_outer_bc(c: &[f64], grid: &RadialGrid, mode: &BcMode) -> Result<OuterConcentrationRow> {
    match *mode {
        BcMode::FeedbackSwitch {
            c_tilde,
            c_bar,
            r_bar,
        } => {
            let mean = mean_concentration(c, grid, r_bar)?;
            if mean < c_bar {
                Ok(OuterConcentrationRow::Dirichlet(c_tilde))
            } else {
                Ok(OuterConcentrationRow::ZeroFlux)
            }
        }
        _ => Err(Error::param("bc_mode", "feedback_outer_bc requires the feedback switch mode")),
    }
}
