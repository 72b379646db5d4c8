//! Pressure reconstruction from a swirl profile.
//!
//! The radial part is `h(r) = int_0^r v^2 / (s + p_g) ds`; the axial part is
//! linear in `z` with coefficient `-(p_a + p_b cos(p_f t))`. The free
//! function of time is fixed so that the pressure vanishes at `r = 0, z = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::pressure_forcing;
use crate::grid::RadialGrid;
use crate::params::NondimParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureSnapshot {
    /// Radial part on the grid nodes, zero at the inner wall.
    pub h_profile: Vec<f64>,
    pub axial_coeff: f64,
}

/// Composite trapezoidal quadrature of `v^2 / (r + p_g)` from the inner wall.
pub fn radial_profile(v: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    grid.check(v)?;
    let integrand: Vec<f64> = (0..grid.n_nodes())
        .map(|j| v[j] * v[j] / grid.rho(j))
        .collect();
    let mut h = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    h.push(0.0);
    for j in 1..v.len() {
        acc += 0.5 * (grid.r(j) - grid.r(j - 1)) * (integrand[j - 1] + integrand[j]);
        h.push(acc);
    }
    Ok(h)
}

pub fn reconstruct(v: &[f64], grid: &RadialGrid, params: &NondimParams, t: f64) -> Result<PressureSnapshot> {
    Ok(PressureSnapshot {
        h_profile: radial_profile(v, grid)?,
        axial_coeff: -pressure_forcing(t, params.p_a, params.p_b, params.p_f),
    })
}

/// Pressure at `(r, z)`, interpolating the radial part linearly.
pub fn pressure_at(snapshot: &PressureSnapshot, r: f64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Range {
            value: r,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let h = &snapshot.h_profile;
    if h.len() < 2 {
        return Err(Error::Alignment {
            expected: 2,
            got: h.len(),
        });
    }
    let cells = (h.len() - 1) as f64;
    let x = r * cells;
    let k = (x.floor() as usize).min(h.len() - 2);
    let frac = x - k as f64;
    Ok(snapshot.axial_coeff * z + h[k] + frac * (h[k + 1] - h[k]))
}
