//! Uniform radial grid on the gap and the conservative flux-difference
//! forms of the three transport operators.
//!
//! With `rho = r + p_g` the operators are
//!
//! ```text
//! div_theta = rho^-2 d/dr [ rho^2 mu (dv/dr - v/rho) ]
//! div_z     = rho^-1 d/dr [ rho   mu  dw/dr ]
//! div_c     = rho^-1 d/dr [ rho       dc/dr ]
//! ```
//!
//! Fluxes live on half-nodes; operator values are returned on interior
//! nodes `1..n-1` and the two boundary entries are left at zero.

use crate::error::{Error, Result};

/// Minimum number of nodes accepted by [`RadialGrid::new`].
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n_nodes: usize,
    h: f64,
    p_g: f64,
}

impl RadialGrid {
    pub fn new(n_nodes: usize, p_g: f64) -> Result<Self> {
        if n_nodes < MIN_NODES {
            return Err(Error::param(
                "n_nodes",
                format!("need at least {MIN_NODES} nodes, got {n_nodes}"),
            ));
        }
        if !(p_g > 0.0 && p_g.is_finite()) {
            return Err(Error::param("p_g", format!("must be positive, got {p_g}")));
        }
        Ok(RadialGrid {
            n_nodes,
            h: 1.0 / (n_nodes - 1) as f64,
            p_g,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn p_g(&self) -> f64 {
        self.p_g
    }

    /// Coordinate of node `j`; the last node is exactly 1.
    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        if j + 1 == self.n_nodes {
            1.0
        } else {
            j as f64 * self.h
        }
    }

    /// Distance from the axis, `r_j + p_g`.
    #[inline]
    pub fn rho(&self, j: usize) -> f64 {
        self.r(j) + self.p_g
    }

    /// `rho` at the half-node between `j` and `j + 1`.
    #[inline]
    pub fn rho_half(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h + self.p_g
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|j| self.r(j)).collect()
    }

    /// Samples `f(r)` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n_nodes).map(|j| f(self.r(j))).collect()
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        ((r / self.h).round().max(0.0) as usize).min(self.n_nodes - 1)
    }

    pub(crate) fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() == self.n_nodes {
            Ok(())
        } else {
            Err(Error::Alignment {
                expected: self.n_nodes,
                got: values.len(),
            })
        }
    }

    /// Second-order nodal first derivative: central inside, one-sided at the ends.
    pub fn derivative(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check(values)?;
        let n = self.n_nodes;
        let h = self.h;
        let mut d = vec![0.0; n];
        d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
        for j in 1..n - 1 {
            d[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
        }
        d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
        Ok(d)
    }
}

/// How nodal viscosity is carried to half-nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HalfNodeAverage {
    #[default]
    Arithmetic,
    Harmonic,
}

impl HalfNodeAverage {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            HalfNodeAverage::Arithmetic => 0.5 * (a + b),
            HalfNodeAverage::Harmonic => 2.0 * a * b / (a + b),
        }
    }
}

#[cfg(test)]
thread_local! {
    /// Mutation switch for tests: flips the sign of the curvature term.
    pub(crate) static MUTATE_SWIRL: std::cell::Cell<bool> = const { std::cell::Cell::new(false) };
}

/// Shear measure `dv/dr - v/rho` at half-node `j + 1/2`.
#[inline]
pub(crate) fn theta_shear_half(grid: &RadialGrid, v: &[f64], j: usize) -> f64 {
    let curvature = 0.5 * (v[j] + v[j + 1]) / grid.rho_half(j);
    #[cfg(test)]
    if MUTATE_SWIRL.with(|m| m.get()) {
        return (v[j + 1] - v[j]) / grid.h + curvature;
    }
    (v[j + 1] - v[j]) / grid.h - curvature
}

/// Swirl operator with viscosity already given on the `n - 1` half-nodes.
pub(crate) fn div_theta_half_into(grid: &RadialGrid, mu_half: &[f64], v: &[f64], out: &mut [f64]) {
    let n = grid.n_nodes;
    let h = grid.h;
    let flux = |j: usize| {
        let rho = grid.rho_half(j);
        rho * rho * mu_half[j] * theta_shear_half(grid, v, j)
    };
    let mut left = flux(0);
    for j in 1..n - 1 {
        let right = flux(j);
        let rho = grid.rho(j);
        out[j] = (right - left) / (h * rho * rho);
        left = right;
    }
}

/// Axial/diffusion operator with a half-node coefficient.
pub(crate) fn div_axial_half_into(grid: &RadialGrid, coef_half: &[f64], w: &[f64], out: &mut [f64]) {
    let n = grid.n_nodes;
    let h = grid.h;
    let flux = |j: usize| grid.rho_half(j) * coef_half[j] * (w[j + 1] - w[j]) / h;
    let mut left = flux(0);
    for j in 1..n - 1 {
        let right = flux(j);
        out[j] = (right - left) / (h * grid.rho(j));
        left = right;
    }
}

fn half_average(grid: &RadialGrid, mu: &[f64], avg: HalfNodeAverage) -> Vec<f64> {
    (0..grid.n_nodes - 1)
        .map(|j| avg.apply(mu[j], mu[j + 1]))
        .collect()
}

/// Discrete swirl momentum operator from a nodal viscosity profile.
pub fn div_theta(grid: &RadialGrid, mu: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    div_theta_with(grid, mu, v, HalfNodeAverage::Arithmetic)
}

pub fn div_theta_with(
    grid: &RadialGrid,
    mu: &[f64],
    v: &[f64],
    avg: HalfNodeAverage,
) -> Result<Vec<f64>> {
    grid.check(mu)?;
    grid.check(v)?;
    let mu_half = half_average(grid, mu, avg);
    let mut out = vec![0.0; grid.n_nodes];
    div_theta_half_into(grid, &mu_half, v, &mut out);
    Ok(out)
}

/// Discrete axial momentum operator from a nodal viscosity profile.
pub fn div_z(grid: &RadialGrid, mu: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    div_z_with(grid, mu, w, HalfNodeAverage::Arithmetic)
}

pub fn div_z_with(
    grid: &RadialGrid,
    mu: &[f64],
    w: &[f64],
    avg: HalfNodeAverage,
) -> Result<Vec<f64>> {
    grid.check(mu)?;
    grid.check(w)?;
    let mu_half = half_average(grid, mu, avg);
    let mut out = vec![0.0; grid.n_nodes];
    div_axial_half_into(grid, &mu_half, w, &mut out);
    Ok(out)
}

/// Discrete cylindrical diffusion operator.
pub fn div_c(grid: &RadialGrid, c: &[f64]) -> Result<Vec<f64>> {
    grid.check(c)?;
    let ones = vec![1.0; grid.n_nodes - 1];
    let mut out = vec![0.0; grid.n_nodes];
    div_axial_half_into(grid, &ones, c, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const PG: f64 = 5.0;

    fn interior_max_err(values: &[f64], expected: f64) -> f64 {
        values[1..values.len() - 1]
            .iter()
            .map(|x| (x - expected).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn build() {
        let g = RadialGrid::new(5, PG).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(RadialGrid::new(201, PG).unwrap().h(), 0.005);
        assert!(RadialGrid::new(2, PG).is_err());
        assert!(RadialGrid::new(11, 0.0).is_err());
        assert_eq!(RadialGrid::new(201, PG).unwrap().r(200), 1.0);
    }

    #[test]
    fn alignment_error() {
        let g = RadialGrid::new(11, PG).unwrap();
        let short = vec![0.0; 10];
        let ok = vec![0.0; 11];
        assert!(matches!(
            div_theta(&g, &ok, &short),
            Err(Error::Alignment { expected: 11, got: 10 })
        ));
        assert!(div_z(&g, &short, &ok).is_err());
        assert!(div_c(&g, &short).is_err());
    }

    #[test]
    fn rigid_rotation_is_in_the_null_space() {
        let g = RadialGrid::new(41, PG).unwrap();
        let v = g.sample(|r| r + PG);
        let mu = g.sample(|r| 1.0 + 3.0 * r * r);
        let out = div_theta(&g, &mu, &v).unwrap();
        let err = interior_max_err(&out, 0.0);
        assert!(err < 1e-9, "{err}");
    }

    /// Max interior error on a manufactured profile at n and 2n-1 nodes.
    fn refine(
        op: impl Fn(&RadialGrid, &[f64]) -> Vec<f64>,
        profile: impl Fn(f64) -> f64,
        expected: f64,
    ) -> (f64, f64) {
        let errs: Vec<f64> = [41usize, 81]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(n, PG).unwrap();
                let f = g.sample(&profile);
                interior_max_err(&op(&g, &f), expected)
            })
            .collect();
        (errs[0], errs[1])
    }

    fn unit_mu(g: &RadialGrid) -> Vec<f64> {
        vec![1.0; g.n_nodes()]
    }

    #[test]
    fn div_theta_manufactured() {
        let op = |g: &RadialGrid, v: &[f64]| div_theta(g, &unit_mu(g), v).unwrap();
        // potential vortex
        let (e1, e2) = refine(op, |r| 1.0 / (r + PG), 0.0);
        assert!(e1 < 1e-6, "{e1} {e2}");
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        // rho^2 -> 3, close to exact
        let (e1, e2) = refine(op, |r| (r + PG).powi(2), 3.0);
        assert!(e1.max(e2) < 1e-4, "{e1} {e2}");
    }

    #[test]
    fn div_z_and_div_c_manufactured() {
        let opz = |g: &RadialGrid, w: &[f64]| div_z(g, &unit_mu(g), w).unwrap();
        let opc = |g: &RadialGrid, c: &[f64]| div_c(g, c).unwrap();

        let g = RadialGrid::new(21, PG).unwrap();
        let constant = vec![0.1; 21];
        assert_eq!(interior_max_err(&div_c(&g, &constant).unwrap(), 0.0), 0.0);
        assert_eq!(interior_max_err(&opz(&g, &constant), 0.0), 0.0);

        for op in [&opz as &dyn Fn(&RadialGrid, &[f64]) -> Vec<f64>, &opc] {
            let (e1, e2) = refine(op, |r| (r + PG).ln(), 0.0);
            let ratio = e1 / e2;
            assert!(e1 < 1e-5);
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
            // the quadratic is reproduced exactly by the flux form
            let (e1, _) = refine(op, |r| (r + PG).powi(2), 4.0);
            assert!(e1 < 1e-10, "{e1}");
        }
    }

    #[test]
    fn derivative_second_order() {
        let errs: Vec<f64> = [21usize, 41]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(n, PG).unwrap();
                let d = g.derivative(&g.sample(|r| (2.0 * r).sin())).unwrap();
                g.nodes()
                    .iter()
                    .zip(&d)
                    .map(|(r, d)| (d - 2.0 * (2.0 * r).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn harmonic_average_policy() {
        assert_abs_diff_eq!(HalfNodeAverage::Harmonic.apply(1.0, 3.0), 1.5);
        assert_abs_diff_eq!(HalfNodeAverage::Arithmetic.apply(1.0, 3.0), 2.0);
    }

    proptest! {
        /// Weighted sums of the operator telescope to the two boundary fluxes.
        #[test]
        fn discrete_conservation(
            v in prop::collection::vec(-2.0..2.0f64, 17),
            mu in prop::collection::vec(0.1..20.0f64, 17),
        ) {
            let g = RadialGrid::new(17, PG).unwrap();
            let n = g.n_nodes();
            let h = g.h();

            let out = div_theta(&g, &mu, &v).unwrap();
            let lhs: f64 = (1..n - 1).map(|j| out[j] * g.rho(j).powi(2) * h).sum();
            let flux = |j: usize| {
                let rho = g.rho_half(j);
                rho * rho * 0.5 * (mu[j] + mu[j + 1]) * theta_shear_half(&g, &v, j)
            };
            let rhs = flux(n - 2) - flux(0);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));

            let out = div_z(&g, &mu, &v).unwrap();
            let lhs: f64 = (1..n - 1).map(|j| out[j] * g.rho(j) * h).sum();
            let flux = |j: usize| g.rho_half(j) * 0.5 * (mu[j] + mu[j + 1]) * (v[j + 1] - v[j]) / h;
            let rhs = flux(n - 2) - flux(0);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
