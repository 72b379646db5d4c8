//! Reference solutions for verification: steady Couette and annular
//! Poiseuille flow of the Newtonian fluid, and a dense matrix exponential
//! for small linear systems.

use nalgebra::DMatrix;

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Largest dimension accepted by [`dense_propagator`].
pub const DENSE_LIMIT: usize = 64;

/// Steady swirl `v = a rho + b / rho` between a fixed inner and a moving outer wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouetteSolution {
    pub a_coef: f64,
    pub b_coef: f64,
    pub p_g: f64,
}

impl CouetteSolution {
    /// Velocity at `r` in `[0, 1]`.
    pub fn value(&self, r: f64) -> f64 {
        let rho = r + self.p_g;
        self.a_coef * rho + self.b_coef / rho
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.sample(|r| self.value(r))
    }
}

pub fn couette(wall_value: f64, p_g: f64) -> Result<CouetteSolution> {
    if !wall_value.is_finite() {
        return Err(Error::param("wall_value", "must be finite"));
    }
    if !(p_g > 0.0 && p_g.is_finite()) {
        return Err(Error::param("p_g", "must be positive"));
    }
    let (ri, ro) = (p_g, p_g + 1.0);
    let a = wall_value * ro / (ro * ro - ri * ri);
    Ok(CouetteSolution {
        a_coef: a,
        b_coef: -a * ri * ri,
        p_g,
    })
}

/// Steady axial flow under constant forcing `g` with `w = 0` on both walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoiseuilleSolution {
    /// `g * Re`
    pub g_eff: f64,
    pub p_g: f64,
}

impl PoiseuilleSolution {
    pub fn value(&self, r: f64) -> f64 {
        let (ri, ro) = (self.p_g, self.p_g + 1.0);
        let rho = r + self.p_g;
        0.25 * self.g_eff * (ro * ro - rho * rho + (ro * ro - ri * ri) * (rho / ro).ln() / (ro / ri).ln())
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.sample(|r| self.value(r))
    }

    /// Radius `r` of the velocity maximum.
    pub fn peak(&self) -> f64 {
        let (ri, ro) = (self.p_g, self.p_g + 1.0);
        ((ro * ro - ri * ri) / (2.0 * (ro / ri).ln())).sqrt() - self.p_g
    }
}

/// Solution of `(1/re) div_z(w) + g = 0`.
pub fn poiseuille_annulus(g: f64, re: f64, p_g: f64) -> Result<PoiseuilleSolution> {
    if !g.is_finite() {
        return Err(Error::param("gradient_g", "must be finite"));
    }
    if !(re > 0.0 && re.is_finite()) {
        return Err(Error::param("re", "must be positive"));
    }
    if !(p_g > 0.0 && p_g.is_finite()) {
        return Err(Error::param("p_g", "must be positive"));
    }
    Ok(PoiseuilleSolution { g_eff: g * re, p_g })
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `exp(dt * a)` by scaling and squaring with the degree-13 Padé approximant.
pub fn dense_propagator(a: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() || n > DENSE_LIMIT || n == 0 {
        return Err(Error::DenseSize(n.max(a.ncols())));
    }
    if !dt.is_finite() || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let m = a * dt;
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let m = m / 2f64.powi(s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let m2 = &m * &m;
    let m4 = &m2 * &m2;
    let m6 = &m4 * &m2;
    let inner_u = &m6 * (&m6 * b[13] + &m4 * b[11] + &m2 * b[9]) + &m6 * b[7] + &m4 * b[5] + &m2 * b[3] + &id * b[1];
    let u = &m * inner_u;
    let v = &m6 * (&m6 * b[12] + &m4 * b[10] + &m2 * b[8]) + &m6 * b[6] + &m4 * b[4] + &m2 * b[2] + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::SingularMatrix(0))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Dense copy of a band matrix.
pub fn to_dense(m: &BandMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.n(), m.n(), |i, j| m.get(i, j))
}

/// Linear concentration-diffusion operator `(1/pe) div_c` with a reflecting
/// inner wall and a homogeneous Dirichlet outer wall (last row zero).
pub fn diffusion_matrix(grid: &RadialGrid, pe: f64) -> BandMatrix {
    let n = grid.n_nodes();
    let h = grid.h();
    let mut m = BandMatrix::zeros(n, 1, 1);
    let k = 1.0 / pe;
    m.set(0, 0, -2.0 * k / (h * h));
    m.set(0, 1, 2.0 * k / (h * h));
    for j in 1..n - 1 {
        let scale = k / (h * h * grid.rho(j));
        let left = grid.rho_half(j - 1);
        let right = grid.rho_half(j);
        m.set(j, j - 1, scale * left);
        m.set(j, j, -scale * (left + right));
        m.set(j, j + 1, scale * right);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{div_c, div_theta, div_z};
    use crate::integrator::{integrate_fixed, IntegratorConfig, LinearOde};
    use approx::assert_abs_diff_eq;

    #[test]
    fn couette_coefficients() {
        let c = couette(2.0, 5.0).unwrap();
        assert_abs_diff_eq!(c.a_coef, 12.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.b_coef, -300.0 / 11.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.value(0.0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.value(1.0), 2.0, epsilon = 1e-14);
        let zero = couette(0.0, 5.0).unwrap();
        assert_eq!(zero.value(0.4), 0.0);
        assert!(couette(1.0, 0.0).is_err());
    }

    #[test]
    fn couette_is_in_the_discrete_null_space() {
        let c = couette(2.0, 5.0).unwrap();
        let errs: Vec<f64> = [41usize, 81]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(n, 5.0).unwrap();
                let out = div_theta(&g, &vec![1.0; n], &c.sample(&g)).unwrap();
                out.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            })
            .collect();
        assert!(errs[0] < 1e-5);
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn poiseuille_profile() {
        let p = poiseuille_annulus(1.0, 10.0, 5.0).unwrap();
        assert_abs_diff_eq!(p.value(0.0), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(p.value(1.0), 0.0, epsilon = 1e-13);
        let zero = poiseuille_annulus(0.0, 10.0, 5.0).unwrap();
        assert_eq!(zero.value(0.3), 0.0);

        let peak = p.peak();
        let d = 1e-6;
        let slope = (p.value(peak + d) - p.value(peak - d)) / (2.0 * d);
        assert!(slope.abs() < 1e-8);
        assert!(p.value(peak) > p.value(peak - 0.1) && p.value(peak) > p.value(peak + 0.1));
    }

    #[test]
    fn poiseuille_discrete_residual() {
        let p = poiseuille_annulus(1.0, 10.0, 5.0).unwrap();
        let errs: Vec<f64> = [41usize, 81]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(n, 5.0).unwrap();
                let dz = div_z(&g, &vec![1.0; n], &p.sample(&g)).unwrap();
                dz[1..n - 1]
                    .iter()
                    .fold(0.0f64, |m, x| m.max((x / 10.0 + 1.0).abs()))
            })
            .collect();
        assert!(errs[0] < 1e-4);
        let ratio = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn propagator_trivial_cases() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(dense_propagator(&z, 1.0).unwrap(), DMatrix::identity(4, 4));
        let d = DMatrix::<f64>::from_diagonal_element(3, 3, -1.0);
        let e = dense_propagator(&d, 1.0).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(e[(i, i)], (-1.0f64).exp(), epsilon = 1e-15);
        }
        assert!(matches!(
            dense_propagator(&DMatrix::zeros(65, 65), 1.0),
            Err(Error::DenseSize(65))
        ));
    }

    fn spd_negative(n: usize) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |i, j| (((i * 31 + j * 17) % 11) as f64 - 5.0) / 5.0);
        -(&b.transpose() * &b) - DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn propagator_matches_nalgebra_exp() {
        let a = spd_negative(8);
        for dt in [0.01, 1.0, 20.0] {
            let ours = dense_propagator(&a, dt).unwrap();
            let theirs = (&a * dt).exp();
            let scale = theirs.amax().max(1e-300);
            assert!((&ours - &theirs).amax() <= 1e-12 * scale.max(1.0), "dt {dt}");
        }
    }

    #[test]
    fn propagator_matches_fine_step_integration() {
        let n = 8;
        let a = spd_negative(n);
        let mut band = BandMatrix::zeros(n, n - 1, n - 1);
        for i in 0..n {
            for j in 0..n {
                band.set(i, j, a[(i, j)]);
            }
        }
        let u0: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let exact = dense_propagator(&a, 1.0).unwrap() * nalgebra::DVector::from_column_slice(&u0);
        let mut p = LinearOde { matrix: band };
        let u = integrate_fixed(&mut p, 0.0, &u0, 1.0, 20_000, &IntegratorConfig::default()).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(u[i], exact[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn diffusion_matrix_matches_operator() {
        let g = RadialGrid::new(21, 5.0).unwrap();
        let m = diffusion_matrix(&g, 4.0);
        let c = g.sample(|r| (2.0 * r).cos() + r);
        let y = m.mul_vec(&c);
        let d = div_c(&g, &c).unwrap();
        for j in 1..20 {
            assert_abs_diff_eq!(y[j], d[j] / 4.0, epsilon = 1e-12);
        }
        assert_eq!(y[20], 0.0);
    }
}
