//! Solitary waves.
//!
//! The explicit pair
//!
//! ```text
//! φ(x) = √(2c*(1+6α)) sech(√c* x),   ψ(x) = 12c* sech²(√c* x)
//! ```
//!
//! travels at `c = 4c* − α(1+6α)/12`. Substituting
//! `u = e^{iωt} e^{i(c/2)(x−ct)} φ(x−ct)`, `v = ψ(x−ct)` into the system shows
//! the pair is exact iff `β = −1`, `γ = α/2` and `ω = c* + c²/4`. The carrier
//! wavenumber must be `c/2` (half the speed), since the Schrödinger group
//! velocity is twice the carrier wavenumber.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{FieldState, ModelParams};

/// Overflow-free `sech`.
#[inline]
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitaryWaveParams {
    pub c_star: f64,
    pub alpha: f64,
    pub x0: f64,
}

impl SolitaryWaveParams {
    pub fn new(c_star: f64, alpha: f64, x0: f64) -> Result<Self> {
        if !(c_star > 0.0 && c_star.is_finite()) {
            return Err(Error::InvalidParameter { name: "c_star", reason: format!("must be positive, got {c_star}") });
        }
        if !(alpha > -1.0 / 6.0 && alpha < 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in (-1/6, 0), got {alpha}"),
            });
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter { name: "x0", reason: "must be finite".into() });
        }
        Ok(Self { c_star, alpha, x0 })
    }

    pub fn speed(&self) -> f64 {
        4.0 * self.c_star - self.alpha * (1.0 + 6.0 * self.alpha) / 12.0
    }

    pub fn carrier(&self) -> f64 {
        0.5 * self.speed()
    }

    pub fn omega(&self) -> f64 {
        let c = self.speed();
        self.c_star + 0.25 * c * c
    }

    /// The (α, β, γ) for which the explicit profile is an exact solution.
    pub fn model_params(&self) -> ModelParams {
        ModelParams { alpha: self.alpha, beta: -1.0, gamma: 0.5 * self.alpha }
    }
}

pub fn explicit_profile(p: &SolitaryWaveParams, x: f64) -> (f64, f64) {
    let s = sech(p.c_star.sqrt() * x);
    ((2.0 * p.c_star * (1.0 + 6.0 * p.alpha)).sqrt() * s, 12.0 * p.c_star * s * s)
}

const BOUNDARY_TOL: f64 = 1e-14;

fn boundary_check(u: &[Complex64], v: &[f64]) -> Result<()> {
    let n = u.len();
    let edge = u[0].norm().max(u[n - 1].norm()).max(v[0].abs()).max(v[n - 1].abs());
    if edge >= BOUNDARY_TOL {
        return Err(Error::ProfileAtBoundary(edge));
    }
    Ok(())
}

/// `u0 = e^{i(c/2)(x−x0)} φ(x−x0)`, `v0 = ψ(x−x0)` at t = 0.
pub fn solitary_initial_data(p: &SolitaryWaveParams, grid: Arc<Grid>) -> Result<FieldState> {
    let k = p.carrier();
    let u = grid.sample_complex(|x| {
        let (phi, _) = explicit_profile(p, x - p.x0);
        Complex64::from_polar(phi, k * (x - p.x0))
    });
    let v = grid.sample(|x| explicit_profile(p, x - p.x0).1);
    boundary_check(&u, &v)?;
    FieldState::new(grid, u, v, 0.0)
}

/// Pure KdV soliton `v = 12c sech²(√c (x−x0))`, `u = 0`, speed `4c`.
pub fn kdv_soliton(c: f64, x0: f64, grid: Arc<Grid>) -> Result<FieldState> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter { name: "c", reason: format!("must be positive, got {c}") });
    }
    let v = grid.sample(|x| {
        let s = sech(c.sqrt() * (x - x0));
        12.0 * c * s * s
    });
    let u = vec![Complex64::new(0.0, 0.0); grid.n()];
    boundary_check(&u, &v)?;
    FieldState::new(grid, u, v, 0.0)
}

/// Analytic `(∂t u, ∂t v)` of the travelling wave at t = 0.
pub fn ansatz_time_derivative(p: &SolitaryWaveParams, grid: &Grid) -> (Vec<Complex64>, Vec<f64>) {
    let c = p.speed();
    let k = p.carrier();
    let w = p.omega();
    let r = p.c_star.sqrt();
    let du = grid.sample_complex(|x| {
        let xi = x - p.x0;
        let (phi, _) = explicit_profile(p, xi);
        let dphi = -r * phi * (r * xi).tanh();
        Complex64::from_polar(1.0, k * xi) * Complex64::new(-c * dphi, (w - k * c) * phi)
    });
    let dv = grid.sample(|x| {
        let xi = x - p.x0;
        let (_, psi) = explicit_profile(p, xi);
        let dpsi = -2.0 * r * psi * (r * xi).tanh();
        -c * dpsi
    });
    (du, dv)
}

/// Sub-grid location of the maximum of `f` by three-point parabolic
/// interpolation (periodic neighbours).
pub fn locate_peak(grid: &Grid, f: &[f64]) -> f64 {
    let n = f.len();
    let (j, _) =
        f.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bj, bv), (j, &x)| if x > bv { (j, x) } else { (bj, bv) });
    let fm = f[(j + n - 1) % n];
    let f0 = f[j];
    let fp = f[(j + 1) % n];
    let denom = fm - 2.0 * f0 + fp;
    let delta = if denom != 0.0 { 0.5 * (fm - fp) / denom } else { 0.0 };
    grid.nodes()[j] + delta * grid.dx()
}

/// Map `x` into `[lower, upper)` of the periodic box.
pub fn wrap_into_box(grid: &Grid, x: f64) -> f64 {
    grid.lower() + (x - grid.lower()).rem_euclid(grid.length())
}

/// Signed periodic distance `a − b`, in `[−L/2, L/2)`.
pub fn periodic_offset(grid: &Grid, a: f64, b: f64) -> f64 {
    let l = grid.length();
    (a - b + 0.5 * l).rem_euclid(l) - 0.5 * l
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

struct Stationary<'a> {
    grid: &'a Grid,
    params: ModelParams,
    /// Decay rate squared of φ: ω − c²/4.
    kappa: f64,
    c: f64,
}

impl Stationary<'_> {
    fn nonlinear(&self, phi: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ModelParams { alpha, beta, gamma } = self.params;
        let n1 = phi.iter().zip(psi).map(|(f, s)| -alpha * f * s - beta * f * f * f).collect();
        let n2 = phi.iter().zip(psi).map(|(f, s)| 0.5 * s * s - gamma * f * f).collect();
        (n1, n2)
    }

    /// `(−∂² + m) f`.
    fn apply_linear(&self, f: &[f64], m: f64) -> Vec<f64> {
        let mut spec = self.grid.forward_real(f);
        for (z, &k) in spec.iter_mut().zip(self.grid.wavenumbers()) {
            *z *= k * k + m;
        }
        self.grid.inverse_to_real(spec)
    }

    fn residual(&self, phi: &[f64], psi: &[f64]) -> f64 {
        let (n1, n2) = self.nonlinear(phi, psi);
        let l1 = self.apply_linear(phi, self.kappa);
        let l2 = self.apply_linear(psi, self.c);
        let r1 = l1.iter().zip(&n1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let r2 = l2.iter().zip(&n2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r1.max(r2)
    }

    /// One renormalized fixed-point update of a component.
    fn update(&self, f: &[f64], nl: &[f64], m: f64) -> Result<Vec<f64>> {
        let f_hat = self.grid.forward_real(f);
        let n_hat = self.grid.forward_real(nl);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((a, b), &k) in f_hat.iter().zip(&n_hat).zip(self.grid.wavenumbers()) {
            num += (k * k + m) * a.norm_sqr();
            den += (b * a.conj()).re;
        }
        if !(den > 0.0) || !(num > 0.0) {
            return Err(Error::DegenerateSeed("stabilizing factor undefined (nonpositive inner product)"));
        }
        let factor = (num / den).powi(2);
        let spec: Vec<Complex64> =
            n_hat.iter().zip(self.grid.wavenumbers()).map(|(b, &k)| b * (factor / (k * k + m))).collect();
        Ok(self.grid.inverse_to_real(spec))
    }
}

/// Renormalized (Petviashvili-type) iteration for the real profile pair
/// solving
///
/// ```text
/// −φ'' + (ω − c²/4) φ = −α φψ − β φ³
/// −ψ'' + c ψ        = ½ ψ² − γ φ²
/// ```
///
/// The returned residual is the max-norm defect of both equations.
pub fn ground_state_solve(
    params: &ModelParams,
    c: f64,
    omega: f64,
    grid: &Grid,
    seed: (&[f64], &[f64]),
    tol: f64,
    max_iter: usize,
) -> Result<GroundState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must be positive, got {tol}") });
    }
    grid.check_len(seed.0.len())?;
    grid.check_len(seed.1.len())?;
    let kappa = omega - 0.25 * c * c;
    if !(kappa > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("need c > 0 and ω − c²/4 > 0 for localized profiles (c = {c}, ω = {omega})"),
        });
    }
    let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>();
    if norm(seed.0) == 0.0 || norm(seed.1) == 0.0 {
        return Err(Error::DegenerateSeed("zero seed"));
    }
    let sys = Stationary { grid, params: *params, kappa, c };
    let mut phi = seed.0.to_vec();
    let mut psi = seed.1.to_vec();
    let mut residual = sys.residual(&phi, &psi);
    let mut iterations = 0;
    while residual > tol {
        if iterations == max_iter {
            return Err(Error::NotConverged { iterations, residual });
        }
        let (n1, n2) = sys.nonlinear(&phi, &psi);
        phi = sys.update(&phi, &n1, kappa)?;
        psi = sys.update(&psi, &n2, c)?;
        iterations += 1;
        residual = sys.residual(&phi, &psi);
        if !residual.is_finite() {
            return Err(Error::NotConverged { iterations, residual });
        }
    }
    Ok(GroundState { phi, psi, residual, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> SolitaryWaveParams {
        SolitaryWaveParams::new(1.0, -1.0 / 12.0, 0.0).unwrap()
    }

    #[test]
    fn profile_peak_values() {
        let (phi, psi) = explicit_profile(&reference(), 0.0);
        assert!((phi - 1.0).abs() < 1e-15);
        assert!((psi - 12.0).abs() < 1e-15);
        let (phi, psi) = explicit_profile(&reference(), 800.0);
        assert_eq!((phi, psi), (0.0, 0.0));
    }

    #[test]
    fn speed_relation() {
        assert!((reference().speed() - (4.0 + 1.0 / 288.0)).abs() < 1e-15);
        assert!((reference().speed() - 4.003_472_2).abs() < 1e-7);
    }

    #[test]
    fn validation() {
        assert!(SolitaryWaveParams::new(1.0, -0.2, 0.0).is_err());
        assert!(SolitaryWaveParams::new(1.0, 0.0, 0.0).is_err());
        assert!(SolitaryWaveParams::new(0.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn sech_is_stable_for_large_arguments() {
        assert_eq!(sech(1000.0), 0.0);
        assert!((sech(0.3) - 1.0 / 0.3f64.cosh()).abs() < 1e-15);
        assert!((sech(-40.0) - 1.0 / 40f64.cosh()).abs() < 1e-30);
    }

    #[test]
    fn initial_data_modulus_is_profile() {
        let g = Grid::shared(1024, 100.0, 0.0).unwrap();
        let s = solitary_initial_data(&reference(), g.clone()).unwrap();
        for (j, &x) in g.nodes().iter().enumerate() {
            assert!((s.u[j].norm() - explicit_profile(&reference(), x).0).abs() < 1e-15);
        }
        assert!((s.v[512] - 12.0).abs() < 1e-15);
    }

    #[test]
    fn narrow_box_is_rejected() {
        let g = Grid::shared(256, 20.0, 0.0).unwrap();
        assert!(matches!(solitary_initial_data(&reference(), g), Err(Error::ProfileAtBoundary(_))));
    }

    #[test]
    fn peak_interpolation_is_exact_for_parabola() {
        let g = Grid::new(64, 16.0, 0.0).unwrap();
        let f = g.sample(|x| 3.0 - (x - 0.37).powi(2));
        assert!((locate_peak(&g, &f) - 0.37).abs() < 1e-12);
    }

    #[test]
    fn periodic_helpers() {
        let g = Grid::new(64, 10.0, 0.0).unwrap();
        assert!((wrap_into_box(&g, 6.0) + 4.0).abs() < 1e-12);
        assert!((periodic_offset(&g, 4.5, -4.5) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_seed_is_rejected() {
        let g = Grid::new(64, 20.0, 0.0).unwrap();
        let p = reference();
        let z = vec![0.0; 64];
        let r = ground_state_solve(&p.model_params(), p.speed(), p.omega(), &g, (&z, &z), 1e-10, 10);
        assert!(matches!(r, Err(Error::DegenerateSeed(_))));
    }

    fn solver_setup() -> (SolitaryWaveParams, Grid, Vec<f64>, Vec<f64>) {
        let p = reference();
        let g = Grid::new(1024, 80.0, 0.0).unwrap();
        let phi = g.sample(|x| explicit_profile(&p, x).0);
        let psi = g.sample(|x| explicit_profile(&p, x).1);
        (p, g, phi, psi)
    }

    #[test]
    fn explicit_seed_is_already_a_solution() {
        let (p, g, phi, psi) = solver_setup();
        let gs = ground_state_solve(&p.model_params(), p.speed(), p.omega(), &g, (&phi, &psi), 1e-10, 5).unwrap();
        assert!(gs.iterations <= 5);
        assert!(gs.residual <= 1e-10);
    }

    #[test]
    fn gaussian_seed_converges_to_explicit_profile() {
        let (p, g, phi, psi) = solver_setup();
        let seed_phi = g.sample(|x| 1.3 * (-0.5 * x * x).exp());
        let seed_psi = g.sample(|x| 9.0 * (-x * x).exp());
        let gs = ground_state_solve(&p.model_params(), p.speed(), p.omega(), &g, (&seed_phi, &seed_psi), 1e-10, 500)
            .unwrap();
        let e1 = gs.phi.iter().zip(&phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let e2 = gs.psi.iter().zip(&psi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(e1 < 1e-8 && e2 < 1e-8, "{e1} {e2} after {}", gs.iterations);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let (p, g, _, _) = solver_setup();
        let seed_phi = g.sample(|x| 1.3 * (-0.5 * x * x).exp());
        let seed_psi = g.sample(|x| 9.0 * (-x * x).exp());
        let r = ground_state_solve(&p.model_params(), p.speed(), p.omega(), &g, (&seed_phi, &seed_psi), 1e-10, 1);
        assert!(matches!(r, Err(Error::NotConverged { iterations: 1, .. })));
    }

    #[test]
    fn explicit_wave_satisfies_the_system() {
        // The semidiscrete tendency of the initial data matches the analytic
        // time derivative of the travelling ansatz.
        let p = SolitaryWaveParams::new(1.0, -1.0 / 12.0, -20.0).unwrap();
        let g = Grid::shared(2048, 200.0, 0.0).unwrap();
        let s = solitary_initial_data(&p, g.clone()).unwrap();
        let t = crate::model::rhs(&s, &p.model_params(), true).unwrap();
        let (du, dv) = ansatz_time_derivative(&p, &g);
        let eu = t.du.iter().zip(&du).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let ev = t.dv.iter().zip(&dv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(eu < 1e-6 && ev < 1e-6, "{eu} {ev}");
    }
}
