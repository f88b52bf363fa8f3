//! The coupled system
//!
//! ```text
//! i u_t + u_xx = α u v + β u |u|²
//! v_t + v_xxx + v v_x = γ (|u|²)_x
//! ```
//!
//! written in tendency form `u_t = i u_xx − i α u v − i β |u|² u`,
//! `v_t = −v_xxx − ½ (v²)_x + γ (|u|²)_x`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Truncation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite, got {value}") });
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Both couplings negative: the regime in which local decay is proven.
    pub fn theorem_regime(&self) -> bool {
        self.alpha < 0.0 && self.gamma < 0.0
    }
}

/// Short wave `u` (complex) and long wave `v` (real) on a shared grid.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub grid: Arc<Grid>,
    pub u: Vec<Complex64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn new(grid: Arc<Grid>, u: Vec<Complex64>, v: Vec<f64>, t: f64) -> Result<Self> {
        grid.check_len(u.len())?;
        grid.check_len(v.len())?;
        Ok(Self { grid, u, v, t })
    }

    pub fn zeros(grid: Arc<Grid>, t: f64) -> Self {
        let n = grid.n();
        Self { grid, u: vec![Complex64::new(0.0, 0.0); n], v: vec![0.0; n], t }
    }

    pub fn check(&self) -> Result<()> {
        self.grid.check_len(self.u.len())?;
        self.grid.check_len(self.v.len())
    }

    pub fn density(&self) -> Vec<f64> {
        self.u.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn du_dx(&self) -> Vec<Complex64> {
        self.grid.derivative_complex(&self.u, 1).expect("state length checked")
    }

    pub fn dv_dx(&self) -> Vec<f64> {
        self.grid.derivative(&self.v, 1).expect("state length checked")
    }

    /// Circular shift of both fields by whole grid points.
    pub fn shifted(&self, points: usize) -> Self {
        let mut out = self.clone();
        out.u.rotate_right(points % self.u.len());
        out.v.rotate_right(points % self.v.len());
        out
    }
}

#[derive(Debug, Clone)]
pub struct Tendency {
    pub du: Vec<Complex64>,
    pub dv: Vec<f64>,
}

/// Semidiscrete right-hand side. With `dealias` the quadratic products
/// (`uv`, `v²`, `|u|²`) are truncated to the 2/3 band and the cubic
/// `|u|²u` to the 1/2 band.
pub fn rhs(state: &FieldState, params: &ModelParams, dealias: bool) -> Result<Tendency> {
    state.check()?;
    let grid = &*state.grid;
    let i = Complex64::new(0.0, 1.0);
    let quad = |spec: &mut [Complex64]| {
        if dealias {
            grid.truncate(spec, Truncation::TwoThirds);
        }
    };

    let mut u_hat = grid.forward_complex(&state.u);
    let mut uv: Vec<Complex64> = state.u.iter().zip(&state.v).map(|(u, &v)| u * v).collect();
    grid.forward_in_place(&mut uv);
    quad(&mut uv);
    let mut cubic: Vec<Complex64> = state.u.iter().map(|u| u * u.norm_sqr()).collect();
    grid.forward_in_place(&mut cubic);
    if dealias {
        grid.truncate(&mut cubic, Truncation::Half);
    }
    for (j, z) in u_hat.iter_mut().enumerate() {
        let k = grid.wavenumbers()[j];
        *z = -i * (k * k) * *z - i * params.alpha * uv[j] - i * params.beta * cubic[j];
    }
    let du = grid.inverse_to_complex(u_hat);

    // −v_xxx + ∂x(γ|u|² − ½v²)
    let mut v_hat = grid.forward_real(&state.v);
    let mut flux: Vec<Complex64> = state
        .u
        .iter()
        .zip(&state.v)
        .map(|(u, &v)| Complex64::new(params.gamma * u.norm_sqr() - 0.5 * v * v, 0.0))
        .collect();
    grid.forward_in_place(&mut flux);
    quad(&mut flux);
    for (j, z) in v_hat.iter_mut().enumerate() {
        let k = grid.odd_wavenumber(j);
        *z = i * (k * k * k) * *z + i * k * flux[j];
    }
    let dv = grid.inverse_to_real(v_hat);
    Ok(Tendency { du, dv })
}

/// `W = α v + β |u|²`; the nonlinear Schrödinger substep is `u ← u e^{−iWΔt}`.
pub fn nonlinear_phase_potential(state: &FieldState, params: &ModelParams) -> Vec<f64> {
    state.u.iter().zip(&state.v).map(|(u, &v)| params.alpha * v + params.beta * u.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, length: f64) -> Arc<Grid> {
        Grid::shared(n, length, 0.0).unwrap()
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let s = FieldState::zeros(grid(32, 10.0), 0.0);
        let p = ModelParams::new(-1.0, 1.0, -1.0).unwrap();
        let t = rhs(&s, &p, true).unwrap();
        assert!(t.du.iter().all(|z| z.norm() == 0.0));
        assert!(t.dv.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn plane_wave_tendency() {
        // u = e^{ikx}, v = 0, β = 1: du/dt = −i(k² + 1) u, dv/dt = γ ∂x(1) = 0.
        let g = grid(64, 2.0 * std::f64::consts::PI);
        let k = 3.0;
        let u = g.sample_complex(|x| Complex64::new(0.0, k * x).exp());
        let s = FieldState::new(g.clone(), u.clone(), vec![0.0; 64], 0.0).unwrap();
        let p = ModelParams::new(0.7, 1.0, -2.0).unwrap();
        for dealias in [false, true] {
            let t = rhs(&s, &p, dealias).unwrap();
            for (d, u) in t.du.iter().zip(&u) {
                let expect = Complex64::new(0.0, -(k * k + 1.0)) * u;
                assert!((d - expect).norm() < 1e-11);
            }
            assert!(t.dv.iter().all(|x| x.abs() < 1e-11));
        }
    }

    #[test]
    fn kdv_soliton_tendency_is_pure_translation() {
        // v = 12c sech²(√c x) satisfies v''' + v v' = 4c v'.
        let c: f64 = 1.0;
        let g = grid(2048, 80.0);
        let v = g.sample(|x| 12.0 * c / (c.sqrt() * x).cosh().powi(2));
        let s = FieldState::new(g.clone(), vec![Complex64::new(0.0, 0.0); 2048], v.clone(), 0.0).unwrap();
        let p = ModelParams::new(-1.0, 1.0, -3.0).unwrap();
        let t = rhs(&s, &p, true).unwrap();
        let vx = g.derivative(&v, 1).unwrap();
        let err = t.dv.iter().zip(&vx).map(|(d, vx)| (d + 4.0 * c * vx).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn phase_potential_examples() {
        let g = grid(16, 4.0);
        let s = FieldState::new(g.clone(), vec![Complex64::new(0.0, 0.0); 16], vec![1.0; 16], 0.0).unwrap();
        let w = nonlinear_phase_potential(&s, &ModelParams::new(-1.0, 5.0, 0.0).unwrap());
        assert!(w.iter().all(|&x| x == -1.0));
        let u = vec![Complex64::from_polar(1.0, 0.3); 16];
        let s = FieldState::new(g, u, vec![0.0; 16], 0.0).unwrap();
        let w = nonlinear_phase_potential(&s, &ModelParams::new(3.0, 2.0, 0.0).unwrap());
        assert!(w.iter().all(|&x| (x - 2.0).abs() < 1e-15));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = grid(16, 4.0);
        assert!(matches!(
            FieldState::new(g.clone(), vec![Complex64::new(0.0, 0.0); 8], vec![0.0; 16], 0.0),
            Err(Error::GridMismatch { .. })
        ));
        let mut s = FieldState::zeros(g, 0.0);
        s.v.pop();
        assert!(rhs(&s, &ModelParams::new(1.0, 1.0, 1.0).unwrap(), true).is_err());
    }

    #[test]
    fn regime_predicate() {
        assert!(ModelParams::new(-1.0, 0.0, -0.5).unwrap().theorem_regime());
        assert!(!ModelParams::new(1.0, 0.0, -0.5).unwrap().theorem_regime());
        assert!(!ModelParams::new(-1.0, 0.0, 0.0).unwrap().theorem_regime());
        assert!(ModelParams::new(f64::NAN, 0.0, 0.0).is_err());
    }
}
