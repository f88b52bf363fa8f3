//! The three invariants
//!
//! ```text
//! I1 = ∫ |u|²
//! I2 = ∫ αγ v|u|² − (α/6) v³ + (βγ/2)|u|⁴ + (α/2) v_x² + γ |u_x|²
//! I3 = ∫ α v² + 2γ Im(u ū_x)
//! ```

use serde::{Deserialize, Serialize};

use crate::model::{FieldState, ModelParams};

/// Division guard for relative drifts.
pub const DRIFT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedTriple {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl ConservedTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.i1, self.i2, self.i3]
    }
}

pub fn conserved_triple(state: &FieldState, params: &ModelParams) -> ConservedTriple {
    let g = &*state.grid;
    let ModelParams { alpha, beta, gamma } = *params;
    let ux = state.du_dx();
    let vx = state.dv_dx();
    let i1 = g.integrate_with(|j, _| state.u[j].norm_sqr());
    let i2 = g.integrate_with(|j, _| {
        let rho = state.u[j].norm_sqr();
        let v = state.v[j];
        alpha * gamma * v * rho - alpha / 6.0 * v * v * v
            + 0.5 * beta * gamma * rho * rho
            + 0.5 * alpha * vx[j] * vx[j]
            + gamma * ux[j].norm_sqr()
    });
    let i3 = g.integrate_with(|j, _| {
        let v = state.v[j];
        alpha * v * v + 2.0 * gamma * (state.u[j] * ux[j].conj()).im
    });
    ConservedTriple { i1, i2, i3 }
}

/// `max_t |I_k(t) − I_k(0)| / max(|I_k(0)|, floor)` for each invariant.
pub fn drift_report(series: &[ConservedTriple]) -> [f64; 3] {
    let Some(first) = series.first() else {
        return [0.0; 3];
    };
    let base = first.as_array();
    let mut out = [0.0f64; 3];
    for s in series {
        for (k, x) in s.as_array().iter().enumerate() {
            out[k] = out[k].max((x - base[k]).abs() / base[k].abs().max(DRIFT_FLOOR));
        }
    }
    out
}

/// A priori L² bound on v from I3:
/// `‖v‖² ≤ |I3(0)|/|α| + 2|γ|/|α| · ‖u0‖ · ‖u_x‖`. Returns (lhs, rhs).
pub fn v_norm_bound(state: &FieldState, params: &ModelParams, i3_initial: f64, u0_norm: f64) -> (f64, f64) {
    let g = &*state.grid;
    let lhs = g.integrate_with(|j, _| state.v[j] * state.v[j]);
    let ux = state.du_dx();
    let ux_norm = g.integrate_with(|j, _| ux[j].norm_sqr()).sqrt();
    let a = params.alpha.abs();
    let rhs = i3_initial.abs() / a + 2.0 * params.gamma.abs() / a * u0_norm * ux_norm;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn zero_state_has_zero_invariants() {
        let g = Grid::shared(32, 10.0, 0.0).unwrap();
        let s = FieldState::zeros(g, 0.0);
        let c = conserved_triple(&s, &ModelParams::new(-1.0, 1.0, -1.0).unwrap());
        assert_eq!(c.as_array(), [0.0; 3]);
    }

    #[test]
    fn kdv_soliton_i3() {
        // ∫ψ² = 144 c*² · 4/(3√c*) = 192 for c* = 1; I3 = α · 192.
        let g = Grid::shared(4096, 400.0, 0.0).unwrap();
        let v = g.sample(|x| 12.0 / x.cosh().powi(2));
        let s = FieldState::new(g, vec![Complex64::new(0.0, 0.0); 4096], v, 0.0).unwrap();
        let c = conserved_triple(&s, &ModelParams::new(-1.0, 0.3, 0.7).unwrap());
        assert!((c.i3 + 192.0).abs() < 1e-8, "{}", c.i3);
        assert_eq!(c.i1, 0.0);
    }

    #[test]
    fn real_u_gives_i3_from_v_alone() {
        let g = Grid::shared(256, 30.0, 0.0).unwrap();
        let u = g.sample_complex(|x| Complex64::new((-x * x).exp(), 0.0));
        let v = g.sample(|x| (0.5 * x).sin() * (-0.1 * x * x).exp());
        let s = FieldState::new(g.clone(), u, v.clone(), 0.0).unwrap();
        let p = ModelParams::new(-0.7, 1.0, -2.0).unwrap();
        let c = conserved_triple(&s, &p);
        let direct = -0.7 * g.integrate_with(|j, _| v[j] * v[j]);
        assert!((c.i3 - direct).abs() < 1e-14);
    }

    #[test]
    fn shift_invariance_of_i2() {
        let g = Grid::shared(256, 30.0, 0.0).unwrap();
        let u = g.sample_complex(|x| Complex64::new(0.0, 0.8 * x).exp() * (-x * x).exp());
        let v = g.sample(|x| 1.0 / (x - 1.0).cosh().powi(2));
        let s = FieldState::new(g, u, v, 0.0).unwrap();
        let p = ModelParams::new(-1.0, 1.0, -1.0).unwrap();
        let a = conserved_triple(&s, &p);
        let b = conserved_triple(&s.shifted(17), &p);
        assert!((a.i2 - b.i2).abs() <= 1e-13 * a.i2.abs().max(1.0));
    }

    #[test]
    fn drift_of_single_sample_is_zero() {
        let t = ConservedTriple { i1: 1.0, i2: -2.0, i3: 0.0 };
        assert_eq!(drift_report(&[t]), [0.0; 3]);
        let t2 = ConservedTriple { i1: 1.5, i2: -2.0, i3: 1e-13 };
        let d = drift_report(&[t, t2]);
        assert_eq!(d[0], 0.5);
        assert_eq!(d[1], 0.0);
        assert!((d[2] - 0.1).abs() < 1e-12);
    }
}
