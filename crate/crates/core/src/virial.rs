//! Virial weights, scaling schedules, the functionals `J` and `I`, and their
//! exact time-derivative budgets.
//!
//! Base weight `φ(x) = (2/π) arctan(eˣ)` with `φ'(x) = sech(x)/π`. Scaled
//! forms are `φ_s(x) = s φ(x/s)` and `ϕ_s(x) = φ'(x/s)`, so the m-th
//! derivative of `ϕ_s` equals the (m+1)-th derivative of `φ_s`.
//!
//! Scaling schedule: `λ1 = t^p1 / ln^q1 t`, `λ2 = λ1^p2`, `η = t^r1 ln^r2 t`.
//!
//! ```text
//! J(t) = (1/η) ∫ v φ_a(x/λ1) ϕ_b(x/λ2) dx
//! I(t) = (θ/2η) ∫ v² φ_l(x/λ1) dx + (μ/η) Im ∫ u ū_x φ_l(x/λ1) dx
//! ```

use std::f64::consts::{FRAC_2_PI, PI};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs, FieldState, ModelParams};
use crate::waves::sech;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Phi,
    DPhi,
    D2Phi,
    D3Phi,
    D4Phi,
}

impl WeightKind {
    fn order(self) -> i32 {
        match self {
            Self::Phi => 0,
            Self::DPhi => 1,
            Self::D2Phi => 2,
            Self::D3Phi => 3,
            Self::D4Phi => 4,
        }
    }
}

/// Unscaled `φ` and its derivatives.
pub fn base_weight(kind: WeightKind, x: f64) -> f64 {
    match kind {
        WeightKind::Phi => {
            // Reflection form keeps φ(x) + φ(−x) = 1 to the last bit.
            if x <= 0.0 {
                FRAC_2_PI * x.exp().atan()
            } else {
                1.0 - FRAC_2_PI * (-x).exp().atan()
            }
        }
        WeightKind::DPhi => sech(x) / PI,
        WeightKind::D2Phi => -sech(x) * x.tanh() / PI,
        WeightKind::D3Phi => {
            let (s, t) = (sech(x), x.tanh());
            s * (t * t - s * s) / PI
        }
        WeightKind::D4Phi => {
            let (s, t) = (sech(x), x.tanh());
            s * t * (5.0 * s * s - t * t) / PI
        }
    }
}

/// The `kind`-th derivative of `φ_s(x) = s φ(x/s)`, i.e. `φ^{(m)}(x/s) s^{1−m}`.
pub fn weight(kind: WeightKind, scale: f64, x: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter { name: "scale", reason: format!("must be positive, got {scale}") });
    }
    Ok(scaled(kind, scale, x))
}

#[inline]
fn scaled(kind: WeightKind, s: f64, x: f64) -> f64 {
    base_weight(kind, x / s) * s.powi(1 - kind.order())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialConfig {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub r1: f64,
    pub r2: f64,
    pub a: f64,
    pub b: f64,
    pub l: f64,
    pub theta: f64,
    pub mu: f64,
    /// Ray exponent for moving-region runs.
    pub m: Option<f64>,
}

/// A violated constraint: the offending key and a message naming it.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: &'static str,
    pub message: String,
}

/// Tolerance for the equality constraints of the schedule.
pub const EQUALITY_TOL: f64 = 1e-12;

impl VirialConfig {
    /// Defaults `p1 = 1/2, p2 = 2, q1 = 1, a = b = 2, l = 1, θ = 1` and
    /// `μ = γθ/α` (0 when α = 0).
    pub fn defaults_for(params: &ModelParams) -> Self {
        let theta = 1.0;
        Self {
            p1: 0.5,
            p2: 2.0,
            q1: 1.0,
            r1: 0.5,
            r2: 2.0,
            a: 2.0,
            b: 2.0,
            l: 1.0,
            theta,
            mu: default_mu(params, theta),
            m: None,
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |key, message: String| out.push(Violation { key, message });
        let finite = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("q1", self.q1),
            ("r1", self.r1),
            ("r2", self.r2),
            ("a", self.a),
            ("b", self.b),
            ("l", self.l),
            ("theta", self.theta),
            ("mu", self.mu),
        ];
        for (key, x) in finite {
            if !x.is_finite() {
                push(key, format!("must be finite, got {x}"));
            }
        }
        if !(self.q1 > 0.0) {
            push("q1", format!("schedule: q1 > 0 violated (q1={})", self.q1));
        }
        if !(self.p2 > 1.0) {
            push("p2", format!("schedule: p2 > 1 violated (p2={})", self.p2));
        }
        if !((self.p1 + self.r1 - 1.0).abs() <= EQUALITY_TOL) {
            push("r1", format!("schedule: p1 + r1 = 1 violated (p1={}, r1={})", self.p1, self.r1));
        }
        if !((self.r2 - 1.0 - self.q1).abs() <= EQUALITY_TOL) {
            push("r2", format!("schedule: r2 = 1 + q1 violated (q1={}, r2={})", self.q1, self.r2));
        }
        let cap = 2.0 / (self.p2 + 2.0);
        if !(self.p1 > 0.0 && self.p1 <= cap) {
            push("p1", format!("window: 0<p1≤2/(p2+2) violated (p1={}, 2/(p2+2)={cap})", self.p1));
        }
        for (key, x) in [("a", self.a), ("b", self.b), ("l", self.l)] {
            if !(x > 0.0) {
                push(key, format!("weight scale {key} > 0 violated ({key}={x})"));
            }
        }
        if self.a > 0.0 && self.b > 0.0 && self.l > 0.0 && !(1.0 / self.a + 1.0 / self.b <= 1.0 / self.l) {
            push(
                "l",
                format!("1/a+1/b ≤ 1/l violated (1/a+1/b={}, 1/l={})", 1.0 / self.a + 1.0 / self.b, 1.0 / self.l),
            );
        }
        if !(self.theta > 0.0) {
            push("theta", format!("θ > 0 violated (theta={})", self.theta));
        }
        if let Some(m) = self.m {
            let cap = 1.0 - 0.5 * self.p1;
            if !(m > 0.0 && m < cap) {
                push("m", format!("ray speed: 0<m<1−p1/2 violated (m={m}, 1−p1/2={cap})"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidParameter { name: v.key, reason: v.message }),
        }
    }
}

pub fn default_mu(params: &ModelParams, theta: f64) -> f64 {
    if params.alpha == 0.0 {
        0.0
    } else {
        params.gamma * theta / params.alpha
    }
}

/// Schedule values and their logarithmic derivatives at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
    /// `λ1'/λ1 = p1/t − q1/(t ln t)`
    pub dlog_lambda1: f64,
    /// `λ2'/λ2 = p2 λ1'/λ1`
    pub dlog_lambda2: f64,
    /// `η'/η = r1/t + r2/(t ln t)`
    pub dlog_eta: f64,
}

pub fn scales(t: f64, cfg: &VirialConfig) -> Result<Scales> {
    if !(t > 1.0) {
        return Err(Error::TimeNotAfterOne(t));
    }
    let ln = t.ln();
    let lambda1 = t.powf(cfg.p1) / ln.powf(cfg.q1);
    let dlog_lambda1 = cfg.p1 / t - cfg.q1 / (t * ln);
    Ok(Scales {
        lambda1,
        lambda2: lambda1.powf(cfg.p2),
        eta: t.powf(cfg.r1) * ln.powf(cfg.r2),
        dlog_lambda1,
        dlog_lambda2: cfg.p2 * dlog_lambda1,
        dlog_eta: cfg.r1 / t + cfg.r2 / (t * ln),
    })
}

fn im_u_dux(state: &FieldState) -> Vec<f64> {
    let ux = state.du_dx();
    state.u.iter().zip(&ux).map(|(u, d)| (u * d.conj()).im).collect()
}

/// `J(t)`; with `ray_exponent = Some(m)` the weights are centred at `t^m`.
pub fn functional_j(state: &FieldState, cfg: &VirialConfig, ray_exponent: Option<f64>) -> Result<f64> {
    let sc = scales(state.t, cfg)?;
    let shift = ray_exponent.map_or(0.0, |m| state.t.powf(m));
    Ok(state.grid.integrate_with(|j, x| {
        let x = x - shift;
        state.v[j] * scaled(WeightKind::Phi, cfg.a, x / sc.lambda1) * scaled(WeightKind::DPhi, cfg.b, x / sc.lambda2)
    }) / sc.eta)
}

pub fn functional_i(state: &FieldState, cfg: &VirialConfig) -> Result<f64> {
    let sc = scales(state.t, cfg)?;
    let im = im_u_dux(state);
    Ok(state.grid.integrate_with(|j, x| {
        let w = scaled(WeightKind::Phi, cfg.l, x / sc.lambda1);
        (0.5 * cfg.theta * state.v[j] * state.v[j] + cfg.mu * im[j]) * w
    }) / sc.eta)
}

/// Pointwise `Im(u ū_x)`, exposed for the carrier check.
pub fn momentum_density(state: &FieldState) -> Vec<f64> {
    im_u_dux(state)
}

/// Terms of `dJ/dt` evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JTerms {
    pub j: f64,
    pub a1_parts: [f64; 8],
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl JTerms {
    pub fn a1(&self) -> f64 {
        crate::sum::sum(self.a1_parts)
    }

    pub fn total(&self) -> f64 {
        crate::sum::sum([self.a1(), self.a2, self.a3, self.a4])
    }

    /// `max(|A1|, |A2|, |A3|, |A4|)`
    pub fn scale(&self) -> f64 {
        [self.a1(), self.a2, self.a3, self.a4].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

pub fn j_terms(state: &FieldState, params: &ModelParams, cfg: &VirialConfig) -> Result<JTerms> {
    use WeightKind::*;
    let sc = scales(state.t, cfg)?;
    let (l1, l2, eta) = (sc.lambda1, sc.lambda2, sc.eta);
    let g = &*state.grid;
    let gamma = params.gamma;
    let mut acc = [crate::sum::Neumaier::new(); 12];
    for (j, &x) in g.nodes().iter().enumerate() {
        let (y1, y2) = (x / l1, x / l2);
        let pa = [scaled(Phi, cfg.a, y1), scaled(DPhi, cfg.a, y1), scaled(D2Phi, cfg.a, y1), scaled(D3Phi, cfg.a, y1)];
        // ϕ_b and its derivatives are φ_b', φ_b'', ...
        let qb =
            [scaled(DPhi, cfg.b, y2), scaled(D2Phi, cfg.b, y2), scaled(D3Phi, cfg.b, y2), scaled(D4Phi, cfg.b, y2)];
        let v = state.v[j];
        let rho = state.u[j].norm_sqr();
        let vals = [
            -gamma / (l1 * eta) * rho * pa[1] * qb[0],
            -gamma / (eta * l2) * rho * pa[0] * qb[1],
            0.5 / (eta * l1) * v * v * pa[1] * qb[0],
            0.5 / (eta * l2) * v * v * pa[0] * qb[1],
            v * pa[3] * qb[0] / (eta * l1.powi(3)),
            3.0 * v * pa[2] * qb[1] / (eta * l1 * l1 * l2),
            3.0 * v * pa[1] * qb[2] / (eta * l1 * l2 * l2),
            v * pa[0] * qb[3] / (eta * l2.powi(3)),
            -sc.dlog_lambda1 / eta * v * pa[1] * y1 * qb[0],
            -sc.dlog_lambda2 / eta * v * pa[0] * y2 * qb[1],
            -sc.dlog_eta / eta * v * pa[0] * qb[0],
            v * pa[0] * qb[0] / eta,
        ];
        for (a, x) in acc.iter_mut().zip(vals) {
            a.add(x);
        }
    }
    let dx = g.dx();
    let q: Vec<f64> = acc.iter().map(|a| a.value() * dx).collect();
    let mut a1_parts = [0.0; 8];
    a1_parts.copy_from_slice(&q[..8]);
    Ok(JTerms { a1_parts, a2: q[8], a3: q[9], a4: q[10], j: q[11] })
}

/// `(1/η) ∫ v_t φ_a ϕ_b dx` with `v_t` from the semidiscrete right-hand side.
pub fn a1_direct(state: &FieldState, params: &ModelParams, cfg: &VirialConfig, dealias: bool) -> Result<f64> {
    let sc = scales(state.t, cfg)?;
    let tend = rhs(state, params, dealias)?;
    Ok(state.grid.integrate_with(|j, x| {
        tend.dv[j] * scaled(WeightKind::Phi, cfg.a, x / sc.lambda1) * scaled(WeightKind::DPhi, cfg.b, x / sc.lambda2)
    }) / sc.eta)
}

/// Terms of `dI/dt` evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ITerms {
    pub i: f64,
    pub b: [f64; 13],
}

impl ITerms {
    pub fn total(&self) -> f64 {
        crate::sum::sum(self.b)
    }

    pub fn scale(&self) -> f64 {
        self.b.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `|B1 + B10| / max(|B1|, |B10|)`, 0 when both vanish.
    pub fn cancellation(&self) -> f64 {
        let s = self.b[0].abs().max(self.b[9].abs());
        if s == 0.0 {
            0.0
        } else {
            (self.b[0] + self.b[9]).abs() / s
        }
    }
}

pub fn i_terms(state: &FieldState, params: &ModelParams, cfg: &VirialConfig) -> Result<ITerms> {
    use WeightKind::*;
    let sc = scales(state.t, cfg)?;
    let (l1, eta) = (sc.lambda1, sc.eta);
    let g = &*state.grid;
    let ModelParams { alpha, beta, gamma } = *params;
    let (theta, mu) = (cfg.theta, cfg.mu);
    let ux = state.du_dx();
    let vx = state.dv_dx();
    // Quadratures shared between terms.
    let mut acc = [crate::sum::Neumaier::new(); 14];
    for (j, &x) in g.nodes().iter().enumerate() {
        let y = x / l1;
        let w0 = scaled(Phi, cfg.l, y);
        let w1 = scaled(DPhi, cfg.l, y);
        let w3 = scaled(D3Phi, cfg.l, y);
        let v = state.v[j];
        let rho = state.u[j].norm_sqr();
        let im = (state.u[j] * ux[j].conj()).im;
        let vals = [
            vx[j] * rho * w0,
            v * rho * w1,
            v * v * v * w1,
            vx[j] * vx[j] * w1,
            v * v * w3,
            v * v * w1 * y,
            v * v * w0,
            im * w0,
            ux[j].norm_sqr() * w1,
            rho * rho * w1,
            rho * w3,
            im * w1 * y,
            0.0,
            0.0,
        ];
        for (a, x) in acc.iter_mut().zip(vals) {
            a.add(x);
        }
    }
    let dx = g.dx();
    let q: Vec<f64> = acc.iter().map(|a| a.value() * dx).collect();
    let (vxrho, vrho_w1, v3, vx2, v2_w3, v2_w1y, v2_w0, im_w0, ux2, rho2, rho_w3, im_w1y) =
        (q[0], q[1], q[2], q[3], q[4], q[5], q[6], q[7], q[8], q[9], q[10], q[11]);
    let b = [
        -theta * gamma / eta * vxrho,
        -theta * gamma / (eta * l1) * vrho_w1,
        theta / (3.0 * eta * l1) * v3,
        -3.0 * theta / (2.0 * eta * l1) * vx2,
        theta / (2.0 * eta * l1.powi(3)) * v2_w3,
        -theta * sc.dlog_lambda1 / (2.0 * eta) * v2_w1y,
        -theta * sc.dlog_eta / (2.0 * eta) * v2_w0,
        -mu * sc.dlog_eta / eta * im_w0,
        -2.0 * mu / (eta * l1) * ux2,
        alpha * mu / eta * vxrho,
        -mu * beta / (2.0 * eta * l1) * rho2,
        mu / (2.0 * eta * l1.powi(3)) * rho_w3,
        -mu * sc.dlog_lambda1 / eta * im_w1y,
    ];
    let i = (0.5 * theta * v2_w0 + mu * im_w0) / eta;
    Ok(ITerms { i, b })
}

/// Boundary flux of `I` through the periodic seam.
///
/// `φ_l` tends to `l` at +∞, so on a periodic box the weight jumps at the
/// seam and `dI/dt` picks up `−(W(hi) − W(lo))/η · (θF + μG)` evaluated there,
/// where `∂t(v²/2) + ∂x F = −γ v_x|u|²` and `∂t Im(uū_x) + ∂x G = α v_x|u|²`:
///
/// ```text
/// F = v v_xx − ½ v_x² + ⅓ v³ − γ v|u|²
/// G = Re(u ū_xx) − |u_x|² − ½ β|u|⁴
/// ```
///
/// None of the B-terms contain this contribution; it vanishes on the line.
pub fn i_seam_flux(state: &FieldState, params: &ModelParams, cfg: &VirialConfig) -> Result<f64> {
    let sc = scales(state.t, cfg)?;
    let g = &*state.grid;
    let w = |x: f64| scaled(WeightKind::Phi, cfg.l, x / sc.lambda1);
    let jump = w(g.upper()) - w(g.lower());
    let v = state.v[0];
    let u = state.u[0];
    let vx = state.dv_dx()[0];
    let vxx = g.derivative(&state.v, 2)?[0];
    let ux = state.du_dx()[0];
    let uxx = g.derivative_complex(&state.u, 2)?[0];
    let rho = u.norm_sqr();
    let f = v * vxx - 0.5 * vx * vx + v * v * v / 3.0 - params.gamma * v * rho;
    let gq = (u * uxx.conj()).re - ux.norm_sqr() - 0.5 * params.beta * rho * rho;
    Ok(-jump / sc.eta * (cfg.theta * f + cfg.mu * gq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetJ {
    pub terms: JTerms,
    pub djdt_fd: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetI {
    pub terms: ITerms,
    pub didt_fd: f64,
    pub residual: f64,
}

impl BudgetJ {
    pub fn assemble(mid: JTerms, j_prev: f64, j_next: f64, dts: f64) -> Self {
        let djdt_fd = (j_next - j_prev) / (2.0 * dts);
        Self { terms: mid, djdt_fd, residual: djdt_fd - mid.total() }
    }
}

impl BudgetI {
    pub fn assemble(mid: ITerms, i_prev: f64, i_next: f64, dts: f64) -> Self {
        let didt_fd = (i_next - i_prev) / (2.0 * dts);
        Self { terms: mid, didt_fd, residual: didt_fd - mid.total() }
    }
}

fn window_spacing(window: &[FieldState]) -> Result<f64> {
    if window.len() < 3 {
        return Err(Error::BadWindow(format!("need 3 consecutive samples, got {}", window.len())));
    }
    let d1 = window[1].t - window[0].t;
    let d2 = window[2].t - window[1].t;
    if !(d1 > 0.0) || (d1 - d2).abs() > 1e-9 * d1 {
        return Err(Error::BadWindow(format!("nonuniform spacing {d1} vs {d2}")));
    }
    Ok(0.5 * (d1 + d2))
}

/// Budget of `dJ/dt` at the middle of three equally spaced samples.
pub fn budget_j(window: &[FieldState], params: &ModelParams, cfg: &VirialConfig) -> Result<BudgetJ> {
    let dts = window_spacing(window)?;
    let prev = functional_j(&window[0], cfg, None)?;
    let next = functional_j(&window[2], cfg, None)?;
    Ok(BudgetJ::assemble(j_terms(&window[1], params, cfg)?, prev, next, dts))
}

pub fn budget_i(window: &[FieldState], params: &ModelParams, cfg: &VirialConfig) -> Result<BudgetI> {
    let dts = window_spacing(window)?;
    let prev = functional_i(&window[0], cfg)?;
    let next = functional_i(&window[2], cfg)?;
    Ok(BudgetI::assemble(i_terms(&window[1], params, cfg)?, prev, next, dts))
}

/// Integrands of the monitored time integrals at one state:
/// `pj = (1/ηλ1) ∫ (v² + |u|²) φ_a'(x/λ1) ϕ_b(x/λ2)`,
/// `pi = (1/ηλ1) ∫ (|u_x|² + v_x²) φ_l'(x/λ1)` and the sign-indefinite
/// `open = (1/ηλ1) ∫ (v²/4 − γ|u|²) φ_a'(x/λ1) ϕ_b(x/λ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecayIntegrands {
    pub pj: f64,
    pub pi: f64,
    pub open: f64,
}

pub fn decay_integrands(state: &FieldState, params: &ModelParams, cfg: &VirialConfig) -> Result<DecayIntegrands> {
    use WeightKind::*;
    let sc = scales(state.t, cfg)?;
    let norm = 1.0 / (sc.eta * sc.lambda1);
    let ux = state.du_dx();
    let vx = state.dv_dx();
    let g = &*state.grid;
    let mut pj = crate::sum::Neumaier::new();
    let mut pi = crate::sum::Neumaier::new();
    let mut open = crate::sum::Neumaier::new();
    for (j, &x) in g.nodes().iter().enumerate() {
        let w_ab = scaled(DPhi, cfg.a, x / sc.lambda1) * scaled(DPhi, cfg.b, x / sc.lambda2);
        let w_l = scaled(DPhi, cfg.l, x / sc.lambda1);
        let v2 = state.v[j] * state.v[j];
        let rho = state.u[j].norm_sqr();
        pj.add((v2 + rho) * w_ab);
        open.add((0.25 * v2 - params.gamma * rho) * w_ab);
        pi.add((ux[j].norm_sqr() + vx[j] * vx[j]) * w_l);
    }
    let s = norm * g.dx();
    Ok(DecayIntegrands { pj: s * pj.value(), pi: s * pi.value(), open: s * open.value() })
}

/// For each unit cell `[n, n+1]`, `sup φ_l'(x/λ1) / (e^{1/(lλ1)} · inf φ_l'(x/λ1))`;
/// returns the largest ratio (≤ 1 means the comparability bound holds).
pub fn weight_comparability_check(l: f64, lambda1: f64, cells: RangeInclusive<i64>) -> Result<f64> {
    if !(lambda1 > 0.0) || !(l > 0.0) {
        return Err(Error::InvalidParameter { name: "lambda1", reason: "l and λ1 must be positive".into() });
    }
    let s = l * lambda1;
    // ln sech(y) = −|y| + ln 2 − ln(1 + e^{−2|y|}); the linear parts are
    // combined exactly so that rounding cannot push the ratio above 1.
    let tail = |y: f64| (-2.0 * y).exp().ln_1p();
    let mut worst = f64::NEG_INFINITY;
    for n in cells {
        // sup at the endpoint nearer the origin, inf at the farther one.
        let (near, far) = if n >= 0 { (n, n + 1) } else { (-(n + 1), -n) };
        let log_ratio = tail(far as f64 / s) - tail(near as f64 / s);
        worst = worst.max(log_ratio.exp());
    }
    Ok(worst)
}

/// Values of the weight on the sample points, used by tests and figures.
pub fn sample_weight(kind: WeightKind, scale: f64, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| scaled(kind, scale, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn weight_values_at_origin() {
        assert!((base_weight(WeightKind::Phi, 0.0) - 0.5).abs() < 1e-16);
        assert!((base_weight(WeightKind::DPhi, 0.0) - 1.0 / PI).abs() < 1e-16);
        assert!((base_weight(WeightKind::DPhi, 0.0) - 1.0 / std::f64::consts::PI).abs() < 1e-16);
        assert!(weight(WeightKind::Phi, 0.0, 1.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        use WeightKind::*;
        let kinds = [Phi, DPhi, D2Phi, D3Phi, D4Phi];
        let h = 1e-4;
        for pair in kinds.windows(2) {
            for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
                let fd = (base_weight(pair[0], x + h) - base_weight(pair[0], x - h)) / (2.0 * h);
                assert!((fd - base_weight(pair[1], x)).abs() < 1e-8, "{pair:?} at {x}");
            }
        }
        // Scaled forms: d/dx [s φ(x/s)] = φ'(x/s).
        let s = 2.5;
        for &x in &[-1.0, 0.3, 4.0] {
            let fd = (weight(Phi, s, x + h).unwrap() - weight(Phi, s, x - h).unwrap()) / (2.0 * h);
            assert!((fd - weight(DPhi, s, x).unwrap()).abs() < 1e-8);
            let fd = (weight(D2Phi, s, x + h).unwrap() - weight(D2Phi, s, x - h).unwrap()) / (2.0 * h);
            assert!((fd - weight(D3Phi, s, x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn scales_at_e() {
        let cfg = VirialConfig::defaults_for(&ModelParams::new(-1.0, 1.0, -1.0).unwrap());
        let s = scales(std::f64::consts::E, &cfg).unwrap();
        let se = std::f64::consts::E.sqrt();
        assert!((s.lambda1 - se).abs() < 1e-14);
        assert!((s.lambda2 - std::f64::consts::E).abs() < 1e-14);
        assert!((s.eta - se).abs() < 1e-14);
        assert_eq!(scales(1.0, &cfg).unwrap_err(), Error::TimeNotAfterOne(1.0));
    }

    #[test]
    fn log_derivative_of_lambda1() {
        let cfg = VirialConfig::defaults_for(&ModelParams::new(-1.0, 1.0, -1.0).unwrap());
        // Closed form checked against a centred difference in ln t.
        let t = 1e6;
        let s = scales(t, &cfg).unwrap();
        let h = 1e-4;
        let fd = ((scales(t * (1.0 + h), &cfg).unwrap().lambda1.ln()
            - scales(t * (1.0 - h), &cfg).unwrap().lambda1.ln())
            / (2.0 * h * t))
            / 1.0;
        assert!((fd - s.dlog_lambda1).abs() < 1e-6 * s.dlog_lambda1.abs());
        assert!((s.dlog_lambda1 * t - (0.5 - 1.0 / t.ln())).abs() < 1e-12);
        // The log correction only becomes negligible for very large t.
        let t = 1e100;
        let s = scales(t, &cfg).unwrap();
        assert!((s.dlog_lambda1 * t / 0.5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = VirialConfig::defaults_for(&ModelParams::new(-1.0, 1.0, -0.5).unwrap());
        assert!(cfg.violations().is_empty(), "{:?}", cfg.violations());
        assert_eq!(cfg.mu, 0.5);
        let zero_alpha = VirialConfig::defaults_for(&ModelParams::new(0.0, 1.0, -0.5).unwrap());
        assert_eq!(zero_alpha.mu, 0.0);
    }

    #[test]
    fn constraint_messages_cite_their_source() {
        let base = VirialConfig::defaults_for(&ModelParams::new(-1.0, 1.0, -1.0).unwrap());
        let cfg = VirialConfig { p1: 0.7, r1: 0.3, ..base };
        let v = cfg.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("window:"));
        let cfg = VirialConfig { m: Some(0.8), ..base };
        assert!(cfg.violations()[0].message.contains("1−p1/2=0.75"));
        let cfg = VirialConfig { a: 1.0, ..base };
        assert!(cfg.violations()[0].message.contains("1/a+1/b"));
    }

    #[test]
    fn functionals_vanish_on_zero_state() {
        let g = Grid::shared(128, 40.0, 0.0).unwrap();
        let s = FieldState::zeros(g, 3.0);
        let p = ModelParams::new(-1.0, 1.0, -1.0).unwrap();
        let cfg = VirialConfig::defaults_for(&p);
        assert_eq!(functional_j(&s, &cfg, None).unwrap(), 0.0);
        assert_eq!(functional_i(&s, &cfg).unwrap(), 0.0);
        let jt = j_terms(&s, &p, &cfg).unwrap();
        assert_eq!(jt.total(), 0.0);
        let it = i_terms(&s, &p, &cfg).unwrap();
        assert_eq!(it.total(), 0.0);
    }

    #[test]
    fn carrier_momentum_density() {
        // u = e^{icx} f(x) with real f: Im(u ū_x) = −c f².
        let g = Grid::shared(1024, 60.0, 0.0).unwrap();
        let c = 1.7;
        let f = |x: f64| 1.0 / x.cosh();
        let u = g.sample_complex(|x| Complex64::from_polar(f(x), c * x));
        let s = FieldState::new(g.clone(), u, vec![0.0; 1024], 2.0).unwrap();
        let m = momentum_density(&s);
        for (j, &x) in g.nodes().iter().enumerate() {
            assert!((m[j] + c * f(x) * f(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn comparability_single_cell() {
        // Cell [0, 1]: sup at 0, inf at 1/(lλ1).
        let (l, lam) = (1.0, 2.0);
        let r = weight_comparability_check(l, lam, 0..=0).unwrap();
        let sup = base_weight(WeightKind::DPhi, 0.0);
        let inf = base_weight(WeightKind::DPhi, 1.0 / (l * lam));
        let expect = sup / ((1.0 / (l * lam)).exp() * inf);
        assert!((r - expect).abs() < 1e-14);
        assert!(r <= 1.0);
    }
}
