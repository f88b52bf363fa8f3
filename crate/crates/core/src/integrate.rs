//! Time stepping by operator splitting.
//!
//! The linear flows (`i u_xx` for u, `−v_xxx` for v) are applied exactly in
//! transform space. The nonlinear flow is split once more: a pointwise phase
//! rotation of `u` by `W = αv + β|u|²` (exact, because `|u|` is invariant) and
//! one RK4 step for `v_t = ∂x(γ|u|² − ½v²)` with `|u|²` frozen. The Strang
//! composition is `L(h/2) U(h/2) V(h) U(h/2) L(h/2)`; the Lie composition is
//! `L(h) U(h) V(h)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Truncation};
use crate::model::{FieldState, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Strang,
    Lie,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strang" => Ok(Self::Strang),
            "lie" => Ok(Self::Lie),
            other => Err(format!("unknown scheme {other:?} (expected strang or lie)")),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Strang => "strang",
            Self::Lie => "lie",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub dt: f64,
    /// Fraction of the box length occupied by the sponge on each side.
    pub sponge_width: f64,
    pub sponge_strength: f64,
    pub dealias: bool,
    pub scheme: Scheme,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { dt: 1e-3, sponge_width: 0.0, sponge_strength: 0.0, dealias: true, scheme: Scheme::Strang }
    }
}

impl IntegratorOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive and finite, got {}", self.dt));
        }
        if !(0.0..=0.25).contains(&self.sponge_width) {
            return bad("sponge_width", format!("must lie in [0, 0.25], got {}", self.sponge_width));
        }
        if !(self.sponge_strength >= 0.0 && self.sponge_strength.is_finite()) {
            return bad("sponge_strength", format!("must be finite and nonnegative, got {}", self.sponge_strength));
        }
        if self.sponge_strength * self.dt > 1.0 {
            return bad(
                "sponge_strength",
                format!("strength·dt = {} exceeds 1; damping factor would change sign", self.sponge_strength * self.dt),
            );
        }
        Ok(())
    }

    pub fn sponge_enabled(&self) -> bool {
        self.sponge_width > 0.0 && self.sponge_strength > 0.0
    }
}

/// Raised-cosine damping rate, zero in the interior and `strength` at the box edge.
pub fn sponge_profile(grid: &Grid, width_fraction: f64, strength: f64) -> Vec<f64> {
    let w = width_fraction * grid.length();
    grid.nodes()
        .iter()
        .map(|&x| {
            if w <= 0.0 {
                return 0.0;
            }
            let depth = (grid.lower() + w - x).max(x - (grid.upper() - w)).max(0.0);
            let s = (0.5 * PI * (depth / w).min(1.0)).sin();
            strength * s * s
        })
        .collect()
}

/// Precomputed propagators for one (grid, params, options) triple.
#[derive(Debug, Clone)]
pub struct Integrator {
    grid: Arc<Grid>,
    params: ModelParams,
    opts: IntegratorOptions,
    nls_half: Vec<Complex64>,
    nls_full: Vec<Complex64>,
    airy_half: Vec<Complex64>,
    airy_full: Vec<Complex64>,
    damping: Option<Vec<f64>>,
}

impl Integrator {
    pub fn new(grid: Arc<Grid>, params: ModelParams, opts: IntegratorOptions) -> Result<Self> {
        opts.validate()?;
        let dt = opts.dt;
        let nls = |h: f64| -> Vec<Complex64> {
            grid.wavenumbers().iter().map(|&k| Complex64::from_polar(1.0, -k * k * h)).collect()
        };
        let airy = |h: f64| -> Vec<Complex64> {
            (0..grid.n())
                .map(|j| {
                    let k = grid.odd_wavenumber(j);
                    Complex64::from_polar(1.0, k * k * k * h)
                })
                .collect()
        };
        let damping = opts.sponge_enabled().then(|| {
            sponge_profile(&grid, opts.sponge_width, opts.sponge_strength).into_iter().map(|s| 1.0 - s * dt).collect()
        });
        Ok(Self {
            nls_half: nls(0.5 * dt),
            nls_full: nls(dt),
            airy_half: airy(0.5 * dt),
            airy_full: airy(dt),
            grid,
            params,
            opts,
            damping,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.opts
    }

    fn linear(&self, state: &mut FieldState, half: bool) {
        let g = &*self.grid;
        let (nls, airy) = if half { (&self.nls_half, &self.airy_half) } else { (&self.nls_full, &self.airy_full) };
        g.forward_in_place(&mut state.u);
        for (z, p) in state.u.iter_mut().zip(nls) {
            *z *= p;
        }
        g.inverse_in_place(&mut state.u);

        let mut v_hat = g.forward_real(&state.v);
        for (z, p) in v_hat.iter_mut().zip(airy) {
            *z *= p;
        }
        g.inverse_in_place(&mut v_hat);
        for (v, z) in state.v.iter_mut().zip(&v_hat) {
            *v = z.re;
        }
    }

    fn density(&self, u: &[Complex64]) -> Vec<f64> {
        let rho: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
        if !self.opts.dealias {
            return rho;
        }
        let mut spec = self.grid.forward_real(&rho);
        self.grid.truncate(&mut spec, Truncation::TwoThirds);
        self.grid.inverse_to_real(spec)
    }

    fn rotate_phase(&self, state: &mut FieldState, h: f64) {
        let rho = self.density(&state.u);
        let ModelParams { alpha, beta, .. } = self.params;
        for ((u, &v), &r) in state.u.iter_mut().zip(&state.v).zip(&rho) {
            *u *= Complex64::from_polar(1.0, -(alpha * v + beta * r) * h);
        }
    }

    /// RK4 for `v_t = ∂x(γρ − ½v²)` with ρ = |u|² frozen.
    fn advect(&self, state: &mut FieldState, h: f64) {
        let g = &*self.grid;
        let rho = self.density(&state.u);
        let forcing = g.forward_real(&rho.iter().map(|r| self.params.gamma * r).collect::<Vec<_>>());
        let i = Complex64::new(0.0, 1.0);
        let tendency = |v: &[f64]| -> Vec<f64> {
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            let mut spec = g.forward_real(&sq);
            for (z, f) in spec.iter_mut().zip(&forcing) {
                *z = f - 0.5 * *z;
            }
            if self.opts.dealias {
                g.truncate(&mut spec, Truncation::TwoThirds);
            }
            for (j, z) in spec.iter_mut().enumerate() {
                *z *= i * g.odd_wavenumber(j);
            }
            g.inverse_to_real(spec)
        };
        let v0 = &state.v;
        let k1 = tendency(v0);
        let stage = |k: &[f64], c: f64| -> Vec<f64> { v0.iter().zip(k).map(|(v, k)| v + c * h * k).collect() };
        let k2 = tendency(&stage(&k1, 0.5));
        let k3 = tendency(&stage(&k2, 0.5));
        let k4 = tendency(&stage(&k3, 1.0));
        let next: Vec<f64> =
            (0..v0.len()).map(|j| v0[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
        state.v = next;
    }

    /// Advance one step of size `dt`. On non-finite output the state is left
    /// as computed and an error is returned.
    pub fn step(&self, state: &mut FieldState) -> Result<()> {
        state.check()?;
        let h = self.opts.dt;
        match self.opts.scheme {
            Scheme::Strang => {
                self.linear(state, true);
                self.rotate_phase(state, 0.5 * h);
                self.advect(state, h);
                self.rotate_phase(state, 0.5 * h);
                self.linear(state, true);
            }
            Scheme::Lie => {
                self.linear(state, false);
                self.rotate_phase(state, h);
                self.advect(state, h);
            }
        }
        if let Some(damping) = &self.damping {
            for ((u, v), d) in state.u.iter_mut().zip(state.v.iter_mut()).zip(damping) {
                *u *= *d;
                *v *= *d;
            }
        }
        state.t += h;
        if !state.u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { field: "u", t: state.t, step: 0 });
        }
        if !state.v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { field: "v", t: state.t, step: 0 });
        }
        Ok(())
    }

    /// Explicit-advection CFL guidance: `0.5·dx / max|v|`.
    pub fn suggested_dt(grid: &Grid, v: &[f64]) -> f64 {
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if vmax == 0.0 {
            f64::INFINITY
        } else {
            0.5 * grid.dx() / vmax
        }
    }
}

/// Receives the state at every sampled step.
pub trait Observer {
    fn observe(&mut self, state: &FieldState, step: u64) -> Result<()>;
}

impl<F: FnMut(&FieldState, u64) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &FieldState, step: u64) -> Result<()> {
        self(state, step)
    }
}

/// Step plan for [`evolve`]. Times are `t0 + k·dt`, never accumulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub t0: f64,
    pub start_step: u64,
    pub total_steps: u64,
    pub sample_every: u64,
    /// Whether to hand the state at `start_step` to the observer (false on resume).
    pub observe_start: bool,
}

impl StepPlan {
    pub fn new(t0: f64, t_final: f64, dt: f64, sample_dt: f64) -> Result<Self> {
        let total_steps = whole_steps(t_final - t0, dt, "t_final")?;
        let sample_every = whole_steps(sample_dt, dt, "sample_dt")?.max(1);
        Ok(Self { t0, start_step: 0, total_steps, sample_every, observe_start: true })
    }
}

fn whole_steps(span: f64, dt: f64, name: &'static str) -> Result<u64> {
    if span < 0.0 || !span.is_finite() {
        return Err(Error::InvalidParameter { name, reason: format!("span {span} must be nonnegative") });
    }
    let k = (span / dt).round();
    if (k * dt - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::InvalidParameter { name, reason: format!("{span} is not a whole number of steps of {dt}") });
    }
    Ok(k as u64)
}

/// Repeated [`Integrator::step`] with the observer called on the sampling
/// schedule. Returns the number of the last completed step. A step failure
/// aborts after all earlier samples have been observed.
pub fn evolve(
    integrator: &Integrator,
    state: &mut FieldState,
    plan: &StepPlan,
    observer: &mut dyn Observer,
) -> Result<u64> {
    let dt = integrator.options().dt;
    let mut step = plan.start_step;
    state.t = plan.t0 + step as f64 * dt;
    if plan.observe_start && step.is_multiple_of(plan.sample_every) {
        observer.observe(state, step)?;
    }
    while step < plan.total_steps {
        step += 1;
        integrator.step(state).map_err(|e| match e {
            Error::NonFinite { field, t, .. } => Error::NonFinite { field, t, step },
            other => other,
        })?;
        state.t = plan.t0 + step as f64 * dt;
        if step.is_multiple_of(plan.sample_every) {
            observer.observe(state, step)?;
        }
    }
    Ok(step)
}

/// Outcome of a temporal self-convergence study.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeOutcome {
    /// Errors at the roundoff floor: the flow is computed exactly.
    Exact {
        errors: [f64; 3],
    },
    Order {
        order: f64,
        ratios: [f64; 2],
        errors: [f64; 3],
    },
}

fn l2_distance(a: &FieldState, b: &FieldState) -> f64 {
    let g = &a.grid;
    let du = g.integrate_with(|j, _| (a.u[j] - b.u[j]).norm_sqr());
    let dv = g.integrate_with(|j, _| (a.v[j] - b.v[j]).powi(2));
    (du + dv).sqrt()
}

/// Runs at `dt`, `dt/2`, `dt/4` against a `dt/16` reference and reports
/// `log₂` of consecutive error ratios.
pub fn convergence_probe(
    state: &FieldState,
    params: &ModelParams,
    opts: &IntegratorOptions,
    base_dt: f64,
    t_span: f64,
) -> Result<ProbeOutcome> {
    let run = |dt: f64| -> Result<FieldState> {
        let integ = Integrator::new(state.grid.clone(), *params, IntegratorOptions { dt, ..*opts })?;
        let mut s = state.clone();
        let plan = StepPlan::new(state.t, state.t + t_span, dt, t_span)?;
        evolve(&integ, &mut s, &plan, &mut |_: &FieldState, _| Ok(()))?;
        Ok(s)
    };
    let reference = run(base_dt / 16.0)?;
    let errors = [
        l2_distance(&run(base_dt)?, &reference),
        l2_distance(&run(base_dt / 2.0)?, &reference),
        l2_distance(&run(base_dt / 4.0)?, &reference),
    ];
    let norm = l2_distance(&reference, &FieldState::zeros(state.grid.clone(), 0.0)).max(1e-300);
    if errors.iter().all(|e| *e <= 1e-12 * norm) {
        return Ok(ProbeOutcome::Exact { errors });
    }
    let ratios = [(errors[0] / errors[1]).log2(), (errors[1] / errors[2]).log2()];
    Ok(ProbeOutcome::Order { order: 0.5 * (ratios[0] + ratios[1]), ratios, errors })
}
