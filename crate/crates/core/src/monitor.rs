//! Local masses over growing and moving regions, the accumulated decay
//! integrals, and the tail-minimum proxy for `liminf`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldState, ModelParams};
use crate::sum::Neumaier;
use crate::virial::{decay_integrands, DecayIntegrands, VirialConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegionKind {
    /// `|x| ≤ K t^p1`
    Centered,
    /// `|x − t^m| ≤ K t^p1`
    Ray { m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub p1: f64,
    pub k: f64,
}

impl RegionSpec {
    pub fn centered(p1: f64, k: f64) -> Result<Self> {
        Self::check_common(p1, k)?;
        Ok(Self { kind: RegionKind::Centered, p1, k })
    }

    pub fn ray(m: f64, p1: f64, k: f64) -> Result<Self> {
        Self::check_common(p1, k)?;
        let cap = 1.0 - 0.5 * p1;
        if !(m > 0.0 && m < cap) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("ray speed: 0<m<1−p1/2 violated (m={m}, 1−p1/2={cap})"),
            });
        }
        Ok(Self { kind: RegionKind::Ray { m }, p1, k })
    }

    fn check_common(p1: f64, k: f64) -> Result<()> {
        if !(p1 > 0.0 && p1.is_finite()) {
            return Err(Error::InvalidParameter { name: "p1", reason: format!("must be positive, got {p1}") });
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter { name: "K", reason: format!("must be positive, got {k}") });
        }
        Ok(())
    }

    /// `[lo, hi]` at time t.
    pub fn interval(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 1.0) {
            return Err(Error::TimeNotAfterOne(t));
        }
        let half = self.k * t.powf(self.p1);
        let center = match self.kind {
            RegionKind::Centered => 0.0,
            RegionKind::Ray { m } => t.powf(m),
        };
        Ok((center - half, center + half))
    }

    pub fn label(&self) -> String {
        match self.kind {
            RegionKind::Centered => "omega".into(),
            RegionKind::Ray { m } => format!("gamma_m{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MassRecord {
    pub t: f64,
    pub mass_v2: f64,
    pub mass_u2: f64,
    pub mass_dv2: f64,
    pub mass_du2: f64,
    pub mass_u4: f64,
}

/// Indicator weights of `[lo, hi]` on the nodes. Nodes on an endpoint get
/// one half; node 0 also collects its periodic image at the upper edge.
pub fn indicator(state: &FieldState, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let g = &*state.grid;
    let (box_lo, box_hi) = (g.lower(), g.upper());
    if lo < box_lo || hi > box_hi || !(lo <= hi) {
        return Err(Error::RegionOutsideBox { lo, hi, box_lo, box_hi });
    }
    let point = |x: f64| {
        if x > lo && x < hi {
            1.0
        } else if x == lo || x == hi {
            0.5
        } else {
            0.0
        }
    };
    let mut w: Vec<f64> = g.nodes().iter().map(|&x| point(x)).collect();
    w[0] += point(box_hi);
    for x in &mut w {
        *x = x.min(1.0);
    }
    Ok(w)
}

fn masses(state: &FieldState, w: &[f64]) -> MassRecord {
    let ux = state.du_dx();
    let vx = state.dv_dx();
    let mut acc = [Neumaier::new(); 5];
    for j in 0..w.len() {
        if w[j] == 0.0 {
            continue;
        }
        let rho = state.u[j].norm_sqr();
        let vals = [state.v[j] * state.v[j], rho, vx[j] * vx[j], ux[j].norm_sqr(), rho * rho];
        for (a, x) in acc.iter_mut().zip(vals) {
            a.add(w[j] * x);
        }
    }
    let dx = state.grid.dx();
    MassRecord {
        t: state.t,
        mass_v2: acc[0].value() * dx,
        mass_u2: acc[1].value() * dx,
        mass_dv2: acc[2].value() * dx,
        mass_du2: acc[3].value() * dx,
        mass_u4: acc[4].value() * dx,
    }
}

pub fn region_mass(state: &FieldState, region: &RegionSpec) -> Result<MassRecord> {
    let (lo, hi) = region.interval(state.t)?;
    let w = indicator(state, lo, hi)?;
    Ok(masses(state, &w))
}

/// Masses over the complement of the region within the box.
pub fn complement_mass(state: &FieldState, region: &RegionSpec) -> Result<MassRecord> {
    let (lo, hi) = region.interval(state.t)?;
    let w: Vec<f64> = indicator(state, lo, hi)?.into_iter().map(|x| 1.0 - x).collect();
    Ok(masses(state, &w))
}

/// Trapezoid-in-time accumulation of the decay integrals. Samples must be
/// pushed at uniform spacing with `t > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PartialIntegrals {
    pub pj: f64,
    pub pi: f64,
    /// Accumulated sign-indefinite integrand for the open-coupling case.
    pub open: f64,
    last: Option<(f64, DecayIntegrands)>,
}

impl PartialIntegrals {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_integrands(&mut self, t: f64, d: DecayIntegrands) {
        if let Some((t0, prev)) = self.last {
            let h = 0.5 * (t - t0);
            self.pj += h * (prev.pj + d.pj);
            self.pi += h * (prev.pi + d.pi);
            self.open += h * (prev.open + d.open);
        }
        self.last = Some((t, d));
    }

    pub fn push(&mut self, state: &FieldState, params: &ModelParams, cfg: &VirialConfig) -> Result<()> {
        let d = decay_integrands(state, params, cfg)?;
        self.push_integrands(state.t, d);
        Ok(())
    }
}

/// Accumulate `P_J`, `P_I` over a uniformly sampled trajectory, returning the
/// running values after each sample.
pub fn accumulate_weighted_integrals(
    trajectory: &[FieldState],
    params: &ModelParams,
    cfg: &VirialConfig,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut acc = PartialIntegrals::new();
    trajectory
        .iter()
        .map(|s| {
            acc.push(s, params, cfg)?;
            Ok((s.t, acc.pj, acc.pi))
        })
        .collect()
}

/// Streaming minimum of a series over the trailing window `[T/2, T]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TailMin {
    window: VecDeque<(f64, f64)>,
}

impl TailMin {
    pub fn new() -> Self {
        Self::default()
    }

    /// Push the sample at time `t` and return the minimum over `[t/2, t]`.
    pub fn push(&mut self, t: f64, value: f64) -> f64 {
        while self.window.back().is_some_and(|&(_, v)| v >= value) {
            self.window.pop_back();
        }
        self.window.push_back((t, value));
        while self.window.front().is_some_and(|&(s, _)| s < 0.5 * t) {
            self.window.pop_front();
        }
        self.window.front().map_or(value, |&(_, v)| v)
    }
}

/// Tail minimum over `[T/2, T]` for each sample of a time-sorted series.
pub fn liminf_tracker(series: &[(f64, f64)]) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut tm = TailMin::new();
    Ok(series.iter().map(|&(t, m)| tm.push(t, m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    fn gaussian_state(center: f64, t: f64) -> FieldState {
        let g = Grid::shared(512, 100.0, 0.0).unwrap();
        let u = g.sample_complex(|x| Complex64::new((-(x - center).powi(2)).exp(), 0.0));
        let v = g.sample(|x| (-(x - center).powi(2) / 4.0).exp());
        FieldState::new(g, u, v, t).unwrap()
    }

    #[test]
    fn zero_state_masses() {
        let g = Grid::shared(64, 40.0, 0.0).unwrap();
        let s = FieldState::zeros(g, 4.0);
        let m = region_mass(&s, &RegionSpec::centered(0.5, 1.0).unwrap()).unwrap();
        assert_eq!(m, MassRecord { t: 4.0, ..Default::default() });
    }

    #[test]
    fn whole_box_region_gives_i1() {
        // K t^p1 = 50 at t = 2500 with p1 = 1/2, K = 1.
        let s = gaussian_state(3.0, 2500.0);
        let m = region_mass(&s, &RegionSpec::centered(0.5, 1.0).unwrap()).unwrap();
        let i1 = s.grid.integrate_with(|j, _| s.u[j].norm_sqr());
        assert_eq!(m.mass_u2, i1);
    }

    #[test]
    fn region_past_box_is_an_error() {
        let s = gaussian_state(0.0, 2600.0);
        assert!(matches!(
            region_mass(&s, &RegionSpec::centered(0.5, 1.0).unwrap()),
            Err(Error::RegionOutsideBox { .. })
        ));
    }

    #[test]
    fn far_gaussian_is_not_counted() {
        let s = gaussian_state(30.0, 4.0);
        let m = region_mass(&s, &RegionSpec::centered(0.5, 1.0).unwrap()).unwrap();
        let i1 = s.grid.integrate_with(|j, _| s.u[j].norm_sqr());
        assert!(m.mass_u2 <= 1e-10 * i1);
    }

    #[test]
    fn ray_constraint() {
        assert!(RegionSpec::ray(0.6, 0.5, 1.0).is_ok());
        let e = RegionSpec::ray(0.8, 0.5, 1.0).unwrap_err();
        assert!(e.to_string().contains("0<m<1−p1/2"));
        assert!(RegionSpec::ray(0.75, 0.5, 1.0).is_err());
        assert!(RegionSpec::centered(0.5, 0.0).is_err());
    }

    #[test]
    fn boundary_node_gets_half_weight() {
        let g = Grid::shared(8, 8.0, 0.0).unwrap();
        let s = FieldState::zeros(g, 4.0);
        let w = indicator(&s, -1.0, 1.0).unwrap();
        assert_eq!(w, vec![0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0]);
        let w = indicator(&s, -4.0, 4.0).unwrap();
        assert!(w.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn tail_min_examples() {
        let c: Vec<(f64, f64)> = (1..20).map(|k| (k as f64, 2.5)).collect();
        assert!(liminf_tracker(&c).unwrap().iter().all(|&x| x == 2.5));
        let dec: Vec<(f64, f64)> = (1..20).map(|k| (k as f64, 1.0 / k as f64)).collect();
        let tm = liminf_tracker(&dec).unwrap();
        for (m, (_, v)) in tm.iter().zip(&dec) {
            assert_eq!(m, v);
        }
        assert_eq!(liminf_tracker(&[]).unwrap_err(), Error::EmptySeries);
    }

    #[test]
    fn tail_min_drops_old_minima() {
        let s = [(1.0, 0.0), (2.0, 5.0), (3.0, 4.0), (4.0, 6.0)];
        // At T = 4 the window is [2, 4].
        assert_eq!(liminf_tracker(&s).unwrap(), vec![0.0, 0.0, 4.0, 4.0]);
    }

    #[test]
    fn partial_integrals_of_zero_solution() {
        let g = Grid::shared(64, 40.0, 0.0).unwrap();
        let p = ModelParams::new(-1.0, 1.0, -1.0).unwrap();
        let cfg = VirialConfig::defaults_for(&p);
        let traj: Vec<FieldState> = (0..5).map(|k| FieldState::zeros(g.clone(), 2.0 + k as f64)).collect();
        let out = accumulate_weighted_integrals(&traj, &p, &cfg).unwrap();
        assert!(out.iter().all(|&(_, a, b)| a == 0.0 && b == 0.0));
    }
}
