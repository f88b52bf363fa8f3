//! Streaming diagnostics: one record per sampled state.
//!
//! Finite-difference budgets need the functional at the next sample, so a
//! record is released one sample late. The carried state is serializable so a
//! checkpointed run resumes with identical output.

use serde::{Deserialize, Serialize};

use crate::conserved::{conserved_triple, ConservedTriple};
use crate::error::{Error, Result};
use crate::integrate::Observer;
use crate::model::{FieldState, ModelParams};
use crate::monitor::{region_mass, MassRecord, PartialIntegrals, RegionSpec, TailMin};
use crate::virial::{
    decay_integrands, functional_i, functional_j, i_terms, j_terms, BudgetI, BudgetJ, ITerms, JTerms, VirialConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub params: ModelParams,
    /// Virial quantities are skipped when absent or while `t ≤ 1`.
    pub virial: Option<VirialConfig>,
    pub regions: Vec<RegionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub mass: MassRecord,
    /// Tail minimum of `∫_region (|u|² + v²)` over `[t/2, t]`.
    pub tail_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub conserved: ConservedTriple,
    pub j_terms: Option<JTerms>,
    pub i_terms: Option<ITerms>,
    pub budget_j: Option<BudgetJ>,
    pub budget_i: Option<BudgetI>,
    pub regions: Vec<RegionRecord>,
    pub partials: Option<PartialIntegrals>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Carry {
    /// `(t, J, I)` of the sample before `pending`.
    prev: Option<(f64, f64, f64)>,
    pending: Option<DiagnosticsRecord>,
    partials: PartialIntegrals,
    tail: Vec<TailMin>,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    cfg: DiagnosticsConfig,
    carry: Carry,
    ready: Vec<DiagnosticsRecord>,
}

impl Diagnostics {
    pub fn new(cfg: DiagnosticsConfig) -> Self {
        let tail = vec![TailMin::new(); cfg.regions.len()];
        Self { cfg, carry: Carry { tail, ..Carry::default() }, ready: Vec::new() }
    }

    pub fn resume(cfg: DiagnosticsConfig, carry: Carry) -> Result<Self> {
        if carry.tail.len() != cfg.regions.len() {
            return Err(Error::Observer("checkpoint carry does not match the configured regions".into()));
        }
        Ok(Self { cfg, carry, ready: Vec::new() })
    }

    pub fn config(&self) -> &DiagnosticsConfig {
        &self.cfg
    }

    pub fn carry(&self) -> &Carry {
        &self.carry
    }

    /// Records completed so far and not yet taken.
    pub fn take_ready(&mut self) -> Vec<DiagnosticsRecord> {
        std::mem::take(&mut self.ready)
    }

    /// Feed one sampled state; returns the record completed by it, if any.
    pub fn push(&mut self, state: &FieldState) -> Result<Option<DiagnosticsRecord>> {
        let params = &self.cfg.params;
        let conserved = conserved_triple(state, params);
        let virial = self.cfg.virial.filter(|_| state.t > 1.0);

        let (j_now, i_now, jt, it) = match &virial {
            Some(v) => {
                let jt = j_terms(state, params, v)?;
                let it = i_terms(state, params, v)?;
                self.carry.partials.push_integrands(state.t, decay_integrands(state, params, v)?);
                (Some(jt.j), Some(it.i), Some(jt), Some(it))
            }
            None => (None, None, None, None),
        };

        let mut regions = Vec::with_capacity(self.cfg.regions.len());
        for (spec, tail) in self.cfg.regions.iter().zip(&mut self.carry.tail) {
            let mass =
                if state.t > 1.0 { region_mass(state, spec)? } else { MassRecord { t: state.t, ..Default::default() } };
            let tail_min = tail.push(state.t, mass.mass_u2 + mass.mass_v2);
            regions.push(RegionRecord { mass, tail_min });
        }

        let record = DiagnosticsRecord {
            t: state.t,
            conserved,
            j_terms: jt,
            i_terms: it,
            budget_j: None,
            budget_i: None,
            regions,
            partials: virial.map(|_| self.carry.partials),
        };

        let done = self.carry.pending.take().map(|mut p| {
            if let (Some((t_prev, j_prev, i_prev)), Some(j_next), Some(i_next), Some(jm), Some(im)) =
                (self.carry.prev, j_now, i_now, p.j_terms, p.i_terms)
            {
                let dts = 0.5 * (state.t - t_prev);
                p.budget_j = Some(BudgetJ::assemble(jm, j_prev, j_next, dts));
                p.budget_i = Some(BudgetI::assemble(im, i_prev, i_next, dts));
            }
            self.carry.prev = p.j_terms.zip(p.i_terms).map(|(j, i)| (p.t, j.j, i.i));
            p
        });
        self.carry.pending = Some(record);
        if let Some(d) = &done {
            self.ready.push(d.clone());
        }
        Ok(done)
    }

    /// Release the last held record (its budgets stay empty).
    pub fn finish(&mut self) -> Option<DiagnosticsRecord> {
        let last = self.carry.pending.take();
        if let Some(d) = &last {
            self.ready.push(d.clone());
        }
        last
    }
}

impl Observer for Diagnostics {
    fn observe(&mut self, state: &FieldState, _step: u64) -> Result<()> {
        self.push(state).map(|_| ())
    }
}

/// Sampled states of a run, kept in memory.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<FieldState>,
}

impl Observer for Trajectory {
    fn observe(&mut self, state: &FieldState, _step: u64) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

/// Recompute `J` and `I` at a state, for callers without a pipeline.
pub fn functionals(state: &FieldState, cfg: &VirialConfig) -> Result<(f64, f64)> {
    Ok((functional_j(state, cfg, None)?, functional_i(state, cfg)?))
}
