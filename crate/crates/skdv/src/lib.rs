//! Configuration, persistence, orchestration and figures for the SKdV solver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod expr;
pub mod figures;
pub mod run;
pub mod snapshot;
pub mod table;

use std::path::{Path, PathBuf};

use skdv_core::diagnostics::{Diagnostics, DiagnosticsConfig};
use skdv_core::monitor::RegionSpec;
use skdv_core::virial::VirialConfig;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use run::{run, RunSummary};

/// Budget row at the middle of three equally spaced snapshots, in the CSV schema.
pub fn budget_from_snapshots(
    paths: [&Path; 3],
    virial: Option<VirialConfig>,
    k: f64,
) -> Result<(Vec<String>, Vec<f64>)> {
    let snaps = paths.map(snapshot::read_snapshot);
    let mut states = Vec::with_capacity(3);
    for s in snaps {
        states.push(s?);
    }
    let [a, b, c] = [0, 1, 2].map(|i| states[i].state.t);
    if !(b > a && c > b) || ((b - a) - (c - b)).abs() > 1e-9 * (b - a) {
        return Err(CliError::Schema(format!("snapshot times {a}, {b}, {c} are not increasing and equally spaced")));
    }
    let params = states[1].params;
    let virial = virial.unwrap_or_else(|| VirialConfig::defaults_for(&params));
    virial.validate()?;
    let cfg = DiagnosticsConfig { params, virial: Some(virial), regions: vec![RegionSpec::centered(virial.p1, k)?] };
    let mut diag = Diagnostics::new(cfg);
    diag.push(&states[0].state)?;
    diag.push(&states[1].state)?;
    let rec = diag.push(&states[2].state)?.ok_or_else(|| CliError::Schema("no budget could be formed".into()))?;
    if rec.budget_j.is_none() {
        return Err(CliError::Schema("snapshots must be equally spaced in t with t > 1".into()));
    }
    Ok((table::header(&["omega"]), table::row(&rec)))
}

/// Run each configuration in its own subdirectory of `out_root`, at most
/// `threads` at a time. Results keep the input order.
pub fn sweep(
    configs: &[(String, RunConfig)],
    out_root: &Path,
    threads: usize,
) -> Result<Vec<(PathBuf, Result<RunSummary>)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Schema(format!("thread pool: {e}")))?;
    use rayon::prelude::*;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .map(|(name, cfg)| {
                let dir = out_root.join(name);
                let r = run(cfg, &dir, None);
                (dir, r)
            })
            .collect()
    }))
}
