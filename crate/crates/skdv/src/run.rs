//! Run orchestration: initial data, time stepping, CSV, snapshots and checkpoints.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use skdv_core::diagnostics::{Carry, Diagnostics, DiagnosticsConfig};
use skdv_core::waves::{kdv_soliton, sech, solitary_initial_data, SolitaryWaveParams};
use skdv_core::{evolve, Complex64, FieldState, Grid, Integrator, Observer, StepPlan};

use crate::config::{InitialData, RunConfig, VShape};
use crate::error::{io_err, CliError, Result};
use crate::expr::Expr;
use crate::figures::emit_figures;
use crate::snapshot::{read_checkpoint, read_snapshot, write_checkpoint, write_snapshot};
use crate::table::{format_row, header, row, write_header};

pub const CSV_NAME: &str = "timeseries.csv";
pub const CHECKPOINT_NAME: &str = "checkpoint.ckpt";
pub const CONFIG_ECHO_NAME: &str = "config.cfg";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointMeta {
    /// Canonical text of the run configuration.
    pub config: String,
    pub step: u64,
    /// Data rows already in the CSV when the checkpoint was taken.
    pub rows: u64,
    pub carry: Carry,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: u64,
    pub rows: u64,
    pub csv: PathBuf,
    pub figures: Vec<PathBuf>,
}

pub fn initial_state(cfg: &RunConfig) -> Result<FieldState> {
    let grid = Arc::new(Grid::new(cfg.grid.n, cfg.grid.length, cfg.grid.center)?);
    let t0 = cfg.integrator.t0;
    let mut state = match &cfg.initial {
        InitialData::Gaussian {
            u_amplitude,
            u_width,
            u_center,
            u_wavenumber,
            u_phase,
            v_amplitude,
            v_width,
            v_center,
            v_shape,
        } => {
            let u = grid.sample_complex(|x| {
                let y = (x - u_center) / u_width;
                Complex64::from_polar(u_amplitude * (-y * y).exp(), u_phase + u_wavenumber * x)
            });
            let v = grid.sample(|x| {
                let y = (x - v_center) / v_width;
                v_amplitude
                    * match v_shape {
                        VShape::Sech2 => sech(y).powi(2),
                        VShape::Gaussian => (-y * y).exp(),
                    }
            });
            FieldState::new(grid, u, v, t0)?
        }
        InitialData::Soliton { c_star, x0, coupled: true } => {
            solitary_initial_data(&SolitaryWaveParams::new(*c_star, cfg.model.alpha, *x0)?, grid)?
        }
        InitialData::Soliton { c_star, x0, coupled: false } => kdv_soliton(*c_star, *x0, grid)?,
        InitialData::Snapshot { path } => {
            let snap = read_snapshot(path)?;
            if *snap.state.grid != *grid {
                return Err(CliError::Constraint {
                    key: "initial.path".into(),
                    message: format!("snapshot grid {:?} differs from the configured grid", snap.state.grid),
                });
            }
            snap.state
        }
        InitialData::Expression { u_re, u_im, v } => {
            let parse = |key: &str, src: &str| {
                Expr::parse(src).map_err(|m| CliError::Constraint { key: key.into(), message: m })
            };
            let (re, im, ve) = (parse("initial.u_re", u_re)?, parse("initial.u_im", u_im)?, parse("initial.v", v)?);
            let xs = grid.nodes();
            let eval =
                |key: &str, e: &Expr| e.sample(xs).map_err(|m| CliError::Constraint { key: key.into(), message: m });
            let (re, im, vv) = (eval("initial.u_re", &re)?, eval("initial.u_im", &im)?, eval("initial.v", &ve)?);
            let u = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            FieldState::new(grid.clone(), u, vv, t0)?
        }
    };
    state.t = t0;
    Ok(state)
}

pub fn diagnostics_config(cfg: &RunConfig) -> DiagnosticsConfig {
    DiagnosticsConfig { params: cfg.model, virial: Some(cfg.virial), regions: cfg.region_specs() }
}

fn steps_of(span: f64, dt: f64) -> u64 {
    (span / dt).round() as u64
}

struct RunObserver<'a> {
    cfg: &'a RunConfig,
    text: String,
    out_dir: &'a Path,
    csv_path: PathBuf,
    diag: Diagnostics,
    csv: BufWriter<File>,
    rows: u64,
    sample_every: u64,
    snapshot_steps: BTreeSet<u64>,
    checkpoint_every: Option<u64>,
    total_steps: u64,
}

impl RunObserver<'_> {
    fn emit_ready(&mut self) -> Result<()> {
        for rec in self.diag.take_ready() {
            self.csv.write_all(format_row(&row(&rec)).as_bytes()).map_err(io_err(&self.csv_path))?;
            self.rows += 1;
        }
        Ok(())
    }

    fn handle(&mut self, state: &FieldState, step: u64) -> Result<()> {
        if step.is_multiple_of(self.sample_every) {
            self.diag.push(state)?;
            self.emit_ready()?;
        }
        if self.snapshot_steps.contains(&step) {
            let path = self.out_dir.join(format!("snapshot_t{:?}.skdv", state.t));
            write_snapshot(&path, state, &self.cfg.model)?;
        }
        if let Some(every) = self.checkpoint_every {
            if step > 0 && step.is_multiple_of(every) && step < self.total_steps {
                self.csv.flush().map_err(io_err(&self.csv_path))?;
                let meta = CheckpointMeta {
                    config: self.text.clone(),
                    step,
                    rows: self.rows,
                    carry: self.diag.carry().clone(),
                };
                write_checkpoint(&self.out_dir.join(CHECKPOINT_NAME), state, &self.cfg.model, &meta)?;
            }
        }
        Ok(())
    }
}

impl Observer for RunObserver<'_> {
    fn observe(&mut self, state: &FieldState, step: u64) -> skdv_core::Result<()> {
        self.handle(state, step).map_err(|e| match e {
            CliError::Core(inner) => inner,
            other => skdv_core::Error::Observer(other.to_string()),
        })
    }
}

/// Keep the header and the first `rows` data lines of the CSV.
fn truncate_csv(path: &Path, rows: u64) -> Result<()> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut keep = 0u64;
    let mut lines = 0u64;
    for line in BufReader::new(file).split(b'\n') {
        if lines > rows {
            break;
        }
        keep += line.map_err(io_err(path))?.len() as u64 + 1;
        lines += 1;
    }
    if lines != rows + 1 {
        return Err(CliError::Format {
            path: path.into(),
            message: format!("holds {} rows, checkpoint expects {rows}", lines.saturating_sub(1)),
        });
    }
    OpenOptions::new().write(true).open(path).and_then(|f| f.set_len(keep)).map_err(io_err(path))
}

/// Execute a run into `out_dir`, optionally resuming from a checkpoint.
pub fn run(cfg: &RunConfig, out_dir: &Path, resume: Option<&Path>) -> Result<RunSummary> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let text = cfg.to_text();
    let opts = cfg.integrator.options;
    let dt = opts.dt;
    let t0 = cfg.integrator.t0;
    let mut plan = StepPlan::new(t0, cfg.integrator.t_final, dt, dt)?;
    let csv_path = out_dir.join(CSV_NAME);
    let regions: Vec<&str> = cfg
        .monitor
        .regions
        .iter()
        .map(|r| match r {
            crate::config::RegionKindName::Omega => "omega",
            crate::config::RegionKindName::Gamma => "gamma",
        })
        .collect();

    let (mut state, diag, csv, rows) = match resume {
        Some(ckpt) => {
            let (snap, meta): (_, CheckpointMeta) = read_checkpoint(ckpt)?;
            if meta.config != text {
                return Err(CliError::Constraint {
                    key: "--resume".into(),
                    message: "checkpoint was written by a different configuration".into(),
                });
            }
            truncate_csv(&csv_path, meta.rows)?;
            let diag = Diagnostics::resume(diagnostics_config(cfg), meta.carry)?;
            let file = OpenOptions::new().append(true).open(&csv_path).map_err(io_err(&csv_path))?;
            plan.start_step = meta.step;
            plan.observe_start = false;
            (snap.state, diag, BufWriter::new(file), meta.rows)
        }
        None => {
            let state = initial_state(cfg)?;
            let mut w = BufWriter::new(File::create(&csv_path).map_err(io_err(&csv_path))?);
            let cols: Vec<String> = header(&regions);
            write_header(&mut w, &cols, &csv_path)?;
            fs::write(out_dir.join(CONFIG_ECHO_NAME), &text).map_err(io_err(out_dir.join(CONFIG_ECHO_NAME)))?;
            (state, Diagnostics::new(diagnostics_config(cfg)), w, 0)
        }
    };

    let integrator = Integrator::new(state.grid.clone(), cfg.model, opts)?;
    let mut obs = RunObserver {
        cfg,
        text,
        out_dir,
        csv_path: csv_path.clone(),
        diag,
        csv,
        rows,
        sample_every: steps_of(cfg.monitor.sample_dt, dt).max(1),
        snapshot_steps: cfg.output.snapshot_times.iter().map(|&t| steps_of(t - t0, dt)).collect(),
        checkpoint_every: cfg.output.checkpoint_every.map(|c| steps_of(c, dt).max(1)),
        total_steps: plan.total_steps,
    };
    let result = evolve(&integrator, &mut state, &plan, &mut obs);
    // Rows completed before a failure are still written.
    let flushed = obs.emit_ready().and_then(|_| obs.csv.flush().map_err(io_err(&csv_path)));
    let steps = result?;
    flushed?;
    obs.diag.finish();
    obs.emit_ready()?;
    obs.csv.flush().map_err(io_err(&csv_path))?;
    let rows = obs.rows;
    drop(obs);

    let t = cfg.output.figures;
    let figures = if t.conserved || t.budget || t.masses { emit_figures(&csv_path, t, out_dir)? } else { Vec::new() };
    Ok(RunSummary { steps, rows, csv: csv_path, figures })
}
