use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use skdv::config::FigureToggles;
use skdv::{figures, parse_config, snapshot, table, RunConfig};
use skdv_core::waves::{solitary_initial_data, SolitaryWaveParams};
use skdv_core::{conserved_triple, Grid};

#[derive(Parser)]
#[command(name = "skdv", version, about = "Pseudospectral Schrödinger–KdV simulator and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configuration, writing CSV, snapshots, checkpoints and figures.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Checkpoint to continue from; the configuration defaults to its echo.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Write the explicit coupled solitary wave as a snapshot.
    Soliton {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_num)]
        alpha: f64,
        #[arg(long, value_parser = parse_num)]
        cstar: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 400.0, value_parser = parse_num)]
        length: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = parse_num)]
        x0: f64,
    },
    /// Recompute the budgets at the middle of three equally spaced snapshots.
    Budget {
        #[arg(num_args = 3, required = true)]
        snapshots: Vec<PathBuf>,
        /// Take the virial block and K from this configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render figures from a run's CSV.
    Figures {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        toggles: Toggles,
    },
    /// Run several configurations concurrently, each in `<out>/<config stem>`.
    Sweep {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Toggles {
    #[arg(long)]
    conserved: bool,
    #[arg(long)]
    budget: bool,
    #[arg(long)]
    masses: bool,
}

fn parse_num(s: &str) -> Result<f64, String> {
    skdv::config::parse_number(s)
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn threads() -> anyhow::Result<usize> {
    match std::env::var("SKDV_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("SKDV_THREADS={s:?} is not a positive integer")),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, resume } => {
            let cfg = match (&config, &resume) {
                (Some(p), _) => load_config(p)?,
                (None, Some(ckpt)) => {
                    let (_, meta): (_, skdv::run::CheckpointMeta) = snapshot::read_checkpoint(ckpt)?;
                    parse_config(&meta.config)?
                }
                (None, None) => bail!("--config is required unless resuming"),
            };
            let out = out
                .or_else(|| cfg.output.directory.clone())
                .context("no output directory: pass --out or set output.directory")?;
            let s = skdv::run(&cfg, &out, resume.as_deref())?;
            println!("{} steps, {} rows -> {}", s.steps, s.rows, s.csv.display());
            for f in s.figures {
                println!("figure {}", f.display());
            }
        }
        Command::Soliton { alpha, cstar, out, n, length, x0 } => {
            let wave = SolitaryWaveParams::new(cstar, alpha, x0)?;
            let grid = Grid::shared(n, length, 0.0)?;
            let state = solitary_initial_data(&wave, grid)?;
            let params = wave.model_params();
            snapshot::write_snapshot(&out, &state, &params)?;
            let c = conserved_triple(&state, &params);
            println!(
                "alpha={alpha:?} beta={:?} gamma={:?} c={:?} omega={:?} i1={:?} -> {}",
                params.beta,
                params.gamma,
                wave.speed(),
                wave.omega(),
                c.i1,
                out.display()
            );
        }
        Command::Budget { snapshots, config, out } => {
            let (virial, k) = match config {
                Some(p) => {
                    let c = load_config(&p)?;
                    (Some(c.virial), c.monitor.k)
                }
                None => (None, 1.0),
            };
            let (h, r) = skdv::budget_from_snapshots([&snapshots[0], &snapshots[1], &snapshots[2]], virial, k)?;
            let text = format!("{}\n{}", h.join(","), table::format_row(&r));
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Figures { csv, out, toggles } => {
            let mut t = FigureToggles { conserved: toggles.conserved, budget: toggles.budget, masses: toggles.masses };
            if !(t.conserved || t.budget || t.masses) {
                t = FigureToggles { conserved: true, budget: true, masses: true };
            }
            for f in figures::emit_figures(&csv, t, &out)? {
                println!("{}", f.display());
            }
        }
        Command::Sweep { out, configs } => {
            let mut jobs = Vec::new();
            for p in &configs {
                let stem = p.file_stem().context("config path has no file name")?.to_string_lossy().into_owned();
                if jobs.iter().any(|(s, _)| s == &stem) {
                    bail!("two configurations share the stem `{stem}`");
                }
                jobs.push((stem, load_config(p)?));
            }
            let mut failed = 0;
            for (dir, r) in skdv::sweep(&jobs, &out, threads()?)? {
                match r {
                    Ok(s) => println!("{}: {} steps, {} rows", dir.display(), s.steps, s.rows),
                    Err(e) => {
                        failed += 1;
                        eprintln!("{}: {e}", dir.display());
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} of {} runs failed", jobs.len());
            }
        }
    }
    Ok(())
}
