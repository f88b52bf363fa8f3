use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use skdv::snapshot::read_snapshot;
use skdv::table::Table;
use skdv_core::conserved_triple;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skdv"))
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

const SMALL: &str = "\
grid.n = 128
grid.length = 60
model.alpha = -1
model.beta = 1
model.gamma = -1
integrator.dt = 0.01
integrator.t0 = 2
integrator.t_final = 2.4
initial.kind = gaussian
monitor.sample_dt = 0.02
output.snapshot_times = 2.2
output.figures = conserved,budget,masses
";

fn soliton_i1(dir: &Path, alpha: &str) -> (f64, f64) {
    let out = dir.join(format!("wave{}.skdv", alpha.replace('/', "_")));
    let st = bin().args(["soliton", "--alpha", alpha, "--cstar", "1", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let snap = read_snapshot(&out).unwrap();
    (conserved_triple(&snap.state, &snap.params).i1, snap.params.alpha)
}

#[test]
fn soliton_snapshot_mass() {
    let dir = scratch("soliton");
    // ∫ 2c*(1+6α) sech²(√c* x) dx = 4√c*(1+6α), which is 2 at α = −1/12.
    let (i1, _) = soliton_i1(&dir, "-1/12");
    assert!((i1 - 2.0).abs() <= 1e-8, "i1 = {i1}");
    let (i1, alpha) = soliton_i1(&dir, "-0.0833333");
    assert!((i1 - 4.0 * (1.0 + 6.0 * alpha)).abs() <= 1e-8, "i1 = {i1}");
}

#[test]
fn soliton_rejects_alpha_outside_the_window() {
    let dir = scratch("soliton_bad");
    let out = dir.join("w.skdv");
    let o = bin().args(["soliton", "--alpha", "0.1", "--cstar", "1", "--out"]).arg(&out).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    assert!(!out.exists());
}

#[test]
fn run_populates_the_output_directory() {
    let dir = scratch("run");
    let cfg = dir.join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.join("out");
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["timeseries.csv", "config.cfg", "snapshot_t2.2.skdv", "conserved.svg", "budget.svg", "masses.svg"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let t = Table::read(&out.join("timeseries.csv")).unwrap();
    assert_eq!(t.rows.len(), 21);
    let res = t.column("residual_j").unwrap();
    assert!(res[0].is_nan() && res[20].is_nan());
    assert!(res[1..20].iter().all(|r| r.is_finite()));
    let snap = read_snapshot(&out.join("snapshot_t2.2.skdv")).unwrap();
    assert!((snap.state.t - 2.2).abs() < 1e-12);

    // Budget recomputed from snapshots agrees with the streamed row.
    let again = dir.join("again.cfg");
    fs::write(&again, SMALL.replace("output.snapshot_times = 2.2", "output.snapshot_times = 2.18, 2.2, 2.22")).unwrap();
    let out2 = dir.join("out2");
    assert!(bin().args(["run", "--config"]).arg(&again).arg("--out").arg(&out2).status().unwrap().success());
    let snaps: Vec<PathBuf> =
        ["2.18", "2.2", "2.22"].iter().map(|t| out2.join(format!("snapshot_t{t}.skdv"))).collect();
    let o = bin().arg("budget").args(&snaps).arg("--config").arg(&again).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = Table::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let row = t.rows.iter().position(|r| (r[0] - 2.2).abs() < 1e-12).unwrap();
    for col in ["j", "residual_j", "residual_i", "a2", "b5"] {
        let (x, y) = (b.column(col).unwrap()[0], t.column(col).unwrap()[row]);
        assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-300), "{col}: {x} vs {y}");
    }
}

#[test]
fn constraint_errors_exit_nonzero_with_key_path() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, format!("{SMALL}virial.p1 = 0.7\n")).unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.join("o")).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("virial.p1") && err.contains("window:"), "{err}");
}

#[test]
fn sweep_runs_each_config_in_its_own_directory() {
    let dir = scratch("sweep");
    let a = dir.join("a.cfg");
    let b = dir.join("b.cfg");
    fs::write(&a, SMALL).unwrap();
    fs::write(&b, SMALL.replace("model.alpha = -1", "model.alpha = -0.5")).unwrap();
    let out = dir.join("out");
    let st = bin().env("SKDV_THREADS", "2").args(["sweep", "--out"]).arg(&out).arg(&a).arg(&b).status().unwrap();
    assert!(st.success());
    let ta = fs::read_to_string(out.join("a/timeseries.csv")).unwrap();
    let tb = fs::read_to_string(out.join("b/timeseries.csv")).unwrap();
    assert_ne!(ta, tb);
    let o = bin().env("SKDV_THREADS", "zero").args(["sweep", "--out"]).arg(&out).arg(&a).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = fs::read_to_string(&path).unwrap();
            skdv::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
