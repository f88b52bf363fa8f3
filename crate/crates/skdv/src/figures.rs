//! SVG figures rendered from the CSV alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::FigureToggles;
use crate::error::{io_err, CliError, Result};
use crate::table::Table;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
/// Smallest value drawn on a log axis.
const LOG_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone)]
enum Mark {
    Line,
    /// Filled band between `base` and the series values.
    Band {
        base: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct Series {
    name: String,
    xs: Vec<f64>,
    ys: Vec<f64>,
    mark: Mark,
}

#[derive(Debug, Clone)]
struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    log_y: bool,
    series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&v.abs()) {
        format!("{}", (v * 1e4).round() / 1e4)
    } else {
        format!("{v:.1e}")
    }
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

impl Plot {
    fn render(&self) -> String {
        let tf = |y: f64| if self.log_y { y.max(LOG_FLOOR).log10() } else { y };
        let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            let bases = match &s.mark {
                Mark::Band { base } => base.as_slice(),
                Mark::Line => &[],
            };
            for (k, (&x, &y)) in s.xs.iter().zip(&s.ys).enumerate() {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                xr = (xr.0.min(x), xr.1.max(x));
                for v in std::iter::once(y).chain(bases.get(k).copied()) {
                    let v = tf(v);
                    yr = (yr.0.min(v), yr.1.max(v));
                }
            }
        }
        if !(xr.0 < xr.1) {
            xr = (xr.0 - 0.5, xr.0 + 0.5);
        }
        if !(yr.0 < yr.1) {
            yr = (yr.0 - 0.5, yr.0 + 0.5);
        }
        let pad = 0.05 * (yr.1 - yr.0);
        let yr = (yr.0 - pad, yr.1 + pad);
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let px = |x: f64| MARGIN_L + (x - xr.0) / (xr.1 - xr.0) * pw;
        let py = |y: f64| MARGIN_T + (yr.1 - tf(y)) / (yr.1 - yr.0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_L + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        for t in linear_ticks(xr.0, xr.1) {
            let x = px(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##,
                MARGIN_T,
                MARGIN_T + ph
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                MARGIN_T + ph + 16.0,
                tick_label(t)
            );
        }
        let yticks: Vec<(f64, String)> = if self.log_y {
            let (a, b) = (yr.0.ceil() as i32, yr.1.floor() as i32);
            let stride = ((b - a) / 8 + 1).max(1);
            (a..=b).step_by(stride as usize).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            linear_ticks(yr.0, yr.1).into_iter().map(|t| (t, tick_label(t))).collect()
        };
        for (v, label) in yticks {
            let y = py(v);
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##,
                MARGIN_L + pw
            );
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, MARGIN_L - 6.0, y + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_T + ph / 2.0,
            escape(&self.ylabel)
        );

        for (k, ser) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<usize> =
                (0..ser.xs.len()).filter(|&i| ser.xs[i].is_finite() && ser.ys[i].is_finite()).collect();
            let path = |it: &mut dyn Iterator<Item = (f64, f64)>| {
                it.map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect::<Vec<_>>().join(" ")
            };
            match &ser.mark {
                Mark::Line => {
                    let p = path(&mut pts.iter().map(|&i| (ser.xs[i], ser.ys[i])));
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{p}"/>"#);
                }
                Mark::Band { base } => {
                    let top = pts.iter().map(|&i| (ser.xs[i], ser.ys[i]));
                    let bottom = pts.iter().rev().map(|&i| (ser.xs[i], base[i]));
                    let p = path(&mut top.chain(bottom));
                    let _ = writeln!(
                        s,
                        r#"<polygon fill="{color}" fill-opacity="0.45" stroke="{color}" stroke-width="0.5" points="{p}"/>"#
                    );
                }
            }
            let ly = MARGIN_T + 14.0 + 18.0 * k as f64;
            let lx = MARGIN_L + pw + 12.0;
            let _ = writeln!(s, r#"<rect x="{lx}" y="{}" width="14" height="4" fill="{color}"/>"#, ly - 6.0);
            let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 20.0, escape(&ser.name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn line(name: &str, xs: &[f64], ys: Vec<f64>) -> Series {
    Series { name: name.into(), xs: xs.to_vec(), ys, mark: Mark::Line }
}

fn conserved_plot(t: &Table) -> Result<Plot> {
    let ts = t.column("t")?;
    let mut series = Vec::new();
    for name in ["i1", "i2", "i3"] {
        let c = t.column(name)?;
        let scale = c[0].abs().max(skdv_core::conserved::DRIFT_FLOOR);
        series.push(line(&format!("{name} drift"), &ts, c.iter().map(|x| (x - c[0]).abs() / scale).collect()));
    }
    Ok(Plot {
        title: "Relative drift of conserved quantities".into(),
        xlabel: "t".into(),
        ylabel: "|I(t) − I(t0)| / |I(t0)|".into(),
        log_y: true,
        series,
    })
}

fn budget_plot(t: &Table) -> Result<Plot> {
    let keep: Vec<usize> = {
        let r = t.index("residual_j")?;
        (0..t.rows.len()).filter(|&i| t.rows[i][r].is_finite()).collect()
    };
    if keep.is_empty() {
        return Err(CliError::Schema("no rows carry a J budget (all samples at t ≤ 1 or at the ends)".into()));
    }
    let pick = |name: &str| -> Result<Vec<f64>> {
        let c = t.column(name)?;
        Ok(keep.iter().map(|&i| c[i]).collect())
    };
    let ts = pick("t")?;
    let mut a1 = vec![0.0; ts.len()];
    for k in 1..=8 {
        for (s, x) in a1.iter_mut().zip(pick(&format!("a1_{k}"))?) {
            *s += x;
        }
    }
    let terms = [("A1", a1), ("A2", pick("a2")?), ("A3", pick("a3")?), ("A4", pick("a4")?)];
    let mut up = vec![0.0; ts.len()];
    let mut down = vec![0.0; ts.len()];
    let mut series = Vec::new();
    for (name, vals) in terms {
        let mut base = Vec::with_capacity(ts.len());
        let mut top = Vec::with_capacity(ts.len());
        for (i, &v) in vals.iter().enumerate() {
            let acc = if v >= 0.0 { &mut up[i] } else { &mut down[i] };
            base.push(*acc);
            *acc += v;
            top.push(*acc);
        }
        series.push(Series { name: name.into(), xs: ts.clone(), ys: top, mark: Mark::Band { base } });
    }
    series.push(line("residual", &ts, pick("residual_j")?));
    Ok(Plot { title: "Budget of dJ/dt".into(), xlabel: "t".into(), ylabel: "term value".into(), log_y: false, series })
}

fn masses_plot(t: &Table) -> Result<Plot> {
    let regions = t.regions();
    if regions.is_empty() {
        return Err(CliError::Schema("no mass columns".into()));
    }
    let keep: Vec<usize> = {
        let c = t.column("t")?;
        (0..t.rows.len()).filter(|&i| c[i] > 1.0).collect()
    };
    let pick = |name: &str| -> Result<Vec<f64>> {
        let c = t.column(name)?;
        Ok(keep.iter().map(|&i| c[i]).collect())
    };
    let ts = pick("t")?;
    let mut series = Vec::new();
    for r in &regions {
        let u2 = pick(&format!("mass_u2_{r}"))?;
        let v2 = pick(&format!("mass_v2_{r}"))?;
        series.push(line(&format!("mass {r}"), &ts, u2.iter().zip(&v2).map(|(a, b)| a + b).collect()));
        series.push(line(&format!("tail min {r}"), &ts, pick(&format!("tailmin_{r}"))?));
    }
    Ok(Plot {
        title: "Local mass ∫(|u|² + v²) over the monitored regions".into(),
        xlabel: "t".into(),
        ylabel: "mass".into(),
        log_y: true,
        series,
    })
}

/// Render the toggled figures from `csv` into `out_dir`. Nothing is written
/// unless every requested figure can be built.
pub fn emit_figures(csv: &Path, toggles: FigureToggles, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let table = Table::read(csv)?;
    if table.rows.is_empty() {
        return Err(CliError::Schema(format!("{}: no data rows", csv.display())));
    }
    let mut plots = Vec::new();
    if toggles.conserved {
        plots.push(("conserved.svg", conserved_plot(&table)?));
    }
    if toggles.budget {
        plots.push(("budget.svg", budget_plot(&table)?));
    }
    if toggles.masses {
        plots.push(("masses.svg", masses_plot(&table)?));
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    for (name, plot) in plots {
        let path = out_dir.join(name);
        fs::write(&path, plot.render()).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
