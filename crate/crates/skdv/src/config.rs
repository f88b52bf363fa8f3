//! Run configuration in the line-oriented `section.key = value` format.
//!
//! Blank lines and text after `#` are ignored. Numbers accept a plain
//! fraction such as `-1/12`. Lists are comma separated. Every key not listed
//! in [`RunConfig::to_text`] output is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use skdv_core::monitor::RegionSpec;
use skdv_core::virial::{default_mu, VirialConfig};
use skdv_core::waves::SolitaryWaveParams;
use skdv_core::{IntegratorOptions, ModelParams, Scheme};

use crate::error::{CliError, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t_final: f64,
    pub options: IntegratorOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VShape {
    Sech2,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `u = A e^{iθ} e^{ikx} e^{−((x−x_u)/w_u)²}`, `v = B·shape((x−x_v)/w_v)`.
    Gaussian {
        u_amplitude: f64,
        u_width: f64,
        u_center: f64,
        u_wavenumber: f64,
        u_phase: f64,
        v_amplitude: f64,
        v_width: f64,
        v_center: f64,
        v_shape: VShape,
    },
    /// KdV soliton with `u = 0`, or the coupled solitary wave.
    Soliton {
        c_star: f64,
        x0: f64,
        coupled: bool,
    },
    Snapshot {
        path: PathBuf,
    },
    Expression {
        u_re: String,
        u_im: String,
        v: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKindName {
    Omega,
    Gamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    pub k: f64,
    pub sample_dt: f64,
    pub regions: Vec<RegionKindName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FigureToggles {
    pub conserved: bool,
    pub budget: bool,
    pub masses: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Overridden by `--out`.
    pub directory: Option<PathBuf>,
    pub snapshot_times: Vec<f64>,
    pub checkpoint_every: Option<f64>,
    pub figures: FigureToggles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ModelParams,
    pub integrator: IntegratorConfig,
    pub initial: InitialData,
    pub virial: VirialConfig,
    pub monitor: MonitorConfig,
    pub output: OutputConfig,
}

pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    match s.split_once('/') {
        Some((num, den)) => {
            let d = parse(den)?;
            if d == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            Ok(parse(num)? / d)
        }
        None => parse(s),
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean (true/false)")),
    }
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Syntax {
                    line,
                    message: format!("expected `section.key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let valid_key = key.split_once('.').is_some_and(|(s, k)| {
                !s.is_empty()
                    && !k.is_empty()
                    && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
                    && !k.contains('.')
            });
            if !valid_key {
                return Err(CliError::Syntax { line, message: format!("malformed key `{key}`") });
            }
            if value.is_empty() {
                return Err(CliError::Syntax { line, message: format!("missing value for `{key}`") });
            }
            if let Some((_, first)) = map.insert(key.to_owned(), (value.to_owned(), line)) {
                return Err(CliError::Syntax {
                    line,
                    message: format!("duplicate key `{key}` (first on line {first})"),
                });
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn value<T>(
        &mut self,
        key: &str,
        default: Option<T>,
        conv: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        match self.take(key) {
            Some((v, line)) => {
                conv(&v).map_err(|message| CliError::Syntax { line, message: format!("{key}: {message}") })
            }
            None => default
                .ok_or_else(|| CliError::Constraint { key: key.into(), message: "required key is missing".into() }),
        }
    }

    fn num(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        self.value(key, default, parse_number)
    }

    fn opt_num(&mut self, key: &str) -> Result<Option<f64>> {
        self.value(key, Some(None), |s| parse_number(s).map(Some))
    }

    fn string(&mut self, key: &str, default: Option<&str>) -> Result<String> {
        self.value(key, default.map(str::to_owned), |s| Ok(s.to_owned()))
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().min_by_key(|(_, (_, line))| *line) {
            Some((key, (_, line))) => Err(CliError::UnknownKey { line, key }),
            None => Ok(()),
        }
    }
}

fn constraint(key: &str, message: impl Into<String>) -> CliError {
    CliError::Constraint { key: key.into(), message: message.into() }
}

fn whole_multiple(key: &str, span: f64, dt: f64) -> Result<()> {
    let k = (span / dt).round();
    if span < 0.0 || (k * dt - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(constraint(key, format!("{span} is not a whole number of steps of dt = {dt}")));
    }
    Ok(())
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_owned()).filter(|t| !t.is_empty()).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;

        let grid = GridConfig {
            n: e.value("grid.n", None, |s| s.parse::<usize>().map_err(|_| format!("`{s}` is not a point count")))?,
            length: e.num("grid.length", None)?,
            center: e.num("grid.center", Some(0.0))?,
        };
        if grid.n < 8 || !grid.n.is_multiple_of(2) {
            return Err(constraint("grid.n", format!("must be even and at least 8, got {}", grid.n)));
        }
        if !(grid.length > 0.0 && grid.length.is_finite()) {
            return Err(constraint("grid.length", format!("must be positive, got {}", grid.length)));
        }

        let model =
            ModelParams::new(e.num("model.alpha", None)?, e.num("model.beta", None)?, e.num("model.gamma", None)?)
                .map_err(|err| constraint("model", err.to_string()))?;

        let options = IntegratorOptions {
            dt: e.num("integrator.dt", None)?,
            sponge_width: e.num("integrator.sponge_width", Some(0.0))?,
            sponge_strength: e.num("integrator.sponge_strength", Some(0.0))?,
            dealias: e.value("integrator.dealias", Some(true), parse_bool)?,
            scheme: e
                .value("integrator.scheme", Some(Scheme::Strang), |s| s.parse::<Scheme>().map_err(|x| x.to_string()))?,
        };
        if let Err(skdv_core::Error::InvalidParameter { name, reason }) = options.validate() {
            return Err(constraint(&format!("integrator.{name}"), reason));
        }
        let integrator = IntegratorConfig {
            t0: e.num("integrator.t0", Some(0.0))?,
            t_final: e.num("integrator.t_final", None)?,
            options,
        };
        if !integrator.t0.is_finite() {
            return Err(constraint("integrator.t0", "must be finite"));
        }
        if !(integrator.t_final >= integrator.t0) {
            return Err(constraint("integrator.t_final", "must not precede integrator.t0"));
        }
        whole_multiple("integrator.t_final", integrator.t_final - integrator.t0, options.dt)?;

        let initial = Self::parse_initial(&mut e, &model)?;

        let theta = e.num("virial.theta", Some(1.0))?;
        let p1 = e.num("virial.p1", Some(0.5))?;
        let q1 = e.num("virial.q1", Some(1.0))?;
        let virial = VirialConfig {
            p1,
            p2: e.num("virial.p2", Some(2.0))?,
            q1,
            r1: e.num("virial.r1", Some(1.0 - p1))?,
            r2: e.num("virial.r2", Some(1.0 + q1))?,
            a: e.num("virial.a", Some(2.0))?,
            b: e.num("virial.b", Some(2.0))?,
            l: e.num("virial.l", Some(1.0))?,
            theta,
            mu: e.num("virial.mu", Some(default_mu(&model, theta)))?,
            m: e.opt_num("virial.m")?,
        };
        if let Some(v) = virial.violations().into_iter().next() {
            return Err(constraint(&format!("virial.{}", v.key), v.message));
        }

        let default_regions = if virial.m.is_some() { "omega,gamma" } else { "omega" };
        let monitor = MonitorConfig {
            k: e.num("monitor.k", Some(1.0))?,
            sample_dt: e.num("monitor.sample_dt", Some(options.dt))?,
            regions: e.value("monitor.regions", Some(default_regions.to_owned()), |s| Ok(s.to_owned())).and_then(
                |s| {
                    list(&s)
                        .iter()
                        .map(|r| match r.as_str() {
                            "omega" => Ok(RegionKindName::Omega),
                            "gamma" => Ok(RegionKindName::Gamma),
                            other => {
                                Err(constraint("monitor.regions", format!("unknown region `{other}` (omega, gamma)")))
                            }
                        })
                        .collect::<Result<Vec<_>>>()
                },
            )?,
        };
        if !(monitor.k > 0.0 && monitor.k.is_finite()) {
            return Err(constraint("monitor.k", format!("must be positive, got {}", monitor.k)));
        }
        if !(monitor.sample_dt > 0.0) {
            return Err(constraint("monitor.sample_dt", "must be positive"));
        }
        whole_multiple("monitor.sample_dt", monitor.sample_dt, options.dt)?;
        if monitor.regions.contains(&RegionKindName::Gamma) && virial.m.is_none() {
            return Err(constraint("monitor.regions", "region `gamma` needs virial.m"));
        }

        let output = OutputConfig {
            directory: e.value("output.directory", Some(None), |s| Ok(Some(PathBuf::from(s))))?,
            snapshot_times: e.value("output.snapshot_times", Some(Vec::new()), |s| {
                list(s).iter().map(|t| parse_number(t)).collect()
            })?,
            checkpoint_every: e.opt_num("output.checkpoint_every")?,
            figures: e.value("output.figures", Some(FigureToggles::default()), |s| {
                let mut f = FigureToggles::default();
                for name in list(s) {
                    match name.as_str() {
                        "conserved" => f.conserved = true,
                        "budget" => f.budget = true,
                        "masses" => f.masses = true,
                        "none" => {}
                        other => return Err(format!("unknown figure `{other}` (conserved, budget, masses, none)")),
                    }
                }
                Ok(f)
            })?,
        };
        for &t in &output.snapshot_times {
            if !(t >= integrator.t0 && t <= integrator.t_final) {
                return Err(constraint("output.snapshot_times", format!("{t} lies outside [t0, t_final]")));
            }
            whole_multiple("output.snapshot_times", t - integrator.t0, options.dt)?;
        }
        if let Some(c) = output.checkpoint_every {
            if !(c > 0.0) {
                return Err(constraint("output.checkpoint_every", "must be positive"));
            }
            whole_multiple("output.checkpoint_every", c, options.dt)?;
        }

        e.finish()?;
        let cfg = Self { grid, model, integrator, initial, virial, monitor, output };
        cfg.check_regions_fit()?;
        Ok(cfg)
    }

    fn parse_initial(e: &mut Entries, model: &ModelParams) -> Result<InitialData> {
        let kind = e.string("initial.kind", None)?;
        Ok(match kind.as_str() {
            "gaussian" => InitialData::Gaussian {
                u_amplitude: e.num("initial.u_amplitude", Some(1.0))?,
                u_width: e.num("initial.u_width", Some(1.0))?,
                u_center: e.num("initial.u_center", Some(0.0))?,
                u_wavenumber: e.num("initial.u_wavenumber", Some(0.0))?,
                u_phase: e.num("initial.u_phase", Some(0.0))?,
                v_amplitude: e.num("initial.v_amplitude", Some(1.0))?,
                v_width: e.num("initial.v_width", Some(1.0))?,
                v_center: e.num("initial.v_center", Some(0.0))?,
                v_shape: e.value("initial.v_shape", Some(VShape::Sech2), |s| match s {
                    "sech2" => Ok(VShape::Sech2),
                    "gaussian" => Ok(VShape::Gaussian),
                    _ => Err(format!("unknown shape `{s}` (sech2, gaussian)")),
                })?,
            },
            "soliton" => {
                let c_star = e.num("initial.c_star", Some(1.0))?;
                let x0 = e.num("initial.x0", Some(0.0))?;
                let coupled = e.value("initial.coupled", Some(false), parse_bool)?;
                if !(c_star > 0.0) {
                    return Err(constraint("initial.c_star", format!("must be positive, got {c_star}")));
                }
                if coupled {
                    let wave = SolitaryWaveParams::new(c_star, model.alpha, x0)
                        .map_err(|err| constraint("model.alpha", err.to_string()))?;
                    let want = wave.model_params();
                    if (model.beta - want.beta).abs() > 1e-12 || (model.gamma - want.gamma).abs() > 1e-12 {
                        return Err(constraint(
                            "model",
                            format!("coupled solitary wave needs beta = -1 and gamma = alpha/2 = {}", want.gamma),
                        ));
                    }
                }
                InitialData::Soliton { c_star, x0, coupled }
            }
            "snapshot" => InitialData::Snapshot { path: PathBuf::from(e.string("initial.path", None)?) },
            "expression" => {
                let u_re = e.string("initial.u_re", Some("0"))?;
                let u_im = e.string("initial.u_im", Some("0"))?;
                let v = e.string("initial.v", Some("0"))?;
                for (key, src) in [("initial.u_re", &u_re), ("initial.u_im", &u_im), ("initial.v", &v)] {
                    Expr::parse(src).map_err(|m| constraint(key, m))?;
                }
                InitialData::Expression { u_re, u_im, v }
            }
            other => {
                return Err(constraint(
                    "initial.kind",
                    format!("unknown kind `{other}` (gaussian, soliton, snapshot, expression)"),
                ))
            }
        })
    }

    pub fn region_specs(&self) -> Vec<RegionSpec> {
        self.monitor
            .regions
            .iter()
            .map(|r| match r {
                RegionKindName::Omega => RegionSpec::centered(self.virial.p1, self.monitor.k),
                RegionKindName::Gamma => {
                    RegionSpec::ray(self.virial.m.unwrap_or(f64::NAN), self.virial.p1, self.monitor.k)
                }
            })
            .collect::<std::result::Result<_, _>>()
            .expect("validated at parse time")
    }

    fn check_regions_fit(&self) -> Result<()> {
        let t = self.integrator.t_final;
        if t <= 1.0 {
            return Ok(());
        }
        let lo = self.grid.center - 0.5 * self.grid.length;
        let hi = self.grid.center + 0.5 * self.grid.length;
        for spec in self.region_specs() {
            // Both edges move monotonically in t, so checking t_final suffices.
            let (a, b) = spec.interval(t)?;
            if a < lo || b > hi {
                return Err(constraint(
                    "monitor.k",
                    format!("region `{}` reaches [{a}, {b}] by t_final, outside the box [{lo}, {hi}]", spec.label()),
                ));
            }
        }
        Ok(())
    }

    /// Canonical text with every default written out.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let f = |x: f64| format!("{x:?}");
        kv("grid.n", self.grid.n.to_string());
        kv("grid.length", f(self.grid.length));
        kv("grid.center", f(self.grid.center));
        kv("model.alpha", f(self.model.alpha));
        kv("model.beta", f(self.model.beta));
        kv("model.gamma", f(self.model.gamma));
        let o = &self.integrator.options;
        kv("integrator.dt", f(o.dt));
        kv("integrator.t0", f(self.integrator.t0));
        kv("integrator.t_final", f(self.integrator.t_final));
        kv("integrator.sponge_width", f(o.sponge_width));
        kv("integrator.sponge_strength", f(o.sponge_strength));
        kv("integrator.scheme", o.scheme.to_string());
        kv("integrator.dealias", o.dealias.to_string());
        match &self.initial {
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
                kv("initial.kind", "gaussian".into());
                kv("initial.u_amplitude", f(*u_amplitude));
                kv("initial.u_width", f(*u_width));
                kv("initial.u_center", f(*u_center));
                kv("initial.u_wavenumber", f(*u_wavenumber));
                kv("initial.u_phase", f(*u_phase));
                kv("initial.v_amplitude", f(*v_amplitude));
                kv("initial.v_width", f(*v_width));
                kv("initial.v_center", f(*v_center));
                kv(
                    "initial.v_shape",
                    match v_shape {
                        VShape::Sech2 => "sech2".into(),
                        VShape::Gaussian => "gaussian".into(),
                    },
                );
            }
            InitialData::Soliton { c_star, x0, coupled } => {
                kv("initial.kind", "soliton".into());
                kv("initial.c_star", f(*c_star));
                kv("initial.x0", f(*x0));
                kv("initial.coupled", coupled.to_string());
            }
            InitialData::Snapshot { path } => {
                kv("initial.kind", "snapshot".into());
                kv("initial.path", path.display().to_string());
            }
            InitialData::Expression { u_re, u_im, v } => {
                kv("initial.kind", "expression".into());
                kv("initial.u_re", u_re.clone());
                kv("initial.u_im", u_im.clone());
                kv("initial.v", v.clone());
            }
        }
        let v = &self.virial;
        for (k, x) in [
            ("p1", v.p1),
            ("p2", v.p2),
            ("q1", v.q1),
            ("r1", v.r1),
            ("r2", v.r2),
            ("a", v.a),
            ("b", v.b),
            ("l", v.l),
            ("theta", v.theta),
            ("mu", v.mu),
        ] {
            kv(&format!("virial.{k}"), f(x));
        }
        if let Some(m) = v.m {
            kv("virial.m", f(m));
        }
        kv("monitor.k", f(self.monitor.k));
        kv("monitor.sample_dt", f(self.monitor.sample_dt));
        kv(
            "monitor.regions",
            self.monitor
                .regions
                .iter()
                .map(|r| match r {
                    RegionKindName::Omega => "omega",
                    RegionKindName::Gamma => "gamma",
                })
                .collect::<Vec<_>>()
                .join(","),
        );
        if let Some(d) = &self.output.directory {
            kv("output.directory", d.display().to_string());
        }
        if !self.output.snapshot_times.is_empty() {
            kv("output.snapshot_times", self.output.snapshot_times.iter().map(|&t| f(t)).collect::<Vec<_>>().join(","));
        }
        if let Some(c) = self.output.checkpoint_every {
            kv("output.checkpoint_every", f(c));
        }
        let fig = self.output.figures;
        let names: Vec<&str> = [("conserved", fig.conserved), ("budget", fig.budget), ("masses", fig.masses)]
            .iter()
            .filter(|(_, on)| *on)
            .map(|(n, _)| *n)
            .collect();
        kv("output.figures", if names.is_empty() { "none".into() } else { names.join(",") });
        s
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::parse(text)
}
