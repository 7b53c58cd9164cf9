//! Run configuration: a flat `key = value` file with `[section]` headers and
//! `#` comments (a TOML subset), embedded presets, and validation that
//! reports every violation with its key path.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolve1d::EvolveConfig;
use crate::initial_data::{DataMode, DataParams};
use crate::model_eigen::PhysParams;
use crate::shock_analysis::AnalysisParams;

pub const PRESETS: [&str; 3] = ["paper-desk", "scalar-reduction", "smoke"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    /// Grid points per η.
    pub resolution: f64,
    /// Extra room beyond the light cone, in units of η.
    pub margin: f64,
    /// Galilean frame speed (length/time).
    pub frame_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSection {
    pub cfl: f64,
    pub dissipation: f64,
    /// Final time; `None` means `t_max_factor / (|c¹₁₁(0)|·W₀)`.
    pub t_max: Option<f64>,
    pub t_max_factor: f64,
    /// Gradient stop as a multiple of the initial `max|∂ₓφ₁|`; `None` disables it.
    pub m_stop: Option<f64>,
    /// Coarse snapshots per predicted shock time.
    pub snapshots_per_t: usize,
    pub dense_factor: usize,
    pub activity_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSection {
    /// Family-1 seeds inside `[η, 2η]`.
    pub inner: usize,
    /// Seeds added on each side at the same spacing.
    pub margin: usize,
    pub substeps: usize,
    /// Seeds inside `[η, 2η]` for families 2 to 4.
    pub other_inner: usize,
    /// Spacing divisor of the refined family-1 fan near the shock seed.
    pub refine_factor: usize,
    /// Half width of the refined window, in units of η.
    pub refine_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub thetas: Vec<f64>,
    pub etas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevSection {
    pub s: f64,
    pub n_base: usize,
    pub levels: usize,
    pub pad: usize,
    /// `η = 2^{-k}` for each listed `k`.
    pub eta_exponents: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSection {
    pub samples: usize,
    /// Ball radius for the invariant sample (independent of `phys.kappa`).
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HygieneSection {
    /// Base resolution of the three-level convergence study (points per η).
    pub conv_resolution: f64,
    /// Comparison times as fractions of the predicted shock time.
    pub conv_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub dir: String,
    /// Write ELWV snapshots every this many coarse snapshots (0 = none).
    pub snapshot_stride: usize,
    /// Record stride of the per-fan CSV files (0 = none).
    pub fan_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: String,
    pub seed: u64,
    pub workers: usize,
    pub phys: PhysParams,
    pub data: DataParams,
    pub data_mode: DataMode,
    pub grid: GridSection,
    pub evolve: EvolveSection,
    pub trace: TraceSection,
    pub analysis: AnalysisParams,
    pub sweep: SweepSection,
    pub sobolev: SobolevSection,
    pub eigen: EigenSection,
    pub hygiene: HygieneSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::preset("paper-desk").expect("built-in preset")
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<RunConfig> {
        let mut c = RunConfig {
            preset: "paper-desk".into(),
            seed: 20240607,
            workers: 1,
            phys: PhysParams {
                c1: 2.0,
                c2: 1.0,
                sigma0: 1.0,
                sigma1: -1.0,
                kappa: 0.05,
                sigma2: None,
            },
            data: DataParams {
                theta: 0.1,
                alpha: 0.25,
                delta: 0.6,
                eta: 0.05,
            },
            data_mode: DataMode::Regularized,
            grid: GridSection {
                resolution: 100.0,
                margin: 1.0,
                frame_speed: 0.0,
            },
            evolve: EvolveSection {
                cfl: 0.85,
                dissipation: 0.02,
                t_max: None,
                t_max_factor: 1.5,
                m_stop: Some(50.0),
                snapshots_per_t: 1000,
                dense_factor: 8,
                activity_tol: 1e-10,
            },
            trace: TraceSection {
                inner: 512,
                margin: 64,
                substeps: 4,
                other_inner: 128,
                refine_factor: 2,
                refine_halfwidth: 0.25,
            },
            analysis: AnalysisParams::default(),
            sweep: SweepSection {
                thetas: vec![0.1, 0.05, 0.02],
                etas: vec![0.05, 0.025, 0.0125],
            },
            sobolev: SobolevSection {
                s: 0.75,
                n_base: 64,
                levels: 3,
                pad: 4,
                eta_exponents: (6..=14).collect(),
            },
            eigen: EigenSection {
                samples: 10_000,
                kappa: 0.01,
            },
            hygiene: HygieneSection {
                conv_resolution: 100.0,
                conv_times: vec![0.05, 0.1, 0.2, 0.4, 0.6, 0.8],
            },
            output: OutputSection {
                dir: "elwave-out".into(),
                snapshot_stride: 500,
                fan_stride: 50,
            },
        };
        match name {
            "paper-desk" => {}
            "scalar-reduction" => {
                c.preset = name.into();
                c.data_mode = DataMode::PaperLiteral;
                c.sweep.thetas = vec![0.1];
                c.sweep.etas = vec![0.05];
            }
            "smoke" => {
                c.preset = name.into();
                c.grid.resolution = 40.0;
                c.evolve.snapshots_per_t = 250;
                c.evolve.dense_factor = 4;
                c.trace.inner = 128;
                c.trace.margin = 16;
                c.trace.other_inner = 32;
                c.sweep.thetas = vec![0.1];
                c.sweep.etas = vec![0.05];
                c.sobolev.n_base = 32;
                c.sobolev.eta_exponents = (6..=10).collect();
                c.eigen.samples = 500;
                c.hygiene.conv_resolution = 20.0;
                c.hygiene.conv_times = vec![0.005, 0.01];
                c.output.snapshot_stride = 0;
                c.output.fan_stride = 0;
            }
            other => {
                return Err(Error::Config(format!(
                    "preset: unknown preset {other:?} (known: {})",
                    PRESETS.join(", ")
                )))
            }
        }
        Ok(c)
    }

    /// Predicted shock time `1/(|c¹₁₁(0)|·W₀)` for the configured data.
    pub fn t_pred(&self, dp: &DataParams) -> f64 {
        let (w0, _) = crate::initial_data::compute_w0_z0(dp);
        1.0 / (self.phys.c111_at_zero().abs() * w0)
    }

    pub fn evolve_config(&self, dp: &DataParams) -> EvolveConfig {
        let t_pred = self.t_pred(dp);
        let e = &self.evolve;
        EvolveConfig {
            cfl: e.cfl,
            dissipation: e.dissipation,
            t_max: e.t_max.unwrap_or(e.t_max_factor * t_pred),
            m_stop_factor: e.m_stop,
            snapshot_dt: t_pred / e.snapshots_per_t as f64,
            dense_factor: e.dense_factor,
            early_window: 4.0 * dp.eta,
            frame_speed: self.grid.frame_speed,
            activity_tol: e.activity_tol,
            ..EvolveConfig::default()
        }
    }

    /// Every invariant violation, prefixed with its key path.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut push = |prefix: &str, msgs: Vec<String>| {
            for m in msgs {
                v.push(format!("{prefix}.{m}"));
            }
        };
        if let Err(e) = self.phys.validate() {
            push("phys", vec![format!("(c1, c2, sigma0, sigma1, kappa): {e}")]);
        } else if let Err(e) = crate::model_eigen::min_gap_sigma(&self.phys) {
            push("phys", vec![format!("kappa: {e}")]);
        }
        push("data", self.data.violations());
        push("analysis", self.analysis.violations());
        let g = &self.grid;
        let mut gv = Vec::new();
        if !(g.resolution >= 8.0) {
            gv.push(format!("resolution: need ≥ 8 points per η, got {}", g.resolution));
        }
        if !(g.margin >= 0.0) {
            gv.push(format!("margin: need ≥ 0, got {}", g.margin));
        }
        if !g.frame_speed.is_finite() || g.frame_speed.abs() > 10.0 * self.phys.c1 {
            gv.push(format!("frame_speed: need |v| ≤ 10·c1, got {}", g.frame_speed));
        }
        push("grid", gv);
        let e = &self.evolve;
        let mut ev = Vec::new();
        if !(e.cfl > 0.0 && e.cfl < 1.0) {
            ev.push(format!("cfl: need 0 < cfl < 1, got {}", e.cfl));
        }
        if !(e.dissipation >= 0.0) {
            ev.push(format!("dissipation: need ≥ 0, got {}", e.dissipation));
        }
        if let Some(t) = e.t_max {
            if !(t > 0.0 && t.is_finite()) {
                ev.push(format!("t_max: need > 0, got {t}"));
            }
        }
        if !(e.t_max_factor > 1.0) {
            ev.push(format!("t_max_factor: need > 1, got {}", e.t_max_factor));
        }
        if let Some(m) = e.m_stop {
            if !(m > 1.0) {
                ev.push(format!("m_stop: need > 1, got {m}"));
            }
        }
        if e.snapshots_per_t < 10 {
            ev.push(format!("snapshots_per_t: need ≥ 10, got {}", e.snapshots_per_t));
        }
        if e.dense_factor == 0 {
            ev.push("dense_factor: need ≥ 1".into());
        }
        if !(e.activity_tol >= 0.0 && e.activity_tol < 1e-3) {
            ev.push(format!("activity_tol: need 0 ≤ tol < 1e-3, got {}", e.activity_tol));
        }
        push("evolve", ev);
        let t = &self.trace;
        let mut tv = Vec::new();
        if t.inner < 8 {
            tv.push(format!("inner: need ≥ 8, got {}", t.inner));
        }
        if t.other_inner < 4 {
            tv.push(format!("other_inner: need ≥ 4, got {}", t.other_inner));
        }
        if t.margin < 2 {
            tv.push(format!("margin: need ≥ 2, got {}", t.margin));
        }
        if t.substeps == 0 {
            tv.push("substeps: need ≥ 1".into());
        }
        if t.refine_factor == 0 {
            tv.push("refine_factor: need ≥ 1".into());
        }
        if !(t.refine_halfwidth > 0.0 && t.refine_halfwidth <= 0.5) {
            tv.push(format!("refine_halfwidth: need in (0, 0.5], got {}", t.refine_halfwidth));
        }
        push("trace", tv);
        let mut sv = Vec::new();
        if self.sweep.thetas.is_empty() {
            sv.push("thetas: need at least one value".into());
        }
        for (k, th) in self.sweep.thetas.iter().enumerate() {
            if !(*th > 0.0 && *th < 1.0) {
                sv.push(format!("thetas[{k}]: need 0 < θ < 1, got {th}"));
            }
        }
        if self.sweep.etas.is_empty() {
            sv.push("etas: need at least one value".into());
        }
        for (k, eta) in self.sweep.etas.iter().enumerate() {
            if !(*eta > 0.0 && *eta < 0.5) {
                sv.push(format!("etas[{k}]: need 0 < η < 1/2, got {eta}"));
            }
        }
        push("sweep", sv);
        let s = &self.sobolev;
        let mut so = Vec::new();
        if !(s.s >= 0.0 && s.s < 2.0) {
            so.push(format!("s: need 0 ≤ s < 2, got {}", s.s));
        }
        if !s.n_base.is_power_of_two() || s.n_base < 8 {
            so.push(format!("n_base: need a power of two ≥ 8, got {}", s.n_base));
        }
        if s.levels == 0 || s.levels > 6 {
            so.push(format!("levels: need 1..=6, got {}", s.levels));
        }
        if !s.pad.is_power_of_two() || s.pad < 4 {
            so.push(format!("pad: need a power of two ≥ 4, got {}", s.pad));
        }
        if s.eta_exponents.is_empty() || s.eta_exponents.iter().any(|k| *k < 2 || *k > 40) {
            so.push(format!("eta_exponents: need values in 2..=40, got {:?}", s.eta_exponents));
        }
        push("sobolev", so);
        let mut ei = Vec::new();
        if self.eigen.samples == 0 {
            ei.push("samples: need ≥ 1".into());
        }
        if !(self.eigen.kappa > 0.0 && self.eigen.kappa < 0.2) {
            ei.push(format!("kappa: need 0 < κ < 0.2, got {}", self.eigen.kappa));
        }
        push("eigen", ei);
        let mut hy = Vec::new();
        if !(self.hygiene.conv_resolution >= 8.0) {
            hy.push(format!("conv_resolution: need ≥ 8, got {}", self.hygiene.conv_resolution));
        }
        if self.hygiene.conv_times.is_empty() {
            hy.push("conv_times: need at least one value".into());
        }
        for (k, t) in self.hygiene.conv_times.iter().enumerate() {
            if !(*t > 0.0 && *t <= 0.8) {
                hy.push(format!("conv_times[{k}]: need in (0, 0.8], got {t}"));
            }
        }
        if self.hygiene.conv_times.windows(2).any(|w| w[1] <= w[0]) {
            hy.push("conv_times: need strictly increasing values".into());
        }
        push("hygiene", hy);
        if self.workers == 0 {
            v.push("workers: need ≥ 1".into());
        }
        if self.output.dir.is_empty() {
            v.push("output.dir: need a non-empty path".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("\n")))
        }
    }

    /// Canonical text form; `parse_config(&c.to_text())` returns `c`.
    pub fn to_text(&self) -> String {
        let f = |x: f64| format!("{x:?}");
        let fl = |xs: &[f64]| format!("[{}]", xs.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", "));
        let opt = |x: Option<f64>, none: &str| x.map(f).unwrap_or_else(|| format!("\"{none}\""));
        let mode = match self.data_mode {
            DataMode::PaperLiteral => "paper-literal",
            DataMode::Regularized => "regularized",
        };
        let p = &self.phys;
        let d = &self.data;
        let g = &self.grid;
        let e = &self.evolve;
        let t = &self.trace;
        let a = &self.analysis;
        let s = &self.sobolev;
        let mut out = String::new();
        out += &format!("preset = \"{}\"\n", self.preset);
        out += &format!("seed = {}          # RNG seed for sampled checks\n", self.seed);
        out += &format!("workers = {}       # concurrent sweep members\n\n", self.workers);
        out += "[phys]\n";
        out += &format!("c1 = {}            # wave speed (length/time)\n", f(p.c1));
        out += &format!("c2 = {}            # wave speed (length/time), c2 < c1\n", f(p.c2));
        out += &format!("sigma0 = {}        # quadratic coupling (1/length)\n", f(p.sigma0));
        out += &format!("sigma1 = {}        # quadratic coupling (1/length)\n", f(p.sigma1));
        out += &format!("kappa = {}         # state-ball radius (dimensionless)\n\n", f(p.kappa));
        out += "[data]\n";
        out += &format!("theta = {}         # seed amplitude (dimensionless)\n", f(d.theta));
        out += &format!("alpha = {}         # log exponent, 0 < alpha < 1/2\n", f(d.alpha));
        out += &format!("delta = {}         # transverse exponent, 2 alpha - delta < 0\n", f(d.delta));
        out += &format!("eta = {}           # support [eta, 2 eta] (length)\n", f(d.eta));
        out += &format!("mode = \"{mode}\"   # regularized | paper-literal\n\n");
        out += "[grid]\n";
        out += &format!("resolution = {}    # points per eta\n", f(g.resolution));
        out += &format!("margin = {}        # beyond the light cone, units of eta\n", f(g.margin));
        out += &format!("frame_speed = {}   # Galilean frame speed (length/time)\n\n", f(g.frame_speed));
        out += "[evolve]\n";
        out += &format!("cfl = {}\n", f(e.cfl));
        out += &format!("dissipation = {}   # fourth-difference coefficient (dimensionless)\n", f(e.dissipation));
        out += &format!("t_max = {}         # time, or \"auto\"\n", opt(e.t_max, "auto"));
        out += &format!("t_max_factor = {}  # auto t_max in units of 1/(|c111(0)| W0)\n", f(e.t_max_factor));
        out += &format!("m_stop = {}        # gradient stop, multiple of initial max|dx phi1|, or \"off\"\n", opt(e.m_stop, "off"));
        out += &format!("snapshots_per_t = {}\n", e.snapshots_per_t);
        out += &format!("dense_factor = {}\n", e.dense_factor);
        out += &format!("activity_tol = {}  # relative to max|Phi|\n\n", f(e.activity_tol));
        out += "[trace]\n";
        out += &format!("inner = {}\n", t.inner);
        out += &format!("margin = {}\n", t.margin);
        out += &format!("substeps = {}\n", t.substeps);
        out += &format!("other_inner = {}\n", t.other_inner);
        out += &format!("refine_factor = {}\n", t.refine_factor);
        out += &format!("refine_halfwidth = {}  # units of eta\n\n", f(t.refine_halfwidth));
        out += "[analysis]\n";
        out += &format!("rho_floor = {}\n", f(a.rho_floor));
        out += &format!("epsilon = {}\n", f(a.epsilon));
        out += &format!("h_min = {}         # units of eta\n", f(a.h_min));
        out += &format!("h_max = {}         # units of eta\n", f(a.h_max));
        out += &format!("grad_window = {}   # range of max|dx phi1| / initial value\n\n", fl(&[a.grad_window.0, a.grad_window.1]));
        out += "[sweep]\n";
        out += &format!("thetas = {}\n", fl(&self.sweep.thetas));
        out += &format!("etas = {}          # length\n\n", fl(&self.sweep.etas));
        out += "[sobolev]\n";
        out += &format!("s = {}\n", f(s.s));
        out += &format!("n_base = {}\n", s.n_base);
        out += &format!("levels = {}\n", s.levels);
        out += &format!("pad = {}\n", s.pad);
        out += &format!(
            "eta_exponents = [{}]  # eta = 2^-k\n\n",
            s.eta_exponents.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
        );
        out += "[eigen]\n";
        out += &format!("samples = {}\n", self.eigen.samples);
        out += &format!("kappa = {}\n\n", f(self.eigen.kappa));
        out += "[hygiene]\n";
        out += &format!("conv_resolution = {}  # points per eta at the coarsest level\n", f(self.hygiene.conv_resolution));
        out += &format!("conv_times = {}  # fractions of 1/(|c111(0)| W0)\n\n", fl(&self.hygiene.conv_times));
        out += "[output]\n";
        out += &format!("dir = {}\n", Value::String(self.output.dir.clone()));
        out += &format!("snapshot_stride = {}\n", self.output.snapshot_stride);
        out += &format!("fan_stride = {}\n", self.output.fan_stride);
        out
    }
}

/// Collects typed lookups and remembers which keys were consumed.
struct Reader<'a> {
    root: &'a Table,
    seen: Vec<String>,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn lookup(&mut self, path: &str) -> Option<&'a Value> {
        self.seen.push(path.to_string());
        let mut parts = path.split('.');
        let first = parts.next()?;
        let mut v = self.root.get(first)?;
        for part in parts {
            v = v.as_table()?.get(part)?;
        }
        Some(v)
    }

    fn mismatch(&mut self, path: &str, want: &str, got: &Value) {
        self.errors.push(format!("{path}: expected {want}, got {} `{got}`", got.type_str()));
    }

    fn float(&mut self, path: &str, slot: &mut f64) {
        match self.lookup(path) {
            None => {}
            Some(Value::Float(x)) => *slot = *x,
            Some(Value::Integer(i)) => *slot = *i as f64,
            Some(v) => self.mismatch(path, "a number", v),
        }
    }

    fn uint(&mut self, path: &str, slot: &mut usize) {
        match self.lookup(path) {
            None => {}
            Some(Value::Integer(i)) if *i >= 0 => *slot = *i as usize,
            Some(v) => self.mismatch(path, "a non-negative integer", v),
        }
    }

    fn opt_float(&mut self, path: &str, none: &str, slot: &mut Option<f64>) {
        match self.lookup(path) {
            None => {}
            Some(Value::Float(x)) => *slot = Some(*x),
            Some(Value::Integer(i)) => *slot = Some(*i as f64),
            Some(Value::String(s)) if s == none => *slot = None,
            Some(v) => self.mismatch(path, &format!("a number or \"{none}\""), v),
        }
    }

    fn string(&mut self, path: &str, slot: &mut String) {
        match self.lookup(path) {
            None => {}
            Some(Value::String(s)) => *slot = s.clone(),
            Some(v) => self.mismatch(path, "a string", v),
        }
    }

    fn floats(&mut self, path: &str, slot: &mut Vec<f64>) {
        match self.lookup(path) {
            None => {}
            Some(Value::Array(xs)) => {
                let mut out = Vec::new();
                for (k, x) in xs.iter().enumerate() {
                    match x {
                        Value::Float(f) => out.push(*f),
                        Value::Integer(i) => out.push(*i as f64),
                        other => {
                            self.mismatch(&format!("{path}[{k}]"), "a number", other);
                            return;
                        }
                    }
                }
                *slot = out;
            }
            Some(v) => self.mismatch(path, "an array of numbers", v),
        }
    }

    fn ints(&mut self, path: &str, slot: &mut Vec<i32>) {
        match self.lookup(path) {
            None => {}
            Some(Value::Array(xs)) => {
                let mut out = Vec::new();
                for (k, x) in xs.iter().enumerate() {
                    match x {
                        Value::Integer(i) if i32::try_from(*i).is_ok() => out.push(*i as i32),
                        other => {
                            self.mismatch(&format!("{path}[{k}]"), "an integer", other);
                            return;
                        }
                    }
                }
                *slot = out;
            }
            Some(v) => self.mismatch(path, "an array of integers", v),
        }
    }

    fn unknown_keys(&self) -> Vec<String> {
        fn walk(prefix: &str, t: &Table, out: &mut Vec<String>) {
            for (k, v) in t {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match v {
                    Value::Table(sub) => walk(&path, sub, out),
                    _ => out.push(path),
                }
            }
        }
        let mut all = Vec::new();
        walk("", self.root, &mut all);
        all.into_iter().filter(|p| !self.seen.contains(p)).collect()
    }
}

/// Parses and validates a configuration. On failure the error lists every
/// problem found, one per line, each starting with its key path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("syntax: {}", e.message().trim())))?;
    let preset = match root.get("preset") {
        None => "paper-desk".to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(v) => return Err(Error::Config(format!("preset: expected a string, got {}", v.type_str()))),
    };
    let mut c = RunConfig::preset(&preset)?;
    let mut r = Reader {
        root: &root,
        seen: vec!["preset".into()],
        errors: Vec::new(),
    };
    let mut seed = c.seed as usize;
    r.uint("seed", &mut seed);
    c.seed = seed as u64;
    r.uint("workers", &mut c.workers);
    r.float("phys.c1", &mut c.phys.c1);
    r.float("phys.c2", &mut c.phys.c2);
    r.float("phys.sigma0", &mut c.phys.sigma0);
    r.float("phys.sigma1", &mut c.phys.sigma1);
    r.float("phys.kappa", &mut c.phys.kappa);
    r.float("data.theta", &mut c.data.theta);
    r.float("data.alpha", &mut c.data.alpha);
    r.float("data.delta", &mut c.data.delta);
    r.float("data.eta", &mut c.data.eta);
    let mut mode = String::new();
    r.string("data.mode", &mut mode);
    match mode.as_str() {
        "" => {}
        "regularized" => c.data_mode = DataMode::Regularized,
        "paper-literal" => c.data_mode = DataMode::PaperLiteral,
        other => r.errors.push(format!("data.mode: expected \"regularized\" or \"paper-literal\", got {other:?}")),
    }
    r.float("grid.resolution", &mut c.grid.resolution);
    r.float("grid.margin", &mut c.grid.margin);
    r.float("grid.frame_speed", &mut c.grid.frame_speed);
    r.float("evolve.cfl", &mut c.evolve.cfl);
    r.float("evolve.dissipation", &mut c.evolve.dissipation);
    r.opt_float("evolve.t_max", "auto", &mut c.evolve.t_max);
    r.float("evolve.t_max_factor", &mut c.evolve.t_max_factor);
    r.opt_float("evolve.m_stop", "off", &mut c.evolve.m_stop);
    r.uint("evolve.snapshots_per_t", &mut c.evolve.snapshots_per_t);
    r.uint("evolve.dense_factor", &mut c.evolve.dense_factor);
    r.float("evolve.activity_tol", &mut c.evolve.activity_tol);
    r.uint("trace.inner", &mut c.trace.inner);
    r.uint("trace.margin", &mut c.trace.margin);
    r.uint("trace.substeps", &mut c.trace.substeps);
    r.uint("trace.other_inner", &mut c.trace.other_inner);
    r.uint("trace.refine_factor", &mut c.trace.refine_factor);
    r.float("trace.refine_halfwidth", &mut c.trace.refine_halfwidth);
    r.float("analysis.rho_floor", &mut c.analysis.rho_floor);
    r.float("analysis.epsilon", &mut c.analysis.epsilon);
    r.float("analysis.h_min", &mut c.analysis.h_min);
    r.float("analysis.h_max", &mut c.analysis.h_max);
    let mut gw = vec![c.analysis.grad_window.0, c.analysis.grad_window.1];
    r.floats("analysis.grad_window", &mut gw);
    if gw.len() == 2 {
        c.analysis.grad_window = (gw[0], gw[1]);
    } else {
        r.errors.push(format!("analysis.grad_window: expected two numbers, got {}", gw.len()));
    }
    r.floats("sweep.thetas", &mut c.sweep.thetas);
    r.floats("sweep.etas", &mut c.sweep.etas);
    r.float("sobolev.s", &mut c.sobolev.s);
    r.uint("sobolev.n_base", &mut c.sobolev.n_base);
    r.uint("sobolev.levels", &mut c.sobolev.levels);
    r.uint("sobolev.pad", &mut c.sobolev.pad);
    r.ints("sobolev.eta_exponents", &mut c.sobolev.eta_exponents);
    r.uint("eigen.samples", &mut c.eigen.samples);
    r.float("eigen.kappa", &mut c.eigen.kappa);
    r.float("hygiene.conv_resolution", &mut c.hygiene.conv_resolution);
    r.floats("hygiene.conv_times", &mut c.hygiene.conv_times);
    r.string("output.dir", &mut c.output.dir);
    r.uint("output.snapshot_stride", &mut c.output.snapshot_stride);
    r.uint("output.fan_stride", &mut c.output.fan_stride);
    let mut errors = std::mem::take(&mut r.errors);
    for k in r.unknown_keys() {
        errors.push(format!("{k}: unknown key"));
    }
    errors.extend(c.violations());
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(errors.join("\n")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_paper_desk() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.preset, "paper-desk");
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(parse_config(&c.to_text()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn alpha_too_large_is_rejected_with_key_path() {
        let e = parse_config("data.alpha = 0.6").unwrap_err().to_string();
        assert!(e.contains("data.alpha"), "{e}");
    }

    #[test]
    fn two_alpha_minus_delta_must_be_negative() {
        let e = parse_config("[data]\nalpha = 0.25\ndelta = 0.4\n").unwrap_err().to_string();
        assert!(e.contains("data.delta: need 2α − δ < 0"), "{e}");
    }

    #[test]
    fn all_violations_are_reported() {
        let text = "workers = 0\nbogus = 1\n[grid]\nresolution = \"fine\"\n[evolve]\ncfl = 1.5\n";
        let e = parse_config(text).unwrap_err().to_string();
        for key in ["workers", "bogus: unknown key", "grid.resolution: expected a number", "evolve.cfl"] {
            assert!(e.contains(key), "missing {key} in {e}");
        }
        assert_eq!(e.lines().count(), 4, "{e}");
    }

    #[test]
    fn auto_and_off_sentinels() {
        let c = parse_config("evolve.t_max = 12\nevolve.m_stop = \"off\"\n").unwrap();
        assert_eq!(c.evolve.t_max, Some(12.0));
        assert_eq!(c.evolve.m_stop, None);
        assert!(parse_config("evolve.m_stop = \"auto\"").is_err());
    }

    #[test]
    fn preset_key_selects_base() {
        let c = parse_config("preset = \"scalar-reduction\"\n").unwrap();
        assert_eq!(c.data_mode, DataMode::PaperLiteral);
        assert!(parse_config("preset = \"nope\"").is_err());
    }
}
