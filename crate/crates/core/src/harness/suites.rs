//! Suite orchestration: builds the case list, runs it on a worker pool and
//! turns the results into verdicts.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::function::gamma::gamma;

use super::config::RunConfig;
use super::eigen_check::eigen_check;
use super::pipeline::{run_case, CaseSpec, CaseSummary};
use super::report::{Outcome, Provenance, Report, Verdict, REPORT_SCHEMA};
use crate::error::{Error, Result};
use crate::evolve1d::{light_cone_grid, self_convergence_series, ConvergenceStudy, EvolveConfig, StopReason};
use crate::initial_data::{reconstruct_phi0, DataMode, DataParams};
use crate::shock_analysis::{bracket_check, content_hash, illposedness_trend, simple_wave_crossing};
use crate::sobolev::{hdot_norm_sq, scaling_fit, seed_norm, RegionSplit, SobolevReport, SpectralGrid};

/// Lattice nodes across `[η, 2η]` for the simple-wave oracle.
pub const SIMPLE_WAVE_NODES: usize = 2048;
/// Convergence grids extend this many η beyond the light cone.
const CONV_MARGIN_ETAS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    EigenCheck,
    SobolevScan,
    Evolve,
    ShockScan,
    Full,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::EigenCheck => "eigen-check",
            Suite::SobolevScan => "sobolev-scan",
            Suite::Evolve => "evolve",
            Suite::ShockScan => "shock-scan",
            Suite::Full => "full",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "eigen-check" => Suite::EigenCheck,
            "sobolev-scan" => Suite::SobolevScan,
            "evolve" => Suite::Evolve,
            "shock-scan" => Suite::ShockScan,
            "full" | "report" => Suite::Full,
            other => return Err(Error::InvalidParams(format!("unknown suite `{other}`"))),
        })
    }
}

struct Acc {
    verdicts: Vec<Verdict>,
    files: Vec<(String, Vec<u8>)>,
    timing: Vec<(String, f64)>,
}

impl Acc {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.timing.push((stage.into(), t0.elapsed().as_secs_f64()));
        out
    }

    fn json(&mut self, rel: &str, v: &impl Serialize) {
        match serde_json::to_vec_pretty(v) {
            Ok(b) => self.files.push((rel.into(), b)),
            Err(e) => log::warn!("could not serialize {rel}: {e}"),
        }
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    content_hash(cfg.to_text().as_bytes())
}

/// Runs `suite` with `cfg` and collects the report and artifacts in memory.
pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<Outcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
    let mut acc = Acc {
        verdicts: Vec::new(),
        files: vec![("config.toml".into(), cfg.to_text().into_bytes())],
        timing: Vec::new(),
    };
    pool.install(|| {
        if matches!(suite, Suite::EigenCheck | Suite::Full) {
            let t0 = Instant::now();
            eigen_suite(cfg, &mut acc);
            acc.timing.push(("eigen-check".into(), t0.elapsed().as_secs_f64()));
        }
        if matches!(suite, Suite::SobolevScan | Suite::Full) {
            let t0 = Instant::now();
            sobolev_suite(cfg, &mut acc);
            acc.timing.push(("sobolev-scan".into(), t0.elapsed().as_secs_f64()));
        }
        if suite == Suite::Evolve {
            evolve_suite(cfg, &mut acc);
        }
        if matches!(suite, Suite::ShockScan | Suite::Full) {
            shock_suite(cfg, suite == Suite::Full, &mut acc);
        }
    });
    Ok(Outcome {
        report: Report {
            schema: REPORT_SCHEMA.into(),
            suite: suite.name().into(),
            preset: cfg.preset.clone(),
            provenance: Provenance {
                config_hash: config_hash(cfg),
                code_version: env!("CARGO_PKG_VERSION").into(),
                timestamps: "timing.json".into(),
            },
            verdicts: acc.verdicts,
        },
        files: acc.files,
        timing: acc.timing,
    })
}

/// Reconstructs `Φ₀` on the configured grid around `[η, 2η]` and writes it as
/// CSV and as an ELWV snapshot at `t = 0`.
pub fn make_data(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let dp = cfg.data;
    let pad = cfg.grid.margin * dp.eta;
    let grid = crate::grid::Grid1D::covering(dp.eta - pad, 2.0 * dp.eta + pad, dp.eta / cfg.grid.resolution, dp.eta)?;
    let data = reconstruct_phi0(&dp, &cfg.phys, cfg.data_mode, &grid)?;
    let mut flat = Vec::with_capacity(8 * grid.n);
    for j in 0..grid.n {
        flat.extend_from_slice(&data.phi[j]);
        flat.extend((0..4).map(|m| data.w[m][j]));
    }
    let snap = crate::snapshot_io::FieldSnapshot {
        time: 0.0,
        origin: grid.x_min,
        spacing: grid.dx(),
        components: 8,
        data: flat,
    };
    let meta = json!({
        "schema": "elwave.data-meta.v1",
        "mode": cfg.data_mode,
        "w0": data.w0,
        "z0": data.z0,
        "orientation": data.orientation,
        "t_pred": cfg.t_pred(&dp),
        "grid": {"x_min": grid.x_min, "dx": grid.dx(), "n": grid.n},
        "phi_right": data.phi_right(),
    });
    let files = vec![
        ("config.toml".to_string(), cfg.to_text().into_bytes()),
        ("data/phi0.csv".to_string(), data.csv_string().into_bytes()),
        ("data/phi0.elwv".to_string(), snap.to_bytes()),
        ("data/meta.json".to_string(), serde_json::to_vec_pretty(&meta)?),
    ];
    let finite = data.phi.iter().flatten().all(|v| v.is_finite());
    Ok(Outcome {
        report: Report {
            schema: REPORT_SCHEMA.into(),
            suite: "make-data".into(),
            preset: cfg.preset.clone(),
            provenance: Provenance {
                config_hash: config_hash(cfg),
                code_version: env!("CARGO_PKG_VERSION").into(),
                timestamps: "timing.json".into(),
            },
            verdicts: vec![Verdict::from_checks("make-data", &[("values finite".into(), finite)], meta)],
        },
        files,
        timing: Vec::new(),
    })
}

fn eigen_suite(cfg: &RunConfig, acc: &mut Acc) {
    match eigen_check(&cfg.phys, cfg.eigen.kappa, cfg.eigen.samples, cfg.seed) {
        Ok(ec) => {
            let mut checks: Vec<(String, bool)> = ec
                .suites
                .iter()
                .map(|s| (format!("{}: worst {:.3e} vs {:.0e}", s.name, s.worst, s.tolerance), s.pass))
                .collect();
            checks.push((
                format!(
                    "c111(0): closed form {} vs contraction {:.10} (rel {:.2e})",
                    ec.c111_zero_closed_form, ec.c111_zero_fd, ec.c111_zero_rel_err
                ),
                ec.c111_zero_pass,
            ));
            let v = serde_json::to_value(&ec).unwrap_or(Value::Null);
            acc.verdicts.push(Verdict::from_checks("eigenstructure", &checks, v));
            acc.json("eigen/eigen_check.json", &ec);
        }
        Err(e) => acc.verdicts.push(Verdict::error("eigenstructure", "eigen_check", e)),
    }
}

/// `∫|ξ|^{2s}|f̂|²` for `f = exp(−|x|²/(2σ²))` in the plane, `f̂(ξ) = ∫f e^{−2πix·ξ}`.
pub fn gaussian_hdot_exact(s: f64, sigma: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let a = 4.0 * pi * pi * sigma * sigma;
    4.0 * pi.powi(3) * sigma.powi(4) * gamma(s + 1.0) / a.powf(s + 1.0)
}

/// Discrete norm of the sampled Gaussian against the closed form.
pub fn gaussian_oracle(s: f64, n: usize, pad: usize) -> Result<(f64, f64)> {
    let sigma = 1.0;
    let half = 8.0 * sigma;
    let g = SpectralGrid::sample(
        |x, y| (-(x * x + y * y) / (2.0 * sigma * sigma)).exp(),
        [-half, half, -half, half],
        (n, n),
        pad,
    )?;
    let (num, _) = hdot_norm_sq(&g, s, RegionSplit { xi1: 1.0, xi2: 1.0 })?;
    Ok((num, gaussian_hdot_exact(s, sigma)))
}

fn sobolev_suite(cfg: &RunConfig, acc: &mut Acc) {
    let sc = &cfg.sobolev;
    let rows: Vec<Result<(f64, SobolevReport)>> = sc
        .eta_exponents
        .par_iter()
        .map(|&k| {
            let eta = 2f64.powi(-k);
            let dp = cfg.data.with_eta(eta);
            seed_norm(&dp, sc.s, sc.n_base, sc.levels, sc.pad).map(|r| (eta, r))
        })
        .collect();
    let rows: Vec<(f64, SobolevReport)> = match rows.into_iter().collect() {
        Ok(r) => r,
        Err(e) => {
            acc.verdicts.push(Verdict::error("sobolev-scaling", "seed_norm", e));
            return;
        }
    };
    acc.files.push(("sobolev/scan.csv".into(), crate::sobolev::csv_string(&rows).into_bytes()));
    let fit = scaling_fit(&rows);
    let eta_h = 2f64.powi(-sc.eta_exponents[0]);
    let homog = seed_norm(&cfg.data.with_eta(eta_h), sc.s, sc.n_base, sc.levels, sc.pad).and_then(|a| {
        let b = seed_norm(
            &cfg.data.with_eta(eta_h).with_theta(0.5 * cfg.data.theta),
            sc.s,
            sc.n_base,
            sc.levels,
            sc.pad,
        )?;
        Ok((a.norm_sq / b.norm_sq / 4.0 - 1.0).abs())
    });
    let gauss = gaussian_oracle(sc.s, 64, 4);
    let mut checks = Vec::new();
    let finite = rows.iter().all(|(_, r)| r.norm_sq.is_finite() && r.norm_sq > 0.0);
    checks.push(("norms finite and positive".to_string(), finite));
    let worst_rel = rows.iter().map(|(_, r)| r.rel_change).fold(0.0f64, f64::max);
    checks.push((
        format!("refinement converged to 2 digits: worst rel change {worst_rel:.2e}"),
        rows.iter().all(|(_, r)| r.converged),
    ));
    let mut values = json!({
        "rows": rows.iter().map(|(eta, r)| json!({"eta": eta, "norm_sq": r.norm_sq, "rel_change": r.rel_change, "regions": r.regions})).collect::<Vec<_>>(),
    });
    match &fit {
        Ok(f) => {
            checks.push((format!("slope {:.4} ≤ −0.05", f.slope), f.slope <= -0.05));
            values["slope"] = json!(f.slope);
            values["fit_residual"] = json!(f.residual);
        }
        Err(e) => checks.push((format!("scaling fit: {e}"), false)),
    }
    match homog {
        Ok(h) => {
            checks.push((format!("θ² homogeneity: rel deviation {h:.2e} < 1e-10"), h < 1e-10));
            values["homogeneity_deviation"] = json!(h);
        }
        Err(e) => checks.push((format!("θ² homogeneity: {e}"), false)),
    }
    match gauss {
        Ok((num, exact)) => {
            let rel = (num - exact).abs() / exact;
            checks.push((format!("Gaussian oracle: rel error {rel:.2e} < 1e-2"), rel < 1e-2));
            values["gaussian"] = json!({"numeric": num, "exact": exact, "rel_err": rel});
        }
        Err(e) => checks.push((format!("Gaussian oracle: {e}"), false)),
    }
    acc.json("sobolev/summary.json", &values);
    acc.verdicts.push(Verdict::from_checks("sobolev-scaling", &checks, values));
}

fn evolve_suite(cfg: &RunConfig, acc: &mut Acc) {
    let fp = config_hash(cfg);
    let mut spec = CaseSpec::base(cfg, "evolve", cfg.data);
    spec.write_snapshots = true;
    let res = acc.timed("evolve", || run_case(cfg, &spec, &fp));
    let s = &res.summary;
    let checks = vec![
        (
            format!("run finished: {}", s.error.as_deref().unwrap_or("ok")),
            s.error.is_none(),
        ),
        (format!("stop reason {:?}", s.stop), !matches!(s.stop, StopReason::Failed(_))),
    ];
    let values = json!({
        "t_num": s.t_num(),
        "t_pred": s.t_pred,
        "product": s.shock.as_ref().map(|r| r.product),
        "steps": s.steps,
        "t_end": s.t_end,
        "grid_points": s.grid_points,
    });
    acc.files.extend(res.artifacts);
    acc.verdicts.push(Verdict::from_checks("evolve", &checks, values));
}

fn label(dp: &DataParams) -> String {
    format!("theta{}_eta{}", dp.theta, dp.eta)
}

fn same(a: &DataParams, b: &DataParams) -> bool {
    a.theta == b.theta && a.eta == b.eta
}

struct Sweep {
    /// Indices into the case list.
    thetas: Vec<usize>,
    etas: Vec<usize>,
    base: usize,
    scalar: usize,
    res2: Option<usize>,
    diss2: Option<usize>,
    frame: Option<usize>,
}

fn build_cases(cfg: &RunConfig, hygiene: bool) -> (Vec<CaseSpec>, Sweep) {
    let mut cases: Vec<CaseSpec> = Vec::new();
    let index_of = |cases: &mut Vec<CaseSpec>, dp: DataParams| -> usize {
        if let Some(i) = cases.iter().position(|c| same(&c.data, &dp) && c.label.starts_with("theta")) {
            return i;
        }
        let mut c = CaseSpec::base(cfg, &label(&dp), dp);
        c.others = true;
        cases.push(c);
        cases.len() - 1
    };
    let base = index_of(&mut cases, cfg.data);
    cases[base].refined = true;
    let thetas: Vec<usize> = cfg
        .sweep
        .thetas
        .iter()
        .map(|&th| index_of(&mut cases, cfg.data.with_theta(th)))
        .collect();
    let etas: Vec<usize> = cfg
        .sweep
        .etas
        .iter()
        .map(|&e| index_of(&mut cases, cfg.data.with_eta(e)))
        .collect();
    let scalar = if cfg.data_mode == DataMode::PaperLiteral {
        base
    } else {
        let mut c = CaseSpec::base(cfg, "scalar", cfg.data);
        c.mode = DataMode::PaperLiteral;
        cases.push(c);
        cases.len() - 1
    };
    let mut sw = Sweep {
        thetas,
        etas,
        base,
        scalar,
        res2: None,
        diss2: None,
        frame: None,
    };
    if hygiene {
        let mut c = CaseSpec::base(cfg, "refined_grid", cfg.data);
        c.resolution *= 2.0;
        cases.push(c);
        sw.res2 = Some(cases.len() - 1);
        let mut c = CaseSpec::base(cfg, "half_dissipation", cfg.data);
        c.dissipation *= 0.5;
        cases.push(c);
        sw.diss2 = Some(cases.len() - 1);
        let mut c = CaseSpec::base(cfg, "comoving", cfg.data);
        c.frame_speed = cfg.phys.c1;
        cases.push(c);
        sw.frame = Some(cases.len() - 1);
    }
    (cases, sw)
}

fn shock_suite(cfg: &RunConfig, hygiene: bool, acc: &mut Acc) {
    let fp = config_hash(cfg);
    let (specs, sw) = build_cases(cfg, hygiene);
    let t0 = Instant::now();
    let results: Vec<(super::pipeline::CaseResult, f64)> = specs
        .par_iter()
        .map(|s| {
            let t = Instant::now();
            let r = run_case(cfg, s, &fp);
            (r, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut cases: Vec<CaseSummary> = Vec::with_capacity(results.len());
    for (r, secs) in results {
        acc.timing.push((format!("case {}", r.summary.spec.label), secs));
        acc.files.extend(r.artifacts);
        cases.push(r.summary);
    }
    acc.timing.push(("cases total".into(), t0.elapsed().as_secs_f64()));
    let oracle = simple_wave_crossing(&cfg.phys, &cases[sw.scalar].spec.data, SIMPLE_WAVE_NODES);

    acc.verdicts.push(bracket_verdict(&cases, &sw, &oracle));
    acc.verdicts.push(exclusivity_verdict(&cases, &sw));
    acc.verdicts.push(trend_verdict(&cases, &sw));
    acc.verdicts.push(blowup_verdict(&cases[sw.base]));
    if hygiene {
        let conv = acc.timed("convergence", || convergence(cfg));
        if let Ok(c) = &conv {
            acc.json("hygiene/convergence.json", c);
        }
        acc.verdicts.push(hygiene_verdict(&cases, &sw, &conv));
    }
    acc.verdicts.push(norms_verdict(&cases, &sw));
    acc.verdicts.extend(diagnostic_verdicts(&cases, &sw));
    let table: Vec<Value> = cases
        .iter()
        .map(|c| {
            json!({
                "label": c.spec.label, "theta": c.spec.data.theta, "eta": c.spec.data.eta,
                "mode": c.spec.mode, "resolution": c.spec.resolution, "dissipation": c.spec.dissipation,
                "frame_speed": c.spec.frame_speed, "w0": c.w0, "t_pred": c.t_pred, "t_num": c.t_num(),
                "product": c.shock.as_ref().map(|s| s.product), "error": c.error,
            })
        })
        .collect();
    acc.json("shock/cases.json", &table);
}

fn need_t(c: &CaseSummary) -> std::result::Result<f64, String> {
    c.t_num()
        .ok_or_else(|| format!("{}: {}", c.spec.label, c.error.as_deref().unwrap_or("no shock report")))
}

fn bracket_verdict(cases: &[CaseSummary], sw: &Sweep, oracle: &Result<crate::shock_analysis::SimpleWave>) -> Verdict {
    let name = "shock-bracket";
    let mut checks = Vec::new();
    let mut runs = Vec::new();
    for &i in &sw.thetas {
        match need_t(&cases[i]) {
            Ok(t) => runs.push((cases[i].spec.data.theta, t, cases[i].shock.as_ref().unwrap().c111_0, cases[i].w0)),
            Err(e) => checks.push((format!("θ-sweep member failed: {e}"), false)),
        }
    }
    let bv = bracket_check(&runs);
    for (th, p) in &bv.products {
        checks.push((format!("θ = {th}: P = {p:.4} in [0.7, 1.4]"), (0.7..=1.4).contains(p)));
    }
    checks.push(("|P − 1| non-increasing as θ decreases".into(), bv.trend));
    let sc = &cases[sw.scalar];
    let mut values = json!({"products": bv.products});
    match (need_t(sc), oracle) {
        (Ok(t), Ok(o)) => {
            let rel = (t - o.t_cross).abs() / o.t_cross;
            checks.push((
                format!("scalar reduction: T_num {t:.5} vs simple-wave {:.5} (rel {rel:.2e} < 0.02)", o.t_cross),
                rel < 0.02,
            ));
            values["scalar"] = json!({"t_num": t, "oracle": o, "rel": rel});
        }
        (Err(e), _) => checks.push((format!("scalar reduction run failed: {e}"), false)),
        (_, Err(e)) => checks.push((format!("simple-wave oracle: {e}"), false)),
    }
    Verdict::from_checks(name, &checks, values)
}

fn exclusivity_verdict(cases: &[CaseSummary], sw: &Sweep) -> Verdict {
    let mut checks = Vec::new();
    let mut scaled: Vec<[f64; 3]> = Vec::new();
    let mut rows = Vec::new();
    for &i in &sw.thetas {
        let c = &cases[i];
        match (&c.exclusivity, c.sup_w_scaled) {
            (Some(ex), Some(sw3)) => {
                let m = ex.min_rho.iter().cloned().fold(f64::INFINITY, f64::min);
                checks.push((format!("θ = {}: min ρ over families 2–4 = {m:.4} ≥ 0.5", c.spec.data.theta), m >= 0.5));
                let floor = c.shock.as_ref().map(|_| 1e-3).unwrap_or(0.0);
                checks.push((
                    format!("θ = {}: min ρ₁ = {:.2e} ≤ 1e-3 at detection", c.spec.data.theta, ex.min_rho1),
                    ex.min_rho1 <= floor,
                ));
                scaled.push(sw3);
                rows.push(json!({"theta": c.spec.data.theta, "min_rho": ex.min_rho, "min_rho1": ex.min_rho1, "sup_w_over_w0sq": sw3}));
            }
            _ => checks.push((
                format!("θ = {}: no exclusivity data ({})", c.spec.data.theta, c.error.as_deref().unwrap_or("?")),
                false,
            )),
        }
    }
    for q in 0..3 {
        let lo = scaled.iter().map(|s| s[q]).fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().map(|s| s[q]).fold(0.0f64, f64::max);
        if !scaled.is_empty() {
            let spread = hi / lo;
            checks.push((format!("family {}: sup|w|/W₀² spread {spread:.3} ≤ 3", q + 2), spread <= 3.0));
        }
    }
    Verdict::from_checks("family-exclusivity", &checks, json!({"rows": rows}))
}

fn trend_verdict(cases: &[CaseSummary], sw: &Sweep) -> Verdict {
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    for &i in &sw.etas {
        match need_t(&cases[i]) {
            Ok(t) => runs.push((cases[i].spec.data.eta, t, cases[i].w0)),
            Err(e) => checks.push((format!("η-sweep member failed: {e}"), false)),
        }
    }
    match illposedness_trend(&runs) {
        Ok(tv) => {
            checks.push(("T_num strictly decreasing as η decreases".into(), tv.decreasing));
            checks.push((format!("max/min of T_num·W₀ = {:.4} < 1.15", tv.spread), tv.spread < 1.15));
            Verdict::from_checks("illposedness-trend", &checks, serde_json::to_value(&tv).unwrap_or(Value::Null))
        }
        Err(e) if checks.is_empty() => Verdict::skip("illposedness-trend", &format!("skipped: {e}")),
        Err(_) => Verdict::from_checks("illposedness-trend", &checks, Value::Null),
    }
}

fn blowup_verdict(base: &CaseSummary) -> Verdict {
    let Some(r) = &base.refined else {
        return Verdict::error(
            "h2-blowup",
            "base case",
            base.error.as_deref().unwrap_or("no refined fan"),
        );
    };
    let mut checks = Vec::new();
    match &r.ladder.fit {
        Some(f) => {
            checks.push((format!("ladder fit R² = {:.5} > 0.98", f.r2), f.r2 > 0.98));
            checks.push((format!("ladder slope c = {:.4e} > 0", f.slope), f.slope > 0.0));
        }
        None => checks.push(("fewer than three resolved ladder rungs".into(), false)),
    }
    checks.push((
        format!(
            "sup|∂zρ₁| {:.4} → {:.4} under seed doubling (rel {:.2e} < 0.05)",
            r.dz_sup_base, r.dz_sup_refined, r.dz_rel_change
        ),
        r.dz_rel_change < 0.05,
    ));
    Verdict::from_checks("h2-blowup", &checks, serde_json::to_value(r).unwrap_or(Value::Null))
}

/// Three nested grids from `conv_resolution`, dissipation halved per level,
/// compared at the configured fractions of the predicted shock time.
pub fn convergence(cfg: &RunConfig) -> Result<Vec<ConvergenceStudy>> {
    let dp = cfg.data;
    let t_pred = cfg.t_pred(&dp);
    let times: Vec<f64> = cfg.hygiene.conv_times.iter().map(|f| f * t_pred).collect();
    let t_last = *times.last().ok_or_else(|| Error::InvalidParams("no convergence times".into()))?;
    let mut runs = Vec::new();
    for level in 0..3 {
        let res = cfg.hygiene.conv_resolution * f64::powi(2.0, level);
        let grid = light_cone_grid(&cfg.phys, dp.eta, t_last, dp.eta / res, 0.0, CONV_MARGIN_ETAS * dp.eta)?;
        let data = reconstruct_phi0(&dp, &cfg.phys, cfg.data_mode, &grid)?;
        let ecfg = EvolveConfig {
            t_max: t_last,
            dissipation: cfg.evolve.dissipation / f64::powi(2.0, level),
            snapshot_dt: t_last,
            m_stop_factor: None,
            cfl: cfg.evolve.cfl,
            activity_tol: cfg.evolve.activity_tol,
            ..EvolveConfig::default()
        };
        runs.push((ecfg, data));
    }
    self_convergence_series(&cfg.phys, &runs, &times)
}

fn rel_t(a: &CaseSummary, b: &CaseSummary) -> std::result::Result<f64, String> {
    let ta = need_t(a)?;
    let tb = need_t(b)?;
    Ok((tb - ta).abs() / ta)
}

fn hygiene_verdict(cases: &[CaseSummary], sw: &Sweep, conv: &Result<Vec<ConvergenceStudy>>) -> Verdict {
    let mut checks = Vec::new();
    let mut values = json!({});
    match conv {
        Ok(studies) => {
            for c in studies {
                let o = c.orders.last().copied().unwrap_or(f64::NAN);
                let o2 = c.orders_l2.last().copied().unwrap_or(f64::NAN);
                checks.push((format!("self-convergence at t = {:.3}: order {o:.2} (L2 {o2:.2}) ≥ 3", c.t), o >= 3.0));
            }
            values["convergence"] = serde_json::to_value(studies).unwrap_or(Value::Null);
        }
        Err(e) => checks.push((format!("self-convergence: {e}"), false)),
    }
    let base = &cases[sw.base];
    for (what, idx) in [("grid ×2", sw.res2), ("dissipation ÷2", sw.diss2), ("comoving frame", sw.frame)] {
        let Some(i) = idx else { continue };
        match rel_t(base, &cases[i]) {
            Ok(r) => {
                checks.push((format!("T_num change under {what}: {r:.2e} < 0.01"), r < 0.01));
                values[what] = json!(r);
            }
            Err(e) => checks.push((format!("{what}: {e}"), false)),
        }
    }
    match base.rho_fd {
        Some(d) => checks.push((format!("ρ transport vs ∂X/∂z: {d:.2e} < 0.01 while min ρ > 0.05"), d < 0.01)),
        None => checks.push(("ρ transport vs ∂X/∂z: not computed".into(), false)),
    }
    match &base.strips {
        Some(s) => match s.ratio {
            Some(r) => checks.push((format!("strip separation {r:.4}·η/σ ≤ 1.1·η/σ"), r <= 1.1)),
            None => checks.push(("strips never separate in the traced window".into(), false)),
        },
        None => checks.push(("strip geometry not computed".into(), false)),
    }
    values["rho_fd"] = json!(base.rho_fd);
    if let Some(i) = sw.res2 {
        values["rho_fd_grid_x2"] = json!(cases[i].rho_fd);
    }
    values["strips"] = serde_json::to_value(&base.strips).unwrap_or(Value::Null);
    Verdict::from_checks("numerical-hygiene", &checks, values)
}

fn norms_verdict(cases: &[CaseSummary], sw: &Sweep) -> Verdict {
    let mut checks = Vec::new();
    let mut members: Vec<usize> = sw.thetas.iter().chain(&sw.etas).copied().collect();
    members.sort();
    members.dedup();
    for &i in &members {
        let c = &cases[i];
        match &c.norms {
            Some(n) => {
                checks.push((format!("{}: sup S = {:.4} ≤ 1.3", c.spec.label, n.s_max), n.s_max <= 1.3));
                checks.push((
                    format!("{}: sup J = {:.4}·W₀ ≤ 1.3·W₀", c.spec.label, n.j_max_over_w0),
                    n.j_max_over_w0 <= 1.3,
                ));
            }
            None => checks.push((
                format!("{}: no norm series ({})", c.spec.label, c.error.as_deref().unwrap_or("?")),
                false,
            )),
        }
    }
    let eta_norms: Vec<_> = sw.etas.iter().filter_map(|&i| cases[i].norms.as_ref()).collect();
    let spread = |f: &dyn Fn(&super::pipeline::NormSummary) -> f64| {
        let lo = eta_norms.iter().map(|n| f(n)).fold(f64::INFINITY, f64::min);
        let hi = eta_norms.iter().map(|n| f(n)).fold(0.0f64, f64::max);
        hi / lo
    };
    if !eta_norms.is_empty() {
        let sv = spread(&|n| n.v_scaled);
        let su = spread(&|n| n.u_scaled);
        checks.push((format!("η-sweep V/(ηW₀²) spread {sv:.3} < 3"), sv < 3.0));
        checks.push((format!("η-sweep Ū/(ηW₀) spread {su:.3} < 3"), su < 3.0));
    }
    let rows: Vec<Value> = members
        .iter()
        .map(|&i| json!({"label": cases[i].spec.label, "norms": cases[i].norms}))
        .collect();
    Verdict::from_checks("norm-bounds", &checks, json!({"rows": rows}))
}

/// Secondary diagnostics that are reported but are not acceptance criteria.
fn diagnostic_verdicts(cases: &[CaseSummary], sw: &Sweep) -> Vec<Verdict> {
    let mut est = Vec::new();
    let mut v1 = Vec::new();
    let mut bi = Vec::new();
    let mut members: Vec<usize> = sw.thetas.iter().chain(&sw.etas).copied().collect();
    members.sort();
    members.dedup();
    for &i in &members {
        let c = &cases[i];
        let Some(s) = &c.shock else { continue };
        match &s.grad_fit {
            Some(g) => est.push((
                format!("{}: |T_ρ − T_grad|/T_ρ = {:.2e} < 0.02", c.spec.label, g.discrepancy),
                g.discrepancy < 0.02,
            )),
            None => est.push((format!("{}: gradient fit unavailable", c.spec.label), false)),
        }
        if let Some((lo, hi)) = c.v1_range {
            v1.push((
                format!("{}: v₁(z₀)/W₀ in [{lo:.4}, {hi:.4}] ⊂ [0.81, 1.1]", c.spec.label),
                lo >= 0.81 && hi <= 1.1,
            ));
        }
        for b in &c.bichar {
            bi.push((
                format!("{}: families {:?} residual {:.2e}·η < 1e-8·η", c.spec.label, b.families, b.residual),
                b.residual < 1e-8,
            ));
        }
    }
    let mut out = vec![
        Verdict::from_checks("estimator-agreement", &est, Value::Null),
        Verdict::from_checks("v1-conservation", &v1, Value::Null),
        Verdict::from_checks("bichar-residual", &bi, Value::Null),
    ];
    if let Some(r) = &cases[sw.base].refined {
        out.push(Verdict::from_checks(
            "h2-time-monotone",
            &[(format!("I(h = {:.3e}, t) non-decreasing for t ≥ T_num/2", r.h_series), r.series_increasing)],
            Value::Null,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::EigenCheck, Suite::SobolevScan, Suite::Evolve, Suite::ShockScan, Suite::Full] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("report".parse::<Suite>().unwrap(), Suite::Full);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn gaussian_closed_form_at_s_zero_is_the_l2_norm() {
        // s = 0: Plancherel gives ∫ f² = πσ².
        let v = gaussian_hdot_exact(0.0, 0.7);
        assert!((v - std::f64::consts::PI * 0.49).abs() < 1e-12);
    }

    #[test]
    fn smoke_cases_cover_sweeps_once() {
        let cfg = RunConfig::preset("smoke").unwrap();
        let (cases, sw) = build_cases(&cfg, true);
        assert_eq!(sw.thetas, vec![sw.base]);
        assert_eq!(sw.etas, vec![sw.base]);
        assert!(cases[sw.base].refined && cases[sw.base].others);
        assert_eq!(cases[sw.scalar].mode, DataMode::PaperLiteral);
        assert_eq!(cases.len(), 5);
    }
}
