//! One evolve-trace-analyse case and its artifacts.

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::characteristics::{
    bichar_intersection, dz_rho1, norm_series, rho_fd_discrepancy, strip_separation, trace_fan, v_series_at, CharFan,
    SeedLayout, TraceOptions,
};
use crate::error::{Error, Result};
use crate::evolve1d::{light_cone_grid, Evolver, StopReason, Trajectory};
use crate::initial_data::{reconstruct_phi0, DataMode, DataParams};
use crate::model_eigen::min_gap_sigma;
use crate::shock_analysis::{
    blowup_ladder, blowup_time_series, detect_shock, detection_record, exclusivity, ladder_csv, min_rho_series,
    BlowupLadder, Exclusivity, ShockReport,
};

pub const CASE_SCHEMA: &str = "elwave.case.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub label: String,
    pub data: DataParams,
    pub mode: DataMode,
    /// Grid points per η.
    pub resolution: f64,
    pub dissipation: f64,
    pub frame_speed: f64,
    /// Trace families 2 to 4 and compute the norm and strip diagnostics.
    pub others: bool,
    /// Trace a second family-1 fan with doubled density near the shock seed.
    pub refined: bool,
    pub write_snapshots: bool,
}

impl CaseSpec {
    pub fn base(cfg: &RunConfig, label: &str, data: DataParams) -> CaseSpec {
        CaseSpec {
            label: label.into(),
            data,
            mode: cfg.data_mode,
            resolution: cfg.grid.resolution,
            dissipation: cfg.evolve.dissipation,
            frame_speed: cfg.grid.frame_speed,
            others: false,
            refined: false,
            write_snapshots: false,
        }
    }
}

/// Bootstrap norms reduced over `[0, 0.8·T_num]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub window_end: f64,
    pub s_max: f64,
    pub j_max_over_w0: f64,
    /// `sup V / (η·W₀²)`
    pub v_scaled: f64,
    /// `sup Ū / (η·W₀)`
    pub u_scaled: f64,
    pub s_initial: f64,
    pub j_initial_over_w0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSummary {
    pub sigma: f64,
    pub t0_analytic: f64,
    pub separation_time: Option<f64>,
    /// Measured separation over `η/σ`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicharCheck {
    pub families: (usize, usize),
    pub seeds: (f64, f64),
    pub t: f64,
    /// `|X_i − X_j| / η` at the returned time.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedSummary {
    pub seeds: usize,
    pub t_limit: f64,
    pub dz_sup_base: f64,
    pub dz_sup_refined: f64,
    pub dz_rel_change: f64,
    pub dz_noise_warning: bool,
    pub ladder: BlowupLadder,
    /// Fixed exclusion radius for the time series.
    pub h_series: f64,
    /// `I(h, t)` non-decreasing over records with `t ≥ T_num/2`.
    pub series_increasing: bool,
    pub series: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub schema: String,
    pub spec: CaseSpec,
    pub w0: f64,
    pub z0: f64,
    pub t_pred: f64,
    pub grid_points: usize,
    pub steps: u64,
    pub t_end: f64,
    pub stop: StopReason,
    pub error: Option<String>,
    pub shock: Option<ShockReport>,
    pub exclusivity: Option<Exclusivity>,
    /// `sup|w_i| / W₀²` for families 2 to 4.
    pub sup_w_scaled: Option<[f64; 3]>,
    pub norms: Option<NormSummary>,
    pub strips: Option<StripSummary>,
    pub bichar: Vec<BicharCheck>,
    /// Transported `ρ₁` against `∂X/∂z` while `min ρ₁ > 0.05`.
    pub rho_fd: Option<f64>,
    /// Range of `v₁(z₀, t)/W₀` up to detection.
    pub v1_range: Option<(f64, f64)>,
    pub refined: Option<RefinedSummary>,
}

impl CaseSummary {
    pub fn t_num(&self) -> Option<f64> {
        self.shock.as_ref().map(|s| s.t_num)
    }
}

pub struct CaseResult {
    pub summary: CaseSummary,
    /// `(relative path, bytes)`
    pub artifacts: Vec<(String, Vec<u8>)>,
}

fn nearest_seed(fan: &CharFan, y: f64) -> (usize, f64) {
    let k = fan.seeds.partition_point(|s| *s < y).min(fan.n_seeds() - 1);
    let k = if k > 0 && (fan.seeds[k - 1] - y).abs() <= (fan.seeds[k] - y).abs() {
        k - 1
    } else {
        k
    };
    (k, fan.seeds[k])
}

fn seeds(inner: usize, margin: usize, eta: f64) -> Vec<f64> {
    SeedLayout {
        inner,
        margin,
        refine: None,
    }
    .seeds(eta)
}

/// Evolves in stages of `0.15·T_pred` beyond `1.1·T_pred`, retracing the
/// family-1 fan after each stage until `ρ₁` reaches the floor.
fn evolve_until_detection(
    cfg: &RunConfig,
    spec: &CaseSpec,
    ev: &mut Evolver,
    t_pred: f64,
    t_max: f64,
) -> Result<CharFan> {
    let eta = spec.data.eta;
    let p = cfg.phys;
    let opts = TraceOptions {
        substeps: cfg.trace.substeps,
        ..TraceOptions::default()
    };
    let z = seeds(cfg.trace.inner, cfg.trace.margin, eta);
    let mut stage = 0;
    loop {
        let t_stage = (t_pred * (1.1 + 0.15 * stage as f64)).min(t_max);
        ev.advance(t_stage, true);
        let fan = trace_fan(&ev.traj, &p, 0, &z, &opts)?;
        let detected = detection_record(&fan, eta, cfg.analysis.rho_floor).is_some();
        if detected || t_stage >= t_max || ev.traj.stop != StopReason::TMax {
            return Ok(fan);
        }
        log::info!("{}: no detection by t = {t_stage:.3}, extending", spec.label);
        stage += 1;
    }
}

/// Runs one case. Module errors end the case early and are recorded in the
/// summary; artifacts produced before the error are kept.
pub fn run_case(cfg: &RunConfig, spec: &CaseSpec, fingerprint: &str) -> CaseResult {
    let dp = spec.data;
    let (w0, z0) = crate::initial_data::compute_w0_z0(&dp);
    let mut summary = CaseSummary {
        schema: CASE_SCHEMA.into(),
        spec: spec.clone(),
        w0,
        z0,
        t_pred: cfg.t_pred(&dp),
        grid_points: 0,
        steps: 0,
        t_end: 0.0,
        stop: StopReason::TMax,
        error: None,
        shock: None,
        exclusivity: None,
        sup_w_scaled: None,
        norms: None,
        strips: None,
        bichar: Vec::new(),
        rho_fd: None,
        v1_range: None,
        refined: None,
    };
    let mut artifacts = Vec::new();
    if let Err(e) = case_body(cfg, spec, fingerprint, &mut summary, &mut artifacts) {
        log::warn!("{}: {e}", spec.label);
        summary.error = Some(e.to_string());
    }
    let json = serde_json::to_vec_pretty(&summary).unwrap_or_default();
    artifacts.push((format!("cases/{}/summary.json", spec.label), json));
    CaseResult { summary, artifacts }
}

fn case_body(
    cfg: &RunConfig,
    spec: &CaseSpec,
    fingerprint: &str,
    sm: &mut CaseSummary,
    artifacts: &mut Vec<(String, Vec<u8>)>,
) -> Result<()> {
    let p = cfg.phys;
    let dp = spec.data;
    let eta = dp.eta;
    let dir = format!("cases/{}", spec.label);
    let mut ecfg = cfg.evolve_config(&dp);
    ecfg.dissipation = spec.dissipation;
    ecfg.frame_speed = spec.frame_speed;
    let grid = light_cone_grid(&p, eta, ecfg.t_max, eta / spec.resolution, spec.frame_speed, cfg.grid.margin * eta)?;
    sm.grid_points = grid.n;
    let data = reconstruct_phi0(&dp, &p, spec.mode, &grid)?;
    let mut ev = Evolver::new(&p, &ecfg, &data)?;
    let fan1 = evolve_until_detection(cfg, spec, &mut ev, sm.t_pred, ecfg.t_max)?;
    let traj: Trajectory = ev.into_trajectory();
    sm.steps = traj.steps;
    sm.t_end = traj.t_end;
    sm.stop = traj.stop.clone();

    if spec.write_snapshots && cfg.output.snapshot_stride > 0 {
        let n = traj.snapshots.len();
        let mut ks: Vec<usize> = (0..n).step_by(cfg.output.snapshot_stride).collect();
        if ks.last() != Some(&(n - 1)) {
            ks.push(n - 1);
        }
        for k in ks {
            artifacts.push((format!("{dir}/snap_{k:05}.elwv"), traj.to_field_snapshot(k).to_bytes()));
        }
    }
    if cfg.output.fan_stride > 0 {
        artifacts.push((format!("{dir}/fan1.csv"), fan1.csv_string(cfg.output.fan_stride).into_bytes()));
    }
    let mut min_rho_csv = String::from("# schema=elwave.minrho.v1\nt,min_rho1,z\n");
    for (t, m, s) in min_rho_series(&fan1, eta) {
        min_rho_csv.push_str(&format!("{t},{m},{}\n", fan1.seeds[s]));
    }
    artifacts.push((format!("{dir}/min_rho1.csv"), min_rho_csv.into_bytes()));

    sm.rho_fd = Some(rho_fd_discrepancy(&fan1, eta, 0.05));
    let mut report = detect_shock(&fan1, &traj, eta, sm.w0, &cfg.analysis)?;
    report.fingerprint = fingerprint.to_string();
    let t_num = report.t_num;
    let vs = v_series_at(&fan1, sm.z0, t_num);
    if let Some(&(_, v_init)) = vs.first() {
        let sign = if v_init < 0.0 { -1.0 } else { 1.0 };
        let lo = vs.iter().map(|(_, v)| sign * v / sm.w0).fold(f64::INFINITY, f64::min);
        let hi = vs.iter().map(|(_, v)| sign * v / sm.w0).fold(f64::NEG_INFINITY, f64::max);
        sm.v1_range = Some((lo, hi));
    }
    sm.shock = Some(report.clone());

    if spec.others {
        let opts = TraceOptions {
            substeps: cfg.trace.substeps,
            ..TraceOptions::default()
        };
        let other_margin = (cfg.trace.margin * cfg.trace.other_inner / cfg.trace.inner).max(2);
        let z = seeds(cfg.trace.other_inner, other_margin, eta);
        let mut fans = vec![fan1.clone()];
        for fam in 1..4 {
            fans.push(trace_fan(&traj, &p, fam, &z, &opts)?);
        }
        let ex = exclusivity(&fans[0], &fans[1..], eta, t_num)?;
        let w2 = sm.w0 * sm.w0;
        sm.sup_w_scaled = Some([ex.sup_w[0] / w2, ex.sup_w[1] / w2, ex.sup_w[2] / w2]);
        report.exclusivity = Some(ex.clone());
        sm.exclusivity = Some(ex);

        let ns = norm_series(&traj, &fans, eta)?;
        let end = 0.8 * t_num;
        let idx: Vec<usize> = (0..ns.times.len()).filter(|&k| ns.times[k] <= end).collect();
        let max_of = |v: &[f64]| idx.iter().map(|&k| v[k]).fold(0.0f64, f64::max);
        sm.norms = Some(NormSummary {
            window_end: end,
            s_max: max_of(&ns.s),
            j_max_over_w0: max_of(&ns.j) / sm.w0,
            v_scaled: max_of(&ns.v) / (eta * w2),
            u_scaled: max_of(&ns.u_bar) / (eta * sm.w0),
            s_initial: ns.s[0],
            j_initial_over_w0: ns.j[0] / sm.w0,
        });
        artifacts.push((format!("{dir}/norms.json"), serde_json::to_vec_pretty(&ns)?));

        let sigma = min_gap_sigma(&p)?.sigma;
        let geo = strip_separation(&fans, eta, sigma)?;
        sm.strips = Some(StripSummary {
            sigma,
            t0_analytic: geo.t0_analytic,
            separation_time: geo.separation_time,
            ratio: geo.separation_time.map(|t| t / geo.t0_analytic),
        });

        for (i, j, yi, yj) in [(0usize, 3usize, 1.25, 1.75), (0, 2, 1.4, 1.6), (1, 3, 1.3, 1.7)] {
            let (si, yi) = nearest_seed(&fans[i], yi * eta);
            let (sj, yj) = nearest_seed(&fans[j], yj * eta);
            let (_, t) = bichar_intersection(&fans[i], &fans[j], yi, yj)?;
            let residual = (fans[i].position(si, t) - fans[j].position(sj, t)).abs() / eta;
            sm.bichar.push(BicharCheck {
                families: (i + 1, j + 1),
                seeds: (yi, yj),
                t,
                residual,
            });
        }
    }

    if spec.refined {
        let layout = SeedLayout {
            inner: cfg.trace.inner,
            margin: cfg.trace.margin,
            refine: Some((report.z_shock, cfg.trace.refine_halfwidth * eta, cfg.trace.refine_factor)),
        };
        let z = layout.seeds(eta);
        let opts = TraceOptions {
            substeps: cfg.trace.substeps,
            ..TraceOptions::default()
        };
        let fine = trace_fan(&traj, &p, 0, &z, &opts)?;
        let kd = detection_record(&fan1, eta, cfg.analysis.rho_floor)
            .ok_or_else(|| Error::NoShock("base fan lost its detection record".into()))?;
        let t_limit = fan1.times[kd.saturating_sub(1)];
        let base = dz_rho1(&fan1, eta, t_limit, sm.z0);
        let refd = dz_rho1(&fine, eta, t_limit, sm.z0);
        let ladder = blowup_ladder(&fine, eta, &cfg.analysis)?;
        artifacts.push((format!("{dir}/ladder.csv"), ladder_csv(&ladder).into_bytes()));
        let resolved: Vec<f64> = ladder.rungs.iter().filter(|r| r.resolved).map(|r| r.h).collect();
        let h_series = resolved.get(resolved.len() / 2).copied().unwrap_or(cfg.analysis.h_max * eta);
        let k_end = fine.times.iter().position(|t| *t >= ladder.t_eval).unwrap_or(fine.times.len() - 1);
        let series = blowup_time_series(&fine, eta, ladder.z_center, h_series, k_end);
        let late: Vec<f64> = series.iter().filter(|(t, _)| *t >= 0.5 * t_num).map(|s| s.1).collect();
        let series_increasing = late.len() >= 2 && late.windows(2).all(|w| w[1] >= w[0]);
        report.blowup = Some(ladder.clone());
        sm.refined = Some(RefinedSummary {
            seeds: z.len(),
            t_limit,
            dz_sup_base: base.sup,
            dz_sup_refined: refd.sup,
            dz_rel_change: (refd.sup - base.sup).abs() / base.sup,
            dz_noise_warning: base.noise_warning || refd.noise_warning,
            ladder,
            h_series,
            series_increasing,
            series,
        });
    }
    sm.shock = Some(report.clone());
    artifacts.push((format!("{dir}/shock.json"), report.to_json()?.into_bytes()));
    Ok(())
}
