//! Shock-time measurement, bracket checks, sweep trends and the H² blow-up integral.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::characteristics::CharFan;
use crate::error::{Error, Result};
use crate::evolve1d::Trajectory;
use crate::grid::Grid1D;
use crate::initial_data::{reconstruct_phi0, DataMode, DataParams};
use crate::model_eigen::PhysParams;

pub const SHOCK_SCHEMA: &str = "elwave.shock.v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    /// Detection threshold for `min ρ₁`.
    pub rho_floor: f64,
    /// Bracket parameter used for reporting.
    pub epsilon: f64,
    /// Smallest exclusion radius, in units of `η`.
    pub h_min: f64,
    /// Largest exclusion radius, in units of `η`.
    pub h_max: f64,
    /// `max|∂ₓφ₁|/g₀` range fitted by the gradient estimator.
    pub grad_window: (f64, f64),
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            rho_floor: 1e-3,
            epsilon: 0.01,
            h_min: 1.0 / 256.0,
            h_max: 0.25,
            grad_window: (1.5, 3.0),
        }
    }
}

impl AnalysisParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.rho_floor > 0.0 && self.rho_floor < 0.1) {
            out.push(format!("rho_floor: need 0 < rho_floor < 0.1, got {}", self.rho_floor));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.01) {
            out.push(format!("epsilon: need 0 < ε ≤ 1/100, got {}", self.epsilon));
        }
        if !(self.h_min > 0.0 && self.h_min < self.h_max && self.h_max <= 0.5) {
            out.push(format!(
                "h_min: need 0 < h_min < h_max ≤ 0.5, got h_min = {}, h_max = {}",
                self.h_min, self.h_max
            ));
        }
        let (lo, hi) = self.grad_window;
        if !(lo >= 1.0 && hi > lo) {
            out.push(format!("grad_window: need 1 ≤ lo < hi, got ({lo}, {hi})"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v.join("; ")))
        }
    }
}

/// Least-squares line with coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn linfit(xs: &[f64], ys: &[f64]) -> Option<LinFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LinFit {
        slope,
        intercept,
        r2,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub epsilon: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Bracket {
    /// `[1/((1+ε)³|c|W₀), 1/((1−ε)⁴|c|W₀)]`.
    pub fn new(epsilon: f64, c111: f64, w0: f64) -> Bracket {
        let base = c111.abs() * w0;
        Bracket {
            epsilon,
            t_lo: 1.0 / ((1.0 + epsilon).powi(3) * base),
            t_hi: 1.0 / ((1.0 - epsilon).powi(4) * base),
        }
    }
}

/// `1/max|∂ₓφ₁|` fitted linearly in `t` over the resolved window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradFit {
    pub t_blowup: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub r2: f64,
    /// `|T_ρ − T_grad|/T_ρ`
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusivity {
    /// `min ρ_i` over seeds in `[η, 2η]` and records up to detection, families 2–4.
    pub min_rho: [f64; 3],
    /// `sup |w_i|` over the same set.
    pub sup_w: [f64; 3],
    pub min_rho1: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub h: f64,
    pub value: f64,
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupLadder {
    pub t_eval: f64,
    pub z_center: f64,
    pub rungs: Vec<Rung>,
    /// `I = c·ln(1/h) + d` over the resolved rungs.
    pub fit: Option<LinFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockReport {
    pub schema: String,
    pub t_num: f64,
    pub z_shock: f64,
    /// Records used by the extrapolation and the fit quality.
    pub rho_fit: LinFit,
    pub rho_window: (f64, f64),
    pub c111_0: f64,
    pub w0: f64,
    /// `T_num·|c¹₁₁(0)|·W₀`
    pub product: f64,
    pub brackets: Vec<Bracket>,
    pub grad_fit: Option<GradFit>,
    pub exclusivity: Option<Exclusivity>,
    pub blowup: Option<BlowupLadder>,
    pub fingerprint: String,
    pub input_hash: String,
}

impl ShockReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `sha256("blob <len>\0" ‖ bytes)` as hex.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// `min_z ρ₁(z, t_k)` over seeds in `[η, 2η]` for every record.
pub fn min_rho_series(fan: &CharFan, eta: f64) -> Vec<(f64, f64, usize)> {
    let r = fan.seed_range(eta, 2.0 * eta);
    (0..fan.times.len())
        .map(|k| {
            let (m, s) = fan.min_rho(k, r.clone());
            (fan.times[k], m, s)
        })
        .collect()
}

/// First record where `min ρ` drops below `floor`, if any.
pub fn detection_record(fan: &CharFan, eta: f64, floor: f64) -> Option<usize> {
    min_rho_series(fan, eta).iter().position(|(_, m, _)| *m < floor)
}

/// Gradient-blow-up estimator over the first contiguous stretch of the series
/// with `g/g₀ ∈ [lo, hi]`.
pub fn gradient_fit(traj: &Trajectory, window: (f64, f64)) -> Option<(f64, f64, (f64, f64), usize, f64)> {
    let g0 = traj.initial_max_grad;
    if !(g0 > 0.0) {
        return None;
    }
    let (lo, hi) = (window.0 * g0, window.1 * g0);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for &(t, g) in &traj.grad_series {
        if g > hi {
            break;
        }
        if g >= lo {
            ts.push(t);
            ys.push(1.0 / g);
        }
    }
    let fit = linfit(&ts, &ys)?;
    if fit.n < 3 || fit.slope >= 0.0 {
        return None;
    }
    let t_blowup = -fit.intercept / fit.slope;
    Some((t_blowup, -1.0 / fit.slope, (ts[0], *ts.last().unwrap()), fit.n, fit.r2))
}

/// Shock time from the family-1 fan, with the gradient estimator as a cross-check.
pub fn detect_shock(fan1: &CharFan, traj: &Trajectory, eta: f64, w0: f64, ap: &AnalysisParams) -> Result<ShockReport> {
    ap.validate()?;
    if fan1.family != 0 {
        return Err(Error::InvalidParams("detect_shock needs the family-1 fan".into()));
    }
    let series = min_rho_series(fan1, eta);
    let Some(kd) = series.iter().position(|(_, m, _)| *m < ap.rho_floor) else {
        let (t, m, _) = series.last().copied().unwrap_or((0.0, 1.0, 0));
        return Err(Error::NoShock(format!("min ρ₁ = {m:.4e} at t = {t}, above the floor {}", ap.rho_floor)));
    };
    if kd == 0 {
        return Err(Error::NoShock("min ρ₁ is below the floor at t = 0".into()));
    }
    let mut ts = Vec::new();
    let mut ms = Vec::new();
    for &(t, m, _) in series[..kd].iter().rev() {
        if m > 10.0 * ap.rho_floor {
            break;
        }
        ts.push(t);
        ms.push(m);
    }
    if ts.len() < 2 {
        // Cadence coarser than the window: use the last two records above the floor.
        let k0 = kd.saturating_sub(2);
        ts = series[k0..kd].iter().map(|s| s.0).collect();
        ms = series[k0..kd].iter().map(|s| s.1).collect();
    }
    if ts.len() < 2 {
        return Err(Error::UnderResolved("fewer than two records before the ρ floor".into()));
    }
    ts.reverse();
    ms.reverse();
    let fit = linfit(&ts, &ms).ok_or_else(|| Error::UnderResolved("degenerate ρ window".into()))?;
    if fit.slope >= 0.0 {
        return Err(Error::NoShock("min ρ₁ is not decreasing near the floor".into()));
    }
    let t_num = -fit.intercept / fit.slope;
    let z_shock = fan1.seeds[series[kd - 1].2];
    let c111 = traj.params.c111_at_zero();
    let grad_fit = gradient_fit(traj, ap.grad_window).map(|(tb, a, win, n, r2)| GradFit {
        t_blowup: tb,
        amplitude: a,
        window: win,
        points: n,
        r2,
        discrepancy: (t_num - tb).abs() / t_num,
    });
    let mut bytes = Vec::new();
    for (t, m, s) in &series {
        bytes.extend_from_slice(&t.to_le_bytes());
        bytes.extend_from_slice(&m.to_le_bytes());
        bytes.extend_from_slice(&(*s as u64).to_le_bytes());
    }
    for (t, g) in &traj.grad_series {
        bytes.extend_from_slice(&t.to_le_bytes());
        bytes.extend_from_slice(&g.to_le_bytes());
    }
    let mut eps_list = vec![ap.epsilon];
    if ap.epsilon != 0.1 {
        eps_list.push(0.1);
    }
    Ok(ShockReport {
        schema: SHOCK_SCHEMA.into(),
        t_num,
        z_shock,
        rho_window: (ts[0], *ts.last().unwrap()),
        rho_fit: fit,
        c111_0: c111,
        w0,
        product: t_num * c111.abs() * w0,
        brackets: eps_list.into_iter().map(|e| Bracket::new(e, c111, w0)).collect(),
        grad_fit,
        exclusivity: None,
        blowup: None,
        fingerprint: String::new(),
        input_hash: content_hash(&bytes),
    })
}

/// Families 2–4 over seeds in `[η, 2η]` and records with `t ≤ t_detect`.
pub fn exclusivity(fan1: &CharFan, others: &[CharFan], eta: f64, t_detect: f64) -> Result<Exclusivity> {
    if others.len() != 3 || others.iter().enumerate().any(|(q, f)| f.family != q + 1) {
        return Err(Error::InvalidParams("exclusivity needs the fans of families 2, 3, 4".into()));
    }
    let mut min_rho = [f64::INFINITY; 3];
    let mut sup_w = [0.0f64; 3];
    for (q, f) in others.iter().enumerate() {
        let r = f.seed_range(eta, 2.0 * eta);
        for (k, &t) in f.times.iter().enumerate() {
            if t > t_detect {
                break;
            }
            for s in r.clone() {
                min_rho[q] = min_rho[q].min(f.rho[s][k]);
                sup_w[q] = sup_w[q].max(f.w(s, k).abs());
            }
        }
    }
    let r1 = fan1.seed_range(eta, 2.0 * eta);
    let k1 = fan1.times.partition_point(|t| *t <= t_detect).max(1) - 1;
    let k1 = (k1 + 1).min(fan1.times.len() - 1);
    let min_rho1 = fan1.min_rho(k1, r1).0;
    let pass = min_rho.iter().all(|m| *m >= 0.5);
    Ok(Exclusivity {
        min_rho,
        sup_w,
        min_rho1,
        pass,
    })
}

fn integrand(fan: &CharFan, s: usize, k: usize, eta: f64) -> f64 {
    let z = fan.seeds[s];
    let v = fan.v[s][k];
    let rho = fan.rho[s][k];
    let wgt = ((z - eta) * (2.0 * eta - z)).max(0.0).sqrt();
    v * v / rho * wgt
}

/// `I(h) = ∫_{[η,2η], |z−z_c| ≥ h} (v/ρ)² ρ √((z−η)(2η−z)) dz` at record `k`, integrating
/// the piecewise-linear interpolant of the integrand over the retained part of
/// every seed interval. Also reports whether the innermost retained seeds
/// resolve `ρ` (`ρ ≥ 10·Δz·|∂_zρ|` there).
pub fn h2_blowup_integral(fan: &CharFan, k: usize, eta: f64, z_c: f64, h: f64) -> (f64, bool) {
    let r = fan.seed_range(eta, 2.0 * eta);
    let idx: Vec<usize> = r.collect();
    let (cut_lo, cut_hi) = (z_c - h, z_c + h);
    let mut total = 0.0;
    for pair in idx.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (za, zb) = (fan.seeds[a], fan.seeds[b]);
        let (fa, fb) = (integrand(fan, a, k, eta), integrand(fan, b, k, eta));
        let lin = |z: f64| fa + (fb - fa) * (z - za) / (zb - za);
        let mut piece = |lo: f64, hi: f64| {
            if hi > lo {
                total += 0.5 * (lin(lo) + lin(hi)) * (hi - lo);
            }
        };
        piece(za, zb.min(cut_lo));
        piece(za.max(cut_hi), zb);
    }
    let n = fan.n_seeds();
    let check = |s: usize| -> bool {
        if s == 0 || s + 1 >= n {
            return true;
        }
        let dz = fan.seeds[s + 1] - fan.seeds[s - 1];
        let grad = (fan.rho[s + 1][k] - fan.rho[s - 1][k]).abs() / dz;
        fan.rho[s][k] >= 10.0 * 0.5 * dz * grad
    };
    let mut resolved = true;
    if let Some(&s) = idx.iter().rev().find(|&&s| fan.seeds[s] <= cut_lo) {
        resolved &= check(s);
    }
    if let Some(&s) = idx.iter().find(|&&s| fan.seeds[s] >= cut_hi) {
        resolved &= check(s);
    }
    (total, resolved)
}

/// Geometric ladder `h = h_max·2^{-j} ≥ h_min` (in units of `η`) at the last
/// record with `min ρ₁ ≥ rho_floor`, centered on that record's argmin seed.
pub fn blowup_ladder(fan1: &CharFan, eta: f64, ap: &AnalysisParams) -> Result<BlowupLadder> {
    let series = min_rho_series(fan1, eta);
    let k = match series.iter().position(|(_, m, _)| *m < ap.rho_floor) {
        Some(0) | None => return Err(Error::NoShock("ρ₁ never reaches the floor in the traced window".into())),
        Some(kd) => kd - 1,
    };
    let z_c = fan1.seeds[series[k].2];
    let mut rungs = Vec::new();
    let mut h = ap.h_max * eta;
    while h >= ap.h_min * eta * (1.0 - 1e-12) {
        let (value, resolved) = h2_blowup_integral(fan1, k, eta, z_c, h);
        rungs.push(Rung { h, value, resolved });
        h *= 0.5;
    }
    let good: Vec<&Rung> = rungs.iter().filter(|r| r.resolved).collect();
    let xs: Vec<f64> = good.iter().map(|r| (1.0 / r.h).ln()).collect();
    let ys: Vec<f64> = good.iter().map(|r| r.value).collect();
    let fit = if good.len() >= 3 { linfit(&xs, &ys) } else { None };
    Ok(BlowupLadder {
        t_eval: series[k].0,
        z_center: z_c,
        rungs,
        fit,
    })
}

/// `I(h)` at fixed `h` for every record up to and including `k_end`.
pub fn blowup_time_series(fan1: &CharFan, eta: f64, z_c: f64, h: f64, k_end: usize) -> Vec<(f64, f64)> {
    (0..=k_end.min(fan1.times.len() - 1))
        .map(|k| (fan1.times[k], h2_blowup_integral(fan1, k, eta, z_c, h).0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketVerdict {
    /// `(θ, P)` in the order given.
    pub products: Vec<(f64, f64)>,
    pub in_range: bool,
    /// `|P − 1|` non-increasing as θ decreases.
    pub trend: bool,
    pub pass: bool,
}

/// `P = T·|c¹₁₁(0)|·W₀` per preset, inside `[0.7, 1.4]` and trending to 1 as θ shrinks.
pub fn bracket_check(runs: &[(f64, f64, f64, f64)]) -> BracketVerdict {
    let mut products: Vec<(f64, f64)> = runs.iter().map(|&(theta, t, c, w0)| (theta, t * c.abs() * w0)).collect();
    products.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let in_range = products.iter().all(|(_, p)| (0.7..=1.4).contains(p));
    let trend = products.windows(2).all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs());
    BracketVerdict {
        products,
        in_range,
        trend,
        pass: in_range && trend,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    /// `(η, T_num, W₀)` sorted by decreasing η.
    pub rows: Vec<(f64, f64, f64)>,
    pub decreasing: bool,
    /// `max/min` of `T_num·W₀`.
    pub spread: f64,
    pub pass: bool,
}

/// `T_num` strictly decreasing as η decreases and `T_num·W₀` within 15%.
pub fn illposedness_trend(runs: &[(f64, f64, f64)]) -> Result<TrendVerdict> {
    if runs.len() < 3 {
        return Err(Error::InvalidParams("the η-sweep needs at least three members".into()));
    }
    let mut rows = runs.to_vec();
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let prods: Vec<f64> = rows.iter().map(|r| r.1 * r.2).collect();
    let mx = prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = prods.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = mx / mn;
    Ok(TrendVerdict {
        rows,
        decreasing,
        spread,
        pass: decreasing && spread < 1.15,
    })
}

/// CSV of the ladder: `h,I,resolved`.
pub fn ladder_csv(ladder: &BlowupLadder) -> String {
    let mut s = String::from("# schema=elwave.ladder.v1\nh,I,resolved\n");
    for r in &ladder.rungs {
        s.push_str(&format!("{},{},{}\n", r.h, r.value, r.resolved as u8));
    }
    s
}

/// Crossing estimate for the reduced `(φ₁, φ₃)` system of paper-literal data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleWave {
    pub t_cross: f64,
    pub z_cross: f64,
    /// Lattice nodes across `[η, 2η]`.
    pub n: usize,
}

/// `F(u) = ∫₀ᵘ √(c₁² + 2σ₀s) ds`.
fn riemann_f(p: &PhysParams, u: f64) -> f64 {
    let c1 = p.c1;
    ((c1 * c1 + 2.0 * p.sigma0 * u).powf(1.5) - c1 * c1 * c1) / (3.0 * p.sigma0)
}

/// `λ₁` from the Riemann invariants `R₁ = φ₃ − F(φ₁)`, `R₄ = φ₃ + F(φ₁)`.
fn lambda_from_invariants(p: &PhysParams, r1: f64, r4: f64) -> f64 {
    let f = 0.5 * (r4 - r1);
    (p.c1.powi(3) + 3.0 * p.sigma0 * f).cbrt()
}

/// With `φ₂ ≡ φ₄ ≡ 0` the system reduces to `φ₁_t = φ₃_x`, `φ₃_t = a(φ₁)φ₁_x`,
/// whose Riemann invariants are constant along `±√a`. The family-1 and
/// family-4 characteristics from the data support are traced through their
/// interaction on a lattice (second order in the node spacing); beyond it every
/// family-1 line is straight, and the result is the earliest crossing of
/// neighbouring lines.
pub fn simple_wave_crossing(p: &PhysParams, dp: &DataParams, n: usize) -> Result<SimpleWave> {
    if n < 16 {
        return Err(Error::InvalidParams("simple-wave lattice needs at least 16 nodes".into()));
    }
    let grid = Grid1D::new(dp.eta, 2.0 * dp.eta, n + 1)?;
    let data = reconstruct_phi0(dp, p, DataMode::PaperLiteral, &grid)?;
    if data.phi.iter().any(|f| f[1] != 0.0 || f[3] != 0.0) {
        return Err(Error::InvalidParams("data is not in the reduced (φ₁, φ₃) class".into()));
    }
    let z = grid.nodes();
    let r1: Vec<f64> = data.phi.iter().map(|f| f[2] - riemann_f(p, f[0])).collect();
    let r4: Vec<f64> = data.phi.iter().map(|f| f[2] + riemann_f(p, f[0])).collect();
    // col[j] = (x, t) of the point where C₁(z_j) meets C₄(z_k), for the current k.
    let mut col: Vec<(f64, f64)> = vec![(z[0], 0.0)];
    for k in 1..=n {
        let mut next = vec![(0.0, 0.0); k + 1];
        next[k] = (z[k], 0.0);
        for j in (0..k).rev() {
            let lam_p = lambda_from_invariants(p, r1[j], r4[k]);
            let a = col[j];
            let lam_a = lambda_from_invariants(p, r1[j], r4[k - 1]);
            let b = next[j + 1];
            let lam_b = lambda_from_invariants(p, r1[j + 1], r4[k]);
            let s1 = 0.5 * (lam_a + lam_p);
            let s4 = -0.5 * (lam_b + lam_p);
            let t = (b.0 - a.0 + s1 * a.1 - s4 * b.1) / (s1 - s4);
            next[j] = (a.0 + s1 * (t - a.1), t);
        }
        col = next;
    }
    let r4_right = r4[n];
    let lam: Vec<f64> = (0..=n).map(|j| lambda_from_invariants(p, r1[j], r4_right)).collect();
    let mut best = (f64::INFINITY, f64::NAN);
    for j in 0..n {
        let (xa, ta) = col[j];
        let (xb, tb) = col[j + 1];
        if xb <= xa {
            return Err(Error::UnderResolved("characteristics cross inside the interaction zone".into()));
        }
        if lam[j] > lam[j + 1] {
            let t = (xb - xa - lam[j + 1] * tb + lam[j] * ta) / (lam[j] - lam[j + 1]);
            if t < best.0 {
                best = (t, 0.5 * (z[j] + z[j + 1]));
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NoShock("family-1 lines never converge".into()));
    }
    Ok(SimpleWave {
        t_cross: best.0,
        z_cross: best.1,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bracket_endpoints() {
        let b = Bracket::new(0.01, -0.75, 1.0);
        assert_relative_eq!(b.t_lo * 0.75, 1.0 / 1.01f64.powi(3), max_relative = 1e-14);
        assert_relative_eq!(b.t_hi * 0.75, 1.0 / 0.99f64.powi(4), max_relative = 1e-14);
        assert!((b.t_lo * 0.75 - 0.9706).abs() < 1e-4);
        assert!((b.t_hi * 0.75 - 1.0410).abs() < 1e-4);
    }

    #[test]
    fn bracket_check_arithmetic() {
        let v = bracket_check(&[(0.1, 10.5, -0.75, 0.12958)]);
        assert!((v.products[0].1 - 1.0204).abs() < 5e-4);
        assert!(v.pass);
        let v = bracket_check(&[(0.1, 11.0, -0.75, 0.1), (0.05, 35.0, -0.75, 0.05)]);
        assert!(v.in_range && !v.trend);
    }

    #[test]
    fn trend_verdict() {
        let v = illposedness_trend(&[(0.025, 9.9, 0.135), (0.05, 10.3, 0.13), (0.0125, 9.4, 0.143)]).unwrap();
        assert_eq!(v.rows[0].0, 0.05);
        assert!(v.decreasing && v.pass);
        assert!(illposedness_trend(&[(0.05, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn linfit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linfit(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 2.0);
        assert_relative_eq!(f.intercept, 1.0);
        assert_relative_eq!(f.r2, 1.0);
    }

    #[test]
    fn hash_is_git_blob_style() {
        assert_eq!(
            content_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    #[test]
    fn validation_lists_violations() {
        let ap = AnalysisParams {
            rho_floor: 0.5,
            epsilon: 0.2,
            ..Default::default()
        };
        assert_eq!(ap.violations().len(), 2);
    }
}
