//! Method-of-lines evolution of `Φ_t + A(Φ)Φ_x = 0` on a uniform 1D grid.
//!
//! Fourth-order central differences, classical RK4, and a fourth-difference
//! dissipation `−ε·s·Δx³·∂ₓ⁴Φ`. Outside the data's light cone the state is
//! constant, so only cells near a non-constant neighbourhood are updated; the
//! active set is refreshed every few steps with a generous halo.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::grid::Grid1D;
use crate::initial_data::DataField;
use crate::model_eigen::{apply_a, eigenvectors, min_gap_sigma, Normalization, PhysParams, State4};
use crate::snapshot_io::FieldSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub cfl: f64,
    /// Normalized fourth-difference coefficient ε.
    pub dissipation: f64,
    pub t_max: f64,
    /// Stop once `max|∂ₓφ₁| ≥ m_stop_factor × initial max|∂ₓφ₁|`; `None` disables it.
    pub m_stop_factor: Option<f64>,
    /// Coarse snapshot spacing in time.
    pub snapshot_dt: f64,
    /// Dense snapshots are `snapshot_dt / dense_factor` apart.
    pub dense_factor: usize,
    /// Keep dense snapshots for `t ≤ early_window` (strip overlap phase).
    pub early_window: f64,
    /// Keep dense snapshots within the last `dense_tail` fraction of elapsed time.
    pub dense_tail: f64,
    /// Galilean frame speed: the grid coordinate is `ξ = x − frame_speed·t`.
    pub frame_speed: f64,
    /// Jump between neighbouring cells, relative to the initial `max|Φ|`,
    /// below which they count as equal.
    pub activity_tol: f64,
    pub mask_interval: usize,
    pub mask_halo: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            cfl: 0.85,
            dissipation: 0.02,
            t_max: 1.0,
            m_stop_factor: Some(50.0),
            snapshot_dt: 0.01,
            dense_factor: 8,
            early_window: 0.0,
            dense_tail: 0.1,
            frame_speed: 0.0,
            activity_tol: 1e-10,
            mask_interval: 16,
            mask_halo: 48,
        }
    }
}

impl EvolveConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            v.push(format!("cfl: need 0 < cfl < 1, got {}", self.cfl));
        }
        if !(self.dissipation >= 0.0) {
            v.push(format!("dissipation: need ≥ 0, got {}", self.dissipation));
        }
        if !(self.t_max > 0.0) {
            v.push(format!("t_max: need > 0, got {}", self.t_max));
        }
        if let Some(m) = self.m_stop_factor {
            if !(m > 1.0) {
                v.push(format!("m_stop: need factor > 1, got {m}"));
            }
        }
        if !(self.snapshot_dt > 0.0) {
            v.push(format!("snapshot_dt: need > 0, got {}", self.snapshot_dt));
        }
        if self.dense_factor == 0 {
            v.push("dense_factor: need ≥ 1".into());
        }
        if !(self.dense_tail >= 0.0 && self.dense_tail < 1.0) {
            v.push(format!("dense_tail: need in [0, 1), got {}", self.dense_tail));
        }
        if self.mask_interval == 0 || self.mask_halo < 8 {
            v.push("mask: need interval ≥ 1 and halo ≥ 8".into());
        }
        v
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

/// Contiguous stored cells of a snapshot with `Φ` and the decomposed `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub phi: Vec<[f64; 4]>,
    pub w: Vec<[f64; 4]>,
}

impl Segment {
    fn end(&self) -> usize {
        self.start + self.phi.len()
    }
}

/// Sparse snapshot: stored segments plus the constant state of every gap
/// (`gaps.len() == segments.len() + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: u64,
    pub segments: Vec<Segment>,
    pub gaps: Vec<[f64; 4]>,
    pub max_norm: f64,
    pub max_grad1: f64,
}

impl Snapshot {
    /// `(Φ, w)` at grid node `i`.
    #[inline]
    pub fn node(&self, i: usize) -> ([f64; 4], [f64; 4]) {
        let k = self.segments.partition_point(|s| s.end() <= i);
        if k < self.segments.len() && self.segments[k].start <= i {
            let s = &self.segments[k];
            (s.phi[i - s.start], s.w[i - s.start])
        } else {
            (self.gaps[k], [0.0; 4])
        }
    }

    /// Segment containing all of `lo..=hi`, if any.
    #[inline]
    fn segment_covering(&self, lo: usize, hi: usize) -> Option<&Segment> {
        let k = self.segments.partition_point(|s| s.end() <= lo);
        self.segments.get(k).filter(|s| s.start <= lo && hi < s.end())
    }

    pub fn stored_cells(&self) -> usize {
        self.segments.iter().map(|s| s.phi.len()).sum()
    }

    /// Dense `Φ` on the whole grid.
    pub fn dense_phi(&self, n: usize) -> Vec<[f64; 4]> {
        (0..n).map(|i| self.node(i).0).collect()
    }

    pub fn dense_w(&self, n: usize) -> Vec<[f64; 4]> {
        (0..n).map(|i| self.node(i).1).collect()
    }
}

/// Cubic Lagrange weights for fractional offset `s ∈ [0, 1]` on nodes −1, 0, 1, 2.
#[inline]
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    TMax,
    GradientThreshold,
    /// A step failed; the trajectory ends at the last valid time.
    Failed(String),
}

/// Snapshots, gradient history and stop information of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub params: PhysParams,
    pub config: EvolveConfig,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    /// `(t, max|∂ₓφ₁|)` after every step.
    pub grad_series: Vec<(f64, f64)>,
    pub initial_max_grad: f64,
    pub stop: StopReason,
    pub t_end: f64,
    pub steps: u64,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.snapshots.first().map(|s| s.t).unwrap_or(0.0)
    }

    /// Grid coordinate of lab position `x` at time `t`.
    #[inline]
    pub fn to_grid(&self, x: f64, t: f64) -> f64 {
        x - self.config.frame_speed * t
    }

    /// Lab position of grid node `i` at time `t`.
    pub fn lab_x(&self, i: usize, t: f64) -> f64 {
        self.grid.x(i) + self.config.frame_speed * t
    }

    /// Index `k` with `t_k ≤ t ≤ t_{k+1}` (clamped to the stored range).
    #[inline]
    pub fn bracket(&self, t: f64) -> usize {
        let n = self.snapshots.len();
        if n < 2 {
            return 0;
        }
        let k = self.snapshots.partition_point(|s| s.t <= t);
        k.saturating_sub(1).min(n - 2)
    }

    /// Cubic interpolation in the grid coordinate `xi` of one snapshot;
    /// returns `(Φ, w)`. Errors if `xi` is outside the grid interior.
    #[inline]
    pub fn sample_snapshot(&self, k: usize, xi: f64) -> Result<([f64; 4], [f64; 4])> {
        let g = &self.grid;
        let u = (xi - g.x_min) / g.dx();
        if !(u >= 1.0 && u <= (g.n - 3) as f64) {
            return Err(Error::Grid(format!("sample at ξ = {xi} outside grid interior")));
        }
        let i = u.floor() as usize;
        let wts = cubic_weights(u - i as f64);
        let snap = &self.snapshots[k];
        let mut phi = [0.0; 4];
        let mut w = [0.0; 4];
        if let Some(seg) = snap.segment_covering(i - 1, i + 2) {
            let o = i - 1 - seg.start;
            for (q, wt) in wts.iter().enumerate() {
                for c in 0..4 {
                    phi[c] += wt * seg.phi[o + q][c];
                    w[c] += wt * seg.w[o + q][c];
                }
            }
        } else {
            for (q, wt) in wts.iter().enumerate() {
                let (p, ww) = snap.node(i - 1 + q);
                for c in 0..4 {
                    phi[c] += wt * p[c];
                    w[c] += wt * ww[c];
                }
            }
        }
        Ok((phi, w))
    }

    /// Cubic interpolation of `w_m` alone in one snapshot.
    #[inline]
    pub fn sample_w_component(&self, k: usize, xi: f64, m: usize) -> Result<f64> {
        let g = &self.grid;
        let u = (xi - g.x_min) / g.dx();
        if !(u >= 1.0 && u <= (g.n - 3) as f64) {
            return Err(Error::Grid(format!("sample at ξ = {xi} outside grid interior")));
        }
        let i = u.floor() as usize;
        let wts = cubic_weights(u - i as f64);
        let snap = &self.snapshots[k];
        let mut out = 0.0;
        if let Some(seg) = snap.segment_covering(i - 1, i + 2) {
            let o = i - 1 - seg.start;
            for (q, wt) in wts.iter().enumerate() {
                out += wt * seg.w[o + q][m];
            }
        } else {
            for (q, wt) in wts.iter().enumerate() {
                out += wt * snap.node(i - 1 + q).1[m];
            }
        }
        Ok(out)
    }

    /// `w_m` at lab `(x, t)` for every `m != skip`: cubic in space, linear in
    /// time, with component `m` read along the line of lab slope `shear[m]`
    /// through `(x, t)` in each of the two bracketing snapshots.
    pub fn sample_w_sheared(&self, x: f64, t: f64, shear: &[f64; 4], skip: Option<usize>) -> Result<[f64; 4]> {
        let k = self.bracket(t);
        let (t0, t1) = (self.snapshots[k].t, self.snapshots[k + 1].t);
        let a = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let mut out = [0.0; 4];
        let vf = self.config.frame_speed;
        for m in 0..4 {
            if Some(m) == skip {
                continue;
            }
            let x0 = x - shear[m] * (t - t0);
            let x1 = x + shear[m] * (t1 - t);
            let w0 = self.sample_w_component(k, x0 - vf * t0, m)?;
            let w1 = self.sample_w_component(k + 1, x1 - vf * t1, m)?;
            out[m] = (1.0 - a) * w0 + a * w1;
        }
        Ok(out)
    }

    /// `(Φ, w)` at lab `(x, t)`: cubic in space, linear in time, no shear.
    pub fn sample(&self, x: f64, t: f64) -> Result<([f64; 4], [f64; 4])> {
        let k = self.bracket(t);
        let (t0, t1) = (self.snapshots[k].t, self.snapshots[k + 1].t);
        let a = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let (p0, w0) = self.sample_snapshot(k, self.to_grid(x, t0))?;
        let (p1, w1) = self.sample_snapshot(k + 1, self.to_grid(x, t1))?;
        let mut p = [0.0; 4];
        let mut w = [0.0; 4];
        for c in 0..4 {
            p[c] = (1.0 - a) * p0[c] + a * p1[c];
            w[c] = (1.0 - a) * w0[c] + a * w1[c];
        }
        Ok((p, w))
    }

    /// Dense ELWV snapshot of `(Φ, w)` (8 components per node, grid frame).
    pub fn to_field_snapshot(&self, k: usize) -> FieldSnapshot {
        let s = &self.snapshots[k];
        let mut data = Vec::with_capacity(8 * self.grid.n);
        for i in 0..self.grid.n {
            let (p, w) = s.node(i);
            data.extend_from_slice(&p);
            data.extend_from_slice(&w);
        }
        FieldSnapshot {
            time: s.t,
            origin: self.grid.x_min + self.config.frame_speed * s.t,
            spacing: self.grid.dx(),
            components: 8,
            data,
        }
    }
}

/// Fourth-order first derivative at `j` with clamped (constant) ghosts.
#[inline]
fn d1(y: &[[f64; 4]], j: usize, inv12dx: f64) -> [f64; 4] {
    let n = y.len();
    let at = |o: isize| y[(j as isize + o).clamp(0, n as isize - 1) as usize];
    let (m2, m1, p1, p2) = (at(-2), at(-1), at(1), at(2));
    let mut out = [0.0; 4];
    for c in 0..4 {
        out[c] = (8.0 * (p1[c] - m1[c]) + (m2[c] - p2[c])) * inv12dx;
    }
    out
}

/// Decomposes a dense field: `w_k = l_k(Φ)·∂ₓΦ` with the regularized pair.
/// Returns the w fields and `max‖∂ₓΦ − Σ w_k r_k‖∞ / max|∂ₓΦ|`.
pub fn decompose_field(p: &PhysParams, phi: &[[f64; 4]], dx: f64) -> Result<(Vec<[f64; 4]>, f64)> {
    let inv = 1.0 / (12.0 * dx);
    let mut w = vec![[0.0; 4]; phi.len()];
    let mut res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..phi.len() {
        let dphi = d1(phi, j, inv);
        let (wj, r) = decompose_point(p, &phi[j], &dphi)?;
        w[j] = wj;
        res = res.max(r);
        scale = scale.max(dphi.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }
    Ok((w, if scale > 0.0 { res / scale } else { 0.0 }))
}

/// `(w, ‖∂ₓΦ − Σ w_k r_k‖∞)` at one point.
#[inline]
pub fn decompose_point(p: &PhysParams, phi: &[f64; 4], dphi: &[f64; 4]) -> Result<([f64; 4], f64)> {
    if dphi.iter().all(|v| *v == 0.0) {
        return Ok(([0.0; 4], 0.0));
    }
    let es = eigenvectors(p, &State4(*phi), Normalization::Regularized)?;
    let mut w = [0.0; 4];
    for k in 0..4 {
        w[k] = (0..4).map(|c| es.lvec[k][c] * dphi[c]).sum();
    }
    let mut res: f64 = 0.0;
    for c in 0..4 {
        let rec: f64 = (0..4).map(|k| w[k] * es.rvec[k][c]).sum();
        res = res.max((rec - dphi[c]).abs());
    }
    Ok((w, res))
}

/// Sorted, disjoint half-open cell ranges.
type Intervals = Vec<(usize, usize)>;

fn merge_dilated(marks: &[(usize, usize)], halo: usize, n: usize) -> Intervals {
    let mut out: Intervals = Vec::new();
    for &(a, b) in marks {
        let lo = a.saturating_sub(halo);
        let hi = (b + halo).min(n);
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Solver state that can be advanced repeatedly.
pub struct Evolver {
    pub traj: Trajectory,
    y: Vec<[f64; 4]>,
    ytmp: Vec<[f64; 4]>,
    kcur: Vec<[f64; 4]>,
    acc: Vec<[f64; 4]>,
    active: Intervals,
    s_bound: f64,
    t: f64,
    step: u64,
    dense_every: u64,
    coarse_every: u64,
    last_grad: f64,
    tol_abs: f64,
}

impl Evolver {
    pub fn new(p: &PhysParams, cfg: &EvolveConfig, data: &DataField) -> Result<Evolver> {
        p.validate()?;
        cfg.validate()?;
        let grid = data.grid;
        let gap = min_gap_sigma(p)?;
        let vf = cfg.frame_speed;
        let s_bound = (gap.bounds[0].1 - vf).abs().max((gap.bounds[3].0 - vf).abs());
        let dx = grid.dx();
        let dt = cfg.cfl * dx / s_bound;
        let dense_dt = cfg.snapshot_dt / cfg.dense_factor as f64;
        let dense_every = ((dense_dt / dt).round() as u64).max(1);
        let coarse_every = dense_every * cfg.dense_factor as u64;

        let y = data.phi.clone();
        let n = grid.n;
        let mut ev = Evolver {
            traj: Trajectory {
                grid,
                params: *p,
                config: *cfg,
                dt,
                snapshots: Vec::new(),
                grad_series: Vec::new(),
                initial_max_grad: 0.0,
                stop: StopReason::TMax,
                t_end: 0.0,
                steps: 0,
            },
            ytmp: y.clone(),
            y,
            kcur: vec![[0.0; 4]; n],
            acc: vec![[0.0; 4]; n],
            active: vec![(0, n)],
            s_bound,
            t: 0.0,
            step: 0,
            dense_every,
            coarse_every,
            last_grad: 0.0,
            tol_abs: cfg.activity_tol * data.max_norm(),
        };
        ev.refresh_active()?;
        let g0 = ev.max_grad1();
        ev.traj.initial_max_grad = g0;
        ev.last_grad = g0;
        ev.traj.grad_series.push((0.0, g0));
        // Initial snapshot carries the exact seeds rather than differenced ones.
        let mut snap = ev.make_snapshot()?;
        for seg in snap.segments.iter_mut() {
            for (q, slot) in seg.w.iter_mut().enumerate() {
                let j = seg.start + q;
                *slot = [data.w[0][j], data.w[1][j], data.w[2][j], data.w[3][j]];
            }
        }
        ev.traj.snapshots.push(snap);
        Ok(ev)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[[f64; 4]] {
        &self.y
    }

    pub fn active_cells(&self) -> usize {
        self.active.iter().map(|(a, b)| b - a).sum()
    }

    /// `max|∂ₓφ₁|` refined by a parabola through the largest sample and its neighbours.
    fn max_grad1(&self) -> f64 {
        let inv = 1.0 / (12.0 * self.traj.grid.dx());
        let n = self.y.len();
        let mut g: f64 = 0.0;
        let mut arg = 0usize;
        for &(a, b) in &self.active {
            for j in a..b {
                let v = d1(&self.y, j, inv)[0].abs();
                if v > g {
                    g = v;
                    arg = j;
                }
            }
        }
        if arg == 0 || arg + 1 >= n {
            return g;
        }
        let (l, r) = (d1(&self.y, arg - 1, inv)[0].abs(), d1(&self.y, arg + 1, inv)[0].abs());
        let curv = l - 2.0 * g + r;
        if curv < 0.0 {
            g - 0.125 * (r - l) * (r - l) / curv
        } else {
            g
        }
    }

    /// Recomputes the active set from the current state and checks the ball
    /// and the grid margins.
    fn refresh_active(&mut self) -> Result<()> {
        let n = self.traj.grid.n;
        let tol = self.tol_abs;
        let halo = self.traj.config.mask_halo;
        let mut marks: Vec<(usize, usize)> = Vec::new();
        let radius = 2.0 * self.traj.params.kappa;
        let mut max_norm: f64 = 0.0;
        let search = merge_dilated(&self.active, halo, n);
        for &(a, b) in &search {
            for j in a..b.min(n - 1) {
                let (u, v) = (self.y[j], self.y[j + 1]);
                let jump = (0..4).map(|c| (u[c] - v[c]).abs()).fold(0.0, f64::max);
                if !jump.is_finite() {
                    return Err(Error::BallExit {
                        norm: f64::NAN,
                        radius,
                        location: format!("non-finite state near cell {j}, t = {}", self.t),
                    });
                }
                if jump > tol {
                    match marks.last_mut() {
                        Some(last) if last.1 >= j => last.1 = j + 2,
                        _ => marks.push((j, j + 2)),
                    }
                }
                max_norm = max_norm.max(State4(u).norm());
            }
        }
        if max_norm >= radius {
            return Err(Error::BallExit {
                norm: max_norm,
                radius,
                location: format!("t = {}", self.t),
            });
        }
        let active = merge_dilated(&marks, halo, n);
        if let (Some(first), Some(last)) = (active.first(), active.last()) {
            if first.0 < 4 || last.1 > n - 4 {
                return Err(Error::Grid(format!(
                    "disturbance reached the grid edge at t = {}; enlarge the domain",
                    self.t
                )));
            }
        }
        self.active = active;
        Ok(())
    }

    fn rhs_into(&mut self, from_tmp: bool) {
        let p = self.traj.params;
        let dx = self.traj.grid.dx();
        let inv12 = 1.0 / (12.0 * dx);
        let diss = self.traj.config.dissipation * self.s_bound / dx;
        let vf = self.traj.config.frame_speed;
        let src = if from_tmp { &self.ytmp } else { &self.y };
        let n = src.len();
        for &(a, b) in &self.active {
            for j in a..b {
                let at = |o: isize| src[(j as isize + o).clamp(0, n as isize - 1) as usize];
                let (m2, m1, c0, p1, p2) = (at(-2), at(-1), src[j], at(1), at(2));
                let mut dphi = [0.0; 4];
                let mut d4 = [0.0; 4];
                for c in 0..4 {
                    dphi[c] = (8.0 * (p1[c] - m1[c]) + (m2[c] - p2[c])) * inv12;
                    d4[c] = (m2[c] + p2[c]) - 4.0 * (m1[c] + p1[c]) + 6.0 * c0[c];
                }
                let ad = apply_a(&p, &c0, &dphi);
                let mut k = [0.0; 4];
                for c in 0..4 {
                    k[c] = -(ad[c] - vf * dphi[c]) - diss * d4[c];
                }
                self.kcur[j] = k;
            }
        }
    }

    /// One RK4 step of size `dt` over the active cells.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let limit = self.traj.config.cfl * self.traj.grid.dx() / self.s_bound;
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let stages = [(0.5, 1.0), (0.5, 2.0), (1.0, 2.0), (0.0, 1.0)];
        for (si, &(c_next, weight)) in stages.iter().enumerate() {
            self.rhs_into(si > 0);
            for &(a, b) in &self.active {
                for j in a..b {
                    let k = self.kcur[j];
                    if si == 0 {
                        self.acc[j] = k;
                    } else {
                        for c in 0..4 {
                            self.acc[j][c] += weight * k[c];
                        }
                    }
                    if si < 3 {
                        for c in 0..4 {
                            self.ytmp[j][c] = self.y[j][c] + c_next * dt * k[c];
                        }
                    }
                }
            }
        }
        for &(a, b) in &self.active {
            for j in a..b {
                for c in 0..4 {
                    self.y[j][c] += dt / 6.0 * self.acc[j][c];
                }
                self.ytmp[j] = self.y[j];
            }
        }
        self.t += dt;
        self.step += 1;
        Ok(())
    }

    fn make_snapshot(&self) -> Result<Snapshot> {
        let p = self.traj.params;
        let dx = self.traj.grid.dx();
        let inv = 1.0 / (12.0 * dx);
        let mut segments = Vec::with_capacity(self.active.len());
        let mut gaps = Vec::with_capacity(self.active.len() + 1);
        let mut max_norm: f64 = 0.0;
        let mut max_grad1: f64 = 0.0;
        let mut prev_end = 0usize;
        for &(a, b) in &self.active {
            gaps.push(self.y[(prev_end + a) / 2]);
            let phi: Vec<[f64; 4]> = self.y[a..b].to_vec();
            let mut w = Vec::with_capacity(b - a);
            for j in a..b {
                let dphi = d1(&self.y, j, inv);
                max_grad1 = max_grad1.max(dphi[0].abs());
                w.push(decompose_point(&p, &self.y[j], &dphi)?.0);
                max_norm = max_norm.max(State4(self.y[j]).norm());
            }
            segments.push(Segment { start: a, phi, w });
            prev_end = b;
        }
        gaps.push(self.y[(prev_end + self.y.len()) / 2]);
        for g in &gaps {
            max_norm = max_norm.max(State4(*g).norm());
        }
        Ok(Snapshot {
            t: self.t,
            step: self.step,
            segments,
            gaps,
            max_norm,
            max_grad1,
        })
    }

    /// Drops dense snapshots that are neither early, on the coarse cadence,
    /// nor inside the trailing dense window.
    fn prune(&mut self) {
        let cfg = self.traj.config;
        let keep_after = (1.0 - cfg.dense_tail) * self.t;
        let coarse = self.coarse_every;
        let last = self.traj.snapshots.len();
        let mut idx = 0usize;
        self.traj.snapshots.retain(|s| {
            idx += 1;
            idx == 1 || idx == last || s.step % coarse == 0 || s.t <= cfg.early_window || s.t >= keep_after
        });
    }

    /// Advances until `t_stop` (clamped to `t_max` unless `ignore_t_max`) or, if
    /// `use_gradient_stop`, until the gradient threshold fires.
    pub fn advance(&mut self, t_stop: f64, use_gradient_stop: bool) -> &Trajectory {
        if matches!(self.traj.stop, StopReason::Failed(_)) {
            return &self.traj;
        }
        let dt = self.traj.dt;
        let cfg = self.traj.config;
        let threshold = cfg
            .m_stop_factor
            .filter(|_| use_gradient_stop)
            .map(|f| f * self.traj.initial_max_grad)
            .filter(|m| *m > 0.0);
        let mut since_prune = 0usize;
        loop {
            if self.t + 0.5 * dt > t_stop {
                self.traj.stop = StopReason::TMax;
                break;
            }
            if let Err(e) = self.step(dt) {
                self.traj.stop = StopReason::Failed(e.to_string());
                break;
            }
            if self.step % cfg.mask_interval as u64 == 0 {
                if let Err(e) = self.refresh_active() {
                    self.traj.stop = StopReason::Failed(e.to_string());
                    break;
                }
            }
            let g = self.max_grad1();
            self.last_grad = g;
            self.traj.grad_series.push((self.t, g));
            let hit = threshold.map(|m| g >= m).unwrap_or(false);
            if self.step % self.dense_every == 0 || hit {
                match self.make_snapshot() {
                    Ok(s) => self.traj.snapshots.push(s),
                    Err(e) => {
                        self.traj.stop = StopReason::Failed(e.to_string());
                        break;
                    }
                }
                since_prune += 1;
                if since_prune >= 4 * cfg.dense_factor {
                    self.prune();
                    since_prune = 0;
                }
            }
            if hit {
                self.traj.stop = StopReason::GradientThreshold;
                break;
            }
        }
        if self.traj.snapshots.last().map(|s| s.step) != Some(self.step) && !matches!(self.traj.stop, StopReason::Failed(_)) {
            if let Ok(s) = self.make_snapshot() {
                self.traj.snapshots.push(s);
            }
        }
        self.prune();
        self.traj.t_end = self.traj.snapshots.last().map(|s| s.t).unwrap_or(0.0);
        self.traj.steps = self.step;
        &self.traj
    }

    /// Lands exactly on `t_stop` by finishing with two equal sub-steps.
    pub fn advance_exact(&mut self, t_stop: f64) -> Result<()> {
        let dt = self.traj.dt;
        if t_stop - self.t > dt {
            self.advance(t_stop - dt, false);
            if let StopReason::Failed(e) = &self.traj.stop {
                return Err(Error::Grid(e.clone()));
            }
        }
        let rest = t_stop - self.t;
        if rest < 0.0 {
            return Err(Error::InvalidParams(format!("already past t = {t_stop}")));
        }
        if rest > 0.0 {
            let n = (rest / dt).ceil().max(1.0);
            for _ in 0..n as usize {
                self.step(rest / n)?;
            }
            self.t = t_stop;
            self.refresh_active()?;
        }
        Ok(())
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.traj
    }
}

/// Runs from `data` until `t_max` or the gradient threshold.
pub fn run(p: &PhysParams, cfg: &EvolveConfig, data: &DataField) -> Result<Trajectory> {
    let mut ev = Evolver::new(p, cfg, data)?;
    ev.advance(cfg.t_max, true);
    Ok(ev.into_trajectory())
}

/// Observed orders from runs at successively doubled resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub t: f64,
    pub dx: Vec<f64>,
    /// `max|Φ_h − Φ_{h/2}|` on the coarser grid's nodes.
    pub diffs: Vec<f64>,
    pub orders: Vec<f64>,
    /// Discrete L² norm of the same differences, `(Σ|ΔΦ|² Δx)^{1/2}`.
    pub diffs_l2: Vec<f64>,
    pub orders_l2: Vec<f64>,
}

/// Evolves each `(cfg, data)` pair to exactly `t` and compares consecutive
/// members on the coarser member's nodes. Grids must nest: each spacing half
/// the previous, sharing a node.
pub fn self_convergence(p: &PhysParams, runs: &[(EvolveConfig, DataField)], t: f64) -> Result<ConvergenceStudy> {
    let mut v = self_convergence_series(p, runs, &[t])?;
    Ok(v.remove(0))
}

/// Same comparison at several increasing times, one evolution per grid.
pub fn self_convergence_series(
    p: &PhysParams,
    runs: &[(EvolveConfig, DataField)],
    times: &[f64],
) -> Result<Vec<ConvergenceStudy>> {
    if runs.len() < 3 {
        return Err(Error::InvalidParams("need at least three resolutions".into()));
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= 0.0 {
        return Err(Error::InvalidParams("checkpoint times must be positive and increasing".into()));
    }
    for pair in runs.windows(2) {
        let (gc, gf) = (&pair[0].1.grid, &pair[1].1.grid);
        let ratio = gc.dx() / gf.dx();
        if (ratio - 2.0).abs() > 1e-9 {
            return Err(Error::Grid(format!("spacing ratio {ratio}, need 2")));
        }
        let off = (gc.x_min - gf.x_min) / gf.dx();
        if (off - off.round()).abs() > 1e-6 {
            return Err(Error::Grid("grids do not share nodes".into()));
        }
    }
    // states[run][checkpoint]
    let mut states: Vec<Vec<Vec<[f64; 4]>>> = Vec::new();
    for (cfg, data) in runs {
        let mut ev = Evolver::new(p, cfg, data)?;
        let mut at = Vec::with_capacity(times.len());
        for &t in times {
            ev.advance_exact(t)?;
            at.push(ev.y.clone());
        }
        states.push(at);
    }
    let order = |v: &[f64]| v.windows(2).map(|w| (w[0] / w[1]).log2()).collect::<Vec<_>>();
    let mut out = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let mut diffs = Vec::new();
        let mut diffs_l2 = Vec::new();
        for r in 0..runs.len() - 1 {
            let (gc, gf) = (&runs[r].1.grid, &runs[r + 1].1.grid);
            let (yc, yf) = (&states[r][k], &states[r + 1][k]);
            let off = ((gc.x_min - gf.x_min) / gf.dx()).round() as i64;
            let mut d: f64 = 0.0;
            let mut l2 = 0.0;
            for (i, a) in yc.iter().enumerate() {
                let j = off + 2 * i as i64;
                if j < 0 || j as usize >= yf.len() {
                    continue;
                }
                let b = yf[j as usize];
                for c in 0..4 {
                    d = d.max((a[c] - b[c]).abs());
                    l2 += (a[c] - b[c]).powi(2);
                }
            }
            diffs.push(d);
            diffs_l2.push((l2 * gc.dx()).sqrt());
        }
        out.push(ConvergenceStudy {
            t,
            dx: runs.iter().map(|r| r.1.grid.dx()).collect(),
            orders: order(&diffs),
            orders_l2: order(&diffs_l2),
            diffs,
            diffs_l2,
        });
    }
    Ok(out)
}

/// Grid holding `[η, 2η]` and its forward light cone up to `t_max` in the frame
/// moving at `frame_speed`, with spacing `dx`.
pub fn light_cone_grid(p: &PhysParams, eta: f64, t_max: f64, dx: f64, frame_speed: f64, margin: f64) -> Result<Grid1D> {
    let gap = min_gap_sigma(p)?;
    let fast = gap.bounds[0].1 - frame_speed;
    let slow = gap.bounds[3].0 - frame_speed;
    let lo = eta + slow.min(0.0) * t_max - margin;
    let hi = 2.0 * eta + fast.max(0.0) * t_max + margin;
    Grid1D::covering(lo, hi, dx, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{reconstruct_phi0, DataMode, DataParams};

    fn params() -> PhysParams {
        PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.05).unwrap()
    }

    fn constant_field(grid: Grid1D, v: [f64; 4]) -> DataField {
        DataField {
            grid,
            mode: DataMode::Regularized,
            w: Default::default(),
            phi: vec![v; grid.n],
            z0: 0.0,
            w0: 0.0,
            orientation: 1.0,
        }
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        for &s in &[0.0, 0.3, 0.5, 1.0] {
            let w = cubic_weights(s);
            let f = |x: f64| 1.0 + 2.0 * x - x * x + 0.5 * x * x * x;
            let v: f64 = (0..4).map(|q| w[q] * f(q as f64 - 1.0)).sum();
            assert!((v - f(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_state_is_preserved_exactly() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let v = [0.003, -0.002, 0.001, 0.004];
        let mut data = constant_field(g, v);
        data.w = [vec![0.0; g.n], vec![0.0; g.n], vec![0.0; g.n], vec![0.0; g.n]];
        let mut ev = Evolver::new(&params(), &EvolveConfig::default(), &data).unwrap();
        ev.active = vec![(4, g.n - 4)];
        for _ in 0..10 {
            let dt = ev.traj.dt;
            ev.step(dt).unwrap();
        }
        assert!(ev.state().iter().all(|s| *s == v));
    }

    #[test]
    fn cfl_violation_rejected() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let mut data = constant_field(g, [0.0; 4]);
        data.w = [vec![0.0; g.n], vec![0.0; g.n], vec![0.0; g.n], vec![0.0; g.n]];
        let mut ev = Evolver::new(&params(), &EvolveConfig::default(), &data).unwrap();
        let dt = 2.0 * ev.traj.dt;
        assert!(matches!(ev.step(dt), Err(Error::Cfl { .. })));
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let mut data = constant_field(g, [0.0; 4]);
        data.w = [vec![0.0; g.n], vec![0.0; g.n], vec![0.0; g.n], vec![0.0; g.n]];
        let cfg = EvolveConfig {
            t_max: 0.1,
            ..Default::default()
        };
        let tr = run(&params(), &cfg, &data).unwrap();
        assert_eq!(tr.stop, StopReason::TMax);
        for s in &tr.snapshots {
            assert!(s.dense_phi(g.n).iter().all(|v| *v == [0.0; 4]));
        }
    }

    #[test]
    fn decomposition_of_pure_family_one() {
        let p = params();
        let phi = [0.004, 0.002, -0.001, 0.0];
        let es = eigenvectors(&p, &State4(phi), Normalization::Regularized).unwrap();
        let (w, res) = decompose_point(&p, &phi, &es.rvec[0]).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-13);
        assert!(w[1].abs() < 1e-13 && w[2].abs() < 1e-13 && w[3].abs() < 1e-13);
        assert!(res < 1e-15);
    }

    #[test]
    fn snapshot_node_lookup_and_gaps() {
        let dp = DataParams::new(0.1, 0.25, 0.6, 0.05).unwrap();
        let p = params();
        let g = light_cone_grid(&p, dp.eta, 0.2, dp.eta / 50.0, 0.0, 0.05).unwrap();
        let data = reconstruct_phi0(&dp, &p, DataMode::Regularized, &g).unwrap();
        let ev = Evolver::new(&p, &EvolveConfig::default(), &data).unwrap();
        let s = &ev.traj.snapshots[0];
        let dense = s.dense_phi(g.n);
        for j in 0..g.n {
            let d = (0..4).map(|c| (dense[j][c] - data.phi[j][c]).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-14, "node {j}: {d}");
        }
        assert!(s.stored_cells() < g.n);
    }
}
