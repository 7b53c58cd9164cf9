//! Lagrangian tracing of characteristic fans over an Eulerian trajectory.
//!
//! Along `C_i(z)` the tracer integrates the position `X`, the inverse density
//! `ρ = ∂X/∂z`, the weighted amplitude `v = ρ w_i` and the state `Φ` itself
//! (`∂_{s_i}Φ = Σ_{k≠i} (λ_i − λ_k) w_k r_k`). Only the other families' `w_m`
//! are read from the trajectory, so the family's own steepening never has to
//! be resolved on the grid.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve1d::Trajectory;
use crate::model_eigen::{eigen_and_coupling, Normalization, PhysParams, State4};

/// Seed positions: `inner` uniform cells across `[η, 2η]` plus `margin` extra
/// seeds per side at the same spacing, optionally refined around a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedLayout {
    pub inner: usize,
    pub margin: usize,
    /// `(center, half_width, factor)`: extra seeds so that spacing is divided by `factor`.
    pub refine: Option<(f64, f64, usize)>,
}

impl Default for SeedLayout {
    fn default() -> Self {
        SeedLayout {
            inner: 512,
            margin: 64,
            refine: None,
        }
    }
}

impl SeedLayout {
    pub fn seeds(&self, eta: f64) -> Vec<f64> {
        let h = eta / self.inner as f64;
        let m = self.margin as i64;
        let mut z: Vec<f64> = (-m..=self.inner as i64 + m).map(|j| eta + j as f64 * h).collect();
        if let Some((c, hw, f)) = self.refine {
            let mut extra = Vec::new();
            for pair in z.windows(2) {
                if pair[1] > c - hw && pair[0] < c + hw {
                    for q in 1..f {
                        extra.push(pair[0] + (pair[1] - pair[0]) * q as f64 / f as f64);
                    }
                }
            }
            z.extend(extra);
            z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// RK4 substeps between consecutive snapshots.
    pub substeps: usize,
    /// Read the other families' amplitudes along their own reference lines.
    pub shear: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            substeps: 4,
            shear: true,
        }
    }
}

/// Per-seed histories of one family, recorded at the trajectory's snapshot times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharFan {
    pub family: usize,
    pub seeds: Vec<f64>,
    pub times: Vec<f64>,
    /// `x[seed][record]`, likewise for the other histories.
    pub x: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub lam: Vec<Vec<f64>>,
    /// Largest substep displacement, in grid cells, relative to the family's rest speed.
    pub max_tracer_cfl: f64,
}

impl CharFan {
    pub fn n_seeds(&self) -> usize {
        self.seeds.len()
    }

    /// Index of the seed equal to `z` (to 1e-9 relative), if any.
    pub fn seed_index(&self, z: f64) -> Option<usize> {
        let tol = 1e-9 * z.abs().max(1e-12);
        let k = self.seeds.partition_point(|s| *s < z - tol);
        (k < self.seeds.len() && (self.seeds[k] - z).abs() <= tol).then_some(k)
    }

    /// `w_i = v/ρ`.
    pub fn w(&self, seed: usize, rec: usize) -> f64 {
        self.v[seed][rec] / self.rho[seed][rec]
    }

    /// Seeds whose label lies in `[lo, hi]`.
    pub fn seed_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * hi.abs().max(1e-12);
        let a = self.seeds.partition_point(|s| *s < lo - tol);
        let b = self.seeds.partition_point(|s| *s <= hi + tol);
        a..b
    }

    /// `min_z ρ(z, t_rec)` over the given seeds, with the argmin seed.
    pub fn min_rho(&self, rec: usize, range: std::ops::Range<usize>) -> (f64, usize) {
        let mut best = (f64::INFINITY, range.start);
        for s in range {
            if self.rho[s][rec] < best.0 {
                best = (self.rho[s][rec], s);
            }
        }
        best
    }

    /// `X(seed, t)` by cubic Hermite interpolation in `t` with `dX/dt = λ`.
    pub fn position(&self, seed: usize, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 {
            return self.x[seed][0];
        }
        let k = self.times.partition_point(|s| *s <= t).saturating_sub(1).min(n - 2);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (x0, x1) = (self.x[seed][k], self.x[seed][k + 1]);
        let (d0, d1) = (self.lam[seed][k] * h, self.lam[seed][k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * x0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * x1 + (s3 - s2) * d1
    }

    /// CSV `z,t,X,rho,v,w` with every `stride`-th record.
    pub fn csv_string(&self, stride: usize) -> String {
        use std::fmt::Write as _;
        let mut f = String::new();
        let _ = writeln!(f, "# schema=elwave.fan.v1 family={}", self.family + 1);
        f.push_str("z,t,X,rho,v,w\n");
        for s in 0..self.seeds.len() {
            for r in (0..self.times.len()).step_by(stride.max(1)) {
                let _ = writeln!(
                    f,
                    "{},{},{},{},{},{}",
                    self.seeds[s],
                    self.times[r],
                    self.x[s][r],
                    self.rho[s][r],
                    self.v[s][r],
                    self.w(s, r)
                );
            }
        }
        f
    }

    pub fn write_csv(&self, path: &Path, stride: usize) -> Result<()> {
        std::fs::write(path, self.csv_string(stride))?;
        Ok(())
    }
}

struct Tracer<'a> {
    traj: &'a Trajectory,
    p: PhysParams,
    family: usize,
    shear: [f64; 4],
}

impl Tracer<'_> {
    /// Right-hand side for `y = (X, ρ, v, φ₁..φ₄)`.
    fn rhs(&self, t: f64, y: &[f64; 7]) -> Result<[f64; 7]> {
        let i = self.family;
        let phi = [y[3], y[4], y[5], y[6]];
        let (es, cc) = eigen_and_coupling(&self.p, &State4(phi), Normalization::Regularized)?;
        let w = self.traj.sample_w_sheared(y[0], t, &self.shear, Some(i))?;
        let (rho, v) = (y[1], y[2]);
        let mut drho = cc.c[i][i] * v;
        let mut dv = 0.0;
        let mut dphi = [0.0; 4];
        for m in 0..4 {
            if m == i {
                continue;
            }
            drho += cc.c[i][m] * w[m] * rho;
            dv += cc.g1[i][m] * w[m] * v;
            for k in 0..4 {
                if k != i && k != m {
                    dv += cc.g2[i][k][m] * w[k] * w[m] * rho;
                }
            }
            let f = (es.lambda[i] - es.lambda[m]) * w[m];
            for c in 0..4 {
                dphi[c] += f * es.rvec[m][c];
            }
        }
        Ok([es.lambda[i], drho, dv, dphi[0], dphi[1], dphi[2], dphi[3]])
    }

    fn rk4(&self, t: f64, h: f64, y: &[f64; 7]) -> Result<[f64; 7]> {
        let add = |a: &[f64; 7], b: &[f64; 7], s: f64| {
            let mut o = *a;
            for q in 0..7 {
                o[q] += s * b[q];
            }
            o
        };
        let k1 = self.rhs(t, y)?;
        let k2 = self.rhs(t + 0.5 * h, &add(y, &k1, 0.5 * h))?;
        let k3 = self.rhs(t + 0.5 * h, &add(y, &k2, 0.5 * h))?;
        let k4 = self.rhs(t + h, &add(y, &k3, h))?;
        let mut o = *y;
        for q in 0..7 {
            o[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
        Ok(o)
    }
}

struct SeedHistory {
    x: Vec<f64>,
    rho: Vec<f64>,
    v: Vec<f64>,
    lam: Vec<f64>,
    cfl: f64,
}

fn trace_seed(tr: &Tracer, z: f64, opts: &TraceOptions) -> Result<SeedHistory> {
    let traj = tr.traj;
    let i = tr.family;
    let t0 = traj.snapshots[0].t;
    let (phi0, w0) = traj.sample_snapshot(0, traj.to_grid(z, t0)).map_err(|_| Error::CurveExit {
        family: i + 1,
        seed: z,
        t: t0,
    })?;
    let mut y = [z, 1.0, w0[i], phi0[0], phi0[1], phi0[2], phi0[3]];
    let nrec = traj.snapshots.len();
    let mut h = SeedHistory {
        x: Vec::with_capacity(nrec),
        rho: Vec::with_capacity(nrec),
        v: Vec::with_capacity(nrec),
        lam: Vec::with_capacity(nrec),
        cfl: 0.0,
    };
    let speed = |y: &[f64; 7]| tr.rhs_speed(y);
    h.x.push(y[0]);
    h.rho.push(y[1]);
    h.v.push(y[2]);
    h.lam.push(speed(&y)?);
    let dx = traj.grid.dx();
    let rest = traj.params.base_speeds()[i];
    for k in 0..nrec - 1 {
        let (ta, tb) = (traj.snapshots[k].t, traj.snapshots[k + 1].t);
        let sub = (tb - ta) / opts.substeps as f64;
        for q in 0..opts.substeps {
            let t = ta + q as f64 * sub;
            y = tr.rk4(t, sub, &y).map_err(|e| match e {
                Error::Grid(_) => Error::CurveExit {
                    family: i + 1,
                    seed: z,
                    t,
                },
                other => other,
            })?;
        }
        let lam = speed(&y)?;
        h.cfl = h.cfl.max((lam - rest).abs() * sub / dx);
        h.x.push(y[0]);
        h.rho.push(y[1]);
        h.v.push(y[2]);
        h.lam.push(lam);
    }
    Ok(h)
}

impl Tracer<'_> {
    fn rhs_speed(&self, y: &[f64; 7]) -> Result<f64> {
        crate::model_eigen::speed(&self.p, &[y[3], y[4], y[5], y[6]], self.family)
    }
}

/// Traces family `family` (0-based) from every seed over the whole trajectory.
pub fn trace_fan(traj: &Trajectory, p: &PhysParams, family: usize, seeds: &[f64], opts: &TraceOptions) -> Result<CharFan> {
    if family > 3 {
        return Err(Error::InvalidParams(format!("family index {family} out of range")));
    }
    if traj.snapshots.len() < 2 {
        return Err(Error::Grid("trajectory needs at least two snapshots".into()));
    }
    let shear = if opts.shear { p.base_speeds() } else { [0.0; 4] };
    let tr = Tracer {
        traj,
        p: *p,
        family,
        shear,
    };
    let hist: Vec<Result<SeedHistory>> = seeds.par_iter().map(|&z| trace_seed(&tr, z, opts)).collect();
    let mut fan = CharFan {
        family,
        seeds: seeds.to_vec(),
        times: traj.snapshots.iter().map(|s| s.t).collect(),
        x: Vec::with_capacity(seeds.len()),
        rho: Vec::with_capacity(seeds.len()),
        v: Vec::with_capacity(seeds.len()),
        lam: Vec::with_capacity(seeds.len()),
        max_tracer_cfl: 0.0,
    };
    for h in hist {
        let h = h?;
        fan.max_tracer_cfl = fan.max_tracer_cfl.max(h.cfl);
        fan.x.push(h.x);
        fan.rho.push(h.rho);
        fan.v.push(h.v);
        fan.lam.push(h.lam);
    }
    if fan.max_tracer_cfl > 1.0 {
        log::warn!(
            "family {} tracer moves {:.2} cells per substep relative to its rest frame",
            family + 1,
            fan.max_tracer_cfl
        );
    }
    Ok(fan)
}

/// Spacetime point `(x, t)` where `C_i(y_i)` meets `C_j(y_j)`, by bisection in `t`.
pub fn bichar_intersection(fan_i: &CharFan, fan_j: &CharFan, y_i: f64, y_j: f64) -> Result<(f64, f64)> {
    if fan_i.family == fan_j.family {
        return Err(Error::InvalidParams("bi-characteristic needs two distinct families".into()));
    }
    let si = fan_i
        .seed_index(y_i)
        .ok_or_else(|| Error::InvalidParams(format!("{y_i} is not a seed of family {}", fan_i.family + 1)))?;
    let sj = fan_j
        .seed_index(y_j)
        .ok_or_else(|| Error::InvalidParams(format!("{y_j} is not a seed of family {}", fan_j.family + 1)))?;
    let f = |t: f64| fan_i.position(si, t) - fan_j.position(sj, t);
    let times = &fan_i.times;
    let f0 = f(times[0]);
    if f0 == 0.0 {
        return Ok((fan_i.position(si, times[0]), times[0]));
    }
    let mut lo = times[0];
    let mut hi = None;
    for &t in &times[1..] {
        let v = f(t);
        if v == 0.0 {
            return Ok((fan_i.position(si, t), t));
        }
        if v.signum() != f0.signum() {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or(Error::NoIntersection)?;
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid.abs().max(1e-3) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((fan_i.position(si, t), t))
}

/// Time series of the bootstrap norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    /// `max_i sup_z ρ_i`
    pub s: Vec<f64>,
    /// `max_i sup_z |v_i|`
    pub j: Vec<f64>,
    /// `max_i sup_{x ∉ R_i} |w_i|`
    pub v: Vec<f64>,
    /// `sup_x |Φ|`
    pub u_bar: Vec<f64>,
}

/// Computes S, J, V, Ū at every record. `fans[i]` must be family `i` and carry
/// seeds at `η` and `2η`; the sups over `z` run over `[η, 2η]`.
pub fn norm_series(traj: &Trajectory, fans: &[CharFan], eta: f64) -> Result<NormSeries> {
    if fans.len() != 4 || fans.iter().enumerate().any(|(i, f)| f.family != i) {
        return Err(Error::InvalidParams("norm_series needs the four fans in family order".into()));
    }
    let ends: Vec<(usize, usize)> = fans
        .iter()
        .map(|f| {
            let a = f.seed_index(eta).ok_or_else(|| Error::InvalidParams("fan lacks a seed at η".into()))?;
            let b = f.seed_index(2.0 * eta).ok_or_else(|| Error::InvalidParams("fan lacks a seed at 2η".into()))?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let nrec = fans[0].times.len();
    if nrec != traj.snapshots.len() {
        return Err(Error::InvalidParams("fans were traced on a different trajectory".into()));
    }
    let mut out = NormSeries {
        times: fans[0].times.clone(),
        s: vec![0.0; nrec],
        j: vec![0.0; nrec],
        v: vec![0.0; nrec],
        u_bar: vec![0.0; nrec],
    };
    for r in 0..nrec {
        let snap = &traj.snapshots[r];
        let mut s: f64 = 0.0;
        let mut jj: f64 = 0.0;
        let mut strips = [(0.0, 0.0); 4];
        for (i, f) in fans.iter().enumerate() {
            let (a, b) = ends[i];
            for q in a..=b {
                s = s.max(f.rho[q][r]);
                jj = jj.max(f.v[q][r].abs());
            }
            strips[i] = (f.x[a][r], f.x[b][r]);
        }
        let mut vmax: f64 = 0.0;
        for seg in &snap.segments {
            for (q, w) in seg.w.iter().enumerate() {
                let x = traj.lab_x(seg.start + q, snap.t);
                for i in 0..4 {
                    let (lo, hi) = strips[i];
                    if x < lo || x > hi {
                        vmax = vmax.max(w[i].abs());
                    }
                }
            }
        }
        out.s[r] = s;
        out.j[r] = jj;
        out.v[r] = vmax;
        out.u_bar[r] = snap.max_norm;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripGeometry {
    pub times: Vec<f64>,
    /// `X_i(η, t)` and `X_i(2η, t)` per family.
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
    /// First time every pair `i < j` satisfies `X_i(η) > X_j(2η)`.
    pub separation_time: Option<f64>,
    pub t0_analytic: f64,
}

/// Measures when the four strips become pairwise disjoint.
pub fn strip_separation(fans: &[CharFan], eta: f64, sigma: f64) -> Result<StripGeometry> {
    if fans.len() != 4 || fans.iter().enumerate().any(|(i, f)| f.family != i) {
        return Err(Error::InvalidParams("strip_separation needs the four fans in family order".into()));
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut idx = Vec::new();
    for f in fans {
        let a = f.seed_index(eta).ok_or_else(|| Error::InvalidParams("fan lacks a seed at η".into()))?;
        let b = f.seed_index(2.0 * eta).ok_or_else(|| Error::InvalidParams("fan lacks a seed at 2η".into()))?;
        left.push(f.x[a].clone());
        right.push(f.x[b].clone());
        idx.push((a, b));
    }
    let times = fans[0].times.clone();
    let gap_min = |t: f64| -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..4 {
            for j in (i + 1)..4 {
                g = g.min(fans[i].position(idx[i].0, t) - fans[j].position(idx[j].1, t));
            }
        }
        g
    };
    let mut sep = None;
    for r in 1..times.len() {
        if gap_min(times[r]) > 0.0 {
            let (mut lo, mut hi) = (times[r - 1], times[r]);
            if gap_min(lo) > 0.0 {
                sep = Some(lo);
                break;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if gap_min(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            sep = Some(hi);
            break;
        }
    }
    Ok(StripGeometry {
        times,
        left,
        right,
        separation_time: sep,
        t0_analytic: eta / sigma,
    })
}

/// `∂_z ρ` from neighbouring seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DzRho {
    pub times: Vec<f64>,
    /// `sup_z |∂_z ρ|` per record, over the seeds in `[η, 2η]`.
    pub sup_z: Vec<f64>,
    pub sup: f64,
    pub argmax: (f64, f64),
    /// `∂_z ρ` at the seed nearest the tracked point, per record.
    pub at_point: Vec<f64>,
    pub rho_at_point: Vec<f64>,
    /// Set when neighbour differences near the sup sit at round-off level.
    pub noise_warning: bool,
}

/// Centered differences of `ρ` across seeds for records with `t ≤ t_limit`,
/// tracking the seed nearest `z_track`.
pub fn dz_rho1(fan: &CharFan, eta: f64, t_limit: f64, z_track: f64) -> DzRho {
    let range = fan.seed_range(eta, 2.0 * eta);
    let lo = range.start.max(1);
    let hi = range.end.min(fan.n_seeds() - 1);
    let track = {
        let k = fan.seeds.partition_point(|s| *s < z_track).clamp(lo, hi - 1);
        if k > lo && (fan.seeds[k - 1] - z_track).abs() < (fan.seeds[k] - z_track).abs() {
            k - 1
        } else {
            k
        }
    };
    let mut out = DzRho {
        times: Vec::new(),
        sup_z: Vec::new(),
        sup: 0.0,
        argmax: (0.0, 0.0),
        at_point: Vec::new(),
        rho_at_point: Vec::new(),
        noise_warning: false,
    };
    for (r, &t) in fan.times.iter().enumerate() {
        if t > t_limit {
            break;
        }
        let mut best: f64 = 0.0;
        let mut arg = lo;
        for s in lo..hi {
            let d = (fan.rho[s + 1][r] - fan.rho[s - 1][r]) / (fan.seeds[s + 1] - fan.seeds[s - 1]);
            if d.abs() > best {
                best = d.abs();
                arg = s;
            }
        }
        let s = track;
        let d = (fan.rho[s + 1][r] - fan.rho[s - 1][r]) / (fan.seeds[s + 1] - fan.seeds[s - 1]);
        out.times.push(t);
        out.sup_z.push(best);
        out.at_point.push(d);
        out.rho_at_point.push(fan.rho[s][r]);
        if best > out.sup {
            out.sup = best;
            out.argmax = (fan.seeds[arg], t);
            let diff = (fan.rho[arg + 1][r] - fan.rho[arg - 1][r]).abs();
            out.noise_warning = diff < 1e-12 * fan.rho[arg][r].abs().max(1.0);
        }
    }
    out
}

/// Largest relative gap between the transported `ρ` and the centered difference
/// of neighbouring `X`-curves, over seeds in `[η, 2η]` and records with
/// `min ρ > rho_min`.
pub fn rho_fd_discrepancy(fan: &CharFan, eta: f64, rho_min: f64) -> f64 {
    let r = fan.seed_range(eta, 2.0 * eta);
    let lo = r.start.max(1);
    let hi = r.end.min(fan.n_seeds() - 1);
    let mut worst: f64 = 0.0;
    for k in 0..fan.times.len() {
        if fan.min_rho(k, r.clone()).0 <= rho_min {
            break;
        }
        for s in lo..hi {
            let fd = (fan.x[s + 1][k] - fan.x[s - 1][k]) / (fan.seeds[s + 1] - fan.seeds[s - 1]);
            worst = worst.max((fd - fan.rho[s][k]).abs() / fan.rho[s][k]);
        }
    }
    worst
}

/// `v` at the seed nearest `z` for records with `t ≤ t_limit`.
pub fn v_series_at(fan: &CharFan, z: f64, t_limit: f64) -> Vec<(f64, f64)> {
    let k = fan.seeds.partition_point(|s| *s < z).min(fan.n_seeds() - 1);
    let s = if k > 0 && (fan.seeds[k - 1] - z).abs() < (fan.seeds[k] - z).abs() {
        k - 1
    } else {
        k
    };
    fan.times
        .iter()
        .enumerate()
        .take_while(|(_, t)| **t <= t_limit)
        .map(|(r, t)| (*t, fan.v[s][r]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_layout_hits_endpoints() {
        let eta = 0.05;
        let z = SeedLayout::default().seeds(eta);
        assert_eq!(z.len(), 512 + 128 + 1);
        assert!(z.iter().any(|v| (v - eta).abs() < 1e-15));
        assert!(z.iter().any(|v| (v - 2.0 * eta).abs() < 1e-15));
        let r = SeedLayout {
            refine: Some((0.06, 0.005, 2)),
            ..Default::default()
        }
        .seeds(eta);
        assert!(r.len() > z.len());
        assert!(r.windows(2).all(|p| p[1] > p[0]));
    }

    fn straight_fan(family: usize, seeds: &[f64], speed: f64, times: &[f64]) -> CharFan {
        CharFan {
            family,
            seeds: seeds.to_vec(),
            times: times.to_vec(),
            x: seeds.iter().map(|z| times.iter().map(|t| z + speed * t).collect()).collect(),
            rho: seeds.iter().map(|_| vec![1.0; times.len()]).collect(),
            v: seeds.iter().map(|_| vec![0.0; times.len()]).collect(),
            lam: seeds.iter().map(|_| vec![speed; times.len()]).collect(),
            max_tracer_cfl: 0.0,
        }
    }

    #[test]
    fn straight_line_intersections() {
        let eta = 0.05;
        let seeds = SeedLayout::default().seeds(eta);
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.01).collect();
        let f1 = straight_fan(0, &seeds, 2.0, &times);
        let f4 = straight_fan(3, &seeds, -2.0, &times);
        let z = seeds[256 + 64];
        let (x, t) = bichar_intersection(&f1, &f4, z, z).unwrap();
        assert_eq!((x, t), (z, 0.0));
        let (x, t) = bichar_intersection(&f4, &f1, 2.0 * eta, eta).unwrap();
        assert!((t - eta / 4.0).abs() < 1e-12 * eta);
        assert!((x - (eta + 2.0 * eta / 4.0)).abs() < 1e-12);
        assert!(matches!(bichar_intersection(&f1, &f4, 2.0 * eta, eta), Err(Error::NoIntersection)));
    }

    #[test]
    fn straight_strips_separate_at_analytic_time() {
        let eta = 0.05;
        let seeds = SeedLayout::default().seeds(eta);
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.002).collect();
        let fans: Vec<CharFan> = [2.0, 1.0, -1.0, -2.0]
            .iter()
            .enumerate()
            .map(|(i, s)| straight_fan(i, &seeds, *s, &times))
            .collect();
        let g = strip_separation(&fans, eta, 1.0).unwrap();
        assert!((g.separation_time.unwrap() - eta).abs() < 1e-12);
        let d = dz_rho1(&fans[0], eta, 1.0, 0.06);
        assert_eq!(d.sup, 0.0);
    }
}
