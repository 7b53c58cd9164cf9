//! The low-regularity data family and reconstruction of `Φ(·, 0)`.
//!
//! Family 1 carries `θ|ln x|^α χ(x/η) ψ(|ln x|^δ x₂/√x)`, families 2–4 carry
//! `θ² χ(x/η) ψ(·)`. On the line `x₂ = 0` the ψ factor is 1 and `Φ` is recovered
//! by integrating `∂ₓΦ = Σ w_k r_k(Φ)` from `Φ(η) = 0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model_eigen::{eigenvectors, Normalization, PhysParams, State4};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataParams {
    pub theta: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
}

impl DataParams {
    pub fn new(theta: f64, alpha: f64, delta: f64, eta: f64) -> Result<Self> {
        let dp = DataParams {
            theta,
            alpha,
            delta,
            eta,
        };
        dp.validate()?;
        Ok(dp)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v.join("; ")))
        }
    }

    /// Every violated invariant, keyed by field name.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.theta > 0.0 && self.theta < 1.0) {
            out.push(format!("theta: need 0 < θ < 1, got {}", self.theta));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            out.push(format!("alpha: need 0 < α < 1/2, got {}", self.alpha));
        }
        if !(self.delta > 0.0) {
            out.push(format!("delta: need δ > 0, got {}", self.delta));
        }
        if !(2.0 * self.alpha - self.delta < 0.0) {
            out.push(format!(
                "delta: need 2α − δ < 0, got 2·{} − {} = {}",
                self.alpha,
                self.delta,
                2.0 * self.alpha - self.delta
            ));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            out.push(format!("eta: need 0 < η < 1/2, got {}", self.eta));
        }
        out
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        DataParams { theta, ..*self }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        DataParams { eta, ..*self }
    }
}

/// `f(t) = e^{−1/t}` for `t > 0`, else 0.
#[inline]
fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, strictly increasing in between.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = flat(t);
        a / (a + flat(1.0 - t))
    }
}

/// Breakpoints of the two cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    /// χ: 0 below `inner[0]`, rises to 1 at `inner[1]`, falls from `outer[0]` to 0 at `outer[1]`.
    pub inner: [f64; 2],
    pub outer: [f64; 2],
    /// ψ: 1 for `|y| ≤ psi[0]`, 0 for `|y| ≥ psi[1]`.
    pub psi: [f64; 2],
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile {
            inner: [1.0, 1.2],
            outer: [1.8, 2.0],
            psi: [0.25, 0.5],
        }
    }
}

impl BumpProfile {
    #[inline]
    pub fn chi(&self, x: f64) -> f64 {
        if x <= self.inner[0] || x >= self.outer[1] {
            0.0
        } else if x < self.inner[1] {
            smooth_step((x - self.inner[0]) / (self.inner[1] - self.inner[0]))
        } else if x <= self.outer[0] {
            1.0
        } else {
            smooth_step((self.outer[1] - x) / (self.outer[1] - self.outer[0]))
        }
    }

    #[inline]
    pub fn psi(&self, y: f64) -> f64 {
        let a = y.abs();
        smooth_step((self.psi[1] - a) / (self.psi[1] - self.psi[0]))
    }
}

/// Seed `ŵ_family(x, x₂)` (family index 0-based), without orientation sign.
pub fn seed_w(dp: &DataParams, x: f64, x2: f64, family: usize) -> f64 {
    seed_w_with(dp, &BumpProfile::default(), x, x2, family)
}

pub fn seed_w_with(dp: &DataParams, prof: &BumpProfile, x: f64, x2: f64, family: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let chi = prof.chi(x / dp.eta);
    if chi == 0.0 {
        return 0.0;
    }
    let lg = x.ln().abs();
    let psi = prof.psi(lg.powf(dp.delta) * x2 / x.sqrt());
    if psi == 0.0 {
        return 0.0;
    }
    let amp = if family == 0 {
        dp.theta * lg.powf(dp.alpha)
    } else {
        dp.theta * dp.theta
    };
    amp * chi * psi
}

/// `(W₀, z₀)`: maximum of the family-1 seed on `x₂ = 0` and its location.
pub fn compute_w0_z0(dp: &DataParams) -> (f64, f64) {
    let f = |x: f64| seed_w(dp, x, 0.0, 0);
    let n = 4000;
    let (lo, hi) = (dp.eta, 2.0 * dp.eta);
    let h = (hi - lo) / n as f64;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for k in 0..=n {
        let v = f(lo + k as f64 * h);
        if v > best.0 {
            best = (v, k);
        }
    }
    let k = best.1;
    let mut a = lo + k.saturating_sub(1) as f64 * h;
    let mut b = (lo + (k + 1) as f64 * h).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-14 * dp.eta.max(1e-300) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let z0 = 0.5 * (a + b);
    (f(z0), z0)
}

/// Which eigenvector pair feeds the families-2,3 seeds into `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataMode {
    /// `r₂, r₃ ∝ φ₂`; starting from `φ₂ = 0` the c₂-families stay silent.
    PaperLiteral,
    Regularized,
}

impl DataMode {
    pub fn normalization(self) -> Normalization {
        match self {
            DataMode::PaperLiteral => Normalization::PaperLiteral,
            DataMode::Regularized => Normalization::Regularized,
        }
    }
}

/// Additive compactly supported bump `amplitude · exp(1 − 1/(1 − y²))`, `y = (x − center)/width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothBump {
    pub family: usize,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl SmoothBump {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.width;
        if y.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - y * y)).exp()
        }
    }
}

/// Seeds, reconstructed state and data maximum on a 1D grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataField {
    pub grid: Grid1D,
    pub mode: DataMode,
    /// `w[k][j]`, oriented seeds.
    pub w: [Vec<f64>; 4],
    pub phi: Vec<[f64; 4]>,
    pub z0: f64,
    pub w0: f64,
    /// Sign applied to the family-1 seed (−1 when `c¹₁₁(0) > 0`).
    pub orientation: f64,
}

impl DataField {
    pub fn state(&self, j: usize) -> State4 {
        State4(self.phi[j])
    }

    /// `Φ` to the right of the data support.
    pub fn phi_right(&self) -> [f64; 4] {
        *self.phi.last().unwrap()
    }

    pub fn max_norm(&self) -> f64 {
        self.phi.iter().map(|p| State4(*p).norm()).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv_string())?;
        Ok(())
    }

    /// CSV `x,w1..w4,phi1..phi4`.
    pub fn csv_string(&self) -> String {
        let mut out = String::from("# schema=elwave.data.v1\nx,w1,w2,w3,w4,phi1,phi2,phi3,phi4\n");
        for j in 0..self.grid.n {
            let p = self.phi[j];
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.grid.x(j),
                self.w[0][j],
                self.w[1][j],
                self.w[2][j],
                self.w[3][j],
                p[0],
                p[1],
                p[2],
                p[3]
            ));
        }
        out
    }
}

/// Oriented seed values at `x` on the line `x₂ = 0`.
#[derive(Debug, Clone)]
pub struct SeedLine {
    pub dp: DataParams,
    pub profile: BumpProfile,
    pub orientation: f64,
    pub bumps: Vec<SmoothBump>,
}

impl SeedLine {
    pub fn new(dp: &DataParams, p: &PhysParams, bumps: &[SmoothBump]) -> Self {
        SeedLine {
            dp: *dp,
            profile: BumpProfile::default(),
            orientation: p.seed_orientation(),
            bumps: bumps.to_vec(),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let mut w = [0.0; 4];
        for (k, slot) in w.iter_mut().enumerate() {
            *slot = seed_w_with(&self.dp, &self.profile, x, 0.0, k);
        }
        w[0] *= self.orientation;
        for b in &self.bumps {
            w[b.family] += b.eval(x);
        }
        w
    }

    pub fn support(&self) -> (f64, f64) {
        (self.dp.eta * self.profile.inner[0], self.dp.eta * self.profile.outer[1])
    }
}

/// `Σ_k w_k r_k(Φ)` with the chosen pair. In literal mode the families-2,3 vectors
/// are `φ₂` times the regularized ones, which is their exact value.
fn dphi_dx(p: &PhysParams, mode: DataMode, w: &[f64; 4], phi: &[f64; 4]) -> Result<[f64; 4]> {
    let es = eigenvectors(p, &State4(*phi), Normalization::Regularized)?;
    let mut out = [0.0; 4];
    for k in 0..4 {
        let scale = if mode == DataMode::PaperLiteral && (k == 1 || k == 2) {
            phi[1]
        } else {
            1.0
        };
        for c in 0..4 {
            out[c] += w[k] * scale * es.rvec[k][c];
        }
    }
    Ok(out)
}

fn rk4_step(
    p: &PhysParams,
    mode: DataMode,
    seeds: &SeedLine,
    x: f64,
    h: f64,
    y: &[f64; 4],
) -> Result<[f64; 4]> {
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
    let k1 = dphi_dx(p, mode, &seeds.eval(x), y)?;
    let k2 = dphi_dx(p, mode, &seeds.eval(x + 0.5 * h), &add(y, &k1, 0.5 * h))?;
    let k3 = dphi_dx(p, mode, &seeds.eval(x + 0.5 * h), &add(y, &k2, 0.5 * h))?;
    let k4 = dphi_dx(p, mode, &seeds.eval(x + h), &add(y, &k3, h))?;
    let mut out = *y;
    for c in 0..4 {
        out[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    Ok(out)
}

/// Tolerance on the local error per unit length.
pub const RECONSTRUCT_TOL: f64 = 1e-10;

/// Integrates `Φ` from `a` to `b` with step-doubling RK4.
fn integrate_segment(
    p: &PhysParams,
    mode: DataMode,
    seeds: &SeedLine,
    a: f64,
    b: f64,
    y0: [f64; 4],
    h_hint: &mut f64,
) -> Result<[f64; 4]> {
    let mut x = a;
    let mut y = y0;
    let mut guard = 0usize;
    while x < b {
        let mut h = h_hint.min(b - x);
        loop {
            guard += 1;
            if guard > 10_000_000 {
                return Err(Error::Grid("reconstruction step control failed".into()));
            }
            let full = rk4_step(p, mode, seeds, x, h, &y)?;
            let half = rk4_step(p, mode, seeds, x, 0.5 * h, &y)?;
            let two = rk4_step(p, mode, seeds, x + 0.5 * h, 0.5 * h, &half)?;
            let err = (0..4).map(|c| (two[c] - full[c]).abs()).fold(0.0, f64::max) / 15.0;
            if err <= RECONSTRUCT_TOL * h || h < 1e-14 {
                x += h;
                for c in 0..4 {
                    y[c] = two[c] + (two[c] - full[c]) / 15.0;
                }
                let grow = if err > 0.0 { (RECONSTRUCT_TOL * h / err).powf(0.25).min(2.0) } else { 2.0 };
                *h_hint = (h * 0.9 * grow).max(1e-12);
                break;
            }
            h *= 0.5;
        }
    }
    Ok(y)
}

/// Reconstructs `Φ(·, 0)` on `grid` from the seeds.
pub fn reconstruct_phi0(dp: &DataParams, p: &PhysParams, mode: DataMode, grid: &Grid1D) -> Result<DataField> {
    reconstruct_phi0_with(dp, p, mode, grid, &[])
}

pub fn reconstruct_phi0_with(
    dp: &DataParams,
    p: &PhysParams,
    mode: DataMode,
    grid: &Grid1D,
    bumps: &[SmoothBump],
) -> Result<DataField> {
    dp.validate()?;
    p.validate()?;
    let seeds = SeedLine::new(dp, p, bumps);
    let (lo, hi) = seeds.support();
    for b in bumps {
        if b.family > 3 || !(b.width > 0.0) || b.center - b.width < lo || b.center + b.width > hi {
            return Err(Error::InvalidParams(format!(
                "perturbation bump must sit inside [{lo}, {hi}] with family < 4"
            )));
        }
    }
    if !grid.contains(lo, hi) {
        return Err(Error::Grid(format!(
            "grid [{}, {}] must cover the data support [{lo}, {hi}]",
            grid.x_min, grid.x_max
        )));
    }
    if seeds.orientation < 0.0 {
        log::warn!("c111(0) > 0: family-1 seed amplitude flipped to keep the shock-forming orientation");
    }
    let mut w: [Vec<f64>; 4] = Default::default();
    for k in 0..4 {
        w[k] = vec![0.0; grid.n];
    }
    let mut phi = vec![[0.0; 4]; grid.n];
    let mut y = [0.0; 4];
    let mut x_prev = lo;
    let mut h_hint = (hi - lo) / 64.0;
    for j in 0..grid.n {
        let x = grid.x(j);
        let ws = seeds.eval(x);
        for k in 0..4 {
            w[k][j] = ws[k];
        }
        if x > lo {
            let target = x.min(hi);
            if target > x_prev {
                y = integrate_segment(p, mode, &seeds, x_prev, target, y, &mut h_hint)?;
                x_prev = target;
                let nrm = State4(y).norm();
                if !(nrm < p.kappa) {
                    return Err(Error::BallExit {
                        norm: nrm,
                        radius: p.kappa,
                        location: format!("reconstruction at x = {target}"),
                    });
                }
            }
        }
        phi[j] = y;
    }
    let (w0, z0) = compute_w0_z0(dp);
    Ok(DataField {
        grid: *grid,
        mode,
        w,
        phi,
        z0,
        w0,
        orientation: seeds.orientation,
    })
}

/// State just to the right of the data support, integrated without a grid.
pub fn phi_right(dp: &DataParams, p: &PhysParams, mode: DataMode) -> Result<[f64; 4]> {
    let seeds = SeedLine::new(dp, p, &[]);
    let (lo, hi) = seeds.support();
    let mut h = (hi - lo) / 64.0;
    integrate_segment(p, mode, &seeds, lo, hi, [0.0; 4], &mut h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn preset_dp() -> DataParams {
        DataParams::new(0.1, 0.25, 0.6, 0.05).unwrap()
    }

    fn preset_p() -> PhysParams {
        PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.05).unwrap()
    }

    #[test]
    fn validation_lists_every_violation() {
        let dp = DataParams {
            theta: 0.1,
            alpha: 0.6,
            delta: 0.4,
            eta: 0.7,
        };
        let v = dp.violations();
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(DataParams::new(0.1, 0.25, 0.4, 0.05).is_err());
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert_relative_eq!(smooth_step(0.5), 0.5, epsilon = 1e-15);
        let mut prev = 0.0;
        for k in 1..1000 {
            let v = smooth_step(k as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn cutoffs_plateau_and_support() {
        let b = BumpProfile::default();
        assert_eq!(b.chi(1.2), 1.0);
        assert_eq!(b.chi(1.5), 1.0);
        assert_eq!(b.chi(1.8), 1.0);
        assert_eq!(b.chi(1.0), 0.0);
        assert_eq!(b.chi(2.0), 0.0);
        assert!(b.chi(1.1) > 0.0 && b.chi(1.1) < 1.0);
        assert_eq!(b.psi(0.25), 1.0);
        assert_eq!(b.psi(-0.5), 0.0);
        assert!(b.psi(0.4) > 0.0 && b.psi(0.4) < 1.0);
    }

    #[test]
    fn seed_values() {
        let dp = preset_dp();
        let x = 1.5 * dp.eta;
        let expect = 0.1 * (0.075f64).ln().abs().powf(0.25);
        assert_relative_eq!(seed_w(&dp, x, 0.0, 0), expect, max_relative = 1e-15);
        assert_relative_eq!(seed_w(&dp, x, 0.0, 0), 0.126_863, epsilon = 5e-7);
        assert_relative_eq!(seed_w(&dp, x, 0.0, 2), 0.01, max_relative = 1e-15);
        for k in 0..4 {
            assert_eq!(seed_w(&dp, 0.9 * dp.eta, 0.0, k), 0.0);
            assert_eq!(seed_w(&dp, 2.0 * dp.eta, 0.0, k), 0.0);
            assert_eq!(seed_w(&dp, -1.0, 0.0, k), 0.0);
        }
        let cut = x.sqrt() / (2.0 * x.ln().abs().powf(dp.delta));
        assert_eq!(seed_w(&dp, x, cut * 1.0001, 0), 0.0);
    }

    #[test]
    fn w0_location_and_scaling() {
        let dp = preset_dp();
        let (w0, z0) = compute_w0_z0(&dp);
        assert!(z0 > dp.eta && z0 <= 1.2 * dp.eta);
        assert!(w0 >= 0.1 * (1.2 * dp.eta).ln().abs().powf(0.25));
        let (w0h, z0h) = compute_w0_z0(&dp.with_theta(0.05));
        assert_eq!(z0h, z0);
        assert_relative_eq!(w0h, 0.5 * w0, max_relative = 1e-15);
        let (w0s, _) = compute_w0_z0(&dp.with_eta(0.025));
        assert!(w0s > w0);
    }

    #[test]
    fn zero_seeds_give_zero_state() {
        let mut dp = preset_dp();
        dp.theta = 0.0;
        let p = preset_p();
        let seeds = SeedLine::new(&dp, &p, &[]);
        let mut h = 1e-3;
        let y = integrate_segment(&p, DataMode::Regularized, &seeds, 0.05, 0.1, [0.0; 4], &mut h).unwrap();
        assert_eq!(y, [0.0; 4]);
    }

    #[test]
    fn literal_mode_keeps_transverse_components_zero() {
        let dp = preset_dp();
        let p = preset_p();
        let g = Grid1D::covering(0.0, 0.15, dp.eta / 100.0, dp.eta).unwrap();
        let f = reconstruct_phi0(&dp, &p, DataMode::PaperLiteral, &g).unwrap();
        assert!(f.phi.iter().all(|v| v[1] == 0.0 && v[3] == 0.0));
        assert!(f.phi_right()[0].abs() > 1e-3);
        let r = reconstruct_phi0(&dp, &p, DataMode::Regularized, &g).unwrap();
        assert!(r.phi_right()[1].abs() > 1e-5);
    }

    #[test]
    fn constant_outside_support() {
        let dp = preset_dp();
        let p = preset_p();
        let g = Grid1D::covering(-0.1, 0.3, dp.eta / 50.0, dp.eta).unwrap();
        let f = reconstruct_phi0(&dp, &p, DataMode::Regularized, &g).unwrap();
        for j in 0..g.n {
            let x = g.x(j);
            if x <= dp.eta {
                assert_eq!(f.phi[j], [0.0; 4]);
            }
            if x >= 2.0 * dp.eta {
                assert_eq!(f.phi[j], f.phi_right());
            }
        }
    }

    #[test]
    fn small_ball_rejects_large_theta() {
        let dp = DataParams::new(0.9, 0.25, 0.6, 0.05).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.01).unwrap();
        let g = Grid1D::covering(0.0, 0.15, dp.eta / 100.0, dp.eta).unwrap();
        assert!(matches!(
            reconstruct_phi0(&dp, &p, DataMode::Regularized, &g),
            Err(Error::BallExit { .. })
        ));
    }

    #[test]
    fn flipped_orientation() {
        let dp = preset_dp();
        let p = PhysParams::new(2.0, 1.0, 1.0, 1.0, 0.05).unwrap();
        assert!(p.c111_at_zero() > 0.0);
        let g = Grid1D::covering(0.0, 0.15, dp.eta / 100.0, dp.eta).unwrap();
        let f = reconstruct_phi0(&dp, &p, DataMode::Regularized, &g).unwrap();
        assert_eq!(f.orientation, -1.0);
        assert!(f.w[0].iter().all(|v| *v <= 0.0));
    }
}
