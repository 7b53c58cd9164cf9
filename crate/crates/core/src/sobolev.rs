//! Homogeneous fractional Sobolev norms of 2D fields by FFT quadrature.
//!
//! With `f̂(ξ) = ∫ f(x) e^{−2πi x·ξ} dx` the norm is `∫ |ξ|^{2s} |f̂(ξ)|² dξ`,
//! approximated by the Riemann sum over the frequency lattice of the padded box.

use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::{seed_w_with, BumpProfile, DataParams};

/// Samples of a real field on a uniform box `[x0, x0 + lx) × [y0, y0 + ly)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub lx: f64,
    pub ly: f64,
    /// Row-major, `data[j * nx + i] = f(x0 + i·dx, y0 + j·dy)`.
    pub data: Vec<f64>,
}

impl SpectralGrid {
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Samples `f` on a box padded `pad`× around the support rectangle
    /// `[xa, xb] × [ya, yb]`, with `n_support` points across each side of the support.
    pub fn sample<F>(f: F, support: [f64; 4], n_support: (usize, usize), pad: usize) -> Result<SpectralGrid>
    where
        F: Fn(f64, f64) -> f64,
    {
        let [xa, xb, ya, yb] = support;
        if !(xb > xa && yb > ya) {
            return Err(Error::Grid("empty support rectangle".into()));
        }
        if pad < 4 {
            return Err(Error::Grid(format!("zero-padding factor must be at least 4, got {pad}")));
        }
        let nx = n_support.0 * pad;
        let ny = n_support.1 * pad;
        if !nx.is_power_of_two() || !ny.is_power_of_two() {
            return Err(Error::Grid(format!("grid {nx}×{ny} is not a power of two")));
        }
        let lx = (xb - xa) * pad as f64;
        let ly = (yb - ya) * pad as f64;
        let x0 = 0.5 * (xa + xb) - 0.5 * lx;
        let y0 = 0.5 * (ya + yb) - 0.5 * ly;
        let (dx, dy) = (lx / nx as f64, ly / ny as f64);
        let mut data = vec![0.0; nx * ny];
        for j in 0..ny {
            let y = y0 + j as f64 * dy;
            if y < ya || y > yb {
                continue;
            }
            for i in 0..nx {
                let x = x0 + i as f64 * dx;
                if x >= xa && x <= xb {
                    data[j * nx + i] = f(x, y);
                }
            }
        }
        Ok(SpectralGrid {
            nx,
            ny,
            x0,
            y0,
            lx,
            ly,
            data,
        })
    }

    pub fn scaled(&self, a: f64) -> SpectralGrid {
        let mut g = self.clone();
        g.data.iter_mut().for_each(|v| *v *= a);
        g
    }
}

/// `|f̂|²` on the unshifted frequency lattice.
fn power_spectrum(g: &SpectralGrid) -> Vec<f64> {
    let (nx, ny) = (g.nx, g.ny);
    let mut buf: Vec<Complex<f64>> = g.data.iter().map(|v| Complex::new(*v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fx = planner.plan_fft_forward(nx);
    for row in buf.chunks_exact_mut(nx) {
        fx.process(row);
    }
    let fy = planner.plan_fft_forward(ny);
    let mut col = vec![Complex::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = buf[j * nx + i];
        }
        fy.process(&mut col);
        for j in 0..ny {
            buf[j * nx + i] = col[j];
        }
    }
    let cell = g.dx() * g.dy();
    buf.iter().map(|c| c.norm_sqr() * cell * cell).collect()
}

#[inline]
fn freq(k: usize, n: usize, l: f64) -> f64 {
    let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    kk / l
}

/// Thresholds `|ξ₁| = 1/η`, `|ξ₂| = |ln η|^δ/√η` separating the four regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSplit {
    pub xi1: f64,
    pub xi2: f64,
}

impl RegionSplit {
    pub fn for_data(dp: &DataParams) -> RegionSplit {
        RegionSplit {
            xi1: 1.0 / dp.eta,
            xi2: dp.eta.ln().abs().powf(dp.delta) / dp.eta.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub s: f64,
    pub norm_sq: f64,
    /// D1 (low, low), D2 (high ξ₁), D3 (high ξ₂), D4 (high, high).
    pub regions: [f64; 4],
    /// `n_support` along x per refinement level with its norm².
    pub levels: Vec<(usize, f64)>,
    pub richardson: Option<f64>,
    /// Relative gap between the finest level and the extrapolated value.
    pub rel_change: f64,
    pub converged: bool,
}

/// `∫|ξ|^{2s}|f̂|² dξ` with the D1–D4 split; the zero mode carries weight 0 unless `s = 0`.
pub fn hdot_norm_sq(g: &SpectralGrid, s: f64, split: RegionSplit) -> Result<(f64, [f64; 4])> {
    if !(s >= 0.0 && s < 2.0) {
        return Err(Error::InvalidParams(format!("regularity index s = {s} outside [0, 2)")));
    }
    if !g.nx.is_power_of_two() || !g.ny.is_power_of_two() {
        return Err(Error::Grid(format!("grid {}×{} is not a power of two", g.nx, g.ny)));
    }
    let p = power_spectrum(g);
    let dxi = 1.0 / (g.lx * g.ly);
    let mut regions = [0.0; 4];
    for j in 0..g.ny {
        let x2 = freq(j, g.ny, g.ly);
        let high2 = x2.abs() > split.xi2;
        let mut row = [0.0; 2];
        for i in 0..g.nx {
            let x1 = freq(i, g.nx, g.lx);
            let r2 = x1 * x1 + x2 * x2;
            let w = if s == 0.0 { 1.0 } else { r2.powf(s) };
            row[(x1.abs() > split.xi1) as usize] += w * p[j * g.nx + i];
        }
        let base = if high2 { 2 } else { 0 };
        regions[base] += row[0] * dxi;
        regions[base + 1] += row[1] * dxi;
    }
    Ok((regions.iter().sum(), regions))
}

/// `Σ f² dx dy`
pub fn discrete_l2_sq(g: &SpectralGrid) -> f64 {
    g.data.iter().map(|v| v * v).sum::<f64>() * g.dx() * g.dy()
}

/// Three-level Richardson extrapolation with the observed order; `None` when
/// the differences do not contract.
pub fn richardson(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = (b - a, c - b);
    if d2 == 0.0 {
        return Some(c);
    }
    let ratio = d1 / d2;
    if !(ratio > 1.0) {
        return None;
    }
    Some(c + d2 / (ratio - 1.0))
}

/// Support rectangle `[η, 2η] × [−Y, Y]` of the family-1 seed.
pub fn seed_support(dp: &DataParams, prof: &BumpProfile) -> [f64; 4] {
    let (xa, xb) = (dp.eta * prof.inner[0], dp.eta * prof.outer[1]);
    let mut ymax: f64 = 0.0;
    for k in 0..=256 {
        let x = xa + (xb - xa) * k as f64 / 256.0;
        ymax = ymax.max(prof.psi[1] * x.sqrt() / x.ln().abs().powf(dp.delta));
    }
    let ymax = ymax * 1.01;
    [xa, xb, -ymax, ymax]
}

/// Norm of `ŵ₁` over refinement levels `n_base·2^ℓ`, `ℓ < levels`.
pub fn seed_norm(dp: &DataParams, s: f64, n_base: usize, levels: usize, pad: usize) -> Result<SobolevReport> {
    dp.validate()?;
    let prof = BumpProfile::default();
    let support = seed_support(dp, &prof);
    let split = RegionSplit::for_data(dp);
    let f = |x: f64, y: f64| seed_w_with(dp, &prof, x, y, 0);
    refine(|n| SpectralGrid::sample(f, support, (n, n), pad), s, split, n_base, levels)
}

/// Runs `hdot_norm_sq` on successively doubled grids.
pub fn refine<G>(make: G, s: f64, split: RegionSplit, n_base: usize, levels: usize) -> Result<SobolevReport>
where
    G: Fn(usize) -> Result<SpectralGrid>,
{
    if levels == 0 {
        return Err(Error::InvalidParams("need at least one refinement level".into()));
    }
    let mut lv = Vec::with_capacity(levels);
    let mut regions = [0.0; 4];
    let mut last = 0.0;
    for l in 0..levels {
        let n = n_base << l;
        let g = make(n)?;
        let (v, r) = hdot_norm_sq(&g, s, split)?;
        lv.push((n, v));
        regions = r;
        last = v;
    }
    let values: Vec<f64> = lv.iter().map(|x| x.1).collect();
    let rich = richardson(&values);
    let reference = rich.unwrap_or(last);
    let rel_change = if values.len() >= 2 {
        let prev = values[values.len() - 2];
        let gap = rich.map(|r| (r - last).abs()).unwrap_or((last - prev).abs());
        if reference != 0.0 {
            gap / reference.abs()
        } else {
            0.0
        }
    } else {
        f64::INFINITY
    };
    let converged = rel_change < 1e-2;
    if !converged {
        log::warn!("Sobolev norm at s = {s}: Richardson estimate gives fewer than 2 significant digits");
    }
    Ok(SobolevReport {
        s,
        norm_sq: last,
        regions,
        levels: lv,
        richardson: rich,
        rel_change,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub all_converged: bool,
}

/// Least-squares slope of `ln(norm²)` against `ln|ln η|`.
pub fn scaling_fit(rows: &[(f64, SobolevReport)]) -> Result<ScalingFit> {
    if rows.len() < 5 {
        return Err(Error::InvalidParams("scaling fit needs at least five η values".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|(eta, _)| eta.ln().abs().ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, r)| r.norm_sq.ln()).collect();
    let fit = crate::shock_analysis::linfit(&xs, &ys).ok_or_else(|| Error::InvalidParams("degenerate η sweep".into()))?;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - fit.intercept - fit.slope * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let all_converged = rows.iter().all(|(_, r)| r.converged);
    if !all_converged {
        log::warn!("scaling fit uses norms that are not converged to 2 digits");
    }
    Ok(ScalingFit {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: rms,
        all_converged,
    })
}

/// CSV `eta,s,norm_sq,d1,d2,d3,d4,refinement_level`, one row per level.
pub fn write_csv(path: &Path, rows: &[(f64, SobolevReport)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(csv_string(rows).as_bytes())?;
    Ok(())
}

pub fn csv_string(rows: &[(f64, SobolevReport)]) -> String {
    let mut s = String::from("# schema=elwave.sobolev.v1\neta,s,norm_sq,d1,d2,d3,d4,refinement_level\n");
    for (eta, r) in rows {
        let finest = r.levels.len() - 1;
        for (l, (_, v)) in r.levels.iter().enumerate() {
            let d = if l == finest { r.regions } else { [f64::NAN; 4] };
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                eta, r.s, v, d[0], d[1], d[2], d[3], l
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss(n: usize) -> SpectralGrid {
        let s = 0.1;
        SpectralGrid::sample(
            |x, y| (-(x * x + y * y) / (2.0 * s * s)).exp(),
            [-0.8, 0.8, -0.8, 0.8],
            (n, n),
            4,
        )
        .unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let g = SpectralGrid::sample(|_, _| 0.0, [0.0, 1.0, 0.0, 1.0], (16, 16), 4).unwrap();
        let (v, _) = hdot_norm_sq(&g, 0.75, RegionSplit { xi1: 1.0, xi2: 1.0 }).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn parseval_at_s_zero() {
        let g = gauss(64);
        let (v, _) = hdot_norm_sq(&g, 0.0, RegionSplit { xi1: 3.0, xi2: 2.0 }).unwrap();
        assert_relative_eq!(v, discrete_l2_sq(&g), max_relative = 1e-10);
    }

    #[test]
    fn regions_add_up() {
        let g = gauss(32);
        let (v, r) = hdot_norm_sq(&g, 0.75, RegionSplit { xi1: 2.0, xi2: 1.5 }).unwrap();
        assert!(r.iter().all(|x| *x > 0.0));
        assert_relative_eq!(r.iter().sum::<f64>(), v, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::sample(|_, _| 1.0, [0.0, 1.0, 0.0, 1.0], (24, 16), 4).is_err());
        assert!(SpectralGrid::sample(|_, _| 1.0, [0.0, 1.0, 0.0, 1.0], (16, 16), 2).is_err());
        let g = gauss(16);
        assert!(hdot_norm_sq(&g, 2.5, RegionSplit { xi1: 1.0, xi2: 1.0 }).is_err());
    }

    #[test]
    fn richardson_on_geometric_sequence() {
        let v = [1.0 + 0.5, 1.0 + 0.125, 1.0 + 0.03125];
        assert_relative_eq!(richardson(&v).unwrap(), 1.0, max_relative = 1e-14);
        assert!(richardson(&[1.0, 2.0, 4.0]).is_none());
    }
}
