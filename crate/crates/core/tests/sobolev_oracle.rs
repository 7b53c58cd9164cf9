use std::f64::consts::PI;

use proptest::prelude::*;

use elwave::initial_data::DataParams;
use elwave::sobolev::{discrete_l2_sq, hdot_norm_sq, seed_norm, RegionSplit, SpectralGrid};

const SPLIT: RegionSplit = RegionSplit { xi1: 1.0, xi2: 1.0 };

fn gaussian_grid(sigma: f64, half: f64, n: usize) -> SpectralGrid {
    let f = |x: f64, y: f64| (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
    SpectralGrid::sample(f, [-half, half, -half, half], (n, n), 4).unwrap()
}

/// `∫ |ξ|^{2s} |ĝ|² dξ` for `g = exp(−|x|²/2σ²)`, by Simpson in the radial variable.
fn gaussian_radial(sigma: f64, s: f64) -> f64 {
    let rmax = 4.0 / sigma;
    let n = 20_000;
    let h = rmax / n as f64;
    let g = |r: f64| {
        let fhat = 2.0 * PI * sigma * sigma * (-2.0 * PI * PI * sigma * sigma * r * r).exp();
        2.0 * PI * r * r.powf(2.0 * s) * fhat * fhat
    };
    let mut acc = g(0.0) + g(rmax);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn gaussian_matches_radial_quadrature() {
    for (sigma, s) in [(0.5, 0.75), (0.5, 0.0), (1.0, 0.75), (0.3, 1.5)] {
        let g = gaussian_grid(sigma, 8.0 * sigma, 64);
        let (v, _) = hdot_norm_sq(&g, s, SPLIT).unwrap();
        let want = gaussian_radial(sigma, s);
        assert!((v / want - 1.0).abs() < 0.01, "σ={sigma} s={s}: {v} vs {want}");
    }
}

#[test]
fn zero_index_is_parseval() {
    let dp = DataParams::new(0.1, 0.25, 0.6, 0.05).unwrap();
    let g = gaussian_grid(0.7, 5.0, 32);
    let (v, regions) = hdot_norm_sq(&g, 0.0, RegionSplit::for_data(&dp)).unwrap();
    let l2 = discrete_l2_sq(&g);
    assert!((v / l2 - 1.0).abs() < 1e-12, "{v} vs {l2}");
    assert!((regions.iter().sum::<f64>() / v - 1.0).abs() < 1e-12);
}

#[test]
fn seed_norm_is_finite_and_positive_across_scales() {
    for k in [6, 10, 14] {
        let dp = DataParams::new(0.1, 0.25, 0.6, 2f64.powi(-k)).unwrap();
        let r = seed_norm(&dp, 0.75, 32, 2, 4).unwrap();
        assert!(r.norm_sq.is_finite() && r.norm_sq > 0.0, "η=2^-{k}: {r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn seed_norm_is_quadratic_in_theta(theta in 0.01..0.9f64) {
        let base = DataParams::new(0.1, 0.25, 0.6, 0.05).unwrap();
        let a = seed_norm(&base, 0.75, 32, 1, 4).unwrap().norm_sq;
        let b = seed_norm(&base.with_theta(theta), 0.75, 32, 1, 4).unwrap().norm_sq;
        let want = a * (theta / 0.1).powi(2);
        prop_assert!((b - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn dilation_scales_by_the_homogeneity_degree(a in 0.5..2.0f64, s in 0.0..1.5f64) {
        // ‖g(·/a)‖²_{Ḣ^s} = a^{2−2s} ‖g‖²_{Ḣ^s} in two dimensions.
        let g1 = gaussian_grid(0.5, 4.0, 64);
        let g2 = gaussian_grid(0.5 * a, 4.0 * a, 64);
        let (v1, _) = hdot_norm_sq(&g1, s, SPLIT).unwrap();
        let (v2, _) = hdot_norm_sq(&g2, s, SPLIT).unwrap();
        let want = v1 * a.powf(2.0 - 2.0 * s);
        prop_assert!((v2 / want - 1.0).abs() < 1e-9, "{} vs {}", v2, want);
    }
}
