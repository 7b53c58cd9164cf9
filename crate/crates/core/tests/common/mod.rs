#![allow(dead_code)]

use elwave::grid::Grid1D;
use elwave::initial_data::{reconstruct_phi0, DataMode, DataParams};
use elwave::model_eigen::{matrix_a, PhysParams, State4};

pub fn preset_p() -> PhysParams {
    PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.05).unwrap()
}

pub fn preset_dp() -> DataParams {
    DataParams::new(0.1, 0.25, 0.6, 0.05).unwrap()
}

/// Riemann function of the reduced pair, by Simpson quadrature of √(c₁² + 2σ₀s).
pub fn f_quad(p: &PhysParams, u: f64) -> f64 {
    let n = 32;
    let h = u / n as f64;
    let g = |s: f64| (p.c1 * p.c1 + 2.0 * p.sigma0 * s).sqrt();
    let mut acc = g(0.0) + g(u);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    acc * h / 3.0
}

/// Inverse of `f_quad` by Newton's method (`f_quad' = √(c₁² + 2σ₀u)`).
pub fn f_inv(p: &PhysParams, f: f64) -> f64 {
    let mut u = f / p.c1;
    for _ in 0..6 {
        u -= (f_quad(p, u) - f) / (p.c1 * p.c1 + 2.0 * p.sigma0 * u).sqrt();
    }
    u
}

/// Speed √a of a reduced state, read off the matrix itself (`a = −A[2][0]`).
pub fn reduced_speed(p: &PhysParams, r1: f64, r4: f64) -> f64 {
    let phi1 = f_inv(p, 0.5 * (r4 - r1));
    let a = -matrix_a(p, &State4([phi1, 0.0, 0.5 * (r1 + r4), 0.0]))[2][0];
    a.sqrt()
}

/// Piecewise-linear lookup of a value carried by ordered curves; constant outside.
fn carried(xs: &[f64], vals: &[f64], left: f64, right: f64, x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return if x == xs[0] { vals[0] } else { left };
    }
    if x >= xs[n - 1] {
        return if x == xs[n - 1] { vals[n - 1] } else { right };
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    vals[k] + s * (vals[k + 1] - vals[k])
}

/// First crossing of neighbouring family-1 characteristics for literal data in
/// the reduced `(φ₁, φ₃)` class: both characteristic families are marched in
/// time (Heun) through their interaction; afterwards family-1 lines are straight.
pub fn marched_crossing(p: &PhysParams, dp: &DataParams, n: usize, steps_per_cell: usize) -> (f64, f64) {
    let grid = Grid1D::new(dp.eta, 2.0 * dp.eta, n + 1).unwrap();
    let data = reconstruct_phi0(dp, p, DataMode::PaperLiteral, &grid).unwrap();
    let z = grid.nodes();
    let r1: Vec<f64> = data.phi.iter().map(|f| f[2] - f_quad(p, f[0])).collect();
    let r4: Vec<f64> = data.phi.iter().map(|f| f[2] + f_quad(p, f[0])).collect();
    let (r1_right, r4_right) = (r1[n], r4[n]);
    let mut x1 = z.clone();
    let mut x4 = z.clone();
    let speeds = |x1: &[f64], x4: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let s1 = (0..=n)
            .map(|j| reduced_speed(p, r1[j], carried(x4, &r4, 0.0, r4_right, x1[j])))
            .collect();
        let s4 = (0..=n)
            .map(|k| -reduced_speed(p, carried(x1, &r1, 0.0, r1_right, x4[k]), r4[k]))
            .collect();
        (s1, s4)
    };
    let dt = (grid.dx() / p.c1) / steps_per_cell as f64;
    let mut t = 0.0;
    while x1[0] <= x4[n] {
        let (a1, a4) = speeds(&x1, &x4);
        let p1: Vec<f64> = (0..=n).map(|j| x1[j] + dt * a1[j]).collect();
        let p4: Vec<f64> = (0..=n).map(|j| x4[j] + dt * a4[j]).collect();
        let (b1, b4) = speeds(&p1, &p4);
        for j in 0..=n {
            x1[j] += 0.5 * dt * (a1[j] + b1[j]);
            x4[j] += 0.5 * dt * (a4[j] + b4[j]);
        }
        t += dt;
    }
    let lam: Vec<f64> = (0..=n).map(|j| reduced_speed(p, r1[j], r4_right)).collect();
    let mut best = (f64::INFINITY, f64::NAN);
    for j in 0..n {
        if lam[j] > lam[j + 1] {
            let tc = t + (x1[j + 1] - x1[j]) / (lam[j] - lam[j + 1]);
            if tc < best.0 {
                best = (tc, 0.5 * (z[j] + z[j + 1]));
            }
        }
    }
    best
}
