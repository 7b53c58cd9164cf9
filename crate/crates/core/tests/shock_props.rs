mod common;

use proptest::prelude::*;

use elwave::characteristics::{trace_fan, SeedLayout, TraceOptions};
use elwave::evolve1d::{light_cone_grid, run, EvolveConfig};
use elwave::initial_data::{reconstruct_phi0, DataField, DataMode};
use elwave::shock_analysis::{detect_shock, simple_wave_crossing, AnalysisParams, Bracket};

use common::{f_inv, f_quad, marched_crossing, preset_dp, preset_p};

#[test]
fn riemann_function_helpers_invert() {
    let p = preset_p();
    for u in [-0.01, -1e-4, 0.0, 3e-3, 0.02] {
        assert!((f_inv(&p, f_quad(&p, u)) - u).abs() < 1e-14);
    }
}

#[test]
fn lattice_crossing_agrees_with_time_marching() {
    let p = preset_p();
    let dp = preset_dp();
    let (t_march, z_march) = marched_crossing(&p, &dp, 256, 2);
    let lattice = simple_wave_crossing(&p, &dp, 2048).unwrap();
    assert!((t_march / lattice.t_cross - 1.0).abs() < 1e-3, "{t_march} vs {}", lattice.t_cross);
    assert!((z_march - lattice.z_cross).abs() < 0.05 * dp.eta);
    // Same order as the leading-order prediction 1/(|c¹₁₁(0)|W₀).
    let (w0, _) = elwave::initial_data::compute_w0_z0(&dp);
    let product = lattice.t_cross * p.c111_at_zero().abs() * w0;
    assert!((0.9..1.1).contains(&product), "{product}");
}

#[test]
fn crossing_moves_earlier_for_stronger_data() {
    let p = preset_p();
    let dp = preset_dp();
    let weak = simple_wave_crossing(&p, &dp.with_theta(0.05), 512).unwrap();
    let strong = simple_wave_crossing(&p, &dp, 512).unwrap();
    assert!(strong.t_cross < weak.t_cross);
}

#[test]
fn zero_data_has_no_shock() {
    let p = preset_p();
    let eta = 0.05;
    let grid = light_cone_grid(&p, eta, 1.0, eta / 20.0, 0.0, eta).unwrap();
    let n = grid.n;
    let data = DataField {
        grid,
        mode: DataMode::Regularized,
        w: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        phi: vec![[0.0; 4]; n],
        z0: 1.5 * eta,
        w0: 0.0,
        orientation: 1.0,
    };
    let cfg = EvolveConfig {
        t_max: 1.0,
        snapshot_dt: 0.05,
        ..Default::default()
    };
    let traj = run(&p, &cfg, &data).unwrap();
    let seeds = SeedLayout { inner: 32, margin: 2, refine: None }.seeds(eta);
    let fan = trace_fan(&traj, &p, 0, &seeds, &TraceOptions::default()).unwrap();
    assert!(detect_shock(&fan, &traj, eta, 1.0, &AnalysisParams::default()).is_err());
}

#[test]
fn short_run_does_not_report_a_shock() {
    let p = preset_p();
    let dp = preset_dp();
    let grid = light_cone_grid(&p, dp.eta, 2.0, dp.eta / 20.0, 0.0, dp.eta).unwrap();
    let data = reconstruct_phi0(&dp, &p, DataMode::PaperLiteral, &grid).unwrap();
    let cfg = EvolveConfig {
        t_max: 2.0,
        snapshot_dt: 0.05,
        ..Default::default()
    };
    let traj = run(&p, &cfg, &data).unwrap();
    let seeds = SeedLayout { inner: 64, margin: 2, refine: None }.seeds(dp.eta);
    let fan = trace_fan(&traj, &p, 0, &seeds, &TraceOptions::default()).unwrap();
    let ap = AnalysisParams::default();
    assert!(detect_shock(&fan, &traj, dp.eta, data.w0, &ap).is_err());
}

proptest! {
    #[test]
    fn bracket_contains_the_leading_order_time(eps in 1e-6..0.01f64, c in -3.0..-0.1f64, w0 in 0.01..1.0f64) {
        let b = Bracket::new(eps, c, w0);
        let t = 1.0 / (c.abs() * w0);
        prop_assert!(b.t_lo < t && t < b.t_hi);
        prop_assert!((b.t_hi - b.t_lo) / t < 8.0 * eps);
    }
}
