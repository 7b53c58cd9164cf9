use approx::assert_relative_eq;
use nalgebra::Matrix4;
use proptest::prelude::*;

use elwave::model_eigen::{
    c111_closed_form, coupling_coeffs, eigenvalues, eigenvectors, lambda_gradient, matrix_a, rvec_gradient,
    Normalization, PhysParams, State4,
};

fn p_small() -> PhysParams {
    PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.01).unwrap()
}

fn nalgebra_speeds(p: &PhysParams, s: &State4) -> [f64; 4] {
    let a = matrix_a(p, s);
    let m = Matrix4::from_fn(|i, j| a[i][j]);
    let ev = m.complex_eigenvalues();
    let mut re: Vec<f64> = ev.iter().map(|z| {
        assert!(z.im.abs() < 1e-12, "complex speed {z}");
        z.re
    }).collect();
    re.sort_by(|x, y| y.partial_cmp(x).unwrap());
    [re[0], re[1], re[2], re[3]]
}

fn state_in_ball() -> impl Strategy<Value = State4> {
    // κ = 0.01; keep |Φ| < 2κ and φ₂ away from 0 so the literal pair is defined.
    (-0.009..0.009f64, 1e-4..0.009f64, -0.009..0.009f64, -0.009..0.009f64, any::<bool>())
        .prop_map(|(a, b, c, d, neg)| State4::new(a, if neg { -b } else { b }, c, d))
}

fn fd_speed_gradient(p: &PhysParams, s: &State4, h: f64) -> [[f64; 4]; 4] {
    let mut g = [[0.0; 4]; 4];
    for j in 0..4 {
        let mut up = s.0;
        let mut dn = s.0;
        up[j] += h;
        dn[j] -= h;
        let lu = eigenvalues(p, &State4(up)).unwrap();
        let ld = eigenvalues(p, &State4(dn)).unwrap();
        for k in 0..4 {
            g[k][j] = (lu[k] - ld[k]) / (2.0 * h);
        }
    }
    g
}

#[test]
fn speeds_match_a_general_eigen_solver() {
    let p = p_small();
    for st in [
        State4::ZERO,
        State4::new(0.005, 0.0, 0.0, 0.0),
        State4::new(-0.003, 0.007, 0.001, -0.002),
        State4::new(0.0, -0.01, 0.0, 0.0),
    ] {
        let ours = eigenvalues(&p, &st).unwrap();
        let theirs = nalgebra_speeds(&p, &st);
        for k in 0..4 {
            assert_relative_eq!(ours[k], theirs[k], epsilon = 1e-10);
        }
    }
}

#[test]
fn c111_at_rest_matches_directional_difference() {
    let p = p_small();
    let r1 = eigenvectors(&p, &State4::ZERO, Normalization::Regularized).unwrap().rvec[0];
    let h = 1e-5;
    let shift = |sign: f64| State4([sign * h * r1[0], sign * h * r1[1], sign * h * r1[2], sign * h * r1[3]]);
    let fd = (eigenvalues(&p, &shift(1.0)).unwrap()[0] - eigenvalues(&p, &shift(-1.0)).unwrap()[0]) / (2.0 * h);
    assert!((fd - (-0.75)).abs() < 1e-6, "fd contraction {fd}");
    assert!((c111_closed_form(&p, &State4::ZERO).unwrap() - fd).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn spectrum_is_ordered_and_symmetric(st in state_in_ball()) {
        let p = p_small();
        let l = eigenvalues(&p, &st).unwrap();
        prop_assert!(l[3] < l[2] && l[2] < l[1] && l[1] < l[0]);
        prop_assert!((l[0] + l[3]).abs() < 1e-14);
        prop_assert!((l[1] + l[2]).abs() < 1e-14);
        let theirs = nalgebra_speeds(&p, &st);
        for k in 0..4 {
            prop_assert!((l[k] - theirs[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn duality_and_spectral_residuals(st in state_in_ball(), literal in any::<bool>()) {
        let p = p_small();
        let norm = if literal { Normalization::PaperLiteral } else { Normalization::Regularized };
        let es = eigenvectors(&p, &st, norm).unwrap();
        let a = matrix_a(&p, &st);
        for i in 0..4 {
            let r = es.rvec[i];
            let scale = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for row in 0..4 {
                let ar: f64 = (0..4).map(|c| a[row][c] * r[c]).sum();
                prop_assert!((ar - es.lambda[i] * r[row]).abs() < 1e-10 * scale.max(1.0));
            }
            for j in 0..4 {
                let d: f64 = (0..4).map(|c| es.lvec[i][c] * es.rvec[j][c]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - want).abs() < 1e-10, "l{}·r{} = {}", i, j, d);
            }
        }
    }

    #[test]
    fn speed_gradient_matches_differences(st in state_in_ball()) {
        let p = p_small();
        let g = lambda_gradient(&p, &st).unwrap();
        let fd = fd_speed_gradient(&p, &st, 1e-6);
        for k in 0..4 {
            let scale = g[k].iter().map(|v| v.abs()).fold(0.0, f64::max);
            for j in 0..4 {
                prop_assert!((g[k][j] - fd[k][j]).abs() <= 1e-6 * scale, "∂λ{}/∂φ{}: {} vs {}", k, j, g[k][j], fd[k][j]);
            }
        }
    }

    #[test]
    fn eigenvector_gradient_matches_differences(st in state_in_ball()) {
        let p = p_small();
        let norm = Normalization::Regularized;
        let g = rvec_gradient(&p, &st, norm).unwrap();
        let h = 1e-7;
        for j in 0..4 {
            let mut up = st.0;
            let mut dn = st.0;
            up[j] += h;
            dn[j] -= h;
            let ru = eigenvectors(&p, &State4(up), norm).unwrap().rvec;
            let rd = eigenvectors(&p, &State4(dn), norm).unwrap().rvec;
            for k in 0..4 {
                let scale = g[k].iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
                for c in 0..4 {
                    let fd = (ru[k][c] - rd[k][c]) / (2.0 * h);
                    prop_assert!((g[k][c][j] - fd).abs() <= 1e-6 * scale);
                }
            }
        }
    }

    #[test]
    fn self_interaction_is_the_directional_derivative(st in state_in_ball()) {
        let p = p_small();
        let cc = coupling_coeffs(&p, &st, Normalization::PaperLiteral).unwrap();
        let es = eigenvectors(&p, &st, Normalization::PaperLiteral).unwrap();
        let fd = fd_speed_gradient(&p, &st, 1e-6);
        let want: f64 = (0..4).map(|j| fd[0][j] * es.rvec[0][j]).sum();
        prop_assert!((cc.c[0][0] - want).abs() < 1e-6 * want.abs().max(1.0));
        prop_assert!((c111_closed_form(&p, &st).unwrap() - want).abs() < 1e-6 * want.abs().max(1.0));
    }
}
