//! Sampled invariant checks of the closed-form eigenstructure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model_eigen::{
    c111_closed_form, c222_closed_form, coupling_coeffs, eigenvalues, eigenvectors, lambda_gradient, matrix_a,
    min_gap_sigma, rvec_gradient, Normalization, PhysParams, State4,
};

pub const EIGEN_SCHEMA: &str = "elwave.eigen.v1";
pub const TOL_DUALITY: f64 = 1e-10;
pub const TOL_SPECTRAL: f64 = 1e-10;
pub const TOL_GRADIENT: f64 = 1e-6;
pub const TOL_CLOSED_FORM: f64 = 1e-10;
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSuite {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub schema: String,
    pub kappa: f64,
    pub seed: u64,
    pub suites: Vec<EigenSuite>,
    pub c111_zero_closed_form: f64,
    pub c111_zero_fd: f64,
    pub c111_zero_rel_err: f64,
    pub c111_zero_pass: bool,
    pub sigma: f64,
    pub sigma_coarse: f64,
    pub pass: bool,
}

/// Uniform point of the open 4-ball of radius `r`.
pub fn sample_ball<R: Rng>(rng: &mut R, r: f64) -> [f64; 4] {
    loop {
        let u: [f64; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = u.iter().map(|x| x * x).sum();
        if n2 < 1.0 {
            return [u[0] * r, u[1] * r, u[2] * r, u[3] * r];
        }
    }
}

/// Fourth-order central difference of `f` along coordinate `j`.
fn fd4<F: Fn(&[f64; 4]) -> f64>(f: F, x: &[f64; 4], j: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut y = *x;
        y[j] += s;
        f(&y)
    };
    (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
}

fn rel_vec_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Runs the duality, spectral, gradient, symmetry and closed-form suites over
/// `n` uniform samples of `|Φ| < 2κ`, plus the `c¹₁₁(0)` contraction check.
pub fn eigen_check(base: &PhysParams, kappa: f64, n: usize, seed: u64) -> Result<EigenCheck> {
    let p = PhysParams { kappa, ..*base };
    p.validate()?;
    let gap = min_gap_sigma(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = 2.0 * kappa;
    let mut literal = Vec::with_capacity(n);
    while literal.len() < n {
        let x = sample_ball(&mut rng, r);
        if x[1].abs() > 1e-3 {
            literal.push(x);
        }
    }
    let mut regular: Vec<[f64; 4]> = (0..n).map(|_| sample_ball(&mut rng, r)).collect();
    for x in regular.iter_mut().step_by(16) {
        x[1] = 0.0;
    }

    let mut duality: f64 = 0.0;
    let mut spectral: f64 = 0.0;
    let mut gradient: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    let mut closed: f64 = 0.0;
    let check_pair = |x: &[f64; 4], norm: Normalization, dual: &mut f64, spec: &mut f64| -> Result<()> {
        let st = State4(*x);
        let es = eigenvectors(&p, &st, norm)?;
        let a = matrix_a(&p, &st);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..4).map(|c| es.lvec[i][c] * es.rvec[j][c]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                *dual = dual.max((d - target).abs());
            }
            let rv = &es.rvec[i];
            let rn = rv.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut res: f64 = 0.0;
            for row in 0..4 {
                let ar: f64 = (0..4).map(|c| a[row][c] * rv[c]).sum();
                res += (ar - es.lambda[i] * rv[row]).powi(2);
            }
            *spec = spec.max(res.sqrt() / rn);
        }
        Ok(())
    };
    for x in &literal {
        check_pair(x, Normalization::PaperLiteral, &mut duality, &mut spectral)?;
    }
    for x in &regular {
        check_pair(x, Normalization::Regularized, &mut duality, &mut spectral)?;
    }

    for x in &literal {
        let st = State4(*x);
        let lg = lambda_gradient(&p, &st)?;
        for k in 0..4 {
            let fd: Vec<f64> = (0..4)
                .map(|j| fd4(|y| eigenvalues(&p, &State4(*y)).map(|l| l[k]).unwrap_or(f64::NAN), x, j, FD_STEP))
                .collect();
            gradient = gradient.max(rel_vec_err(&lg[k], &fd));
        }
        for norm in [Normalization::Regularized, Normalization::PaperLiteral] {
            let rg = rvec_gradient(&p, &st, norm)?;
            for k in 0..4 {
                for comp in 0..4 {
                    let fd: Vec<f64> = (0..4)
                        .map(|j| {
                            fd4(
                                |y| eigenvectors(&p, &State4(*y), norm).map(|e| e.rvec[k][comp]).unwrap_or(f64::NAN),
                                x,
                                j,
                                FD_STEP,
                            )
                        })
                        .collect();
                    let scale = rg[k].iter().flat_map(|row| row.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
                    let diff = rg[k][comp].iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    gradient = gradient.max(if scale > 0.0 { diff / scale } else { diff });
                }
            }
        }
        let lam = eigenvalues(&p, &st)?;
        symmetry = symmetry.max((lam[0] + lam[3]).abs()).max((lam[1] + lam[2]).abs());
        let cc = coupling_coeffs(&p, &st, Normalization::PaperLiteral)?;
        let c1 = cc.c[0][0];
        symmetry = symmetry.max((c1 + cc.c[3][3]).abs() / c1.abs().max(1.0));
        symmetry = symmetry.max((cc.c[1][1] + cc.c[2][2]).abs() / cc.c[1][1].abs().max(1.0));
        let cf1 = c111_closed_form(&p, &st)?;
        let cf2 = c222_closed_form(&p, &st)?;
        closed = closed
            .max((cf1 - c1).abs() / c1.abs().max(1.0))
            .max((cf2 - cc.c[1][1]).abs() / cc.c[1][1].abs().max(1.0));
    }
    for x in &regular {
        let lam = eigenvalues(&p, &State4(*x))?;
        symmetry = symmetry.max((lam[0] + lam[3]).abs()).max((lam[1] + lam[2]).abs());
    }

    // c¹₁₁(0) as the directional difference of λ₁ along r₁.
    let es0 = eigenvectors(&p, &State4::ZERO, Normalization::Regularized)?;
    let r1 = es0.rvec[0];
    let h = 1e-4;
    let shifted = |s: f64| -> Result<f64> {
        let y = [s * r1[0], s * r1[1], s * r1[2], s * r1[3]];
        Ok(eigenvalues(&p, &State4(y))?[0])
    };
    let c111_fd = (shifted(-2.0 * h)? - 8.0 * shifted(-h)? + 8.0 * shifted(h)? - shifted(2.0 * h)?) / (12.0 * h);
    let c111_cf = c111_closed_form(&p, &State4::ZERO)?;
    let c111_rel = (c111_fd - c111_cf).abs() / c111_cf.abs();

    let suite = |name: &str, worst: f64, tol: f64, samples: usize| EigenSuite {
        name: name.into(),
        worst,
        tolerance: tol,
        samples,
        pass: worst < tol,
    };
    let suites = vec![
        suite("duality", duality, TOL_DUALITY, 2 * n),
        suite("spectral_residual", spectral, TOL_SPECTRAL, 2 * n),
        suite("gradient_fd", gradient, TOL_GRADIENT, n),
        suite("sign_symmetry", symmetry, TOL_CLOSED_FORM, 2 * n),
        suite("closed_form_vs_contraction", closed, TOL_CLOSED_FORM, n),
    ];
    let c111_pass = c111_rel < 1e-6 && c111_cf == p.c111_at_zero();
    let pass = suites.iter().all(|s| s.pass) && c111_pass;
    Ok(EigenCheck {
        schema: EIGEN_SCHEMA.into(),
        kappa,
        seed,
        suites,
        c111_zero_closed_form: c111_cf,
        c111_zero_fd: c111_fd,
        c111_zero_rel_err: c111_rel,
        c111_zero_pass: c111_pass,
        sigma: gap.sigma,
        sigma_coarse: gap.sigma_coarse,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sample_passes() {
        let p = PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.05).unwrap();
        let c = eigen_check(&p, 0.01, 200, 7).unwrap();
        for s in &c.suites {
            assert!(s.pass, "{s:?}");
        }
        assert!(c.c111_zero_pass, "{c:?}");
        assert!(c.sigma > 0.9 && c.sigma < 1.0);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = sample_ball(&mut rng, 0.02);
            assert!(State4(x).norm() < 0.02);
        }
    }
}
