//! Closed-form eigenstructure of the planar elastic system `Φ_t + A(Φ) Φ_x = 0`.
//!
//! The state is `Φ = (∂ₓu₁, ∂ₓu₂, ∂ₜu₁, ∂ₜu₂)`. With
//! `a = c₁² + 2σ₀φ₁`, `b = c₂² + 2σ₁φ₁`, `c = 2σ₁φ₂` and `Δ = (a−b)² + 4c²`
//! the speeds are `±√((a+b)/2 ± √Δ/2)`, ordered `λ₄ < λ₃ < λ₂ < λ₁`.
//!
//! Every right eigenvector has the shape `(P, Q, −λP, −λQ)` where `(P, Q)` is an
//! eigenvector of the symmetric block `[[a, c], [c, b]]` for the eigenvalue `λ²`,
//! and the dual left eigenvector is `(P, Q, −P/λ, −Q/λ) / (2(P² + Q²))`.
//!
//! Families are indexed `0..4` in code (family 1 is index 0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold on `|φ₂|` below which the literal family-2/3 pair is refused.
pub const EPS_DEG: f64 = 1e-8;

/// Storage-energy Taylor coefficients of an isotropic hyperelastic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialConstants {
    pub gamma11: f64,
    pub gamma2: f64,
    pub gamma111: f64,
    pub gamma12: f64,
}

/// Wave speeds, quadratic couplings and the radius of the admissible state ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub c1: f64,
    pub c2: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub kappa: f64,
    /// Only present when derived from material constants; unused by planar dynamics.
    #[serde(default)]
    pub sigma2: Option<f64>,
}

impl PhysParams {
    pub fn new(c1: f64, c2: f64, sigma0: f64, sigma1: f64, kappa: f64) -> Result<Self> {
        let p = PhysParams {
            c1,
            c2,
            sigma0,
            sigma1,
            kappa,
            sigma2: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks `c₁ > c₂ > 0`, `σ₀σ₁ ≠ 0` and `κ > 0`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.c1, self.c2, self.sigma0, self.sigma1, self.kappa];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite physical parameter".into()));
        }
        if !(self.c2 > 0.0 && self.c1 > self.c2) {
            return Err(Error::InvalidParams(format!(
                "wave speeds must satisfy c1 > c2 > 0 (c1 = {}, c2 = {})",
                self.c1, self.c2
            )));
        }
        if self.sigma0 * self.sigma1 == 0.0 {
            return Err(Error::InvalidParams(
                "sigma0 * sigma1 must be nonzero".into(),
            ));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParams("kappa must be positive".into()));
        }
        Ok(())
    }

    /// `c¹₁₁(0) = σ₀(c₁² − c₂²) / (2σ₁c₁)`.
    pub fn c111_at_zero(&self) -> f64 {
        self.sigma0 * (self.c1 * self.c1 - self.c2 * self.c2) / (2.0 * self.sigma1 * self.c1)
    }

    /// Sign applied to the family-1 seed amplitude so that the shock-forming
    /// orientation matches the `c¹₁₁(0) < 0` convention.
    pub fn seed_orientation(&self) -> f64 {
        if self.c111_at_zero() < 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Speeds of the linearized system at `Φ = 0`.
    pub fn base_speeds(&self) -> [f64; 4] {
        [self.c1, self.c2, -self.c2, -self.c1]
    }
}

/// Maps material constants to wave speeds and couplings.
pub fn material_to_phys(m: &MaterialConstants, kappa: f64) -> Result<PhysParams> {
    let lame_lambda = 4.0 * (m.gamma11 + m.gamma2);
    let lame_mu = -2.0 * m.gamma2;
    if !(lame_lambda > 0.0 && lame_mu > 0.0) {
        return Err(Error::InvalidParams(format!(
            "Lamé constants must be positive (4(γ11+γ2) = {lame_lambda}, −2γ2 = {lame_mu})"
        )));
    }
    let c1_sq = 4.0 * m.gamma11;
    let c2_sq = -2.0 * m.gamma2;
    if !(c1_sq > c2_sq) {
        return Err(Error::InvalidParams(format!(
            "need c1² = 4γ11 > c2² = −2γ2 (got {c1_sq} vs {c2_sq})"
        )));
    }
    let mut p = PhysParams {
        c1: c1_sq.sqrt(),
        c2: c2_sq.sqrt(),
        sigma0: 6.0 * m.gamma11 + 4.0 * m.gamma111,
        sigma1: 2.0 * (m.gamma11 - m.gamma12),
        kappa,
        sigma2: None,
    };
    p.validate()?;
    p.sigma2 = Some(2.0 * (m.gamma2 - 2.0 * m.gamma11 + 4.0 * m.gamma12));
    Ok(p)
}

/// `Φ = (φ₁, φ₂, φ₃, φ₄)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State4(pub [f64; 4]);

impl State4 {
    pub const ZERO: State4 = State4([0.0; 4]);

    pub fn new(phi1: f64, phi2: f64, phi3: f64, phi4: f64) -> Self {
        State4([phi1, phi2, phi3, phi4])
    }

    pub fn phi1(&self) -> f64 {
        self.0[0]
    }

    pub fn phi2(&self) -> f64 {
        self.0[1]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<[f64; 4]> for State4 {
    fn from(v: [f64; 4]) -> Self {
        State4(v)
    }
}

/// Which eigenvector pair to use for families 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// The vectors exactly as displayed; they vanish (r) or blow up (l) as φ₂ → 0.
    PaperLiteral,
    /// `r/φ₂` and `φ₂·l`, continuous through φ₂ = 0.
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub lambda: [f64; 4],
    pub rvec: [[f64; 4]; 4],
    pub lvec: [[f64; 4]; 4],
    /// `K = 2(p₁² + φ₂²)`, the family-1/4 normalization.
    pub k_norm: f64,
    /// `N = 2(p₂² + φ₂²)` of the literal family-2/3 pair (zero at φ₂ = 0).
    pub n_norm: f64,
    pub regularized: bool,
}

/// Wave-interaction coefficients, all indexed by 0-based family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCoeffs {
    /// `c[i][m] = ∇λᵢ · r_m`.
    pub c: [[f64; 4]; 4],
    /// `g1[i][m] = γⁱ_{im}` for `m ≠ i` (zero on the diagonal).
    pub g1: [[f64; 4]; 4],
    /// `g2[i][k][m] = γⁱ_{km}` for `k ≠ i`, `m ≠ i` (zero otherwise).
    pub g2: [[[f64; 4]; 4]; 4],
}

/// `A(Φ)` as a row-major 4×4 array.
pub fn matrix_a(p: &PhysParams, s: &State4) -> [[f64; 4]; 4] {
    let [phi1, phi2, _, _] = s.0;
    let a = p.c1 * p.c1 + 2.0 * p.sigma0 * phi1;
    let b = p.c2 * p.c2 + 2.0 * p.sigma1 * phi1;
    let c = 2.0 * p.sigma1 * phi2;
    [
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [-a, -c, 0.0, 0.0],
        [-c, -b, 0.0, 0.0],
    ]
}

/// `A(Φ)·v` without forming the matrix.
#[inline]
pub fn apply_a(p: &PhysParams, s: &[f64; 4], v: &[f64; 4]) -> [f64; 4] {
    let a = p.c1 * p.c1 + 2.0 * p.sigma0 * s[0];
    let b = p.c2 * p.c2 + 2.0 * p.sigma1 * s[0];
    let c = 2.0 * p.sigma1 * s[1];
    [-v[2], -v[3], -a * v[0] - c * v[1], -c * v[0] - b * v[1]]
}

/// Scalars of the symmetric 2×2 block, evaluated without cancellation.
#[derive(Debug, Clone, Copy)]
struct Block {
    phi2: f64,
    sigma1: f64,
    /// `a − b`
    d: f64,
    c: f64,
    /// `√Δ`
    s: f64,
    lam: [f64; 2],
    /// `p₁ = (λ₁² − b)/(2σ₁)`
    p1: f64,
    /// `p₂ = (λ₂² − b)/(2σ₁)`, computed as `−4σ₁φ₂²/(d + s)`
    p2: f64,
    /// `p₂/φ₂ = −4σ₁φ₂/(d + s)`
    p2_reg: f64,
    /// Partial derivatives with respect to (φ₁, φ₂).
    dlam: [[f64; 2]; 2],
    dp1: [f64; 2],
    dp2: [f64; 2],
    dp2_reg: [f64; 2],
}

impl Block {
    fn new(p: &PhysParams, st: &[f64; 4]) -> Result<Block> {
        let (phi1, phi2) = (st[0], st[1]);
        let a = p.c1 * p.c1 + 2.0 * p.sigma0 * phi1;
        let b = p.c2 * p.c2 + 2.0 * p.sigma1 * phi1;
        let c = 2.0 * p.sigma1 * phi2;
        let d = a - b;
        let s = (d * d + 4.0 * c * c).sqrt();
        if !(d > 0.0) || !s.is_finite() {
            return Err(Error::NotHyperbolic {
                state: *st,
                reason: format!("a − b = {d} must be positive"),
            });
        }
        let mu1 = 0.5 * (a + b + s);
        let mu2 = (a * b - c * c) / mu1;
        if !(mu2 > 0.0) {
            return Err(Error::NotHyperbolic {
                state: *st,
                reason: format!("(a+b)/2 − √Δ/2 = {mu2} must be positive"),
            });
        }
        let l1 = mu1.sqrt();
        let l2 = mu2.sqrt();
        let sig1 = p.sigma1;
        let dps = d + s;

        let da = [2.0 * p.sigma0, 0.0];
        let db = [2.0 * sig1, 0.0];
        let dc = [0.0, 2.0 * sig1];
        let dd = [da[0] - db[0], 0.0];
        let ds = [
            (d * dd[0] + 4.0 * c * dc[0]) / s,
            (d * dd[1] + 4.0 * c * dc[1]) / s,
        ];
        let mut dlam = [[0.0; 2]; 2];
        for j in 0..2 {
            let dmu1 = 0.5 * (da[j] + db[j] + ds[j]);
            let dmu2 = 0.5 * (da[j] + db[j] - ds[j]);
            dlam[0][j] = dmu1 / (2.0 * l1);
            dlam[1][j] = dmu2 / (2.0 * l2);
        }
        // s − d = 4c²/(s + d)
        let s_minus_d = 4.0 * c * c / dps;
        let mut dp1 = [0.0; 2];
        let mut dp2 = [0.0; 2];
        let mut dp2_reg = [0.0; 2];
        for j in 0..2 {
            dp1[j] = (dd[j] + ds[j]) / (4.0 * sig1);
            dp2[j] = (s_minus_d * dd[j] - 4.0 * c * dc[j]) / (4.0 * sig1 * s);
            let e2 = if j == 1 { 1.0 } else { 0.0 };
            dp2_reg[j] = -4.0 * sig1 * e2 / dps + 4.0 * sig1 * phi2 * (dd[j] + ds[j]) / (dps * dps);
        }
        Ok(Block {
            phi2,
            sigma1: sig1,
            d,
            c,
            s,
            lam: [l1, l2],
            p1: dps / (4.0 * sig1),
            p2: -4.0 * sig1 * phi2 * phi2 / dps,
            p2_reg: -4.0 * sig1 * phi2 / dps,
            dlam,
            dp1,
            dp2,
            dp2_reg,
        })
    }

    /// Signed speed of family `k`.
    #[inline]
    fn speed(&self, k: usize) -> f64 {
        match k {
            0 => self.lam[0],
            1 => self.lam[1],
            2 => -self.lam[1],
            _ => -self.lam[0],
        }
    }

    /// `∂λ_k/∂(φ₁, φ₂)`.
    #[inline]
    fn dspeed(&self, k: usize) -> [f64; 2] {
        match k {
            0 => self.dlam[0],
            1 => self.dlam[1],
            2 => [-self.dlam[1][0], -self.dlam[1][1]],
            _ => [-self.dlam[0][0], -self.dlam[0][1]],
        }
    }

    /// `(P, Q)` and their gradients for family `k`.
    #[inline]
    fn pq(&self, k: usize, reg: bool) -> ([f64; 2], [[f64; 2]; 2]) {
        if k == 0 || k == 3 {
            ([self.p1, self.phi2], [self.dp1, [0.0, 1.0]])
        } else if reg {
            ([self.p2_reg, 1.0], [self.dp2_reg, [0.0, 0.0]])
        } else {
            ([self.p2, self.phi2], [self.dp2, [0.0, 1.0]])
        }
    }

    fn right(&self, k: usize, reg: bool) -> [f64; 4] {
        let ([pp, qq], _) = self.pq(k, reg);
        let lk = self.speed(k);
        [pp, qq, -lk * pp, -lk * qq]
    }

    fn left(&self, k: usize, reg: bool) -> [f64; 4] {
        let ([pp, qq], _) = self.pq(k, reg);
        let lk = self.speed(k);
        let norm = 2.0 * (pp * pp + qq * qq);
        [pp / norm, qq / norm, -pp / (lk * norm), -qq / (lk * norm)]
    }

    /// `∂r_k/∂φ_j` for j = φ₁, φ₂ (the φ₃, φ₄ derivatives vanish).
    fn dright(&self, k: usize, reg: bool) -> [[f64; 4]; 2] {
        let ([pp, qq], [dpp, dqq]) = self.pq(k, reg);
        let lk = self.speed(k);
        let dl = self.dspeed(k);
        let mut out = [[0.0; 4]; 2];
        for j in 0..2 {
            out[j] = [
                dpp[j],
                dqq[j],
                -(dl[j] * pp + lk * dpp[j]),
                -(dl[j] * qq + lk * dqq[j]),
            ];
        }
        out
    }
}

fn check_literal(st: &[f64; 4], norm: Normalization) -> Result<bool> {
    match norm {
        Normalization::Regularized => Ok(true),
        Normalization::PaperLiteral => {
            if st[1].abs() < EPS_DEG {
                Err(Error::DegenerateNormalization {
                    phi2: st[1],
                    eps: EPS_DEG,
                })
            } else {
                Ok(false)
            }
        }
    }
}

/// `(λ₁, λ₂, λ₃, λ₄)` with `λ₃ = −λ₂`, `λ₄ = −λ₁`.
pub fn eigenvalues(p: &PhysParams, s: &State4) -> Result<[f64; 4]> {
    let b = Block::new(p, &s.0)?;
    Ok([b.lam[0], b.lam[1], -b.lam[1], -b.lam[0]])
}

/// Speed of one family (0-based).
#[inline]
pub fn speed(p: &PhysParams, s: &[f64; 4], family: usize) -> Result<f64> {
    Ok(Block::new(p, s)?.speed(family))
}

/// `∇_Φ λᵢ` for every family; columns 3 and 4 are identically zero.
pub fn lambda_gradient(p: &PhysParams, s: &State4) -> Result<[[f64; 4]; 4]> {
    let b = Block::new(p, &s.0)?;
    let mut g = [[0.0; 4]; 4];
    for (k, row) in g.iter_mut().enumerate() {
        let d = b.dspeed(k);
        row[0] = d[0];
        row[1] = d[1];
    }
    Ok(g)
}

/// Jacobian `∂r_k/∂φ_j` as `[k][component][j]`.
pub fn rvec_gradient(p: &PhysParams, s: &State4, norm: Normalization) -> Result<[[[f64; 4]; 4]; 4]> {
    let reg = check_literal(&s.0, norm)?;
    let b = Block::new(p, &s.0)?;
    let mut out = [[[0.0; 4]; 4]; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let dr = b.dright(k, reg);
        for comp in 0..4 {
            slot[comp][0] = dr[0][comp];
            slot[comp][1] = dr[1][comp];
        }
    }
    Ok(out)
}

pub fn eigenvectors(p: &PhysParams, s: &State4, norm: Normalization) -> Result<EigenSystem> {
    let reg = check_literal(&s.0, norm)?;
    let b = Block::new(p, &s.0)?;
    Ok(eigensystem_from_block(&b, reg))
}

fn eigensystem_from_block(b: &Block, reg: bool) -> EigenSystem {
    let mut rvec = [[0.0; 4]; 4];
    let mut lvec = [[0.0; 4]; 4];
    for k in 0..4 {
        rvec[k] = b.right(k, reg);
        lvec[k] = b.left(k, reg);
    }
    EigenSystem {
        lambda: [b.speed(0), b.speed(1), b.speed(2), b.speed(3)],
        rvec,
        lvec,
        k_norm: 2.0 * (b.p1 * b.p1 + b.phi2 * b.phi2),
        n_norm: 2.0 * (b.p2 * b.p2 + b.phi2 * b.phi2),
        regularized: reg,
    }
}

/// Eigensystem and interaction coefficients from a single evaluation of the block.
pub fn eigen_and_coupling(
    p: &PhysParams,
    s: &State4,
    norm: Normalization,
) -> Result<(EigenSystem, CouplingCoeffs)> {
    let reg = check_literal(&s.0, norm)?;
    let b = Block::new(p, &s.0)?;
    let es = eigensystem_from_block(&b, reg);

    let mut dr = [[[0.0; 4]; 2]; 4];
    for (k, slot) in dr.iter_mut().enumerate() {
        *slot = b.dright(k, reg);
    }
    // dir[k][m] = (∇r_k)·r_m
    let mut dir = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for m in 0..4 {
            let (x0, x1) = (es.rvec[m][0], es.rvec[m][1]);
            for comp in 0..4 {
                dir[k][m][comp] = dr[k][0][comp] * x0 + dr[k][1][comp] * x1;
            }
        }
    }
    let dot = |u: &[f64; 4], v: &[f64; 4]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3];

    let mut cc = CouplingCoeffs {
        c: [[0.0; 4]; 4],
        g1: [[0.0; 4]; 4],
        g2: [[[0.0; 4]; 4]; 4],
    };
    for i in 0..4 {
        let gl = b.dspeed(i);
        for m in 0..4 {
            cc.c[i][m] = gl[0] * es.rvec[m][0] + gl[1] * es.rvec[m][1];
        }
        let li = &es.lvec[i];
        for m in 0..4 {
            if m == i {
                continue;
            }
            let mut diff = [0.0; 4];
            for comp in 0..4 {
                diff[comp] = dir[i][m][comp] - dir[m][i][comp];
            }
            cc.g1[i][m] = -(es.lambda[i] - es.lambda[m]) * dot(li, &diff);
        }
        for k in 0..4 {
            if k == i {
                continue;
            }
            for m in 0..4 {
                if m == i || m == k {
                    continue;
                }
                cc.g2[i][k][m] = -(es.lambda[k] - es.lambda[m]) * dot(li, &dir[k][m]);
            }
        }
    }
    Ok((es, cc))
}

pub fn coupling_coeffs(p: &PhysParams, s: &State4, norm: Normalization) -> Result<CouplingCoeffs> {
    eigen_and_coupling(p, s, norm).map(|(_, c)| c)
}

/// Explicit `c¹₁₁(Φ) = [2σ₀(a−b)(λ₁²−b) + (2σ₀+6σ₁)c²] / (4σ₁λ₁√Δ)`.
pub fn c111_closed_form(p: &PhysParams, s: &State4) -> Result<f64> {
    let b = Block::new(p, &s.0)?;
    let mu1_minus_b = 0.5 * (b.d + b.s);
    Ok(
        (2.0 * p.sigma0 * b.d * mu1_minus_b + (2.0 * p.sigma0 + 6.0 * p.sigma1) * b.c * b.c)
            / (4.0 * b.sigma1 * b.lam[0] * b.s),
    )
}

/// Explicit `c²₂₂(Φ) = −[2σ₀(a−b)(λ₂²−b) + (2σ₀+6σ₁)c²] / (4σ₁λ₂√Δ)` for the literal `r₂`.
pub fn c222_closed_form(p: &PhysParams, s: &State4) -> Result<f64> {
    let b = Block::new(p, &s.0)?;
    let mu2_minus_b = -2.0 * b.c * b.c / (b.d + b.s);
    Ok(
        -(2.0 * p.sigma0 * b.d * mu2_minus_b + (2.0 * p.sigma0 + 6.0 * p.sigma1) * b.c * b.c)
            / (4.0 * b.sigma1 * b.lam[1] * b.s),
    )
}

/// Minimum strip-separation speed over the ball `|Φ| ≤ 2κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub sigma: f64,
    /// σ from the coarser of the two samples.
    pub sigma_coarse: f64,
    /// Number of sample points in the finer sample.
    pub resolution: usize,
    /// `(inf λᵢ, sup λᵢ)` per family from the finer sample.
    pub bounds: [(f64, f64); 4],
}

/// Radical-inverse (van der Corput) sequence in the given base.
fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut f = inv;
    while n > 0 {
        out += (n % base) as f64 * f;
        n /= base;
        f *= inv;
    }
    inv = out;
    inv
}

fn gap_from_sample(p: &PhysParams, n: usize) -> Result<(f64, [(f64, f64); 4])> {
    let r = 2.0 * p.kappa;
    let mut bounds = [(f64::INFINITY, f64::NEG_INFINITY); 4];
    let mut visit = |phi1: f64, phi2: f64| -> Result<()> {
        let lam = eigenvalues(p, &State4::new(phi1, phi2, 0.0, 0.0))?;
        for k in 0..4 {
            bounds[k].0 = bounds[k].0.min(lam[k]);
            bounds[k].1 = bounds[k].1.max(lam[k]);
        }
        Ok(())
    };
    // λ depends on (φ₁, φ₂) only, so the 4-ball projects onto the closed disk of radius 2κ.
    // Interior: Halton points mapped area-uniformly; boundary: the circle itself.
    let n_boundary = (n / 8).max(16);
    for i in 1..=n {
        let u = radical_inverse(i as u64, 2);
        let v = radical_inverse(i as u64, 3);
        let rad = r * u.sqrt();
        let ang = 2.0 * std::f64::consts::PI * v;
        visit(rad * ang.cos(), rad * ang.sin())?;
    }
    for j in 0..n_boundary {
        let ang = 2.0 * std::f64::consts::PI * j as f64 / n_boundary as f64;
        visit(r * ang.cos(), r * ang.sin())?;
    }
    visit(0.0, 0.0)?;
    let mut sigma = f64::INFINITY;
    for i in 0..4 {
        for j in (i + 1)..4 {
            sigma = sigma.min(bounds[i].0 - bounds[j].1);
        }
    }
    Ok((sigma, bounds))
}

/// σ = min over i<j of (inf λᵢ − sup λⱼ), from quasi-random samples at two
/// resolutions which must agree to 1e-3.
pub fn min_gap_sigma(p: &PhysParams) -> Result<GapEstimate> {
    let coarse_n = 4096;
    let fine_n = 4 * coarse_n;
    let (coarse, _) = gap_from_sample(p, coarse_n).map_err(|e| {
        Error::InvalidParams(format!("state ball 2κ = {} is not strictly hyperbolic: {e}", 2.0 * p.kappa))
    })?;
    let (fine, bounds) = gap_from_sample(p, fine_n)?;
    if !(fine > 0.0) {
        return Err(Error::InvalidParams(format!(
            "strict hyperbolicity fails on the ball: σ = {fine} ≤ 0 (κ = {} too large)",
            p.kappa
        )));
    }
    if (fine - coarse).abs() > 1e-3 {
        return Err(Error::InvalidParams(format!(
            "σ sampling not converged: {coarse} vs {fine}"
        )));
    }
    Ok(GapEstimate {
        sigma: fine,
        sigma_coarse: coarse,
        resolution: fine_n,
        bounds,
    })
}

/// Largest interaction coefficient magnitude seen on a quasi-random sample of the ball.
pub fn empirical_gamma_bound(p: &PhysParams, n: usize) -> Result<f64> {
    let r = 2.0 * p.kappa;
    let mut gmax: f64 = 0.0;
    for i in 1..=n {
        let u = [
            radical_inverse(i as u64, 2),
            radical_inverse(i as u64, 3),
            radical_inverse(i as u64, 5),
            radical_inverse(i as u64, 7),
        ];
        let st = ball_point(&u, r);
        let cc = coupling_coeffs(p, &State4(st), Normalization::Regularized)?;
        for i in 0..4 {
            for m in 0..4 {
                gmax = gmax.max(cc.c[i][m].abs()).max(cc.g1[i][m].abs());
                for k in 0..4 {
                    gmax = gmax.max(cc.g2[i][k][m].abs());
                }
            }
        }
    }
    Ok(gmax)
}

/// Maps a point of the unit 4-cube to the 4-ball of radius `r` (strictly inside).
pub fn ball_point(u: &[f64; 4], r: f64) -> [f64; 4] {
    // Box–Muller on two pairs gives a direction; radius ~ U^{1/4}.
    let tau = 2.0 * std::f64::consts::PI;
    let u0 = u[0].max(1e-300);
    let u2 = u[2].max(1e-300);
    let g0 = (-2.0 * u0.ln()).sqrt() * (tau * u[1]).cos();
    let g1 = (-2.0 * u0.ln()).sqrt() * (tau * u[1]).sin();
    let g2 = (-2.0 * u2.ln()).sqrt() * (tau * u[3]).cos();
    let g3 = (-2.0 * u2.ln()).sqrt() * (tau * u[3]).sin();
    let nrm = (g0 * g0 + g1 * g1 + g2 * g2 + g3 * g3).sqrt().max(1e-300);
    let rad = r * 0.999 * ((u[0] * 7.0 + u[3] * 3.0).fract()).powf(0.25);
    [g0 / nrm * rad, g1 / nrm * rad, g2 / nrm * rad, g3 / nrm * rad]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn preset() -> PhysParams {
        PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.01).unwrap()
    }

    #[test]
    fn material_mapping_unit_case() {
        let m = MaterialConstants {
            gamma11: 1.0,
            gamma2: -0.5,
            gamma111: 0.0,
            gamma12: 0.0,
        };
        let p = material_to_phys(&m, 0.01).unwrap();
        assert_eq!((p.c1, p.c2, p.sigma0, p.sigma1), (2.0, 1.0, 6.0, 2.0));
        assert_eq!(p.sigma2, Some(2.0 * (-0.5 - 2.0)));
    }

    #[test]
    fn material_mapping_rejects_lame_violation() {
        let m = MaterialConstants {
            gamma11: 1.0,
            gamma2: 0.0,
            gamma111: 0.0,
            gamma12: 0.0,
        };
        assert!(material_to_phys(&m, 0.01).is_err());
        let m = MaterialConstants { gamma2: 0.3, ..m };
        assert!(material_to_phys(&m, 0.01).is_err());
    }

    #[test]
    fn material_mapping_negative_coupling() {
        let m = MaterialConstants {
            gamma11: 1.0,
            gamma2: -0.5,
            gamma111: -1.5 + 0.25,
            gamma12: 1.5,
        };
        let p = material_to_phys(&m, 0.01).unwrap();
        assert_relative_eq!(p.sigma0, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.sigma1, -1.0, epsilon = 1e-14);
        assert!(p.sigma0 * p.sigma1 < 0.0);
        assert!(p.c111_at_zero() < 0.0);
        assert_eq!(p.seed_orientation(), 1.0);
    }

    #[test]
    fn matrix_entries() {
        let p = preset();
        let a0 = matrix_a(&p, &State4::ZERO);
        assert_eq!(a0[2][0], -4.0);
        assert_eq!(a0[3][1], -1.0);
        assert_eq!(a0[0][2], -1.0);
        assert_eq!(a0[1][3], -1.0);
        let a = matrix_a(&p, &State4::new(0.01, 0.0, 0.3, -0.2));
        assert_eq!(a[2][1], 0.0);
        assert_eq!(a[3][0], 0.0);
        let a = matrix_a(&p, &State4::new(0.01, 0.02, 0.0, 0.0));
        assert_relative_eq!(a[2][0], -4.02, epsilon = 1e-14);
        assert_relative_eq!(a[3][1], -0.98, epsilon = 1e-14);
        assert_relative_eq!(a[2][1], 0.04, epsilon = 1e-14);
        assert_relative_eq!(a[3][0], 0.04, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_at_rest() {
        let lam = eigenvalues(&preset(), &State4::ZERO).unwrap();
        assert_eq!(lam, [2.0, 1.0, -1.0, -2.0]);
    }

    #[test]
    fn eigenvalues_phi1_only() {
        let lam = eigenvalues(&preset(), &State4::new(0.01, 0.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(lam[0], 4.02f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(lam[1], 0.98f64.sqrt(), max_relative = 1e-14);
        assert_eq!(lam[0] + lam[3], 0.0);
        assert_eq!(lam[1] + lam[2], 0.0);
    }

    #[test]
    fn eigenvalues_reject_outside_hyperbolic_region() {
        let p = preset();
        // b = 1 − 2φ₁ → 0 as φ₁ → 1/2 pushes λ₂² through zero.
        assert!(eigenvalues(&p, &State4::new(0.6, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn regularized_vectors_at_rest() {
        let p = preset();
        let es = eigenvectors(&p, &State4::ZERO, Normalization::Regularized).unwrap();
        assert_eq!(es.rvec[1], [0.0, 1.0, 0.0, -1.0]);
        assert_eq!(es.rvec[2], [0.0, 1.0, 0.0, 1.0]);
        let k = (4.0 - 1.0) / (2.0 * -1.0);
        assert_relative_eq!(es.rvec[0][0], k, epsilon = 1e-15);
        assert_relative_eq!(es.rvec[0][2], -2.0 * k, epsilon = 1e-15);
        assert_eq!(es.rvec[0][1], 0.0);
        assert_eq!(es.rvec[0][3], 0.0);
    }

    #[test]
    fn literal_pair_refuses_degenerate_phi2() {
        let p = preset();
        let e = eigenvectors(&p, &State4::new(0.001, 1e-9, 0.0, 0.0), Normalization::PaperLiteral);
        assert!(matches!(e, Err(Error::DegenerateNormalization { .. })));
        assert!(eigenvectors(&p, &State4::new(0.001, 1e-7, 0.0, 0.0), Normalization::PaperLiteral).is_ok());
    }

    #[test]
    fn literal_norms_match_display() {
        let p = preset();
        let st = State4::new(0.004, 0.003, 0.0, 0.0);
        let es = eigenvectors(&p, &st, Normalization::PaperLiteral).unwrap();
        let a = 4.0 + 2.0 * st.phi1();
        let b = 1.0 - 2.0 * st.phi1();
        let c = -2.0 * st.phi2();
        let dl = (a - b) * (a - b) + 4.0 * c * c;
        let k = (dl + (a - b) * dl.sqrt()) / 4.0;
        assert_relative_eq!(es.k_norm, k, max_relative = 1e-12);
        // N from the displayed difference form, which cancels; compare loosely.
        let n = (dl - (a - b) * dl.sqrt()) / 4.0;
        assert_relative_eq!(es.n_norm, n, max_relative = 1e-6);
    }

    #[test]
    fn c111_at_zero_value() {
        let p = preset();
        assert_eq!(p.c111_at_zero(), -0.75);
        let cc = coupling_coeffs(&p, &State4::ZERO, Normalization::Regularized).unwrap();
        assert_relative_eq!(cc.c[0][0], -0.75, max_relative = 1e-14);
        assert_relative_eq!(c111_closed_form(&p, &State4::ZERO).unwrap(), -0.75, max_relative = 1e-14);
    }

    #[test]
    fn gamma_213_bounded_as_phi2_vanishes() {
        let p = preset();
        let mut last = None;
        for k in 2..12 {
            let phi2 = 10f64.powi(-k);
            let lit = coupling_coeffs(&p, &State4::new(0.005, phi2, 0.0, 0.0), Normalization::PaperLiteral);
            let reg = coupling_coeffs(&p, &State4::new(0.005, phi2, 0.0, 0.0), Normalization::Regularized).unwrap();
            assert!(reg.g2[1][0][2].is_finite());
            if let Ok(lit) = lit {
                let g = lit.g2[1][0][2];
                assert!(g.is_finite() && g.abs() < 100.0, "γ²₁₃ = {g} at φ₂ = {phi2}");
                last = Some(g);
            }
        }
        assert!(last.is_some());
    }

    #[test]
    fn sigma_small_ball_limit() {
        let p = PhysParams::new(2.0, 1.0, 1.0, -1.0, 1e-7).unwrap();
        let g = min_gap_sigma(&p).unwrap();
        assert_relative_eq!(g.sigma, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn sigma_default_ball() {
        let g = min_gap_sigma(&preset()).unwrap();
        assert!(g.sigma > 0.9 && g.sigma < 1.0, "σ = {}", g.sigma);
        assert!((g.sigma - g.sigma_coarse).abs() < 1e-3);
    }

    #[test]
    fn sigma_rejects_large_ball() {
        let p = PhysParams::new(2.0, 1.0, 1.0, -1.0, 0.3).unwrap();
        assert!(min_gap_sigma(&p).is_err());
    }
}
