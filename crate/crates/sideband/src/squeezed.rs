//! Cavity driven through a squeezed-vacuum input port.
//!
//! The squeezed noise only changes the optical diffusion block; the drift matrix is the
//! standard one. The white-noise moments are N_s and M_s = |M_s|e^{−2iθ}.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::lyapunov::{DriftDiffusion, QuadratureOrder};
use crate::params::{SqueezeParams, SystemParams};
use crate::standard::{self, ClosedForm, Coefficients, Corrections, StandardError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqueezedError {
    #[error("squeezing ratio {0} outside [0, 1)")]
    Domain(f64),
    #[error("optimal angle undefined: s* = c* = 0")]
    AngleUndefined,
    #[error("no squeezing ratio in [0, 1) solves the optimality condition (b*/a* = {0})")]
    NoValidRoot(f64),
    #[error("finite squeezing bandwidth not configured")]
    NotConfigured,
    #[error(transparent)]
    Standard(#[from] StandardError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeMoments {
    pub n_s: f64,
    pub m_abs: f64,
    pub theta: f64,
}

impl SqueezeMoments {
    pub fn m_s(&self) -> Complex64 {
        Complex64::from_polar(self.m_abs, -2.0 * self.theta)
    }
}

/// Closed-form moments without the range check; θ = 0.
pub fn squeeze_moments_unchecked(ratio: f64) -> SqueezeMoments {
    let r2 = ratio * ratio;
    let den = (1.0 - r2).powi(2);
    SqueezeMoments { n_s: 4.0 * r2 / den, m_abs: 2.0 * ratio * (1.0 + r2) / den, theta: 0.0 }
}

/// N_s = 4r²/(1−r²)², |M_s| = 2r(1+r²)/(1−r²)².
pub fn squeeze_moments(ratio: f64, theta: f64) -> Result<SqueezeMoments, SqueezedError> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(SqueezedError::Domain(ratio));
    }
    Ok(SqueezeMoments { theta, ..squeeze_moments_unchecked(ratio) })
}

fn moments(sq: &SqueezeParams) -> SqueezeMoments {
    SqueezeMoments { theta: sq.angle, ..squeeze_moments_unchecked(sq.ratio) }
}

/// Extra optical diffusion 2κπ_s[[N+Mc, −Ms], [−Ms, N−Mc]] with Mc = |M|cos2θ,
/// Ms = |M|sin2θ.
pub fn diffusion_correction(kappa: f64, sq: &SqueezeParams) -> [[f64; 2]; 2] {
    let m = moments(sq);
    let pre = 2.0 * kappa * sq.purity;
    let (s2, c2) = (2.0 * sq.angle).sin_cos();
    let (mc, ms) = (m.m_abs * c2, m.m_abs * s2);
    [[pre * (m.n_s + mc), -pre * ms], [-pre * ms, pre * (m.n_s - mc)]]
}

/// Standard drift with the squeezed-input diffusion.
pub fn diffusion_squeezed(g: f64, delta: f64, sys: &SystemParams, sq: &SqueezeParams) -> DriftDiffusion {
    let base = standard::drift_diffusion(g, delta, sys);
    let db = diffusion_correction(sys.kappa, sq);
    let mut b: DMatrix<f64> = base.b.clone();
    for i in 0..2 {
        for j in 0..2 {
            b[(i, j)] += db[i][j];
        }
    }
    DriftDiffusion::new(QuadratureOrder::OptoMech, base.a, b, base.time_scale)
        .expect("squeezed diffusion stays symmetric")
}

/// θ* from cos2θ* ∝ c*, sin2θ* ∝ s*, in [0, π). Depends on the optomechanical
/// parameters and g only.
pub fn optimal_angle(g: f64, delta: f64, sys: &SystemParams) -> Result<f64, SqueezedError> {
    angle_from(&standard::coefficients(g, delta, sys))
}

fn angle_from(c: &Coefficients) -> Result<f64, SqueezedError> {
    if c.s_star == 0.0 && c.c_star == 0.0 {
        return Err(SqueezedError::AngleUndefined);
    }
    let t = 0.5 * c.s_star.atan2(c.c_star);
    Ok(t.rem_euclid(std::f64::consts::PI))
}

/// Root in [0, 1) of a r⁴ − 4b r³ + 6a r² − 4b r + a = 0 for x = b/a ≥ 1.
fn quartic_root(a: f64, b: f64) -> Result<f64, SqueezedError> {
    let x = b / a;
    if !(x >= 1.0) || !x.is_finite() {
        return Err(SqueezedError::NoValidRoot(x));
    }
    let s = (x * x - 1.0).sqrt();
    let r = x + s - std::f64::consts::SQRT_2 * (x * x + x * s - 1.0).sqrt();
    if !(0.0..1.0).contains(&r) {
        return Err(SqueezedError::NoValidRoot(x));
    }
    Ok(r)
}

/// Quartic a r⁴ − 4b r³ + 6a r² − 4b r + a evaluated at r.
pub fn ratio_quartic(a: f64, b: f64, r: f64) -> f64 {
    (((a * r - 4.0 * b) * r + 6.0 * a) * r - 4.0 * b) * r + a
}

/// (a*, b*) of the ratio quartic at angle θ.
pub fn ratio_quartic_coefficients(theta: f64, g: f64, delta: f64, sys: &SystemParams) -> (f64, f64) {
    let c = standard::coefficients(g, delta, sys);
    let (s2, c2) = (2.0 * theta).sin_cos();
    (c.c_star * c2 + c.s_star * s2, c.b_star)
}

/// Optimal squeezing ratio at angle θ.
pub fn optimal_ratio(theta: f64, g: f64, delta: f64, sys: &SystemParams) -> Result<f64, SqueezedError> {
    let (a, b) = ratio_quartic_coefficients(theta, g, delta, sys);
    quartic_root(a, b)
}

/// (θ*, r_s*) at one operating point.
pub fn optimal_squeezing(g: f64, delta: f64, sys: &SystemParams) -> Result<(f64, f64), SqueezedError> {
    let c = standard::coefficients(g, delta, sys);
    let theta = angle_from(&c)?;
    let a = c.c_star.hypot(c.s_star);
    Ok((theta, quartic_root(a, c.b_star)?))
}

/// Same parameters with (θ, r_s) replaced by their optimum at this operating point.
pub fn optimize_params(
    g: f64,
    delta: f64,
    sys: &SystemParams,
    sq: &SqueezeParams,
) -> Result<SqueezeParams, SqueezedError> {
    let (theta, ratio) = optimal_squeezing(g, delta, sys)?;
    Ok(SqueezeParams { angle: theta, ratio, ..*sq })
}

pub(crate) fn corrections(
    g: f64,
    delta: f64,
    sys: &SystemParams,
    coef: &Coefficients,
    sq: &SqueezeParams,
) -> Corrections {
    let m = moments(sq);
    let p = sq.purity;
    let (w, d, k, ga) = (sys.omega_mec, delta, sys.kappa, sys.gamma_mec);
    let (s2, c2) = (2.0 * sq.angle).sin_cos();
    let (n, mc, ms) = (m.n_s, m.m_abs * c2, m.m_abs * s2);
    let (d2, k2, w2) = (d * d, k * k, w * w);
    let dk = d2 + k2;
    let g2 = g * g;

    let dc1 = 2.0 * k * p * (n * coef.b_star - (mc * coef.c_star + ms * coef.s_star));
    let dc4 = 2.0 * p * (mc * (d2 - w2 - k2 - ga * k) + ms * d * (ga + 2.0 * k)) * k
        - 2.0 * p * n * ((d2 + w2 + k2) * k + ga * dk);
    let dc6 = p
        * (n * 2.0
            * (4.0 * g2 * dk * (ga + k).powi(2) - d * w * ga * (ga + 2.0 * k) * dk + 2.0 * w2 * g2 * ga * k)
            - mc * 2.0
                * k
                * (4.0 * g2 * (ga + k) * (d2 - k * (ga + k))
                    + d * w * ga * (-d2 + w2 + 2.0 * ga * k + 3.0 * k2)
                    - 2.0 * w2 * g2 * ga)
            - ms * 2.0
                * k
                * (4.0 * d * g2 * (ga + k) * (ga + 2.0 * k)
                    + w * ga * (-d2 * ga - 3.0 * d2 * k + w2 * k + ga * k2 + k2 * k)));
    Corrections { dc1, dc4, dc6 }
}

/// Closed-form n̄_fin, V̄₁₄, V̄₂₃ with squeezed input.
pub fn analytic_closed_form_squeezed(
    g: f64,
    delta: f64,
    sys: &SystemParams,
    sq: &SqueezeParams,
) -> Result<ClosedForm, SqueezedError> {
    let coef = standard::coefficients(g, delta, sys);
    let corr = corrections(g, delta, sys, &coef, sq);
    Ok(standard::closed_form_with(g, sys, &coef, corr)?)
}

pub fn analytic_nfin_squeezed(
    g: f64,
    delta: f64,
    sys: &SystemParams,
    sq: &SqueezeParams,
) -> Result<f64, SqueezedError> {
    analytic_closed_form_squeezed(g, delta, sys, sq).map(|c| c.n_fin)
}

/// Closed-form (η_L, η_C) with squeezed input. η_L uses the coherent drive power only.
pub fn analytic_etas_squeezed(
    g: f64,
    delta: f64,
    sys: &SystemParams,
    sq: &SqueezeParams,
) -> Result<(f64, f64), SqueezedError> {
    let coef = standard::coefficients(g, delta, sys);
    let corr = corrections(g, delta, sys, &coef, sq);
    Ok(standard::etas_with(delta, sys, &coef, corr)?)
}

/// Weak-coupling optimal angle: tan2θ = 2Δκ/(Δ² − Ω² − κ²), in [0, π).
pub fn weak_coupling_angle(delta: f64, sys: &SystemParams) -> f64 {
    let (w, k) = (sys.omega_mec, sys.kappa);
    (0.5 * (2.0 * delta * k).atan2(delta * delta - w * w - k * k)).rem_euclid(std::f64::consts::PI)
}

/// Occupation of the effective cold bath with squeezed input, weak coupling.
pub fn weak_coupling_nopt_squeezed(g: f64, delta: f64, sys: &SystemParams, sq: &SqueezeParams) -> f64 {
    let wc = standard::weak_coupling(g, delta, sys);
    let n_opt = wc.a_plus / wc.gamma_opt;
    let m = moments(sq);
    let (w, k) = (sys.omega_mec, sys.kappa);
    let lo = k * k + (delta - w).powi(2);
    let hi = k * k + (delta + w).powi(2);
    let theta_star = weak_coupling_angle(delta, sys);
    n_opt
        * (1.0 + 2.0 * sq.purity * m.n_s * (delta * delta + w * w + k * k) / lo
            - 2.0 * sq.purity * m.m_abs * (hi / lo).sqrt() * (2.0 * (sq.angle - theta_star)).cos())
}

/// Weak-coupling optimal ratio, fixed by |M_s|/N_s = √((κ²+(Δ+Ω)²)/(κ²+(Δ−Ω)²)).
pub fn weak_coupling_ratio(delta: f64, sys: &SystemParams) -> f64 {
    let (w, k) = (sys.omega_mec, sys.kappa);
    // |M|² = N(N+1) gives N = 1/(X−1) with X the squared ratio.
    let x = (k * k + (delta + w).powi(2)) / (k * k + (delta - w).powi(2));
    let n = 1.0 / (x - 1.0);
    // invert N = 4r²/(1−r²)²: √N(1−r²) = 2r
    let s = n.sqrt();
    if s == 0.0 {
        return 0.0;
    }
    (-1.0 + (1.0 + s * s).sqrt()) / s
}

/// Finite-bandwidth correlators n_s(τ), |m_s(τ)| of the squeezed input.
pub fn finite_bandwidth_correlators(sq: &SqueezeParams, tau: f64) -> Result<(f64, f64), SqueezedError> {
    let (rp, rm) = sq.decay_rates().ok_or(SqueezedError::NotConfigured)?;
    let pre = (rp * rp - rm * rm) / 4.0;
    let a = (-rm * tau.abs()).exp() / (2.0 * rm);
    let b = (-rp * tau.abs()).exp() / (2.0 * rp);
    Ok((pre * (a - b), pre * (a + b)))
}

/// Spectra n_s[ω], |m_s[ω]|.
pub fn finite_bandwidth_spectra(sq: &SqueezeParams, omega: f64) -> Result<(f64, f64), SqueezedError> {
    let (rp, rm) = sq.decay_rates().ok_or(SqueezedError::NotConfigured)?;
    let pre = (rp * rp - rm * rm) / 4.0;
    let a = 1.0 / (rm * rm + omega * omega);
    let b = 1.0 / (rp * rp + omega * omega);
    Ok((pre * (a - b), pre * (a + b)))
}
