//! Coherently driven cavity coupled to a mechanical mode.
//!
//! The effective detuning Δ and the linearized coupling g = g₀|α| are the working
//! variables. The bare detuning Δ₀ and the drive ε only enter through
//! [`semiclassical_steady`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::constants::HBAR;
use crate::lyapunov::{DriftDiffusion, QuadratureOrder};
use crate::params::{laser_power, DrivePoint, SystemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StandardError {
    #[error("operating point is unstable (S_RH = {s_rh:e})")]
    NotStable { s_rh: f64 },
}

/// One real solution of the semiclassical cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    /// Intracavity photon number |α|².
    pub photons: f64,
    pub detuning_eff: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiclassicalState {
    pub alpha: Complex64,
    pub q_bar: f64,
    pub detuning_eff: f64,
    /// All positive real roots, lowest photon number first.
    pub branches: Vec<Branch>,
}

impl SemiclassicalState {
    pub fn multistable(&self) -> bool {
        self.branches.len() == 3
    }
}

/// Real roots of y³ + a y² + b y + c, ascending, each polished by Newton steps.
pub(crate) fn real_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    } else if p == 0.0 {
        vec![shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect()
    };
    for y in roots.iter_mut() {
        for _ in 0..4 {
            let f = ((*y + a) * *y + b) * *y + c;
            let df = (3.0 * *y + 2.0 * a) * *y + b;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            *y -= step;
            if step.abs() <= 1e-16 * y.abs() {
                break;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Self-consistent mean fields for drive ε at bare detuning Δ₀.
///
/// Solves |α|²(κ² + (Δ₀ − 2g₀²|α|²/Ω)²) = |ε|². The branch connected to the undriven
/// state (smallest photon number) is selected.
pub fn semiclassical_steady(epsilon: Complex64, delta0: f64, sys: &SystemParams) -> SemiclassicalState {
    let kappa = sys.kappa;
    let beta = 2.0 * sys.g0 * sys.g0 / sys.omega_mec;
    let e2 = epsilon.norm_sqr();
    let photons: Vec<f64> = if e2 == 0.0 {
        vec![0.0]
    } else if beta == 0.0 {
        vec![e2 / (kappa * kappa + delta0 * delta0)]
    } else {
        // y = βx/κ: y³ − 2d y² + (1 + d²) y − βε²/κ³ = 0 with d = Δ₀/κ.
        let d = delta0 / kappa;
        let rhs = beta * e2 / kappa.powi(3);
        real_cubic_roots(-2.0 * d, 1.0 + d * d, -rhs)
            .into_iter()
            .filter(|&y| y > 0.0)
            .map(|y| y * kappa / beta)
            .collect()
    };
    let branches: Vec<Branch> = photons
        .iter()
        .map(|&x| {
            let delta = delta0 - beta * x;
            let g = sys.g0 * x.sqrt();
            Branch { photons: x, detuning_eff: delta, stable: stability(g, delta, sys).stable }
        })
        .collect();
    let sel = branches[0];
    let alpha = if e2 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -Complex64::i() * epsilon / Complex64::new(kappa, sel.detuning_eff)
    };
    SemiclassicalState {
        alpha,
        q_bar: std::f64::consts::SQRT_2 * sys.g0 / sys.omega_mec * sel.photons,
        detuning_eff: sel.detuning_eff,
        branches,
    }
}

/// Drive needed to reach coupling g at effective detuning Δ.
pub fn drive_from_g(g: f64, delta: f64, sys: &SystemParams) -> DrivePoint {
    let alpha = g / sys.g0;
    let epsilon_mag = alpha * sys.kappa.hypot(delta);
    DrivePoint {
        detuning: delta,
        g,
        cooperativity: sys.cooperativity(g),
        alpha,
        epsilon_mag,
        p_las: laser_power(sys.omega_las, epsilon_mag, sys.kappa),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub s_rh: f64,
    pub stable: bool,
    /// +∞ when no instability threshold exists (Δ ≤ 0, or not applicable).
    pub g_crit: f64,
}

/// S_RH = Ω(κ² + Δ²) − 4g²Δ.
pub fn s_rh(g: f64, delta: f64, sys: &SystemParams) -> f64 {
    sys.omega_mec * (sys.kappa * sys.kappa + delta * delta) - 4.0 * g * g * delta
}

/// g_crit² = Ω(κ² + Δ²)/(4Δ); +∞ for Δ ≤ 0.
pub fn g_crit(delta: f64, sys: &SystemParams) -> f64 {
    if delta > 0.0 {
        (sys.omega_mec * (sys.kappa * sys.kappa + delta * delta) / (4.0 * delta)).sqrt()
    } else {
        f64::INFINITY
    }
}

pub fn stability(g: f64, delta: f64, sys: &SystemParams) -> StabilityReport {
    let s = s_rh(g, delta, sys);
    // On the heating side S_RH stays positive while the remaining Routh-Hurwitz
    // conditions (net mechanical damping) can fail, so check the spectrum there.
    let stable = s > 0.0 && (delta > 0.0 || drift_diffusion(g, delta, sys).is_hurwitz());
    StabilityReport { s_rh: s, stable, g_crit: g_crit(delta, sys) }
}

fn time_scale(g: f64, delta: f64, sys: &SystemParams) -> f64 {
    sys.kappa.max(sys.omega_mec).max(delta.abs()).max(2.0 * g)
}

pub(crate) fn standard_drift(g: f64, delta: f64, sys: &SystemParams) -> DMatrix<f64> {
    let (k, w, ga) = (sys.kappa, sys.omega_mec, sys.gamma_mec);
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        -k,      delta, 0.0,  0.0,
        -delta, -k,     2.0 * g, 0.0,
        0.0,     0.0,   0.0,  w,
        2.0 * g, 0.0,  -w,   -ga,
    ]);
    a
}

pub(crate) fn standard_diffusion(sys: &SystemParams) -> DMatrix<f64> {
    let k = sys.kappa;
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        k,
        k,
        0.0,
        sys.gamma_mec * (2.0 * sys.n_mec + 1.0),
    ]))
}

/// Drift and diffusion matrices in the order (δX_a, δP_a, δq, δp).
pub fn drift_diffusion(g: f64, delta: f64, sys: &SystemParams) -> DriftDiffusion {
    DriftDiffusion::new(
        QuadratureOrder::OptoMech,
        standard_drift(g, delta, sys),
        standard_diffusion(sys),
        time_scale(g, delta, sys),
    )
    .expect("4x4 construction is well formed")
}

/// Rotating-wave variant: only the beam-splitter part −ħg(δa†δb + δaδb†) of the
/// interaction is kept. In quadratures that couples X_a with p and P_a with q.
pub fn rwa_drift(g: f64, delta: f64, sys: &SystemParams) -> DriftDiffusion {
    let (k, w, ga) = (sys.kappa, sys.omega_mec, sys.gamma_mec);
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        -k,      delta, 0.0, -g,
        -delta, -k,     g,    0.0,
        0.0,    -g,     0.0,  w,
        g,       0.0,  -w,   -ga,
    ]);
    DriftDiffusion::new(QuadratureOrder::OptoMech, a, standard_diffusion(sys), time_scale(g, delta, sys))
        .expect("4x4 construction is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakCouplingResult {
    pub a_plus: f64,
    pub a_minus: f64,
    pub gamma_opt: f64,
    /// A₊/Γ_opt; `None` when the cavity heats (Γ_opt ≤ 0).
    pub n_opt: Option<f64>,
    pub n_fin_wc: f64,
    pub j_c_wc: f64,
    pub omega_shift: f64,
    /// g/min(κ, Ω); the expansion needs this small.
    pub validity: f64,
}

impl WeakCouplingResult {
    pub fn non_cooling(&self) -> bool {
        self.gamma_opt <= 0.0
    }
}

/// Stokes (+) and anti-Stokes (−) rates A± = 2g²κ/(κ² + (Ω ± Δ)²).
pub fn sideband_rates(g: f64, delta: f64, sys: &SystemParams) -> (f64, f64) {
    let (k, w) = (sys.kappa, sys.omega_mec);
    let rate = |s: f64| 2.0 * g * g * k / (k * k + (w + s * delta).powi(2));
    (rate(1.0), rate(-1.0))
}

/// Optical damping Γ_opt[ω].
pub fn gamma_opt_at(omega: f64, g: f64, delta: f64, sys: &SystemParams) -> f64 {
    let k = sys.kappa;
    8.0 * g * g * delta * sys.omega_mec * k
        / ((k * k + (omega - delta).powi(2)) * (k * k + (omega + delta).powi(2)))
}

/// Optical spring δΩ[ω].
pub fn omega_shift_at(omega: f64, g: f64, delta: f64, sys: &SystemParams) -> f64 {
    let k = sys.kappa;
    -2.0 * g * g * delta * (k * k - omega * omega + delta * delta)
        / ((k * k + (omega - delta).powi(2)) * (k * k + (omega + delta).powi(2)))
}

/// Effective-bath picture valid for g ≪ κ, Ω.
pub fn weak_coupling(g: f64, delta: f64, sys: &SystemParams) -> WeakCouplingResult {
    let (a_plus, a_minus) = sideband_rates(g, delta, sys);
    let gamma_opt = a_minus - a_plus;
    let ga = sys.gamma_mec;
    let n = sys.n_mec;
    let n_fin_wc = (ga * n + a_plus) / (ga + gamma_opt);
    // ħΩ Γ(n̄ − n_opt)γ/(γ + Γ), written without dividing by Γ.
    let j_c_wc = HBAR * sys.omega_mec * ga * (gamma_opt * n - a_plus) / (ga + gamma_opt);
    WeakCouplingResult {
        a_plus,
        a_minus,
        gamma_opt,
        n_opt: (gamma_opt > 0.0).then(|| a_plus / gamma_opt),
        n_fin_wc,
        j_c_wc,
        omega_shift: omega_shift_at(sys.omega_mec, g, delta, sys),
        validity: g / sys.kappa.min(sys.omega_mec),
    }
}

/// Polynomial coefficients of the closed-form steady state. W = Ω, D = Δ, k = κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub s_rh: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    /// Squeezing-angle coefficients.
    pub s_star: f64,
    pub c_star: f64,
    pub b_star: f64,
}

pub fn coefficients(g: f64, delta: f64, sys: &SystemParams) -> Coefficients {
    let (w, d, k, ga) = (sys.omega_mec, delta, sys.kappa, sys.gamma_mec);
    let g2 = g * g;
    let (d2, k2, w2) = (d * d, k * k, w * w);
    let k4 = k2 * k2;
    let s = w * (k2 + d2) - 4.0 * g2 * d;
    let dk = d2 + k2;

    let c1 = (w * dk * dk + (d2 - 4.0 * d * w + 2.0 * w2 + k2) * s) * k2
        + ga * (d2 * (d2 * d + w2 * w) - 2.0 * d * w2 * g2
            + (2.0 * d2 * d + 2.0 * d2 * w + w2 * w) * k2
            + (d + 2.0 * w) * k4
            + (d2 - 3.0 * d * w + k2) * s)
            * k
        + ga * ga * (2.0 * d2 * w * g2 + (2.0 * d + w) * k4 + d2 * (2.0 * d + w) * k2)
        + ga.powi(3) * dk * k * d;

    let c2 = (w * k4 * k2
        + (3.0 * d2 * w + 2.0 * w2 * w - 2.0 * d * g2) * k4
        + ((3.0 * d2 * d2 + w2 * w2) * w - 2.0 * (2.0 * d2 + 3.0 * w2) * d * g2) * k2
        + d * ((d2 - w2).powi(2) * d * w
            - 2.0 * (d2 * d2 - 5.0 * d2 * w2 + 2.0 * w2 * w2) * g2
            - 8.0 * d * w * g2 * g2))
        * k
        + ga * (2.0 * w * k4 * k2
            + 2.0 * (2.0 * d2 * w + w2 * w - 2.0 * d * g2) * k4
            + 2.0 * d * (d * w * (d2 + w2) - (2.0 * d2 + 3.0 * w2) * g2) * k2
            + 2.0 * g2 * d2 * w * (d * w - 2.0 * g2))
        + ga * ga * (w * k4 + 2.0 * (d * w - g2) * d * k2 + (d * w - 2.0 * g2) * d2 * d) * k;

    let c3 = 8.0 * d * w * g2 * k2
        + ga * (k4 + 2.0 * (d2 + w2) * k2 + (d2 - w2).powi(2) + 8.0 * d * w * g2) * k
        + 2.0 * ga * ga * (d * w * g2 + (d2 + w2) * k2 + k4)
        + ga.powi(3) * dk * k;

    let c4 = -(k2 + (d - w).powi(2)) * k + (d * w - k2 - d2) * ga;
    let c5 = 2.0 * d * w * (ga + 2.0 * k);

    let c6 = 4.0 * dk * g2 * k2
        + ga * (dk * dk + 2.0 * g2 * (4.0 * k2 + w2) + (w - 2.0 * d) * s) * k
        + ga * ga
            * (2.0 * k4 + (2.0 * d2 - d * w + w2 + 4.0 * g2) * k2 + d2 * w * (w - d)
                + 2.0 * d * (2.0 * d - w) * g2)
        + ga.powi(3) * dk * k;

    let c7 = (dk * dk + w * s) * 2.0 * k
        + ga * ((w2 + 4.0 * k2) * dk + w * s)
        + ga * ga * dk * 2.0 * k;

    let s_star = (2.0 * (w * dk + s) * k + ga * (w * (4.0 * k2 + w2) + s) + 2.0 * ga * ga * w * k) * d * k;
    let c_star = (w * (d2 * d2 - k4) + (d2 - 2.0 * w2 - k2) * s) * k
        + ga * (-3.0 * w * k4 + (d2 * w - w2 * w + 4.0 * d * g2) * k2 + 2.0 * d * w2 * g2)
        + ga * ga * (d + k) * (d - k) * w * k;
    let b_star = (w * dk * dk + s * (dk + 2.0 * w2)) * k
        + ga * (w * dk * (2.0 * k2 + d2) + (w2 + k2) * s - 2.0 * d * g2 * (2.0 * d2 - w2))
        + ga * ga * dk * w * k;

    Coefficients { s_rh: s, c1, c2, c3, c4, c5, c6, c7, s_star, c_star, b_star }
}

/// Additive corrections to c₁, c₄ and c₆ from non-vacuum optical input noise.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Corrections {
    pub dc1: f64,
    pub dc4: f64,
    pub dc6: f64,
}

/// Closed-form steady-state moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub n_fin: f64,
    pub v14: f64,
    pub v23: f64,
    pub s_rh: f64,
}

pub(crate) fn closed_form_with(
    g: f64,
    sys: &SystemParams,
    coef: &Coefficients,
    corr: Corrections,
) -> Result<ClosedForm, StandardError> {
    let s = coef.s_rh;
    if !(s > 0.0) {
        return Err(StandardError::NotStable { s_rh: s });
    }
    let (ga, n, k, w) = (sys.gamma_mec, sys.n_mec, sys.kappa, sys.omega_mec);
    let n_fin = (g * g * (coef.c1 + corr.dc1) + ga * n * coef.c2) / (coef.c3 * s);
    let v14 = -g * ga * k * (coef.c4 + corr.dc4 + n * coef.c5) / coef.c3;
    let v23 = g * k * w * (coef.c6 + corr.dc6 + ga * n * coef.c7) / (s * coef.c3);
    Ok(ClosedForm { n_fin, v14, v23, s_rh: s })
}

/// Closed-form n̄_fin, V̄₁₄ and V̄₂₃.
pub fn analytic_closed_form(g: f64, delta: f64, sys: &SystemParams) -> Result<ClosedForm, StandardError> {
    closed_form_with(g, sys, &coefficients(g, delta, sys), Corrections::default())
}

/// Steady-state phonon number n̄_fin = (g²c₁ + γn̄c₂)/(c₃S_RH).
pub fn analytic_nfin(g: f64, delta: f64, sys: &SystemParams) -> Result<f64, StandardError> {
    analytic_closed_form(g, delta, sys).map(|c| c.n_fin)
}

pub(crate) fn etas_with(
    delta: f64,
    sys: &SystemParams,
    coef: &Coefficients,
    corr: Corrections,
) -> Result<(f64, f64), StandardError> {
    let s = coef.s_rh;
    if !(s > 0.0) {
        return Err(StandardError::NotStable { s_rh: s });
    }
    let (ga, n, k, w) = (sys.gamma_mec, sys.n_mec, sys.kappa, sys.omega_mec);
    let num = coef.c4 + corr.dc4 + n * coef.c5;
    let eta_l = 4.0 * w * sys.g0 * sys.g0 * ga * k * k * num
        / ((delta * delta + k * k) * sys.omega_las * coef.c3);
    let eta_c = ga * s * num / (w * (coef.c6 + corr.dc6 + ga * n * coef.c7));
    Ok((eta_l, eta_c))
}

/// Closed-form (η_L, η_C).
pub fn analytic_etas(g: f64, delta: f64, sys: &SystemParams) -> Result<(f64, f64), StandardError> {
    etas_with(delta, sys, &coefficients(g, delta, sys), Corrections::default())
}
