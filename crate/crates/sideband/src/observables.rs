//! Steady-state thermodynamics from a covariance matrix: flows, efficiencies,
//! effective temperature and the beam-splitter / two-mode-squeezing split.
//!
//! Quadrature indices are 1-based: X_a = 1, P_a = 2, q = 3, p = 4 (and X_d, P_d = 5, 6).

use serde::Serialize;
use thiserror::Error;

use crate::constants::{HBAR, K_B};
use crate::fano;
use crate::lyapunov::CovarianceMatrix;
use crate::params::{DrivePoint, SetupConfig, SqueezeParams, SystemParams};
use crate::squeezed;
use crate::standard;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservablesError {
    #[error("{0} is undefined here")]
    Undefined(&'static str),
    #[error("measurement identities assume vacuum input; squeezed drive given")]
    SetupMismatch,
    #[error("covariance has dimension {0}, expected {1}")]
    Shape(usize, &'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub n_fin: f64,
    /// Effective mode temperature, K.
    pub t_eff: f64,
    /// Evacuated-heat flow, W.
    pub j_c: f64,
    /// Phonon flow into the cold bath, 1/s.
    pub i_c_phonon: f64,
    /// Photon flow interacting with the mechanics, 1/s.
    pub i_photon: f64,
    pub eta_l: Option<f64>,
    /// Squeezed setup only: η_L scaled by the reflected fraction.
    pub eta_l_prime: Option<f64>,
    pub eta_c: Option<f64>,
    /// Fano setup only.
    pub eta_c_prime: Option<f64>,
    pub j_c_bs: f64,
    pub j_c_tms: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub var_xa: f64,
    pub var_pa: f64,
    pub p_las: f64,
    /// S_RH, or S_RH^Fano.
    pub s_rh: f64,
    /// Diagnostics: near-zero denominators, clamped occupations.
    pub flags: Vec<String>,
}

/// Denominators closer to zero than this many ulps of the numerator are flagged.
const ULPS: f64 = 1e3;

fn ratio(num: f64, den: f64, what: &str, flags: &mut Vec<String>) -> Option<f64> {
    if den == 0.0 || den.abs() <= ULPS * f64::EPSILON * num.abs() {
        if num != 0.0 || den != 0.0 {
            flags.push(format!("{what}: denominator {den:e} vanishes against numerator {num:e}"));
        }
        None
    } else {
        Some(num / den)
    }
}

/// Temperature of a thermal mode with occupation n at angular frequency ω.
pub fn effective_temperature(omega: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    HBAR * omega / (K_B * (1.0 / n).ln_1p())
}

/// η_C = −V̄₁₄/V̄₂₃.
pub fn eta_c(vbar: &CovarianceMatrix) -> Result<f64, ObservablesError> {
    let den = vbar.at(2, 3);
    if den == 0.0 {
        return Err(ObservablesError::Undefined("eta_c"));
    }
    Ok(-vbar.at(1, 4) / den)
}

/// (J_c^BS, J_c^TMS) in W. The beam-splitter part is ħΩ·g(V̄₂₃ − V̄₁₄), the
/// two-mode-squeezing part −ħΩ·g(V̄₂₃ + V̄₁₄).
pub fn bs_tms_split(vbar: &CovarianceMatrix, g: f64, omega_mec: f64) -> (f64, f64) {
    let (v14, v23) = (vbar.at(1, 4), vbar.at(2, 3));
    let e = HBAR * omega_mec;
    (e * g * (v23 - v14), -e * g * (v23 + v14))
}

/// Phonon flow into the hot bath, γ(⟨δp²⟩ − n̄ − 1/2). Zero net with I_c in steady state.
pub fn hot_bath_flow(vbar: &CovarianceMatrix, sys: &SystemParams) -> f64 {
    sys.gamma_mec * (vbar.at(4, 4) - sys.n_mec - 0.5)
}

/// Phonon-number derivative rebuilt from V̄ and the scale of its largest term.
pub fn phonon_balance(vbar: &CovarianceMatrix, g: f64, sys: &SystemParams) -> (f64, f64) {
    let i_c = -2.0 * g * vbar.at(1, 4);
    let i_h = hot_bath_flow(vbar, sys);
    let scale = [i_c, sys.gamma_mec * vbar.at(4, 4), sys.gamma_mec * (sys.n_mec + 0.5)]
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    (-i_c - i_h, scale)
}

/// Photon-number derivative rebuilt from V̄: 2gV̄₂₃ − 2κ(n_a − π_sN_s).
pub fn photon_balance(vbar: &CovarianceMatrix, g: f64, kappa: f64, sq: Option<&SqueezeParams>) -> (f64, f64) {
    let n_a = (vbar.at(1, 1) + vbar.at(2, 2) - 1.0) / 2.0;
    let source = sq.map_or(0.0, |s| s.purity * squeezed::squeeze_moments_unchecked(s.ratio).n_s);
    let i_ph = 2.0 * g * vbar.at(2, 3);
    let out = 2.0 * kappa * (n_a - source);
    let terms = [i_ph, out, kappa * (vbar.at(1, 1) + vbar.at(2, 2)), 2.0 * kappa * source];
    (i_ph - out, terms.iter().fold(0.0f64, |a, b| a.max(b.abs())))
}

/// (I_c^phonon, I^photon) from the optical variances alone, as a homodyne measurement
/// would give them. Valid for vacuum input only.
///
/// With the drift rows (−κ, Δ) and (−Δ, −κ) used here the steady-state moment equations
/// give I_c = −(2κ/ΔΩ)[κ²⟨δX_a²⟩ − Δ²⟨δP_a²⟩ + (Δ² − κ²)/2].
pub fn flows_from_optical_variances(
    vbar: &CovarianceMatrix,
    delta: f64,
    kappa: f64,
    omega_mec: f64,
    sq: Option<&SqueezeParams>,
) -> Result<(f64, f64), ObservablesError> {
    if sq.is_some_and(|s| s.purity > 0.0) {
        return Err(ObservablesError::SetupMismatch);
    }
    let n = vbar.v.nrows();
    if n != 4 {
        return Err(ObservablesError::Shape(n, "4"));
    }
    let (x2, p2) = (vbar.at(1, 1), vbar.at(2, 2));
    let i_ph = kappa * (x2 + p2 - 1.0);
    if delta == 0.0 {
        return Err(ObservablesError::Undefined("I_c at zero detuning"));
    }
    let (k2, d2) = (kappa * kappa, delta * delta);
    let i_c = -2.0 * kappa / (delta * omega_mec) * (k2 * x2 - d2 * p2 + (d2 - k2) / 2.0);
    Ok((i_c, i_ph))
}

/// Every steady-state observable at one operating point.
pub fn observables_from_cov(
    vbar: &CovarianceMatrix,
    drive: &DrivePoint,
    sys: &SystemParams,
    setup: &SetupConfig,
) -> Result<Observables, ObservablesError> {
    let dim = vbar.v.nrows();
    let want = if matches!(setup, SetupConfig::Fano { .. }) { 6 } else { 4 };
    if dim != want {
        return Err(ObservablesError::Shape(dim, if want == 6 { "6" } else { "4" }));
    }
    let mut flags = Vec::new();
    let g = drive.g;
    let (var_xa, var_pa, var_q, var_p) = (vbar.at(1, 1), vbar.at(2, 2), vbar.at(3, 3), vbar.at(4, 4));
    let mut n_fin = (var_q + var_p - 1.0) / 2.0;
    let t_eff = if n_fin <= 0.0 {
        flags.push(format!("n_fin = {n_fin:e} clamped to 0"));
        n_fin = n_fin.max(0.0);
        0.0
    } else {
        effective_temperature(sys.omega_mec, n_fin)
    };
    let i_c = -2.0 * g * vbar.at(1, 4);
    let i_photon = 2.0 * g * vbar.at(2, 3);
    let j_c = HBAR * sys.omega_mec * i_c;
    let (j_c_bs, j_c_tms) = bs_tms_split(vbar, g, sys.omega_mec);

    let eta_l = ratio(j_c, drive.p_las, "eta_l", &mut flags);
    let eta_c = ratio(-vbar.at(1, 4), vbar.at(2, 3), "eta_c", &mut flags);
    let (eta_l_prime, eta_c_prime, s_rh) = match setup {
        SetupConfig::Standard { detuning } => (None, None, standard::s_rh(g, *detuning, sys)),
        SetupConfig::Squeezed { detuning, squeeze } => {
            (eta_l.map(|e| e * squeeze.reflected_fraction), None, standard::s_rh(g, *detuning, sys))
        }
        SetupConfig::Fano { fano: fp } => {
            let s = fano::fano_s_rh(g, fp.detuning(), fp.detuning_d, fp, sys);
            let e = match fano::eta_c_prime(vbar, g, fp) {
                Ok(v) => Some(v),
                Err(e) => {
                    flags.push(format!("eta_c_prime: {e}"));
                    None
                }
            };
            (None, e, s)
        }
    };
    Ok(Observables {
        n_fin,
        t_eff,
        j_c,
        i_c_phonon: i_c,
        i_photon,
        eta_l,
        eta_l_prime,
        eta_c,
        eta_c_prime,
        j_c_bs,
        j_c_tms,
        var_q,
        var_p,
        var_xa,
        var_pa,
        p_las: drive.p_las,
        s_rh,
        flags,
    })
}
