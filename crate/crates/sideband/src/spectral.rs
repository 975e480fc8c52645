//! Mechanical fluctuations from noise spectra, without the white-noise bath.
//!
//! S_q[ω] = |χ[ω]|²(S_th[ω] + S_rp[ω]), ⟨δq²⟩ = ∫S_q dω/2π and ⟨δp²⟩ = ∫(ω/Ω)²S_q dω/2π.
//! With the coth bath the momentum integral grows like log ω, so both integrals stop at
//! ω_max, a thousand times the fastest rate in the problem.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::constants::{HBAR, K_B};
use crate::fano;
use crate::lyapunov::{solve_steady, DriftDiffusion};
use crate::params::{FanoParams, SetupConfig, SqueezeParams, SystemParams};
use crate::quad::{integrate, QuadratureFailure, Tolerance};
use crate::squeezed;
use crate::standard;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("operating point is unstable (stability margin {0:e})")]
    NotStable(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureFailure),
    #[error("squeezing bandwidth not configured")]
    NotConfigured,
}

/// Integration window, panel breakpoints and tolerances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Sorted panel edges in [omega_min, omega_max].
    pub breakpoints: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

/// Ratio of the integration cutoff to the fastest rate.
pub const CUTOFF_FACTOR: f64 = 1e3;
/// Panel edges around a feature of width w, in units of w.
const NEAR_OFFSETS: [f64; 9] = [0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 10.0];
/// Gauss-Kronrod nodes per panel.
const NODES_PER_PANEL: usize = 15;

impl SpectrumGrid {
    /// Panels follow the eigenvalues λ of the drift matrix: edges cluster at ±Im λ on
    /// the scale |Re λ| and then spread geometrically. `features` adds extra centers
    /// (cavity or mirror detunings, squeezing bandwidths) of unknown width. The cutoff
    /// follows the eigenvalues and detunings only, so a wide squeezing bandwidth does not
    /// move it.
    pub fn from_drift(dd: &DriftDiffusion, detunings: &[f64], features: &[f64], n_mec: f64) -> Self {
        let eig = dd.eigenvalues();
        let fastest = eig
            .iter()
            .map(|l| l.norm())
            .chain(detunings.iter().map(|f| f.abs()))
            .fold(0.0, f64::max);
        let omega_max = CUTOFF_FACTOR * fastest;
        let mut pts = vec![-omega_max, 0.0, omega_max];
        let mut add = |c: f64, w: f64| {
            if !(w > 0.0) {
                return;
            }
            for s in [-1.0, 1.0] {
                for o in NEAR_OFFSETS {
                    pts.push(c + s * o * w);
                }
                let mut o = 40.0 * w;
                while o < 2.0 * omega_max {
                    pts.push(c + s * o);
                    o *= 4.0;
                }
            }
        };
        for l in &eig {
            add(l.im.abs(), l.re.abs());
            add(-l.im.abs(), l.re.abs());
        }
        for &f in detunings.iter().chain(features) {
            let w = f.abs() * 1e-2;
            add(f, w);
            add(-f, w);
        }
        pts.retain(|p| p.abs() <= omega_max);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * omega_max);
        SpectrumGrid {
            omega_min: -omega_max,
            omega_max,
            breakpoints: pts,
            abs_tol: 1e-9 * n_mec.max(1.0),
            rel_tol: 1e-6,
            max_intervals: 200_000,
        }
    }

    /// Quadrature nodes falling in [lo, hi] before any adaptive refinement.
    pub fn nodes_within(&self, lo: f64, hi: f64) -> usize {
        self.breakpoints
            .windows(2)
            .filter(|w| w[0] >= lo && w[1] <= hi)
            .count()
            * NODES_PER_PANEL
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol, max_intervals: self.max_intervals }
    }

    pub fn tightened(&self, factor: f64) -> Self {
        SpectrumGrid { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralResult {
    pub n_fin: f64,
    pub var_q: f64,
    pub var_p: f64,
    /// Quadrature error estimate on n_fin.
    pub error: f64,
}

/// x·coth(x) without overflow.
pub fn x_coth_x(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-4 {
        1.0 + a * a / 3.0
    } else {
        a * (1.0 + 2.0 / (2.0 * a).exp_m1())
    }
}

/// S_th[ω] = γ(ω/Ω)coth(ħω/2k_BT).
pub fn thermal_spectrum(omega: f64, sys: &SystemParams) -> f64 {
    let beta = HBAR / (2.0 * K_B * sys.temp_mec);
    sys.gamma_mec / sys.omega_mec * x_coth_x(beta * omega) / beta
}

/// Inverse effective susceptibility of the coherently driven setup, χ⁻¹[ω].
pub fn chi_inv_standard(omega: f64, g: f64, delta: f64, sys: &SystemParams) -> Complex64 {
    let w = sys.omega_mec;
    let cav = Complex64::new(sys.kappa, -omega).powi(2) + delta * delta;
    (Complex64::new(w * w - omega * omega, -omega * sys.gamma_mec) - 4.0 * g * g * delta * w / cav) / w
}

/// S_rp[ω] = 4g²κ/(κ² + (ω−Δ)²).
pub fn rp_spectrum_standard(omega: f64, g: f64, delta: f64, sys: &SystemParams) -> f64 {
    let k = sys.kappa;
    4.0 * g * g * k / (k * k + (omega - delta).powi(2))
}

/// Radiation-pressure spectrum with squeezed input. Uses the Lorentzian n_s[ω], m_s[ω]
/// when a bandwidth is set, the white-noise N_s, |M_s| otherwise.
pub fn rp_spectrum_squeezed(omega: f64, g: f64, delta: f64, sys: &SystemParams, sq: &SqueezeParams) -> f64 {
    let (n, m) = match squeezed::finite_bandwidth_spectra(sq, omega) {
        Ok(v) => v,
        Err(_) => {
            let mm = squeezed::squeeze_moments_unchecked(sq.ratio);
            (mm.n_s, mm.m_abs)
        }
    };
    let k = sys.kappa;
    let (s2, c2) = (2.0 * sq.angle).sin_cos();
    let extra = 2.0
        * sq.purity
        * (n * (k * k + delta * delta + omega * omega)
            - m * ((delta * delta - k * k - omega * omega) * c2 + 2.0 * delta * k * s2))
        / (k * k + (omega + delta).powi(2));
    rp_spectrum_standard(omega, g, delta, sys) * (1.0 + extra)
}

pub fn chi_inv_fano(omega: f64, g: f64, delta: f64, delta_d: f64, fp: &FanoParams, sys: &SystemParams) -> Complex64 {
    let w = sys.omega_mec;
    Complex64::new(w * w - omega * omega, -omega * sys.gamma_mec) / w + fano::chi_opt_inv(omega, g, delta, delta_d, fp)
}

/// S_rp^Fano[ω] = 2g²(|t_L[ω]|² + |t_R[ω]|²).
pub fn rp_spectrum_fano(omega: f64, g: f64, delta: f64, delta_d: f64, fp: &FanoParams) -> f64 {
    match fano::transfer(omega, delta, delta_d, fp) {
        Ok((tl, tr)) => 2.0 * g * g * (tl.norm_sqr() + tr.norm_sqr()),
        Err(_) => f64::INFINITY,
    }
}

/// Integrate the position and momentum spectra on `grid`.
pub fn integrate_spectrum(
    chi_inv: impl Fn(f64) -> Complex64,
    s_rp: impl Fn(f64) -> f64,
    sys: &SystemParams,
    grid: &SpectrumGrid,
) -> Result<SpectralResult, SpectralError> {
    let w2 = sys.omega_mec * sys.omega_mec;
    let f = |omega: f64| {
        let s = (thermal_spectrum(omega, sys) + s_rp(omega)) / chi_inv(omega).norm_sqr();
        let s = s / (2.0 * std::f64::consts::PI);
        [s, omega * omega / w2 * s]
    };
    let r = integrate(f, &grid.breakpoints, grid.tolerance())?;
    let (var_q, var_p) = (r.value[0], r.value[1]);
    Ok(SpectralResult { n_fin: (var_q + var_p - 1.0) / 2.0, var_q, var_p, error: (r.error[0] + r.error[1]) / 2.0 })
}

pub fn grid_standard(g: f64, delta: f64, sys: &SystemParams) -> SpectrumGrid {
    SpectrumGrid::from_drift(&standard::drift_diffusion(g, delta, sys), &[delta], &[], sys.n_mec)
}

pub fn spectral_standard(g: f64, delta: f64, sys: &SystemParams) -> Result<SpectralResult, SpectralError> {
    let st = standard::stability(g, delta, sys);
    if !st.stable {
        return Err(SpectralError::NotStable(st.s_rh));
    }
    let grid = grid_standard(g, delta, sys);
    integrate_spectrum(
        |w| chi_inv_standard(w, g, delta, sys),
        |w| rp_spectrum_standard(w, g, delta, sys),
        sys,
        &grid,
    )
}

pub fn nfin_spectral_standard(g: f64, delta: f64, sys: &SystemParams) -> Result<f64, SpectralError> {
    spectral_standard(g, delta, sys).map(|r| r.n_fin)
}

pub fn spectral_squeezed(
    g: f64,
    delta: f64,
    sys: &SystemParams,
    sq: &SqueezeParams,
) -> Result<SpectralResult, SpectralError> {
    let (rp, rm) = sq.decay_rates().ok_or(SpectralError::NotConfigured)?;
    let st = standard::stability(g, delta, sys);
    if !st.stable {
        return Err(SpectralError::NotStable(st.s_rh));
    }
    let grid = SpectrumGrid::from_drift(&standard::drift_diffusion(g, delta, sys), &[delta], &[rp, rm], sys.n_mec);
    integrate_spectrum(
        |w| chi_inv_standard(w, g, delta, sys),
        |w| rp_spectrum_squeezed(w, g, delta, sys, sq),
        sys,
        &grid,
    )
}

pub fn nfin_spectral_squeezed(g: f64, delta: f64, sys: &SystemParams, sq: &SqueezeParams) -> Result<f64, SpectralError> {
    spectral_squeezed(g, delta, sys, sq).map(|r| r.n_fin)
}

pub fn spectral_fano(
    g: f64,
    delta: f64,
    delta_d: f64,
    fp: &FanoParams,
    sys: &SystemParams,
) -> Result<SpectralResult, SpectralError> {
    let st = fano::fano_stability(g, delta, delta_d, fp, sys);
    let dd = fano::fano_drift_diffusion(g, delta, delta_d, fp, sys);
    if !st.stable || !dd.is_hurwitz() {
        return Err(SpectralError::NotStable(st.s_rh));
    }
    let grid = SpectrumGrid::from_drift(&dd, &[delta, delta_d], &[], sys.n_mec);
    integrate_spectrum(
        |w| chi_inv_fano(w, g, delta, delta_d, fp, sys),
        |w| rp_spectrum_fano(w, g, delta, delta_d, fp),
        sys,
        &grid,
    )
}

pub fn nfin_spectral_fano(
    g: f64,
    delta: f64,
    delta_d: f64,
    fp: &FanoParams,
    sys: &SystemParams,
) -> Result<f64, SpectralError> {
    spectral_fano(g, delta, delta_d, fp, sys).map(|r| r.n_fin)
}

/// n̄_fin from the four approximation routes at one cooperativity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxRow {
    pub c: f64,
    pub g: f64,
    pub weak_coupling: Option<f64>,
    pub white_noise_lyapunov: Option<f64>,
    pub rwa_lyapunov: Option<f64>,
    pub spectral_beyond_wna: Option<f64>,
    /// Why a method is missing at this point.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxComparison {
    pub setup: String,
    pub rows: Vec<ApproxRow>,
}

impl ApproxComparison {
    /// Largest relative spread between available methods at each row.
    pub fn max_spread(&self, row: &ApproxRow) -> f64 {
        let v: Vec<f64> = [row.weak_coupling, row.white_noise_lyapunov, row.rwa_lyapunov, row.spectral_beyond_wna]
            .into_iter()
            .flatten()
            .collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if v.is_empty() {
            f64::NAN
        } else {
            hi / lo - 1.0
        }
    }
}

fn lyap_nfin(dd: &DriftDiffusion) -> Result<f64, String> {
    solve_steady(dd).map(|v| (v.at(3, 3) + v.at(4, 4) - 1.0) / 2.0).map_err(|e| e.to_string())
}

/// Weak-coupling validity threshold on g/min(κ, Ω).
pub const WEAK_COUPLING_LIMIT: f64 = 1.0;

fn compare_point(sys: &SystemParams, setup: &SetupConfig, c: f64) -> ApproxRow {
    let g = crate::params::g_from_cooperativity(c, setup.cooperativity_linewidth(sys), sys.gamma_mec, sys.n_mec)
        .unwrap_or(f64::NAN);
    let mut notes = Vec::new();
    let mut keep = |name: &str, r: Result<f64, String>| match r {
        Ok(v) if v.is_finite() => Some(v),
        Ok(v) => {
            notes.push(format!("{name}: non-finite {v}"));
            None
        }
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    match setup {
        SetupConfig::Standard { detuning: d } | SetupConfig::Squeezed { detuning: d, .. } => {
            let d = *d;
            let sq = match setup {
                SetupConfig::Squeezed { squeeze, .. } => Some(*squeeze),
                _ => None,
            };
            let wc = standard::weak_coupling(g, d, sys);
            let weak = if wc.validity > WEAK_COUPLING_LIMIT {
                Err(format!("outside weak coupling (g/min(κ,Ω) = {:.3})", wc.validity))
            } else if wc.gamma_opt + sys.gamma_mec <= 0.0 {
                Err("effective damping not positive".to_string())
            } else {
                match sq {
                    None => Ok(wc.n_fin_wc),
                    Some(s) => {
                        let n_opt = squeezed::weak_coupling_nopt_squeezed(g, d, sys, &s);
                        Ok((sys.gamma_mec * sys.n_mec + wc.gamma_opt * n_opt) / (sys.gamma_mec + wc.gamma_opt))
                    }
                }
            };
            let weak_coupling = keep("weak", weak);
            let (full, rwa) = match sq {
                None => (standard::drift_diffusion(g, d, sys), standard::rwa_drift(g, d, sys)),
                Some(s) => {
                    let full = squeezed::diffusion_squeezed(g, d, sys, &s);
                    let mut rwa = standard::rwa_drift(g, d, sys);
                    rwa.b = full.b.clone();
                    (full, rwa)
                }
            };
            let white = keep("lyapunov", lyap_nfin(&full));
            let rwa = keep("rwa", lyap_nfin(&rwa));
            let spec = match sq {
                None => spectral_standard(g, d, sys),
                Some(s) => spectral_squeezed(g, d, sys, &s),
            };
            let spectral = keep("spectral", spec.map(|r| r.n_fin).map_err(|e| e.to_string()));
            ApproxRow {
                c,
                g,
                weak_coupling,
                white_noise_lyapunov: white,
                rwa_lyapunov: rwa,
                spectral_beyond_wna: spectral,
                notes,
            }
        }
        SetupConfig::Fano { fano: fp } => {
            let (d, dd) = (fp.detuning(), fp.detuning_d);
            let weak = fano::fano_sideband_rates(g, d, dd, fp, sys)
                .map_err(|e| e.to_string())
                .and_then(|(ap, am)| {
                    let gam = am - ap;
                    if sys.gamma_mec + gam > 0.0 {
                        Ok((sys.gamma_mec * sys.n_mec + ap) / (sys.gamma_mec + gam))
                    } else {
                        Err("effective damping not positive".into())
                    }
                });
            let weak_coupling = keep("weak", weak);
            let white = keep("lyapunov", lyap_nfin(&fano::fano_drift_diffusion(g, d, dd, fp, sys)));
            let rwa = keep("rwa", Err("no rotating-wave model for the mirror setup".into()));
            let spectral =
                keep("spectral", spectral_fano(g, d, dd, fp, sys).map(|r| r.n_fin).map_err(|e| e.to_string()));
            ApproxRow {
                c,
                g,
                weak_coupling,
                white_noise_lyapunov: white,
                rwa_lyapunov: rwa,
                spectral_beyond_wna: spectral,
                notes,
            }
        }
    }
}

/// All four methods at each cooperativity. Failures are recorded per point.
pub fn compare_methods(sys: &SystemParams, setup: &SetupConfig, cs: &[f64]) -> ApproxComparison {
    use rayon::prelude::*;
    let rows = cs.par_iter().map(|&c| compare_point(sys, setup, c)).collect();
    ApproxComparison { setup: setup.kind().name().to_string(), rows }
}
