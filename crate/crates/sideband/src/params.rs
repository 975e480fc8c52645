//! System parameters, unit handling and the four reference platforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{hz, C_LIGHT, HBAR, K_B, TWO_PI};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("missing parameter: {0}")]
    Missing(&'static str),
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

/// Bose-Einstein occupation at angular frequency `omega` and temperature `temp`.
pub fn n_thermal(omega: f64, temp: f64) -> Result<f64, ParamError> {
    positive("omega", omega)?;
    positive("temperature", temp)?;
    Ok(1.0 / (HBAR * omega / (K_B * temp)).exp_m1())
}

/// Inverse of [`n_thermal`].
pub fn temperature_from_n(omega: f64, n: f64) -> Result<f64, ParamError> {
    positive("omega", omega)?;
    positive("occupation", n)?;
    Ok(HBAR * omega / (K_B * (1.0 / n).ln_1p()))
}

/// C = 2g²/(κγn̄). Pass κ_eff for the Fano setup.
pub fn cooperativity(g: f64, kappa_or_eff: f64, gamma: f64, n_mec: f64) -> f64 {
    2.0 * g * g / (kappa_or_eff * gamma * n_mec)
}

pub fn g_from_cooperativity(
    c: f64,
    kappa_or_eff: f64,
    gamma: f64,
    n_mec: f64,
) -> Result<f64, ParamError> {
    for (name, v) in [
        ("cooperativity", c),
        ("kappa", kappa_or_eff),
        ("gamma", gamma),
        ("n_mec", n_mec),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(ParamError::OutOfRange { name, value: v });
        }
    }
    Ok((c * kappa_or_eff * gamma * n_mec / 2.0).sqrt())
}

/// User-facing description of a platform in Table-style units: Hz, K and m.
/// Exactly one of `temp_mec`/`n_mec`, at least one of `lambda_las`/`omega_las` and at
/// least one of `cavity_length`/`fsr` must be given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub label: Option<String>,
    pub omega_mec: f64,
    pub gamma_mec: f64,
    pub temp_mec: Option<f64>,
    pub n_mec: Option<f64>,
    pub lambda_las: Option<f64>,
    pub omega_las: Option<f64>,
    pub kappa: f64,
    pub cavity_length: Option<f64>,
    pub fsr: Option<f64>,
    /// Group index of the cavity medium used in Γ = πc/(n L). Defaults to 1.
    pub refractive_index: Option<f64>,
    pub g0: f64,
}

/// One optomechanical platform, everything angular.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub label: String,
    pub omega_mec: f64,
    pub gamma_mec: f64,
    pub temp_mec: f64,
    pub n_mec: f64,
    pub lambda_las: f64,
    pub omega_las: f64,
    pub kappa: f64,
    pub cavity_length: Option<f64>,
    pub fsr: Option<f64>,
    pub refractive_index: f64,
    pub g0: f64,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Below this Q the white-noise treatment of the mechanical bath is flagged.
pub const Q_WARNING_THRESHOLD: f64 = 100.0;

impl SystemSpec {
    pub fn resolve(&self) -> Result<SystemParams, ParamError> {
        let mut warnings = Vec::new();
        let omega_mec = hz(positive("omega_mec", self.omega_mec)?);
        let gamma_mec = hz(positive("gamma_mec", self.gamma_mec)?);
        let kappa = hz(positive("kappa", self.kappa)?);
        let g0 = hz(positive("g0", self.g0)?);

        let (temp_mec, n_mec) = match (self.temp_mec, self.n_mec) {
            (None, None) => return Err(ParamError::Missing("temp_mec or n_mec")),
            (Some(t), None) => (t, n_thermal(omega_mec, t)?),
            (None, Some(n)) => (temperature_from_n(omega_mec, n)?, n),
            (Some(t), Some(n)) => {
                let t_from_n = temperature_from_n(omega_mec, n)?;
                let n_from_t = n_thermal(omega_mec, t)?;
                if ((n_from_t - n) / n).abs() > 0.05 {
                    let msg = format!(
                        "n_mec = {n} disagrees with temp_mec = {t} K (which gives {n_from_t:.4e}); using n_mec"
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
                (t_from_n, n)
            }
        };

        let (lambda_las, omega_las) = match (self.lambda_las, self.omega_las) {
            (None, None) => return Err(ParamError::Missing("lambda_las or omega_las")),
            (Some(l), None) => {
                let l = positive("lambda_las", l)?;
                (l, TWO_PI * C_LIGHT / l)
            }
            (None, Some(nu)) => {
                let w = hz(positive("omega_las", nu)?);
                (TWO_PI * C_LIGHT / w, w)
            }
            (Some(l), Some(nu)) => {
                let l = positive("lambda_las", l)?;
                let w = hz(positive("omega_las", nu)?);
                let derived = TWO_PI * C_LIGHT / l;
                if ((derived - w) / w).abs() > 0.01 {
                    return Err(ParamError::Inconsistent(format!(
                        "lambda_las = {l} m implies {:.6e} Hz, omega_las = {nu} Hz",
                        derived / TWO_PI
                    )));
                }
                (l, w)
            }
        };

        let refractive_index = positive("refractive_index", self.refractive_index.unwrap_or(1.0))?;
        let cavity_length = self.cavity_length.map(|l| positive("cavity_length", l)).transpose()?;
        let fsr = match (cavity_length, self.fsr) {
            (None, None) => None,
            (Some(l), None) => Some(std::f64::consts::PI * C_LIGHT / (refractive_index * l)),
            (l, Some(nu)) => {
                let f = hz(positive("fsr", nu)?);
                if let Some(l) = l {
                    let derived = std::f64::consts::PI * C_LIGHT / (refractive_index * l);
                    if ((derived - f) / f).abs() > 0.01 {
                        return Err(ParamError::Inconsistent(format!(
                            "cavity_length = {l} m gives a free spectral range of {:.6e} Hz, fsr = {nu} Hz",
                            derived / TWO_PI
                        )));
                    }
                }
                Some(f)
            }
        };

        if omega_mec / gamma_mec < Q_WARNING_THRESHOLD {
            let msg = format!(
                "Q_mec = {:.3} < {Q_WARNING_THRESHOLD}: white-noise mechanical bath unreliable",
                omega_mec / gamma_mec
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }

        Ok(SystemParams {
            label: self.label.clone().unwrap_or_else(|| "custom".to_string()),
            omega_mec,
            gamma_mec,
            temp_mec,
            n_mec,
            lambda_las,
            omega_las,
            kappa,
            cavity_length,
            fsr,
            refractive_index,
            g0,
            warnings,
        })
    }
}

impl SystemParams {
    /// Build directly from angular rates, bypassing the Hz-based spec. Handy for
    /// programmatic scans; no cavity geometry is attached.
    pub fn from_rates(
        omega_mec: f64,
        gamma_mec: f64,
        n_mec: f64,
        kappa: f64,
        omega_las: f64,
        g0: f64,
    ) -> Result<Self, ParamError> {
        positive("omega_mec", omega_mec)?;
        positive("gamma_mec", gamma_mec)?;
        positive("kappa", kappa)?;
        positive("omega_las", omega_las)?;
        positive("g0", g0)?;
        let temp_mec = temperature_from_n(omega_mec, n_mec)?;
        Ok(SystemParams {
            label: "custom".into(),
            omega_mec,
            gamma_mec,
            temp_mec,
            n_mec,
            lambda_las: TWO_PI * C_LIGHT / omega_las,
            omega_las,
            kappa,
            cavity_length: None,
            fsr: None,
            refractive_index: 1.0,
            g0,
            warnings: Vec::new(),
        })
    }

    pub fn sideband_resolution(&self) -> f64 {
        self.omega_mec / self.kappa
    }

    pub fn q_mec(&self) -> f64 {
        self.omega_mec / self.gamma_mec
    }

    pub fn resolved_sideband(&self) -> bool {
        self.omega_mec > self.kappa
    }

    pub fn g_from_cooperativity(&self, c: f64) -> Result<f64, ParamError> {
        g_from_cooperativity(c, self.kappa, self.gamma_mec, self.n_mec)
    }

    pub fn cooperativity(&self, g: f64) -> f64 {
        cooperativity(g, self.kappa, self.gamma_mec, self.n_mec)
    }

    /// Default detuning of the coherent and squeezed setups: Ω in the resolved-sideband
    /// regime, κ otherwise.
    pub fn default_detuning(&self) -> f64 {
        if self.resolved_sideband() {
            self.omega_mec
        } else {
            self.kappa
        }
    }

    pub fn fsr(&self) -> Result<f64, ParamError> {
        self.fsr.ok_or(ParamError::Missing("fsr or cavity_length"))
    }
}

/// Drive-side description of an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrivePoint {
    pub detuning: f64,
    pub g: f64,
    pub cooperativity: f64,
    pub alpha: f64,
    pub epsilon_mag: f64,
    pub p_las: f64,
}

/// P = ħω_las|ε|²/(2κ).
pub fn laser_power(omega_las: f64, epsilon_mag: f64, kappa: f64) -> f64 {
    HBAR * omega_las * epsilon_mag * epsilon_mag / (2.0 * kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    pub purity: f64,
    pub ratio: f64,
    pub angle: f64,
    pub bandwidth: Option<f64>,
    pub reflected_fraction: f64,
}

impl SqueezeParams {
    pub fn new(purity: f64, ratio: f64, angle: f64) -> Result<Self, ParamError> {
        if !(0.0..=1.0).contains(&purity) {
            return Err(ParamError::OutOfRange { name: "purity", value: purity });
        }
        if !(0.0..1.0).contains(&ratio) {
            return Err(ParamError::OutOfRange { name: "ratio", value: ratio });
        }
        if !angle.is_finite() {
            return Err(ParamError::OutOfRange { name: "angle", value: angle });
        }
        Ok(Self { purity, ratio, angle, bandwidth: None, reflected_fraction: 1.0 })
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Result<Self, ParamError> {
        positive("bandwidth", bandwidth)?;
        self.bandwidth = Some(bandwidth);
        Ok(self)
    }

    pub fn with_reflected_fraction(mut self, r: f64) -> Result<Self, ParamError> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(ParamError::OutOfRange { name: "reflected_fraction", value: r });
        }
        self.reflected_fraction = r;
        Ok(self)
    }

    /// Decay rates (r₊, r₋) = ϰ(1 ± r_s) of the anti-squeezed and squeezed quadratures.
    pub fn decay_rates(&self) -> Option<(f64, f64)> {
        self.bandwidth
            .map(|b| (b * (1.0 + self.ratio), b * (1.0 - self.ratio)))
    }
}

/// Squeezing below shot noise, −10·log₁₀(2·var) with var = N_s + 1/2 − |M_s|.
pub fn squeezing_level_db(params: &SqueezeParams) -> f64 {
    let m = crate::squeezed::squeeze_moments_unchecked(params.ratio);
    let var = m.n_s + 0.5 - m.m_abs;
    -10.0 * (2.0 * var).log10()
}

/// Fano-mirror parameters. κ_eff = γ_d/ζ₀² is fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    pub gamma_d: f64,
    pub kappa_l: f64,
    pub kappa_0: f64,
    pub detuning_d: f64,
    pub zeta0: f64,
    pub kappa_eff: f64,
}

impl FanoParams {
    pub fn new(
        gamma_d: f64,
        kappa_l: f64,
        kappa_0: f64,
        detuning_d: f64,
        zeta0: f64,
    ) -> Result<Self, ParamError> {
        positive("gamma_d", gamma_d)?;
        positive("kappa_L", kappa_l)?;
        positive("kappa_0", kappa_0)?;
        positive("zeta0", zeta0)?;
        if !detuning_d.is_finite() {
            return Err(ParamError::OutOfRange { name: "detuning_d", value: detuning_d });
        }
        Ok(Self { gamma_d, kappa_l, kappa_0, detuning_d, zeta0, kappa_eff: gamma_d / (zeta0 * zeta0) })
    }

    /// Total loss rate κ = κ_L + κ₀ of the cavity mode.
    pub fn kappa(&self) -> f64 {
        self.kappa_l + self.kappa_0
    }

    /// G = i√(κ₀γ_d) + √(κ_Lγ_d).
    pub fn coupling(&self) -> Complex64 {
        Complex64::new((self.kappa_l * self.gamma_d).sqrt(), (self.kappa_0 * self.gamma_d).sqrt())
    }

    /// Cavity detuning implied by the mirror detuning: Δ = Δ_d + 2√(κ₀κ_L).
    pub fn detuning(&self) -> f64 {
        self.detuning_d + 2.0 * (self.kappa_0 * self.kappa_l).sqrt()
    }

    /// Same parameters with Δ_d back-computed from a cavity detuning Δ.
    pub fn with_cavity_detuning(mut self, delta: f64) -> Self {
        self.detuning_d = delta - 2.0 * (self.kappa_0 * self.kappa_l).sqrt();
        self
    }

    pub fn with_detuning_d(mut self, detuning_d: f64) -> Self {
        self.detuning_d = detuning_d;
        self
    }
}

/// Default mirror detuning: Ω in the resolved-sideband regime, the optimal ratio
/// ≈ 2.5054·Ω otherwise.
pub fn default_fano_detuning(sys: &SystemParams) -> f64 {
    if sys.resolved_sideband() {
        sys.omega_mec
    } else {
        crate::fano::optimal_detuning_unresolved() * sys.omega_mec
    }
}

/// Fano parameters such that κ_eff equals the system's κ with γ_d at its optimum
/// 4Ωζ₀: ζ₀ = 4Ω/κ, γ_d = 16Ω²/κ, κ_L = 2Γ, κ₀ = Γ/(2ζ₀²).
pub fn derive_fano_params(sys: &SystemParams) -> Result<FanoParams, ParamError> {
    let fsr = sys.fsr()?;
    let zeta0 = 4.0 * sys.omega_mec / sys.kappa;
    let gamma_d = 16.0 * sys.omega_mec * sys.omega_mec / sys.kappa;
    FanoParams::new(
        gamma_d,
        2.0 * fsr,
        fsr / (2.0 * zeta0 * zeta0),
        default_fano_detuning(sys),
        zeta0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetupKind {
    Standard,
    Squeezed,
    Fano,
}

impl SetupKind {
    pub const ALL: [SetupKind; 3] = [SetupKind::Standard, SetupKind::Squeezed, SetupKind::Fano];

    pub fn name(self) -> &'static str {
        match self {
            SetupKind::Standard => "standard",
            SetupKind::Squeezed => "squeezed",
            SetupKind::Fano => "fano",
        }
    }
}

impl std::str::FromStr for SetupKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(SetupKind::Standard),
            "squeezed" => Ok(SetupKind::Squeezed),
            "fano" => Ok(SetupKind::Fano),
            other => Err(format!("unknown setup '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "setup", rename_all = "lowercase")]
pub enum SetupConfig {
    Standard { detuning: f64 },
    Squeezed { detuning: f64, squeeze: SqueezeParams },
    Fano { fano: FanoParams },
}

impl SetupConfig {
    pub fn kind(&self) -> SetupKind {
        match self {
            SetupConfig::Standard { .. } => SetupKind::Standard,
            SetupConfig::Squeezed { .. } => SetupKind::Squeezed,
            SetupConfig::Fano { .. } => SetupKind::Fano,
        }
    }

    /// Cavity detuning Δ (for Fano, implied by Δ_d).
    pub fn detuning(&self) -> f64 {
        match self {
            SetupConfig::Standard { detuning } | SetupConfig::Squeezed { detuning, .. } => *detuning,
            SetupConfig::Fano { fano } => fano.detuning(),
        }
    }

    /// Linewidth entering the cooperativity: κ, or κ_eff for the Fano setup.
    pub fn cooperativity_linewidth(&self, sys: &SystemParams) -> f64 {
        match self {
            SetupConfig::Fano { fano } => fano.kappa_eff,
            _ => sys.kappa,
        }
    }
}

/// A reference platform together with its default configuration for each setup.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinSystem {
    pub index: usize,
    pub params: SystemParams,
    pub standard: SetupConfig,
    pub squeezed: SetupConfig,
    pub fano: SetupConfig,
}

impl BuiltinSystem {
    pub fn setup(&self, kind: SetupKind) -> &SetupConfig {
        match kind {
            SetupKind::Standard => &self.standard,
            SetupKind::Squeezed => &self.squeezed,
            SetupKind::Fano => &self.fano,
        }
    }
}

struct Row {
    label: &'static str,
    omega_mec: f64,
    gamma_mec: f64,
    temp: f64,
    lambda: f64,
    kappa: f64,
    length: f64,
    fsr: f64,
    index: f64,
    g0: f64,
    theta: f64,
    ratio: f64,
    gamma_d: f64,
    kappa_l: f64,
    kappa_r: f64,
}

// Hz, K and m. The GHz photonic-crystal cavity needs the silicon index for its free
// spectral range to match the tabulated one.
const TABLE: [Row; 4] = [
    Row {
        label: "mhz-membrane",
        omega_mec: 1e6,
        gamma_mec: 0.1,
        temp: 4.0,
        lambda: 1550e-9,
        kappa: 2e5,
        length: 3.75e-3,
        fsr: 4.0e10,
        index: 1.0,
        g0: 10.0,
        theta: 0.835,
        ratio: 0.050,
        gamma_d: 8.0e7,
        kappa_l: 8.0e10,
        kappa_r: 5.0e7,
    },
    Row {
        label: "ghz-crystal",
        omega_mec: 3.7e9,
        gamma_mec: 3.5e4,
        temp: 20.0,
        lambda: 1537e-9,
        kappa: 5e8,
        length: 3e-6,
        fsr: 1.44e13,
        index: 3.476,
        g0: 9.1e5,
        theta: 0.819,
        ratio: 0.034,
        gamma_d: 4.38e11,
        kappa_l: 2.88e13,
        kappa_r: 8.22e9,
    },
    Row {
        label: "levitated",
        omega_mec: 3.05e5,
        gamma_mec: 1.6e-4,
        temp: 300.0,
        lambda: 1064e-9,
        kappa: 1.93e5,
        length: 1.07e-2,
        fsr: 1.40e10,
        index: 1.0,
        g0: 0.3,
        theta: 0.939,
        ratio: 0.154,
        gamma_d: 7.71e6,
        kappa_l: 2.80e10,
        kappa_r: 1.75e8,
    },
    Row {
        label: "unresolved",
        omega_mec: 1.14e6,
        gamma_mec: 1.1e-3,
        temp: 10.0,
        lambda: 795e-9,
        kappa: 1.59e7,
        length: 1.6e-3,
        fsr: 9.38e10,
        index: 1.0,
        g0: 129.0,
        theta: 1.11,
        ratio: 0.711,
        gamma_d: 1.31e6,
        kappa_l: 1.88e11,
        kappa_r: 5.70e11,
    },
];

/// The four reference platforms (1–4) with their default setups.
pub fn builtin_systems() -> Vec<BuiltinSystem> {
    TABLE
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let spec = SystemSpec {
                label: Some(r.label.to_string()),
                omega_mec: r.omega_mec,
                gamma_mec: r.gamma_mec,
                temp_mec: Some(r.temp),
                lambda_las: Some(r.lambda),
                kappa: r.kappa,
                cavity_length: Some(r.length),
                fsr: Some(r.fsr),
                refractive_index: Some(r.index),
                g0: r.g0,
                ..Default::default()
            };
            let params = spec.resolve().expect("built-in table is consistent");
            let detuning = params.default_detuning();
            let squeeze = SqueezeParams::new(1.0, r.ratio, r.theta).expect("valid table squeezing");
            // γ_d = 4Ωζ₀ fixes ζ₀ from the tabulated mirror linewidth.
            let gamma_d = hz(r.gamma_d);
            let zeta0 = gamma_d / (4.0 * params.omega_mec);
            let fano = FanoParams::new(
                gamma_d,
                hz(r.kappa_l),
                hz(r.kappa_r),
                default_fano_detuning(&params),
                zeta0,
            )
            .expect("valid table Fano parameters");
            BuiltinSystem {
                index: i + 1,
                standard: SetupConfig::Standard { detuning },
                squeezed: SetupConfig::Squeezed { detuning, squeeze },
                fano: SetupConfig::Fano { fano },
                params,
            }
        })
        .collect()
}

/// Look up a reference platform by its 1-based index.
pub fn builtin(index: usize) -> Option<BuiltinSystem> {
    builtin_systems().into_iter().nth(index.checked_sub(1)?)
}
