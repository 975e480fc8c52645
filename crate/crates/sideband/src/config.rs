//! TOML run configuration. Frequencies are in Hz, temperatures in K, lengths in m.
//!
//! ```toml
//! builtin = 1              # or a full [system] table
//!
//! [setup]
//! kind = "squeezed"        # standard | squeezed | fano
//! detuning = 1.0e6         # Hz, cavity detuning Δ/2π
//! purity = 1.0
//! ratio = 0.05
//! angle = 0.835            # rad
//! optimize_squeezing = false
//!
//! [sweep]
//! c_min = 1e-3
//! c_max = 300.0
//! points = 200
//! method = "lyapunov"
//! ```
//!
//! Unknown keys are rejected. Setup values not given fall back to the built-in
//! system's defaults, or are derived from the system when it is given explicitly.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::constants::hz;
use crate::params::{
    builtin, derive_fano_params, FanoParams, ParamError, SetupConfig, SetupKind, SqueezeParams, SystemSpec,
};
use crate::squeezed::{weak_coupling_angle, weak_coupling_ratio};
use crate::sweep::{CGrid, Method, SweepSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub builtin: Option<usize>,
    pub system: Option<SystemSpec>,
    pub setup: Option<SetupSection>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSection {
    pub kind: SetupKind,
    /// Hz. Cavity detuning for standard/squeezed.
    pub detuning: Option<f64>,
    pub purity: Option<f64>,
    pub ratio: Option<f64>,
    pub angle: Option<f64>,
    /// Hz.
    pub bandwidth: Option<f64>,
    pub reflected_fraction: Option<f64>,
    pub optimize_squeezing: Option<bool>,
    /// Hz.
    pub gamma_d: Option<f64>,
    /// Hz.
    pub kappa_l: Option<f64>,
    /// Hz.
    pub kappa_0: Option<f64>,
    /// Hz. Mirror detuning Δ_d/2π.
    pub detuning_d: Option<f64>,
    pub zeta0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub points: Option<usize>,
    pub method: Option<Method>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Resolve into a sweep specification. A `[sweep]` table with only some grid
    /// bounds given is completed from the default grid when the sweep runs.
    pub fn to_spec(&self) -> Result<SweepSpec, ConfigError> {
        let base = match (self.builtin, &self.system) {
            (Some(_), Some(_)) => return Err(ConfigError::Invalid("give either `builtin` or [system], not both".into())),
            (None, None) => return Err(ConfigError::Invalid("missing `builtin` or [system]".into())),
            (Some(i), None) => {
                Some(builtin(i).ok_or_else(|| ConfigError::Invalid(format!("unknown built-in system {i}")))?)
            }
            (None, Some(_)) => None,
        };
        let system = match (&base, &self.system) {
            (Some(b), _) => b.params.clone(),
            (None, Some(s)) => s.resolve()?,
            (None, None) => unreachable!(),
        };
        let kind = self.setup.as_ref().map_or(SetupKind::Standard, |s| s.kind);
        let empty = SetupSection::empty(kind);
        let sec = self.setup.as_ref().unwrap_or(&empty);
        sec.check_fields()?;
        let default_setup = base.as_ref().map(|b| *b.setup(kind));
        let detuning = sec
            .detuning
            .map(hz)
            .or(default_setup.map(|s| s.detuning()))
            .unwrap_or_else(|| system.default_detuning());
        let setup = match kind {
            SetupKind::Standard => SetupConfig::Standard { detuning },
            SetupKind::Squeezed => {
                let dflt = match default_setup {
                    Some(SetupConfig::Squeezed { squeeze, .. }) => squeeze,
                    _ => SqueezeParams::new(
                        1.0,
                        weak_coupling_ratio(detuning, &system),
                        weak_coupling_angle(detuning, &system),
                    )?,
                };
                let mut sq = SqueezeParams::new(
                    sec.purity.unwrap_or(dflt.purity),
                    sec.ratio.unwrap_or(dflt.ratio),
                    sec.angle.unwrap_or(dflt.angle),
                )?;
                if let Some(b) = sec.bandwidth {
                    sq = sq.with_bandwidth(hz(b))?;
                }
                if let Some(r) = sec.reflected_fraction {
                    sq = sq.with_reflected_fraction(r)?;
                }
                SetupConfig::Squeezed { detuning, squeeze: sq }
            }
            SetupKind::Fano => {
                let dflt = match default_setup {
                    Some(SetupConfig::Fano { fano }) => fano,
                    _ => derive_fano_params(&system)?,
                };
                let fano = FanoParams::new(
                    sec.gamma_d.map(hz).unwrap_or(dflt.gamma_d),
                    sec.kappa_l.map(hz).unwrap_or(dflt.kappa_l),
                    sec.kappa_0.map(hz).unwrap_or(dflt.kappa_0),
                    sec.detuning_d.map(hz).unwrap_or(dflt.detuning_d),
                    sec.zeta0.unwrap_or(dflt.zeta0),
                )?;
                SetupConfig::Fano { fano }
            }
        };
        let sw = self.sweep.clone().unwrap_or_default();
        let grid = match (sw.c_min, sw.c_max, sw.points) {
            (None, None, None) => None,
            (lo, hi, n) => {
                let d = crate::sweep::default_grid(&system, &setup);
                Some(CGrid { c_min: lo.unwrap_or(d.c_min), c_max: hi.unwrap_or(d.c_max), points: n.unwrap_or(d.points) })
            }
        };
        let spec = SweepSpec {
            system,
            system_index: self.builtin,
            setup,
            optimize_squeezing: kind == SetupKind::Squeezed && sec.optimize_squeezing.unwrap_or(true),
            grid,
            method: sw.method.unwrap_or(Method::Lyapunov),
        };
        spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

impl SetupSection {
    fn empty(kind: SetupKind) -> Self {
        SetupSection {
            kind,
            detuning: None,
            purity: None,
            ratio: None,
            angle: None,
            bandwidth: None,
            reflected_fraction: None,
            optimize_squeezing: None,
            gamma_d: None,
            kappa_l: None,
            kappa_0: None,
            detuning_d: None,
            zeta0: None,
        }
    }

    // Keys that belong to another setup are an error rather than silently ignored.
    fn check_fields(&self) -> Result<(), ConfigError> {
        let squeezed = [
            ("purity", self.purity.is_some()),
            ("ratio", self.ratio.is_some()),
            ("angle", self.angle.is_some()),
            ("bandwidth", self.bandwidth.is_some()),
            ("reflected_fraction", self.reflected_fraction.is_some()),
            ("optimize_squeezing", self.optimize_squeezing.is_some()),
        ];
        let fano = [
            ("gamma_d", self.gamma_d.is_some()),
            ("kappa_l", self.kappa_l.is_some()),
            ("kappa_0", self.kappa_0.is_some()),
            ("detuning_d", self.detuning_d.is_some()),
            ("zeta0", self.zeta0.is_some()),
        ];
        let stray: Vec<&str> = match self.kind {
            SetupKind::Standard => squeezed.iter().chain(fano.iter()).filter(|f| f.1).map(|f| f.0).collect(),
            SetupKind::Squeezed => fano.iter().filter(|f| f.1).map(|f| f.0).collect(),
            SetupKind::Fano => squeezed
                .iter()
                .chain([("detuning", self.detuning.is_some())].iter())
                .filter(|f| f.1)
                .map(|f| f.0)
                .collect(),
        };
        if stray.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(format!("keys not valid for the {} setup: {}", self.kind.name(), stray.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;

    #[test]
    fn builtin_defaults() {
        let spec = ConfigFile::parse("builtin = 2\n[setup]\nkind = \"fano\"\n").unwrap().to_spec().unwrap();
        assert_eq!(spec.setup, builtin(2).unwrap().fano);
        assert_eq!(spec.system_index, Some(2));
        assert!(spec.grid.is_none());
        assert_eq!(spec.method, Method::Lyapunov);
    }

    #[test]
    fn hz_conversion_and_overrides() {
        let text = r#"
builtin = 1
[setup]
kind = "squeezed"
detuning = 2.0e6
ratio = 0.1
optimize_squeezing = false
[sweep]
c_min = 1e-3
points = 10
method = "analytic"
"#;
        let spec = ConfigFile::parse(text).unwrap().to_spec().unwrap();
        let SetupConfig::Squeezed { detuning, squeeze } = spec.setup else { panic!() };
        assert_eq!(detuning, 2.0e6 * TWO_PI);
        assert_eq!(squeeze.ratio, 0.1);
        assert_eq!(squeeze.angle, 0.835);
        assert!(!spec.optimize_squeezing);
        let g = spec.grid.unwrap();
        assert_eq!((g.c_min, g.points), (1e-3, 10));
        assert_eq!(spec.method, Method::Analytic);
    }

    #[test]
    fn explicit_system() {
        let text = r#"
[system]
label = "custom"
omega_mec = 1e6
gamma_mec = 0.1
temp_mec = 4.0
lambda_las = 1550e-9
kappa = 2e5
cavity_length = 3.75e-3
g0 = 10.0
[setup]
kind = "fano"
detuning_d = 1e6
"#;
        let spec = ConfigFile::parse(text).unwrap().to_spec().unwrap();
        assert_eq!(spec.system.label, "custom");
        let SetupConfig::Fano { fano } = spec.setup else { panic!() };
        assert_eq!(fano.detuning_d, hz(1e6));
        assert!((fano.kappa_eff / spec.system.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            "builtin = 1\nbogus = 3\n",
            "builtin = 1\n[setup]\nkind = \"standard\"\nratio = 0.1\n",
            "builtin = 1\n[setup]\nkind = \"fano\"\ndetuning = 1e6\n",
            "builtin = 9\n",
            "",
            "builtin = 1\n[setup]\nkind = \"laser\"\n",
            "builtin = 1\n[sweep]\nc_min = -1.0\n",
            "builtin = 1\n[setup]\nkind = \"fano\"\n[sweep]\nmethod = \"analytic\"\n",
            "builtin = 1\n[setup]\nkind = \"squeezed\"\n[sweep]\nmethod = \"spectral\"\n",
            "builtin = 1\n[setup]\nkind = \"squeezed\"\nratio = 1.5\n",
        ];
        for text in bad {
            let r = ConfigFile::parse(text).and_then(|c| c.to_spec());
            assert!(r.is_err(), "accepted: {text:?}");
        }
    }
}
