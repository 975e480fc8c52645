//! Steady-state sideband cooling of a mechanical resonator in three optomechanical
//! setups: coherent drive, squeezed-light drive and a cavity closed by a Fano mirror.
//!
//! All rates and frequencies are angular (rad/s) inside the library. Config files and
//! the command line speak ordinary frequencies in Hz and convert on ingestion.

pub mod config;
pub mod constants;
pub mod fano;
pub mod lyapunov;
pub mod observables;
pub mod output;
pub mod params;
pub mod quad;
pub mod spectral;
pub mod squeezed;
pub mod standard;
pub mod sweep;

pub use lyapunov::{CovarianceMatrix, DriftDiffusion, LyapunovError, QuadratureOrder};
pub use params::{
    builtin_systems, BuiltinSystem, DrivePoint, FanoParams, SetupConfig, SqueezeParams,
    SystemParams,
};
