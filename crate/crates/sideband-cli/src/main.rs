//! `sideband` command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sideband::config::ConfigFile;
use sideband::constants::{hz, to_hz};
use sideband::output::{render, OutputFormat, SweepRun};
use sideband::params::{builtin_systems, SetupConfig, SetupKind};
use sideband::spectral::compare_methods;
use sideband::sweep::{
    critical_cooperativity, default_grid, half_cooperativity, optimize, reproduce, run_sweep, CGrid, Method,
    ReproduceTarget, SweepSpec,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_REPRODUCE: u8 = 4;

/// Steady-state sideband cooling sweeps for the standard, squeezed and Fano setups.
#[derive(Parser)]
#[command(name = "sideband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in systems.
    Systems {
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
    },
    /// Sweep the cooperativity on a log grid.
    Sweep(SweepArgs),
    /// Minimise the final phonon number.
    Optimize(OptimizeArgs),
    /// Recompute the reference tables and compare with the stored values.
    Reproduce {
        #[arg(value_enum, default_value_t = TargetArg::All)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
    },
    /// n_fin from the four approximation routes side by side.
    CompareApprox(CompareArgs),
}

#[derive(Args, Clone)]
struct Selection {
    /// Built-in system 1-4.
    #[arg(long, conflicts_with = "config")]
    system: Option<usize>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Setup to run; `all` runs the three setups of a built-in system.
    #[arg(long, value_enum)]
    setup: Option<SetupArg>,
    /// Cavity detuning Δ/2π in Hz (mirror detuning Δ_d/2π for the Fano setup).
    #[arg(long)]
    detuning_hz: Option<f64>,
    /// Squeezing parameters: `optimal` re-optimises (θ, r_s) at every point, `fixed`
    /// keeps the configured values.
    #[arg(long, value_enum)]
    squeeze: Option<SqueezeArg>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    cmin: Option<f64>,
    #[arg(long)]
    cmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    sel: Selection,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    sel: Selection,
    /// Also optimise the detuning (Δ, or Δ_d for the Fano setup).
    #[arg(long)]
    free_detuning: bool,
    /// Grid points of the inner cooperativity search.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
    format: TextOrJson,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    sel: Selection,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
    format: TextOrJson,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetupArg {
    Standard,
    Squeezed,
    Fano,
    All,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SqueezeArg {
    Optimal,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lyapunov,
    Analytic,
    Spectral,
    Weak,
    Rwa,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lyapunov => Method::Lyapunov,
            MethodArg::Analytic => Method::Analytic,
            MethodArg::Spectral => Method::Spectral,
            MethodArg::Weak => Method::Weak,
            MethodArg::Rwa => Method::Rwa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Gnuplot,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Gnuplot => OutputFormat::Gnuplot,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Table1MinNfin,
    Table2Reldiff,
    Quadratures,
    ApproxCompare,
    All,
}

enum Failure {
    Config(String),
    Other(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Config(m) => {
                eprintln!("error: {m}");
                ExitCode::from(EXIT_CONFIG)
            }
            Failure::Other(m) => {
                eprintln!("error: {m}");
                ExitCode::FAILURE
            }
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn with_detuning_hz(setup: SetupConfig, d: f64) -> SetupConfig {
    match setup {
        SetupConfig::Standard { .. } => SetupConfig::Standard { detuning: hz(d) },
        SetupConfig::Squeezed { squeeze, .. } => SetupConfig::Squeezed { detuning: hz(d), squeeze },
        SetupConfig::Fano { fano } => SetupConfig::Fano { fano: fano.with_detuning_d(hz(d)) },
    }
}

/// Resolve the selection into one spec per requested setup.
fn specs(sel: &Selection) -> Result<Vec<SweepSpec>, Failure> {
    let mut out = match (&sel.config, sel.system) {
        (Some(path), _) => {
            if sel.setup.is_some() {
                return Err(config_err("--setup cannot be combined with --config; set [setup] kind in the file"));
            }
            vec![ConfigFile::load(path).and_then(|c| c.to_spec()).map_err(config_err)?]
        }
        (None, idx) => {
            let idx = idx.unwrap_or(1);
            let kinds: Vec<SetupKind> = match sel.setup.unwrap_or(SetupArg::Standard) {
                SetupArg::Standard => vec![SetupKind::Standard],
                SetupArg::Squeezed => vec![SetupKind::Squeezed],
                SetupArg::Fano => vec![SetupKind::Fano],
                SetupArg::All => SetupKind::ALL.to_vec(),
            };
            kinds
                .into_iter()
                .map(|k| SweepSpec::builtin(idx, k).map_err(config_err))
                .collect::<Result<_, _>>()?
        }
    };
    for spec in &mut out {
        if let Some(d) = sel.detuning_hz {
            if !d.is_finite() {
                return Err(config_err(format!("detuning must be finite, got {d}")));
            }
            spec.setup = with_detuning_hz(spec.setup, d);
        }
        if let Some(s) = sel.squeeze {
            spec.optimize_squeezing = spec.setup.kind() == SetupKind::Squeezed && s == SqueezeArg::Optimal;
        }
    }
    Ok(out)
}

fn apply_grid(spec: &mut SweepSpec, g: &GridArgs) {
    if g.cmin.is_none() && g.cmax.is_none() && g.points.is_none() {
        return;
    }
    let base = spec.grid.unwrap_or_else(|| default_grid(&spec.system, &spec.setup));
    spec.grid = Some(CGrid {
        c_min: g.cmin.unwrap_or(base.c_min),
        c_max: g.cmax.unwrap_or(base.c_max),
        points: g.points.unwrap_or(base.points),
    });
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Other(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Other(e.to_string()))
        }
    }
}

fn cmd_systems(format: TextOrJson) -> Result<ExitCode, Failure> {
    let systems = builtin_systems();
    if format == TextOrJson::Json {
        let v: Vec<_> = systems
            .iter()
            .map(|b| {
                serde_json::json!({
                    "index": b.index,
                    "params": b.params,
                    "standard": b.standard,
                    "squeezed": b.squeezed,
                    "fano": b.fano,
                })
            })
            .collect();
        emit(&None, &(serde_json::to_string_pretty(&v).expect("plain data") + "\n"))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut s = String::new();
    s.push_str("#  label             Ω/2π [Hz]   γ/2π [Hz]   T [K]    n̄_mec       κ/2π [Hz]   g0/2π [Hz]  resolved  C_crit\n");
    for b in &systems {
        let p = &b.params;
        let cc = critical_cooperativity(p, &b.standard).map_or("none".to_string(), |c| format!("{c:.4e}"));
        s.push_str(&format!(
            "{}  {:<16}  {:<10.4e}  {:<10.4e}  {:<7}  {:<10.4e}  {:<10.4e}  {:<10.4e}  {:<8}  {}\n",
            b.index,
            p.label,
            to_hz(p.omega_mec),
            to_hz(p.gamma_mec),
            p.temp_mec,
            p.n_mec,
            to_hz(p.kappa),
            to_hz(p.g0),
            p.resolved_sideband(),
            cc
        ));
    }
    emit(&None, &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode, Failure> {
    let mut runs = Vec::new();
    for mut spec in specs(&a.sel)? {
        apply_grid(&mut spec, &a.grid);
        if let Some(m) = a.method {
            spec.method = m.into();
        }
        let result = run_sweep(&spec).map_err(config_err)?;
        if let Some(c) = result.cutoff_c {
            log::info!("{} {}: stable up to C = {c:e}", result.label, result.setup.name());
        }
        runs.push(SweepRun { spec, result });
    }
    emit(&a.out, &render(a.format.into(), &runs))?;
    let all_unstable = runs.iter().all(|r| r.result.unstable_points == r.result.rows.len());
    if all_unstable {
        eprintln!("warning: every grid point is past the stability threshold");
        return Ok(ExitCode::from(EXIT_UNSTABLE));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(a: OptimizeArgs) -> Result<ExitCode, Failure> {
    if a.points < 2 {
        return Err(config_err("--points must be at least 2"));
    }
    let mut found = Vec::new();
    for spec in specs(&a.sel)? {
        let o = optimize(&spec.system, &spec.setup, a.free_detuning, a.points).map_err(|e| Failure::Other(e.to_string()))?;
        found.push((spec, o));
    }
    if a.format == TextOrJson::Json {
        let v: Vec<_> = found.iter().map(|(_, o)| o).collect();
        emit(&None, &(serde_json::to_string_pretty(&v).expect("plain data") + "\n"))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut s = String::new();
    for (spec, o) in &found {
        s.push_str(&format!("{} {}\n", spec.system.label, o.setup.name()));
        s.push_str(&format!("  n_fin        {:.6e}\n", o.n_fin));
        s.push_str(&format!("  C            {:.6e}\n", o.c));
        s.push_str(&format!("  g/2π [Hz]    {:.6e}\n", to_hz(o.g)));
        s.push_str(&format!("  Δ/2π [Hz]    {:.6e}  (Δ/Ω = {:.4})\n", to_hz(o.detuning), o.detuning / spec.system.omega_mec));
        if let Some(d) = o.detuning_d {
            s.push_str(&format!("  Δ_d/2π [Hz]  {:.6e}  (Δ_d/Ω = {:.4})\n", to_hz(d), d / spec.system.omega_mec));
        }
        if let (Some(t), Some(r)) = (o.theta, o.ratio) {
            s.push_str(&format!("  θ*, r_s*     {t:.4}, {r:.4}  (small-C limit)\n"));
        }
        if let (Some(t), Some(r)) = (o.theta_at_opt, o.ratio_at_opt) {
            s.push_str(&format!("  θ*, r_s*     {t:.4}, {r:.4}  (at the optimum)\n"));
        }
        for n in &o.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
    }
    emit(&None, &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce(target: TargetArg, format: TextOrJson) -> Result<ExitCode, Failure> {
    let targets: Vec<ReproduceTarget> = match target {
        TargetArg::Table1MinNfin => vec![ReproduceTarget::Table1MinNfin],
        TargetArg::Table2Reldiff => vec![ReproduceTarget::Table2Reldiff],
        TargetArg::Quadratures => vec![ReproduceTarget::Quadratures],
        TargetArg::ApproxCompare => vec![ReproduceTarget::ApproxCompare],
        TargetArg::All => ReproduceTarget::ALL.to_vec(),
    };
    let reports: Vec<_> = targets.into_iter().map(reproduce).collect();
    if format == TextOrJson::Json {
        emit(&None, &(serde_json::to_string_pretty(&reports).expect("plain data") + "\n"))?;
    } else {
        let mut s = String::new();
        for r in &reports {
            s.push_str(&format!("{}\n", r.target));
            for e in &r.entries {
                let expected = e.expected.map_or("-".to_string(), |x| format!("{x}"));
                s.push_str(&format!(
                    "  {} {:<50} computed {:<12.6} expected {:<8} ({})\n",
                    if e.pass { "PASS" } else { "FAIL" },
                    e.name,
                    e.computed,
                    expected,
                    e.tolerance
                ));
            }
        }
        emit(&None, &s)?;
    }
    if reports.iter().all(|r| r.all_pass()) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_REPRODUCE))
    }
}

fn cmd_compare(a: CompareArgs) -> Result<ExitCode, Failure> {
    let mut all = Vec::new();
    for mut spec in specs(&a.sel)? {
        let half = half_cooperativity(&spec.system, &spec.setup);
        let top = critical_cooperativity(&spec.system, &spec.setup).map_or(1e4 * half, |c| 0.999 * c);
        spec.grid = Some(CGrid { c_min: 1e-3 * half, c_max: top, points: 12 });
        apply_grid(&mut spec, &a.grid);
        let grid = spec.grid.expect("set above");
        grid.validate().map_err(config_err)?;
        let cmp = compare_methods(&spec.system, &spec.setup, &grid.values());
        all.push((spec.system.label.clone(), cmp));
    }
    let text = if a.format == TextOrJson::Json {
        let v: Vec<_> = all.iter().map(|(l, c)| serde_json::json!({"label": l, "comparison": c})).collect();
        serde_json::to_string_pretty(&v).expect("plain data") + "\n"
    } else {
        let mut s = String::new();
        for (label, cmp) in &all {
            s.push_str(&format!("# {label} {}\n", cmp.setup));
            s.push_str("c,weak_coupling,white_noise_lyapunov,rwa_lyapunov,spectral_beyond_wna,spread\n");
            let f = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:?}"));
            for r in &cmp.rows {
                s.push_str(&format!(
                    "{:?},{},{},{},{},{:?}\n",
                    r.c,
                    f(r.weak_coupling),
                    f(r.white_noise_lyapunov),
                    f(r.rwa_lyapunov),
                    f(r.spectral_beyond_wna),
                    cmp.max_spread(r)
                ));
            }
        }
        s
    };
    emit(&a.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("SIDEBAND_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| config_err(format!("SIDEBAND_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<ExitCode, Failure> {
        init_threads()?;
        match cli.command {
            Command::Systems { format } => cmd_systems(format),
            Command::Sweep(a) => cmd_sweep(a),
            Command::Optimize(a) => cmd_optimize(a),
            Command::Reproduce { target, format } => cmd_reproduce(target, format),
            Command::CompareApprox(a) => cmd_compare(a),
        }
    };
    run().unwrap_or_else(Failure::report)
}
