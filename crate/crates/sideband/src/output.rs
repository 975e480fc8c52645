//! CSV, JSON and gnuplot writers for sweep results.
//!
//! CSV: `#` metadata lines, then the fixed header [`CSV_COLUMNS`], LF line endings,
//! comma separated. Floats use Rust's shortest round-trip formatting; missing
//! observables are empty fields.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sweep::{SweepResult, SweepRow, SweepSpec, CSV_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Gnuplot,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "gnuplot" => Ok(OutputFormat::Gnuplot),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// A finished sweep together with the spec that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub spec: SweepSpec,
    pub result: SweepResult,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>, missing: &str) -> String {
    x.map_or_else(|| missing.to_string(), num)
}

fn fields(r: &SweepRow, missing: &str) -> [String; 13] {
    [
        num(r.c),
        num(r.g),
        num(r.p_las),
        opt(r.n_fin, missing),
        opt(r.j_c, missing),
        opt(r.eta_l, missing),
        opt(r.eta_l_prime, missing),
        opt(r.eta_c, missing),
        opt(r.eta_c_prime, missing),
        opt(r.var_q, missing),
        opt(r.var_p, missing),
        num(r.s_rh),
        r.stable.to_string(),
    ]
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serialises")
}

fn metadata(out: &mut String, run: &SweepRun) {
    let r = &run.result;
    let _ = writeln!(out, "# system = {}", json(&run.spec.system));
    if let Some(i) = r.system_index {
        let _ = writeln!(out, "# builtin = {i}");
    }
    let _ = writeln!(out, "# setup = {}", json(&run.spec.setup));
    let _ = writeln!(out, "# optimize_squeezing = {}", run.spec.optimize_squeezing);
    let _ = writeln!(out, "# method = {}", r.method.name());
    let _ = writeln!(out, "# grid = {}", json(&r.grid));
    let _ = writeln!(out, "# c_crit = {}", opt(r.c_crit, "none"));
    let _ = writeln!(out, "# cutoff_c = {}", opt(r.cutoff_c, "none"));
    let _ = writeln!(out, "# unstable_points = {}", r.unstable_points);
    let _ = writeln!(out, "# units = rad/s, W, J/s");
}

pub fn to_csv(runs: &[SweepRun]) -> String {
    let mut out = String::new();
    for (k, run) in runs.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        metadata(&mut out, run);
        out.push_str(&CSV_COLUMNS.join(","));
        out.push('\n');
        for row in &run.result.rows {
            out.push_str(&fields(row, "").join(","));
            out.push('\n');
        }
    }
    out
}

pub fn to_json(runs: &[SweepRun]) -> String {
    let mut s = serde_json::to_string_pretty(runs).expect("plain data serialises");
    s.push('\n');
    s
}

/// One whitespace-separated index block per run, blocks separated by two blank lines.
pub fn to_gnuplot(runs: &[SweepRun]) -> String {
    let mut out = String::new();
    for (k, run) in runs.iter().enumerate() {
        if k > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(
            out,
            "# index {k}: {} {} ({})",
            run.result.label,
            run.result.setup.name(),
            run.result.method.name()
        );
        let _ = writeln!(out, "# {}", CSV_COLUMNS.join(" "));
        for row in &run.result.rows {
            let mut f = fields(row, "NaN");
            f[12] = u8::from(row.stable).to_string();
            out.push_str(&f.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn render(format: OutputFormat, runs: &[SweepRun]) -> String {
    match format {
        OutputFormat::Csv => to_csv(runs),
        OutputFormat::Json => to_json(runs),
        OutputFormat::Gnuplot => to_gnuplot(runs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SetupKind;
    use crate::sweep::{run_sweep, CGrid};

    fn run(kind: SetupKind, grid: CGrid) -> SweepRun {
        let spec = SweepSpec::builtin(1, kind).unwrap().with_grid(grid);
        let result = run_sweep(&spec).unwrap();
        SweepRun { spec, result }
    }

    #[test]
    fn csv_layout() {
        let r = run(SetupKind::Standard, CGrid { c_min: 1.0, c_max: 1e4, points: 5 });
        let csv = to_csv(std::slice::from_ref(&r));
        assert!(!csv.contains('\r'));
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "c,g,p_las,n_fin,j_c,eta_l,eta_l_prime,eta_c,eta_c_prime,var_q,var_p,s_rh,stable");
        assert_eq!(body.len(), 6);
        for line in &body[1..] {
            assert_eq!(line.split(',').count(), 13);
        }
        // past threshold: empty observables
        assert!(body.last().unwrap().ends_with(",false"));
        assert!(body.last().unwrap().contains(",,"));
        // round trip of the first column
        let c: f64 = body[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(c, r.result.rows[0].c);
    }

    #[test]
    fn floats_round_trip() {
        for x in [1e-20, 0.1, 1.0 / 3.0, 6.02e23, -2.5e-7] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_and_gnuplot() {
        let g = CGrid { c_min: 1.0, c_max: 10.0, points: 3 };
        let runs = vec![run(SetupKind::Standard, g), run(SetupKind::Fano, g)];
        let v: serde_json::Value = serde_json::from_str(&to_json(&runs)).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        assert_eq!(v[1]["result"]["setup"], "fano");
        assert_eq!(v[0]["result"]["rows"].as_array().unwrap().len(), 3);
        let gp = to_gnuplot(&runs);
        assert_eq!(gp.matches("# index").count(), 2);
        assert!(gp.contains("\n\n\n# index 1"));
        let data: Vec<&str> = gp.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        assert_eq!(data.len(), 6);
        assert!(data.iter().all(|l| l.split(' ').count() == 13));
    }
}
