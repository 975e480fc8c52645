//! Acceptance suite: one PASS/FAIL line per primary criterion, non-zero exit if any fail.
//!
//! Run with `cargo test -p sideband --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sideband::constants::{hz, C_LIGHT};
use sideband::fano::{fano_sideband_rates, optimal_detuning_unresolved};
use sideband::lyapunov::{residual, solve_steady};
use sideband::observables::{bs_tms_split, observables_from_cov};
use sideband::params::{
    builtin, derive_fano_params, n_thermal, squeezing_level_db, FanoParams, SetupConfig, SetupKind, SqueezeParams,
    SystemParams,
};
use sideband::squeezed::{
    analytic_etas_squeezed, analytic_nfin_squeezed, diffusion_squeezed, optimal_squeezing,
};
use sideband::standard::{
    analytic_etas, analytic_nfin, drift_diffusion, drive_from_g, g_crit, sideband_rates,
};
use sideband::sweep::{
    default_grid, evaluate_point, golden_min, half_cooperativity, minimize_over_c, reproduce, ReproduceTarget,
    SweepSpec, SMALL_C,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, o: &Outcome) {
    println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn table_minima() -> Outcome {
    let t0 = Instant::now();
    let r = reproduce(ReproduceTarget::Table1MinNfin);
    let secs = t0.elapsed().as_secs_f64();
    let failed: Vec<String> = r
        .entries
        .iter()
        .filter(|e| !e.pass)
        .map(|e| format!("{} = {:.4} vs {}", e.name, e.computed, e.expected.unwrap()))
        .collect();
    Outcome {
        pass: failed.is_empty() && secs < 60.0,
        detail: format!(
            "{}/12 within 5%, {secs:.1} s{}",
            r.entries.len() - failed.len(),
            if failed.is_empty() { String::new() } else { format!("; off: {}", failed.join(", ")) }
        ),
    }
}

fn table_reldiff() -> Outcome {
    let r = reproduce(ReproduceTarget::Table2Reldiff);
    let worst = r.entries.iter().map(|e| (e.computed - e.expected.unwrap()).abs()).fold(0.0, f64::max);
    Outcome {
        pass: r.all_pass(),
        detail: format!("8 percentages, worst deviation {worst:.3} pp"),
    }
}

// Printed Table-I rows: n̄_mec, Γ/2π, γ_d/2π, κ_L/2π, κ_R/2π, squeezing level in dB.
const PRINTED_N_MEC: [f64; 4] = [8.3e4, 7.1e2, 1.3e8, 1.1e6];
const PRINTED_FSR: [f64; 4] = [4.0e10, 1.44e13, 1.40e10, 9.38e10];
const PRINTED_GAMMA_D: [f64; 4] = [8.0e7, 4.38e11, 7.71e6, 1.31e6];
const PRINTED_KAPPA_L: [f64; 4] = [8.0e10, 2.88e13, 2.80e10, 1.88e11];
const PRINTED_KAPPA_R: [f64; 4] = [5.0e7, 8.22e9, 1.75e8, 5.70e11];
const PRINTED_DB: [f64; 4] = [0.87, 0.59, 2.7, 15.4];
const PRINTED_RATIO: [f64; 4] = [0.050, 0.034, 0.154, 0.711];

fn derived_rows() -> Outcome {
    let mut bad = Vec::new();
    for i in 0..4 {
        let sys = builtin(i + 1).unwrap().params;
        let n = n_thermal(sys.omega_mec, sys.temp_mec).unwrap();
        if rel(n, PRINTED_N_MEC[i]) > 0.02 {
            bad.push(format!("n_mec({}) = {n:.3e} vs {:.1e}", i + 1, PRINTED_N_MEC[i]));
        }
        // Γ = πc/(nL) from the cavity length alone
        let fsr = PI * C_LIGHT / (sys.refractive_index * sys.cavity_length.unwrap());
        if rel(fsr, hz(PRINTED_FSR[i])) > 0.02 {
            bad.push(format!("fsr({}) = {:.3e} Hz", i + 1, fsr / (2.0 * PI)));
        }
        let mut from_length = sys.clone();
        from_length.fsr = Some(fsr);
        let f = derive_fano_params(&from_length).unwrap();
        for (what, got, want) in [
            ("gamma_d", f.gamma_d, PRINTED_GAMMA_D[i]),
            ("kappa_L", f.kappa_l, PRINTED_KAPPA_L[i]),
            ("kappa_R", f.kappa_0, PRINTED_KAPPA_R[i]),
        ] {
            if rel(got, hz(want)) > 0.02 {
                bad.push(format!("{what}({}) = {:.3e} Hz vs {want:e}", i + 1, got / (2.0 * PI)));
            }
        }
        let db = squeezing_level_db(&SqueezeParams::new(1.0, PRINTED_RATIO[i], 0.0).unwrap());
        if (db - PRINTED_DB[i]).abs() > 0.05 {
            bad.push(format!("dB({}) = {db:.3}", i + 1));
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "all 24 derived entries within tolerance".into() } else { bad.join("; ") },
    }
}

fn random_stable(rng: &mut ChaCha8Rng) -> (SystemParams, f64, f64) {
    let w = 1.0e6;
    let kappa = w * 10f64.powf(rng.random_range(-2.0..2.0));
    let sys = SystemParams::from_rates(
        w,
        w * 10f64.powf(rng.random_range(-6.0..-1.0)),
        10f64.powf(rng.random_range(0.0..6.0)),
        kappa,
        1.2e15,
        10f64.powf(rng.random_range(-1.0..4.0)),
    )
    .unwrap();
    let delta = 0.5 * w.max(kappa) * 10f64.powf(rng.random_range(-1.5..1.5));
    let g = rng.random_range(0.01..0.97) * g_crit(delta, &sys);
    (sys, g, delta)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20260417);
    let (mut worst, mut worst_res, mut failures) = (0.0f64, 0.0f64, 0usize);
    let n = 500;
    for k in 0..2 * n {
        let (sys, g, delta) = random_stable(&mut rng);
        let squeeze = (k >= n).then(|| {
            SqueezeParams::new(rng.random_range(0.0..1.0), rng.random_range(0.0..0.9), rng.random_range(0.0..PI))
                .unwrap()
        });
        let (dd, setup) = match squeeze {
            None => (drift_diffusion(g, delta, &sys), SetupConfig::Standard { detuning: delta }),
            Some(sq) => (diffusion_squeezed(g, delta, &sys, &sq), SetupConfig::Squeezed { detuning: delta, squeeze: sq }),
        };
        let Ok(v) = solve_steady(&dd) else {
            failures += 1;
            continue;
        };
        worst_res = worst_res.max(residual(&dd, &v.v));
        let o = observables_from_cov(&v, &drive_from_g(g, delta, &sys), &sys, &setup).unwrap();
        let (n_cf, (eta_l, eta_c)) = match squeeze {
            None => (analytic_nfin(g, delta, &sys).unwrap(), analytic_etas(g, delta, &sys).unwrap()),
            Some(sq) => (
                analytic_nfin_squeezed(g, delta, &sys, &sq).unwrap(),
                analytic_etas_squeezed(g, delta, &sys, &sq).unwrap(),
            ),
        };
        worst = worst
            .max(rel(n_cf, o.n_fin))
            .max(rel(eta_l, o.eta_l.unwrap()))
            .max(rel(eta_c, o.eta_c.unwrap()));
    }
    Outcome {
        pass: failures == 0 && worst < 1e-8 && worst_res <= 1e-10,
        detail: format!(
            "{} standard + {} squeezed sets, worst relative difference {worst:.2e}, worst residual {worst_res:.2e}, {failures} solve failures",
            n, n
        ),
    }
}

fn squeezed_nfin(g: f64, d: f64, sys: &SystemParams, theta: f64, r: f64) -> f64 {
    let sq = SqueezeParams::new(1.0, r, theta).unwrap();
    let v = solve_steady(&diffusion_squeezed(g, d, sys, &sq)).unwrap();
    (v.at(3, 3) + v.at(4, 4) - 1.0) / 2.0
}

const PRINTED_PAIRS: [(f64, f64); 4] = [(0.835, 0.050), (0.819, 0.034), (0.939, 0.154), (1.11, 0.711)];

fn optimizer_fidelity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for i in 0..4 {
        let b = builtin(i + 1).unwrap();
        let sys = &b.params;
        let d = b.squeezed.detuning();
        let g_small = sys.g_from_cooperativity(SMALL_C).unwrap();
        let (t, r) = optimal_squeezing(g_small, d, sys).unwrap();
        let (pt, pr) = PRINTED_PAIRS[i];
        let table_ok = (t - pt).abs() <= 1e-2 && (r - pr).abs() <= 1e-3;
        // numerical argmin of the full Lyapunov n_fin at C = 1
        let g1 = sys.g_from_cooperativity(1.0).unwrap();
        let (tc, rc) = optimal_squeezing(g1, d, sys).unwrap();
        let best_r = |th: f64| golden_min(|x| squeezed_nfin(g1, d, sys, th, x), 0.0, 0.95, 1e-7);
        let (tn, _) = golden_min(|th| best_r(th).1, tc - 0.5, tc + 0.5, 1e-7);
        let rn = best_r(tn).0;
        let argmin_ok = (tn - tc).abs() <= 1e-2 && (rn - rc).abs() <= 1e-3;
        pass &= table_ok && argmin_ok;
        parts.push(format!(
            "sys{}: closed ({t:.3}, {r:.3}) vs ({pt}, {pr}) {}, argmin Δ=({:.1e}, {:.1e}) {}",
            i + 1,
            if table_ok { "ok" } else { "off" },
            tn - tc,
            rn - rc,
            if argmin_ok { "ok" } else { "off" }
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn physical_properties() -> Outcome {
    let mut fails = Vec::new();
    let mut notes = Vec::new();

    // (a) J_c saturates at ħΩγn̄ once Γ_opt ≫ γ
    for i in 1..=3 {
        let spec = SweepSpec::builtin(i, SetupKind::Standard).unwrap();
        let c = 1e2 * half_cooperativity(&spec.system, &spec.setup);
        let j = evaluate_point(&spec, c).j_c.unwrap();
        let s = &spec.system;
        let plateau = sideband::constants::HBAR * s.omega_mec * s.gamma_mec * s.n_mec;
        if rel(j, plateau) > 0.05 {
            fails.push(format!("(a) sys{i} J_c/plateau = {:.4}", j / plateau));
        }
    }
    notes.push("(a) J_c plateau".to_string());

    // (b) η_C → 1 in the resolved-sideband weak-coupling limit, Δ = Ω. Built-ins are
    // not resolved enough; the system-1 family with κ/Ω = 0.02 is.
    let base = builtin(1).unwrap().params;
    let mut resolved = base.clone();
    resolved.kappa = 0.02 * base.omega_mec;
    let g = resolved.g_from_cooperativity(1e-3 / resolved.n_mec).unwrap();
    let (_, eta_c) = analytic_etas(g, resolved.omega_mec, &resolved).unwrap();
    if (1.0 - eta_c).abs() > 1e-3 {
        fails.push(format!("(b) η_C = {eta_c:.6}"));
    }
    notes.push(format!("(b) 1-η_C = {:.1e}", 1.0 - eta_c));

    // (c) divergence through ⟨δq²⟩ only
    for i in 1..=4 {
        let b = builtin(i).unwrap();
        let (sys, d) = (&b.params, b.standard.detuning());
        let spec = SweepSpec::builtin(i, SetupKind::Standard).unwrap();
        let min = minimize_over_c(&spec, default_grid(sys, &b.standard)).unwrap();
        let gc = g_crit(d, sys);
        let v = solve_steady(&drift_diffusion((1.0 - 1e-5) * gc, d, sys)).unwrap();
        let n_near = (v.at(3, 3) + v.at(4, 4) - 1.0) / 2.0;
        let q_ratio = v.at(3, 3) / min.var_q.unwrap();
        let p_ratio = v.at(4, 4) / min.var_p.unwrap();
        if !(n_near > 1e3 * min.n_fin.unwrap() && q_ratio > 1e3 && p_ratio < 1.5) {
            fails.push(format!("(c) sys{i} n {:.1e}x q {q_ratio:.1e}x p {p_ratio:.2}x", n_near / min.n_fin.unwrap()));
        }
    }
    notes.push("(c) q diverges, p bounded".to_string());

    // (d) BS + TMS split is exact; TMS negligible at low C when resolved
    let mut worst_split = 0.0f64;
    for i in 1..=4 {
        let b = builtin(i).unwrap();
        let (sys, d) = (&b.params, b.standard.detuning());
        let half = half_cooperativity(sys, &b.standard);
        for c in [1e-3 * half, half, 1e2 * half] {
            let g = sys.g_from_cooperativity(c).unwrap();
            let v = solve_steady(&drift_diffusion(g, d, sys)).unwrap();
            let o = observables_from_cov(&v, &drive_from_g(g, d, sys), sys, &b.standard).unwrap();
            let (bs, tms) = bs_tms_split(&v, g, sys.omega_mec);
            worst_split = worst_split.max(rel(bs + tms, o.j_c));
            if i <= 2 && c < half && (tms / bs).abs() >= 1e-2 {
                fails.push(format!("(d) sys{i} |TMS|/BS = {:.2e}", (tms / bs).abs()));
            }
        }
    }
    if worst_split > 1e-12 {
        fails.push(format!("(d) split residual {worst_split:.1e}"));
    }
    notes.push(format!("(d) split residual {worst_split:.0e}"));

    // (e) the four approximation routes agree at low C
    let r = reproduce(ReproduceTarget::ApproxCompare);
    let spreads: Vec<&sideband::sweep::ReproEntry> = r.entries.iter().take(4).collect();
    let worst = spreads.iter().map(|e| e.computed).fold(0.0, f64::max);
    if !spreads.iter().all(|e| e.pass) {
        fails.push(format!("(e) spread {worst:.2e}"));
    }
    notes.push(format!("(e) worst spread {:.1e}", worst));

    Outcome {
        pass: fails.is_empty(),
        detail: if fails.is_empty() { notes.join(", ") } else { fails.join("; ") },
    }
}

fn fano_rate_ratios() -> Outcome {
    let mut closed_worst = 0.0f64;
    let mut stokes = Vec::new();
    let mut pass = true;
    for i in 1..=4 {
        let sys = builtin(i).unwrap().params;
        let fp: FanoParams = derive_fano_params(&sys).unwrap().with_detuning_d(sys.omega_mec);
        let g = 1.0;
        let (ap_f, am_f) = fano_sideband_rates(g, fp.detuning(), fp.detuning_d, &fp, &sys).unwrap();
        let mut eq = sys.clone();
        eq.kappa = fp.kappa_eff;
        let (ap, am) = sideband_rates(g, sys.omega_mec, &eq);
        let w4 = 4.0 * sys.omega_mec;
        closed_worst = closed_worst.max(rel(am_f / am, w4 * w4 / (sys.fsr.unwrap() * fp.kappa_eff)));
        let anti_stokes = am / am_f;
        let stokes_supp = ap / ap_f;
        if i <= 3 {
            pass &= stokes_supp >= 1e7 * anti_stokes;
            stokes.push(format!(
                "sys{i} log10 reduction anti-Stokes {:.1}, Stokes {:.1}",
                anti_stokes.log10(),
                stokes_supp.log10()
            ));
        }
    }
    pass &= closed_worst <= 1e-9;
    Outcome {
        pass,
        detail: format!("A₋ ratio closed form worst {closed_worst:.1e}; {}", stokes.join(", ")),
    }
}

fn fano_constant() -> Outcome {
    let c = optimal_detuning_unresolved();
    // Ω ≪ κ_eff and γ_d ≪ Γ
    let (w, k, gam) = (1.0, 1e3, 1e9);
    let zeta = 4.0 * w / k;
    let sys = SystemParams::from_rates(w, 1e-6, 10.0, k, 1e15, 1e-3).unwrap();
    let fp0 = FanoParams::new(16.0 * w * w / k, 2.0 * gam, gam / (2.0 * zeta * zeta), w, zeta).unwrap();
    let n_opt = |x: f64| {
        let fp = fp0.with_detuning_d(x * w);
        let (ap, am) = fano_sideband_rates(1.0, fp.detuning(), fp.detuning_d, &fp, &sys).unwrap();
        ap / (am - ap)
    };
    let (x, _) = golden_min(n_opt, 0.5, 10.0, 1e-9);
    Outcome {
        pass: (c - 2.505).abs() <= 1e-3 && rel(x, c) <= 0.01,
        detail: format!("constant {c:.5}, numeric argmin {x:.5}"),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("Table-I minima", table_minima),
        ("Table-II relative improvements", table_reldiff),
        ("Table-I derived rows", derived_rows),
        ("Oracle equivalence", oracle_equivalence),
        ("Optimizer fidelity", optimizer_fidelity),
        ("Physical-behavior properties", physical_properties),
        ("Fano weak-coupling rate ratios", fano_rate_ratios),
        ("Fano optimal-detuning constant", fano_constant),
    ];
    let mut passed = 0;
    for (name, f) in criteria {
        let o = f();
        report(name, &o);
        passed += usize::from(o.pass);
    }
    println!("{passed}/{} criteria pass", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

