//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

mod support;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use smono::harness::{
    linear_grid, parse_classes, run_campaign, sweep_family, table1_check, write_rows, CampaignConfig,
};
use smono::monogamy::{assemble_residual, residual_three_tangle, sm_report_all_foci};
use smono::qstate::{apply_local_operators, trace_norm, write_state_file, C64};
use smono::states::{ghz, ghzw, SloccClass};
use smono::tangles::{three_tangle_amplitudes, three_tangle_pure, three_tangle_upper};
use smono::{ExponentSchedule, GhzwParams};
use support::*;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ghz_saturation() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghz4.json");
    write_state_file(&path, &ghz(4).unwrap()).unwrap();
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_smono"))
        .args(["tangle", "--json"])
        .arg(&path)
        .output()
        .unwrap();
    let elapsed = t0.elapsed();
    if !out.status.success() {
        return outcome(false, format!("tangle exited with {}", out.status));
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let foci = v["foci"].as_array().unwrap();
    let mut worst = 0.0f64;
    for f in foci {
        worst = worst
            .max((f["tau1"].as_f64().unwrap() - 1.0).abs())
            .max((f["residual_lower"].as_f64().unwrap() - 1.0).abs());
    }
    let pass = foci.len() == 4 && worst <= 1e-9 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("{} foci, max deviation {worst:.1e}, {:.0} ms", foci.len(), elapsed.as_secs_f64() * 1e3))
}

fn ghzw_family() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(SEED);
    let mut params = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            for k in 0..20 {
                if i + j + k == 0 {
                    continue;
                }
                let m = [i as f64 / 19.0, j as f64 / 19.0, k as f64 / 19.0];
                let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
                let phase = |r: &mut rand_chacha::ChaCha8Rng, x: f64| {
                    C64::from_polar(x / norm, r.random_range(0.0..std::f64::consts::TAU))
                };
                let (a, b, c) = (phase(&mut r, m[0]), phase(&mut r, m[1]), phase(&mut r, m[2]));
                params.push(GhzwParams::new(4, a, b, c).unwrap());
            }
        }
    }
    let margins: Vec<Result<f64, String>> = params
        .par_iter()
        .map(|p| {
            let psi = ghzw(p).map_err(|e| e.to_string())?;
            let floor = 4.0 * p.alpha.norm_sqr() * p.gamma.norm_sqr();
            let reports = sm_report_all_foci(&psi, ExponentSchedule::default()).map_err(|e| e.to_string())?;
            Ok(reports.iter().map(|r| r.residual_lower - floor).fold(f64::INFINITY, f64::min))
        })
        .collect();
    let errors = margins.iter().filter(|m| m.is_err()).count();
    let min = margins.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let elapsed = t0.elapsed();
    let pass = errors == 0 && min >= -1e-6 && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!("{} states, min(residual - 4|a|^2|g|^2) = {min:.3e}, {errors} errors, {:.1} s", params.len(), elapsed.as_secs_f64()),
    )
}

fn campaign(samples: u64, workers: usize) -> smono::harness::CampaignOutput {
    let mut cfg = CampaignConfig::new(parse_classes("1-8").unwrap(), samples, SEED);
    cfg.workers = workers;
    run_campaign(&cfg).unwrap()
}

fn monte_carlo(full: &smono::harness::CampaignOutput, elapsed: Duration) -> Outcome {
    let t0 = Instant::now();
    let smoke = campaign(100, 0);
    let smoke_time = t0.elapsed();
    let s = &full.summary;
    let above_line = full.rows.iter().filter(|r| r.residual_lower > r.tau1 + 1e-9).count();
    let pass = s.total_points == 320_000
        && s.violation_count == 0
        && s.error_count == 0
        && above_line == 0
        && smoke.summary.violation_count == 0
        && smoke_time < Duration::from_secs(20)
        && elapsed < Duration::from_secs(1800);
    let min = s.min_residual.as_ref().map_or(f64::NAN, |m| m.value);
    outcome(
        pass,
        format!(
            "{} points, min residual {min:.3e}, {} violations, {} errors, {above_line} above tau1; full {:.1} s, smoke {:.2} s",
            s.total_points,
            s.violation_count,
            s.error_count,
            elapsed.as_secs_f64(),
            smoke_time.as_secs_f64()
        ),
    )
}

fn ckw_theorem(full: &smono::harness::CampaignOutput) -> Outcome {
    let min = full.rows.iter().map(|r| r.ckw_residual()).fold(f64::INFINITY, f64::min);
    let bad = full.rows.iter().filter(|r| r.ckw_residual() < -1e-9).count();
    outcome(bad == 0 && !full.rows.is_empty(), format!("min CKW residual {min:.3e}, {bad} below -1e-9"))
}

fn focus_independence() -> Outcome {
    let mut r = rng(SEED + 5);
    let mut spread = 0.0f64;
    let mut gap = 0.0f64;
    for _ in 0..1000 {
        let psi = random_state(3, &mut r);
        let res: Vec<f64> = (0..3).map(|f| residual_three_tangle(&psi, f).unwrap()).collect();
        let max = res.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = res.iter().cloned().fold(f64::INFINITY, f64::min);
        spread = spread.max(max - min);
        let t3 = three_tangle_pure(&psi).unwrap();
        gap = res.iter().fold(gap, |g, x| g.max((x - t3).abs()));
    }
    outcome(spread < 1e-9 && gap < 1e-9, format!("max focus spread {spread:.1e}, max |residual - tau3| {gap:.1e}"))
}

fn rdl_soundness() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(SEED + 6);
    let states: Vec<_> = (0..100).map(|_| random_rank2(&mut r)).collect();
    let margins: Vec<(f64, f64)> = states
        .par_iter()
        .enumerate()
        .map(|(i, rho)| {
            let bound = three_tangle_upper(rho).unwrap().value;
            let oracle = convex_roof_estimate(rho, 32, SEED + 1000 + i as u64);
            (bound - oracle, oracle)
        })
        .collect();
    let min = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let max_oracle = margins.iter().map(|m| m.1).fold(0.0, f64::max);
    let elapsed = t0.elapsed();
    let pass = min >= -1e-6 && elapsed < Duration::from_secs(600);
    outcome(
        pass,
        format!("min(bound - oracle) = {min:.3e} over 100 states, max oracle {max_oracle:.3e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn table1_zero_rows() -> Outcome {
    let report = table1_check().unwrap();
    let class9 = report
        .entries
        .iter()
        .find(|e| e.class == 9 && e.marginal == "q2q3q4")
        .map_or(f64::NAN, |e| e.rdl.value);
    let max_zero = report.entries.iter().filter(|e| e.table_exact_zero).map(|e| e.rdl.value).fold(0.0, f64::max);
    let pass = report.flagged_count == 0 && report.zero_entries_checked > 0 && (class9 - 1.0).abs() < 1e-9;
    outcome(
        pass,
        format!(
            "{} exact-zero entries, max RDL bound on them {max_zero:.1e}, {} flagged, class 9 q2q3q4 = {class9:.12}",
            report.zero_entries_checked, report.flagged_count
        ),
    )
}

fn sweeps() -> Outcome {
    let grid = linear_grid(0.0, 2.0, 0.01).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 2..=6 {
        let curve = sweep_family(SloccClass::new(k).unwrap(), &grid, 1.5, -1e-7).unwrap();
        pass &= curve.violations == 0 && curve.rows.len() + curve.flagged.len() == grid.len();
        parts.push(format!("class {k} min {:.1e}", curve.min_residual));
    }
    outcome(pass, parts.join(", "))
}

fn determinism() -> Outcome {
    let csv = |workers| {
        let mut buf = Vec::new();
        write_rows(&mut buf, &campaign(100, workers).rows).unwrap();
        buf
    };
    let (four, one) = (csv(4), csv(1));
    outcome(four == one && !four.is_empty(), format!("{} bytes, identical = {}", four.len(), four == one))
}

fn property_suite() -> Outcome {
    let mut r = rng(SEED + 10);
    let mut failures = Vec::new();
    let sched = ExponentSchedule::default();
    for case in 0..200 {
        // Local-unitary and permutation invariance of the pure three-tangle.
        let psi3 = random_state(3, &mut r);
        let t = three_tangle_pure(&psi3).unwrap();
        let u = [random_unitary(&mut r), random_unitary(&mut r), random_unitary(&mut r)];
        let lu = three_tangle_pure(&apply_local_operators(&psi3, &u).unwrap()).unwrap();
        if (lu - t).abs() > 1e-10 {
            failures.push(format!("case {case}: local-unitary invariance {lu} vs {t}"));
        }
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let p = three_tangle_amplitudes(&permute3(psi3.amplitudes(), perm)).unwrap();
            if (p - t).abs() > 1e-10 {
                failures.push(format!("case {case}: permutation {perm:?} {p} vs {t}"));
            }
        }

        // Schmidt duality on every bipartition cut of a four-qubit state.
        let psi4 = random_state(4, &mut r);
        for (a, b) in [(vec![0], vec![1, 2, 3]), (vec![0, 1], vec![2, 3]), (vec![1, 3], vec![0, 2])] {
            let ea = psi4.partial_trace(&a).unwrap().eigenvalues();
            let eb = psi4.partial_trace(&b).unwrap().eigenvalues();
            let k = ea.len().min(eb.len());
            let dev = (0..k).map(|i| (ea[i] - eb[i]).abs()).fold(0.0, f64::max);
            if dev > 1e-10 {
                failures.push(format!("case {case}: Schmidt duality {a:?}|{b:?} deviation {dev:.1e}"));
            }
        }

        // Trace-norm homogeneity on a Hermitian difference.
        let x = psi4.partial_trace(&[0, 1]).unwrap().entries() - random_state(2, &mut r).density_matrix().entries();
        let s: f64 = r.random_range(-3.0..3.0);
        let lhs = trace_norm(&(&x * C64::new(s, 0.0))).unwrap();
        let rhs = s.abs() * trace_norm(&x).unwrap();
        if (lhs - rhs).abs() > 1e-10 * (1.0 + rhs) {
            failures.push(format!("case {case}: trace-norm homogeneity {lhs} vs {rhs}"));
        }

        // SmReport self-consistency, and invariance under local unitaries.
        let reports = sm_report_all_foci(&psi4, sched).unwrap();
        let u4 = [random_unitary(&mut r), random_unitary(&mut r), random_unitary(&mut r), random_unitary(&mut r)];
        let rotated = sm_report_all_foci(&apply_local_operators(&psi4, &u4).unwrap(), sched).unwrap();
        for (rep, rot) in reports.iter().zip(&rotated) {
            let tau2: Vec<f64> = rep.tau2_terms.iter().map(|t| t.value).collect();
            let tau3: Vec<f64> = rep.tau3_bounds.iter().map(|t| t.bound.value).collect();
            let again = assemble_residual(rep.tau1, &tau2, &tau3, sched.mu3());
            if (again - rep.residual_lower).abs() > 1e-12 {
                failures.push(format!("case {case}: SmReport self-consistency focus {}", rep.focus));
            }
            if (rep.residual_lower - rot.residual_lower).abs() > 1e-7 {
                failures.push(format!(
                    "case {case}: residual not local-unitary invariant at focus {}: {} vs {}",
                    rep.focus, rep.residual_lower, rot.residual_lower
                ));
            }
        }
    }
    let detail = if failures.is_empty() {
        "200 cases x 5 property families".to_string()
    } else {
        format!("{} failures; first: {}", failures.len(), failures[0])
    };
    outcome(failures.is_empty(), detail)
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut run = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        results.push((n, name, o, t0.elapsed()));
        let (n, name, o, d) = results.last().unwrap();
        println!("criterion {n:>2} {}: {name}: {} [{:.2} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, d.as_secs_f64());
    };
    run(1, "GHZ saturation", &mut ghz_saturation);
    run(2, "GHZ/W analytic family", &mut ghzw_family);
    let t0 = Instant::now();
    let full = campaign(10_000, 0);
    let full_time = t0.elapsed();
    run(3, "Monte Carlo SM verification", &mut || monte_carlo(&full, full_time));
    run(4, "CKW theorem", &mut || ckw_theorem(&full));
    drop(full);
    run(5, "focus independence", &mut focus_independence);
    run(6, "RDL bound soundness", &mut rdl_soundness);
    run(7, "normal-form zero bounds", &mut table1_zero_rows);
    run(8, "residual sweeps", &mut sweeps);
    run(9, "determinism", &mut determinism);
    run(10, "property suite", &mut property_suite);
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
