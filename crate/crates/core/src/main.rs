use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smono::harness::{
    self, linear_grid, parse_classes, parse_rational, run_campaign_to_files, sweep_family, table1_check,
    tangle_report, CampaignConfig, SweepRow, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VIOLATIONS,
};
use smono::qstate::read_state_file;
use smono::{Error, ExponentSchedule};

#[derive(Parser)]
#[command(name = "smono", version, about = "Strong-monogamy checks for few-qubit pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo campaign over random SLOCC-class states.
    Verify(VerifyArgs),
    /// Residual curves of a normal-form family along one real parameter.
    Sweep(SweepArgs),
    /// Tangles of a state read from a JSON file.
    Tangle(TangleArgs),
    /// Compare RDL bounds with the normal-form bound table.
    Table1(Table1Args),
}

#[derive(Args)]
struct Common {
    /// Three-tangle exponent, e.g. 3/2 or 1.5.
    #[arg(long, default_value = "3/2", value_parser = parse_mu3, allow_hyphen_values = true)]
    mu3: f64,
    /// Print machine-readable JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "1-8")]
    classes: String,
    #[arg(long, default_value_t = harness::DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Residuals below this count as violations.
    #[arg(long, default_value_t = harness::DEFAULT_THRESHOLD, allow_hyphen_values = true)]
    threshold: f64,
    /// CSV output, one row per (state, focus).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary output.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Per-sample provenance as JSON lines.
    #[arg(long)]
    provenance: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "2-6")]
    classes: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = 2.0)]
    to: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = harness::DEFAULT_THRESHOLD, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TangleArgs {
    /// JSON file {"n": ..., "amplitudes": [[re, im], ...]}.
    state: PathBuf,
    /// Focus qubit, counted from 1; all qubits if omitted.
    #[arg(long)]
    focus: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long)]
    json: bool,
    /// Print every entry, not only the summary and flagged rows.
    #[arg(long)]
    all: bool,
}

fn parse_mu3(s: &str) -> Result<f64, String> {
    let v = parse_rational(s).map_err(|e| e.to_string())?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("mu3 must be positive".into())
    }
}

fn exit_for(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> smono::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> smono::Result<i32> {
    let mut cfg = CampaignConfig::new(parse_classes(&args.classes)?, args.samples, args.seed);
    cfg.mu3 = args.common.mu3;
    cfg.negativity_threshold = args.threshold;
    cfg.workers = args.workers;
    cfg.csv_path = args.out;
    cfg.summary_path = args.summary;
    cfg.provenance_path = args.provenance;
    let s = run_campaign_to_files(&cfg)?.summary;
    if args.common.json {
        print_json(&s)?;
    } else {
        println!("points: {}", s.total_points);
        if let Some(m) = &s.min_residual {
            println!(
                "min residual: {:.6e} (class {}, sample {}, seed {}, focus q{})",
                m.value, m.class, m.sample_index, m.seed, m.focus
            );
        }
        println!("violations (< {:e}): {}", s.negativity_threshold, s.violation_count);
        println!("min CKW residual: {:.6e} ({} below {:e})", s.min_ckw_residual, s.ckw_violation_count, harness::CKW_THRESHOLD);
        for m in &s.candidates {
            println!("  negative: {:.6e} (class {}, sample {}, seed {}, focus q{})", m.value, m.class, m.sample_index, m.seed, m.focus);
        }
        println!("errors: {}", s.error_count);
        for c in &s.per_class {
            println!("  class {}: {} points, min residual {:.6e}", c.class, c.points, c.min_residual);
        }
    }
    Ok(s.exit_code())
}

fn sweep(args: SweepArgs) -> smono::Result<i32> {
    let grid = linear_grid(args.from, args.to, args.step)?;
    let mut curves = Vec::new();
    for cls in parse_classes(&args.classes)? {
        curves.push(sweep_family(cls, &grid, args.common.mu3, args.threshold)?);
    }
    if let Some(path) = &args.out {
        let rows: Vec<&SweepRow> = curves.iter().flat_map(|c| &c.rows).collect();
        harness::write_rows(std::fs::File::create(path)?, &rows)?;
    }
    if args.common.json {
        print_json(&curves)?;
    } else {
        for c in &curves {
            println!(
                "class {}: {} points, {} flagged, min residual {:.6e}, {} below {:e}",
                c.class,
                c.rows.len(),
                c.flagged.len(),
                c.min_residual,
                c.violations,
                args.threshold
            );
            for f in &c.flagged {
                println!("  flagged a = {}: {}", f.a, f.reason);
            }
        }
    }
    Ok(if curves.iter().any(|c| c.violations > 0) { EXIT_VIOLATIONS } else { EXIT_OK })
}

fn tangle(args: TangleArgs) -> smono::Result<i32> {
    let psi = read_state_file(&args.state)?;
    let focus = match args.focus {
        Some(0) => return Err(Error::Parameters("--focus counts from 1".into())),
        Some(f) => Some(f - 1),
        None => None,
    };
    let report = tangle_report(&psi, focus, ExponentSchedule::new(args.common.mu3)?)?;
    if args.common.json {
        print_json(&report)?;
    } else {
        println!("{}", report.render_text());
    }
    Ok(EXIT_OK)
}

fn table1(args: Table1Args) -> smono::Result<i32> {
    let report = table1_check()?;
    if args.json {
        print_json(&report)?;
    } else {
        for e in report.entries.iter().filter(|e| args.all || e.flagged) {
            println!(
                "class {} {} table {:.6e}{} rdl {:.6e} ({}){}",
                e.class,
                e.marginal,
                e.table_bound,
                if e.table_exact_zero { " (exact)" } else { "" },
                e.rdl.value,
                e.rdl.method.as_str(),
                if e.flagged { " FLAGGED" } else { "" }
            );
        }
        println!(
            "{} entries, {} exact-zero entries, {} flagged",
            report.entries.len(),
            report.zero_entries_checked,
            report.flagged_count
        );
    }
    Ok(if report.flagged_count > 0 { EXIT_VIOLATIONS } else { EXIT_OK })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Tangle(a) => tangle(a),
        Command::Table1(a) => table1(a),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
