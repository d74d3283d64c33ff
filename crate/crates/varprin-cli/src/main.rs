//! `varprin` — construct-and-verify runs over problem files.
//!
//! Exit codes: 0 verified, 1 hypothesis violation, 2 verification failure
//! (the produced result did not check out, or a stored certificate was
//! rejected), 3 parse/validation/usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use varprin::error::Error;
use varprin::generate::{generate_instance, GenFamily, GenMode};
use varprin::problem::{BoundProblem, Problem};
use varprin::runner::{run_command, verify_report, RunFlags, RunReport};

#[derive(Parser)]
#[command(name = "varprin", version, about = "Variational-principle engine and certificate checker for non-symmetric, non-triangular distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Absolute tolerance for every claim check.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Iterate picker: `exact` or `quasi` (seeded).
    #[arg(long, default_value = "exact")]
    picker: String,
    /// Seed for the quasi picker and sampled scans.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap (default: 10·|X|).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Override the schedule section as `eps,delta0,gamma`.
    #[arg(long)]
    schedule: Option<String>,
    /// Write the machine-readable report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Audit identity, symmetry and triangle behavior of the distance.
    CheckDistance(CommonFlags),
    /// Run the accumulating-perturbation construction and verify it.
    Bp(CommonFlags),
    /// Run the memoryless-perturbation construction and verify it.
    Ekeland(CommonFlags),
    /// Locate a fixed point of the problem's set-valued map.
    Caristi(CommonFlags),
    /// Solve the problem's equilibrium instance.
    Ep(CommonFlags),
    /// Emit a seeded random problem instance.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        size: usize,
        /// table | euclidean | lp_frac | kl | itakura_saito | sq_euclidean
        #[arg(long, default_value = "table")]
        family: String,
        /// bp | ekeland | caristi | ep
        #[arg(long)]
        mode: String,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck a stored report against its problem file.
    Verify {
        /// Stored report (from --out).
        #[arg(long)]
        cert: PathBuf,
        /// The problem file the report was issued for.
        #[arg(long)]
        problem: PathBuf,
    },
}

fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::HypothesisViolation(_) | Error::EstimateViolation(_) | Error::EmptyGraph => 1,
        Error::IterationLimit(_)
        | Error::NonSingleton(_)
        | Error::TraceMismatch(_)
        | Error::NoConvergence(_) => 2,
        _ => 3,
    }
}

fn load_with_flags(path: &PathBuf, flags: &RunFlags) -> Result<BoundProblem, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut problem = Problem::from_json_str(&text)?;
    if let Some(section) = flags.schedule_section()? {
        problem.schedule = Some(section);
    }
    problem.validate()
}

fn render_report(report: &RunReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", report.command);
    let _ = writeln!(out, "digest:  {}", report.digest);
    let verdict = serde_json::to_value(report.verdict).unwrap();
    let _ = writeln!(out, "verdict: {}", verdict.as_str().unwrap());
    let _ = writeln!(out, "{}", report.summary);
    if let Some(cert) = &report.certificate {
        for c in &cert.claims {
            let _ = writeln!(
                out,
                "  claim ({}): {} (margin {})",
                c.label,
                if c.satisfied { "satisfied" } else { "VIOLATED" },
                c.margin.0
            );
        }
        for note in &cert.notes {
            let _ = writeln!(out, "  note: {note}");
        }
    }
    if let Some(a) = &report.ekeland_analysis {
        if a.witness_exists {
            let _ = writeln!(out, "  conclusion witnesses exist: {:?}", a.conclusion_witnesses);
        } else {
            let _ = writeln!(out, "  no point satisfies all conclusions on this instance");
        }
    }
    if let Some(ax) = &report.axioms {
        for w in ax.symmetry_witnesses.iter().take(5) {
            let _ = writeln!(
                out,
                "  asymmetry at ({}, {}): d = {} vs {}",
                w.x, w.y, w.d_xy, w.d_yx
            );
        }
        for w in ax.triangle_witnesses.iter().take(5) {
            let _ = writeln!(
                out,
                "  triangle violation ({} → {} → {}): direct {} > via {}",
                w.x, w.y, w.z, w.d_xz, w.via_y
            );
        }
        let (ns, nt) = (ax.symmetry_witnesses.len(), ax.triangle_witnesses.len());
        if ns > 5 || nt > 5 {
            let _ = writeln!(out, "  … {ns} symmetry and {nt} triangle witnesses in total");
        }
    }
    let _ = writeln!(out, "wall time: {:.1} ms", report.wall_time_ms);
    out
}

fn print_report(report: &RunReport) {
    use std::io::Write;
    // Tolerate closed pipes (`varprin … | head`).
    let _ = std::io::stdout().write_all(render_report(report).as_bytes());
}

fn write_report(report: &RunReport, out: &Option<PathBuf>) -> Result<(), Error> {
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(report).unwrap())?;
    }
    Ok(())
}

fn run(command: &str, flags: &CommonFlags) -> Result<u8, Error> {
    let run_flags = RunFlags {
        tol: flags.tol,
        picker: flags.picker.clone(),
        seed: flags.seed,
        max_iter: flags.max_iter,
        schedule_override: flags.schedule.clone(),
    };
    let bound = load_with_flags(&flags.problem, &run_flags)?;
    let report = run_command(command, &bound, &run_flags)?;
    print_report(&report);
    write_report(&report, &flags.out)?;
    Ok(report.verdict.exit_code() as u8)
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::CheckDistance(f) => run("check-distance", &f),
        Command::Bp(f) => run("bp", &f),
        Command::Ekeland(f) => run("ekeland", &f),
        Command::Caristi(f) => run("caristi", &f),
        Command::Ep(f) => run("ep", &f),
        Command::Generate {
            seed,
            size,
            family,
            mode,
            out,
        } => {
            let family: GenFamily = family.parse()?;
            let mode: GenMode = mode.parse()?;
            let problem = generate_instance(seed, size, family, mode)?;
            let text = problem.to_pretty_json();
            match out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => {
                    use std::io::Write;
                    let _ = std::io::stdout().write_all((text + "\n").as_bytes());
                }
            }
            Ok(0)
        }
        Command::Verify { cert, problem } => {
            let stored: RunReport = serde_json::from_str(&std::fs::read_to_string(&cert)?)
                .map_err(|e| Error::Parse(format!("report: {e}")))?;
            let text = std::fs::read_to_string(&problem)?;
            let mut parsed = Problem::from_json_str(&text)?;
            if let Some(section) = stored.flags.schedule_section()? {
                parsed.schedule = Some(section);
            }
            let bound = parsed.validate()?;
            let report = verify_report(&stored, &bound)?;
            print_report(&report);
            Ok(report.verdict.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}
