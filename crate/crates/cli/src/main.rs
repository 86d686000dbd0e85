use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use quathess::torus::Scheme;
use quathess_cli::config::RunConfig;
use quathess_cli::run::run_solve;
use quathess_cli::verify::{run_verify, Suite};
use quathess_cli::{EXIT_CONFIG, FIELD_REFERENCE};

/// Solve quaternionic Hessian-type equations on flat tori, or run the
/// seeded property suites.
#[derive(Parser, Debug)]
#[command(name = "quathess", version, after_help = FIELD_REFERENCE)]
struct Args {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "verify")]
    config: Option<PathBuf>,
    /// Property suite to run: algebra, cones, forms or all.
    #[arg(long, value_name = "SUITE")]
    verify: Option<Suite>,
    /// Random instances per property.
    #[arg(long, value_name = "N", default_value_t = 1000)]
    trials: usize,
    /// Seed for verification sweeps; overrides the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Finite-difference scheme; overrides the config.
    #[arg(long, value_parser = ["central2", "spectral"])]
    scheme: Option<String>,
}

fn fail(code: i32, msg: &str) -> ExitCode {
    eprintln!("quathess: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    if let Some(suite) = args.verify {
        let report = run_verify(suite, args.trials, args.seed.unwrap_or(0));
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Some(dir) = &args.out {
            let written = std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join("verify_report.json"), &text));
            if let Err(e) = written {
                return fail(EXIT_CONFIG, &format!("--out {}: {e}", dir.display()));
            }
        }
        println!("{text}");
        for line in report.failure_lines() {
            eprintln!("{line}");
        }
        return ExitCode::from(report.exit_code() as u8);
    }

    let Some(path) = args.config else {
        return fail(EXIT_CONFIG, "one of --config or --verify is required");
    };
    let mut cfg = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &e.to_string()),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    if let Some(s) = args.scheme {
        cfg.scheme = s.parse::<Scheme>().expect("validated by clap");
    }
    match run_solve(&cfg) {
        Ok(out) => {
            let m = &out.manifest;
            println!(
                "converged: b = {:.12e}, residual {:.2e}, {} Newton iterations, artifacts in {}",
                m.b.unwrap_or(f64::NAN),
                m.residual_sup.unwrap_or(f64::NAN),
                m.iterations.iter().sum::<usize>(),
                out.dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.exit_code(), &e.to_string()),
    }
}
