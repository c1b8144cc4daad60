use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use slantlab::cli::{self, Format, Overrides};

#[derive(Parser)]
#[command(name = "slantlab", version, about = "Numerical checks for slant Riemannian submersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check suite on a manifest or a built-in fixture.
    Run {
        /// Manifest file.
        #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
        manifest: Option<PathBuf>,
        /// Built-in fixture name (see `slantlab fixtures`).
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        dirs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a manifest parameter, e.g. `--param alpha=pi/6`.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        tol_alg: Option<f64>,
        #[arg(long)]
        tol_diff: Option<f64>,
        #[arg(long)]
        tol_angle: Option<f64>,
    },
    /// List the built-in fixtures.
    Fixtures,
}

fn configure_threads() {
    if let Some(n) = std::env::var("SLANTLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    configure_threads();
    match args.command {
        Command::Fixtures => {
            for (name, desc) in cli::list_fixtures() {
                println!("{name:<22} {desc}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { manifest, fixture, points, dirs, seed, format, out, params, tol_alg, tol_diff, tol_angle } => {
            let mut parsed = Vec::new();
            for p in &params {
                match p.split_once('=') {
                    Some((k, v)) => parsed.push((k.trim().to_string(), v.trim().to_string())),
                    None => {
                        eprintln!("error: --param expects NAME=VALUE, got '{p}'");
                        return ExitCode::from(2);
                    }
                }
            }
            let overrides = Overrides {
                points,
                dirs,
                seed,
                format: format.map(|f| match f {
                    FormatArg::Json => Format::Json,
                    FormatArg::Text => Format::Text,
                }),
                out: out.map(|p| p.display().to_string()),
                params: parsed,
                tol_alg,
                tol_diff,
                tol_angle,
            };
            let loaded = match (&manifest, &fixture) {
                (Some(path), _) => cli::load_manifest(path),
                (None, Some(name)) => cli::fixture(name),
                (None, None) => unreachable!("clap requires one source"),
            };
            let report = loaded.and_then(|mut m| {
                overrides.apply(&mut m)?;
                cli::run_suite(&m).map(|r| (r, m.output))
            });
            match report {
                Ok((report, output)) => {
                    let text = report.render(output.format);
                    match output.path {
                        Some(path) => {
                            if let Err(e) = std::fs::write(&path, &text) {
                                eprintln!("error: cannot write {path}: {e}");
                                return ExitCode::from(2);
                            }
                        }
                        None => print!("{text}"),
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
