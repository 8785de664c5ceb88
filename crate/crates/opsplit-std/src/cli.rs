//! The `opsplit` command line.
//!
//! Exit codes: 0 success, 1 error (bad config, IO, study failure), 2 when a
//! configured threshold fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use opsplit::rational::catalog_names;

use crate::{run, ExperimentConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_THRESHOLD: u8 = 2;

#[derive(Parser)]
#[command(
    name = "opsplit",
    version,
    about = "Operator-splitting convergence, consistency and stability experiments"
)]
struct Cli {
    /// Print the stage schemes and exit.
    #[arg(long)]
    list_schemes: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a config file.
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Print the stage schemes.
    ListSchemes,
}

fn list_schemes(out: &mut dyn Write) -> u8 {
    for name in catalog_names() {
        let _ = writeln!(out, "{name}");
    }
    EXIT_OK
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{rendered}");
            return EXIT_OK;
        }
    };
    if cli.list_schemes {
        return list_schemes(out);
    }
    match cli.command {
        None => {
            let _ = writeln!(err, "no command given; see --help");
            EXIT_ERROR
        }
        Some(Command::ListSchemes) => list_schemes(out),
        Some(Command::Validate { config }) => match ExperimentConfig::load(&config) {
            Ok(cfg) => {
                let _ = writeln!(
                    out,
                    "{}: valid {} study, {}",
                    config.display(),
                    cfg.study.name(),
                    cfg.scheme.label()
                );
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        },
        Some(Command::Run {
            config,
            output,
            threads,
        }) => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_ERROR;
                }
            };
            if let Some(dir) = output {
                cfg.output = dir;
            }
            match threads {
                Some(0) => {
                    let _ = writeln!(err, "error: invalid `threads`: must be >= 1");
                    return EXIT_ERROR;
                }
                Some(t) => cfg.threads = t,
                None => {}
            }
            match run(&cfg) {
                Ok(outcome) => {
                    let _ = write!(out, "{}", outcome.summary);
                    let _ = writeln!(
                        out,
                        "wrote {} and {}",
                        outcome.csv.display(),
                        outcome.summary_path.display()
                    );
                    if outcome.pass() {
                        EXIT_OK
                    } else {
                        EXIT_THRESHOLD
                    }
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_ERROR
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn call(args: &[&str]) -> (u8, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(
            std::iter::once("opsplit").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    const MINIMAL: &str = r#"
study = "convergence"
t = 0.1
m_list = [32]
n_list = [8, 16, 32]
output = "out"

[problem]
a = { kind = "diffusion", nu = 1.0 }
initial = "sin(2*pi*s)"

[scheme]
splitting = "none"
r = "backward_euler"
"#;

    #[test]
    fn list_schemes_flag_and_command() {
        for args in [&["--list-schemes"][..], &["list-schemes"][..]] {
            let (code, out, _) = call(args);
            assert_eq!(code, EXIT_OK);
            assert!(out.lines().any(|l| l == "backward_euler"));
            assert!(out.lines().any(|l| l == "crank_nicolson"));
            assert!(out.lines().any(|l| l == "exact"));
        }
    }

    #[test]
    fn minimal_run_writes_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, MINIMAL).unwrap();
        let (code, out, err) = call(&["run", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{err}");
        let csv = fs::read_to_string(dir.path().join("out/convergence.csv")).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "m,n,t,error,seconds");
        assert_eq!(lines.len(), 4);
        let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
        assert!(summary.contains("order in n at m = 32"));
        assert!(out.contains("overall: PASS"));
    }

    #[test]
    fn theta_error_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        let text = MINIMAL.replace("splitting = \"none\"", "splitting = \"weighted\"\ntheta = 1.5");
        fs::write(&cfg, text).unwrap();
        let (code, _, err) = call(&["run", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("theta"), "{err}");
        let (code, _, err) = call(&["validate", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("theta"));
    }

    #[test]
    fn failed_threshold_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, format!("{MINIMAL}\n[thresholds]\nmax_error = 1e-12\n")).unwrap();
        let (code, out, _) = call(&["run", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_THRESHOLD);
        assert!(out.contains("FAIL max error"));
    }

    #[test]
    fn validate_and_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, MINIMAL).unwrap();
        let (code, out, _) = call(&["validate", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("valid convergence study"));
        assert_eq!(call(&["run"]).0, EXIT_ERROR);
        assert_eq!(call(&[]).0, EXIT_ERROR);
        assert_eq!(call(&["run", "/nonexistent/config.toml"]).0, EXIT_ERROR);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }
}
