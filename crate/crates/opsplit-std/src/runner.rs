//! Executes a validated config and writes its reports.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use opsplit::analysis::{
    chernoff_consistency_with, convergence_study_with, stability_scan_with,
    trotter_kato_check_with, AnalysisError, ConvergenceReport,
};

use crate::config::{ExperimentConfig, Study};
use crate::harness::ParallelHarness;
use crate::report::{self, Check};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("cannot write reports: {0}")]
    Io(#[from] io::Error),
    #[error("cannot start thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv: PathBuf,
    pub summary_path: PathBuf,
    pub summary: String,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn write_file(path: &PathBuf, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()
}

/// Runs the study and writes `<output>/<study>.csv` and `<output>/summary.txt`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let harness = ParallelHarness::new(cfg.threads, cfg.timing)?;
    fs::create_dir_all(&cfg.output)?;
    let csv = cfg.output.join(format!("{}.csv", cfg.study.name()));
    let th = &cfg.thresholds;
    let mut checks = Vec::new();
    let body = match cfg.study {
        Study::Convergence => {
            let rep = convergence_study_with(
                &harness,
                &cfg.scheme,
                &cfg.problem,
                cfg.t,
                &cfg.m_list,
                &cfg.n_list,
                cfg.reference,
            )?;
            write_file(&csv, |w| report::write_convergence(w, &rep))?;
            convergence_checks(cfg, &rep, &mut checks);
            report::convergence_lines(&rep)
        }
        Study::Consistency => {
            let rep = chernoff_consistency_with(
                &harness,
                &cfg.scheme,
                &cfg.problem,
                &cfg.m_list,
                &cfg.h_list,
                &cfg.problem.initial,
            )?;
            write_file(&csv, |w| report::write_consistency(w, &rep))?;
            if let Some(bound) = th.consistency_ratio {
                let worst = rep.ratios().into_iter().fold(0.0, f64::max);
                checks.push(Check::new(
                    "consistency ratio",
                    rep.ratios().iter().all(|r| *r <= bound),
                    format!("largest ratio {worst:.4} against bound {bound}"),
                ));
            }
            report::consistency_lines(&rep)
        }
        Study::Stability => {
            let rep = stability_scan_with(
                &harness,
                &cfg.scheme,
                &cfg.problem,
                &cfg.m_list,
                &cfg.h_list,
                cfg.k_max,
                th.stability_targets(),
            )?;
            write_file(&csv, |w| report::write_stability(w, &rep))?;
            checks.push(Check::new(
                "power bound",
                rep.pass,
                format!(
                    "fitted (M, omega) = ({:.10}, {}) against targets ({}, {})",
                    rep.fitted.0, rep.fitted.1, rep.targets.m, rep.targets.omega
                ),
            ));
            report::stability_lines(&rep)
        }
        Study::TrotterKato => {
            let kinds: Vec<_> = cfg.problem.a.iter().chain(&cfg.problem.b).cloned().collect();
            let rep = trotter_kato_check_with(
                &harness,
                cfg.scheme.r(),
                &kinds,
                &cfg.problem.initial,
                &cfg.m_list,
                &cfg.h_list,
            )?;
            write_file(&csv, |w| report::write_trotter_kato(w, &rep))?;
            let bound = th.refinement_ratio;
            let pass = rep
                .max_per_m
                .windows(2)
                .all(|w| w[1].1 <= 1e-13 || w[0].1 >= bound * w[1].1);
            checks.push(Check::new(
                "refinement ratio",
                pass,
                format!("each grid refinement must cut the error by >= {bound}"),
            ));
            report::trotter_kato_lines(&rep)
        }
    };
    let summary = report::summary(cfg, &body, &checks);
    let summary_path = cfg.output.join("summary.txt");
    fs::write(&summary_path, &summary)?;
    Ok(Outcome {
        csv,
        summary_path,
        summary,
        checks,
    })
}

fn convergence_checks(cfg: &ExperimentConfig, rep: &ConvergenceReport, checks: &mut Vec<Check>) {
    let th = &cfg.thresholds;
    let tol = th.order_tolerance;
    let order_check = |name: &str, target: f64, orders: &[(usize, Option<f64>)]| {
        let pass = !orders.is_empty()
            && orders
                .iter()
                .all(|(_, o)| o.is_some_and(|o| (o - target).abs() <= tol));
        let got: Vec<String> = orders
            .iter()
            .map(|(k, o)| format!("{k}: {}", o.map_or("n/a".into(), |v| format!("{v:.4}"))))
            .collect();
        Check::new(name, pass, format!("target {target} ± {tol}; got [{}]", got.join(", ")))
    };
    if let Some(target) = th.order_in_n {
        checks.push(order_check("order in n", target, &rep.order_in_n));
    }
    if let Some(target) = th.order_in_m {
        checks.push(order_check("order in m", target, &rep.order_in_m));
    }
    if let Some(slack) = th.diagonal_slack {
        checks.push(Check::new(
            "diagonal decrease",
            rep.diagonal.len() >= 2 && rep.diagonal_decreasing(slack),
            format!("{} diagonal points, slack {slack}", rep.diagonal.len()),
        ));
    }
    if let Some(bound) = th.max_error {
        let worst = rep.rows.iter().map(|r| r.error).fold(0.0, f64::max);
        checks.push(Check::new(
            "max error",
            worst <= bound,
            format!("largest error {} against bound {bound}", report::float(worst)),
        ));
    }
}
