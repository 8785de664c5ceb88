//! CSV tables and the plain-text summary.
//!
//! Floats are written with 17 significant digits so a table round-trips
//! exactly and repeated runs compare byte for byte.

use std::fmt::Write as _;
use std::io::{self, Write};

use opsplit::analysis::{
    ConsistencyReport, ConvergenceReport, StabilityReport, TrotterKatoReport,
};

use crate::config::{ExperimentConfig, Study};

/// `x` with 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_convergence(w: &mut impl Write, report: &ConvergenceReport) -> io::Result<()> {
    writeln!(w, "m,n,t,error,seconds")?;
    for r in &report.rows {
        writeln!(w, "{},{},{},{},{}", r.m, r.n, float(r.t), float(r.error), float(r.seconds))?;
    }
    Ok(())
}

pub fn write_consistency(w: &mut impl Write, report: &ConsistencyReport) -> io::Result<()> {
    writeln!(w, "m,h,quotient_error")?;
    for r in &report.rows {
        writeln!(w, "{},{},{}", r.m, float(r.h), float(r.quotient_error))?;
    }
    Ok(())
}

pub fn write_stability(w: &mut impl Write, report: &StabilityReport) -> io::Result<()> {
    writeln!(w, "m,h,k,power_norm")?;
    for r in &report.rows {
        writeln!(w, "{},{},{},{}", r.m, float(r.h), r.k, float(r.power_norm))?;
    }
    Ok(())
}

pub fn write_trotter_kato(w: &mut impl Write, report: &TrotterKatoReport) -> io::Result<()> {
    writeln!(w, "m,h,error")?;
    for r in &report.rows {
        writeln!(w, "{},{},{}", r.m, float(r.h), float(r.error))?;
    }
    Ok(())
}

/// One pass/fail line of the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// What a study measures, in words.
pub fn statement(study: Study) -> &'static str {
    match study {
        Study::Convergence => {
            "convergence of J_m F_m(t/n)^n P_m x to the exact solution u(t) as m and n grow together"
        }
        Study::Consistency => {
            "consistency of the one-step map: (J_m F_m(h) P_m x - J_m P_m x)/h -> J_m (A_m + B_m) P_m x as h -> 0, uniformly over the grid sizes"
        }
        Study::Stability => "power bounds ||F_m(h)^k|| <= M e^{k omega h} for all m, h and k",
        Study::TrotterKato => {
            "spatial approximation J_m T_m(h) P_m x -> T(h) x, uniformly for h in the scanned interval"
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

pub fn convergence_lines(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    for (m, o) in &report.order_in_n {
        let _ = writeln!(s, "order in n at m = {m}: {}", opt(*o));
    }
    for (n, o) in &report.order_in_m {
        let _ = writeln!(s, "order in m at n = {n}: {}", opt(*o));
    }
    for (m, e) in &report.diagonal {
        let _ = writeln!(s, "diagonal m = n = {m}: error {}", float(*e));
    }
    s
}

pub fn consistency_lines(report: &ConsistencyReport) -> String {
    let mut s = String::new();
    for (h, e) in &report.sup_over_m {
        let _ = writeln!(s, "h = {h}: sup over m {}", float(*e));
    }
    for (i, r) in report.ratios().iter().enumerate() {
        let _ = writeln!(s, "ratio {} -> {}: {r:.4}", i, i + 1);
    }
    s
}

pub fn stability_lines(report: &StabilityReport) -> String {
    let mut s = String::new();
    let worst = report.rows.iter().map(|r| r.power_norm).fold(0.0, f64::max);
    let _ = writeln!(s, "largest power norm: {}", float(worst));
    for (m, w) in &report.candidates {
        let _ = writeln!(s, "omega = {w}: M = {}", float(*m));
    }
    let _ = writeln!(s, "fitted (M, omega) = ({}, {})", float(report.fitted.0), report.fitted.1);
    s
}

pub fn trotter_kato_lines(report: &TrotterKatoReport) -> String {
    let mut s = String::new();
    for (m, e) in &report.max_per_m {
        let _ = writeln!(s, "m = {m}: max error over h {}", float(*e));
    }
    for r in &report.ratios {
        let _ = writeln!(s, "refinement ratio: {r:.4}");
    }
    s
}

pub fn summary(cfg: &ExperimentConfig, body: &str, checks: &[Check]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "study: {}", cfg.study.name());
    let _ = writeln!(s, "measures: {}", statement(cfg.study));
    let _ = writeln!(s, "scheme: {}", cfg.scheme.label());
    let _ = writeln!(s, "initial: {}", cfg.initial_text);
    let _ = writeln!(s);
    s.push_str(body);
    let _ = writeln!(s);
    if checks.is_empty() {
        let _ = writeln!(s, "no thresholds configured");
    }
    for c in checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{verdict} {}: {}", c.name, c.detail);
    }
    let all = checks.iter().all(|c| c.pass);
    let _ = writeln!(s, "overall: {}", if all { "PASS" } else { "FAIL" });
    s
}
