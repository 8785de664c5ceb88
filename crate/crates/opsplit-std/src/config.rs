//! Experiment configuration files (TOML).
//!
//! Relative `output` paths resolve against the directory holding the config.

use std::fmt;
use std::path::{Path, PathBuf};

use opsplit::analysis::{ProblemSpec, Reference, StabilityTargets};
use opsplit::spatial::{reference_grid, ContinuousFunction, OperatorKind, Stencil};
use opsplit::splitting::{SplitScheme, StageScheme, Variant};
use opsplit::tolerances::{MAX_DENSE_SIZE, MAX_POWER};
use serde::Deserialize;

use crate::expr::Expr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::Invalid {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// Offending field, when the error concerns one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Self::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Convergence,
    Consistency,
    Stability,
    TrotterKato,
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::Consistency => "consistency",
            Self::Stability => "stability",
            Self::TrotterKato => "trotter_kato",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "convergence" => Self::Convergence,
            "consistency" => Self::Consistency,
            "stability" => Self::Stability,
            "trotter_kato" => Self::TrotterKato,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            Self::One(t) => vec![t],
            Self::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Rate {
    Constant(f64),
    Expression(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    kind: String,
    nu: Option<f64>,
    c: Option<f64>,
    stencil: Option<String>,
    rho: Option<Rate>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    a: OneOrMany<RawOperator>,
    b: Option<OneOrMany<RawOperator>>,
    initial: String,
    reference: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    splitting: String,
    theta: Option<f64>,
    r: String,
    q: Option<String>,
}

/// Pass/fail criteria written to the summary; any failure gives exit code 2.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Expected temporal order at every `m` (convergence).
    pub order_in_n: Option<f64>,
    /// Expected spatial order at every `n` (convergence).
    pub order_in_m: Option<f64>,
    pub order_tolerance: f64,
    /// Allowed relative growth between consecutive diagonal errors (convergence).
    pub diagonal_slack: Option<f64>,
    /// Largest accepted error in any cell (convergence).
    pub max_error: Option<f64>,
    /// Largest accepted ratio of successive sup-over-m quotient errors (consistency).
    pub consistency_ratio: Option<f64>,
    /// Power-bound targets (stability).
    pub stability_m: f64,
    pub stability_omega: f64,
    /// Smallest accepted error reduction per grid refinement (Trotter–Kato).
    pub refinement_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            order_in_n: None,
            order_in_m: None,
            order_tolerance: 0.2,
            diagonal_slack: None,
            max_error: None,
            consistency_ratio: None,
            stability_m: 1.0,
            stability_omega: 0.0,
            refinement_ratio: 2.0,
        }
    }
}

impl Thresholds {
    pub fn stability_targets(&self) -> StabilityTargets {
        StabilityTargets {
            m: self.stability_m,
            omega: self.stability_omega,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    study: String,
    problem: RawProblem,
    scheme: RawScheme,
    #[serde(default)]
    m_list: Vec<usize>,
    #[serde(default)]
    n_list: Vec<usize>,
    #[serde(default)]
    h_list: Vec<f64>,
    t: Option<f64>,
    k_max: Option<usize>,
    h_points: Option<usize>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default)]
    timing: bool,
    #[serde(default)]
    thresholds: Thresholds,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub study: Study,
    pub problem: ProblemSpec,
    pub initial_text: String,
    pub reference: Reference,
    pub scheme: SplitScheme,
    pub m_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub h_list: Vec<f64>,
    pub t: f64,
    pub k_max: usize,
    pub output: PathBuf,
    pub threads: usize,
    pub timing: bool,
    pub thresholds: Thresholds,
}

/// Periodicity defect `|f(0) - f(1)|` accepted for initial data.
const PERIODICITY: f64 = 1e-9;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses and validates `text`; relative output paths join onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        validate(raw, base)
    }
}

fn validate(raw: RawConfig, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let study = Study::parse(&raw.study).ok_or_else(|| {
        ConfigError::invalid(
            "study",
            format!(
                "unknown study `{}` (convergence, consistency, stability, trotter_kato)",
                raw.study
            ),
        )
    })?;

    let scheme = scheme(&raw.scheme)?;

    let a = operators(raw.problem.a.into_vec(), "problem.a")?;
    if a.is_empty() {
        return Err(ConfigError::invalid("problem.a", "at least one operator is required"));
    }
    let b = match raw.problem.b {
        Some(b) => operators(b.into_vec(), "problem.b")?,
        None => Vec::new(),
    };
    let initial = Expr::parse(&raw.problem.initial)
        .map_err(|e| ConfigError::invalid("problem.initial", e))?;
    if initial.periodicity_defect() > PERIODICITY {
        return Err(ConfigError::invalid(
            "problem.initial",
            "initial data must be periodic on [0, 1]",
        ));
    }
    let initial_text = initial.text().to_string();
    let problem = ProblemSpec::new(a, b, initial.into_function());
    let reference = match raw.problem.reference.as_deref().unwrap_or("analytic") {
        "analytic" => Reference::Analytic,
        "expm" => Reference::Expm,
        other => {
            return Err(ConfigError::invalid(
                "problem.reference",
                format!("unknown reference `{other}` (analytic, expm)"),
            ))
        }
    };
    let needs_analytic = matches!(study, Study::TrotterKato)
        || (study == Study::Convergence && reference == Reference::Analytic);
    if needs_analytic && problem.exact_solution().is_err() {
        return Err(ConfigError::invalid(
            "problem.reference",
            "no closed-form solution: needs constant reaction and trigonometric-polynomial initial data",
        ));
    }

    let m_list = raw.m_list;
    if m_list.is_empty() {
        return Err(ConfigError::invalid("m_list", "must not be empty"));
    }
    if m_list.iter().any(|&m| m < 2) {
        return Err(ConfigError::invalid("m_list", "grid sizes must be >= 2"));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::invalid("m_list", "must be strictly increasing"));
    }
    let t = raw.t.unwrap_or(0.0);
    if !(t.is_finite() && t >= 0.0) {
        return Err(ConfigError::invalid("t", "must be finite and >= 0"));
    }
    let mut n_list = Vec::new();
    let mut h_list = raw.h_list;
    let mut k_max = 0;
    match study {
        Study::Convergence => {
            if raw.t.is_none() {
                return Err(ConfigError::invalid("t", "required for convergence studies"));
            }
            n_list = raw.n_list;
            if n_list.is_empty() || n_list.contains(&0) {
                return Err(ConfigError::invalid("n_list", "must be nonempty with n >= 1"));
            }
            if n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::invalid("n_list", "must be strictly increasing"));
            }
        }
        Study::Consistency => {
            require_h(&h_list, true)?;
        }
        Study::Stability => {
            if let Some(&m) = m_list.iter().find(|&&m| m > MAX_DENSE_SIZE) {
                return Err(ConfigError::invalid(
                    "m_list",
                    format!("m = {m} exceeds the dense limit {MAX_DENSE_SIZE}"),
                ));
            }
            require_h(&h_list, false)?;
            k_max = raw.k_max.unwrap_or(MAX_POWER);
            if k_max == 0 || k_max > MAX_POWER {
                return Err(ConfigError::invalid("k_max", format!("must lie in 1..={MAX_POWER}")));
            }
        }
        Study::TrotterKato => {
            if h_list.is_empty() {
                let points = raw.h_points.unwrap_or(11);
                if points < 2 || raw.t.is_none() {
                    return Err(ConfigError::invalid(
                        "h_list",
                        "give h_list, or t with h_points >= 2",
                    ));
                }
                h_list = (0..points).map(|i| t * i as f64 / (points - 1) as f64).collect();
            }
            require_h(&h_list, false)?;
        }
    }

    let threads = raw.threads.unwrap_or(1);
    if threads == 0 {
        return Err(ConfigError::invalid("threads", "must be >= 1"));
    }
    let th = &raw.thresholds;
    if !(th.order_tolerance >= 0.0) {
        return Err(ConfigError::invalid("thresholds.order_tolerance", "must be >= 0"));
    }
    if !(th.stability_m >= 1.0 && th.stability_omega >= 0.0) {
        return Err(ConfigError::invalid(
            "thresholds.stability_m",
            "targets need M >= 1 and omega >= 0",
        ));
    }
    let output = raw.output.unwrap_or_else(|| PathBuf::from("out"));
    let output = if output.is_relative() {
        base.join(output)
    } else {
        output
    };

    Ok(ExperimentConfig {
        study,
        problem,
        initial_text,
        reference,
        scheme,
        m_list,
        n_list,
        h_list,
        t,
        k_max,
        output,
        threads,
        timing: raw.timing,
        thresholds: raw.thresholds,
    })
}

fn require_h(h_list: &[f64], positive: bool) -> Result<(), ConfigError> {
    if h_list.is_empty() {
        return Err(ConfigError::invalid("h_list", "must not be empty"));
    }
    let ok = |h: &f64| h.is_finite() && if positive { *h > 0.0 } else { *h >= 0.0 };
    if !h_list.iter().all(ok) {
        let bound = if positive { "> 0" } else { ">= 0" };
        return Err(ConfigError::invalid("h_list", format!("step sizes must be finite and {bound}")));
    }
    Ok(())
}

fn scheme(raw: &RawScheme) -> Result<SplitScheme, ConfigError> {
    let variant = match raw.splitting.as_str() {
        "none" => Variant::None,
        "sequential" => Variant::Sequential,
        "strang" => Variant::Strang,
        "weighted" => {
            let theta = raw
                .theta
                .ok_or_else(|| ConfigError::invalid("scheme.theta", "required for weighted splitting"))?;
            if !(0.0..=1.0).contains(&theta) {
                return Err(ConfigError::invalid(
                    "scheme.theta",
                    format!("theta = {theta} lies outside [0, 1]"),
                ));
            }
            Variant::Weighted(theta)
        }
        other => {
            return Err(ConfigError::invalid(
                "scheme.splitting",
                format!("unknown splitting `{other}` (none, sequential, strang, weighted)"),
            ))
        }
    };
    if raw.theta.is_some() && !matches!(variant, Variant::Weighted(_)) {
        return Err(ConfigError::invalid(
            "scheme.theta",
            "theta only applies to weighted splitting",
        ));
    }
    let r: StageScheme = raw
        .r
        .parse()
        .map_err(|e| ConfigError::invalid("scheme.r", e))?;
    let q: StageScheme = match &raw.q {
        Some(q) => q.parse().map_err(|e| ConfigError::invalid("scheme.q", e))?,
        None => r.clone(),
    };
    for (field, stage) in [("scheme.r", &r), ("scheme.q", &q)] {
        if let StageScheme::Rational(f) = stage {
            if let Err(e) = f.partial_fractions() {
                return Err(ConfigError::invalid(field, e));
            }
        }
    }
    SplitScheme::new(variant, r, q).map_err(|e| ConfigError::invalid("scheme.theta", e))
}

fn operators(raw: Vec<RawOperator>, field: &str) -> Result<Vec<OperatorKind>, ConfigError> {
    raw.into_iter()
        .enumerate()
        .map(|(i, op)| operator(op, &format!("{field}[{i}]")))
        .collect()
}

fn operator(raw: RawOperator, field: &str) -> Result<OperatorKind, ConfigError> {
    let unexpected = |name: &str, present: bool| {
        if present {
            Err(ConfigError::invalid(
                format!("{field}.{name}"),
                format!("not a parameter of `{}`", raw.kind),
            ))
        } else {
            Ok(())
        }
    };
    match raw.kind.as_str() {
        "diffusion" => {
            unexpected("c", raw.c.is_some())?;
            unexpected("stencil", raw.stencil.is_some())?;
            unexpected("rho", raw.rho.is_some())?;
            let nu = raw
                .nu
                .ok_or_else(|| ConfigError::invalid(format!("{field}.nu"), "required"))?;
            if !(nu.is_finite() && nu >= 0.0) {
                return Err(ConfigError::invalid(format!("{field}.nu"), "must be finite and >= 0"));
            }
            Ok(OperatorKind::Diffusion { nu })
        }
        "advection" => {
            unexpected("nu", raw.nu.is_some())?;
            unexpected("rho", raw.rho.is_some())?;
            let c = raw
                .c
                .ok_or_else(|| ConfigError::invalid(format!("{field}.c"), "required"))?;
            if !c.is_finite() {
                return Err(ConfigError::invalid(format!("{field}.c"), "must be finite"));
            }
            let stencil = match raw.stencil.as_deref().unwrap_or("centered") {
                "centered" => Stencil::Centered,
                "upwind" => Stencil::Upwind,
                other => {
                    return Err(ConfigError::invalid(
                        format!("{field}.stencil"),
                        format!("unknown stencil `{other}` (centered, upwind)"),
                    ))
                }
            };
            Ok(OperatorKind::Advection { c, stencil })
        }
        "reaction" => {
            unexpected("nu", raw.nu.is_some())?;
            unexpected("c", raw.c.is_some())?;
            unexpected("stencil", raw.stencil.is_some())?;
            let rho_field = format!("{field}.rho");
            let rho = match raw.rho {
                None => return Err(ConfigError::invalid(rho_field, "required")),
                Some(Rate::Constant(v)) => ContinuousFunction::constant(v),
                Some(Rate::Expression(text)) => Expr::parse(&text)
                    .map_err(|e| ConfigError::invalid(&rho_field, e))?
                    .into_function(),
            };
            if reference_grid().any(|s| !(rho.eval(s) <= 0.0)) {
                return Err(ConfigError::invalid(rho_field, "reaction rate must be <= 0 on [0, 1]"));
            }
            Ok(OperatorKind::Reaction { rho })
        }
        other => Err(ConfigError::invalid(
            format!("{field}.kind"),
            format!("unknown operator `{other}` (diffusion, advection, reaction)"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
study = "convergence"
t = 0.1
m_list = [32]
n_list = [8, 16, 32]

[problem]
a = { kind = "diffusion", nu = 1.0 }
initial = "sin(2*pi*s)"

[scheme]
splitting = "none"
r = "backward_euler"
"#;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("/tmp/base"))
    }

    #[test]
    fn minimal_config() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.study, Study::Convergence);
        assert_eq!(cfg.n_list, vec![8, 16, 32]);
        assert_eq!(cfg.output, PathBuf::from("/tmp/base/out"));
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.scheme.q().name(), "backward_euler");
    }

    #[test]
    fn theta_out_of_range_names_field() {
        let text = MINIMAL.replace("splitting = \"none\"", "splitting = \"weighted\"\ntheta = 1.5");
        let err = parse(&text).unwrap_err();
        assert!(err.field().unwrap().contains("theta"), "{err}");
        assert!(err.to_string().contains("theta"));
    }

    #[test]
    fn operator_lists_and_expressions() {
        let text = MINIMAL.replace(
            "a = { kind = \"diffusion\", nu = 1.0 }",
            "a = [{ kind = \"diffusion\", nu = 1.0 }]\nb = [{ kind = \"reaction\", rho = \"-(1+sin(2*pi*s))\" }, { kind = \"advection\", c = 0.5, stencil = \"upwind\" }]\nreference = \"expm\"",
        );
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.problem.b.len(), 2);
        assert_eq!(cfg.reference, Reference::Expm);
    }

    #[test]
    fn field_errors() {
        let cases = [
            (MINIMAL.replace("nu = 1.0", "nu = -1.0"), "problem.a[0].nu"),
            (MINIMAL.replace("\"backward_euler\"", "\"foo\""), "scheme.r"),
            (MINIMAL.replace("[8, 16, 32]", "[16, 8]"), "n_list"),
            (MINIMAL.replace("[32]", "[1]"), "m_list"),
            (MINIMAL.replace("sin(2*pi*s)", "s"), "problem.initial"),
            (MINIMAL.replace("\"convergence\"", "\"nope\""), "study"),
            (MINIMAL.replace("t = 0.1", "t = -1"), "t"),
            (MINIMAL.replace("\"backward_euler\"", "\"custom:[1]/[1,1]\""), "scheme.r"),
        ];
        for (text, field) in cases {
            let err = parse(&text).unwrap_err();
            assert_eq!(err.field(), Some(field), "{err}");
        }
    }

    #[test]
    fn positive_reaction_rejected() {
        let text = MINIMAL.replace(
            "a = { kind = \"diffusion\", nu = 1.0 }",
            "a = { kind = \"diffusion\", nu = 1.0 }\nb = { kind = \"reaction\", rho = 0.5 }",
        );
        assert_eq!(parse(&text).unwrap_err().field(), Some("problem.b[0].rho"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\nbogus = 3\n");
        assert!(matches!(parse(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn trotter_kato_h_grid_from_t() {
        let text = MINIMAL
            .replace("\"convergence\"", "\"trotter_kato\"")
            .replace("m_list = [32]", "m_list = [32, 64]\nh_points = 5");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.h_list, vec![0.0, 0.025, 0.05, 0.07500000000000001, 0.1]);
    }
}
