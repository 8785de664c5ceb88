//! Experiment harness: convergence tables over `(m, n)`, difference-quotient
//! consistency, power-bound stability scans and spatial Trotter–Kato errors.
//!
//! Every study is a list of independent cells evaluated through a [`Harness`];
//! rows come back in input order whatever the execution order, so reports are
//! deterministic.
//!
//! With [`Variant::None`] the studies integrate the unsplit generator `A + B`
//! (the `r` stage acts on the whole operator).

use alloc::vec::Vec;

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::oracle::{exact_solution, expm, ExactSolution, OracleError, ProblemTag};
use crate::spatial::{
    build_operator, reference_grid, ContinuousFunction, DiscreteOperator, OperatorKind,
    ProjectionPair, SpatialError, TrigPolynomial,
};
use crate::splitting::{SplitError, SplitProblem, SplitScheme, StageScheme, Variant};
use crate::tolerances::{MAX_DENSE_SIZE, MAX_POWER, STABILITY_FIT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no reference solution covers this problem")]
    ReferenceUnavailable,
    #[error("grid size {m} exceeds the dense limit of {MAX_DENSE_SIZE}")]
    SizeLimit { m: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// Evaluates independent cells of a study.
pub trait Harness: Sync {
    /// `(0..count).map(f)`, results in index order.
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Runs `f` and reports wall-clock seconds, or `0.0` when not measured.
    fn timed<T>(&self, f: impl FnOnce() -> T) -> (T, f64) {
        (f(), 0.0)
    }
}

/// Evaluates cells one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Harness for Serial {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Continuous problem `u' = (A + B)u` described by operator kinds, to be
/// discretised on any grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub a: Vec<OperatorKind>,
    pub b: Vec<OperatorKind>,
    pub initial: ContinuousFunction,
}

impl ProblemSpec {
    pub fn new(a: Vec<OperatorKind>, b: Vec<OperatorKind>, initial: ContinuousFunction) -> Self {
        Self { a, b, initial }
    }

    /// `A = ν∂²`, `B = -c∂` (centered).
    pub fn advection_diffusion(nu: f64, c: f64, initial: ContinuousFunction) -> Self {
        Self::new(
            alloc::vec![OperatorKind::diffusion(nu)],
            alloc::vec![OperatorKind::advection(c)],
            initial,
        )
    }

    /// `A = ν∂²`, `B = ρ` (constant).
    pub fn diffusion_reaction(nu: f64, rho: f64, initial: ContinuousFunction) -> Self {
        Self::new(
            alloc::vec![OperatorKind::diffusion(nu)],
            alloc::vec![OperatorKind::reaction(rho)],
            initial,
        )
    }

    /// Discretisation on the `m`-point grid with initial data `P_m x`.
    pub fn at(&self, m: usize) -> Result<SplitProblem, AnalysisError> {
        let pair = ProjectionPair::new(m)?;
        let a = sum_of(&self.a, m)?.ok_or(AnalysisError::InvalidInput("A has no operators"))?;
        let b = sum_of(&self.b, m)?.unwrap_or_else(|| DiscreteOperator::zero(m));
        Ok(SplitProblem::new(a, b, pair.project(&self.initial))?)
    }

    /// Closed-form family of `A + B`, if it has one.
    pub fn tag(&self) -> Option<ProblemTag> {
        tag_of(self.a.iter().chain(&self.b))
    }

    pub fn exact_solution(&self) -> Result<ExactSolution, AnalysisError> {
        let tag = self.tag().ok_or(AnalysisError::ReferenceUnavailable)?;
        exact_solution(tag, &self.initial).map_err(|_| AnalysisError::ReferenceUnavailable)
    }
}

fn sum_of(kinds: &[OperatorKind], m: usize) -> Result<Option<DiscreteOperator>, SpatialError> {
    let parts = kinds
        .iter()
        .map(|k| build_operator(k, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DiscreteOperator::sum(&parts))
}

fn tag_of<'a>(kinds: impl Iterator<Item = &'a OperatorKind>) -> Option<ProblemTag> {
    let (mut nu, mut c, mut rho) = (0.0, 0.0, 0.0);
    for kind in kinds {
        match kind {
            OperatorKind::Diffusion { nu: v } => nu += v,
            OperatorKind::Advection { c: v, .. } => c += v,
            OperatorKind::Reaction { rho: f } => {
                let p = match f.fourier() {
                    Some(p) => p.clone(),
                    None => TrigPolynomial::fit(&|s| f.eval(s), 0)?,
                };
                if !p.is_constant() {
                    return None;
                }
                rho += p.constant;
            }
        }
    }
    Some(if rho == 0.0 {
        ProblemTag::AdvectionDiffusion { nu, c }
    } else if c == 0.0 {
        ProblemTag::DiffusionReaction { nu, rho }
    } else {
        ProblemTag::AdvectionDiffusionReaction { nu, c, rho }
    })
}

fn effective(scheme: &SplitScheme, problem: SplitProblem) -> SplitProblem {
    if scheme.variant() == Variant::None {
        problem.unsplit()
    } else {
        problem
    }
}

/// `‖J_m v - u‖_sup` on the reference grid, `u` given by its reference-grid values.
fn lifted_error(v: &[f64], reference: &[f64]) -> Result<f64, AnalysisError> {
    let lin = ProjectionPair::new(v.len())?.interpolate(v)?;
    Ok(reference_grid()
        .zip(reference)
        .map(|(s, u)| (lin.eval(s) - u).abs())
        .fold(0.0, f64::max))
}

fn increasing(list: &[usize]) -> bool {
    !list.is_empty() && list.windows(2).all(|w| w[0] < w[1])
}

/// Source of the exact solution in a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Closed-form solution of the continuous problem, compared on the reference grid.
    Analytic,
    /// `e^{t(A_m + B_m)} P_m x`, compared at the nodes.
    Expm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub error: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Per `m`: slope in `n` over the last three `n` values.
    pub order_in_n: Vec<(usize, Option<f64>)>,
    /// Per `n`: slope in `m` over the last three `m` values.
    pub order_in_m: Vec<(usize, Option<f64>)>,
    /// Errors along `m = n`.
    pub diagonal: Vec<(usize, f64)>,
}

impl ConvergenceReport {
    pub fn error(&self, m: usize, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.m == m && r.n == n)
            .map(|r| r.error)
    }

    pub fn order_in_n_at(&self, m: usize) -> Option<f64> {
        self.order_in_n.iter().find(|(k, _)| *k == m).and_then(|(_, o)| *o)
    }

    pub fn order_in_m_at(&self, n: usize) -> Option<f64> {
        self.order_in_m.iter().find(|(k, _)| *k == n).and_then(|(_, o)| *o)
    }

    /// Each diagonal error is at most `(1 + slack)` times the previous one.
    pub fn diagonal_decreasing(&self, slack: f64) -> bool {
        self.diagonal.windows(2).all(|w| w[1].1 <= (1.0 + slack) * w[0].1)
    }
}

fn last_three_order(points: &[(usize, f64)]) -> Option<f64> {
    let tail = &points[points.len().saturating_sub(3)..];
    order_estimate(tail).ok()
}

pub fn convergence_study(
    scheme: &SplitScheme,
    spec: &ProblemSpec,
    t: f64,
    m_list: &[usize],
    n_list: &[usize],
    reference: Reference,
) -> Result<ConvergenceReport, AnalysisError> {
    convergence_study_with(&Serial, scheme, spec, t, m_list, n_list, reference)
}

/// Error of `J_m F_m(t/n)^n P_m x` against the exact solution for every `(m, n)`.
pub fn convergence_study_with<H: Harness>(
    harness: &H,
    scheme: &SplitScheme,
    spec: &ProblemSpec,
    t: f64,
    m_list: &[usize],
    n_list: &[usize],
    reference: Reference,
) -> Result<ConvergenceReport, AnalysisError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(AnalysisError::InvalidInput("t must be finite and >= 0"));
    }
    if !increasing(m_list) || !increasing(n_list) {
        return Err(AnalysisError::InvalidInput("m and n lists must be nonempty and increasing"));
    }
    let exact_values: Option<Vec<f64>> = match reference {
        Reference::Analytic => {
            let sol = spec.exact_solution()?;
            Some(reference_grid().map(|s| sol.eval(t, s)).collect())
        }
        Reference::Expm => None,
    };
    let problems = harness
        .map(m_list.len(), |i| -> Result<_, AnalysisError> {
            let p = effective(scheme, spec.at(m_list[i])?);
            let grid_ref = match reference {
                Reference::Expm => Some(expm(p.generator().matrix(), t)?.matvec(p.initial())),
                Reference::Analytic => None,
            };
            Ok((p, grid_ref))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let cols = n_list.len();
    let cells = harness.map(m_list.len() * cols, |idx| -> Result<ConvergenceRow, AnalysisError> {
        let (i, j) = (idx / cols, idx % cols);
        let (problem, grid_ref) = &problems[i];
        let (v, seconds) = harness.timed(|| crate::splitting::evolve(scheme, problem, t, n_list[j]));
        let v = v?;
        let error = match (grid_ref, &exact_values) {
            (Some(r), _) => v.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            (None, Some(u)) => lifted_error(&v, u)?,
            (None, None) => unreachable!("a reference is always prepared"),
        };
        Ok(ConvergenceRow {
            m: m_list[i],
            n: n_list[j],
            t,
            error,
            seconds,
        })
    });
    let rows = cells.into_iter().collect::<Result<Vec<_>, _>>()?;

    let order_in_n = m_list
        .iter()
        .map(|&m| {
            let pts: Vec<_> = rows.iter().filter(|r| r.m == m).map(|r| (r.n, r.error)).collect();
            (m, last_three_order(&pts))
        })
        .collect();
    let order_in_m = n_list
        .iter()
        .map(|&n| {
            let pts: Vec<_> = rows.iter().filter(|r| r.n == n).map(|r| (r.m, r.error)).collect();
            (n, last_three_order(&pts))
        })
        .collect();
    let diagonal = rows
        .iter()
        .filter(|r| r.m == r.n)
        .map(|r| (r.m, r.error))
        .collect();
    Ok(ConvergenceReport {
        rows,
        order_in_n,
        order_in_m,
        diagonal,
    })
}

/// Least-squares slope of `log(error)` against `log(1/n)`.
pub fn order_estimate(points: &[(usize, f64)]) -> Result<f64, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::DegenerateData("need at least three points"));
    }
    if points.iter().any(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(AnalysisError::DegenerateData("errors must be positive and finite"));
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) || points[0].0 == 0 {
        return Err(AnalysisError::DegenerateData("n must be positive and strictly increasing"));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(n, _)| -(*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub m: usize,
    pub h: f64,
    pub quotient_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    /// `(h, sup over m of the quotient error)` in `h_list` order.
    pub sup_over_m: Vec<(f64, f64)>,
}

impl ConsistencyReport {
    /// Ratios of successive entries of `sup_over_m`.
    pub fn ratios(&self) -> Vec<f64> {
        self.sup_over_m.windows(2).map(|w| w[1].1 / w[0].1).collect()
    }
}

/// `‖(F(h)v - v)/h - (A + B)v‖_max` for the problem's initial vector `v`.
///
/// The max norm of a grid vector equals the sup norm of its interpolant, so
/// this is also the lifted quotient error.
pub fn consistency_quotient_error(
    scheme: &SplitScheme,
    problem: &SplitProblem,
    h: f64,
) -> Result<f64, AnalysisError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(AnalysisError::InvalidInput("h must be finite and > 0"));
    }
    let problem = effective(scheme, problem.clone());
    let v = problem.initial().values();
    let fv = scheme.prepare(&problem, h)?.apply(v)?;
    let gv = problem.generator().matrix().matvec(v);
    Ok(fv
        .iter()
        .zip(v)
        .zip(&gv)
        .map(|((f, x), g)| ((f - x) / h - g).abs())
        .fold(0.0, f64::max))
}

pub fn chernoff_consistency(
    scheme: &SplitScheme,
    spec: &ProblemSpec,
    m_list: &[usize],
    h_list: &[f64],
    x: &ContinuousFunction,
) -> Result<ConsistencyReport, AnalysisError> {
    chernoff_consistency_with(&Serial, scheme, spec, m_list, h_list, x)
}

/// Quotient error of [`consistency_quotient_error`] with data `P_m x` for
/// every `(m, h)`, plus the supremum over `m` per `h`.
pub fn chernoff_consistency_with<H: Harness>(
    harness: &H,
    scheme: &SplitScheme,
    spec: &ProblemSpec,
    m_list: &[usize],
    h_list: &[f64],
    x: &ContinuousFunction,
) -> Result<ConsistencyReport, AnalysisError> {
    if !increasing(m_list) || h_list.is_empty() {
        return Err(AnalysisError::InvalidInput("m list must be increasing and h list nonempty"));
    }
    let spec = ProblemSpec {
        initial: x.clone(),
        ..spec.clone()
    };
    let problems = harness
        .map(m_list.len(), |i| spec.at(m_list[i]))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let cols = h_list.len();
    let rows = harness
        .map(m_list.len() * cols, |idx| {
            let (i, j) = (idx / cols, idx % cols);
            consistency_quotient_error(scheme, &problems[i], h_list[j]).map(|e| ConsistencyRow {
                m: m_list[i],
                h: h_list[j],
                quotient_error: e,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let sup_over_m = h_list
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let sup = (0..m_list.len())
                .map(|i| rows[i * cols + j].quotient_error)
                .fold(0.0, f64::max);
            (h, sup)
        })
        .collect();
    Ok(ConsistencyReport { rows, sup_over_m })
}

/// Bound `‖F(h)^k‖ ≤ M e^{kωh}` to certify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityTargets {
    pub m: f64,
    pub omega: f64,
}

impl Default for StabilityTargets {
    fn default() -> Self {
        Self { m: 1.0, omega: 0.0 }
    }
}

/// Growth rates tried by the `(M, ω)` fit.
pub const OMEGA_GRID: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub m: usize,
    pub h: f64,
    pub k: usize,
    pub power_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// `(M, ω)` with `M` minimal for each `ω` of [`OMEGA_GRID`].
    pub candidates: Vec<(f64, f64)>,
    /// Smallest candidate meeting the targets, else the one with least `M`.
    pub fitted: (f64, f64),
    pub targets: StabilityTargets,
    pub pass: bool,
}

/// Power ladder `1, 2, 4, …` capped by `k_max`, with `k_max` itself appended.
pub fn power_ladder(k_max: usize) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut k = 1;
    while k <= k_max {
        ks.push(k);
        k *= 2;
    }
    if ks.last() != Some(&k_max) && k_max > 0 {
        ks.push(k_max);
    }
    ks
}

/// Induced max-norms `‖F(h)^k‖` over [`power_ladder`].
pub fn power_norms(
    scheme: &SplitScheme,
    problem: &SplitProblem,
    h: f64,
    k_max: usize,
) -> Result<Vec<(usize, f64)>, AnalysisError> {
    if problem.m() > MAX_DENSE_SIZE {
        return Err(AnalysisError::SizeLimit { m: problem.m() });
    }
    if k_max == 0 || k_max > MAX_POWER {
        return Err(AnalysisError::InvalidInput("k_max must lie in 1..=1024"));
    }
    let problem = effective(scheme, problem.clone());
    let f = scheme.prepare(&problem, h)?.to_matrix()?;
    // squares[i] = F^(2^i)
    let mut squares = alloc::vec![f];
    while 1usize << squares.len() <= k_max {
        let last = squares.last().expect("nonempty");
        squares.push(last.matmul(last));
    }
    let power = |k: usize| {
        let mut acc: Option<crate::linalg::Matrix> = None;
        for (i, sq) in squares.iter().enumerate() {
            if k & (1 << i) != 0 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.matmul(sq),
                });
            }
        }
        acc.expect("k >= 1")
    };
    Ok(power_ladder(k_max)
        .into_iter()
        .map(|k| {
            let norm = if k.is_power_of_two() {
                squares[k.trailing_zeros() as usize].norm_inf()
            } else {
                power(k).norm_inf()
            };
            (k, norm)
        })
        .collect())
}

pub fn stability_scan(
    scheme: &SplitScheme,
    spec: &ProblemSpec,
    m_list: &[usize],
    h_list: &[f64],
    k_max: usize,
    targets: StabilityTargets,
) -> Result<StabilityReport, AnalysisError> {
    stability_scan_with(&Serial, scheme, spec, m_list, h_list, k_max, targets)
}

/// Power norms of `F_m(h)` on every `(m, h)` and the fitted `(M, ω)`.
pub fn stability_scan_with<H: Harness>(
    harness: &H,
    scheme: &SplitScheme,
    spec: &ProblemSpec,
    m_list: &[usize],
    h_list: &[f64],
    k_max: usize,
    targets: StabilityTargets,
) -> Result<StabilityReport, AnalysisError> {
    if !increasing(m_list) || h_list.is_empty() {
        return Err(AnalysisError::InvalidInput("m list must be increasing and h list nonempty"));
    }
    if let Some(&m) = m_list.iter().find(|&&m| m > MAX_DENSE_SIZE) {
        return Err(AnalysisError::SizeLimit { m });
    }
    if h_list.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
        return Err(AnalysisError::InvalidInput("h must be finite and >= 0"));
    }
    let cols = h_list.len();
    let cells = harness.map(m_list.len() * cols, |idx| -> Result<Vec<StabilityRow>, AnalysisError> {
        let (i, j) = (idx / cols, idx % cols);
        let (m, h) = (m_list[i], h_list[j]);
        let problem = spec.at(m)?;
        Ok(power_norms(scheme, &problem, h, k_max)?
            .into_iter()
            .map(|(k, power_norm)| StabilityRow { m, h, k, power_norm })
            .collect())
    });
    let mut rows = Vec::new();
    for cell in cells {
        rows.extend(cell?);
    }

    let candidates: Vec<(f64, f64)> = OMEGA_GRID
        .iter()
        .map(|&omega| {
            let m = rows
                .iter()
                .map(|r| r.power_norm / (r.k as f64 * omega * r.h).exp())
                .fold(1.0, f64::max);
            (m, omega)
        })
        .collect();
    let meets = |&(m, omega): &(f64, f64)| m <= targets.m + STABILITY_FIT && omega <= targets.omega;
    let passing = candidates.iter().copied().find(meets);
    let fitted = passing.unwrap_or_else(|| {
        candidates
            .iter()
            .copied()
            .fold((f64::INFINITY, 0.0), |best, c| if c.0 < best.0 { c } else { best })
    });
    Ok(StabilityReport {
        rows,
        candidates,
        fitted,
        targets,
        pass: passing.is_some(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterKatoRow {
    pub m: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterKatoReport {
    pub rows: Vec<TrotterKatoRow>,
    /// `(m, max over h of the error)`.
    pub max_per_m: Vec<(usize, f64)>,
    /// Successive ratios of `max_per_m`, coarse over fine.
    pub ratios: Vec<f64>,
    /// Every refinement cuts the maximal error by at least two, or the error
    /// is already at rounding level.
    pub pass: bool,
}

/// Errors below this are treated as exact in the refinement test.
const ROUNDING_FLOOR: f64 = 1e-13;

pub fn trotter_kato_check(
    stage: &StageScheme,
    kinds: &[OperatorKind],
    x: &ContinuousFunction,
    m_list: &[usize],
    h_grid: &[f64],
) -> Result<TrotterKatoReport, AnalysisError> {
    trotter_kato_check_with(&Serial, stage, kinds, x, m_list, h_grid)
}

/// `‖J_m S_m(h) P_m x - T(h)x‖_sup` for the generator `Σ kinds`, with `S_m`
/// the given stage propagator and `T` the closed-form semigroup.
pub fn trotter_kato_check_with<H: Harness>(
    harness: &H,
    stage: &StageScheme,
    kinds: &[OperatorKind],
    x: &ContinuousFunction,
    m_list: &[usize],
    h_grid: &[f64],
) -> Result<TrotterKatoReport, AnalysisError> {
    if !increasing(m_list) || h_grid.is_empty() {
        return Err(AnalysisError::InvalidInput("m list must be increasing and h grid nonempty"));
    }
    let spec = ProblemSpec::new(kinds.to_vec(), Vec::new(), x.clone());
    let exact = spec.exact_solution()?;
    let references: Vec<Vec<f64>> = harness.map(h_grid.len(), |j| {
        reference_grid().map(|s| exact.eval(h_grid[j], s)).collect()
    });
    let problems = harness
        .map(m_list.len(), |i| spec.at(m_list[i]))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let cols = h_grid.len();
    let rows = harness
        .map(m_list.len() * cols, |idx| -> Result<TrotterKatoRow, AnalysisError> {
            let (i, j) = (idx / cols, idx % cols);
            let p = &problems[i];
            let v = stage
                .prepare(h_grid[j], p.a().matrix())?
                .apply(p.initial())?;
            Ok(TrotterKatoRow {
                m: m_list[i],
                h: h_grid[j],
                error: lifted_error(&v, &references[j])?,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let max_per_m: Vec<(usize, f64)> = m_list
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let e = rows[i * cols..(i + 1) * cols]
                .iter()
                .map(|r| r.error)
                .fold(0.0, f64::max);
            (m, e)
        })
        .collect();
    let ratios = max_per_m.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let pass = max_per_m
        .windows(2)
        .all(|w| w[1].1 <= ROUNDING_FLOOR || w[0].1 >= 2.0 * w[1].1);
    Ok(TrotterKatoReport {
        rows,
        max_per_m,
        ratios,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::rational::RationalFunction;
    use crate::spatial::Smoothness;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn be() -> RationalFunction {
        RationalFunction::backward_euler()
    }

    #[test]
    fn order_estimate_examples() {
        assert_relative_eq!(
            order_estimate(&[(10, 1e-2), (20, 5e-3), (40, 2.5e-3)]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            order_estimate(&[(10, 1e-2), (20, 2.5e-3), (40, 6.25e-4)]).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            order_estimate(&[(10, 1e-2), (20, 1e-2)]),
            Err(AnalysisError::DegenerateData(_))
        ));
        assert!(order_estimate(&[(10, 1e-2), (20, 0.0), (40, 1e-3)]).is_err());
        assert!(order_estimate(&[(10, 1e-2), (10, 1e-3), (40, 1e-3)]).is_err());
    }

    #[test]
    fn scalar_quotient_error() {
        let a = -1.0;
        let p = SplitProblem::new(
            DiscreteOperator::dense(Matrix::from_diagonal(&[a])),
            DiscreteOperator::zero(1),
            vec![1.0],
        )
        .unwrap();
        let s = SplitScheme::uniform(Variant::None, be()).unwrap();
        for h in [0.1, 0.05, 0.3] {
            let e = consistency_quotient_error(&s, &p, h).unwrap();
            // (r(ha) - 1)/h - a = a/(1 - ha) - a
            let oracle = (a * a * h / (1.0 - h * a)).abs();
            assert_relative_eq!(e, oracle, max_relative = 1e-12);
        }
        assert_relative_eq!(
            consistency_quotient_error(&s, &p, 0.1).unwrap(),
            0.0909090909,
            epsilon = 1e-9
        );
    }

    #[test]
    fn reaction_only_quotient_matches_scalar() {
        let rho = -1.0;
        let spec = ProblemSpec::new(
            vec![OperatorKind::reaction(rho)],
            vec![],
            ContinuousFunction::constant(2.0),
        );
        let s = SplitScheme::uniform(Variant::None, be()).unwrap();
        let h = 0.0125;
        let rep = chernoff_consistency(&s, &spec, &[16, 32], &[0.1, h], &spec.initial).unwrap();
        let oracle = (rho * rho * h / (1.0 - h * rho)).abs() * 2.0;
        assert!((rep.sup_over_m[1].1 - oracle).abs() <= 1e-10);
    }

    #[test]
    fn stability_identity_and_contraction() {
        let spec = ProblemSpec::diffusion_reaction(1.0, -1.0, ContinuousFunction::sine(1));
        let seq = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        let rep = stability_scan(&seq, &spec, &[16], &[0.0], 64, StabilityTargets::default()).unwrap();
        assert!(rep.rows.iter().all(|r| r.power_norm == 1.0));
        let rep = stability_scan(&seq, &spec, &[16], &[0.1], 64, StabilityTargets::default()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.fitted, (1.0, 0.0));
        let w = SplitScheme::uniform(Variant::Weighted(0.5), be()).unwrap();
        let rep = stability_scan(&w, &spec, &[16], &[0.5], 16, StabilityTargets::default()).unwrap();
        assert!(rep.rows.iter().all(|r| r.power_norm <= 1.0 + 1e-12));
    }

    #[test]
    fn stability_rejects_large_grid() {
        let spec = ProblemSpec::diffusion_reaction(1.0, -1.0, ContinuousFunction::sine(1));
        let seq = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        assert_eq!(
            stability_scan(&seq, &spec, &[512], &[0.1], 4, StabilityTargets::default()),
            Err(AnalysisError::SizeLimit { m: 512 })
        );
    }

    #[test]
    fn growing_operator_fits_positive_omega() {
        let p = SplitProblem::new(
            DiscreteOperator::dense(Matrix::from_diagonal(&[0.4, 0.0])),
            DiscreteOperator::zero(2),
            vec![1.0, 1.0],
        )
        .unwrap();
        let s = SplitScheme::exact(Variant::None).unwrap();
        let norms = power_norms(&s, &p, 0.1, 8).unwrap();
        assert_eq!(norms.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 2, 4, 8]);
        assert_relative_eq!(norms[3].1, (0.32f64).exp(), max_relative = 1e-12);
        assert_eq!(power_ladder(10), vec![1, 2, 4, 8, 10]);
    }

    #[test]
    fn t_zero_convergence_is_projection_error() {
        let spec = ProblemSpec::advection_diffusion(1.0, 1.0, ContinuousFunction::sine(1));
        let s = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        let rep = convergence_study(&s, &spec, 0.0, &[16], &[4], Reference::Analytic).unwrap();
        let pair = ProjectionPair::new(16).unwrap();
        let proj = pair
            .lifted_error(&pair.project(&spec.initial), |s| spec.initial.eval(s))
            .unwrap();
        assert_eq!(rep.rows[0].error, proj);
    }

    #[test]
    fn reference_unavailable_for_variable_reaction() {
        let rho = ContinuousFunction::new(Smoothness::Analytic, |s| -(1.0 + s * (1.0 - s)));
        let spec = ProblemSpec::new(
            vec![OperatorKind::diffusion(1.0)],
            vec![OperatorKind::Reaction { rho }],
            ContinuousFunction::sine(1),
        );
        let s = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        assert_eq!(
            convergence_study(&s, &spec, 0.1, &[16], &[4], Reference::Analytic),
            Err(AnalysisError::ReferenceUnavailable)
        );
        assert!(convergence_study(&s, &spec, 0.1, &[16], &[4], Reference::Expm).is_ok());
    }

    #[test]
    fn trotter_kato_constant_and_zero_h() {
        let x = ContinuousFunction::constant(1.5);
        let rep = trotter_kato_check(
            &StageScheme::Exact,
            &[OperatorKind::diffusion(1.0)],
            &x,
            &[8, 16],
            &[0.0, 0.05, 0.1],
        )
        .unwrap();
        assert!(rep.rows.iter().all(|r| r.error <= 1e-13));
        assert!(rep.pass);
        let sine = ContinuousFunction::sine(1);
        let rep = trotter_kato_check(&StageScheme::Exact, &[OperatorKind::diffusion(1.0)], &sine, &[16], &[0.0])
            .unwrap();
        let pair = ProjectionPair::new(16).unwrap();
        let proj = pair.lifted_error(&pair.project(&sine), |s| sine.eval(s)).unwrap();
        assert_eq!(rep.rows[0].error, proj);
    }
}
