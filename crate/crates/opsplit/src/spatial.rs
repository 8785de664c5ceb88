//! Periodic functions on `[0, 1)`, uniform grids, and the maps between them.
//!
//! The function space carries the sup norm and grid vectors the max norm.
//! Projection samples at the nodes `s_i = i/m`; interpolation is periodic
//! piecewise-linear. Both maps have norm at most one and projecting an
//! interpolant returns the original node values exactly.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::ops::Deref;

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, Matrix};
use crate::tolerances::{CIRCULANT, REFERENCE_GRID};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpatialError {
    #[error("grid size {0} is below the minimum of 2")]
    InvalidSize(usize),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid operator parameters: {0}")]
    InvalidParams(&'static str),
}

/// Uniform periodic grid `s_i = i/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    m: usize,
    nodes: Vec<f64>,
}

impl GridSpace {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

pub fn make_grid_space(m: usize) -> Result<GridSpace, SpatialError> {
    if m < 2 {
        return Err(SpatialError::InvalidSize(m));
    }
    Ok(GridSpace {
        m,
        nodes: (0..m).map(|i| i as f64 / m as f64).collect(),
    })
}

/// How smooth a function is; tests use it to pick admissible inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Analytic,
    C2,
    C0,
}

/// One Fourier mode `sin·sin(2πks) + cos·cos(2πks)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub k: u32,
    pub sin: f64,
    pub cos: f64,
}

/// A finite Fourier series on the unit circle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPolynomial {
    pub constant: f64,
    pub modes: Vec<Mode>,
}

impl TrigPolynomial {
    pub fn sine(k: u32) -> Self {
        Self {
            constant: 0.0,
            modes: vec![Mode { k, sin: 1.0, cos: 0.0 }],
        }
    }

    pub fn cosine(k: u32) -> Self {
        Self {
            constant: 0.0,
            modes: vec![Mode { k, sin: 0.0, cos: 1.0 }],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            modes: Vec::new(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.constant
            + self
                .modes
                .iter()
                .map(|m| {
                    let arg = 2.0 * PI * m.k as f64 * s;
                    m.sin * arg.sin() + m.cos * arg.cos()
                })
                .sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.modes.iter().all(|m| m.sin == 0.0 && m.cos == 0.0)
    }

    /// Recovers a Fourier series of degree at most `max_k` from samples of `f`
    /// on the reference grid, or `None` if `f` is not such a series to `1e-10`.
    pub fn fit(f: &dyn Fn(f64) -> f64, max_k: u32) -> Option<Self> {
        let n = REFERENCE_GRID;
        let samples: Vec<f64> = (0..n).map(|i| f(i as f64 / n as f64)).collect();
        if samples.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let scale = 1.0 + linalg::max_abs(&samples);
        let constant = samples.iter().sum::<f64>() / n as f64;
        let mut modes = Vec::new();
        for k in 1..=max_k.min(n as u32 / 2 - 1) {
            let (mut sc, mut cc) = (0.0, 0.0);
            for (i, v) in samples.iter().enumerate() {
                let idx = (k as usize * i) % n;
                let arg = 2.0 * PI * idx as f64 / n as f64;
                sc += v * arg.sin();
                cc += v * arg.cos();
            }
            let (sc, cc) = (2.0 * sc / n as f64, 2.0 * cc / n as f64);
            if sc.abs() > 1e-13 * scale || cc.abs() > 1e-13 * scale {
                modes.push(Mode { k, sin: sc, cos: cc });
            }
        }
        let fitted = Self {
            constant: if constant.abs() > 1e-13 * scale { constant } else { 0.0 },
            modes,
        };
        let err = samples
            .iter()
            .enumerate()
            .map(|(i, v)| (fitted.eval(i as f64 / n as f64) - v).abs())
            .fold(0.0, f64::max);
        (err <= 1e-10 * scale).then_some(fitted)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A periodic function on `[0, 1)`.
#[derive(Clone)]
pub struct ContinuousFunction {
    evaluator: Evaluator,
    smoothness: Smoothness,
    fourier: Option<TrigPolynomial>,
}

impl fmt::Debug for ContinuousFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousFunction")
            .field("smoothness", &self.smoothness)
            .field("fourier", &self.fourier)
            .finish_non_exhaustive()
    }
}

impl ContinuousFunction {
    pub fn new(smoothness: Smoothness, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(f),
            smoothness,
            fourier: None,
        }
    }

    pub fn from_trig(p: TrigPolynomial) -> Self {
        let q = p.clone();
        Self {
            evaluator: Arc::new(move |s| q.eval(s)),
            smoothness: Smoothness::Analytic,
            fourier: Some(p),
        }
    }

    /// `sin(2πks)`.
    pub fn sine(k: u32) -> Self {
        Self::from_trig(TrigPolynomial::sine(k))
    }

    /// `cos(2πks)`.
    pub fn cosine(k: u32) -> Self {
        Self::from_trig(TrigPolynomial::cosine(k))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_trig(TrigPolynomial::constant(c))
    }

    /// Attaches a known Fourier representation.
    pub fn with_fourier(mut self, p: TrigPolynomial) -> Self {
        self.fourier = Some(p);
        self
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.evaluator)(s)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// The Fourier representation, when the function is a trigonometric polynomial.
    pub fn fourier(&self) -> Option<&TrigPolynomial> {
        self.fourier.as_ref()
    }

    /// Sup norm taken on the reference grid.
    pub fn sup_norm(&self) -> f64 {
        reference_grid().map(|s| self.eval(s).abs()).fold(0.0, f64::max)
    }

    /// `|f(0) - f(1)|`.
    pub fn periodicity_defect(&self) -> f64 {
        (self.eval(0.0) - self.eval(1.0)).abs()
    }
}

/// Points `k/4096` of the reference grid.
pub fn reference_grid() -> impl Iterator<Item = f64> + Clone {
    (0..REFERENCE_GRID).map(|k| k as f64 / REFERENCE_GRID as f64)
}

/// Sup-norm distance of two functions on the reference grid.
pub fn sup_distance(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
    reference_grid()
        .map(|s| (f(s) - g(s)).abs())
        .fold(0.0, f64::max)
}

/// Node values of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVector(Vec<f64>);

impl GridVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn max_norm(&self) -> f64 {
        linalg::max_abs(&self.0)
    }
}

impl Deref for GridVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for GridVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Periodic piecewise-linear interpolant through `(i/m, v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn eval(&self, s: f64) -> f64 {
        let m = self.values.len();
        let wrapped = s - s.floor();
        let pos = wrapped * m as f64;
        let nearest = pos.round();
        // nodes are reproduced exactly even when s·m rounds off an integer
        if (pos - nearest).abs() <= 4.0 * f64::EPSILON * (1.0 + pos) {
            return self.values[nearest as usize % m];
        }
        let i = pos.floor();
        let frac = pos - i;
        let i = i as usize % m;
        self.values[i] * (1.0 - frac) + self.values[(i + 1) % m] * frac
    }

    /// Exact sup norm: a piecewise-linear function peaks at a node.
    pub fn sup_norm(&self) -> f64 {
        linalg::max_abs(&self.values)
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }
}

impl From<PiecewiseLinear> for ContinuousFunction {
    fn from(p: PiecewiseLinear) -> Self {
        ContinuousFunction::new(Smoothness::C0, move |s| p.eval(s))
    }
}

/// Sampling `P_m` and piecewise-linear interpolation `J_m` on an `m`-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionPair {
    m: usize,
}

impl ProjectionPair {
    /// Norm bound shared by both maps.
    pub const K_BOUND: f64 = 1.0;

    pub fn new(m: usize) -> Result<Self, SpatialError> {
        make_grid_space(m)?;
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn project(&self, f: &ContinuousFunction) -> GridVector {
        GridVector((0..self.m).map(|i| f.eval(i as f64 / self.m as f64)).collect())
    }

    pub fn interpolate(&self, v: &[f64]) -> Result<PiecewiseLinear, SpatialError> {
        if v.len() != self.m {
            return Err(SpatialError::DimensionMismatch {
                expected: self.m,
                got: v.len(),
            });
        }
        Ok(PiecewiseLinear { values: v.to_vec() })
    }

    /// `‖J_m v - f‖_sup` on the reference grid.
    pub fn lifted_error(&self, v: &[f64], f: impl Fn(f64) -> f64) -> Result<f64, SpatialError> {
        let p = self.interpolate(v)?;
        Ok(sup_distance(|s| p.eval(s), f))
    }
}

/// Finite-difference stencil for first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    Centered,
    Upwind,
}

/// Continuous generator to discretise.
#[derive(Debug, Clone)]
pub enum OperatorKind {
    /// `ν ∂²/∂s²`
    Diffusion { nu: f64 },
    /// `-c ∂/∂s`
    Advection { c: f64, stencil: Stencil },
    /// Multiplication by `ρ(s)`.
    Reaction { rho: ContinuousFunction },
}

impl OperatorKind {
    pub fn diffusion(nu: f64) -> Self {
        Self::Diffusion { nu }
    }

    pub fn advection(c: f64) -> Self {
        Self::Advection {
            c,
            stencil: Stencil::Centered,
        }
    }

    pub fn reaction(rho: f64) -> Self {
        Self::Reaction {
            rho: ContinuousFunction::constant(rho),
        }
    }
}

/// What a discrete operator discretises.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorLabel {
    Diffusion { nu: f64 },
    Advection { c: f64, stencil: Stencil },
    Reaction,
    Zero,
    Dense,
    Sum(Vec<OperatorLabel>),
}

/// A matrix generator `A_m` on the grid space.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: Matrix,
    label: OperatorLabel,
}

impl DiscreteOperator {
    /// Wraps an arbitrary square matrix.
    ///
    /// # Panics
    /// If `matrix` is not square.
    pub fn dense(matrix: Matrix) -> Self {
        assert!(matrix.is_square(), "operators must be square");
        Self {
            matrix,
            label: OperatorLabel::Dense,
        }
    }

    pub fn zero(m: usize) -> Self {
        Self {
            matrix: Matrix::zeros(m, m),
            label: OperatorLabel::Zero,
        }
    }

    /// Sum of operators of equal size; `None` if the list is empty or sizes differ.
    pub fn sum(parts: &[DiscreteOperator]) -> Option<Self> {
        let first = parts.first()?;
        if parts.iter().any(|p| p.dim() != first.dim()) {
            return None;
        }
        if parts.len() == 1 {
            return Some(first.clone());
        }
        let matrix = parts[1..]
            .iter()
            .fold(first.matrix.clone(), |acc, p| acc.add(&p.matrix));
        Some(Self {
            matrix,
            label: OperatorLabel::Sum(parts.iter().map(|p| p.label.clone()).collect()),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn label(&self) -> &OperatorLabel {
        &self.label
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, SpatialError> {
        if v.len() != self.dim() {
            return Err(SpatialError::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(self.matrix.matvec(v))
    }

    /// Commutes with the cyclic shift.
    pub fn is_circulant(&self) -> bool {
        self.matrix.shift_commutator() <= CIRCULANT * (1.0 + self.matrix.max_abs())
    }

    /// Eigenvalues `λ_k = Σ_j a_{0j} e^{2πi jk/m}` of a circulant operator.
    pub fn circulant_symbol(&self) -> Option<Vec<C64>> {
        if !self.is_circulant() {
            return None;
        }
        let row: Vec<C64> = self.matrix.row(0).iter().map(|&v| C64::new(v, 0.0)).collect();
        Some(linalg::dft(&row, true))
    }

    /// Gershgorin bound on the largest eigenvalue of the symmetric part.
    ///
    /// It bounds the spectral abscissa from above, and for the normal built-in
    /// operators the two coincide up to the Gershgorin slack.
    pub fn numerical_abscissa_bound(&self) -> f64 {
        let n = self.dim();
        let a = &self.matrix;
        (0..n)
            .map(|i| {
                let off: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| 0.5 * (a[(i, j)] + a[(j, i)]).abs())
                    .sum();
                a[(i, i)] + off
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl AsRef<Matrix> for DiscreteOperator {
    fn as_ref(&self) -> &Matrix {
        &self.matrix
    }
}

/// Discretises `kind` on the `m`-point periodic grid.
pub fn build_operator(kind: &OperatorKind, m: usize) -> Result<DiscreteOperator, SpatialError> {
    let grid = make_grid_space(m)?;
    let mf = m as f64;
    let mut a = Matrix::zeros(m, m);
    let label = match kind {
        OperatorKind::Diffusion { nu } => {
            if !nu.is_finite() || *nu < 0.0 {
                return Err(SpatialError::InvalidParams("diffusion needs a finite nu >= 0"));
            }
            let w = nu * mf * mf;
            for i in 0..m {
                a[(i, (i + m - 1) % m)] += w;
                a[(i, i)] -= 2.0 * w;
                a[(i, (i + 1) % m)] += w;
            }
            OperatorLabel::Diffusion { nu: *nu }
        }
        OperatorKind::Advection { c, stencil } => {
            if !c.is_finite() {
                return Err(SpatialError::InvalidParams("advection speed must be finite"));
            }
            match stencil {
                Stencil::Centered => {
                    let w = c * mf / 2.0;
                    for i in 0..m {
                        a[(i, (i + 1) % m)] -= w;
                        a[(i, (i + m - 1) % m)] += w;
                    }
                }
                Stencil::Upwind => {
                    let w = c.abs() * mf;
                    // difference against the upstream neighbour
                    let up = if *c >= 0.0 { m - 1 } else { 1 };
                    for i in 0..m {
                        a[(i, i)] -= w;
                        a[(i, (i + up) % m)] += w;
                    }
                }
            }
            OperatorLabel::Advection {
                c: *c,
                stencil: *stencil,
            }
        }
        OperatorKind::Reaction { rho } => {
            for (i, &s) in grid.nodes().iter().enumerate() {
                let r = rho.eval(s);
                if !r.is_finite() {
                    return Err(SpatialError::InvalidParams("reaction rate must be finite"));
                }
                if r > 0.0 {
                    return Err(SpatialError::InvalidParams("reaction rate must be <= 0"));
                }
                a[(i, i)] = r;
            }
            OperatorLabel::Reaction
        }
    };
    Ok(DiscreteOperator { matrix: a, label })
}

/// Per-grid outcome of [`check_projection_axioms`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionEntry {
    pub m: usize,
    /// `max |P_m J_m v - v|` over the random vectors.
    pub pj_deviation: f64,
    /// Largest `‖J_m v‖_sup / ‖v‖_max` seen.
    pub interpolate_norm: f64,
    /// Largest `‖P_m f‖_max / ‖f‖_sup` seen over the sample functions.
    pub project_norm: f64,
    /// `‖J_m P_m f - f‖_sup` for each sample function.
    pub approximation_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub entries: Vec<ProjectionEntry>,
    /// Per sample function: approximation error non-increasing in `m`
    /// (strictly decreasing unless already at rounding level).
    pub decreasing: Vec<bool>,
    pub k_bound: f64,
}

impl ProjectionReport {
    pub fn pass(&self) -> bool {
        self.decreasing.iter().all(|d| *d)
            && self.entries.iter().all(|e| {
                e.pj_deviation == 0.0
                    && e.interpolate_norm <= self.k_bound + 1e-12
                    && e.project_norm <= self.k_bound + 1e-12
            })
    }
}

/// Measures the projection-pair axioms on `pairs` (ordered by increasing `m`).
pub fn check_projection_axioms(
    pairs: &[ProjectionPair],
    samples: &[ContinuousFunction],
    random_vectors: usize,
    seed: u64,
) -> ProjectionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let m = pair.m();
        let mut pj = 0.0f64;
        let mut jnorm = 0.0f64;
        for _ in 0..random_vectors {
            let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lifted = ContinuousFunction::from(pair.interpolate(&v).expect("sized"));
            let back = pair.project(&lifted);
            pj = pj.max(
                back.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
            let vmax = linalg::max_abs(&v);
            if vmax > 0.0 {
                jnorm = jnorm.max(lifted.sup_norm() / vmax);
            }
        }
        let mut pnorm = 0.0f64;
        let mut errs = Vec::with_capacity(samples.len());
        for f in samples {
            let pv = pair.project(f);
            let fsup = f.sup_norm().max(pv.max_norm());
            if fsup > 0.0 {
                pnorm = pnorm.max(pv.max_norm() / fsup);
            }
            errs.push(pair.lifted_error(&pv, |s| f.eval(s)).expect("sized"));
        }
        entries.push(ProjectionEntry {
            m,
            pj_deviation: pj,
            interpolate_norm: jnorm,
            project_norm: pnorm,
            approximation_errors: errs,
        });
    }
    let decreasing = (0..samples.len())
        .map(|k| {
            entries.windows(2).all(|w| {
                let (a, b) = (w[0].approximation_errors[k], w[1].approximation_errors[k]);
                b < a || b <= 1e-14
            })
        })
        .collect();
    ProjectionReport {
        entries,
        decreasing,
        k_bound: ProjectionPair::K_BOUND,
    }
}
