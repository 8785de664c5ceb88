//! One-step maps for `u' = (A + B)u` built from stage propagators.
//!
//! Compositions read right to left: in `q(hB) r(hA)` the `r` stage acts first.
//!
//! | variant        | `F(h)`                                   |
//! |----------------|------------------------------------------|
//! | `None`         | `r(hA)`                                  |
//! | `Sequential`   | `q(hB) r(hA)`                            |
//! | `Strang`       | `r(hA/2) q(hB) r(hA/2)`                  |
//! | `Weighted(Θ)`  | `Θ q(hB) r(hA) + (1-Θ) r(hA) q(hB)`      |

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linalg::Matrix;
use crate::oracle::{expm, OracleError};
use crate::rational::{RationalError, RationalFunction, ResolventPlan};
use crate::spatial::{DiscreteOperator, GridVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("theta must lie in [0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("invalid step parameters: {0}")]
    InvalidStep(&'static str),
}

/// Propagator used for one stage.
#[derive(Debug, Clone, PartialEq)]
pub enum StageScheme {
    Rational(RationalFunction),
    /// The matrix exponential.
    Exact,
}

impl StageScheme {
    pub fn name(&self) -> &str {
        match self {
            Self::Rational(r) => r.name(),
            Self::Exact => "exact",
        }
    }

    /// Prepares `stage(hM)` for repeated application.
    pub fn prepare(&self, h: f64, m: &Matrix) -> Result<PreparedStage, SplitError> {
        if h == 0.0 {
            return Ok(PreparedStage::Identity(m.rows()));
        }
        Ok(match self {
            Self::Rational(r) => PreparedStage::Rational(r.prepare(h, m)?),
            Self::Exact => PreparedStage::Exact(expm(m, h)?),
        })
    }
}

impl From<RationalFunction> for StageScheme {
    fn from(r: RationalFunction) -> Self {
        Self::Rational(r)
    }
}

impl FromStr for StageScheme {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "exact" {
            Ok(Self::Exact)
        } else {
            RationalFunction::from_spec(s).map(Self::Rational)
        }
    }
}

impl fmt::Display for StageScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// No splitting: the `r` stage on `A` alone.
    None,
    Sequential,
    Strang,
    Weighted(f64),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Sequential => "sequential",
            Self::Strang => "strang",
            Self::Weighted(_) => "weighted",
        }
    }
}

/// A splitting variant with its two stage propagators.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScheme {
    variant: Variant,
    r: StageScheme,
    q: StageScheme,
}

impl SplitScheme {
    pub fn new(
        variant: Variant,
        r: impl Into<StageScheme>,
        q: impl Into<StageScheme>,
    ) -> Result<Self, SplitError> {
        if let Variant::Weighted(theta) = variant {
            if !(0.0..=1.0).contains(&theta) {
                return Err(SplitError::InvalidTheta(theta));
            }
        }
        Ok(Self {
            variant,
            r: r.into(),
            q: q.into(),
        })
    }

    /// Same stage scheme on both operators.
    pub fn uniform(variant: Variant, stage: impl Into<StageScheme>) -> Result<Self, SplitError> {
        let stage = stage.into();
        Self::new(variant, stage.clone(), stage)
    }

    /// Exact stages; isolates the splitting error.
    pub fn exact(variant: Variant) -> Result<Self, SplitError> {
        Self::new(variant, StageScheme::Exact, StageScheme::Exact)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn r(&self) -> &StageScheme {
        &self.r
    }

    pub fn q(&self) -> &StageScheme {
        &self.q
    }

    /// Short description such as `strang[r=crank_nicolson, q=crank_nicolson]`.
    pub fn label(&self) -> String {
        use alloc::format;
        match self.variant {
            Variant::None => format!("none[r={}]", self.r),
            Variant::Weighted(t) => format!("weighted({t})[r={}, q={}]", self.r, self.q),
            v => format!("{}[r={}, q={}]", v.name(), self.r, self.q),
        }
    }

    /// Factorises every stage of `F(h)` for `problem`.
    pub fn prepare(&self, problem: &SplitProblem, h: f64) -> Result<PreparedStep, SplitError> {
        if !(h.is_finite() && h >= 0.0) {
            return Err(SplitError::InvalidStep("h must be finite and >= 0"));
        }
        let a = problem.a.matrix();
        let b = problem.b.matrix();
        let n = problem.m();
        let stages = match self.variant {
            Variant::None => Stages::None(self.r.prepare(h, a)?),
            Variant::Sequential => Stages::Sequential {
                r: self.r.prepare(h, a)?,
                q: self.q.prepare(h, b)?,
            },
            Variant::Strang => Stages::Strang {
                r_half: self.r.prepare(h / 2.0, a)?,
                q: self.q.prepare(h, b)?,
            },
            Variant::Weighted(theta) => Stages::Weighted {
                theta,
                r: self.r.prepare(h, a)?,
                q: self.q.prepare(h, b)?,
            },
        };
        Ok(PreparedStep { n, stages })
    }
}

/// `A`, `B` and initial data on one grid.
#[derive(Debug, Clone)]
pub struct SplitProblem {
    a: DiscreteOperator,
    b: DiscreteOperator,
    initial: GridVector,
}

impl SplitProblem {
    pub fn new(
        a: DiscreteOperator,
        b: DiscreteOperator,
        initial: impl Into<GridVector>,
    ) -> Result<Self, SplitError> {
        let initial = initial.into();
        let m = a.dim();
        for got in [b.dim(), initial.m()] {
            if got != m {
                return Err(SplitError::DimensionMismatch { expected: m, got });
            }
        }
        Ok(Self { a, b, initial })
    }

    pub fn m(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &DiscreteOperator {
        &self.a
    }

    pub fn b(&self) -> &DiscreteOperator {
        &self.b
    }

    pub fn initial(&self) -> &GridVector {
        &self.initial
    }

    /// `A + B`.
    pub fn generator(&self) -> DiscreteOperator {
        DiscreteOperator::sum(&[self.a.clone(), self.b.clone()]).expect("equal sizes")
    }

    /// The same equation with `A + B` as the first operator and `B = 0`.
    pub fn unsplit(&self) -> Self {
        Self {
            a: self.generator(),
            b: DiscreteOperator::zero(self.m()),
            initial: self.initial.clone(),
        }
    }

    pub fn with_initial(&self, initial: impl Into<GridVector>) -> Result<Self, SplitError> {
        Self::new(self.a.clone(), self.b.clone(), initial)
    }
}

/// A factorised stage propagator.
#[derive(Debug, Clone)]
pub enum PreparedStage {
    Identity(usize),
    Rational(ResolventPlan),
    Exact(Matrix),
}

impl PreparedStage {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, SplitError> {
        match self {
            Self::Identity(_) => Ok(x.to_vec()),
            Self::Rational(plan) => Ok(plan.apply(x)?),
            Self::Exact(e) => Ok(e.matvec(x)),
        }
    }
}

#[derive(Debug, Clone)]
enum Stages {
    None(PreparedStage),
    Sequential { r: PreparedStage, q: PreparedStage },
    Strang { r_half: PreparedStage, q: PreparedStage },
    Weighted { theta: f64, r: PreparedStage, q: PreparedStage },
}

/// `F(h)` with all stages factorised.
#[derive(Debug, Clone)]
pub struct PreparedStep {
    n: usize,
    stages: Stages,
}

impl PreparedStep {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, SplitError> {
        if v.len() != self.n {
            return Err(SplitError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        match &self.stages {
            Stages::None(r) => r.apply(v),
            Stages::Sequential { r, q } => q.apply(&r.apply(v)?),
            Stages::Strang { r_half, q } => r_half.apply(&q.apply(&r_half.apply(v)?)?),
            Stages::Weighted { theta, r, q } => {
                let theta = *theta;
                if theta == 1.0 {
                    return q.apply(&r.apply(v)?);
                }
                if theta == 0.0 {
                    return r.apply(&q.apply(v)?);
                }
                let qr = q.apply(&r.apply(v)?)?;
                let rq = r.apply(&q.apply(v)?)?;
                Ok(qr
                    .iter()
                    .zip(&rq)
                    .map(|(a, b)| theta * a + (1.0 - theta) * b)
                    .collect())
            }
        }
    }

    /// Dense matrix of `F(h)`, column `j` being `F(h) e_j`.
    pub fn to_matrix(&self) -> Result<Matrix, SplitError> {
        let n = self.n;
        let mut f = Matrix::zeros(n, n);
        let mut e = alloc::vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                f[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        Ok(f)
    }
}

/// `F(h)v`.
pub fn step(
    scheme: &SplitScheme,
    problem: &SplitProblem,
    h: f64,
    v: &[f64],
) -> Result<GridVector, SplitError> {
    if v.len() != problem.m() {
        return Err(SplitError::DimensionMismatch {
            expected: problem.m(),
            got: v.len(),
        });
    }
    Ok(scheme.prepare(problem, h)?.apply(v)?.into())
}

/// `F(t/n)^n` applied to the initial data.
pub fn evolve(
    scheme: &SplitScheme,
    problem: &SplitProblem,
    t: f64,
    n: usize,
) -> Result<GridVector, SplitError> {
    if n == 0 {
        return Err(SplitError::InvalidStep("n must be >= 1"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(SplitError::InvalidStep("t must be finite and >= 0"));
    }
    if t == 0.0 {
        return Ok(problem.initial().clone());
    }
    let f = scheme.prepare(problem, t / n as f64)?;
    let mut v = problem.initial().values().to_vec();
    for _ in 0..n {
        v = f.apply(&v)?;
    }
    Ok(v.into())
}

/// [`evolve`] with matrix-exponential stages.
pub fn exact_split(
    variant: Variant,
    problem: &SplitProblem,
    t: f64,
    n: usize,
) -> Result<GridVector, SplitError> {
    evolve(&SplitScheme::exact(variant)?, problem, t, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use alloc::vec;

    fn scalar(a: f64, b: f64, x: f64) -> SplitProblem {
        SplitProblem::new(
            DiscreteOperator::dense(Matrix::from_diagonal(&[a])),
            DiscreteOperator::dense(Matrix::from_diagonal(&[b])),
            vec![x],
        )
        .unwrap()
    }

    fn be() -> RationalFunction {
        RationalFunction::backward_euler()
    }

    #[test]
    fn scalar_sequential() {
        let p = scalar(-1.0, -2.0, 1.0);
        let s = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        let y = step(&s, &p, 0.5, &[1.0]).unwrap();
        assert_relative_eq!(y[0], 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn theta_validation() {
        assert_eq!(
            SplitScheme::uniform(Variant::Weighted(1.5), be()),
            Err(SplitError::InvalidTheta(1.5))
        );
        assert!(SplitScheme::uniform(Variant::Weighted(0.0), be()).is_ok());
        assert!(SplitScheme::uniform(Variant::Weighted(f64::NAN), be()).is_err());
    }

    #[test]
    fn weighted_endpoints() {
        let a = Matrix::from_rows(&[[-1.0, 1.0], [0.0, -1.0]]);
        let b = Matrix::from_rows(&[[-1.0, 0.0], [1.0, -1.0]]);
        let p = SplitProblem::new(DiscreteOperator::dense(a), DiscreteOperator::dense(b), vec![1.0, -2.0])
            .unwrap();
        let seq = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        let w1 = SplitScheme::uniform(Variant::Weighted(1.0), be()).unwrap();
        let x = [0.3, 0.7];
        assert_eq!(step(&seq, &p, 0.2, &x).unwrap(), step(&w1, &p, 0.2, &x).unwrap());
    }

    #[test]
    fn strang_with_zero_b() {
        let a = Matrix::from_rows(&[[-2.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -2.0]]);
        let p = SplitProblem::new(
            DiscreteOperator::dense(a.clone()),
            DiscreteOperator::zero(3),
            vec![1.0, 0.0, 0.0],
        )
        .unwrap();
        let cn = RationalFunction::crank_nicolson();
        let s = SplitScheme::new(Variant::Strang, cn.clone(), be()).unwrap();
        let x = [1.0, 2.0, -1.0];
        let y = step(&s, &p, 0.3, &x).unwrap();
        let twice = cn.apply(0.15, &a, &cn.apply(0.15, &a, &x).unwrap()).unwrap();
        for (u, v) in y.iter().zip(&twice) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_stages_on_commuting_diagonals() {
        let a = Matrix::from_diagonal(&[-1.0, -3.0]);
        let b = Matrix::from_diagonal(&[-0.5, -0.25]);
        let p = SplitProblem::new(DiscreteOperator::dense(a.clone()), DiscreteOperator::dense(b.clone()), vec![1.0, 1.0])
            .unwrap();
        let s = SplitScheme::exact(Variant::Sequential).unwrap();
        let y = step(&s, &p, 0.4, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(y[0], (-0.6f64).exp(), max_relative = 1e-10);
        assert_relative_eq!(y[1], (-1.3f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn evolve_examples() {
        let p = scalar(-1.0, 0.0, 1.0);
        let s = SplitScheme::uniform(Variant::None, be()).unwrap();
        assert_eq!(evolve(&s, &p, 0.0, 5).unwrap().values(), &[1.0]);
        let y = evolve(&s, &p, 1.0, 10).unwrap();
        assert_relative_eq!(y[0], (1.0f64 / 1.1).powi(10), max_relative = 1e-13);
        assert_relative_eq!(y[0], 0.385543, epsilon = 1e-6);
        let one = evolve(&s, &p, 0.7, 1).unwrap();
        assert_eq!(one, step(&s, &p, 0.7, &[1.0]).unwrap());
        assert!(evolve(&s, &p, 1.0, 0).is_err());
    }

    #[test]
    fn dimension_errors() {
        let p = scalar(-1.0, -1.0, 1.0);
        let s = SplitScheme::uniform(Variant::Sequential, be()).unwrap();
        assert_eq!(
            step(&s, &p, 0.1, &[1.0, 2.0]),
            Err(SplitError::DimensionMismatch { expected: 1, got: 2 })
        );
        assert!(SplitProblem::new(
            DiscreteOperator::zero(2),
            DiscreteOperator::zero(3),
            vec![0.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn stage_parsing() {
        assert_eq!("exact".parse::<StageScheme>().unwrap(), StageScheme::Exact);
        assert_eq!(
            "crank_nicolson".parse::<StageScheme>().unwrap().name(),
            "crank_nicolson"
        );
        assert!("nope".parse::<StageScheme>().is_err());
    }
}
