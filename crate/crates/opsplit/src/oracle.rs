//! Reference propagators that do not share code paths with the integrators.
//!
//! - [`expm`]: dense matrix exponential, diagonal Padé of order 6 with scaling
//!   and squaring.
//! - [`expm_fourier`]: exponential of a circulant matrix through its symbol.
//! - [`exact_solution`]: closed-form solutions of the periodic test problems
//!   `u_t = ν u_ss - c u_s + ρ u` with trigonometric-polynomial data.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::linalg::{self, Matrix};
use crate::spatial::{ContinuousFunction, TrigPolynomial};
use crate::tolerances::CIRCULANT;
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("matrix exponential overflows (t·‖A‖ = {0:e})")]
    Overflow(f64),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix does not commute with the cyclic shift")]
    NotCirculant,
    #[error("no closed-form solution: {0}")]
    UnsupportedProblem(&'static str),
}

const PADE_ORDER: usize = 6;
const SCALE_TARGET: f64 = 0.5;

/// `e^{tA}` by scaling and squaring around a `[6/6]` Padé approximant.
pub fn expm(a: impl AsRef<Matrix>, t: f64) -> Result<Matrix, OracleError> {
    let a = a.as_ref();
    if !a.is_square() {
        return Err(OracleError::NotSquare);
    }
    let n = a.rows();
    if t == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let x = a.scaled(t);
    let norm = x.norm_inf();
    if !norm.is_finite() {
        return Err(OracleError::Overflow(norm));
    }
    let mut s = 0i32;
    while norm / 2f64.powi(s) > SCALE_TARGET {
        s += 1;
    }
    let x = x.scaled(2f64.powi(-s));

    let mut coeff = [0.0; PADE_ORDER + 1];
    coeff[0] = 1.0;
    let q = PADE_ORDER as f64;
    for k in 0..PADE_ORDER {
        let kf = k as f64;
        coeff[k + 1] = coeff[k] * (q - kf) / ((2.0 * q - kf) * (kf + 1.0));
    }
    let mut num = Matrix::identity(n);
    let mut den = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for (k, c) in coeff.iter().enumerate().skip(1) {
        power = power.matmul(&x);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        num = num.add(&power.scaled(*c));
        den = den.add(&power.scaled(sign * c));
    }
    let mut e = linalg::solve_matrix(&den, &num).map_err(|_| OracleError::Overflow(norm))?;
    for _ in 0..s {
        e = e.matmul(&e);
    }
    if !e.is_finite() {
        return Err(OracleError::Overflow(norm));
    }
    Ok(e)
}

/// `e^{tA}` for circulant `A`, computed by exponentiating its eigenvalues
/// `λ_k = Σ_l a_{0l} ω^{lk}` and transforming back.
pub fn expm_fourier(a: impl AsRef<Matrix>, t: f64) -> Result<Matrix, OracleError> {
    let a = a.as_ref();
    if !a.is_square() {
        return Err(OracleError::NotSquare);
    }
    if a.shift_commutator() > CIRCULANT * (1.0 + a.max_abs()) {
        return Err(OracleError::NotCirculant);
    }
    let n = a.rows();
    let row: Vec<C64> = a.row(0).iter().map(|&v| C64::new(v, 0.0)).collect();
    let symbol = linalg::dft(&row, true);
    let exp_symbol: Vec<C64> = symbol.iter().map(|l| (l * t).exp()).collect();
    if exp_symbol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OracleError::Overflow(a.norm_inf() * t.abs()));
    }
    // first row of the exponential: e_j = (1/n) Σ_k e^{tλ_k} ω^{-jk}
    let first: Vec<f64> = linalg::dft(&exp_symbol, false)
        .iter()
        .map(|z| z.re / n as f64)
        .collect();
    let mut e = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            e[(i, j)] = first[(j + n - i) % n];
        }
    }
    Ok(e)
}

/// Test problem with a closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemTag {
    /// `u_t = ν u_ss - c u_s`
    AdvectionDiffusion { nu: f64, c: f64 },
    /// `u_t = ν u_ss + ρ u` with constant `ρ`
    DiffusionReaction { nu: f64, rho: f64 },
    /// `u_t = ν u_ss - c u_s + ρ u` with constant `ρ`
    AdvectionDiffusionReaction { nu: f64, c: f64, rho: f64 },
}

impl ProblemTag {
    fn coefficients(&self) -> (f64, f64, f64) {
        match *self {
            Self::AdvectionDiffusion { nu, c } => (nu, c, 0.0),
            Self::DiffusionReaction { nu, rho } => (nu, 0.0, rho),
            Self::AdvectionDiffusionReaction { nu, c, rho } => (nu, c, rho),
        }
    }
}

/// `u(t, s)` for a tagged problem with trigonometric-polynomial initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    tag: ProblemTag,
    initial: TrigPolynomial,
}

impl ExactSolution {
    pub fn tag(&self) -> ProblemTag {
        self.tag
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let (nu, c, rho) = self.tag.coefficients();
        let mut u = self.initial.constant * (rho * t).exp();
        for mode in &self.initial.modes {
            let w = 2.0 * PI * mode.k as f64;
            let amp = ((-nu * w * w + rho) * t).exp();
            let arg = w * (s - c * t);
            u += amp * (mode.sin * arg.sin() + mode.cos * arg.cos());
        }
        u
    }

    /// `u(t, ·)` as a function of position.
    pub fn at(&self, t: f64) -> ContinuousFunction {
        let this = self.clone();
        ContinuousFunction::new(crate::spatial::Smoothness::Analytic, move |s| this.eval(t, s))
    }
}

/// Highest Fourier mode searched when the initial function carries no
/// explicit Fourier representation.
pub const MAX_FITTED_MODE: u32 = 64;

/// Closed-form solution of `tag` starting from `initial`.
pub fn exact_solution(
    tag: ProblemTag,
    initial: &ContinuousFunction,
) -> Result<ExactSolution, OracleError> {
    let (nu, c, rho) = tag.coefficients();
    if !(nu.is_finite() && c.is_finite() && rho.is_finite()) {
        return Err(OracleError::UnsupportedProblem("non-finite coefficients"));
    }
    if nu < 0.0 {
        return Err(OracleError::UnsupportedProblem("negative diffusion is ill-posed"));
    }
    let trig = match initial.fourier() {
        Some(p) => p.clone(),
        None => TrigPolynomial::fit(&|s| initial.eval(s), MAX_FITTED_MODE).ok_or(
            OracleError::UnsupportedProblem("initial data is not a trigonometric polynomial"),
        )?,
    };
    Ok(ExactSolution { tag, initial: trig })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{build_operator, OperatorKind, Smoothness};
    use approx::assert_relative_eq;

    fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).max_abs() / (1.0 + b.max_abs())
    }

    #[test]
    fn expm_trivial_cases() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(expm(&a, 0.0).unwrap(), Matrix::identity(2));
        let d = Matrix::from_diagonal(&[-1.0, 0.5, -30.0]);
        let e = expm(&d, 0.7).unwrap();
        for (i, v) in [-1.0f64, 0.5, -30.0].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], (0.7 * v).exp(), max_relative = 1e-13);
        }
        let nil = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let e = expm(&nil, 2.5).unwrap();
        assert_eq!(e, Matrix::from_rows(&[[1.0, 2.5], [0.0, 1.0]]));
    }

    #[test]
    fn expm_rotation() {
        // generator of rotations; closed form cos/sin
        let a = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let t = 10.0;
        let e = expm(&a, t).unwrap();
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-12);
        assert_relative_eq!(e[(1, 0)], t.sin(), epsilon = 1e-12);
    }

    #[test]
    fn expm_overflow() {
        let a = Matrix::from_diagonal(&[1.0]);
        assert!(matches!(expm(&a, 1e6), Err(OracleError::Overflow(_))));
        assert!(matches!(expm(&a, f64::INFINITY), Err(OracleError::Overflow(_))));
    }

    #[test]
    fn semigroup_law() {
        let op = build_operator(&OperatorKind::diffusion(1.0), 16).unwrap();
        for (t, s) in [(0.1, 0.1), (0.1, 0.3), (0.3, 0.3)] {
            let lhs = expm(&op, t + s).unwrap();
            let rhs = expm(&op, t).unwrap().matmul(&expm(&op, s).unwrap());
            assert!(rel_diff(&lhs, &rhs) < 1e-9);
        }
    }

    #[test]
    fn fourier_matches_pade() {
        for kind in [OperatorKind::diffusion(0.5), OperatorKind::advection(2.0)] {
            let op = build_operator(&kind, 32).unwrap();
            let a = expm(&op, 0.05).unwrap();
            let b = expm_fourier(&op, 0.05).unwrap();
            assert!(rel_diff(&a, &b) < 1e-9, "{kind:?}");
        }
        let dense = Matrix::from_rows(&[[-1.0, 1.0], [0.0, -1.0]]);
        assert_eq!(expm_fourier(&dense, 1.0), Err(OracleError::NotCirculant));
    }

    #[test]
    fn analytic_examples() {
        let sine = ContinuousFunction::sine(1);
        let transport =
            exact_solution(ProblemTag::AdvectionDiffusion { nu: 0.0, c: 1.0 }, &sine).unwrap();
        for s in [0.0, 0.1, 0.37, 0.8] {
            assert_relative_eq!(
                transport.eval(0.25, s),
                -(2.0 * PI * s).cos(),
                epsilon = 1e-14
            );
        }
        let heat = exact_solution(ProblemTag::AdvectionDiffusion { nu: 1.0, c: 0.0 }, &sine).unwrap();
        let t = 0.03;
        assert_relative_eq!(
            heat.eval(t, 0.2),
            (-4.0 * PI * PI * t).exp() * (2.0 * PI * 0.2).sin(),
            max_relative = 1e-14
        );
        let both = exact_solution(ProblemTag::AdvectionDiffusion { nu: 1.0, c: 1.0 }, &sine).unwrap();
        // amplitude at t = 0.1 is the value at the crest s - ct = 1/4
        assert_relative_eq!(both.eval(0.1, 0.35), 0.019296, epsilon = 5e-7);
    }

    #[test]
    fn reaction_scales_solution() {
        let c = ContinuousFunction::constant(2.0);
        let sol = exact_solution(ProblemTag::DiffusionReaction { nu: 1.0, rho: -1.0 }, &c).unwrap();
        assert_relative_eq!(sol.eval(0.5, 0.3), 2.0 * (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn initial_data_reproduced() {
        let f = ContinuousFunction::new(Smoothness::Analytic, |s| {
            1.0 + (2.0 * PI * s).sin() - 0.5 * (6.0 * PI * s).cos()
        });
        let sol = exact_solution(ProblemTag::AdvectionDiffusion { nu: 1.0, c: 1.0 }, &f).unwrap();
        for i in 0..16 {
            let s = i as f64 / 16.0;
            assert!((sol.eval(0.0, s) - f.eval(s)).abs() < 1e-12);
        }
        let kink = ContinuousFunction::new(Smoothness::C0, |s| (s - 0.5).abs());
        assert!(matches!(
            exact_solution(ProblemTag::AdvectionDiffusion { nu: 1.0, c: 0.0 }, &kink),
            Err(OracleError::UnsupportedProblem(_))
        ));
    }
}
