//! Rational approximations of the exponential and their action on matrices.
//!
//! A [`RationalFunction`] is stored as real numerator and denominator
//! coefficients. On construction the denominator roots are found and the
//! function is expanded as
//!
//! ```text
//! r(z) = c∞ + Σ_i Σ_{j=1..ν_i} C_ij / (1 - z/λ_i)^j
//! ```
//!
//! which turns `r(hA)x` into `j` successive solves with `I - (h/λ_i)A` per pole,
//! one factorisation per pole. The constant `c∞ = r(∞)` is needed whenever the
//! numerator and denominator degrees agree.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::linalg::{least_squares, Lu, Matrix};
use crate::poly::{self, Root};
use crate::tolerances::{
    ALGEBRAIC, COEFFICIENT, IMAGINARY_RESIDUE, MAX_CONDITION, POLE_PROXIMITY,
    RECONSTRUCTION_REL, RESIDUE_CROSS_CHECK, RHP_MARGIN, ROOT_MATCH,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RationalError {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(&'static str),
    #[error("numerator and denominator share the root {root}")]
    CommonRoot { root: C64 },
    #[error("evaluation point {z} lies within {distance:e} of a pole")]
    PoleProximity { z: C64, distance: f64 },
    #[error("companion eigenvalue iteration did not converge")]
    RootFindingFailure,
    #[error("residue system is ill-conditioned (estimate {estimate:e})")]
    IllConditioned { estimate: f64 },
    #[error("partial-fraction reconstruction error {error:e} exceeds tolerance")]
    ReconstructionFailure { error: f64 },
    #[error("pole {pole} is not in the open right half-plane")]
    NotAdmissible { pole: C64 },
    #[error("numerator degree exceeds denominator degree")]
    Improper,
    #[error("resolvent factorisation failed for pole {pole}")]
    SingularSolve { pole: C64 },
    #[error("imaginary residue {residue:e} exceeds tolerance")]
    ImaginaryResidue { residue: f64 },
    #[error("dimension mismatch: operator has size {operator}, vector has {vector}")]
    DimensionMismatch { operator: usize, vector: usize },
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

/// One pole of a partial-fraction expansion with residues `C_1..C_ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub pole: C64,
    pub residues: Vec<C64>,
}

impl PoleTerm {
    pub fn multiplicity(&self) -> usize {
        self.residues.len()
    }
}

/// `r(z) = constant + Σ_i Σ_j residues_i[j-1] / (1 - z/pole_i)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFraction {
    pub constant: C64,
    pub terms: Vec<PoleTerm>,
    /// Largest relative reconstruction error measured on the imaginary axis.
    pub reconstruction_error: f64,
    /// Condition estimate of the least-squares residue cross-check.
    pub condition_estimate: f64,
}

impl PartialFraction {
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = self.constant;
        for t in &self.terms {
            let base = C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z / t.pole);
            let mut pow = base;
            for c in &t.residues {
                acc += c * pow;
                pow *= base;
            }
        }
        acc
    }

    /// `c∞ + Σ C_ij`, which equals `r(0)`.
    pub fn residue_sum(&self) -> C64 {
        self.constant + self.terms.iter().flat_map(|t| t.residues.iter()).sum::<C64>()
    }

    /// `Σ (j/λ_i) C_ij`, which equals `r'(0)`.
    pub fn weighted_residue_sum(&self) -> C64 {
        self.terms
            .iter()
            .flat_map(|t| {
                t.residues
                    .iter()
                    .enumerate()
                    .map(move |(j, c)| c * (j as f64 + 1.0) / t.pole)
            })
            .sum()
    }
}

/// Value and slope of `r` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyCheck {
    pub r0: f64,
    pub r0_prime: f64,
    pub pass: bool,
}

/// Boundedness of `r` on the closed left half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhpReport {
    pub poles_rhp: bool,
    pub proper: bool,
    pub sup_imag_axis: f64,
    pub pass: bool,
}

/// A real rational function `numerator(z) / denominator(z)` in reduced form.
#[derive(Debug, Clone)]
pub struct RationalFunction {
    name: String,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    poles: Vec<Root>,
    expansion: Result<PartialFraction, RationalError>,
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.numerator == other.numerator && self.denominator == other.denominator
    }
}

impl RationalFunction {
    /// Builds `r` from ascending coefficient lists.
    ///
    /// Fails if `b_0 = 0`, if any coefficient is not finite, if the roots cannot
    /// be computed, or if numerator and denominator share a root.
    pub fn new(
        name: impl Into<String>,
        numerator: &[f64],
        denominator: &[f64],
    ) -> Result<Self, RationalError> {
        if numerator.iter().chain(denominator).any(|c| !c.is_finite()) {
            return Err(RationalError::InvalidCoefficients("non-finite coefficient"));
        }
        let numerator = poly::trim(numerator);
        let denominator = poly::trim(denominator);
        if numerator.is_empty() {
            return Err(RationalError::InvalidCoefficients("zero numerator"));
        }
        if denominator.first().copied().unwrap_or(0.0) == 0.0 {
            return Err(RationalError::InvalidCoefficients("denominator vanishes at 0"));
        }
        let computed =
            poly::roots(&denominator).map_err(|_| RationalError::RootFindingFailure)?;
        let poles = poly::cluster_roots(&denominator, &computed);
        for p in &poles {
            let n = poly::eval(&numerator, p.value).norm();
            let scale = poly::eval_abs(&numerator, p.value.norm());
            if n <= ROOT_MATCH * scale {
                return Err(RationalError::CommonRoot { root: p.value });
            }
        }
        let mut r = Self {
            name: name.into(),
            numerator,
            denominator,
            poles,
            expansion: Err(RationalError::Improper),
        };
        r.expansion = r.expand();
        Ok(r)
    }

    /// `1/(1 - z)`.
    pub fn backward_euler() -> Self {
        Self::new("backward_euler", &[1.0], &[1.0, -1.0]).expect("catalog scheme")
    }

    /// `(1 + z/2)/(1 - z/2)`.
    pub fn crank_nicolson() -> Self {
        Self::new("crank_nicolson", &[1.0, 0.5], &[1.0, -0.5]).expect("catalog scheme")
    }

    /// `1/(1 - z/k)^k`, `k` backward-Euler substeps of size `h/k`.
    ///
    /// # Panics
    /// If `k == 0`.
    pub fn iterated_resolvent(k: usize) -> Self {
        assert!(k > 0, "iterated resolvent needs k >= 1");
        Self::new(
            format!("iterated_resolvent:{k}"),
            &[1.0],
            &poly::iterated_resolvent_denominator(k),
        )
        .expect("catalog scheme")
    }

    /// Parses `backward_euler`, `crank_nicolson`, `iterated_resolvent:k` or
    /// `custom:[a0,a1,...]/[b0,b1,...]`.
    pub fn from_spec(spec: &str) -> Result<Self, RationalError> {
        let spec = spec.trim();
        match spec {
            "backward_euler" => return Ok(Self::backward_euler()),
            "crank_nicolson" => return Ok(Self::crank_nicolson()),
            _ => {}
        }
        if let Some(k) = spec.strip_prefix("iterated_resolvent:") {
            return match k.trim().parse::<usize>() {
                Ok(k) if k > 0 => Ok(Self::iterated_resolvent(k)),
                _ => Err(RationalError::UnknownScheme(spec.to_string())),
            };
        }
        if let Some(body) = spec.strip_prefix("custom:") {
            let bad = || RationalError::UnknownScheme(spec.to_string());
            let (num, den) = body.split_once('/').ok_or_else(bad)?;
            let num = parse_list(num).ok_or_else(bad)?;
            let den = parse_list(den).ok_or_else(bad)?;
            return Self::new(spec, &num, &den);
        }
        Err(RationalError::UnknownScheme(spec.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// Distinct denominator roots with multiplicities.
    pub fn poles(&self) -> &[Root] {
        &self.poles
    }

    pub fn is_proper(&self) -> bool {
        poly::degree(&self.numerator) <= poly::degree(&self.denominator)
    }

    /// `r(z)` by Horner evaluation of both polynomials.
    pub fn eval(&self, z: C64) -> Result<C64, RationalError> {
        if let Some(d) = self
            .poles
            .iter()
            .map(|p| (p.value - z).norm())
            .reduce(f64::min)
        {
            if d <= POLE_PROXIMITY {
                return Err(RationalError::PoleProximity { z, distance: d });
            }
        }
        Ok(poly::eval(&self.numerator, z) / poly::eval(&self.denominator, z))
    }

    /// `r(0)` and `r'(0)` from the low-order coefficients.
    pub fn check_consistency(&self) -> ConsistencyCheck {
        let coef = |p: &[f64], i: usize| p.get(i).copied().unwrap_or(0.0);
        let (a0, a1) = (coef(&self.numerator, 0), coef(&self.numerator, 1));
        let (b0, b1) = (coef(&self.denominator, 0), coef(&self.denominator, 1));
        let r0 = a0 / b0;
        let r0_prime = (a1 * b0 - a0 * b1) / (b0 * b0);
        ConsistencyCheck {
            r0,
            r0_prime,
            pass: (r0 - 1.0).abs() <= COEFFICIENT && (r0_prime - 1.0).abs() <= COEFFICIENT,
        }
    }

    /// Pole location, properness and a sampled sup of `|r|` on the imaginary axis.
    ///
    /// By the maximum principle the sup over the closed left half-plane of a
    /// function analytic there is attained on the imaginary axis (or at ∞).
    pub fn check_lhp_admissible(&self) -> LhpReport {
        let poles_rhp = self.poles.iter().all(|p| p.value.re > RHP_MARGIN);
        let proper = self.is_proper();
        let mut sup = 0.0f64;
        for y in imaginary_axis_samples() {
            match self.eval(C64::new(0.0, y)) {
                Ok(v) => sup = sup.max(v.norm()),
                Err(_) => sup = f64::INFINITY,
            }
        }
        let nd = poly::degree(&self.numerator);
        let dd = poly::degree(&self.denominator);
        if nd == dd {
            sup = sup.max((self.numerator[nd] / self.denominator[dd]).abs());
        } else if nd > dd {
            sup = f64::INFINITY;
        }
        LhpReport {
            poles_rhp,
            proper,
            sup_imag_axis: sup,
            pass: poles_rhp && proper,
        }
    }

    /// The cached partial-fraction expansion; requires every pole in the open
    /// right half-plane.
    pub fn partial_fractions(&self) -> Result<&PartialFraction, RationalError> {
        if let Some(p) = self.poles.iter().find(|p| p.value.re <= RHP_MARGIN) {
            return Err(RationalError::NotAdmissible { pole: p.value });
        }
        self.expansion.as_ref().map_err(Clone::clone)
    }

    /// Factorises `I - (h/λ_i)A` for every pole, ready to apply `r(hA)`.
    pub fn prepare(&self, h: f64, a: &Matrix) -> Result<ResolventPlan, RationalError> {
        assert!(a.is_square());
        let n = a.rows();
        if h == 0.0 {
            return Ok(ResolventPlan {
                n,
                constant: C64::new(1.0, 0.0),
                stages: Vec::new(),
                identity: true,
            });
        }
        let pf = self.partial_fractions()?;
        let base = a.to_complex();
        let mut stages = Vec::with_capacity(pf.terms.len());
        for term in &pf.terms {
            let shift = C64::new(h, 0.0) / term.pole;
            let mut m: Vec<C64> = base.iter().map(|v| -shift * v).collect();
            for i in 0..n {
                m[i * n + i] += 1.0;
            }
            let lu = Lu::factor(n, m).map_err(|_| RationalError::SingularSolve { pole: term.pole })?;
            stages.push((lu, term.residues.clone()));
        }
        Ok(ResolventPlan {
            n,
            constant: pf.constant,
            stages,
            identity: false,
        })
    }

    /// `r(hA)x` through the partial-fraction resolvent sum.
    pub fn apply(&self, h: f64, a: &Matrix, x: &[f64]) -> Result<Vec<f64>, RationalError> {
        if a.rows() != x.len() {
            return Err(RationalError::DimensionMismatch {
                operator: a.rows(),
                vector: x.len(),
            });
        }
        if h == 0.0 {
            return Ok(x.to_vec());
        }
        self.prepare(h, a)?.apply(x)
    }

    fn expand(&self) -> Result<PartialFraction, RationalError> {
        if !self.is_proper() {
            return Err(RationalError::Improper);
        }
        let nd = poly::degree(&self.numerator);
        let dd = poly::degree(&self.denominator);
        let lead = self.denominator[dd];
        let constant = if nd == dd {
            C64::new(self.numerator[nd] / lead, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        let mut terms = Vec::with_capacity(self.poles.len());
        for (i, p) in self.poles.iter().enumerate() {
            let nu = p.multiplicity;
            let lam = p.value;
            // Taylor series of the numerator and of lead·Π_{k≠i}(z-λ_k)^{ν_k} at λ
            let num = poly::taylor_at(&self.numerator, lam, nu - 1);
            let mut den = vec![C64::new(0.0, 0.0); nu];
            den[0] = C64::new(lead, 0.0);
            for (k, q) in self.poles.iter().enumerate() {
                if k == i {
                    continue;
                }
                let offset = lam - q.value;
                for _ in 0..q.multiplicity {
                    // multiply by (w + offset), truncated
                    for l in (0..nu).rev() {
                        let prev = if l > 0 { den[l - 1] } else { C64::new(0.0, 0.0) };
                        den[l] = den[l] * offset + prev;
                    }
                }
            }
            let mut g = vec![C64::new(0.0, 0.0); nu];
            for l in 0..nu {
                let mut s = num[l];
                for j in 1..=l {
                    s -= den[j] * g[l - j];
                }
                g[l] = s / den[0];
            }
            // coefficient of (z-λ)^{-j} is g[ν-j]; (1-z/λ)^{-j} = (-λ)^j (z-λ)^{-j}
            let residues = (1..=nu)
                .map(|j| g[nu - j] / (-lam).powi(j as i32))
                .collect();
            terms.push(PoleTerm { pole: lam, residues });
        }
        let mut pf = PartialFraction {
            constant,
            terms,
            reconstruction_error: 0.0,
            condition_estimate: 0.0,
        };
        pf.condition_estimate = self.cross_check(&pf)?;
        let mut worst = 0.0f64;
        for y in reconstruction_points() {
            let z = C64::new(0.0, y);
            let exact = poly::eval(&self.numerator, z) / poly::eval(&self.denominator, z);
            let err = (exact - pf.eval(z)).norm() / (1.0 + exact.norm());
            worst = worst.max(err);
        }
        pf.reconstruction_error = worst;
        if !(worst <= RECONSTRUCTION_REL) {
            return Err(RationalError::ReconstructionFailure { error: worst });
        }
        Ok(pf)
    }

    /// Refits the residues by least squares on left half-plane sample points and
    /// compares them with the derivative-formula values.
    fn cross_check(&self, pf: &PartialFraction) -> Result<f64, RationalError> {
        let dd = poly::degree(&self.denominator);
        if dd == 0 {
            return Ok(1.0);
        }
        let with_constant = poly::degree(&self.numerator) == dd;
        let unknowns = dd + usize::from(with_constant);
        let samples = (2 * dd).max(8).max(unknowns);
        let radius = pf.terms.iter().map(|t| t.pole.norm()).sum::<f64>() / pf.terms.len() as f64;
        let mut a = Vec::with_capacity(samples * unknowns);
        let mut b = Vec::with_capacity(samples);
        for k in 0..samples {
            let phi = core::f64::consts::FRAC_PI_2
                + core::f64::consts::PI * (k as f64 + 0.5) / samples as f64;
            let z = C64::from_polar(radius, phi);
            if with_constant {
                a.push(C64::new(1.0, 0.0));
            }
            for t in &pf.terms {
                let base = C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z / t.pole);
                let mut pow = base;
                for _ in 0..t.multiplicity() {
                    a.push(pow);
                    pow *= base;
                }
            }
            b.push(poly::eval(&self.numerator, z) / poly::eval(&self.denominator, z));
        }
        let (x, cond) = least_squares(samples, unknowns, &a, &b);
        if !(cond <= MAX_CONDITION) {
            return Err(RationalError::IllConditioned { estimate: cond });
        }
        let mut derived = Vec::with_capacity(unknowns);
        if with_constant {
            derived.push(pf.constant);
        }
        derived.extend(pf.terms.iter().flat_map(|t| t.residues.iter().copied()));
        let size = derived.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let gap = x
            .iter()
            .zip(&derived)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
        if gap > RESIDUE_CROSS_CHECK * (1.0 + size) {
            return Err(RationalError::IllConditioned { estimate: cond });
        }
        Ok(cond)
    }
}

impl FromStr for RationalFunction {
    type Err = RationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_spec(s)
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    if inner.trim().is_empty() {
        return None;
    }
    inner.split(',').map(|t| t.trim().parse::<f64>().ok()).collect()
}

/// Names accepted by [`RationalFunction::from_spec`], plus `exact`.
pub fn catalog_names() -> [&'static str; 5] {
    [
        "backward_euler",
        "crank_nicolson",
        "iterated_resolvent:k",
        "exact",
        "custom:[a0,a1,...]/[b0,b1,...]",
    ]
}

/// The rational entries of the built-in catalog, with iterated resolvents up to `k_max`.
pub fn catalog(k_max: usize) -> Vec<RationalFunction> {
    let mut out = vec![RationalFunction::backward_euler(), RationalFunction::crank_nicolson()];
    out.extend((1..=k_max).map(RationalFunction::iterated_resolvent));
    out
}

/// 10,001 ordinates in `[-1e6, 1e6]`: zero, ±2500 log-spaced in `[1e-6, 1e6]`,
/// and 5000 linearly spaced.
fn imaginary_axis_samples() -> impl Iterator<Item = f64> {
    let log = (0..2500).flat_map(|k| {
        let e = -6.0 + 12.0 * k as f64 / 2499.0;
        let y = 10f64.powf(e);
        [y, -y]
    });
    let lin = (0..5000).map(|k| -1e6 + 2e6 * k as f64 / 4999.0);
    core::iter::once(0.0).chain(log).chain(lin)
}

/// 100 ordinates, ±50 log-spaced in `[1e-3, 1e3]`.
pub(crate) fn reconstruction_points() -> impl Iterator<Item = f64> {
    (0..50).flat_map(|k| {
        let y = 10f64.powf(-3.0 + 6.0 * k as f64 / 49.0);
        [y, -y]
    })
}

/// Factorised resolvents `I - (h/λ_i)A` for repeated application of `r(hA)`.
#[derive(Debug, Clone)]
pub struct ResolventPlan {
    n: usize,
    constant: C64,
    stages: Vec<(Lu<C64>, Vec<C64>)>,
    identity: bool,
}

impl ResolventPlan {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `c∞ x + Σ_i Σ_j C_ij (I - (h/λ_i)A)^{-j} x`, real part.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, RationalError> {
        if x.len() != self.n {
            return Err(RationalError::DimensionMismatch {
                operator: self.n,
                vector: x.len(),
            });
        }
        if self.identity {
            return Ok(x.to_vec());
        }
        let xc: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        let mut acc: Vec<C64> = xc.iter().map(|v| v * self.constant).collect();
        for (lu, residues) in &self.stages {
            let mut y = xc.clone();
            for c in residues {
                y = lu.solve(&y);
                for (a, v) in acc.iter_mut().zip(&y) {
                    *a += c * v;
                }
            }
        }
        let re: Vec<f64> = acc.iter().map(|v| v.re).collect();
        let im = acc.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        let size = crate::linalg::max_abs(&re);
        if im > IMAGINARY_RESIDUE * (1.0 + size) {
            return Err(RationalError::ImaginaryResidue { residue: im });
        }
        Ok(re)
    }
}

/// `true` when the expansion satisfies `c∞ + ΣC = 1` and `Σ (j/λ)C = 1`.
pub fn satisfies_residue_identities(pf: &PartialFraction) -> bool {
    (pf.residue_sum() - C64::new(1.0, 0.0)).norm() <= ALGEBRAIC
        && (pf.weighted_residue_sum() - C64::new(1.0, 0.0)).norm() <= ALGEBRAIC
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let be = RationalFunction::backward_euler();
        assert_eq!(be.eval(c(0.0)).unwrap(), c(1.0));
        assert_eq!(be.eval(c(-1.0)).unwrap(), c(0.5));
        let cn = RationalFunction::crank_nicolson();
        assert_eq!(cn.eval(c(-2.0)).unwrap(), c(0.0));
    }

    #[test]
    fn eval_at_pole_is_rejected() {
        let be = RationalFunction::backward_euler();
        assert!(matches!(
            be.eval(c(1.0)),
            Err(RationalError::PoleProximity { .. })
        ));
    }

    #[test]
    fn consistency_examples() {
        let be = RationalFunction::backward_euler().check_consistency();
        assert_eq!((be.r0, be.r0_prime, be.pass), (1.0, 1.0, true));
        let steep = RationalFunction::new("steep", &[1.0], &[1.0, -2.0])
            .unwrap()
            .check_consistency();
        assert_eq!((steep.r0, steep.r0_prime, steep.pass), (1.0, 2.0, false));
        let ir3 = RationalFunction::iterated_resolvent(3).check_consistency();
        assert!(ir3.pass);
        assert_relative_eq!(ir3.r0_prime, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn iterated_resolvent_slope_matches_finite_difference() {
        // independent check of r'(0) by a central difference on eval
        for k in 1..=5 {
            let r = RationalFunction::iterated_resolvent(k);
            let h = 1e-5;
            let d = (r.eval(c(h)).unwrap() - r.eval(c(-h)).unwrap()).re / (2.0 * h);
            assert!((d - 1.0).abs() < 1e-8, "k = {k}: {d}");
        }
    }

    #[test]
    fn lhp_examples() {
        let be = RationalFunction::backward_euler().check_lhp_admissible();
        assert!(be.poles_rhp && be.proper && be.pass);
        assert_relative_eq!(be.sup_imag_axis, 1.0, epsilon = 1e-12);
        let cn = RationalFunction::crank_nicolson().check_lhp_admissible();
        assert!(cn.pass);
        assert_relative_eq!(cn.sup_imag_axis, 1.0, epsilon = 1e-12);
        let bad = RationalFunction::new("lhp_pole", &[1.0], &[1.0, 1.0])
            .unwrap()
            .check_lhp_admissible();
        assert!(!bad.poles_rhp && bad.proper && !bad.pass);
    }

    #[test]
    fn improper_is_reported() {
        let r = RationalFunction::new("improper", &[1.0, 1.0, 1.0], &[1.0, -1.0]).unwrap();
        let rep = r.check_lhp_admissible();
        assert!(!rep.proper && !rep.pass);
        assert_eq!(r.partial_fractions().unwrap_err(), RationalError::Improper);
    }

    #[test]
    fn backward_euler_expansion() {
        let be = RationalFunction::backward_euler();
        let pf = be.partial_fractions().unwrap();
        assert_eq!(pf.constant, c(0.0));
        assert_eq!(pf.terms.len(), 1);
        assert!((pf.terms[0].pole - c(1.0)).norm() < 1e-15);
        assert_eq!(pf.terms[0].multiplicity(), 1);
        assert!((pf.terms[0].residues[0] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn crank_nicolson_expansion() {
        let pf = RationalFunction::crank_nicolson().partial_fractions().unwrap().clone();
        assert!((pf.constant - c(-1.0)).norm() < 1e-15);
        assert!((pf.terms[0].pole - c(2.0)).norm() < 1e-14);
        assert!((pf.terms[0].residues[0] - c(2.0)).norm() < 1e-13);
        // (1+z/2)/(1-z/2) = -1 + 2/(1-z/2) at a few points
        for z in [c(-3.0), C64::new(0.5, 2.0), C64::new(-1.0, -4.0)] {
            let lhs = (c(1.0) + z / 2.0) / (c(1.0) - z / 2.0);
            assert!((pf.eval(z) - lhs).norm() < 1e-14);
        }
    }

    #[test]
    fn iterated_resolvent_two_expansion() {
        let pf = RationalFunction::iterated_resolvent(2)
            .partial_fractions()
            .unwrap()
            .clone();
        assert_eq!(pf.constant, c(0.0));
        assert_eq!(pf.terms.len(), 1);
        let t = &pf.terms[0];
        assert!((t.pole - c(2.0)).norm() < 1e-12);
        assert_eq!(t.multiplicity(), 2);
        assert!(t.residues[0].norm() < 1e-10);
        assert!((t.residues[1] - c(1.0)).norm() < 1e-10);
        assert!(satisfies_residue_identities(&pf));
    }

    #[test]
    fn custom_distinct_complex_poles() {
        // third-order A-stable (2,?) style: denominator 1 - z + z^2/2 has poles 1 ± i
        let r = RationalFunction::from_spec("custom:[1]/[1,-1,0.5]").unwrap();
        let pf = r.partial_fractions().unwrap();
        assert_eq!(pf.terms.len(), 2);
        let conj = pf.terms[0].pole.conj();
        assert!((conj - pf.terms[1].pole).norm() < 1e-12);
        assert!((pf.terms[0].residues[0].conj() - pf.terms[1].residues[0]).norm() < 1e-12);
        assert!(pf.reconstruction_error < 1e-12);
    }

    #[test]
    fn common_root_rejected() {
        // (1 - z)/(1 - z)^2
        let err = RationalFunction::new("reducible", &[1.0, -1.0], &[1.0, -2.0, 1.0]).unwrap_err();
        assert!(matches!(err, RationalError::CommonRoot { .. }));
    }

    #[test]
    fn zero_constant_denominator_rejected() {
        assert!(RationalFunction::new("bad", &[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(RationalFunction::from_spec("backward_euler").unwrap().name(), "backward_euler");
        assert_eq!(
            RationalFunction::from_spec("iterated_resolvent:4").unwrap().poles()[0].multiplicity,
            4
        );
        assert!(RationalFunction::from_spec("iterated_resolvent:0").is_err());
        assert!(RationalFunction::from_spec("custom:[1]/[1,-1]").is_ok());
        assert!(RationalFunction::from_spec("custom:1/[1,-1]").is_err());
        assert!(RationalFunction::from_spec("runge_kutta").is_err());
    }

    #[test]
    fn apply_examples() {
        let a = Matrix::from_diagonal(&[-1.0, -2.0]);
        let be = RationalFunction::backward_euler();
        let y = be.apply(0.5, &a, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(y[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(y[1], 0.5, epsilon = 1e-15);
        let cn = RationalFunction::crank_nicolson();
        let y = cn.apply(0.1, &Matrix::from_diagonal(&[-1.0]), &[1.0]).unwrap();
        assert_relative_eq!(y[0], 0.95 / 1.05, epsilon = 1e-14);
    }

    #[test]
    fn apply_with_zero_step_is_identity() {
        let a = Matrix::from_rows(&[[-3.0, 1.0], [2.0, -7.0]]);
        let x = [0.1234, -9.75];
        for r in catalog(4) {
            assert_eq!(r.apply(0.0, &a, &x).unwrap(), x.to_vec());
        }
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let a = Matrix::identity(3);
        assert!(matches!(
            RationalFunction::backward_euler().apply(0.1, &a, &[1.0]),
            Err(RationalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_refuses_lhp_poles() {
        let r = RationalFunction::new("lhp", &[1.0], &[1.0, 1.0]).unwrap();
        let a = Matrix::from_diagonal(&[-1.0]);
        assert!(matches!(
            r.apply(0.1, &a, &[1.0]),
            Err(RationalError::NotAdmissible { .. })
        ));
    }
}
