//! Closed-form functions of position `s` written in config files.
//!
//! Accepted: numbers, `s`, `pi`, `sin`, `cos`, `exp`, `+ - * / ^` and
//! parentheses. Anything else is rejected at parse time.

use std::f64::consts::PI;

use exmex::prelude::*;
use exmex::{ops_factory, BinOp, MakeOperators, Operator};
use opsplit::spatial::{ContinuousFunction, Smoothness};

ops_factory!(
    Whitelist,
    f64,
    Operator::make_bin(
        "+",
        BinOp {
            apply: |a, b| a + b,
            prio: 0,
            is_commutative: true
        }
    ),
    Operator::make_bin_unary(
        "-",
        BinOp {
            apply: |a, b| a - b,
            prio: 0,
            is_commutative: false
        },
        |a| -a
    ),
    Operator::make_bin(
        "*",
        BinOp {
            apply: |a, b| a * b,
            prio: 1,
            is_commutative: true
        }
    ),
    Operator::make_bin(
        "/",
        BinOp {
            apply: |a, b| a / b,
            prio: 1,
            is_commutative: false
        }
    ),
    Operator::make_bin(
        "^",
        BinOp {
            apply: |a: f64, b| a.powf(b),
            prio: 2,
            is_commutative: false
        }
    ),
    Operator::make_unary("sin", |a| a.sin()),
    Operator::make_unary("cos", |a| a.cos()),
    Operator::make_unary("exp", |a| a.exp()),
    Operator::make_constant("pi", PI)
);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("cannot parse `{source_text}`: {message}")]
    Syntax { source_text: String, message: String },
    #[error("unknown variable `{0}` (only `s` is allowed)")]
    UnknownVariable(String),
    #[error("`{0}` is not finite on [0, 1]")]
    NotFinite(String),
}

/// A parsed expression in `s`.
#[derive(Debug, Clone)]
pub struct Expr {
    text: String,
    flat: FlatEx<f64, Whitelist>,
    uses_s: bool,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        let flat = FlatEx::<f64, Whitelist>::parse(text).map_err(|e| ExprError::Syntax {
            source_text: text.to_string(),
            message: e.to_string(),
        })?;
        if let Some(bad) = flat.var_names().iter().find(|v| v.as_str() != "s") {
            return Err(ExprError::UnknownVariable(bad.clone()));
        }
        let uses_s = !flat.var_names().is_empty();
        let expr = Self {
            text: text.to_string(),
            flat,
            uses_s,
        };
        if (0..=64).any(|i| !expr.eval(i as f64 / 64.0).is_finite()) {
            return Err(ExprError::NotFinite(text.to_string()));
        }
        Ok(expr)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eval(&self, s: f64) -> f64 {
        let args: &[f64] = if self.uses_s { &[s] } else { &[] };
        self.flat.eval(args).unwrap_or(f64::NAN)
    }

    /// `|f(0) - f(1)|`, zero for periodic data.
    pub fn periodicity_defect(&self) -> f64 {
        (self.eval(0.0) - self.eval(1.0)).abs()
    }

    pub fn into_function(self) -> ContinuousFunction {
        ContinuousFunction::new(Smoothness::Analytic, move |s| self.eval(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaction_rate_expression() {
        let e = Expr::parse("-(1+sin(2*pi*s))").unwrap();
        assert_eq!(e.eval(0.25), -2.0);
        assert_eq!(e.eval(0.0), -1.0);
    }

    #[test]
    fn arithmetic_is_floating_point() {
        assert_eq!(Expr::parse("1/2").unwrap().eval(0.3), 0.5);
        assert_eq!(Expr::parse("2^3*s").unwrap().eval(0.5), 4.0);
        assert_eq!(Expr::parse("exp(0)").unwrap().eval(0.0), 1.0);
        assert!((Expr::parse("cos(2*pi*s)").unwrap().eval(0.5) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_outside_whitelist() {
        assert!(matches!(Expr::parse("tan(s)"), Err(ExprError::Syntax { .. })));
        assert_eq!(Expr::parse("s + t").unwrap_err(), ExprError::UnknownVariable("t".into()));
        assert!(matches!(Expr::parse("1/s"), Err(ExprError::NotFinite(_))));
    }

    #[test]
    fn periodicity() {
        assert!(Expr::parse("sin(2*pi*s)").unwrap().periodicity_defect() < 1e-15);
        assert_eq!(Expr::parse("s").unwrap().periodicity_defect(), 1.0);
    }
}
