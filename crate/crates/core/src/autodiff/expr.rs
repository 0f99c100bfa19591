use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use super::Dual;

/// Scalar expression over the numbered inputs `Var(0) .. Var(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Var(usize),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i32),
    Sin(Box<ScalarExpr>),
    Cos(Box<ScalarExpr>),
    Tan(Box<ScalarExpr>),
    Exp(Box<ScalarExpr>),
    Ln(Box<ScalarExpr>),
    Sqrt(Box<ScalarExpr>),
    /// `Atan2(y, x)`.
    Atan2(Box<ScalarExpr>, Box<ScalarExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogOfNonPositive => "logarithm of a non-positive value",
            DomainKind::SqrtOfNegative => "square root of a negative value",
            DomainKind::NonFinite => "non-finite value or derivative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("domain error: {kind} in `{expr}`")]
    Domain { kind: DomainKind, expr: ScalarExpr },
    #[error("variable slot {slot} used with only {arity} inputs")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("seed direction {seed} out of range for {arity} inputs")]
    BadSeed { seed: usize, arity: usize },
}

impl ScalarExpr {
    pub fn var(slot: usize) -> Self {
        ScalarExpr::Var(slot)
    }

    pub fn constant(v: f64) -> Self {
        ScalarExpr::Const(v)
    }

    pub fn powi(self, n: i32) -> Self {
        ScalarExpr::Pow(Box::new(self), n)
    }

    pub fn sin(self) -> Self {
        ScalarExpr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        ScalarExpr::Cos(Box::new(self))
    }

    pub fn tan(self) -> Self {
        ScalarExpr::Tan(Box::new(self))
    }

    pub fn exp(self) -> Self {
        ScalarExpr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Self {
        ScalarExpr::Ln(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        ScalarExpr::Sqrt(Box::new(self))
    }

    pub fn atan2(y: ScalarExpr, x: ScalarExpr) -> Self {
        ScalarExpr::Atan2(Box::new(y), Box::new(x))
    }

    /// Largest `Var` slot referenced, if any.
    pub fn max_slot(&self) -> Option<usize> {
        use ScalarExpr::*;
        match self {
            Const(_) => None,
            Var(s) => Some(*s),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Atan2(a, b) => {
                a.max_slot().max(b.max_slot())
            }
            Neg(a) | Pow(a, _) | Sin(a) | Cos(a) | Tan(a) | Exp(a) | Ln(a) | Sqrt(a) => {
                a.max_slot()
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl $trait for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::Neg(Box::new(self))
    }
}

/// Numbers the evaluator can run on: plain reals and duals.
trait Number:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn lift(&self, c: f64) -> Self;
    fn val(&self) -> f64;
    fn finite(&self) -> bool;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn atan2(&self, x: &Self) -> Self;
}

impl Number for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn val(&self) -> f64 {
        *self
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
}

impl Number for Dual {
    fn lift(&self, c: f64) -> Self {
        Dual::constant(c, self.dims())
    }
    fn val(&self) -> f64 {
        self.value
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn sin(&self) -> Self {
        Dual::sin(self)
    }
    fn cos(&self) -> Self {
        Dual::cos(self)
    }
    fn tan(&self) -> Self {
        Dual::tan(self)
    }
    fn exp(&self) -> Self {
        Dual::exp(self)
    }
    fn ln(&self) -> Self {
        Dual::ln(self)
    }
    fn sqrt(&self) -> Self {
        Dual::sqrt(self)
    }
    fn powi(&self, n: i32) -> Self {
        Dual::powi(self, n)
    }
    fn atan2(&self, x: &Self) -> Self {
        Dual::atan2(self, x)
    }
}

fn domain(kind: DomainKind, expr: &ScalarExpr) -> ScalarError {
    ScalarError::Domain {
        kind,
        expr: expr.clone(),
    }
}

fn eval_generic<T: Number>(expr: &ScalarExpr, point: &[T]) -> Result<T, ScalarError> {
    use ScalarExpr as E;
    let out = match expr {
        E::Const(c) => point
            .first()
            .map(|p| p.lift(*c))
            .unwrap_or_else(|| unreachable!("evaluation point is never empty")),
        E::Var(slot) => point
            .get(*slot)
            .cloned()
            .ok_or(ScalarError::SlotOutOfRange {
                slot: *slot,
                arity: point.len(),
            })?,
        E::Add(a, b) => eval_generic(a, point)? + eval_generic(b, point)?,
        E::Sub(a, b) => eval_generic(a, point)? - eval_generic(b, point)?,
        E::Mul(a, b) => eval_generic(a, point)? * eval_generic(b, point)?,
        E::Div(a, b) => {
            let num = eval_generic(a, point)?;
            let den = eval_generic(b, point)?;
            if den.val() == 0.0 {
                return Err(domain(DomainKind::DivisionByZero, expr));
            }
            num / den
        }
        E::Neg(a) => -eval_generic(a, point)?,
        E::Pow(a, n) => {
            let base = eval_generic(a, point)?;
            if *n < 0 && base.val() == 0.0 {
                return Err(domain(DomainKind::DivisionByZero, expr));
            }
            base.powi(*n)
        }
        E::Sin(a) => eval_generic(a, point)?.sin(),
        E::Cos(a) => eval_generic(a, point)?.cos(),
        E::Tan(a) => eval_generic(a, point)?.tan(),
        E::Exp(a) => eval_generic(a, point)?.exp(),
        E::Ln(a) => {
            let x = eval_generic(a, point)?;
            if x.val() <= 0.0 {
                return Err(domain(DomainKind::LogOfNonPositive, expr));
            }
            x.ln()
        }
        E::Sqrt(a) => {
            let x = eval_generic(a, point)?;
            if x.val() < 0.0 {
                return Err(domain(DomainKind::SqrtOfNegative, expr));
            }
            x.sqrt()
        }
        E::Atan2(y, x) => {
            let y = eval_generic(y, point)?;
            let x = eval_generic(x, point)?;
            y.atan2(&x)
        }
    };
    if out.finite() {
        Ok(out)
    } else {
        Err(domain(DomainKind::NonFinite, expr))
    }
}

/// Real-valued evaluation at `point`.
pub fn eval_scalar(expr: &ScalarExpr, point: &[f64]) -> Result<f64, ScalarError> {
    if point.is_empty() {
        return constant_only(expr);
    }
    eval_generic(expr, point)
}

fn constant_only(expr: &ScalarExpr) -> Result<f64, ScalarError> {
    match expr.max_slot() {
        Some(slot) => Err(ScalarError::SlotOutOfRange { slot, arity: 0 }),
        None => eval_generic(expr, &[0.0]),
    }
}

/// Value and full gradient at `point`: input `i` is seeded along direction `i`,
/// so the result carries `point.len()` partials.
pub fn eval_dual(expr: &ScalarExpr, point: &[f64]) -> Result<Dual, ScalarError> {
    let n = point.len();
    if n == 0 {
        return constant_only(expr).map(|v| Dual::constant(v, 0));
    }
    let seeded: Vec<Dual> = point
        .iter()
        .enumerate()
        .map(|(i, &x)| Dual::variable(x, n, i))
        .collect();
    eval_generic(expr, &seeded)
}

/// Value and the single partial `∂expr/∂x_seed`, from one pass with one seeded
/// direction.
pub fn eval_seeded(expr: &ScalarExpr, point: &[f64], seed: usize) -> Result<Dual, ScalarError> {
    if seed >= point.len() {
        return Err(ScalarError::BadSeed {
            seed,
            arity: point.len(),
        });
    }
    let seeded: Vec<Dual> = point
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == seed {
                Dual::variable(x, 1, 0)
            } else {
                Dual::constant(x, 1)
            }
        })
        .collect();
    eval_generic(expr, &seeded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn x(i: usize) -> ScalarExpr {
        ScalarExpr::var(i)
    }

    #[test]
    fn eval_examples() {
        let e = x(0) * x(1).cos();
        assert_eq!(eval_scalar(&e, &[2.0, 0.0]).unwrap(), 2.0);
        let pole = ScalarExpr::constant(1.0) / x(0);
        assert!(matches!(
            eval_scalar(&pole, &[0.0]),
            Err(ScalarError::Domain {
                kind: DomainKind::DivisionByZero,
                ..
            })
        ));
        let at = ScalarExpr::atan2(x(1), x(0));
        assert!((eval_scalar(&at, &[1.0, 1.0]).unwrap() - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = x(0) + x(1).ln();
        match eval_scalar(&e, &[1.0, -1.0]).unwrap_err() {
            ScalarError::Domain { kind, expr } => {
                assert_eq!(kind, DomainKind::LogOfNonPositive);
                assert_eq!(expr, x(1).ln());
            }
            other => panic!("{other:?}"),
        }
        assert!(eval_scalar(&x(0).sqrt(), &[-1.0]).is_err());
        assert!(eval_scalar(&x(0).powi(-1), &[0.0]).is_err());
        assert!(eval_dual(&x(0).sqrt(), &[0.0]).is_err());
        assert!(eval_scalar(&x(3), &[0.0]).is_err());
    }

    #[test]
    fn dual_examples() {
        let d = eval_dual(&(x(0) * x(1).cos()), &[2.0, 0.0]).unwrap();
        assert_eq!(d.value, 2.0);
        assert_eq!(d.partials, vec![1.0, 0.0]);

        let id = eval_dual(&x(0), &[4.0, -1.0, 7.0]).unwrap();
        assert_eq!(id.partials, vec![1.0, 0.0, 0.0]);

        let sq = eval_dual(&x(0).powi(2), &[3.0]).unwrap();
        assert_eq!((sq.value, sq.partials[0]), (9.0, 6.0));
    }

    #[test]
    fn seeded_pass_matches_gradient() {
        let e = (x(0) * x(1)).sin() + x(2).exp() / x(0);
        let p = [0.7, -1.3, 0.4];
        let full = eval_dual(&e, &p).unwrap();
        for seed in 0..3 {
            let one = eval_seeded(&e, &p, seed).unwrap();
            assert_eq!(one.value, full.value);
            assert_eq!(one.partials.len(), 1);
            assert!((one.partials[0] - full.partials[seed]).abs() < 1e-15);
        }
        assert!(eval_seeded(&e, &p, 3).is_err());
    }

    #[test]
    fn constants_without_inputs() {
        let e = ScalarExpr::constant(2.0).powi(3);
        assert_eq!(eval_scalar(&e, &[]).unwrap(), 8.0);
        assert!(eval_scalar(&x(0), &[]).is_err());
    }
}
