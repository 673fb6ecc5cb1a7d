//! Scalar expressions for the conformal factor `σ(x)` and the temporal
//! metric `h₁₁(t)`.
//!
//! Expressions are parsed once against a declared variable list and then
//! evaluated either for their value alone or together with an exact
//! gradient and Hessian (second-order forward mode, see [`hyper`]).

mod hyper;
mod parser;

use std::collections::HashMap;
use std::fmt;

use ndarray::Array2;
use thiserror::Error;

use hyper::Taylor2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("`{0}` is not a declared variable of this expression")]
    NotDeclared(String),
    #[error("expected {expected} variable values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    /// Value, first and second derivative at `u`.
    fn jet(self, u: f64) -> Result<(f64, f64, f64), ExprError> {
        Ok(match self {
            Func::Sin => (u.sin(), u.cos(), -u.sin()),
            Func::Cos => (u.cos(), -u.sin(), -u.cos()),
            Func::Exp => {
                let e = u.exp();
                (e, e, e)
            }
            Func::Log => {
                if u <= 0.0 {
                    return Err(ExprError::Domain(format!("log of non-positive value {u}")));
                }
                (u.ln(), 1.0 / u, -1.0 / (u * u))
            }
            Func::Sqrt => {
                if u <= 0.0 {
                    return Err(ExprError::Domain(format!(
                        "sqrt is not differentiable at {u}"
                    )));
                }
                let s = u.sqrt();
                (s, 0.5 / s, -0.25 / (s * u))
            }
        })
    }

    fn apply(self, u: f64) -> Result<f64, ExprError> {
        Ok(match self {
            Func::Sin => u.sin(),
            Func::Cos => u.cos(),
            Func::Exp => u.exp(),
            Func::Log => {
                if u <= 0.0 {
                    return Err(ExprError::Domain(format!("log of non-positive value {u}")));
                }
                u.ln()
            }
            Func::Sqrt => {
                if u < 0.0 {
                    return Err(ExprError::Domain(format!("sqrt of negative value {u}")));
                }
                u.sqrt()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Func(Func, Box<Node>),
}

fn is_integer(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() < i32::MAX as f64
}

/// `(f^p, d/df, d²/df²)` with the domain rules of the grammar.
fn power_jet(f: f64, p: f64) -> Result<(f64, f64, f64), ExprError> {
    if is_integer(p) {
        let k = p as i32;
        if k < 0 && f == 0.0 {
            return Err(ExprError::Domain("negative power of zero".into()));
        }
        let d1 = if k == 0 { 0.0 } else { p * f.powi(k - 1) };
        let d2 = if k == 0 || k == 1 {
            0.0
        } else {
            p * (p - 1.0) * f.powi(k - 2)
        };
        Ok((f.powi(k), d1, d2))
    } else {
        if f <= 0.0 {
            return Err(ExprError::Domain(format!(
                "non-integer power {p} of non-positive value {f}"
            )));
        }
        Ok((f.powf(p), p * f.powf(p - 1.0), p * (p - 1.0) * f.powf(p - 2.0)))
    }
}

impl Node {
    fn constant_value(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Var(_) => None,
            Node::Neg(a) => Some(-a.constant_value()?),
            Node::Add(a, b) => Some(a.constant_value()? + b.constant_value()?),
            Node::Sub(a, b) => Some(a.constant_value()? - b.constant_value()?),
            Node::Mul(a, b) => Some(a.constant_value()? * b.constant_value()?),
            Node::Div(a, b) => Some(a.constant_value()? / b.constant_value()?),
            Node::Pow(a, p) => Some(a.constant_value()?.powf(*p)),
            Node::Func(f, a) => f.apply(a.constant_value()?).ok(),
        }
    }

    fn has_vars(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.has_vars(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.has_vars() || b.has_vars()
            }
        }
    }

    fn value(&self, vals: &[f64]) -> Result<f64, ExprError> {
        Ok(match self {
            Node::Const(c) => *c,
            Node::Var(i) => vals[*i],
            Node::Neg(a) => -a.value(vals)?,
            Node::Add(a, b) => a.value(vals)? + b.value(vals)?,
            Node::Sub(a, b) => a.value(vals)? - b.value(vals)?,
            Node::Mul(a, b) => a.value(vals)? * b.value(vals)?,
            Node::Div(a, b) => {
                let d = b.value(vals)?;
                if d == 0.0 {
                    return Err(ExprError::Domain("division by zero".into()));
                }
                a.value(vals)? / d
            }
            Node::Pow(a, p) => power_jet(a.value(vals)?, *p)?.0,
            Node::Func(f, a) => f.apply(a.value(vals)?)?,
        })
    }

    /// `seeds[i]` is the gradient slot of variable `i`, if differentiated.
    fn taylor(&self, vals: &[f64], seeds: &[Option<usize>], k: usize) -> Result<Taylor2, ExprError> {
        Ok(match self {
            Node::Const(c) => Taylor2::constant(*c, k),
            Node::Var(i) => match seeds[*i] {
                Some(slot) => Taylor2::seed(vals[*i], k, slot),
                None => Taylor2::constant(vals[*i], k),
            },
            Node::Neg(a) => a.taylor(vals, seeds, k)?.neg(),
            Node::Add(a, b) => a.taylor(vals, seeds, k)?.add(&b.taylor(vals, seeds, k)?),
            Node::Sub(a, b) => a.taylor(vals, seeds, k)?.sub(&b.taylor(vals, seeds, k)?),
            Node::Mul(a, b) => a.taylor(vals, seeds, k)?.mul(&b.taylor(vals, seeds, k)?),
            Node::Div(a, b) => {
                let d = b.taylor(vals, seeds, k)?;
                if d.value == 0.0 {
                    return Err(ExprError::Domain("division by zero".into()));
                }
                a.taylor(vals, seeds, k)?.div(&d)
            }
            Node::Pow(a, p) => {
                let base = a.taylor(vals, seeds, k)?;
                let (f0, f1, f2) = power_jet(base.value, *p)?;
                base.chain(f0, f1, f2)
            }
            Node::Func(f, a) => {
                let arg = a.taylor(vals, seeds, k)?;
                let (f0, f1, f2) = f.jet(arg.value)?;
                arg.chain(f0, f1, f2)
            }
        })
    }

    fn map_vars(&self, f: &impl Fn(usize) -> Node) -> Node {
        let bx = |n: &Node| Box::new(n.map_vars(f));
        match self {
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => f(*i),
            Node::Neg(a) => Node::Neg(bx(a)),
            Node::Add(a, b) => Node::Add(bx(a), bx(b)),
            Node::Sub(a, b) => Node::Sub(bx(a), bx(b)),
            Node::Mul(a, b) => Node::Mul(bx(a), bx(b)),
            Node::Div(a, b) => Node::Div(bx(a), bx(b)),
            Node::Pow(a, p) => Node::Pow(bx(a), *p),
            Node::Func(func, a) => Node::Func(*func, bx(a)),
        }
    }

    fn write(&self, out: &mut fmt::Formatter<'_>, vars: &[String]) -> fmt::Result {
        match self {
            Node::Const(c) => write_number(out, *c),
            Node::Var(i) => write!(out, "{}", vars[*i]),
            Node::Neg(a) => {
                write!(out, "(-")?;
                a.write(out, vars)?;
                write!(out, ")")
            }
            Node::Add(a, b) => write_binary(out, vars, a, "+", b),
            Node::Sub(a, b) => write_binary(out, vars, a, "-", b),
            Node::Mul(a, b) => write_binary(out, vars, a, "*", b),
            Node::Div(a, b) => write_binary(out, vars, a, "/", b),
            Node::Pow(a, p) => {
                write!(out, "(")?;
                a.write(out, vars)?;
                write!(out, " ^ ")?;
                write_number(out, *p)?;
                write!(out, ")")
            }
            Node::Func(f, a) => {
                write!(out, "{}(", f.name())?;
                a.write(out, vars)?;
                write!(out, ")")
            }
        }
    }
}

fn write_number(out: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 {
        write!(out, "(-{:?})", -c)
    } else {
        write!(out, "{c:?}")
    }
}

fn write_binary(
    out: &mut fmt::Formatter<'_>,
    vars: &[String],
    a: &Node,
    op: &str,
    b: &Node,
) -> fmt::Result {
    write!(out, "(")?;
    a.write(out, vars)?;
    write!(out, " {op} ")?;
    b.write(out, vars)?;
    write!(out, ")")
}

/// A parsed scalar expression over a fixed, ordered variable list.
///
/// Immutable once built; evaluation takes variable values in declaration
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    variables: Vec<String>,
}

/// Value, gradient and Hessian of an expression at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Array2<f64>,
}

/// Parses `source` accepting exactly the identifiers in `variables`.
pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Expression, ExprError> {
    Expression::parse(source, variables)
}

impl Expression {
    pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Self, ExprError> {
        let variables: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        let root = parser::parse(source, &variables)?;
        Ok(Self { root, variables })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// True when no variable occurs in the tree.
    pub fn is_constant(&self) -> bool {
        !self.root.has_vars()
    }

    fn check_arity(&self, values: &[f64]) -> Result<(), ExprError> {
        if values.len() != self.variables.len() {
            return Err(ExprError::Arity {
                expected: self.variables.len(),
                got: values.len(),
            });
        }
        Ok(())
    }

    /// Value only. `values` follows the declared variable order.
    pub fn value(&self, values: &[f64]) -> Result<f64, ExprError> {
        self.check_arity(values)?;
        let v = self.root.value(values)?;
        if !v.is_finite() {
            return Err(ExprError::Domain(format!("non-finite value {v}")));
        }
        Ok(v)
    }

    /// Value, gradient and Hessian with respect to every declared variable.
    pub fn eval_all(&self, values: &[f64]) -> Result<EvalResult, ExprError> {
        let wrt: Vec<usize> = (0..self.variables.len()).collect();
        self.eval_indices(values, &wrt)
    }

    fn eval_indices(&self, values: &[f64], wrt: &[usize]) -> Result<EvalResult, ExprError> {
        self.check_arity(values)?;
        let k = wrt.len();
        let mut seeds = vec![None; self.variables.len()];
        for (slot, &var) in wrt.iter().enumerate() {
            seeds[var] = Some(slot);
        }
        let t = self.root.taylor(values, &seeds, k)?;
        if !t.value.is_finite() || t.grad.iter().chain(&t.hess).any(|d| !d.is_finite()) {
            return Err(ExprError::Domain("non-finite value or derivative".into()));
        }
        let hessian = Array2::from_shape_vec((k, k), t.hess).expect("k*k entries");
        Ok(EvalResult {
            value: t.value,
            gradient: t.grad,
            hessian,
        })
    }

    /// Exact value, gradient and Hessian with respect to `wrt`, with every
    /// declared variable bound by name.
    pub fn derivatives(
        &self,
        bindings: &HashMap<String, f64>,
        wrt: &[&str],
    ) -> Result<EvalResult, ExprError> {
        let values = self
            .variables
            .iter()
            .map(|v| bindings.get(v).copied().ok_or_else(|| ExprError::Unbound(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let wrt = wrt
            .iter()
            .map(|w| {
                self.variables
                    .iter()
                    .position(|v| v == w)
                    .ok_or_else(|| ExprError::NotDeclared(w.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.eval_indices(&values, &wrt)
    }

    /// Replaces every variable `v_i` by `scale[i] * v_i + offset[i]`.
    pub fn substitute_affine(&self, scale: &[f64], offset: &[f64]) -> Expression {
        assert_eq!(scale.len(), self.variables.len());
        assert_eq!(offset.len(), self.variables.len());
        let root = self.root.map_vars(&|i| {
            let scaled = Node::Mul(Box::new(Node::Const(scale[i])), Box::new(Node::Var(i)));
            if offset[i] == 0.0 {
                scaled
            } else {
                Node::Add(Box::new(scaled), Box::new(Node::Const(offset[i])))
            }
        });
        Expression {
            root,
            variables: self.variables.clone(),
        }
    }

    /// `factor * self`.
    pub fn scaled(&self, factor: f64) -> Expression {
        Expression {
            root: Node::Mul(Box::new(Node::Const(factor)), Box::new(self.root.clone())),
            variables: self.variables.clone(),
        }
    }

    /// `self + shift`.
    pub fn shifted(&self, shift: f64) -> Expression {
        Expression {
            root: Node::Add(Box::new(self.root.clone()), Box::new(Node::Const(shift))),
            variables: self.variables.clone(),
        }
    }
}

/// Canonical, fully parenthesised form; parses back to an
/// evaluation-equivalent tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &self.variables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn parses_grammar_smoke_cases() {
        assert!(parse("x1*x2", &xs(3)).is_ok());
        assert!(parse("exp(2*t)", &["t"]).is_ok());
        assert!(parse("-x1^2 + sqrt(x2)/cos(x1) - log(3)", &xs(2)).is_ok());
        assert!(parse("x1^(1/3) * x2^-2", &xs(2)).is_ok());
    }

    #[test]
    fn dangling_operator_reports_offset() {
        let err = parse("x1*", &["x1"]).unwrap_err();
        assert_eq!(
            err,
            ExprError::Syntax {
                offset: 3,
                message: "unexpected end of input".into()
            }
        );
    }

    #[test]
    fn unknown_identifier_named() {
        match parse("x1 + x9", &xs(3)).unwrap_err() {
            ExprError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "x9");
                assert_eq!(offset, 5);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn variable_exponent_rejected() {
        assert!(matches!(
            parse("x1^x2", &xs(2)),
            Err(ExprError::Syntax { offset: 3, .. })
        ));
    }

    #[test]
    fn empty_and_trailing_input() {
        assert!(matches!(parse("   ", &["t"]), Err(ExprError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("t )", &["t"]), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(t", &["t"]), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("t $", &["t"]), Err(ExprError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn precedence() {
        let vals = [3.0];
        let e = parse("-t^2", &["t"]).unwrap();
        assert_eq!(e.value(&vals).unwrap(), -9.0);
        let e = parse("1 - t - 1", &["t"]).unwrap();
        assert_eq!(e.value(&vals).unwrap(), -3.0);
        let e = parse("12 / t / 2", &["t"]).unwrap();
        assert_eq!(e.value(&vals).unwrap(), 2.0);
        let e = parse("2 + t * 2 ^ 2", &["t"]).unwrap();
        assert_eq!(e.value(&vals).unwrap(), 14.0);
        // left-associative powers
        let e = parse("t^2^3", &["t"]).unwrap();
        assert_eq!(e.value(&[2.0]).unwrap(), 64.0);
    }

    #[test]
    fn polynomial_derivatives() {
        let e = parse("x1*x2", &xs(2)).unwrap();
        let r = e.eval_all(&[1.0, 2.0]).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.gradient, vec![2.0, 1.0]);
        assert_eq!(r.hessian[[0, 1]], 1.0);
        assert_eq!(r.hessian[[1, 0]], 1.0);
        assert_eq!(r.hessian[[0, 0]], 0.0);
        assert_eq!(r.hessian[[1, 1]], 0.0);
    }

    #[test]
    fn exponential_derivative_by_name() {
        let e = parse("exp(2*t)", &["t"]).unwrap();
        let bind = HashMap::from([("t".to_string(), 0.0)]);
        let r = e.derivatives(&bind, &["t"]).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.gradient, vec![2.0]);
        assert_eq!(r.hessian[[0, 0]], 4.0);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let e = parse("3", &xs(3)).unwrap();
        assert!(e.is_constant());
        let r = e.eval_all(&[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(r.value, 3.0);
        assert!(r.gradient.iter().all(|g| *g == 0.0));
        assert!(r.hessian.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn derivatives_subset_and_binding_errors() {
        let e = parse("x1*x2*x3", &xs(3)).unwrap();
        let bind: HashMap<String, f64> =
            [("x1", 1.0), ("x2", 2.0), ("x3", 3.0)].map(|(k, v)| (k.to_string(), v)).into();
        let r = e.derivatives(&bind, &["x3", "x1"]).unwrap();
        assert_eq!(r.gradient, vec![2.0, 6.0]);
        assert_eq!(r.hessian[[0, 1]], 2.0);
        let partial = HashMap::from([("x1".to_string(), 1.0)]);
        assert!(matches!(e.derivatives(&partial, &["x1"]), Err(ExprError::Unbound(_))));
        assert!(matches!(e.derivatives(&bind, &["t"]), Err(ExprError::NotDeclared(_))));
    }

    #[test]
    fn domain_errors() {
        let e = parse("log(t)", &["t"]).unwrap();
        assert!(matches!(e.value(&[0.0]), Err(ExprError::Domain(_))));
        let e = parse("1/t", &["t"]).unwrap();
        assert!(matches!(e.eval_all(&[0.0]), Err(ExprError::Domain(_))));
        let e = parse("t^(1/2)", &["t"]).unwrap();
        assert!(matches!(e.value(&[-1.0]), Err(ExprError::Domain(_))));
        let e = parse("sqrt(t)", &["t"]).unwrap();
        assert_eq!(e.value(&[0.0]).unwrap(), 0.0);
        assert!(e.eval_all(&[0.0]).is_err());
    }

    #[test]
    fn integer_power_at_zero_is_smooth() {
        let e = parse("t^1 + t^2 + t^0", &["t"]).unwrap();
        let r = e.eval_all(&[0.0]).unwrap();
        assert_eq!((r.value, r.gradient[0], r.hessian[[0, 0]]), (1.0, 1.0, 2.0));
    }

    #[test]
    fn affine_substitution() {
        let e = parse("x1*x2", &xs(2)).unwrap();
        let s = e.substitute_affine(&[0.5, 2.0], &[0.0, 1.0]).shifted(-1.0).scaled(3.0);
        // 3 * ((0.5*2) * (2*1 + 1) - 1) = 6
        assert_eq!(s.value(&[2.0, 1.0]).unwrap(), 6.0);
        let back = parse(&s.to_string(), &xs(2)).unwrap();
        assert_eq!(back.value(&[2.0, 1.0]).unwrap(), 6.0);
    }

    #[test]
    fn printer_handles_negative_constants() {
        let e = parse("t", &["t"]).unwrap().shifted(-2.5).scaled(-1.0);
        let text = e.to_string();
        let back = parse(&text, &["t"]).unwrap();
        assert_eq!(back.value(&[1.0]).unwrap(), 1.5, "{text}");
    }
}
