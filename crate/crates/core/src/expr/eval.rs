use std::collections::HashMap;

use super::ast::{Ast, AstKind, BinaryOp, Func};
use super::parser::parse;
use super::{EvalError, ExprError};
use crate::numkernel::dual::gradient;
use crate::numkernel::Real;

/// A scalar function of a fixed number of real arguments, evaluable over any
/// [`Real`] so that dual numbers yield derivatives.
pub trait Field: Send + Sync {
    fn arity(&self) -> usize;
    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError>;
}

/// Apply a binary operator with the language's domain rules.
pub(crate) fn apply_binary<T: Real>(op: BinaryOp, a: T, b: T) -> Result<T, EvalError> {
    Ok(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a / b,
        BinaryOp::Pow => power(a, b)?,
    })
}

fn power<T: Real>(base: T, exponent: T) -> Result<T, EvalError> {
    if exponent.is_constant() {
        let e = exponent.value();
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return Ok(base.powi(e as i32));
        }
        if base.value() < 0.0 {
            return Err(EvalError::Domain(format!("negative base {} to non-integer power {e}", base.value())));
        }
        return Ok(base.powf(e));
    }
    if base.value() <= 0.0 {
        return Err(EvalError::Domain(format!("non-positive base {} to variable power", base.value())));
    }
    Ok((exponent * base.ln()).exp())
}

pub(crate) fn apply_func<T: Real>(func: Func, a: T) -> Result<T, EvalError> {
    Ok(match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => a.tan(),
        Func::Exp => a.exp(),
        Func::Sqrt => {
            if a.value() < 0.0 {
                return Err(EvalError::Domain(format!("sqrt of negative value {}", a.value())));
            }
            a.sqrt()
        }
    })
}

impl Ast {
    /// Evaluate with named bindings.
    pub fn eval<T: Real>(&self, bindings: &HashMap<String, T>) -> Result<T, EvalError> {
        match &self.kind {
            AstKind::Literal(v) => Ok(T::from_f64(*v)),
            AstKind::Variable(name) => bindings.get(name).cloned().ok_or_else(|| EvalError::Unbound(name.clone())),
            AstKind::Neg(a) => Ok(-a.eval(bindings)?),
            AstKind::Binary(op, a, b) => apply_binary(*op, a.eval(bindings)?, b.eval(bindings)?),
            AstKind::Call(func, a) => apply_func(*func, a.eval(bindings)?),
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        match self {
            Node::Const(v) => Ok(T::from_f64(*v)),
            Node::Slot(i) => Ok(x[*i].clone()),
            Node::Neg(a) => Ok(-a.eval(x)?),
            Node::Binary(op, a, b) => apply_binary(*op, a.eval(x)?, b.eval(x)?),
            Node::Call(func, a) => apply_func(*func, a.eval(x)?),
        }
    }
}

/// An expression compiled against an ordered argument list, with named
/// parameters folded in as constants.
#[derive(Clone, Debug)]
pub struct ExprField {
    source: Ast,
    vars: Vec<String>,
    root: Node,
}

impl ExprField {
    pub fn new(ast: &Ast, vars: &[&str], params: &[(&str, f64)]) -> Result<Self, EvalError> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let params: HashMap<&str, f64> = params.iter().copied().collect();
        fn compile(ast: &Ast, vars: &[String], params: &HashMap<&str, f64>) -> Result<Node, EvalError> {
            Ok(match &ast.kind {
                AstKind::Literal(v) => Node::Const(*v),
                AstKind::Variable(name) => match vars.iter().position(|v| v == name) {
                    Some(i) => Node::Slot(i),
                    None => match params.get(name.as_str()) {
                        Some(&v) => Node::Const(v),
                        None => return Err(EvalError::Unbound(name.clone())),
                    },
                },
                AstKind::Neg(a) => Node::Neg(Box::new(compile(a, vars, params)?)),
                AstKind::Binary(op, a, b) => {
                    Node::Binary(*op, Box::new(compile(a, vars, params)?), Box::new(compile(b, vars, params)?))
                }
                AstKind::Call(f, a) => Node::Call(*f, Box::new(compile(a, vars, params)?)),
            })
        }
        let root = compile(ast, &vars, &params)?;
        Ok(Self { source: ast.clone(), vars, root })
    }

    pub fn parse(src: &str, vars: &[&str], params: &[(&str, f64)]) -> Result<Self, ExprError> {
        Ok(Self::new(&parse(src)?, vars, params)?)
    }

    pub fn source(&self) -> &Ast {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }
}

impl Field for ExprField {
    fn arity(&self) -> usize {
        self.vars.len()
    }

    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        if x.len() != self.vars.len() {
            return Err(EvalError::Arity { expected: self.vars.len(), found: x.len() });
        }
        self.root.eval(x)
    }
}

/// Gradient of `ast` with respect to `wrt` at `point`; any other names must be
/// bound in `params`.
pub fn grad(ast: &Ast, wrt: &[&str], point: &[f64], params: &[(&str, f64)]) -> Result<Vec<f64>, EvalError> {
    let field = ExprField::new(ast, wrt, params)?;
    if point.len() != wrt.len() {
        return Err(EvalError::Arity { expected: wrt.len(), found: point.len() });
    }
    Ok(gradient(|x| field.eval(x), point)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Dual;

    fn eval_src(src: &str, binds: &[(&str, f64)]) -> Result<f64, EvalError> {
        let map: HashMap<String, f64> = binds.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        parse(src).unwrap().eval(&map)
    }

    #[test]
    fn literal_arithmetic() {
        assert_eq!(eval_src("2+3*4", &[]).unwrap(), 14.0);
        assert_eq!(eval_src("-2^2", &[]).unwrap(), -4.0);
        assert_eq!(eval_src("2^3^2", &[]).unwrap(), 512.0);
        assert_eq!(eval_src("2^-1", &[]).unwrap(), 0.5);
        assert!(eval_src("sin(pi)", &[]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn singular_lagrangian_vanishes_on_diagonal() {
        let v = eval_src("0.5*((x2-x1)/h)^2 + 0.5*x1^2*y1", &[("x1", 1.0), ("y1", 0.0), ("x2", 1.0), ("h", 0.1)]);
        assert_eq!(v.unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(eval_src("x + 1", &[]), Err(EvalError::Unbound("x".into())));
        assert!(matches!(eval_src("sqrt(-1)", &[]), Err(EvalError::Domain(_))));
        assert!(matches!(eval_src("(-8)^(1/3)", &[]), Err(EvalError::Domain(_))));
        assert_eq!(eval_src("x/0", &[("x", 1.0)]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gradient_of_simple_product() {
        let g = grad(&parse("x^2*y/2").unwrap(), &["x", "y"], &[1.0, 2.0], &[]).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-15 && (g[1] - 0.5).abs() < 1e-15);
        let g = grad(&parse("3.5").unwrap(), &["x", "y"], &[1.0, 2.0], &[]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn variable_exponent_uses_log() {
        // d/dx x^x = x^x (ln x + 1)
        let g = grad(&parse("x^x").unwrap(), &["x"], &[2.0], &[]).unwrap();
        assert!((g[0] - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
        assert!(matches!(eval_src("x^x", &[("x", -1.5)]), Err(EvalError::Domain(_))));
    }

    #[test]
    fn compiled_field_matches_named_eval() {
        let ast = parse("x*sin(y) + h*exp(x)").unwrap();
        let field = ExprField::new(&ast, &["x", "y"], &[("h", 0.3)]).unwrap();
        let named = eval_src("x*sin(y) + h*exp(x)", &[("x", 0.7), ("y", -1.1), ("h", 0.3)]).unwrap();
        assert_eq!(field.eval(&[0.7, -1.1]).unwrap(), named);
        assert_eq!(field.eval(&[0.7]), Err(EvalError::Arity { expected: 2, found: 1 }));
        assert!(ExprField::new(&ast, &["x"], &[]).is_err());
    }

    #[test]
    fn nested_duals_give_second_derivatives() {
        let field = ExprField::parse("x^3", &["x"], &[]).unwrap();
        let x = Dual::variable(Dual::variable(2.0, 0, 1), 0, 1);
        let out = field.eval(&[x]).unwrap();
        assert_eq!(out.partial(0).partial(0), 12.0);
    }
}
