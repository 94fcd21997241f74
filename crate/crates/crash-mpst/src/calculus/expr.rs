use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Sort, Var};

/// Runtime values; each carries its sort.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Unit => Sort::Unit,
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
            Value::Str(_) => Sort::Str,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Lt,
    Eq,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Eq => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(Var),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("sort error: {0}")]
    SortError(String),
    #[error("unbound variable {0}")]
    UnboundVariable(Var),
    #[error("integer overflow")]
    Overflow,
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Lit(Value::Int(n))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Replaces free occurrences of `var` with a literal.
    pub fn subst(&self, var: &Var, v: &Value) -> Expr {
        match self {
            Expr::Var(x) if x == var => Expr::Lit(v.clone()),
            Expr::Lit(_) | Expr::Var(_) => self.clone(),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.subst(var, v), b.subst(var, v)),
            Expr::Not(a) => Expr::Not(Box::new(a.subst(var, v))),
        }
    }

    /// The sort of the expression, given sorts for its variables.
    pub fn sort(&self, env: &BTreeMap<Var, Sort>) -> Result<Sort, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.sort()),
            Expr::Var(x) => env.get(x).copied().ok_or_else(|| EvalError::UnboundVariable(x.clone())),
            Expr::Not(a) => match a.sort(env)? {
                Sort::Bool => Ok(Sort::Bool),
                s => Err(EvalError::SortError(format!("'not' applied to {s}"))),
            },
            Expr::Bin(op, a, b) => {
                let (sa, sb) = (a.sort(env)?, b.sort(env)?);
                match op {
                    BinOp::Add | BinOp::Sub if sa == Sort::Int && sb == Sort::Int => Ok(Sort::Int),
                    BinOp::Lt if sa == Sort::Int && sb == Sort::Int => Ok(Sort::Bool),
                    BinOp::Eq if sa == sb => Ok(Sort::Bool),
                    _ => Err(EvalError::SortError(format!("'{}' applied to {sa} and {sb}", op.symbol()))),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(x) => write!(f, "{x}"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Not(a) => write!(f, "not {a}"),
        }
    }
}

/// Big-step evaluation `e ↓ v`.
pub fn eval_expr(e: &Expr, env: &BTreeMap<Var, Value>) -> Result<Value, EvalError> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(x) => env.get(x).cloned().ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Expr::Not(a) => match eval_expr(a, env)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            v => Err(EvalError::SortError(format!("'not' applied to {}", v.sort()))),
        },
        Expr::Bin(op, a, b) => {
            let (va, vb) = (eval_expr(a, env)?, eval_expr(b, env)?);
            match (op, &va, &vb) {
                (BinOp::Add, Value::Int(x), Value::Int(y)) => {
                    x.checked_add(*y).map(Value::Int).ok_or(EvalError::Overflow)
                }
                (BinOp::Sub, Value::Int(x), Value::Int(y)) => {
                    x.checked_sub(*y).map(Value::Int).ok_or(EvalError::Overflow)
                }
                (BinOp::Lt, Value::Int(x), Value::Int(y)) => Ok(Value::Bool(x < y)),
                (BinOp::Eq, x, y) if x.sort() == y.sort() => Ok(Value::Bool(x == y)),
                _ => Err(EvalError::SortError(format!("'{}' applied to {} and {}", op.symbol(), va.sort(), vb.sort()))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> BTreeMap<Var, Value> {
        BTreeMap::from([(Var::new("x"), Value::Int(4))])
    }

    #[test]
    fn arithmetic_and_comparison() {
        let e = Expr::bin(BinOp::Lt, Expr::bin(BinOp::Add, Expr::Var(Var::new("x")), Expr::int(1)), Expr::int(6));
        assert_eq!(eval_expr(&e, &env()), Ok(Value::Bool(true)));
        let sorts = BTreeMap::from([(Var::new("x"), Sort::Int)]);
        assert_eq!(e.sort(&sorts), Ok(Sort::Bool));
        let neg = Expr::Not(Box::new(Expr::bin(
            BinOp::Eq,
            Expr::Lit(Value::Str("a".into())),
            Expr::Lit(Value::Str("a".into())),
        )));
        assert_eq!(eval_expr(&neg, &BTreeMap::new()), Ok(Value::Bool(false)));
    }

    #[test]
    fn errors() {
        let mixed = Expr::bin(BinOp::Add, Expr::int(1), Expr::Lit(Value::Bool(true)));
        assert!(matches!(eval_expr(&mixed, &BTreeMap::new()), Err(EvalError::SortError(_))));
        assert!(mixed.sort(&BTreeMap::new()).is_err());
        let unbound = Expr::Var(Var::new("y"));
        assert_eq!(eval_expr(&unbound, &env()), Err(EvalError::UnboundVariable(Var::new("y"))));
        let big = Expr::bin(BinOp::Add, Expr::int(i64::MAX), Expr::int(1));
        assert_eq!(eval_expr(&big, &BTreeMap::new()), Err(EvalError::Overflow));
    }

    #[test]
    fn substitution_replaces_free_variables() {
        let e = Expr::bin(BinOp::Sub, Expr::Var(Var::new("x")), Expr::int(1));
        assert_eq!(eval_expr(&e.subst(&Var::new("x"), &Value::Int(3)), &BTreeMap::new()), Ok(Value::Int(2)));
        assert_eq!(e.to_string(), "(x - 1)");
    }
}
