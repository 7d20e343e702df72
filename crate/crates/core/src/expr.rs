//! The local computation language: values, expressions and their evaluation.
//!
//! Expressions come in two flavours. `Opaque` carries target-language text
//! that is pasted into generated code and never evaluated. Everything else
//! is a small evaluable language over integers, strings and booleans, which
//! is what the simulators run.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ident::VarName;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(BigInt),
    Str(String),
    Bool(bool),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Value::Int(n.into())
    }

    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Str(_) => "str",
            Value::Bool(_) => "bool",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Concat,
    Eq,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 8] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Concat,
        BinOp::Eq,
        BinOp::Lt,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Concat => "++",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.symbol() == s)
    }

    /// True if the operator always produces a boolean.
    pub fn is_boolean(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Lt | BinOp::And | BinOp::Or)
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(VarName),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Opaque(String),
}

impl Expr {
    pub fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::BinOp(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn opaque(text: impl Into<String>) -> Self {
        Expr::Opaque(text.into())
    }

    pub fn contains_opaque(&self) -> bool {
        match self {
            Expr::Opaque(_) => true,
            Expr::Lit(_) | Expr::Var(_) => false,
            Expr::BinOp(_, l, r) => l.contains_opaque() || r.contains_opaque(),
            Expr::Not(e) => e.contains_opaque(),
        }
    }

    /// Statically known result type, if the head node fixes it.
    fn static_type(&self) -> Option<&'static str> {
        match self {
            Expr::Lit(v) => Some(v.type_name()),
            Expr::BinOp(op, _, _) if op.is_boolean() => Some("bool"),
            Expr::BinOp(BinOp::Concat, _, _) => Some("str"),
            Expr::BinOp(..) => Some("int"),
            Expr::Not(_) => Some("bool"),
            Expr::Var(_) | Expr::Opaque(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("guard expression has static type {0}, expected bool")]
pub struct NotBoolean(pub &'static str);

/// An expression usable as a conditional guard.
///
/// Construction rejects expressions whose head already fixes a non-boolean
/// result; variables and opaque text are checked at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoolExpr(Expr);

impl BoolExpr {
    pub fn new(expr: Expr) -> Result<Self, NotBoolean> {
        match expr.static_type() {
            Some("bool") | None => Ok(Self(expr)),
            Some(other) => Err(NotBoolean(other)),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn into_expr(self) -> Expr {
        self.0
    }

    pub fn eval(&self, store: &Store) -> Result<bool, EvalError> {
        match eval_expr(&self.0, store)? {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::TypeMismatch {
                op: "guard".into(),
                got: other.type_name(),
            }),
        }
    }
}

/// Local store of one process.
pub type Store = BTreeMap<VarName, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(VarName),
    #[error("type mismatch in `{op}`: got {got}")]
    TypeMismatch { op: String, got: &'static str },
    #[error("opaque expressions cannot be evaluated")]
    OpaqueNotEvaluable,
}

fn mismatch(op: BinOp, got: &Value) -> EvalError {
    EvalError::TypeMismatch {
        op: op.symbol().to_string(),
        got: got.type_name(),
    }
}

/// Big-step evaluation of `expr` against `store`.
pub fn eval_expr(expr: &Expr, store: &Store) -> Result<Value, EvalError> {
    match expr {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(x) => store
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Expr::Opaque(_) => Err(EvalError::OpaqueNotEvaluable),
        Expr::Not(e) => match eval_expr(e, store)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            other => Err(EvalError::TypeMismatch {
                op: "not".into(),
                got: other.type_name(),
            }),
        },
        Expr::BinOp(op, l, r) => {
            let l = eval_expr(l, store)?;
            let r = eval_expr(r, store)?;
            apply(*op, l, r)
        }
    }
}

fn apply(op: BinOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use Value::*;
    match (op, l, r) {
        (BinOp::Add, Int(a), Int(b)) => Ok(Int(a + b)),
        (BinOp::Sub, Int(a), Int(b)) => Ok(Int(a - b)),
        (BinOp::Mul, Int(a), Int(b)) => Ok(Int(a * b)),
        (BinOp::Lt, Int(a), Int(b)) => Ok(Bool(a < b)),
        (BinOp::Concat, Str(a), Str(b)) => Ok(Str(a + &b)),
        (BinOp::And, Bool(a), Bool(b)) => Ok(Bool(a && b)),
        (BinOp::Or, Bool(a), Bool(b)) => Ok(Bool(a || b)),
        (BinOp::Eq, a, b) if a.type_name() == b.type_name() => Ok(Bool(a == b)),
        (BinOp::Eq, _, b) => Err(mismatch(op, &b)),
        (
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Lt,
            Int(_),
            bad,
        )
        | (BinOp::Concat, Str(_), bad)
        | (BinOp::And | BinOp::Or, Bool(_), bad) => Err(mismatch(op, &bad)),
        (_, bad, _) => Err(mismatch(op, &bad)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Expr {
        Expr::Var(VarName::new(s).unwrap())
    }

    fn int(n: i64) -> Expr {
        Expr::Lit(Value::int(n))
    }

    #[test]
    fn literal_identity() {
        assert_eq!(eval_expr(&int(0), &Store::new()), Ok(Value::int(0)));
    }

    #[test]
    fn arithmetic() {
        let e = Expr::binop(BinOp::Add, int(1), int(2));
        assert_eq!(eval_expr(&e, &Store::new()), Ok(Value::int(3)));
        let e = Expr::binop(BinOp::Mul, Expr::binop(BinOp::Sub, int(1), int(4)), int(5));
        assert_eq!(eval_expr(&e, &Store::new()), Ok(Value::int(-15)));
    }

    #[test]
    fn arbitrary_precision() {
        let big = Expr::Lit(Value::Int("123456789012345678901234567890".parse().unwrap()));
        let e = Expr::binop(BinOp::Mul, big.clone(), big);
        let Value::Int(n) = eval_expr(&e, &Store::new()).unwrap() else {
            panic!("expected int");
        };
        assert_eq!(
            n.to_string(),
            "15241578753238836750495351562536198787501905199875019052100"
        );
    }

    #[test]
    fn store_lookup() {
        let mut store = Store::new();
        store.insert(VarName::new("token").unwrap(), Value::str("abc"));
        assert_eq!(eval_expr(&var("token"), &store), Ok(Value::str("abc")));
        assert_eq!(
            eval_expr(&var("other"), &store),
            Err(EvalError::UnboundVariable(VarName::new("other").unwrap()))
        );
    }

    #[test]
    fn no_cross_tag_coercion() {
        let e = Expr::binop(BinOp::Add, int(1), Expr::Lit(Value::str("1")));
        assert!(matches!(
            eval_expr(&e, &Store::new()),
            Err(EvalError::TypeMismatch { got: "str", .. })
        ));
        let e = Expr::binop(BinOp::Eq, int(1), Expr::Lit(Value::Bool(true)));
        assert!(matches!(
            eval_expr(&e, &Store::new()),
            Err(EvalError::TypeMismatch { .. })
        ));
        let e = Expr::binop(BinOp::And, int(1), Expr::Lit(Value::Bool(true)));
        assert!(matches!(
            eval_expr(&e, &Store::new()),
            Err(EvalError::TypeMismatch { got: "int", .. })
        ));
    }

    #[test]
    fn strings_and_logic() {
        let e = Expr::binop(
            BinOp::Concat,
            Expr::Lit(Value::str("ab")),
            Expr::Lit(Value::str("cd")),
        );
        assert_eq!(eval_expr(&e, &Store::new()), Ok(Value::str("abcd")));
        let e = Expr::not(Expr::binop(
            BinOp::Or,
            Expr::Lit(Value::Bool(false)),
            Expr::binop(BinOp::Lt, int(2), int(1)),
        ));
        assert_eq!(eval_expr(&e, &Store::new()), Ok(Value::Bool(true)));
    }

    #[test]
    fn opaque_is_never_evaluated() {
        assert_eq!(
            eval_expr(&Expr::opaque("check(credentials)"), &Store::new()),
            Err(EvalError::OpaqueNotEvaluable)
        );
    }

    #[test]
    fn guard_shapes() {
        assert!(BoolExpr::new(int(1)).is_err());
        assert!(BoolExpr::new(Expr::binop(BinOp::Concat, var("a"), var("b"))).is_err());
        assert!(BoolExpr::new(var("ok")).is_ok());
        assert!(BoolExpr::new(Expr::opaque("check(x)")).is_ok());
        let mut store = Store::new();
        store.insert(VarName::new("ok").unwrap(), Value::int(1));
        assert!(BoolExpr::new(var("ok")).unwrap().eval(&store).is_err());
    }
}
