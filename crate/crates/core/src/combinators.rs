//! Combinators for writing choreographies in Rust.
//!
//! A choreography is written as a list of instructions which [`seq`] strings
//! together. Instructions following a conditional continue both of its
//! branches; a call must be the last instruction of a list.
//!
//! The helpers panic on malformed identifiers, which makes them convenient
//! for tests and fixtures but unsuitable for user input.
//!
//! ```
//! use chorc_core::combinators::*;
//!
//! let p = prog(vec![], vec![
//!     ann("hello", com("a", lit_str("hi"), "b", "x")),
//!     cond("b", eq(var("x"), lit_str("hi")), vec![left("b", "a")], vec![right("b", "a")]),
//! ]);
//! assert_eq!(p.main.size(), 6);
//! ```

use num_bigint::BigInt;

use crate::cc::{ChorProgram, Choreography, Eta};
use crate::expr::{BinOp, BoolExpr, Expr, Value};
use crate::ident::{Ann, Label, ProcName, ProcessId, VarName};

#[derive(Debug, Clone, PartialEq)]
pub enum Instr {
    Act(Eta, Option<Ann>),
    Cond(ProcessId, BoolExpr, Vec<Instr>, Vec<Instr>),
    Call(ProcName),
}

pub fn pid(s: &str) -> ProcessId {
    ProcessId::new(s).expect("valid process id")
}

pub fn var_name(s: &str) -> VarName {
    VarName::new(s).expect("valid variable name")
}

pub fn proc_name(s: &str) -> ProcName {
    ProcName::new(s).expect("valid procedure name")
}

pub fn var(s: &str) -> Expr {
    Expr::Var(var_name(s))
}

pub fn opaque(s: &str) -> Expr {
    Expr::opaque(s)
}

pub fn lit_int(n: impl Into<BigInt>) -> Expr {
    Expr::Lit(Value::Int(n.into()))
}

pub fn lit_str(s: &str) -> Expr {
    Expr::Lit(Value::str(s))
}

pub fn lit_bool(b: bool) -> Expr {
    Expr::Lit(Value::Bool(b))
}

pub fn eq(l: Expr, r: Expr) -> Expr {
    Expr::binop(BinOp::Eq, l, r)
}

pub fn com(sender: &str, expr: Expr, receiver: &str, target: &str) -> Instr {
    Instr::Act(
        Eta::Com {
            sender: pid(sender),
            expr,
            receiver: pid(receiver),
            target: var_name(target),
        },
        None,
    )
}

pub fn sel(chooser: &str, target: &str, label: Label) -> Instr {
    Instr::Act(
        Eta::Sel {
            chooser: pid(chooser),
            target: pid(target),
            label,
        },
        None,
    )
}

pub fn left(chooser: &str, target: &str) -> Instr {
    sel(chooser, target, Label::Left)
}

pub fn right(chooser: &str, target: &str) -> Instr {
    sel(chooser, target, Label::Right)
}

/// Annotates an interaction. Panics on anything else.
pub fn ann(text: &str, instr: Instr) -> Instr {
    match instr {
        Instr::Act(eta, _) => Instr::Act(eta, Some(Ann::new(text).expect("nonempty annotation"))),
        other => panic!("only interactions carry annotations, got {other:?}"),
    }
}

pub fn cond(decider: &str, guard: Expr, then: Vec<Instr>, els: Vec<Instr>) -> Instr {
    Instr::Cond(
        pid(decider),
        BoolExpr::new(guard).expect("boolean guard"),
        then,
        els,
    )
}

pub fn call(name: &str) -> Instr {
    Instr::Call(proc_name(name))
}

/// Strings instructions together into a choreography.
pub fn seq(instrs: Vec<Instr>) -> Choreography {
    seq_onto(instrs, Choreography::End)
}

/// Like [`seq`], continuing with `tail` after the last instruction.
pub fn seq_onto(instrs: Vec<Instr>, tail: Choreography) -> Choreography {
    instrs.into_iter().rev().fold(tail, |acc, instr| match instr {
        Instr::Act(eta, ann) => Choreography::interaction(eta, ann, acc),
        Instr::Cond(p, guard, then, els) => {
            Choreography::cond(p, guard, seq_onto(then, acc.clone()), seq_onto(els, acc))
        }
        Instr::Call(x) => {
            assert_eq!(acc, Choreography::End, "call must be the last instruction");
            Choreography::Call(x)
        }
    })
}

pub fn prog(defs: Vec<(&str, Vec<Instr>)>, main: Vec<Instr>) -> ChorProgram {
    ChorProgram::new(
        defs.into_iter()
            .map(|(x, body)| (proc_name(x), seq(body)))
            .collect(),
        seq(main),
    )
}
