//! A choreography compiler.
//!
//! Choreographies describe the interactions of several processes from a
//! global viewpoint. This crate parses them from a small textual language
//! ([`dsl`]), projects them onto one behaviour per process ([`epp`]),
//! executes both sides to check that they agree ([`runtime`]) and emits
//! Jolie services for the projected processes ([`codegen`]).

#[cfg(any(test, feature = "arbitrary"))]
pub mod arbitrary;
pub mod cc;
pub mod dsl;
pub mod codegen;
pub mod combinators;
pub mod epp;
pub mod expr;
pub mod ident;
pub mod ir;
pub mod path;
pub mod runtime;
pub mod samples;
pub mod sp;

pub use cc::{process_set, validate_program, ChorProgram, Choreography, Defs, Eta, Memory};
pub use epp::{epp, merge, project_behaviour, MergeError, ProjectionError};
pub use expr::{eval_expr, BinOp, BoolExpr, EvalError, Expr, Store, Value};
pub use ident::{Ann, Label, ProcName, ProcessId, VarName};
pub use path::{ChorLoc, ChorScope, ProcLoc, ProcScope, TermPath};
pub use sp::{behaviour_equal, validate_proc_program, Behaviour, Branch, Network, ProcDefs, ProcProgram};
