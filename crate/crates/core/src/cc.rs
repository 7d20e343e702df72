//! Core Choreographies: global programs describing the interactions of a
//! set of processes.

use std::collections::{BTreeMap, HashSet};

use indexmap::IndexSet;
use thiserror::Error;

use crate::expr::{BoolExpr, Expr, Store, Value};
use crate::ident::{Ann, Label, ProcName, ProcessId, VarName};
use crate::path::{ChorLoc, ChorScope, TermPath};

/// A single interaction between two processes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Eta {
    /// `sender` evaluates `expr` and stores the result in `receiver.target`.
    Com {
        sender: ProcessId,
        expr: Expr,
        receiver: ProcessId,
        target: VarName,
    },
    /// `chooser` informs `target` of a branch.
    Sel {
        chooser: ProcessId,
        target: ProcessId,
        label: Label,
    },
}

impl Eta {
    /// The two processes taking part in the interaction.
    pub fn pids(&self) -> [&ProcessId; 2] {
        match self {
            Eta::Com {
                sender, receiver, ..
            } => [sender, receiver],
            Eta::Sel {
                chooser, target, ..
            } => [chooser, target],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choreography {
    End,
    Interaction {
        eta: Eta,
        ann: Option<Ann>,
        cont: Box<Choreography>,
    },
    Cond {
        decider: ProcessId,
        guard: BoolExpr,
        then: Box<Choreography>,
        els: Box<Choreography>,
    },
    Call(ProcName),
}

impl Choreography {
    pub fn interaction(eta: Eta, ann: Option<Ann>, cont: Choreography) -> Self {
        Choreography::Interaction {
            eta,
            ann,
            cont: Box::new(cont),
        }
    }

    pub fn cond(decider: ProcessId, guard: BoolExpr, then: Choreography, els: Choreography) -> Self {
        Choreography::Cond {
            decider,
            guard,
            then: Box::new(then),
            els: Box::new(els),
        }
    }

    /// Children in path-index order.
    pub fn children(&self) -> Vec<&Choreography> {
        match self {
            Choreography::End | Choreography::Call(_) => vec![],
            Choreography::Interaction { cont, .. } => vec![cont],
            Choreography::Cond { then, els, .. } => vec![then, els],
        }
    }

    /// Follows `path` from this node.
    pub fn at(&self, path: &TermPath) -> Option<&Choreography> {
        let mut node = self;
        for &i in path.steps() {
            node = *node.children().get(i as usize)?;
        }
        Some(node)
    }

    /// Number of nodes in the tree, `End` leaves included.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Choreography::size).sum::<usize>()
    }

    /// Visits every node in pre-order together with its path.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&TermPath, &'a Choreography)) {
        fn go<'a>(
            c: &'a Choreography,
            path: &mut TermPath,
            f: &mut impl FnMut(&TermPath, &'a Choreography),
        ) {
            f(path, c);
            for (i, child) in c.children().into_iter().enumerate() {
                path.push(i as u8);
                go(child, path, f);
                path.pop();
            }
        }
        go(self, &mut TermPath::root(), f)
    }

    /// Process ids occurring syntactically in the term, in first-occurrence
    /// order (calls are not followed).
    pub fn syntactic_pids(&self) -> IndexSet<ProcessId> {
        let mut out = IndexSet::new();
        self.walk(&mut |_, node| match node {
            Choreography::Interaction { eta, .. } => {
                for p in eta.pids() {
                    out.insert(p.clone());
                }
            }
            Choreography::Cond { decider, .. } => {
                out.insert(decider.clone());
            }
            Choreography::End | Choreography::Call(_) => {}
        });
        out
    }
}

/// Procedure definitions in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Defs(Vec<(ProcName, Choreography)>);

impl Defs {
    pub fn new(defs: Vec<(ProcName, Choreography)>) -> Self {
        Self(defs)
    }

    /// Body of the first definition named `name`.
    pub fn get(&self, name: &ProcName) -> Option<&Choreography> {
        self.0.iter().find(|(x, _)| x == name).map(|(_, body)| body)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ProcName, Choreography)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, name: ProcName, body: Choreography) {
        self.0.push((name, body));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChorProgram {
    pub defs: Defs,
    pub main: Choreography,
}

impl ChorProgram {
    pub fn new(defs: Vec<(ProcName, Choreography)>, main: Choreography) -> Self {
        Self {
            defs: Defs::new(defs),
            main,
        }
    }

    /// The tree a location's scope refers to.
    pub fn scope(&self, scope: &ChorScope) -> Option<&Choreography> {
        match scope {
            ChorScope::Main => Some(&self.main),
            ChorScope::Def(x) => self.defs.get(x),
        }
    }

    pub fn node(&self, loc: &ChorLoc) -> Option<&Choreography> {
        self.scope(&loc.scope)?.at(&loc.path)
    }

    /// All trees of the program: definitions in order, then main.
    pub fn trees(&self) -> impl Iterator<Item = (ChorScope, &Choreography)> {
        self.defs
            .iter()
            .map(|(x, body)| (ChorScope::Def(x.clone()), body))
            .chain(std::iter::once((ChorScope::Main, &self.main)))
    }
}

/// Per-process stores.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Memory(BTreeMap<ProcessId, Store>);

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn store(&self, pid: &ProcessId) -> Option<&Store> {
        self.0.get(pid)
    }

    /// Store of `pid`, empty if nothing was ever written.
    pub fn store_or_empty(&self, pid: &ProcessId) -> Store {
        self.0.get(pid).cloned().unwrap_or_default()
    }

    pub fn get(&self, pid: &ProcessId, var: &VarName) -> Option<&Value> {
        self.0.get(pid)?.get(var)
    }

    pub fn set(&mut self, pid: ProcessId, var: VarName, value: Value) {
        self.0.entry(pid).or_default().insert(var, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProcessId, &Store)> {
        self.0.iter()
    }
}

impl FromIterator<(ProcessId, VarName, Value)> for Memory {
    fn from_iter<I: IntoIterator<Item = (ProcessId, VarName, Value)>>(iter: I) -> Self {
        let mut mem = Memory::new();
        for (p, x, v) in iter {
            mem.set(p, x, v);
        }
        mem
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormednessError {
    #[error("{loc}: process {pid} communicates with itself")]
    SelfCommunication { loc: ChorLoc, pid: ProcessId },
    #[error("{loc}: process {pid} selects on itself")]
    SelfSelection { loc: ChorLoc, pid: ProcessId },
    #[error("{loc}: call to undefined procedure {name}")]
    UnboundProcedure { loc: ChorLoc, name: ProcName },
    #[error("procedure {name} is defined more than once")]
    DuplicateDefinition { name: ProcName },
}

impl WellFormednessError {
    pub fn loc(&self) -> Option<&ChorLoc> {
        match self {
            WellFormednessError::SelfCommunication { loc, .. }
            | WellFormednessError::SelfSelection { loc, .. }
            | WellFormednessError::UnboundProcedure { loc, .. } => Some(loc),
            WellFormednessError::DuplicateDefinition { .. } => None,
        }
    }
}

/// Checks the structural invariants of a program. Errors come out in
/// definition order, then main, each tree in pre-order.
pub fn validate_program(p: &ChorProgram) -> Vec<WellFormednessError> {
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (name, _) in p.defs.iter() {
        if !seen.insert(name) {
            errors.push(WellFormednessError::DuplicateDefinition { name: name.clone() });
        }
    }
    for (scope, tree) in p.trees() {
        tree.walk(&mut |path, node| {
            let loc = || ChorLoc {
                scope: scope.clone(),
                path: path.clone(),
            };
            match node {
                Choreography::Interaction {
                    eta: Eta::Com {
                        sender, receiver, ..
                    },
                    ..
                } if sender == receiver => errors.push(WellFormednessError::SelfCommunication {
                    loc: loc(),
                    pid: sender.clone(),
                }),
                Choreography::Interaction {
                    eta: Eta::Sel {
                        chooser, target, ..
                    },
                    ..
                } if chooser == target => errors.push(WellFormednessError::SelfSelection {
                    loc: loc(),
                    pid: chooser.clone(),
                }),
                Choreography::Call(name) if p.defs.get(name).is_none() => {
                    errors.push(WellFormednessError::UnboundProcedure {
                        loc: loc(),
                        name: name.clone(),
                    })
                }
                _ => {}
            }
        });
    }
    errors
}

/// Processes taking part in `c`, following calls transitively.
///
/// The result is the least fixpoint of "syntactic pids of the term plus the
/// process sets of every procedure it calls", ordered by first occurrence in
/// a depth-first walk that enters each procedure body at its first call.
/// Calls to undefined procedures contribute nothing.
pub fn process_set(c: &Choreography, defs: &Defs) -> IndexSet<ProcessId> {
    let mut out = IndexSet::new();
    let mut entered = HashSet::new();
    collect_pids(c, defs, &mut entered, &mut out);
    out
}

fn collect_pids<'a>(
    c: &'a Choreography,
    defs: &'a Defs,
    entered: &mut HashSet<&'a ProcName>,
    out: &mut IndexSet<ProcessId>,
) {
    let mut node = c;
    loop {
        match node {
            Choreography::End => return,
            Choreography::Interaction { eta, cont, .. } => {
                for p in eta.pids() {
                    out.insert(p.clone());
                }
                node = cont;
            }
            Choreography::Cond {
                decider, then, els, ..
            } => {
                out.insert(decider.clone());
                collect_pids(then, defs, entered, out);
                node = els;
            }
            Choreography::Call(x) => {
                if entered.insert(x) {
                    if let Some(body) = defs.get(x) {
                        node = body;
                        continue;
                    }
                }
                return;
            }
        }
    }
}
