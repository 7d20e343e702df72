//! Term paths: locations of nodes inside choreography and behaviour trees.
//!
//! A path is the sequence of child indices taken from the root. Sequential
//! continuations are child 0; conditional branches are 0 (then) and 1 (else);
//! offer branches are 0 (left) and 1 (right).

use std::fmt;

use crate::ident::{ProcName, ProcessId};

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermPath(Vec<u8>);

impl TermPath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn child(&self, index: u8) -> Self {
        let mut steps = self.0.clone();
        steps.push(index);
        Self(steps)
    }

    pub fn push(&mut self, index: u8) {
        self.0.push(index);
    }

    pub fn pop(&mut self) -> Option<u8> {
        self.0.pop()
    }

    pub fn steps(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u8>> for TermPath {
    fn from(steps: Vec<u8>) -> Self {
        Self(steps)
    }
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

/// Which tree of a choreographic program a path starts from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChorScope {
    Main,
    Def(ProcName),
}

/// A node of a choreographic program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChorLoc {
    pub scope: ChorScope,
    pub path: TermPath,
}

impl ChorLoc {
    pub fn main(path: impl Into<TermPath>) -> Self {
        Self {
            scope: ChorScope::Main,
            path: path.into(),
        }
    }

    pub fn def(name: ProcName, path: impl Into<TermPath>) -> Self {
        Self {
            scope: ChorScope::Def(name),
            path: path.into(),
        }
    }
}

impl fmt::Display for ChorLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scope {
            ChorScope::Main => write!(f, "main{}", self.path),
            ChorScope::Def(x) => write!(f, "def {x}{}", self.path),
        }
    }
}

/// Which tree of a process program a path starts from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcScope {
    /// The network entry of a process.
    Main(ProcessId),
    /// A projected procedure body.
    Def(ProcName, ProcessId),
}

impl ProcScope {
    pub fn pid(&self) -> &ProcessId {
        match self {
            ProcScope::Main(p) | ProcScope::Def(_, p) => p,
        }
    }
}

/// A node of a process program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcLoc {
    pub scope: ProcScope,
    pub path: TermPath,
}

impl ProcLoc {
    pub fn new(scope: ProcScope, path: impl Into<TermPath>) -> Self {
        Self {
            scope,
            path: path.into(),
        }
    }
}

impl fmt::Display for ProcLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scope {
            ProcScope::Main(p) => write!(f, "{p}{}", self.path),
            ProcScope::Def(x, p) => write!(f, "{x}@{p}{}", self.path),
        }
    }
}
