//! Executable semantics for choreographies and networks.
//!
//! Both calculi are given as labelled transition systems over the same
//! label type, so that the traces of a choreography can be compared with
//! those of its projection. Exploration is exhaustive up to a depth bound.

mod check;
mod chor;
mod net;

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::expr::{EvalError, Value};
use crate::ident::{Label, ProcName, ProcessId, VarName};

pub use check::{check_deadlock_freedom, trace_equiv, Deadlock, DeadlockReport, EquivReport};
pub use chor::{chor_steps, ChorConfig, ChorSemantics};
pub use net::{net_steps, NetConfig, NetSemantics, ProcState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CondBranch {
    Then,
    Else,
}

impl CondBranch {
    pub fn from_bool(b: bool) -> Self {
        if b {
            CondBranch::Then
        } else {
            CondBranch::Else
        }
    }
}

/// Observable effect of one reduction step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    Com {
        sender: ProcessId,
        value: Value,
        receiver: ProcessId,
        target: VarName,
    },
    Sel {
        chooser: ProcessId,
        label: Label,
        target: ProcessId,
    },
    Cond {
        decider: ProcessId,
        branch: CondBranch,
    },
}

impl TransitionLabel {
    pub fn pids(&self) -> Vec<&ProcessId> {
        match self {
            TransitionLabel::Com {
                sender, receiver, ..
            } => vec![sender, receiver],
            TransitionLabel::Sel {
                chooser, target, ..
            } => vec![chooser, target],
            TransitionLabel::Cond { decider, .. } => vec![decider],
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Com {
                sender,
                value,
                receiver,
                target,
            } => write!(f, "{sender} -[{value}]-> {receiver}.{target}"),
            TransitionLabel::Sel {
                chooser,
                label,
                target,
            } => write!(f, "{chooser} -[{label}]-> {target}"),
            TransitionLabel::Cond { decider, branch } => match branch {
                CondBranch::Then => write!(f, "{decider} ?then"),
                CondBranch::Else => write!(f, "{decider} ?else"),
            },
        }
    }
}

/// A maximal run of the explored system, cut at the depth bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    pub labels: Vec<TransitionLabel>,
    /// The run ended in a fully terminated configuration.
    pub completed: bool,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for label in &self.labels {
            writeln!(f, "{label}")?;
        }
        if self.completed {
            writeln!(f, "-- completed")
        } else {
            writeln!(f, "-- incomplete")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("evaluation failed at {pid}: {error}")]
    Eval { pid: ProcessId, error: EvalError },
    #[error("procedure unfolding exceeded the bound of {0} without reaching an action")]
    UnfoldLimitExceeded(usize),
    #[error("{chooser} selected {label} but {target} offers no such branch")]
    StuckSelection {
        chooser: ProcessId,
        target: ProcessId,
        label: Label,
    },
    #[error("state space exceeds {0} configurations")]
    StateSpaceLimit(usize),
    #[error("no definition of procedure {name}{}", .pid.as_ref().map(|p| format!(" for {p}")).unwrap_or_default())]
    UndefinedProcedure {
        name: ProcName,
        pid: Option<ProcessId>,
    },
}

impl RuntimeError {
    /// True for errors caused by an exploration bound rather than by the
    /// program itself.
    pub fn is_limit(&self) -> bool {
        matches!(
            self,
            RuntimeError::UnfoldLimitExceeded(_) | RuntimeError::StateSpaceLimit(_)
        )
    }
}

/// Exploration bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum trace length.
    pub depth: usize,
    /// Maximum number of configurations visited by one exploration.
    pub max_configs: usize,
    /// Maximum number of silent procedure unfoldings per step computation.
    pub unfold: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            depth: 32,
            max_configs: 100_000,
            unfold: 64,
        }
    }
}

impl Limits {
    pub fn with_depth(self, depth: usize) -> Self {
        Self { depth, ..self }
    }
}

pub type Step<S> = (TransitionLabel, S);

/// A labelled transition system.
pub trait TransitionSystem {
    type State: Clone + Eq + std::hash::Hash;

    /// Every step enabled in `state`.
    fn steps(&self, state: &Self::State) -> Result<Vec<Step<Self::State>>, RuntimeError>;

    /// True if `state` has fully terminated.
    fn is_terminal(&self, state: &Self::State) -> bool;
}

/// All maximal traces from `start`, cut at `depth` steps.
///
/// A trace is completed iff its last configuration is terminal. Runs that
/// get stuck elsewhere, or hit the depth bound, are reported incomplete.
pub fn enumerate_traces<T: TransitionSystem>(
    sys: &T,
    start: &T::State,
    depth: usize,
    max_configs: usize,
) -> Result<BTreeSet<Trace>, RuntimeError> {
    let mut out = BTreeSet::new();
    let mut labels = Vec::new();
    let mut visited = 0usize;
    explore(sys, start, depth, max_configs, &mut visited, &mut labels, &mut out)?;
    Ok(out)
}

fn explore<T: TransitionSystem>(
    sys: &T,
    state: &T::State,
    depth: usize,
    max_configs: usize,
    visited: &mut usize,
    labels: &mut Vec<TransitionLabel>,
    out: &mut BTreeSet<Trace>,
) -> Result<(), RuntimeError> {
    *visited += 1;
    if *visited > max_configs {
        return Err(RuntimeError::StateSpaceLimit(max_configs));
    }
    let steps = sys.steps(state)?;
    if steps.is_empty() || labels.len() >= depth {
        out.insert(Trace {
            labels: labels.clone(),
            completed: steps.is_empty() && sys.is_terminal(state),
        });
        return Ok(());
    }
    for (label, next) in steps {
        labels.push(label);
        explore(sys, &next, depth, max_configs, visited, labels, out)?;
        labels.pop();
    }
    Ok(())
}

/// One run from `start`, choosing uniformly among enabled steps.
pub fn random_trace<T: TransitionSystem, R: Rng>(
    sys: &T,
    start: &T::State,
    depth: usize,
    rng: &mut R,
) -> Result<Trace, RuntimeError> {
    let mut state = start.clone();
    let mut labels = Vec::new();
    loop {
        let steps = sys.steps(&state)?;
        if steps.is_empty() || labels.len() >= depth {
            let completed = steps.is_empty() && sys.is_terminal(&state);
            return Ok(Trace { labels, completed });
        }
        let (label, next) = steps.choose(rng).expect("nonempty").clone();
        labels.push(label);
        state = next;
    }
}
