//! Trace-set equivalence between a choreography and its projection, and
//! deadlock search over networks.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use super::{
    enumerate_traces, ChorSemantics, Limits, NetConfig, NetSemantics, RuntimeError, Trace,
    TransitionLabel, TransitionSystem,
};
use crate::cc::{ChorProgram, Memory};
use crate::ident::ProcessId;
use crate::sp::ProcProgram;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivReport {
    pub equal: bool,
    pub choreography_traces: usize,
    pub network_traces: usize,
    /// Completed traces common to both sides.
    pub completed: usize,
    pub missing_in_network: Vec<Trace>,
    pub missing_in_choreography: Vec<Trace>,
}

impl fmt::Display for EquivReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equal {
            return writeln!(
                f,
                "traces equal: {} completed, {} total",
                self.completed, self.choreography_traces
            );
        }
        writeln!(
            f,
            "traces differ: {} in choreography, {} in network",
            self.choreography_traces, self.network_traces
        )?;
        for (title, traces) in [
            ("missing in network", &self.missing_in_network),
            ("missing in choreography", &self.missing_in_choreography),
        ] {
            for t in traces {
                writeln!(f, "{title}:")?;
                write!(f, "{t}")?;
            }
        }
        Ok(())
    }
}

/// Compares the traces of `chor` with those of its projection `proc`, both
/// run from `init` and cut at `limits.depth`.
pub fn trace_equiv(
    chor: &ChorProgram,
    proc: &ProcProgram,
    init: &Memory,
    limits: Limits,
) -> Result<EquivReport, RuntimeError> {
    let cs = ChorSemantics::new(&chor.defs, limits.unfold);
    let start = cs.initial(&chor.main, init.clone())?;
    let chor_traces = enumerate_traces(&cs, &start, limits.depth, limits.max_configs)?;

    let ns = NetSemantics::new(&proc.defs, limits.unfold);
    let start = ns.initial(&proc.network, init)?;
    let net_traces = enumerate_traces(&ns, &start, limits.depth, limits.max_configs)?;

    let missing_in_network: Vec<Trace> = chor_traces.difference(&net_traces).cloned().collect();
    let missing_in_choreography: Vec<Trace> =
        net_traces.difference(&chor_traces).cloned().collect();
    Ok(EquivReport {
        equal: missing_in_network.is_empty() && missing_in_choreography.is_empty(),
        choreography_traces: chor_traces.len(),
        network_traces: net_traces.len(),
        completed: chor_traces
            .intersection(&net_traces)
            .filter(|t| t.completed)
            .count(),
        missing_in_network,
        missing_in_choreography,
    })
}

/// A reachable configuration where nothing can move but some process has
/// not finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deadlock {
    /// Steps leading to the configuration.
    pub path: Vec<TransitionLabel>,
    /// Unfinished processes and the construct each is waiting at.
    pub waiting: Vec<(ProcessId, &'static str)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlockReport {
    pub deadlocks: Vec<Deadlock>,
    pub explored: usize,
}

impl DeadlockReport {
    pub fn is_deadlock_free(&self) -> bool {
        self.deadlocks.is_empty()
    }
}

impl fmt::Display for DeadlockReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.deadlocks.is_empty() {
            return writeln!(f, "deadlock-free: {} configurations explored", self.explored);
        }
        writeln!(f, "deadlocks found: {}", self.deadlocks.len())?;
        for d in &self.deadlocks {
            writeln!(f, "deadlock after {} steps:", d.path.len())?;
            for label in &d.path {
                writeln!(f, "{label}")?;
            }
            let waiting: Vec<String> = d.waiting.iter().map(|(p, what)| format!("{p} at {what}")).collect();
            writeln!(f, "-- stuck: {}", waiting.join(", "))?;
        }
        Ok(())
    }
}

/// Breadth-first search of the configurations reachable within
/// `limits.depth` steps, reporting every deadlocked one with a shortest path.
pub fn check_deadlock_freedom(
    proc: &ProcProgram,
    init: &Memory,
    limits: Limits,
) -> Result<DeadlockReport, RuntimeError> {
    let sem = NetSemantics::new(&proc.defs, limits.unfold);
    let start = sem.initial(&proc.network, init)?;

    // Each visited configuration remembers how it was first reached.
    let mut parent: HashMap<NetConfig, Option<(NetConfig, TransitionLabel)>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(start.clone(), None);
    queue.push_back((start, 0usize));
    let mut deadlocks = Vec::new();

    while let Some((cfg, depth)) = queue.pop_front() {
        let steps = sem.steps(&cfg)?;
        if steps.is_empty() {
            if !sem.is_terminal(&cfg) {
                deadlocks.push(Deadlock {
                    path: path_to(&parent, &cfg),
                    waiting: cfg
                        .procs
                        .iter()
                        .filter(|s| s.behaviour != crate::sp::Behaviour::End)
                        .map(|s| (s.pid.clone(), s.behaviour.head_name()))
                        .collect(),
                });
            }
            continue;
        }
        if depth >= limits.depth {
            continue;
        }
        for (label, next) in steps {
            if parent.contains_key(&next) {
                continue;
            }
            if parent.len() >= limits.max_configs {
                return Err(RuntimeError::StateSpaceLimit(limits.max_configs));
            }
            parent.insert(next.clone(), Some((cfg.clone(), label)));
            queue.push_back((next, depth + 1));
        }
    }
    Ok(DeadlockReport {
        deadlocks,
        explored: parent.len(),
    })
}

fn path_to(
    parent: &HashMap<NetConfig, Option<(NetConfig, TransitionLabel)>>,
    cfg: &NetConfig,
) -> Vec<TransitionLabel> {
    let mut path = Vec::new();
    let mut cur = cfg;
    while let Some(Some((prev, label))) = parent.get(cur) {
        path.push(label.clone());
        cur = prev;
    }
    path.reverse();
    path
}
