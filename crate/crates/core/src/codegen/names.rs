//! Operation names for message points.
//!
//! Every receive point (a receive, or one branch of an offer) is named by
//! its annotation, or `{prefix}_{sender}_{receiver}_{n}` with a counter per
//! (sender, receiver) pair. Send and choose points take the name of the
//! receive point they synchronise with. Which one that is gets established
//! by exploring the network abstractly (conditionals take both branches),
//! not by trusting the shape of the IR.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use super::{CodegenConfig, CodegenError};
use crate::ident::{is_ident, Ann, Label, ProcName, ProcessId};
use crate::path::{ProcLoc, ProcScope, TermPath};
use crate::sp::{Behaviour, ProcProgram};

/// Bound on the abstract states visited while pairing.
const MAX_PAIRING_STATES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperationName(String);

impl OperationName {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OperationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A node that sends or receives a message. Offer branches are told apart by
/// their label; every other point has `branch: None`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessagePoint {
    pub loc: ProcLoc,
    pub branch: Option<Label>,
}

impl MessagePoint {
    pub fn node(loc: ProcLoc) -> Self {
        Self { loc, branch: None }
    }

    pub fn offer_branch(loc: ProcLoc, label: Label) -> Self {
        Self {
            loc,
            branch: Some(label),
        }
    }
}

impl fmt::Display for MessagePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.branch {
            Some(l) => write!(f, "{}[{l}]", self.loc),
            None => write!(f, "{}", self.loc),
        }
    }
}

pub type OperationNames = BTreeMap<MessagePoint, OperationName>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Payload {
    Value,
    Empty,
}

fn annotated(ann: &Option<Ann>, loc: &ProcLoc) -> Result<Option<OperationName>, CodegenError> {
    match ann {
        None => Ok(None),
        Some(a) if is_ident(a.as_str()) => Ok(Some(OperationName(a.as_str().to_string()))),
        Some(a) => Err(CodegenError::InvalidOperationName {
            loc: loc.clone(),
            name: a.as_str().to_string(),
        }),
    }
}

/// Assigns an operation name to every message point of `p`.
pub fn assign_operation_names(
    p: &ProcProgram,
    cfg: &CodegenConfig,
) -> Result<OperationNames, CodegenError> {
    let mut names = OperationNames::new();
    let mut counters: HashMap<(ProcessId, ProcessId), usize> = HashMap::new();
    // receiver -> name -> (payload kind, first point)
    let mut kinds: HashMap<ProcessId, HashMap<OperationName, Payload>> = HashMap::new();

    let mut fresh = |sender: &ProcessId, receiver: &ProcessId| {
        let n = counters.entry((sender.clone(), receiver.clone())).or_insert(0);
        *n += 1;
        OperationName(format!("{}_{sender}_{receiver}_{n}", cfg.default_op_prefix))
    };

    for (scope, tree) in p.trees() {
        let receiver = scope.pid().clone();
        let mut result = Ok(());
        tree.walk(&mut |path, node| {
            if result.is_err() {
                return;
            }
            let loc = ProcLoc::new(scope.clone(), path.clone());
            let mut record = |point: MessagePoint, name: OperationName, kind: Payload| {
                let known = kinds.entry(receiver.clone()).or_default();
                match known.get(&name) {
                    Some(k) if *k != kind => {
                        return Err(CodegenError::DuplicateOperation {
                            receiver: receiver.clone(),
                            name: name.clone(),
                        })
                    }
                    _ => {
                        known.insert(name.clone(), kind);
                    }
                }
                names.insert(point, name);
                Ok(())
            };
            result = (|| match node {
                Behaviour::Recv { from, ann, .. } => {
                    let name = match annotated(ann, &loc)? {
                        Some(n) => n,
                        None => fresh(from, &receiver),
                    };
                    record(MessagePoint::node(loc.clone()), name, Payload::Value)
                }
                Behaviour::Offer { from, left, right } => {
                    let mut here = Vec::new();
                    for (label, branch) in [(Label::Left, left), (Label::Right, right)] {
                        let Some(branch) = branch else { continue };
                        let name = match annotated(&branch.ann, &loc)? {
                            Some(n) => n,
                            None => fresh(from, &receiver),
                        };
                        if here.contains(&name) {
                            return Err(CodegenError::DuplicateOperation {
                                receiver: receiver.clone(),
                                name,
                            });
                        }
                        here.push(name.clone());
                        record(MessagePoint::offer_branch(loc.clone(), label), name, Payload::Empty)?;
                    }
                    Ok(())
                }
                _ => Ok(()),
            })();
        });
        result?;
    }

    let pairs = pair_message_points(p)?;
    for (scope, tree) in p.trees() {
        let mut result = Ok(());
        tree.walk(&mut |path, node| {
            if result.is_err() {
                return;
            }
            let ann = match node {
                Behaviour::Send { ann, .. } | Behaviour::Choose { ann, .. } => ann,
                _ => return,
            };
            let loc = ProcLoc::new(scope.clone(), path.clone());
            let mismatch = || CodegenError::PairingMismatch {
                pid: scope.pid().clone(),
                loc: loc.clone(),
            };
            result = (|| {
                let point = MessagePoint::node(loc.clone());
                let partners = pairs.get(&point).ok_or_else(mismatch)?;
                let found: BTreeSet<&OperationName> = partners
                    .iter()
                    .map(|r| names.get(r).expect("receive points are named"))
                    .collect();
                let [name] = found.into_iter().collect::<Vec<_>>()[..] else {
                    return Err(mismatch());
                };
                if let Some(own) = annotated(ann, &loc)? {
                    if own != *name {
                        return Err(mismatch());
                    }
                }
                let name = name.clone();
                names.insert(point, name);
                Ok(())
            })();
        });
        result?;
    }
    Ok(names)
}

/// Abstract position of one process: `None` once it has finished.
type Pos = Option<ProcLoc>;

struct Pairing<'a> {
    program: &'a ProcProgram,
    pids: Vec<ProcessId>,
}

impl Pairing<'_> {
    fn node(&self, loc: &ProcLoc) -> &Behaviour {
        self.program.node(loc).expect("positions stay inside the program")
    }

    /// Resolves calls and finished processes.
    fn settle(&self, loc: ProcLoc) -> Result<Pos, CodegenError> {
        let mut loc = loc;
        let mut seen: HashSet<ProcName> = HashSet::new();
        loop {
            match self.node(&loc) {
                Behaviour::End => return Ok(None),
                Behaviour::Call(x) => {
                    let pid = loc.scope.pid().clone();
                    if !seen.insert(x.clone()) {
                        // Silent divergence: the process never acts again.
                        return Ok(None);
                    }
                    let scope = ProcScope::Def(x.clone(), pid.clone());
                    if self.program.tree(&scope).is_none() {
                        return Err(CodegenError::PairingMismatch { pid, loc });
                    }
                    loc = ProcLoc::new(scope, TermPath::root());
                }
                _ => return Ok(Some(loc)),
            }
        }
    }

    fn start(&self, scope_of: impl Fn(&ProcessId) -> Option<ProcScope>) -> Result<Vec<Pos>, CodegenError> {
        self.pids
            .iter()
            .map(|p| match scope_of(p) {
                Some(scope) if self.program.tree(&scope).is_some() => {
                    self.settle(ProcLoc::new(scope, TermPath::root()))
                }
                _ => Ok(None),
            })
            .collect()
    }
}

fn child(loc: &ProcLoc, index: u8) -> ProcLoc {
    ProcLoc::new(loc.scope.clone(), loc.path.child(index))
}

/// For every send or choose point, the receive points it synchronises with
/// on some abstract run.
fn pair_message_points(
    p: &ProcProgram,
) -> Result<HashMap<MessagePoint, BTreeSet<MessagePoint>>, CodegenError> {
    let mut pids: Vec<ProcessId> = p.network.pids().cloned().collect();
    for (_, pid) in p.defs.keys() {
        if !pids.contains(pid) {
            pids.push(pid.clone());
        }
    }
    let pairing = Pairing { program: p, pids };

    let mut starts = vec![pairing.start(|pid| Some(ProcScope::Main(pid.clone())))?];
    let procs: BTreeSet<&ProcName> = p.defs.keys().map(|(x, _)| x).collect();
    for x in procs {
        starts.push(pairing.start(|pid| Some(ProcScope::Def(x.clone(), pid.clone())))?);
    }

    let mut pairs: HashMap<MessagePoint, BTreeSet<MessagePoint>> = HashMap::new();
    let mut visited: HashSet<Vec<Pos>> = HashSet::new();
    let mut queue: VecDeque<Vec<Pos>> = VecDeque::new();
    for s in starts {
        if visited.insert(s.clone()) {
            queue.push_back(s);
        }
    }

    let index_of = |pid: &ProcessId| pairing.pids.iter().position(|q| q == pid);

    while let Some(state) = queue.pop_front() {
        let mut successors: Vec<Vec<Pos>> = Vec::new();
        for (i, pos) in state.iter().enumerate() {
            let Some(loc) = pos else { continue };
            let me = &pairing.pids[i];
            let mut moved = |moves: &[(usize, ProcLoc)]| -> Result<(), CodegenError> {
                let mut next = state.clone();
                for (k, l) in moves {
                    next[*k] = pairing.settle(l.clone())?;
                }
                successors.push(next);
                Ok(())
            };
            match pairing.node(loc) {
                Behaviour::Cond { .. } => {
                    moved(&[(i, child(loc, 0))])?;
                    moved(&[(i, child(loc, 1))])?;
                }
                Behaviour::Send { to, .. } | Behaviour::Choose { to, .. } => {
                    let Some(j) = index_of(to) else { continue };
                    let Some(peer) = &state[j] else { continue };
                    match (pairing.node(loc), pairing.node(peer)) {
                        (Behaviour::Send { .. }, Behaviour::Recv { from, .. }) if from == me => {
                            pairs
                                .entry(MessagePoint::node(loc.clone()))
                                .or_default()
                                .insert(MessagePoint::node(peer.clone()));
                            moved(&[(i, child(loc, 0)), (j, child(peer, 0))])?;
                        }
                        (Behaviour::Choose { label, .. }, Behaviour::Offer { from, left, right })
                            if from == me =>
                        {
                            let (present, index) = match label {
                                Label::Left => (left.is_some(), 0),
                                Label::Right => (right.is_some(), 1),
                            };
                            if !present {
                                return Err(CodegenError::PairingMismatch {
                                    pid: me.clone(),
                                    loc: loc.clone(),
                                });
                            }
                            pairs
                                .entry(MessagePoint::node(loc.clone()))
                                .or_default()
                                .insert(MessagePoint::offer_branch(peer.clone(), *label));
                            moved(&[(i, child(loc, 0)), (j, child(peer, index))])?;
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
        }
        if successors.is_empty() {
            if let Some((i, Some(loc))) = state.iter().enumerate().find(|(_, s)| s.is_some()) {
                return Err(CodegenError::PairingMismatch {
                    pid: pairing.pids[i].clone(),
                    loc: loc.clone(),
                });
            }
        }
        for next in successors {
            if visited.len() >= MAX_PAIRING_STATES {
                return Err(CodegenError::PairingSearchLimit(MAX_PAIRING_STATES));
            }
            if visited.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(pairs)
}
