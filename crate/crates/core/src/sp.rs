//! Stateful Processes: the per-process calculus choreographies project to.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::expr::{BoolExpr, Expr};
use crate::ident::{Ann, Label, ProcName, ProcessId, VarName};
use crate::path::{ProcLoc, ProcScope, TermPath};

/// One branch offered to a chooser.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub ann: Option<Ann>,
    pub cont: Box<Behaviour>,
}

impl Branch {
    pub fn new(ann: Option<Ann>, cont: Behaviour) -> Self {
        Self {
            ann,
            cont: Box::new(cont),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Behaviour {
    End,
    Send {
        to: ProcessId,
        expr: Expr,
        ann: Option<Ann>,
        cont: Box<Behaviour>,
    },
    Recv {
        from: ProcessId,
        target: VarName,
        ann: Option<Ann>,
        cont: Box<Behaviour>,
    },
    Choose {
        to: ProcessId,
        label: Label,
        ann: Option<Ann>,
        cont: Box<Behaviour>,
    },
    Offer {
        from: ProcessId,
        left: Option<Branch>,
        right: Option<Branch>,
    },
    Cond {
        guard: BoolExpr,
        then: Box<Behaviour>,
        els: Box<Behaviour>,
    },
    Call(ProcName),
}

impl Behaviour {
    pub fn send(to: ProcessId, expr: Expr, ann: Option<Ann>, cont: Behaviour) -> Self {
        Behaviour::Send {
            to,
            expr,
            ann,
            cont: Box::new(cont),
        }
    }

    pub fn recv(from: ProcessId, target: VarName, ann: Option<Ann>, cont: Behaviour) -> Self {
        Behaviour::Recv {
            from,
            target,
            ann,
            cont: Box::new(cont),
        }
    }

    pub fn choose(to: ProcessId, label: Label, ann: Option<Ann>, cont: Behaviour) -> Self {
        Behaviour::Choose {
            to,
            label,
            ann,
            cont: Box::new(cont),
        }
    }

    /// An offer with only the branch for `label` present.
    pub fn offer_one(from: ProcessId, label: Label, ann: Option<Ann>, cont: Behaviour) -> Self {
        let branch = Some(Branch::new(ann, cont));
        match label {
            Label::Left => Behaviour::Offer {
                from,
                left: branch,
                right: None,
            },
            Label::Right => Behaviour::Offer {
                from,
                left: None,
                right: branch,
            },
        }
    }

    pub fn cond(guard: BoolExpr, then: Behaviour, els: Behaviour) -> Self {
        Behaviour::Cond {
            guard,
            then: Box::new(then),
            els: Box::new(els),
        }
    }

    /// Short name of the head constructor.
    pub fn head_name(&self) -> &'static str {
        match self {
            Behaviour::End => "end",
            Behaviour::Send { .. } => "send",
            Behaviour::Recv { .. } => "recv",
            Behaviour::Choose { .. } => "choose",
            Behaviour::Offer { .. } => "offer",
            Behaviour::Cond { .. } => "cond",
            Behaviour::Call(_) => "call",
        }
    }

    /// Children paired with their path index. Absent offer branches are
    /// skipped, so the right branch of an offer is always index 1.
    pub fn children(&self) -> Vec<(u8, &Behaviour)> {
        match self {
            Behaviour::End | Behaviour::Call(_) => vec![],
            Behaviour::Send { cont, .. }
            | Behaviour::Recv { cont, .. }
            | Behaviour::Choose { cont, .. } => vec![(0, cont)],
            Behaviour::Offer { left, right, .. } => {
                let mut out = Vec::new();
                if let Some(b) = left {
                    out.push((0, &*b.cont));
                }
                if let Some(b) = right {
                    out.push((1, &*b.cont));
                }
                out
            }
            Behaviour::Cond { then, els, .. } => vec![(0, then), (1, els)],
        }
    }

    pub fn at(&self, path: &TermPath) -> Option<&Behaviour> {
        let mut node = self;
        for &i in path.steps() {
            node = node
                .children()
                .into_iter()
                .find(|(j, _)| *j == i)
                .map(|(_, b)| b)?;
        }
        Some(node)
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&TermPath, &'a Behaviour)) {
        fn go<'a>(b: &'a Behaviour, path: &mut TermPath, f: &mut impl FnMut(&TermPath, &'a Behaviour)) {
            f(path, b);
            for (i, child) in b.children() {
                path.push(i);
                go(child, path, f);
                path.pop();
            }
        }
        go(self, &mut TermPath::root(), f)
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(|(_, b)| b.size()).sum::<usize>()
    }

    /// The peer of a communication node.
    pub fn peer(&self) -> Option<&ProcessId> {
        match self {
            Behaviour::Send { to, .. } | Behaviour::Choose { to, .. } => Some(to),
            Behaviour::Recv { from, .. } | Behaviour::Offer { from, .. } => Some(from),
            _ => None,
        }
    }
}

/// Structural equality of behaviours, annotations included.
pub fn behaviour_equal(a: &Behaviour, b: &Behaviour) -> bool {
    a == b
}

/// Projected procedure bodies, one per (procedure, process).
pub type ProcDefs = BTreeMap<(ProcName, ProcessId), Behaviour>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Network(Vec<(ProcessId, Behaviour)>);

impl Network {
    pub fn new(entries: Vec<(ProcessId, Behaviour)>) -> Self {
        Self(entries)
    }

    pub fn get(&self, pid: &ProcessId) -> Option<&Behaviour> {
        self.0.iter().find(|(p, _)| p == pid).map(|(_, b)| b)
    }

    pub fn get_mut(&mut self, pid: &ProcessId) -> Option<&mut Behaviour> {
        self.0.iter_mut().find(|(p, _)| p == pid).map(|(_, b)| b)
    }

    pub fn index_of(&self, pid: &ProcessId) -> Option<usize> {
        self.0.iter().position(|(p, _)| p == pid)
    }

    pub fn pids(&self) -> impl Iterator<Item = &ProcessId> {
        self.0.iter().map(|(p, _)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ProcessId, Behaviour)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ProcProgram {
    pub defs: ProcDefs,
    pub network: Network,
}

impl ProcProgram {
    /// Every behaviour tree of the program: network entries in order, then
    /// definitions in key order.
    pub fn trees(&self) -> impl Iterator<Item = (ProcScope, &Behaviour)> {
        self.network
            .iter()
            .map(|(p, b)| (ProcScope::Main(p.clone()), b))
            .chain(
                self.defs
                    .iter()
                    .map(|((x, p), b)| (ProcScope::Def(x.clone(), p.clone()), b)),
            )
    }

    pub fn tree(&self, scope: &ProcScope) -> Option<&Behaviour> {
        match scope {
            ProcScope::Main(p) => self.network.get(p),
            ProcScope::Def(x, p) => self.defs.get(&(x.clone(), p.clone())),
        }
    }

    pub fn node(&self, loc: &ProcLoc) -> Option<&Behaviour> {
        self.tree(&loc.scope)?.at(&loc.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcWellFormednessError {
    #[error("process {0} appears twice in the network")]
    DuplicateProcess(ProcessId),
    #[error("{loc}: unknown peer {peer}")]
    UnknownPeer { loc: ProcLoc, peer: ProcessId },
    #[error("{loc}: process interacts with itself")]
    SelfInteraction { loc: ProcLoc },
    #[error("{loc}: offer without branches")]
    ZeroBranchOffer { loc: ProcLoc },
    #[error("{loc}: call to {name} has no definition for this process")]
    UnboundProcedure { loc: ProcLoc, name: ProcName },
}

/// Checks the invariants of a process program.
///
/// Peers must be processes of the program: either network members or owners
/// of a projected procedure body (a procedure never called from main still
/// names its participants).
pub fn validate_proc_program(p: &ProcProgram) -> Vec<ProcWellFormednessError> {
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for pid in p.network.pids() {
        if !seen.insert(pid) {
            errors.push(ProcWellFormednessError::DuplicateProcess(pid.clone()));
        }
    }
    let known: HashSet<&ProcessId> = p
        .network
        .pids()
        .chain(p.defs.keys().map(|(_, pid)| pid))
        .collect();
    for (scope, tree) in p.trees() {
        let owner = scope.pid().clone();
        tree.walk(&mut |path, node| {
            let loc = || ProcLoc::new(scope.clone(), path.clone());
            if let Some(peer) = node.peer() {
                if *peer == owner {
                    errors.push(ProcWellFormednessError::SelfInteraction { loc: loc() });
                } else if !known.contains(peer) {
                    errors.push(ProcWellFormednessError::UnknownPeer {
                        loc: loc(),
                        peer: peer.clone(),
                    });
                }
            }
            match node {
                Behaviour::Offer {
                    left: None,
                    right: None,
                    ..
                } => errors.push(ProcWellFormednessError::ZeroBranchOffer { loc: loc() }),
                Behaviour::Call(x) if !p.defs.contains_key(&(x.clone(), owner.clone())) => {
                    errors.push(ProcWellFormednessError::UnboundProcedure {
                        loc: loc(),
                        name: x.clone(),
                    })
                }
                _ => {}
            }
        });
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::{pid, proc_name, var};
    use crate::samples::auth_client_behaviour;

    fn net(entries: Vec<(&str, Behaviour)>) -> ProcProgram {
        ProcProgram {
            defs: ProcDefs::new(),
            network: Network::new(entries.into_iter().map(|(p, b)| (pid(p), b)).collect()),
        }
    }

    #[test]
    fn single_end_process_is_valid() {
        assert_eq!(validate_proc_program(&net(vec![("p", Behaviour::End)])), vec![]);
    }

    #[test]
    fn unknown_peer() {
        let p = net(vec![(
            "p",
            Behaviour::send(pid("q"), var("x"), None, Behaviour::End),
        )]);
        assert_eq!(
            validate_proc_program(&p),
            vec![ProcWellFormednessError::UnknownPeer {
                loc: ProcLoc::new(ProcScope::Main(pid("p")), vec![]),
                peer: pid("q"),
            }]
        );
    }

    #[test]
    fn zero_branch_offer_rejected() {
        let p = net(vec![
            (
                "p",
                Behaviour::Offer {
                    from: pid("q"),
                    left: None,
                    right: None,
                },
            ),
            ("q", Behaviour::End),
        ]);
        assert!(matches!(
            validate_proc_program(&p)[..],
            [ProcWellFormednessError::ZeroBranchOffer { .. }]
        ));
    }

    #[test]
    fn call_needs_definition_for_owner() {
        let mut p = net(vec![("p", Behaviour::Call(proc_name("X"))), ("q", Behaviour::End)]);
        assert!(matches!(
            validate_proc_program(&p)[..],
            [ProcWellFormednessError::UnboundProcedure { .. }]
        ));
        p.defs.insert((proc_name("X"), pid("p")), Behaviour::End);
        assert_eq!(validate_proc_program(&p), vec![]);
    }

    #[test]
    fn duplicate_process() {
        let p = net(vec![("p", Behaviour::End), ("p", Behaviour::End)]);
        assert_eq!(
            validate_proc_program(&p),
            vec![ProcWellFormednessError::DuplicateProcess(pid("p"))]
        );
    }

    #[test]
    fn equality_includes_structure_and_annotations() {
        assert!(behaviour_equal(&Behaviour::End, &Behaviour::End));
        let client = auth_client_behaviour();
        assert!(behaviour_equal(&client, &client.clone()));

        let l = Behaviour::offer_one(pid("p"), Label::Left, None, Behaviour::End);
        let r = Behaviour::offer_one(pid("p"), Label::Right, None, Behaviour::End);
        assert!(!behaviour_equal(&l, &r));

        let a = Behaviour::send(pid("p"), var("x"), Some(Ann::new("a").unwrap()), Behaviour::End);
        let b = Behaviour::send(pid("p"), var("x"), Some(Ann::new("b").unwrap()), Behaviour::End);
        assert!(!behaviour_equal(&a, &b));
    }

    #[test]
    fn offer_paths_skip_absent_branches() {
        let b = Behaviour::Offer {
            from: pid("p"),
            left: None,
            right: Some(Branch::new(None, Behaviour::Call(proc_name("X")))),
        };
        assert_eq!(
            b.at(&TermPath::from(vec![1])),
            Some(&Behaviour::Call(proc_name("X")))
        );
        assert_eq!(b.at(&TermPath::from(vec![0])), None);
    }
}
