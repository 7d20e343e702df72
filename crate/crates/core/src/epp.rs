//! Endpoint projection: from a choreographic program to one behaviour per
//! process, plus projected procedure bodies.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::cc::{process_set, ChorProgram, Choreography, Defs, Eta};
use crate::ident::{Ann, ProcName, ProcessId};
use crate::path::{ChorLoc, ChorScope, TermPath};
use crate::sp::{Behaviour, Branch, Network, ProcDefs, ProcProgram};

/// Why two behaviours could not be merged. `at` is the position inside the
/// behaviours where they diverge.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("cannot merge {left} with {right} at {at}")]
    MergeConflict {
        left: &'static str,
        right: &'static str,
        at: TermPath,
    },
    #[error("offer branch annotated both {} and {} at {at}", show_ann(.left), show_ann(.right))]
    AnnotationConflict {
        left: Option<Ann>,
        right: Option<Ann>,
        at: TermPath,
    },
}

fn show_ann(a: &Option<Ann>) -> String {
    match a {
        Some(a) => format!("\"{a}\""),
        None => "nothing".into(),
    }
}

/// A choreography that has no projection for `pid`. `loc` points at the
/// conditional whose branches could not be merged.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: cannot project onto {pid}: {cause}")]
pub struct ProjectionError {
    pub cause: MergeError,
    pub loc: ChorLoc,
    pub pid: ProcessId,
}

impl ProjectionError {
    pub fn is_annotation_conflict(&self) -> bool {
        matches!(self.cause, MergeError::AnnotationConflict { .. })
    }
}

/// Merges the behaviours a non-deciding process has in the two branches of
/// a conditional. All structure must coincide except offers, whose branch
/// sets are unioned.
pub fn merge(a: &Behaviour, b: &Behaviour) -> Result<Behaviour, MergeError> {
    merge_at(a, b, &mut TermPath::root())
}

fn merge_at(a: &Behaviour, b: &Behaviour, at: &mut TermPath) -> Result<Behaviour, MergeError> {
    use Behaviour::*;

    let conflict = |at: &TermPath| MergeError::MergeConflict {
        left: a.head_name(),
        right: b.head_name(),
        at: at.clone(),
    };
    let under = |index: u8, x: &Behaviour, y: &Behaviour, at: &mut TermPath| {
        at.push(index);
        let merged = merge_at(x, y, at);
        at.pop();
        merged
    };

    match (a, b) {
        (End, End) => Ok(End),
        (
            Send {
                to: q1,
                expr: e1,
                ann: a1,
                cont: b1,
            },
            Send {
                to: q2,
                expr: e2,
                ann: a2,
                cont: b2,
            },
        ) if q1 == q2 && e1 == e2 && a1 == a2 => Ok(Behaviour::send(
            q1.clone(),
            e1.clone(),
            a1.clone(),
            under(0, b1, b2, at)?,
        )),
        (
            Recv {
                from: q1,
                target: x1,
                ann: a1,
                cont: b1,
            },
            Recv {
                from: q2,
                target: x2,
                ann: a2,
                cont: b2,
            },
        ) if q1 == q2 && x1 == x2 && a1 == a2 => Ok(Behaviour::recv(
            q1.clone(),
            x1.clone(),
            a1.clone(),
            under(0, b1, b2, at)?,
        )),
        (
            Choose {
                to: q1,
                label: l1,
                ann: a1,
                cont: b1,
            },
            Choose {
                to: q2,
                label: l2,
                ann: a2,
                cont: b2,
            },
        ) if q1 == q2 && l1 == l2 && a1 == a2 => Ok(Behaviour::choose(
            q1.clone(),
            *l1,
            a1.clone(),
            under(0, b1, b2, at)?,
        )),
        (
            Cond {
                guard: g1,
                then: t1,
                els: e1,
            },
            Cond {
                guard: g2,
                then: t2,
                els: e2,
            },
        ) if g1 == g2 => {
            let then = under(0, t1, t2, at)?;
            let els = under(1, e1, e2, at)?;
            Ok(Behaviour::cond(g1.clone(), then, els))
        }
        (Call(x), Call(y)) if x == y => Ok(Call(x.clone())),
        (
            Offer {
                from: p1,
                left: l1,
                right: r1,
            },
            Offer {
                from: p2,
                left: l2,
                right: r2,
            },
        ) if p1 == p2 => {
            let left = merge_branch(l1, l2, 0, at)?;
            let right = merge_branch(r1, r2, 1, at)?;
            Ok(Offer {
                from: p1.clone(),
                left,
                right,
            })
        }
        _ => Err(conflict(at)),
    }
}

fn merge_branch(
    a: &Option<Branch>,
    b: &Option<Branch>,
    index: u8,
    at: &mut TermPath,
) -> Result<Option<Branch>, MergeError> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x.clone()),
        (Some(x), Some(y)) => {
            if x.ann != y.ann {
                return Err(MergeError::AnnotationConflict {
                    left: x.ann.clone(),
                    right: y.ann.clone(),
                    at: at.child(index),
                });
            }
            at.push(index);
            let cont = merge_at(&x.cont, &y.cont, at);
            at.pop();
            Ok(Some(Branch::new(x.ann.clone(), cont?)))
        }
    }
}

/// Projection context: the program's definitions with their process sets
/// computed once.
pub struct Projector<'a> {
    defs: &'a Defs,
    participants: HashMap<&'a ProcName, IndexSet<ProcessId>>,
}

impl fmt::Debug for Projector<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Projector")
            .field("procedures", &self.participants.len())
            .finish()
    }
}

impl<'a> Projector<'a> {
    pub fn new(defs: &'a Defs) -> Self {
        let participants = defs
            .iter()
            .map(|(x, body)| (x, process_set(body, defs)))
            .collect();
        Self { defs, participants }
    }

    /// Processes participating in procedure `x`.
    pub fn participants(&self, x: &ProcName) -> Option<&IndexSet<ProcessId>> {
        self.participants.get(x)
    }

    /// Projects the tree `c`, located at `scope`, onto `r`.
    pub fn project(
        &self,
        c: &Choreography,
        scope: &ChorScope,
        r: &ProcessId,
    ) -> Result<Behaviour, ProjectionError> {
        let mut path = TermPath::root();
        self.project_at(c, r, scope, &mut path)
    }

    fn project_at(
        &self,
        c: &Choreography,
        r: &ProcessId,
        scope: &ChorScope,
        path: &mut TermPath,
    ) -> Result<Behaviour, ProjectionError> {
        let sub = |child: &Choreography, index: u8, path: &mut TermPath| {
            path.push(index);
            let b = self.project_at(child, r, scope, path);
            path.pop();
            b
        };
        match c {
            Choreography::End => Ok(Behaviour::End),
            Choreography::Interaction { eta, ann, cont } => {
                let rest = sub(cont, 0, path)?;
                Ok(match eta {
                    Eta::Com {
                        sender,
                        expr,
                        receiver,
                        target,
                    } => {
                        if r == sender {
                            Behaviour::send(receiver.clone(), expr.clone(), ann.clone(), rest)
                        } else if r == receiver {
                            Behaviour::recv(sender.clone(), target.clone(), ann.clone(), rest)
                        } else {
                            rest
                        }
                    }
                    Eta::Sel {
                        chooser,
                        target,
                        label,
                    } => {
                        if r == chooser {
                            Behaviour::choose(target.clone(), *label, ann.clone(), rest)
                        } else if r == target {
                            Behaviour::offer_one(chooser.clone(), *label, ann.clone(), rest)
                        } else {
                            rest
                        }
                    }
                })
            }
            Choreography::Cond {
                decider,
                guard,
                then,
                els,
            } => {
                let then = sub(then, 0, path)?;
                let els = sub(els, 1, path)?;
                if r == decider {
                    Ok(Behaviour::cond(guard.clone(), then, els))
                } else {
                    merge(&then, &els).map_err(|cause| ProjectionError {
                        cause,
                        loc: ChorLoc {
                            scope: scope.clone(),
                            path: path.clone(),
                        },
                        pid: r.clone(),
                    })
                }
            }
            Choreography::Call(x) => {
                let participates = self
                    .participants
                    .get(x)
                    .is_some_and(|pids| pids.contains(r));
                Ok(if participates {
                    Behaviour::Call(x.clone())
                } else {
                    Behaviour::End
                })
            }
        }
    }

    pub fn defs(&self) -> &'a Defs {
        self.defs
    }
}

/// Projects the main choreography `c` onto `r`.
pub fn project_behaviour(
    c: &Choreography,
    r: &ProcessId,
    defs: &Defs,
) -> Result<Behaviour, ProjectionError> {
    Projector::new(defs).project(c, &ChorScope::Main, r)
}

/// Projects a whole program. The network lists the processes of main in
/// first-occurrence order; every procedure is projected onto each of its
/// participants. The first failure, in that order, aborts the projection.
pub fn epp(p: &ChorProgram) -> Result<ProcProgram, ProjectionError> {
    let projector = Projector::new(&p.defs);
    let mut network = Vec::new();
    for r in process_set(&p.main, &p.defs) {
        let b = projector.project(&p.main, &ChorScope::Main, &r)?;
        network.push((r, b));
    }
    let mut defs = ProcDefs::new();
    for (x, body) in p.defs.iter() {
        let scope = ChorScope::Def(x.clone());
        for r in projector.participants(x).into_iter().flatten() {
            let b = projector.project(body, &scope, r)?;
            defs.insert((x.clone(), r.clone()), b);
        }
    }
    Ok(ProcProgram {
        defs,
        network: Network::new(network),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::*;
    use crate::ident::Label;
    use crate::samples::{auth_client_behaviour, auth_program};
    use crate::sp::{behaviour_equal, validate_proc_program};

    fn a(s: &str) -> Option<Ann> {
        Some(Ann::new(s).unwrap())
    }

    #[test]
    fn auth_projects_onto_client_as_expected() {
        let p = auth_program();
        let client = project_behaviour(&p.main, &pid("Client"), &p.defs).unwrap();
        assert!(behaviour_equal(&client, &auth_client_behaviour()));
    }

    #[test]
    fn auth_epp_network() {
        let p = auth_program();
        let out = epp(&p).unwrap();
        assert!(out.defs.is_empty());
        let pids: Vec<_> = out.network.pids().cloned().collect();
        assert_eq!(pids, vec![pid("Client"), pid("Ip"), pid("Server")]);
        assert_eq!(out.network.get(&pid("Client")), Some(&auth_client_behaviour()));

        let server = Behaviour::Offer {
            from: pid("Ip"),
            left: Some(Branch::new(
                a("authOk"),
                Behaviour::send(pid("Client"), opaque("makeToken"), a("acceptToken"), Behaviour::End),
            )),
            right: Some(Branch::new(a("authFail"), Behaviour::End)),
        };
        assert_eq!(out.network.get(&pid("Server")), Some(&server));
        assert!(matches!(out.network.get(&pid("Ip")), Some(Behaviour::Recv { .. })));
        assert_eq!(validate_proc_program(&out), vec![]);
    }

    #[test]
    fn end_projects_to_end() {
        let b = project_behaviour(&Choreography::End, &pid("p"), &Defs::default()).unwrap();
        assert_eq!(b, Behaviour::End);
        let out = epp(&prog(vec![], vec![])).unwrap();
        assert!(out.network.is_empty() && out.defs.is_empty());
    }

    #[test]
    fn unmerged_branch_difference_is_rejected() {
        let p = prog(
            vec![],
            vec![cond("p", var("b"), vec![com("q", var("e"), "s", "x")], vec![])],
        );
        let err = project_behaviour(&p.main, &pid("q"), &p.defs).unwrap_err();
        assert_eq!(
            err.cause,
            MergeError::MergeConflict {
                left: "send",
                right: "end",
                at: TermPath::root()
            }
        );
        assert_eq!(err.loc, ChorLoc::main(vec![]));
    }

    #[test]
    fn epp_reports_first_failing_process() {
        // Ip decides; Server and Client are not informed.
        let p = prog(
            vec![],
            vec![cond("Ip", var("b"), vec![com("Server", var("e"), "Client", "x")], vec![])],
        );
        let err = epp(&p).unwrap_err();
        assert_eq!(err.pid, pid("Server"));
        assert_eq!(err.loc, ChorLoc::main(vec![]));
    }

    #[test]
    fn disjoint_offers_union() {
        let l = Behaviour::offer_one(pid("p"), Label::Left, a("a"), Behaviour::End);
        let r = Behaviour::offer_one(pid("p"), Label::Right, a("b"), Behaviour::End);
        let merged = merge(&l, &r).unwrap();
        assert_eq!(
            merged,
            Behaviour::Offer {
                from: pid("p"),
                left: Some(Branch::new(a("a"), Behaviour::End)),
                right: Some(Branch::new(a("b"), Behaviour::End)),
            }
        );
    }

    #[test]
    fn annotation_conflict_on_shared_branch() {
        let x = Behaviour::offer_one(pid("p"), Label::Left, a("a"), Behaviour::End);
        let y = Behaviour::offer_one(pid("p"), Label::Left, a("b"), Behaviour::End);
        assert!(matches!(
            merge(&x, &y),
            Err(MergeError::AnnotationConflict { .. })
        ));
    }

    #[test]
    fn client_offer_is_merge_of_branch_projections() {
        let p = auth_program();
        let Choreography::Interaction { cont, .. } = &p.main else {
            panic!()
        };
        let Choreography::Cond { then, els, .. } = &**cont else {
            panic!()
        };
        let projector = Projector::new(&p.defs);
        let t = projector.project(then, &ChorScope::Main, &pid("Client")).unwrap();
        let e = projector.project(els, &ChorScope::Main, &pid("Client")).unwrap();
        assert!(matches!(&t, Behaviour::Offer { left: Some(_), right: None, .. }));
        assert!(matches!(&e, Behaviour::Offer { left: None, right: Some(_), .. }));
        let Behaviour::Send { cont, .. } = auth_client_behaviour() else {
            panic!()
        };
        assert_eq!(merge(&t, &e).unwrap(), *cont);
    }

    #[test]
    fn calls_project_only_onto_participants() {
        let p = prog(
            vec![("X", vec![com("p", var("e"), "q", "x"), call("X")])],
            vec![com("r", var("e"), "p", "y"), call("X")],
        );
        let out = epp(&p).unwrap();
        assert_eq!(
            out.network.get(&pid("r")),
            Some(&Behaviour::send(pid("p"), var("e"), None, Behaviour::End))
        );
        assert_eq!(
            out.network.get(&pid("q")),
            Some(&Behaviour::Call(proc_name("X")))
        );
        assert_eq!(out.defs.len(), 2);
        assert_eq!(validate_proc_program(&out), vec![]);
    }

    #[test]
    fn non_participants_get_end() {
        let p = auth_program();
        let b = project_behaviour(&p.main, &pid("Nobody"), &p.defs).unwrap();
        assert_eq!(b, Behaviour::End);
    }
}
