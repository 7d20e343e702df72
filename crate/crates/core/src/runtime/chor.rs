//! Reduction semantics of choreographies.
//!
//! An action may fire as soon as none of its processes is involved in an
//! earlier, still pending action (out-of-order execution). Under a
//! conditional, an action by processes other than the decider may fire
//! early when both branches can perform it with the same label. Procedure
//! calls unfold silently, at the head of the term or wherever a delayed
//! action might hide behind them.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexSet;

use super::{CondBranch, RuntimeError, Step, TransitionLabel, TransitionSystem};
use crate::cc::{process_set, Choreography, Defs, Eta, Memory};
use crate::expr::eval_expr;
use crate::ident::{ProcName, ProcessId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChorConfig {
    pub term: Choreography,
    pub mem: Memory,
}

impl ChorConfig {
    pub fn new(term: Choreography, mem: Memory) -> Self {
        Self { term, mem }
    }
}

#[derive(Debug)]
pub struct ChorSemantics<'a> {
    defs: &'a Defs,
    participants: HashMap<&'a ProcName, IndexSet<ProcessId>>,
    unfold_bound: usize,
}

struct Search<'s> {
    budget: usize,
    bound: usize,
    /// Procedures being unfolded under delay, with the blocked set at entry.
    entered: Vec<(&'s ProcName, BTreeSet<ProcessId>)>,
}

impl Search<'_> {
    fn spend(&mut self) -> Result<(), RuntimeError> {
        if self.budget == 0 {
            return Err(RuntimeError::UnfoldLimitExceeded(self.bound));
        }
        self.budget -= 1;
        Ok(())
    }
}

impl<'a> ChorSemantics<'a> {
    pub fn new(defs: &'a Defs, unfold_bound: usize) -> Self {
        let participants = defs
            .iter()
            .map(|(x, body)| (x, process_set(body, defs)))
            .collect();
        Self {
            defs,
            participants,
            unfold_bound,
        }
    }

    fn body(&self, x: &ProcName) -> Result<&'a Choreography, RuntimeError> {
        self.defs.get(x).ok_or_else(|| RuntimeError::UndefinedProcedure {
            name: x.clone(),
            pid: None,
        })
    }

    /// Unfolds calls at the head of `term`.
    pub fn normalize(&self, mut term: Choreography) -> Result<Choreography, RuntimeError> {
        let mut budget = self.unfold_bound;
        while let Choreography::Call(x) = &term {
            if budget == 0 {
                return Err(RuntimeError::UnfoldLimitExceeded(self.unfold_bound));
            }
            budget -= 1;
            term = self.body(x)?.clone();
        }
        Ok(term)
    }

    /// Start configuration for running `main` from memory `mem`.
    pub fn initial(&self, main: &Choreography, mem: Memory) -> Result<ChorConfig, RuntimeError> {
        Ok(ChorConfig::new(self.normalize(main.clone())?, mem))
    }

    fn head_label(&self, eta: &Eta, mem: &Memory) -> Result<TransitionLabel, RuntimeError> {
        Ok(match eta {
            Eta::Com {
                sender,
                expr,
                receiver,
                target,
            } => {
                let store = mem.store_or_empty(sender);
                let value = eval_expr(expr, &store).map_err(|error| RuntimeError::Eval {
                    pid: sender.clone(),
                    error,
                })?;
                TransitionLabel::Com {
                    sender: sender.clone(),
                    value,
                    receiver: receiver.clone(),
                    target: target.clone(),
                }
            }
            Eta::Sel {
                chooser,
                target,
                label,
            } => TransitionLabel::Sel {
                chooser: chooser.clone(),
                label: *label,
                target: target.clone(),
            },
        })
    }

    /// Steps of `term` whose processes avoid `blocked`, paired with the
    /// successor term (memory effects are applied by the caller).
    fn term_steps<'s>(
        &'s self,
        term: &'s Choreography,
        mem: &Memory,
        blocked: &BTreeSet<ProcessId>,
        search: &mut Search<'s>,
    ) -> Result<Vec<(TransitionLabel, Choreography)>, RuntimeError> {
        let mut out = Vec::new();
        match term {
            Choreography::End => {}
            Choreography::Interaction { eta, ann, cont } => {
                let pids = eta.pids();
                if pids.iter().all(|p| !blocked.contains(*p)) {
                    out.push((self.head_label(eta, mem)?, (**cont).clone()));
                }
                let mut inner = blocked.clone();
                inner.extend(pids.into_iter().cloned());
                for (label, next) in self.term_steps(cont, mem, &inner, search)? {
                    out.push((
                        label,
                        Choreography::interaction(eta.clone(), ann.clone(), next),
                    ));
                }
            }
            Choreography::Cond {
                decider,
                guard,
                then,
                els,
            } => {
                if !blocked.contains(decider) {
                    let store = mem.store_or_empty(decider);
                    let taken = guard.eval(&store).map_err(|error| RuntimeError::Eval {
                        pid: decider.clone(),
                        error,
                    })?;
                    let branch = CondBranch::from_bool(taken);
                    let next = if taken { then } else { els };
                    out.push((
                        TransitionLabel::Cond {
                            decider: decider.clone(),
                            branch,
                        },
                        (**next).clone(),
                    ));
                }
                let mut inner = blocked.clone();
                inner.insert(decider.clone());
                let then_steps = self.term_steps(then, mem, &inner, search)?;
                if !then_steps.is_empty() {
                    let else_steps = self.term_steps(els, mem, &inner, search)?;
                    for (label, t) in &then_steps {
                        for (l2, e) in &else_steps {
                            if l2 == label {
                                out.push((
                                    label.clone(),
                                    Choreography::cond(
                                        decider.clone(),
                                        guard.clone(),
                                        t.clone(),
                                        e.clone(),
                                    ),
                                ));
                            }
                        }
                    }
                }
            }
            Choreography::Call(x) => {
                let body = self.body(x)?;
                let hidden = self
                    .participants
                    .get(x)
                    .is_none_or(|pids| pids.iter().all(|p| blocked.contains(p)));
                let head = blocked.is_empty();
                if hidden && !head {
                    return Ok(out);
                }
                if !head && search.entered.iter().any(|(y, b)| *y == x && b == blocked) {
                    return Ok(out);
                }
                search.spend()?;
                search.entered.push((x, blocked.clone()));
                let steps = self.term_steps(body, mem, blocked, search);
                search.entered.pop();
                out = steps?;
            }
        }
        Ok(out)
    }
}

pub(crate) fn apply_label(mem: &mut Memory, label: &TransitionLabel) {
    if let TransitionLabel::Com {
        value,
        receiver,
        target,
        ..
    } = label
    {
        mem.set(receiver.clone(), target.clone(), value.clone());
    }
}

impl TransitionSystem for ChorSemantics<'_> {
    type State = ChorConfig;

    fn steps(&self, cfg: &ChorConfig) -> Result<Vec<Step<ChorConfig>>, RuntimeError> {
        let term = self.normalize(cfg.term.clone())?;
        let mut search = Search {
            budget: self.unfold_bound,
            bound: self.unfold_bound,
            entered: Vec::new(),
        };
        let raw = self.term_steps(&term, &cfg.mem, &BTreeSet::new(), &mut search)?;
        let mut out: Vec<Step<ChorConfig>> = Vec::with_capacity(raw.len());
        for (label, next) in raw {
            let mut mem = cfg.mem.clone();
            apply_label(&mut mem, &label);
            let next = ChorConfig::new(self.normalize(next)?, mem);
            if !out.iter().any(|(l, c)| *l == label && *c == next) {
                out.push((label, next));
            }
        }
        Ok(out)
    }

    fn is_terminal(&self, cfg: &ChorConfig) -> bool {
        matches!(self.normalize(cfg.term.clone()), Ok(Choreography::End))
    }
}

/// All single steps of a choreography configuration.
pub fn chor_steps(
    cfg: &ChorConfig,
    defs: &Defs,
    unfold_bound: usize,
) -> Result<Vec<Step<ChorConfig>>, RuntimeError> {
    ChorSemantics::new(defs, unfold_bound).steps(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::*;
    use crate::expr::{BinOp, Expr, Value};
    use crate::runtime::enumerate_traces;

    fn mem(entries: &[(&str, &str, Value)]) -> Memory {
        entries
            .iter()
            .map(|(p, x, v)| (pid(p), var_name(x), v.clone()))
            .collect()
    }

    #[test]
    fn end_is_terminal() {
        let defs = Defs::default();
        let cfg = ChorConfig::new(Choreography::End, Memory::new());
        assert!(chor_steps(&cfg, &defs, 64).unwrap().is_empty());
        assert!(ChorSemantics::new(&defs, 64).is_terminal(&cfg));
    }

    #[test]
    fn independent_communications_commute() {
        let p = prog(
            vec![],
            vec![com("a", lit_int(1), "b", "x"), com("c", lit_int(2), "d", "y")],
        );
        let cfg = ChorConfig::new(p.main.clone(), Memory::new());
        let steps = chor_steps(&cfg, &p.defs, 64).unwrap();
        assert_eq!(steps.len(), 2);
        let sem = ChorSemantics::new(&p.defs, 64);
        let traces = enumerate_traces(&sem, &cfg, 8, 1000).unwrap();
        assert_eq!(traces.len(), 2);
        assert!(traces.iter().all(|t| t.completed && t.labels.len() == 2));
    }

    #[test]
    fn dependent_communications_are_ordered() {
        let p = prog(
            vec![],
            vec![com("a", lit_int(1), "b", "x"), com("b", var("x"), "c", "y")],
        );
        let sem = ChorSemantics::new(&p.defs, 64);
        let cfg = ChorConfig::new(p.main.clone(), Memory::new());
        let traces = enumerate_traces(&sem, &cfg, 8, 1000).unwrap();
        assert_eq!(traces.len(), 1);
        let t = traces.into_iter().next().unwrap();
        assert_eq!(t.labels[1].to_string(), "b -[1]-> c.y");
    }

    #[test]
    fn communication_writes_only_receiver_cell() {
        let p = prog(vec![], vec![com("a", var("v"), "b", "x")]);
        let start = mem(&[("a", "v", Value::int(7)), ("b", "y", Value::int(0))]);
        let cfg = ChorConfig::new(p.main.clone(), start.clone());
        let steps = chor_steps(&cfg, &p.defs, 64).unwrap();
        let [(_, next)] = &steps[..] else { panic!() };
        let mut expected = start;
        expected.set(pid("b"), var_name("x"), Value::int(7));
        assert_eq!(next.mem, expected);
    }

    #[test]
    fn unguarded_recursion_hits_unfold_limit() {
        let p = prog(vec![("X", vec![call("X")])], vec![call("X")]);
        let cfg = ChorConfig::new(p.main.clone(), Memory::new());
        assert_eq!(
            chor_steps(&cfg, &p.defs, 64),
            Err(RuntimeError::UnfoldLimitExceeded(64))
        );
    }

    #[test]
    fn delay_reaches_into_called_procedure() {
        let p = prog(
            vec![("X", vec![com("c", lit_int(2), "d", "y")])],
            vec![com("a", lit_int(1), "b", "x"), call("X")],
        );
        let sem = ChorSemantics::new(&p.defs, 64);
        let cfg = sem.initial(&p.main, Memory::new()).unwrap();
        let traces = enumerate_traces(&sem, &cfg, 8, 1000).unwrap();
        assert_eq!(traces.len(), 2);
    }

    #[test]
    fn common_branch_actions_fire_before_the_decision() {
        let p = prog(
            vec![],
            vec![cond(
                "p",
                var("b"),
                vec![left("p", "q"), com("r", lit_int(1), "s", "x")],
                vec![right("p", "q"), com("r", lit_int(1), "s", "x")],
            )],
        );
        let sem = ChorSemantics::new(&p.defs, 64);
        let cfg = ChorConfig::new(p.main.clone(), mem(&[("p", "b", Value::Bool(true))]));
        let traces = enumerate_traces(&sem, &cfg, 8, 1000).unwrap();
        // r->s may happen before the decision, between it and the selection,
        // or last.
        assert_eq!(traces.len(), 3);
    }

    #[test]
    fn recursive_loop_terminates_on_guard() {
        let p = prog(
            vec![(
                "Loop",
                vec![cond(
                    "p",
                    Expr::binop(BinOp::Lt, var("n"), lit_int(2)),
                    vec![
                        left("p", "q"),
                        com("p", var("n"), "q", "m"),
                        com("q", Expr::binop(BinOp::Add, var("m"), lit_int(1)), "p", "n"),
                        call("Loop"),
                    ],
                    vec![right("p", "q")],
                )],
            )],
            vec![call("Loop")],
        );
        let sem = ChorSemantics::new(&p.defs, 64);
        let cfg = sem
            .initial(&p.main, mem(&[("p", "n", Value::int(0))]))
            .unwrap();
        let traces = enumerate_traces(&sem, &cfg, 20, 10_000).unwrap();
        assert_eq!(traces.len(), 1);
        let t = traces.into_iter().next().unwrap();
        assert!(t.completed);
        assert_eq!(t.labels.len(), 10);
    }

}
