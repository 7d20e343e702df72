//! Reduction semantics of networks of processes.
//!
//! Communication is synchronous: a send fires together with the matching
//! receive, a choice together with the matching offer. Conditionals fire
//! alone. Calls unfold silently from the projected definitions.

use super::{CondBranch, RuntimeError, Step, TransitionLabel, TransitionSystem};
use crate::cc::Memory;
use crate::expr::{eval_expr, Store};
use crate::ident::{Label, ProcessId};
use crate::sp::{Behaviour, Network, ProcDefs};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcState {
    pub pid: ProcessId,
    pub behaviour: Behaviour,
    pub store: Store,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetConfig {
    pub procs: Vec<ProcState>,
}

impl NetConfig {
    pub fn get(&self, pid: &ProcessId) -> Option<&ProcState> {
        self.procs.iter().find(|s| s.pid == *pid)
    }

    fn index(&self, pid: &ProcessId) -> Option<usize> {
        self.procs.iter().position(|s| s.pid == *pid)
    }

    /// Stores of all processes as a memory.
    pub fn memory(&self) -> Memory {
        let mut mem = Memory::new();
        for s in &self.procs {
            for (x, v) in &s.store {
                mem.set(s.pid.clone(), x.clone(), v.clone());
            }
        }
        mem
    }
}

#[derive(Debug, Clone)]
pub struct NetSemantics<'a> {
    defs: &'a ProcDefs,
    unfold_bound: usize,
}

impl<'a> NetSemantics<'a> {
    pub fn new(defs: &'a ProcDefs, unfold_bound: usize) -> Self {
        Self { defs, unfold_bound }
    }

    fn normalize(&self, pid: &ProcessId, mut b: Behaviour) -> Result<Behaviour, RuntimeError> {
        let mut budget = self.unfold_bound;
        while let Behaviour::Call(x) = &b {
            if budget == 0 {
                return Err(RuntimeError::UnfoldLimitExceeded(self.unfold_bound));
            }
            budget -= 1;
            b = self
                .defs
                .get(&(x.clone(), pid.clone()))
                .ok_or_else(|| RuntimeError::UndefinedProcedure {
                    name: x.clone(),
                    pid: Some(pid.clone()),
                })?
                .clone();
        }
        Ok(b)
    }

    /// Start configuration: every process of `network` with its store
    /// taken from `mem`.
    pub fn initial(&self, network: &Network, mem: &Memory) -> Result<NetConfig, RuntimeError> {
        let procs = network
            .iter()
            .map(|(pid, b)| {
                Ok(ProcState {
                    pid: pid.clone(),
                    behaviour: self.normalize(pid, b.clone())?,
                    store: mem.store_or_empty(pid),
                })
            })
            .collect::<Result<_, RuntimeError>>()?;
        Ok(NetConfig { procs })
    }

    fn advance(
        &self,
        cfg: &NetConfig,
        moves: &[(usize, Behaviour)],
        label: &TransitionLabel,
    ) -> Result<NetConfig, RuntimeError> {
        let mut next = cfg.clone();
        for (i, b) in moves {
            let pid = next.procs[*i].pid.clone();
            next.procs[*i].behaviour = self.normalize(&pid, b.clone())?;
        }
        if let TransitionLabel::Com {
            receiver,
            target,
            value,
            ..
        } = label
        {
            let i = next.index(receiver).expect("receiver is in the network");
            next.procs[i].store.insert(target.clone(), value.clone());
        }
        Ok(next)
    }
}

impl TransitionSystem for NetSemantics<'_> {
    type State = NetConfig;

    fn steps(&self, cfg: &NetConfig) -> Result<Vec<Step<NetConfig>>, RuntimeError> {
        let mut out = Vec::new();
        for (i, proc) in cfg.procs.iter().enumerate() {
            let p = &proc.pid;
            match &proc.behaviour {
                Behaviour::Cond { guard, then, els } => {
                    let taken = guard.eval(&proc.store).map_err(|error| RuntimeError::Eval {
                        pid: p.clone(),
                        error,
                    })?;
                    let label = TransitionLabel::Cond {
                        decider: p.clone(),
                        branch: CondBranch::from_bool(taken),
                    };
                    let next = if taken { then } else { els };
                    let cfg2 = self.advance(cfg, &[(i, (**next).clone())], &label)?;
                    out.push((label, cfg2));
                }
                Behaviour::Send { to, expr, cont, .. } => {
                    let Some(j) = cfg.index(to) else { continue };
                    let Behaviour::Recv {
                        from,
                        target,
                        cont: rcont,
                        ..
                    } = &cfg.procs[j].behaviour
                    else {
                        continue;
                    };
                    if from != p {
                        continue;
                    }
                    let value = eval_expr(expr, &proc.store).map_err(|error| RuntimeError::Eval {
                        pid: p.clone(),
                        error,
                    })?;
                    let label = TransitionLabel::Com {
                        sender: p.clone(),
                        value,
                        receiver: to.clone(),
                        target: target.clone(),
                    };
                    let cfg2 = self.advance(
                        cfg,
                        &[(i, (**cont).clone()), (j, (**rcont).clone())],
                        &label,
                    )?;
                    out.push((label, cfg2));
                }
                Behaviour::Choose {
                    to, label, cont, ..
                } => {
                    let Some(j) = cfg.index(to) else { continue };
                    let Behaviour::Offer { from, left, right } = &cfg.procs[j].behaviour else {
                        continue;
                    };
                    if from != p {
                        continue;
                    }
                    let branch = match label {
                        Label::Left => left,
                        Label::Right => right,
                    };
                    let Some(branch) = branch else {
                        return Err(RuntimeError::StuckSelection {
                            chooser: p.clone(),
                            target: to.clone(),
                            label: *label,
                        });
                    };
                    let tl = TransitionLabel::Sel {
                        chooser: p.clone(),
                        label: *label,
                        target: to.clone(),
                    };
                    let cfg2 = self.advance(
                        cfg,
                        &[(i, (**cont).clone()), (j, (*branch.cont).clone())],
                        &tl,
                    )?;
                    out.push((tl, cfg2));
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn is_terminal(&self, cfg: &NetConfig) -> bool {
        cfg.procs.iter().all(|s| s.behaviour == Behaviour::End)
    }
}

/// All single steps of a network configuration.
pub fn net_steps(
    cfg: &NetConfig,
    defs: &ProcDefs,
    unfold_bound: usize,
) -> Result<Vec<Step<NetConfig>>, RuntimeError> {
    NetSemantics::new(defs, unfold_bound).steps(cfg)
}
