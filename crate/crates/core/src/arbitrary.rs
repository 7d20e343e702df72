//! Proptest strategies for choreographies, behaviours and process programs.
//!
//! Identifiers are drawn from small pools that avoid the DSL keywords, so
//! every generated term can be printed and parsed back.

use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

use crate::cc::{ChorProgram, Choreography, Defs, Eta};
use crate::expr::{BinOp, BoolExpr, Expr, Value};
use crate::ident::{Ann, Label, ProcName, ProcessId, VarName};
use crate::sp::{Behaviour, Branch, Network, ProcDefs, ProcProgram};

pub const PIDS: [&str; 5] = ["p", "q", "r", "s", "Client"];
pub const VARS: [&str; 3] = ["x", "y", "token"];
pub const PROCS: [&str; 5] = ["X", "Y", "Z", "Loop", "Retry"];

/// Compiled once; a bare `&str` strategy recompiles on every draw.
fn regex(pattern: &str) -> proptest::string::RegexGeneratorStrategy<String> {
    proptest::string::string_regex(pattern).expect("valid pattern")
}

fn pid_from(pool: &'static [&'static str]) -> impl Strategy<Value = ProcessId> {
    proptest::sample::select(pool).prop_map(|s| ProcessId::new(s).unwrap())
}

pub fn var_name() -> impl Strategy<Value = VarName> {
    proptest::sample::select(&VARS[..]).prop_map(|s| VarName::new(s).unwrap())
}

pub fn annotation() -> impl Strategy<Value = Option<Ann>> {
    option::weighted(0.5, regex("[a-zA-Z][a-zA-Z0-9]{0,6}|[ -~]{1,5}")).prop_map(|a| a.map(|s| Ann::new(s).unwrap()))
}

pub fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<i64>().prop_map(Value::int),
        (any::<i128>(), any::<i128>()).prop_map(|(a, b)| Value::int(num_bigint::BigInt::from(a) * b)),
        regex("[a-z \"\\\\\n\t\u{1}é]{0,5}").prop_map(Value::str),
        any::<bool>().prop_map(Value::Bool),
    ]
}

pub fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        value().prop_map(Expr::Lit),
        var_name().prop_map(Expr::Var),
        regex("[a-z(), \"]{0,8}").prop_map(Expr::opaque),
    ]
    .boxed();
    // Depth is bounded by construction so that the strategy is built once.
    let mut e = leaf.clone();
    for _ in 0..3 {
        e = prop_oneof![
            2 => leaf.clone(),
            1 => (proptest::sample::select(&BinOp::ALL[..]), e.clone(), e.clone())
                .prop_map(|(op, l, r)| Expr::binop(op, l, r)),
            1 => e.clone().prop_map(Expr::not),
        ]
        .boxed();
    }
    e
}

pub fn guard() -> BoxedStrategy<BoolExpr> {
    expr().prop_filter_map("statically non-boolean", |e| BoolExpr::new(e).ok()).boxed()
}

fn eta(pids: &'static [&'static str]) -> BoxedStrategy<Eta> {
    let pair = (pid_from(pids), pid_from(pids)).prop_filter("distinct", |(a, b)| a != b).boxed();
    prop_oneof![
        (pair.clone(), expr(), var_name()).prop_map(|((s, r), e, x)| Eta::Com {
            sender: s,
            expr: e,
            receiver: r,
            target: x,
        }),
        (pair, any::<bool>()).prop_map(|((c, t), left)| Eta::Sel {
            chooser: c,
            target: t,
            label: if left { Label::Left } else { Label::Right },
        }),
    ]
    .boxed()
}

/// Choreographies over `pids` whose calls name one of `procs`.
pub fn choreography(
    pids: &'static [&'static str],
    procs: Vec<ProcName>,
) -> impl Strategy<Value = Choreography> {
    let leaf = if procs.is_empty() {
        Just(Choreography::End).boxed()
    } else {
        prop_oneof![
            2 => Just(Choreography::End),
            1 => proptest::sample::select(procs).prop_map(Choreography::Call),
        ]
        .boxed()
    };
    let (eta, ann, guard) = (eta(pids), annotation().boxed(), guard());
    leaf.prop_recursive(6, 32, 2, move |inner| {
        prop_oneof![
            3 => (eta.clone(), ann.clone(), inner.clone())
                .prop_map(|(eta, ann, cont)| Choreography::interaction(eta, ann, cont)),
            1 => (pid_from(pids), guard.clone(), inner.clone(), inner)
                .prop_map(|(p, g, t, e)| Choreography::cond(p, g, t, e)),
        ]
    })
}

/// Programs with up to five definitions; every call names a definition.
pub fn chor_program() -> impl Strategy<Value = ChorProgram> {
    (0..=5usize).prop_flat_map(|n| {
        let names: Vec<ProcName> = PROCS[..n].iter().map(|s| ProcName::new(*s).unwrap()).collect();
        let bodies = vec(choreography(&PIDS, names.clone()), n);
        (bodies, choreography(&PIDS, names.clone())).prop_map(move |(bodies, main)| ChorProgram {
            defs: Defs::new(names.iter().cloned().zip(bodies).collect()),
            main,
        })
    })
}

/// Behaviours of `owner` with peers from the whole pool.
pub fn behaviour(owner: ProcessId, procs: Vec<ProcName>) -> impl Strategy<Value = Behaviour> {
    let pool = PIDS.iter().map(|s| ProcessId::new(*s).unwrap()).collect();
    behaviour_among(owner, pool, procs)
}

/// Behaviours of `owner`: peers come from `pool` and differ from the owner,
/// offers have at least one branch, calls name one of `procs`.
pub fn behaviour_among(
    owner: ProcessId,
    pool: Vec<ProcessId>,
    procs: Vec<ProcName>,
) -> impl Strategy<Value = Behaviour> {
    let peers: Vec<ProcessId> = pool.into_iter().filter(|p| *p != owner).collect();
    let leaf = if procs.is_empty() {
        Just(Behaviour::End).boxed()
    } else {
        prop_oneof![
            2 => Just(Behaviour::End),
            1 => proptest::sample::select(procs).prop_map(Behaviour::Call),
        ]
        .boxed()
    };
    let (expr, ann, guard) = (expr(), annotation().boxed(), guard());
    leaf.prop_recursive(6, 32, 2, move |inner| {
        let cond = (guard.clone(), inner.clone(), inner.clone()).prop_map(|(g, t, e)| Behaviour::cond(g, t, e));
        if peers.is_empty() {
            return cond.boxed();
        }
        let peer = proptest::sample::select(peers.clone()).boxed();
        let branch = (ann.clone(), inner.clone()).prop_map(|(a, c)| Branch::new(a, c)).boxed();
        let offer = (peer.clone(), option::of(branch.clone()), option::of(branch))
            .prop_filter("at least one branch", |(_, l, r)| l.is_some() || r.is_some())
            .prop_map(|(from, left, right)| Behaviour::Offer { from, left, right });
        prop_oneof![
            (peer.clone(), expr.clone(), ann.clone(), inner.clone()).prop_map(|(q, e, a, c)| Behaviour::send(q, e, a, c)),
            (peer.clone(), var_name(), ann.clone(), inner.clone())
                .prop_map(|(q, x, a, c)| Behaviour::recv(q, x, a, c)),
            (peer.clone(), any::<bool>(), ann.clone(), inner.clone()).prop_map(|(q, l, a, c)| {
                Behaviour::choose(q, if l { Label::Left } else { Label::Right }, a, c)
            }),
            offer,
            cond,
        ]
        .boxed()
    })
}

/// Valid process programs: distinct network processes, one body per
/// (procedure, process) pair.
pub fn proc_program() -> impl Strategy<Value = ProcProgram> {
    (proptest::sample::subsequence(&PIDS[..], 0..=4), 0..=3usize).prop_flat_map(|(pids, n)| {
        let pids: Vec<ProcessId> = pids.into_iter().map(|s| ProcessId::new(s).unwrap()).collect();
        let names: Vec<ProcName> = PROCS[..n].iter().map(|s| ProcName::new(*s).unwrap()).collect();
        let mains: Vec<_> = pids
            .iter()
            .map(|p| behaviour_among(p.clone(), pids.clone(), names.clone()))
            .collect();
        let keys: Vec<(ProcName, ProcessId)> = names
            .iter()
            .flat_map(|x| pids.iter().map(move |p| (x.clone(), p.clone())))
            .collect();
        let bodies: Vec<_> = keys
            .iter()
            .map(|(_, p)| behaviour_among(p.clone(), pids.clone(), names.clone()))
            .collect();
        (mains, bodies).prop_map(move |(mains, bodies)| ProcProgram {
            network: Network::new(pids.iter().cloned().zip(mains).collect()),
            defs: keys.iter().cloned().zip(bodies).collect::<ProcDefs>(),
        })
    })
}

/// A copy of `b` where offers may lose one branch and, rarely, a node is
/// altered. Variants of one base merge unless an alteration collides.
pub fn variant(b: &Behaviour, choices: &mut impl Iterator<Item = u8>) -> Behaviour {
    let alter = choices.next().unwrap_or(1).is_multiple_of(16);
    let keep = choices.next().unwrap_or(0) % 3;
    match b {
        Behaviour::End => {
            if alter {
                Behaviour::Call(ProcName::new("X").unwrap())
            } else {
                Behaviour::End
            }
        }
        Behaviour::Send { to, expr, ann, cont } => {
            let ann = if alter { Some(Ann::new("changed").unwrap()) } else { ann.clone() };
            Behaviour::send(to.clone(), expr.clone(), ann, variant(cont, choices))
        }
        Behaviour::Recv {
            from,
            target,
            ann,
            cont,
        } => {
            let target = if alter { VarName::new("altered").unwrap() } else { target.clone() };
            Behaviour::recv(from.clone(), target, ann.clone(), variant(cont, choices))
        }
        Behaviour::Choose {
            to,
            label,
            ann,
            cont,
        } => {
            let label = match (alter, label) {
                (true, Label::Left) => Label::Right,
                (true, Label::Right) => Label::Left,
                (false, l) => *l,
            };
            Behaviour::choose(to.clone(), label, ann.clone(), variant(cont, choices))
        }
        Behaviour::Offer { from, left, right } => {
            let mut branch = |br: &Option<Branch>, dropped: bool| match br {
                Some(br) if !dropped => {
                    let ann = if alter { Some(Ann::new("other").unwrap()) } else { br.ann.clone() };
                    Some(Branch::new(ann, variant(&br.cont, choices)))
                }
                _ => None,
            };
            let both = left.is_some() && right.is_some();
            let left = branch(left, both && keep == 1);
            let right = branch(right, both && keep == 2);
            Behaviour::Offer {
                from: from.clone(),
                left,
                right,
            }
        }
        Behaviour::Cond { guard, then, els } => {
            let then = variant(then, choices);
            let els = variant(els, choices);
            if alter {
                Behaviour::cond(guard.clone(), els, then)
            } else {
                Behaviour::cond(guard.clone(), then, els)
            }
        }
        Behaviour::Call(x) => Behaviour::Call(x.clone()),
    }
}

fn base_behaviour() -> impl Strategy<Value = Behaviour> {
    behaviour(ProcessId::new("p").unwrap(), vec![ProcName::new("X").unwrap()])
}

/// Two variants of one base behaviour.
pub fn mergeable_pair() -> impl Strategy<Value = (Behaviour, Behaviour)> {
    (base_behaviour(), vec(any::<u8>(), 64), vec(any::<u8>(), 64)).prop_map(|(b, c1, c2)| {
        (variant(&b, &mut c1.into_iter()), variant(&b, &mut c2.into_iter()))
    })
}

/// Three variants of one base behaviour.
pub fn mergeable_triple() -> impl Strategy<Value = (Behaviour, Behaviour, Behaviour)> {
    (base_behaviour(), vec(vec(any::<u8>(), 64), 3)).prop_map(|(b, cs)| {
        let mut it = cs.into_iter().map(|c| variant(&b, &mut c.into_iter()));
        (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    })
}
