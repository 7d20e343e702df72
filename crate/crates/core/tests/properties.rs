use std::collections::BTreeSet;

use chorc_core::arbitrary::{chor_program, mergeable_pair, mergeable_triple, proc_program};
use chorc_core::dsl::{parse, pretty};
use chorc_core::ir::{dump_ir, load_ir};
use chorc_core::{merge, process_set, validate_proc_program, Choreography, Defs, Eta, ProcessId};
use proptest::prelude::*;

/// Pids reached by expanding calls up to `fuel` levels deep.
fn unfolded_pids(c: &Choreography, defs: &Defs, fuel: usize, out: &mut BTreeSet<ProcessId>) {
    c.walk(&mut |_, node| match node {
        Choreography::Interaction { eta, .. } => {
            let [a, b] = match eta {
                Eta::Com { sender, receiver, .. } => [sender, receiver],
                Eta::Sel { chooser, target, .. } => [chooser, target],
            };
            out.insert(a.clone());
            out.insert(b.clone());
        }
        Choreography::Cond { decider, .. } => {
            out.insert(decider.clone());
        }
        Choreography::Call(x) => {
            if let (Some(body), true) = (defs.get(x), fuel > 0) {
                unfolded_pids(body, defs, fuel - 1, out);
            }
        }
        Choreography::End => {}
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn merge_is_idempotent((a, _) in mergeable_pair()) {
        prop_assert_eq!(merge(&a, &a), Ok(a.clone()));
    }

    #[test]
    fn merge_is_commutative((a, b) in mergeable_pair()) {
        match (merge(&a, &b), merge(&b, &a)) {
            (Ok(ab), Ok(ba)) => prop_assert_eq!(ab, ba),
            (Err(_), Err(_)) => {}
            (ab, ba) => prop_assert!(false, "one order failed: {:?} vs {:?}", ab, ba),
        }
    }

    #[test]
    fn merge_is_associative((a, b, c) in mergeable_triple()) {
        let left = merge(&a, &b).and_then(|ab| merge(&ab, &c));
        let right = merge(&b, &c).and_then(|bc| merge(&a, &bc));
        if let (Ok(l), Ok(r)) = (left, right) {
            prop_assert_eq!(l, r);
        }
    }

    #[test]
    fn process_set_matches_unfolding(p in chor_program()) {
        let fixpoint: BTreeSet<ProcessId> = process_set(&p.main, &p.defs).into_iter().collect();
        let mut unfolded = BTreeSet::new();
        unfolded_pids(&p.main, &p.defs, 8, &mut unfolded);
        prop_assert_eq!(fixpoint, unfolded);
    }

    #[test]
    fn dsl_round_trip(p in chor_program()) {
        let text = pretty(&p);
        let parsed = parse(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(parsed.program, p);
    }

    #[test]
    fn ir_round_trip(p in proc_program()) {
        prop_assert!(validate_proc_program(&p).is_empty());
        let text = dump_ir(&p);
        prop_assert_eq!(load_ir(&text), Ok(p));
    }
}
