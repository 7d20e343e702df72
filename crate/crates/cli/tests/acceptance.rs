//! Acceptance suite: one PASS or FAIL line per criterion, printed even when
//! output capture is on.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chorc_core::arbitrary::{chor_program, mergeable_pair, mergeable_triple, proc_program};
use chorc_core::codegen::{compile, CodegenConfig};
use chorc_core::dsl::{parse, parse_file, pretty, ParsedProgram};
use chorc_core::ir::{behaviour_to_json, dump_ir, dump_json, load_ir};
use chorc_core::runtime::{check_deadlock_freedom, trace_equiv, Limits};
use chorc_core::{
    behaviour_equal, epp, merge, process_set, project_behaviour, Ann, Behaviour, Branch, ChorProgram,
    Choreography, Defs, Eta, Expr, Label, Memory, Network, ProcDefs, ProcProgram, ProcessId, Value,
    VarName,
};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde::Deserialize;

const CLIENT_MAIN: &str =
    "authenticate@Ip( credentials ) [ authOk() ] { acceptToken( token ) } [ authFail() ] { nullProcess }";

#[derive(Deserialize)]
struct Manifest {
    program: Vec<Entry>,
    unprojectable: Vec<Unprojectable>,
}

#[derive(Deserialize)]
struct Entry {
    file: String,
    memories: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct Unprojectable {
    file: String,
    line: usize,
    col: usize,
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn manifest() -> Manifest {
    toml::from_str(&fs::read_to_string(corpus().join("manifest.toml")).unwrap()).unwrap()
}

fn load(file: &str) -> (String, ParsedProgram) {
    let src = fs::read_to_string(corpus().join(file)).unwrap();
    let parsed = parse_file(file, &src).unwrap_or_else(|e| panic!("{file}: {e:?}"));
    (src, parsed)
}

fn pid(s: &str) -> ProcessId {
    ProcessId::new(s).unwrap()
}

fn binding(s: &str) -> (ProcessId, VarName, Value) {
    let (key, val) = s.split_once('=').unwrap();
    let (p, x) = key.split_once('.').unwrap();
    let (kind, text) = val.split_once(':').unwrap();
    let v = match kind {
        "int" => Value::int(text.parse::<i64>().unwrap()),
        "str" => Value::str(text),
        "bool" => Value::Bool(text.parse().unwrap()),
        _ => panic!("bad value {val}"),
    };
    (pid(p), VarName::new(x).unwrap(), v)
}

fn memory(bindings: &[String]) -> Memory {
    bindings.iter().map(|b| binding(b)).collect()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Runs `cases` generated inputs through `check`; `Err` names the first
/// counterexample.
fn for_all<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, check).map_err(|e| e.to_string())
}

struct Report {
    lines: Vec<String>,
    failed: usize,
}

impl Report {
    fn record(&mut self, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => match limit {
                Some(l) if elapsed > l => (false, format!("{d}; exceeded {:.0?}", l)),
                _ => (true, d),
            },
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        let line = format!(
            "{} {name}: {detail} ({:.3}s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        // Written past the test harness capture so the report always shows.
        writeln!(std::io::stdout(), "{line}").unwrap();
        self.lines.push(line);
    }
}

fn strip_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Body of the `main { ... }` block of a generated service.
fn main_block(service: &str) -> Option<&str> {
    let start = service.find("  main {")? + "  main {".len();
    let mut depth = 1;
    for (i, c) in service[start..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&service[start..start + i]);
                }
            }
            _ => {}
        }
    }
    None
}

fn reference_client() -> Behaviour {
    let a = |s: &str| Some(Ann::new(s).unwrap());
    Behaviour::Send {
        to: pid("Ip"),
        expr: Expr::Var(VarName::new("credentials").unwrap()),
        ann: a("authenticate"),
        cont: Box::new(Behaviour::Offer {
            from: pid("Ip"),
            left: Some(Branch::new(
                a("authOk"),
                Behaviour::Recv {
                    from: pid("Server"),
                    target: VarName::new("token").unwrap(),
                    ann: a("acceptToken"),
                    cont: Box::new(Behaviour::End),
                },
            )),
            right: Some(Branch::new(a("authFail"), Behaviour::End)),
        }),
    }
}

fn golden_projection() -> Result<String, String> {
    let (_, parsed) = load("auth.chor");
    let proc = epp(&parsed.program).map_err(|e| e.to_string())?;
    let client = proc.network.get(&pid("Client")).ok_or("no Client entry")?;
    if !behaviour_equal(client, &reference_client()) {
        return Err(format!("Client projection differs: {client:?}"));
    }
    let golden = fs::read_to_string(corpus().join("golden/client.json")).unwrap();
    if dump_json(&behaviour_to_json(client)) != golden {
        return Err("IR differs from golden/client.json".into());
    }
    Ok("Client matches reference term and golden IR".into())
}

fn golden_codegen() -> Result<String, String> {
    let (_, parsed) = load("auth.chor");
    let proc = epp(&parsed.program).map_err(|e| e.to_string())?;
    let services = compile(&proc, &CodegenConfig::default()).map_err(|e| e.to_string())?;
    let client = services.get(&pid("Client")).ok_or("no Client service")?;
    let main = main_block(client).ok_or("no main block")?;
    if strip_ws(main) != strip_ws(CLIENT_MAIN) {
        return Err(format!("main block differs:\n{main}"));
    }
    let golden = fs::read_to_string(corpus().join("golden/client.ol")).unwrap();
    let file = format!("{}\n{client}", chorc_core::codegen::FILE_HEADER);
    if file != golden {
        return Err("service differs from golden/client.ol".into());
    }
    Ok("Client main block matches".into())
}

fn all_terms(p: &ChorProgram) -> Vec<&Choreography> {
    std::iter::once(&p.main).chain(p.defs.iter().map(|(_, body)| body)).collect()
}

fn conds(p: &ChorProgram) -> Vec<&Choreography> {
    let mut out = Vec::new();
    for t in all_terms(p) {
        t.walk(&mut |_, n| {
            if matches!(n, Choreography::Cond { .. }) {
                out.push(n);
            }
        });
    }
    out
}

/// Feature tags present in a projectable program.
fn features(p: &ChorProgram) -> BTreeSet<&'static str> {
    let mut out = BTreeSet::new();
    let mut deciders = BTreeSet::new();
    for t in all_terms(p) {
        t.walk(&mut |_, n| match n {
            Choreography::Interaction { eta: Eta::Com { .. }, .. } => {
                out.insert("communication");
            }
            Choreography::Interaction { eta: Eta::Sel { label, .. }, .. } => {
                out.insert(match label {
                    Label::Left => "left",
                    Label::Right => "right",
                });
            }
            Choreography::Cond { decider, then, els, .. } => {
                deciders.insert(decider.clone());
                for branch in [then, els] {
                    branch.walk(&mut |_, m| {
                        if matches!(m, Choreography::Cond { .. }) {
                            out.insert("nested conditional");
                        }
                    });
                }
            }
            Choreography::Call(_) => {}
            Choreography::End => {}
        });
    }
    if has_cycle(&p.defs) {
        out.insert("recursion");
    }
    let pids = process_set(&p.main, &p.defs);
    for c in conds(p) {
        let Choreography::Cond { decider, then, els, .. } = c else { unreachable!() };
        for r in pids.iter().filter(|r| *r != decider) {
            let (Ok(t), Ok(e)) = (project_behaviour(then, r, &p.defs), project_behaviour(els, r, &p.defs)) else {
                continue;
            };
            let one = |b: &Behaviour| matches!(b, Behaviour::Offer { left, right, .. } if left.is_some() != right.is_some());
            if one(&t) && one(&e) {
                if let Ok(Behaviour::Offer { left: Some(_), right: Some(_), .. }) = merge(&t, &e) {
                    out.insert("merged offer");
                }
            }
        }
    }
    // A process that never meets any decider.
    if !deciders.is_empty() {
        let mut met: BTreeSet<ProcessId> = deciders.clone();
        for t in all_terms(p) {
            t.walk(&mut |_, n| {
                if let Choreography::Interaction { eta, .. } = n {
                    let (a, b) = match eta {
                        Eta::Com { sender, receiver, .. } => (sender, receiver),
                        Eta::Sel { chooser, target, .. } => (chooser, target),
                    };
                    if deciders.contains(a) {
                        met.insert(b.clone());
                    }
                    if deciders.contains(b) {
                        met.insert(a.clone());
                    }
                }
            });
        }
        if pids.iter().any(|q| !met.contains(q)) {
            out.insert("non-participant");
        }
    }
    out
}

fn has_cycle(defs: &Defs) -> bool {
    let calls = |body: &Choreography| {
        let mut out = Vec::new();
        body.walk(&mut |_, n| {
            if let Choreography::Call(x) = n {
                out.push(x.clone());
            }
        });
        out
    };
    defs.iter().any(|(start, body)| {
        let mut seen = BTreeSet::new();
        let mut stack = calls(body);
        while let Some(x) = stack.pop() {
            if x == *start {
                return true;
            }
            if seen.insert(x.clone()) {
                if let Some(b) = defs.get(&x) {
                    stack.extend(calls(b));
                }
            }
        }
        false
    })
}

fn limits() -> Limits {
    Limits {
        depth: 12,
        max_configs: 100_000,
        ..Limits::default()
    }
}

fn correspondence(m: &Manifest) -> Result<String, String> {
    if m.program.len() < 20 {
        return Err(format!("only {} programs", m.program.len()));
    }
    let mut covered = BTreeSet::new();
    let mut runs = 0;
    for entry in &m.program {
        let (_, parsed) = load(&entry.file);
        let proc = epp(&parsed.program).map_err(|e| format!("{}: {e}", entry.file))?;
        covered.extend(features(&parsed.program));
        for mem in &entry.memories {
            let report = trace_equiv(&parsed.program, &proc, &memory(mem), limits())
                .map_err(|e| format!("{} {mem:?}: {e}", entry.file))?;
            if !report.equal {
                return Err(format!("{} {mem:?}: {report}", entry.file));
            }
            runs += 1;
        }
    }
    let wanted = [
        "communication",
        "left",
        "right",
        "nested conditional",
        "merged offer",
        "recursion",
        "non-participant",
    ];
    let missing: Vec<_> = wanted.iter().filter(|f| !covered.contains(*f)).collect();
    if !missing.is_empty() {
        return Err(format!("corpus lacks {missing:?}"));
    }
    Ok(format!("{} programs, {runs} memories, traces equal", m.program.len()))
}

fn mutual_receive() -> ProcProgram {
    let recv = |from: &str| {
        Behaviour::Recv {
            from: pid(from),
            target: VarName::new("x").unwrap(),
            ann: None,
            cont: Box::new(Behaviour::End),
        }
    };
    ProcProgram {
        network: Network::new(vec![(pid("p"), recv("q")), (pid("q"), recv("p"))]),
        defs: ProcDefs::default(),
    }
}

fn deadlock_freedom(m: &Manifest) -> Result<String, String> {
    let mut explored = 0;
    for entry in &m.program {
        let (_, parsed) = load(&entry.file);
        let proc = epp(&parsed.program).map_err(|e| format!("{}: {e}", entry.file))?;
        for mem in &entry.memories {
            let report = check_deadlock_freedom(&proc, &memory(mem), limits())
                .map_err(|e| format!("{} {mem:?}: {e}", entry.file))?;
            if !report.is_deadlock_free() {
                return Err(format!("{} {mem:?}: {report}", entry.file));
            }
            explored += report.explored;
        }
    }
    let report = check_deadlock_freedom(&mutual_receive(), &Memory::default(), limits()).map_err(|e| e.to_string())?;
    if report.is_deadlock_free() {
        return Err("mutual receive not reported".into());
    }
    Ok(format!("{explored} configurations, mutual receive deadlocked"))
}

fn diagnostics(m: &Manifest) -> Result<String, String> {
    if m.unprojectable.len() < 5 {
        return Err(format!("only {} unprojectable programs", m.unprojectable.len()));
    }
    for u in &m.unprojectable {
        let (src, parsed) = load(&u.file);
        let err = match epp(&parsed.program) {
            Ok(_) => return Err(format!("{} projected", u.file)),
            Err(e) => e,
        };
        let span = parsed.span(&err.loc).ok_or_else(|| format!("{}: no span for {}", u.file, err.loc))?;
        if (span.start.line, span.start.col) != (u.line, u.col) {
            return Err(format!("{}: error at {span}, expected {}:{}", u.file, u.line, u.col));
        }
        let line = src.lines().nth(u.line - 1).unwrap_or("");
        let at: String = line.chars().skip(u.col - 1).collect();
        if !at.starts_with("if ") {
            return Err(format!("{}: span does not start an `if`", u.file));
        }
    }
    Ok(format!("{} programs located", m.unprojectable.len()))
}

fn merge_algebra() -> Result<String, String> {
    for_all(1000, mergeable_pair(), |(a, _)| {
        if merge(&a, &a) != Ok(a.clone()) {
            return Err(TestCaseError::fail(format!("not idempotent on {a:?}")));
        }
        Ok(())
    })?;
    for_all(1000, mergeable_pair(), |(a, b)| match (merge(&a, &b), merge(&b, &a)) {
        (Ok(ab), Ok(ba)) if ab == ba => Ok(()),
        (Err(_), Err(_)) => Ok(()),
        (ab, ba) => Err(TestCaseError::fail(format!("{ab:?} vs {ba:?}"))),
    })?;
    let defined = std::cell::Cell::new(0);
    for_all(1000, mergeable_triple(), |(a, b, c)| {
        let left = merge(&a, &b).and_then(|ab| merge(&ab, &c));
        let right = merge(&b, &c).and_then(|bc| merge(&a, &bc));
        if let (Ok(l), Ok(r)) = (left, right) {
            defined.set(defined.get() + 1);
            if l != r {
                return Err(TestCaseError::fail(format!("{l:?} vs {r:?}")));
            }
        }
        Ok(())
    })?;
    Ok(format!("1000 pairs, 1000 triples ({} associative cases defined)", defined.get()))
}

/// Pids reached by expanding calls up to `fuel` levels deep.
fn unfolded_pids(c: &Choreography, defs: &Defs, fuel: usize, out: &mut BTreeSet<ProcessId>) {
    c.walk(&mut |_, node| match node {
        Choreography::Interaction { eta, .. } => {
            let (a, b) = match eta {
                Eta::Com { sender, receiver, .. } => (sender, receiver),
                Eta::Sel { chooser, target, .. } => (chooser, target),
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

fn process_set_oracle() -> Result<String, String> {
    for_all(500, chor_program(), |p| {
        let fixpoint: BTreeSet<ProcessId> = process_set(&p.main, &p.defs).into_iter().collect();
        let mut unfolded = BTreeSet::new();
        unfolded_pids(&p.main, &p.defs, 8, &mut unfolded);
        if fixpoint != unfolded {
            return Err(TestCaseError::fail(format!("{fixpoint:?} vs {unfolded:?}")));
        }
        Ok(())
    })?;
    Ok("500 programs".into())
}

fn round_trips() -> Result<String, String> {
    for_all(1000, chor_program(), |p| {
        let text = pretty(&p);
        match parse(&text) {
            Ok(parsed) if parsed.program == p => Ok(()),
            other => Err(TestCaseError::fail(format!("{text}\n{other:?}"))),
        }
    })?;
    for_all(1000, proc_program(), |p| {
        let text = dump_ir(&p);
        if load_ir(&text) != Ok(p) {
            return Err(TestCaseError::fail(text));
        }
        Ok(())
    })?;
    Ok("1000 DSL terms, 1000 IR programs".into())
}

#[test]
fn acceptance() {
    let m = manifest();
    let mut report = Report {
        lines: Vec::new(),
        failed: 0,
    };
    let secs = Duration::from_secs;
    report.record("golden projection", Some(secs(1)), golden_projection);
    report.record("golden codegen", Some(secs(1)), golden_codegen);
    report.record("correspondence corpus", Some(secs(30)), || correspondence(&m));
    report.record("deadlock freedom", Some(secs(30)), || deadlock_freedom(&m));
    report.record("projectability diagnostics", None, || diagnostics(&m));
    report.record("merge algebra", Some(secs(10)), merge_algebra);
    report.record("process_set oracle", None, process_set_oracle);
    report.record("round trips", None, round_trips);
    assert_eq!(report.failed, 0, "\n{}", report.lines.join("\n"));
}
