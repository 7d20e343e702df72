//! Jolie concrete syntax.
//!
//! Statements of a block are separated by newlines, as in the reference
//! rendering of the authentication example. Blocks that would otherwise be
//! empty hold `nullProcess`.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::names::{MessagePoint, OperationName, OperationNames};
use super::{CodegenConfig, CodegenError};
use crate::expr::{BinOp, Expr, Value};
use crate::ident::{Label, ProcName, ProcessId};
use crate::path::{ProcLoc, ProcScope, TermPath};
use crate::sp::{Behaviour, ProcProgram};

/// Comment placed at the top of every generated file.
pub const FILE_HEADER: &str = "\
// Generated by chorc.
// Selections are one-way operations with an empty payload.
";

const INDENT: &str = "  ";

/// Renders an expression in Jolie syntax. Opaque text is pasted verbatim;
/// the error carries text that cannot be.
pub fn render_expr(e: &Expr) -> Result<String, String> {
    let mut out = String::new();
    render_into(e, true, &mut out)?;
    Ok(out)
}

fn render_into(e: &Expr, top: bool, out: &mut String) -> Result<(), String> {
    match e {
        Expr::Lit(Value::Int(n)) => write!(out, "{n}").unwrap(),
        Expr::Lit(Value::Bool(b)) => write!(out, "{b}").unwrap(),
        Expr::Lit(Value::Str(s)) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '\r' => out.push_str("\\r"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Expr::Var(x) => out.push_str(x.as_str()),
        Expr::Opaque(text) => {
            if text.trim().is_empty() || text.chars().any(|c| c.is_control() || c == '{' || c == '}') {
                return Err(text.clone());
            }
            out.push_str(text);
        }
        Expr::Not(inner) => {
            out.push_str("!(");
            render_into(inner, true, out)?;
            out.push(')');
        }
        Expr::BinOp(op, l, r) => {
            let symbol = match op {
                BinOp::Concat => "+",
                BinOp::And => "&&",
                BinOp::Or => "||",
                other => other.symbol(),
            };
            if !top {
                out.push('(');
            }
            render_into(l, false, out)?;
            write!(out, " {symbol} ").unwrap();
            render_into(r, false, out)?;
            if !top {
                out.push(')');
            }
        }
    }
    Ok(())
}

struct Emitter<'a> {
    pid: &'a ProcessId,
    names: &'a OperationNames,
    out: String,
    depth: usize,
}

impl Emitter<'_> {
    fn line(&mut self, text: &str) {
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn name(&self, point: MessagePoint) -> &OperationName {
        self.names
            .get(&point)
            .unwrap_or_else(|| panic!("no operation name for {point}"))
    }

    fn expr(&self, e: &Expr) -> Result<String, CodegenError> {
        render_expr(e).map_err(|text| CodegenError::OpaqueExprUnsupported {
            pid: self.pid.clone(),
            text,
        })
    }

    /// Emits the statements of `b`, which sits at `path` inside `scope`.
    fn block(&mut self, scope: &ProcScope, b: &Behaviour, path: TermPath) -> Result<(), CodegenError> {
        if *b == Behaviour::End {
            self.line("nullProcess");
            return Ok(());
        }
        let mut node = b;
        let mut path = path;
        loop {
            let loc = ProcLoc::new(scope.clone(), path.clone());
            match node {
                Behaviour::End => return Ok(()),
                Behaviour::Send { to, expr, cont, .. } => {
                    let name = self.name(MessagePoint::node(loc));
                    let line = format!("{name}@{to}( {} )", self.expr(expr)?);
                    self.line(&line);
                    node = cont;
                }
                Behaviour::Choose { to, cont, .. } => {
                    let line = format!("{}@{to}()", self.name(MessagePoint::node(loc)));
                    self.line(&line);
                    node = cont;
                }
                Behaviour::Recv { target, cont, .. } => {
                    let line = format!("{}( {target} )", self.name(MessagePoint::node(loc)));
                    self.line(&line);
                    node = cont;
                }
                Behaviour::Offer { left, right, .. } => {
                    for (label, index, branch) in [(Label::Left, 0, left), (Label::Right, 1, right)] {
                        let Some(branch) = branch else { continue };
                        let name = self.name(MessagePoint::offer_branch(loc.clone(), label));
                        self.line(&format!("[ {name}() ] {{"));
                        self.depth += 1;
                        self.block(scope, &branch.cont, path.child(index))?;
                        self.depth -= 1;
                        self.line("}");
                    }
                    return Ok(());
                }
                Behaviour::Cond { guard, then, els } => {
                    let guard = self.expr(guard.expr())?;
                    self.line(&format!("if ({guard}) {{"));
                    self.depth += 1;
                    self.block(scope, then, path.child(0))?;
                    self.depth -= 1;
                    self.line("} else {");
                    self.depth += 1;
                    self.block(scope, els, path.child(1))?;
                    self.depth -= 1;
                    self.line("}");
                    return Ok(());
                }
                Behaviour::Call(x) => {
                    self.line(x.as_str());
                    return Ok(());
                }
            }
            path.push(0);
        }
    }
}

/// Procedures reachable from the entry behaviour of `pid`, sorted by name.
fn reachable_procs(p: &ProcProgram, pid: &ProcessId) -> BTreeSet<ProcName> {
    let mut seen = BTreeSet::new();
    let mut todo: Vec<&Behaviour> = p.network.get(pid).into_iter().collect();
    while let Some(b) = todo.pop() {
        b.walk(&mut |_, node| {
            if let Behaviour::Call(x) = node {
                if seen.insert(x.clone()) {
                    if let Some(body) = p.defs.get(&(x.clone(), pid.clone())) {
                        todo.push(body);
                    }
                }
            }
        });
    }
    seen
}

/// Emits the `service` block of network process `pid`.
///
/// Procedures are emitted only if the process can reach them, so every
/// output port refers to a network process.
pub fn emit_service(
    p: &ProcProgram,
    pid: &ProcessId,
    names: &OperationNames,
    cfg: &CodegenConfig,
) -> Result<String, CodegenError> {
    let index = p.network.index_of(pid).expect("pid is a network process");
    let procs = reachable_procs(p, pid);
    let mut scopes = vec![ProcScope::Main(pid.clone())];
    scopes.extend(procs.iter().map(|x| ProcScope::Def(x.clone(), pid.clone())));

    let mut inputs: BTreeSet<&OperationName> = BTreeSet::new();
    // peer -> operations invoked on it
    let mut outputs: Vec<(ProcessId, BTreeSet<&OperationName>)> = Vec::new();
    for scope in &scopes {
        let Some(tree) = p.tree(scope) else { continue };
        tree.walk(&mut |path, node| {
            let loc = ProcLoc::new(scope.clone(), path.clone());
            match node {
                Behaviour::Recv { .. } => {
                    inputs.insert(&names[&MessagePoint::node(loc)]);
                }
                Behaviour::Offer { left, right, .. } => {
                    for (label, branch) in [(Label::Left, left), (Label::Right, right)] {
                        if branch.is_some() {
                            inputs.insert(&names[&MessagePoint::offer_branch(loc.clone(), label)]);
                        }
                    }
                }
                Behaviour::Send { to, .. } | Behaviour::Choose { to, .. } => {
                    let name = &names[&MessagePoint::node(loc)];
                    match outputs.iter_mut().find(|(q, _)| q == to) {
                        Some((_, ops)) => {
                            ops.insert(name);
                        }
                        None => outputs.push((to.clone(), BTreeSet::from([name]))),
                    }
                }
                _ => {}
            }
        });
    }
    outputs.sort_by_key(|(q, _)| p.network.index_of(q));

    let mut em = Emitter {
        pid,
        names,
        out: String::new(),
        depth: 0,
    };
    em.line(&format!("service {pid} {{"));
    em.depth += 1;
    em.line("execution { single }");

    let mut input_port = format!("{pid}Input");
    while outputs.iter().any(|(q, _)| q.as_str() == input_port) {
        input_port.push('_');
    }
    let port = |i: usize| usize::from(cfg.base_port) + i;
    let ports = std::iter::once((input_port, port(index), inputs)).chain(outputs.iter().map(|(q, ops)| {
        let i = p.network.index_of(q).expect("peers of reachable code are network processes");
        (q.to_string(), port(i), ops.clone())
    }));
    for (is_input, (name, number, ops)) in ports.enumerate().map(|(i, x)| (i == 0, x)) {
        em.out.push('\n');
        let kind = if is_input { "inputPort" } else { "outputPort" };
        em.line(&format!("{kind} {name} {{"));
        em.depth += 1;
        em.line(&format!("location: \"socket://localhost:{number}\""));
        em.line("protocol: sodep");
        if !ops.is_empty() {
            let ops: Vec<&str> = ops.iter().map(|o| o.as_str()).collect();
            em.line(&format!("OneWay: {}", ops.join(", ")));
        }
        em.depth -= 1;
        em.line("}");
    }

    for x in &procs {
        let scope = ProcScope::Def(x.clone(), pid.clone());
        let Some(body) = p.tree(&scope) else { continue };
        em.out.push('\n');
        em.line(&format!("define {x} {{"));
        em.depth += 1;
        em.block(&scope, body, TermPath::root())?;
        em.depth -= 1;
        em.line("}");
    }

    em.out.push('\n');
    em.line("main {");
    em.depth += 1;
    let main = p.network.get(pid).expect("pid is a network process");
    em.block(&ProcScope::Main(pid.clone()), main, TermPath::root())?;
    em.depth -= 1;
    em.line("}");
    em.depth -= 1;
    em.line("}");
    Ok(em.out)
}
