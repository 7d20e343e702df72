//! JSON form of process programs.
//!
//! Every behaviour and expression is an object with a `"kind"` tag. Keys
//! are written in sorted order and integers as decimal strings, so a dump
//! is byte-stable. Loading checks the schema and reports violations with
//! the JSON path of the offending value.

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::expr::{BinOp, BoolExpr, Expr, Value};
use crate::ident::{Ann, Label, ProcName, ProcessId, VarName};
use crate::sp::{Behaviour, Branch, Network, ProcDefs, ProcProgram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct IrError {
    /// JSON path, e.g. `$.network[0].behaviour.cont`.
    pub path: String,
    pub message: String,
}

fn ann_json(ann: &Option<Ann>) -> Json {
    ann.as_ref().map_or(Json::Null, |a| json!(a.as_str()))
}

pub fn expr_to_json(e: &Expr) -> Json {
    match e {
        Expr::Lit(Value::Int(n)) => json!({"kind": "lit", "type": "int", "value": n.to_string()}),
        Expr::Lit(Value::Str(s)) => json!({"kind": "lit", "type": "str", "value": s}),
        Expr::Lit(Value::Bool(b)) => json!({"kind": "lit", "type": "bool", "value": b}),
        Expr::Var(x) => json!({"kind": "var", "name": x.as_str()}),
        Expr::BinOp(op, l, r) => json!({
            "kind": "binop",
            "op": op.symbol(),
            "lhs": expr_to_json(l),
            "rhs": expr_to_json(r),
        }),
        Expr::Not(inner) => json!({"kind": "not", "arg": expr_to_json(inner)}),
        Expr::Opaque(text) => json!({"kind": "opaque", "text": text}),
    }
}

pub fn behaviour_to_json(b: &Behaviour) -> Json {
    let branch = |br: &Option<Branch>| {
        br.as_ref().map_or(Json::Null, |br| {
            json!({"ann": ann_json(&br.ann), "cont": behaviour_to_json(&br.cont)})
        })
    };
    match b {
        Behaviour::End => json!({"kind": "end"}),
        Behaviour::Send { to, expr, ann, cont } => json!({
            "kind": "send",
            "to": to.as_str(),
            "expr": expr_to_json(expr),
            "ann": ann_json(ann),
            "cont": behaviour_to_json(cont),
        }),
        Behaviour::Recv {
            from,
            target,
            ann,
            cont,
        } => json!({
            "kind": "recv",
            "from": from.as_str(),
            "target": target.as_str(),
            "ann": ann_json(ann),
            "cont": behaviour_to_json(cont),
        }),
        Behaviour::Choose {
            to,
            label,
            ann,
            cont,
        } => json!({
            "kind": "choose",
            "to": to.as_str(),
            "label": label.as_str(),
            "ann": ann_json(ann),
            "cont": behaviour_to_json(cont),
        }),
        Behaviour::Offer { from, left, right } => json!({
            "kind": "offer",
            "from": from.as_str(),
            "left": branch(left),
            "right": branch(right),
        }),
        Behaviour::Cond { guard, then, els } => json!({
            "kind": "cond",
            "guard": expr_to_json(guard.expr()),
            "then": behaviour_to_json(then),
            "else": behaviour_to_json(els),
        }),
        Behaviour::Call(x) => json!({"kind": "call", "proc": x.as_str()}),
    }
}

pub fn program_to_json(p: &ProcProgram) -> Json {
    let network: Vec<Json> = p
        .network
        .iter()
        .map(|(pid, b)| json!({"pid": pid.as_str(), "behaviour": behaviour_to_json(b)}))
        .collect();
    let defs: Vec<Json> = p
        .defs
        .iter()
        .map(|((x, pid), b)| json!({"proc": x.as_str(), "pid": pid.as_str(), "body": behaviour_to_json(b)}))
        .collect();
    json!({"network": network, "defs": defs})
}

/// Pretty JSON text with sorted keys, ending in a newline.
pub fn dump_json(value: &Json) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    text.push('\n');
    text
}

pub fn dump_ir(p: &ProcProgram) -> String {
    dump_json(&program_to_json(p))
}

struct Decoder {
    errors: Vec<IrError>,
}

impl Decoder {
    fn fail<T>(&mut self, path: &str, message: impl Into<String>) -> Option<T> {
        self.errors.push(IrError {
            path: path.to_string(),
            message: message.into(),
        });
        None
    }

    /// The fields of an object, after checking that exactly `fields` are
    /// present.
    fn object<'j>(&mut self, v: &'j Json, path: &str, fields: &[&str]) -> Option<&'j Map<String, Json>> {
        let Some(obj) = v.as_object() else {
            return self.fail(path, "expected an object");
        };
        let mut ok = true;
        for f in fields {
            if !obj.contains_key(*f) {
                ok = false;
                self.fail::<()>(path, format!("missing field `{f}`"));
            }
        }
        for k in obj.keys() {
            if !fields.contains(&k.as_str()) {
                ok = false;
                self.fail::<()>(path, format!("unknown field `{k}`"));
            }
        }
        ok.then_some(obj)
    }

    fn string<'j>(&mut self, obj: &'j Map<String, Json>, path: &str, field: &str) -> Option<&'j str> {
        match obj[field].as_str() {
            Some(s) => Some(s),
            None => self.fail(&format!("{path}.{field}"), "expected a string"),
        }
    }

    fn ident<T, E>(&mut self, obj: &Map<String, Json>, path: &str, field: &str, make: impl Fn(String) -> Result<T, E>) -> Option<T> {
        let s = self.string(obj, path, field)?;
        match make(s.to_string()) {
            Ok(x) => Some(x),
            Err(_) => self.fail(&format!("{path}.{field}"), format!("{s:?} is not an identifier")),
        }
    }

    fn ann(&mut self, obj: &Map<String, Json>, path: &str) -> Option<Option<Ann>> {
        match &obj["ann"] {
            Json::Null => Some(None),
            Json::String(s) => match Ann::new(s.clone()) {
                Ok(a) => Some(Some(a)),
                Err(_) => self.fail(&format!("{path}.ann"), "annotations must not be empty"),
            },
            _ => self.fail(&format!("{path}.ann"), "expected a string or null"),
        }
    }

    fn kind<'j>(&mut self, v: &'j Json, path: &str) -> Option<&'j str> {
        match v.get("kind") {
            Some(Json::String(k)) => Some(k),
            Some(_) => self.fail(&format!("{path}.kind"), "expected a string"),
            None if v.is_object() => self.fail(path, "missing field `kind`"),
            None => self.fail(path, "expected an object"),
        }
    }

    fn expr(&mut self, v: &Json, path: &str) -> Option<Expr> {
        let kind = self.kind(v, path)?;
        match kind {
            "lit" => {
                let obj = self.object(v, path, &["kind", "type", "value"])?;
                let vpath = format!("{path}.value");
                match (obj["type"].as_str(), &obj["value"]) {
                    (Some("int"), Json::String(s)) => match s.parse() {
                        Ok(n) => Some(Expr::Lit(Value::Int(n))),
                        Err(_) => self.fail(&vpath, format!("{s:?} is not an integer")),
                    },
                    (Some("str"), Json::String(s)) => Some(Expr::Lit(Value::Str(s.clone()))),
                    (Some("bool"), Json::Bool(b)) => Some(Expr::Lit(Value::Bool(*b))),
                    (Some("int" | "str" | "bool"), _) => self.fail(&vpath, "value does not match its type"),
                    _ => self.fail(&format!("{path}.type"), "expected \"int\", \"str\" or \"bool\""),
                }
            }
            "var" => {
                let obj = self.object(v, path, &["kind", "name"])?;
                self.ident(obj, path, "name", VarName::new).map(Expr::Var)
            }
            "binop" => {
                let obj = self.object(v, path, &["kind", "op", "lhs", "rhs"])?;
                let op = self.string(obj, path, "op").and_then(|s| match BinOp::from_symbol(s) {
                    Some(op) => Some(op),
                    None => self.fail(&format!("{path}.op"), format!("unknown operator {s:?}")),
                });
                let l = self.expr(&obj["lhs"], &format!("{path}.lhs"));
                let r = self.expr(&obj["rhs"], &format!("{path}.rhs"));
                Some(Expr::binop(op?, l?, r?))
            }
            "not" => {
                let obj = self.object(v, path, &["kind", "arg"])?;
                self.expr(&obj["arg"], &format!("{path}.arg")).map(Expr::not)
            }
            "opaque" => {
                let obj = self.object(v, path, &["kind", "text"])?;
                self.string(obj, path, "text").map(Expr::opaque)
            }
            other => self.fail(&format!("{path}.kind"), format!("unknown expression kind {other:?}")),
        }
    }

    fn branch(&mut self, v: &Json, path: &str) -> Option<Option<Branch>> {
        if v.is_null() {
            return Some(None);
        }
        let obj = self.object(v, path, &["ann", "cont"])?;
        let ann = self.ann(obj, path);
        let cont = self.behaviour(&obj["cont"], &format!("{path}.cont"));
        Some(Some(Branch::new(ann?, cont?)))
    }

    fn behaviour(&mut self, v: &Json, path: &str) -> Option<Behaviour> {
        let kind = self.kind(v, path)?;
        let cont = |d: &mut Self, obj: &Map<String, Json>| d.behaviour(&obj["cont"], &format!("{path}.cont"));
        match kind {
            "end" => {
                self.object(v, path, &["kind"])?;
                Some(Behaviour::End)
            }
            "send" => {
                let obj = self.object(v, path, &["kind", "to", "expr", "ann", "cont"])?;
                let to = self.ident(obj, path, "to", ProcessId::new);
                let expr = self.expr(&obj["expr"], &format!("{path}.expr"));
                let ann = self.ann(obj, path);
                let cont = cont(self, obj);
                Some(Behaviour::send(to?, expr?, ann?, cont?))
            }
            "recv" => {
                let obj = self.object(v, path, &["kind", "from", "target", "ann", "cont"])?;
                let from = self.ident(obj, path, "from", ProcessId::new);
                let target = self.ident(obj, path, "target", VarName::new);
                let ann = self.ann(obj, path);
                let cont = cont(self, obj);
                Some(Behaviour::recv(from?, target?, ann?, cont?))
            }
            "choose" => {
                let obj = self.object(v, path, &["kind", "to", "label", "ann", "cont"])?;
                let to = self.ident(obj, path, "to", ProcessId::new);
                let label = self.string(obj, path, "label").and_then(|s| match s {
                    "left" => Some(Label::Left),
                    "right" => Some(Label::Right),
                    _ => self.fail(&format!("{path}.label"), "expected \"left\" or \"right\""),
                });
                let ann = self.ann(obj, path);
                let cont = cont(self, obj);
                Some(Behaviour::choose(to?, label?, ann?, cont?))
            }
            "offer" => {
                let obj = self.object(v, path, &["kind", "from", "left", "right"])?;
                let from = self.ident(obj, path, "from", ProcessId::new);
                let left = self.branch(&obj["left"], &format!("{path}.left"));
                let right = self.branch(&obj["right"], &format!("{path}.right"));
                let (from, left, right) = (from?, left?, right?);
                if left.is_none() && right.is_none() {
                    return self.fail(path, "ZeroBranchOffer: an offer needs at least one branch");
                }
                Some(Behaviour::Offer { from, left, right })
            }
            "cond" => {
                let obj = self.object(v, path, &["kind", "guard", "then", "else"])?;
                let gpath = format!("{path}.guard");
                let guard = self.expr(&obj["guard"], &gpath).and_then(|g| match BoolExpr::new(g) {
                    Ok(g) => Some(g),
                    Err(e) => self.fail(&gpath, format!("guard is not boolean: {e}")),
                });
                let then = self.behaviour(&obj["then"], &format!("{path}.then"));
                let els = self.behaviour(&obj["else"], &format!("{path}.else"));
                Some(Behaviour::cond(guard?, then?, els?))
            }
            "call" => {
                let obj = self.object(v, path, &["kind", "proc"])?;
                self.ident(obj, path, "proc", ProcName::new).map(Behaviour::Call)
            }
            other => self.fail(&format!("{path}.kind"), format!("unknown behaviour kind {other:?}")),
        }
    }

    fn program(&mut self, v: &Json) -> Option<ProcProgram> {
        let obj = self.object(v, "$", &["network", "defs"])?;
        let mut network = Vec::new();
        let mut defs = ProcDefs::new();
        match obj["network"].as_array() {
            None => self.fail::<()>("$.network", "expected an array").unwrap_or(()),
            Some(entries) => {
                for (i, e) in entries.iter().enumerate() {
                    let path = format!("$.network[{i}]");
                    let Some(o) = self.object(e, &path, &["pid", "behaviour"]) else { continue };
                    let pid = self.ident(o, &path, "pid", ProcessId::new);
                    let b = self.behaviour(&o["behaviour"], &format!("{path}.behaviour"));
                    if let (Some(pid), Some(b)) = (pid, b) {
                        network.push((pid, b));
                    }
                }
            }
        }
        match obj["defs"].as_array() {
            None => self.fail::<()>("$.defs", "expected an array").unwrap_or(()),
            Some(entries) => {
                for (i, e) in entries.iter().enumerate() {
                    let path = format!("$.defs[{i}]");
                    let Some(o) = self.object(e, &path, &["proc", "pid", "body"]) else { continue };
                    let x = self.ident(o, &path, "proc", ProcName::new);
                    let pid = self.ident(o, &path, "pid", ProcessId::new);
                    let b = self.behaviour(&o["body"], &format!("{path}.body"));
                    if let (Some(x), Some(pid), Some(b)) = (x, pid, b) {
                        if defs.insert((x.clone(), pid.clone()), b).is_some() {
                            self.fail::<()>(&path, format!("duplicate definition of {x} for {pid}"));
                        }
                    }
                }
            }
        }
        Some(ProcProgram {
            defs,
            network: Network::new(network),
        })
    }
}

/// Parses JSON text without a nesting limit; behaviour chains nest one
/// level per action.
pub fn parse_json(text: &str) -> Result<Json, IrError> {
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let value = serde::Deserialize::deserialize(&mut de).and_then(|v: Json| de.end().map(|()| v));
    value.map_err(|e| IrError {
        path: "$".into(),
        message: format!("invalid JSON: {e}"),
    })
}

pub fn behaviour_from_json(v: &Json) -> Result<Behaviour, Vec<IrError>> {
    let mut d = Decoder { errors: Vec::new() };
    match d.behaviour(v, "$") {
        Some(b) if d.errors.is_empty() => Ok(b),
        _ => Err(d.errors),
    }
}

pub fn load_ir(text: &str) -> Result<ProcProgram, Vec<IrError>> {
    let value = parse_json(text).map_err(|e| vec![e])?;
    let mut d = Decoder { errors: Vec::new() };
    match d.program(&value) {
        Some(p) if d.errors.is_empty() => Ok(p),
        _ => Err(d.errors),
    }
}
