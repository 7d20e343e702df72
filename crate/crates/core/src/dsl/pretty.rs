use super::lexer::quote;
use crate::cc::{ChorProgram, Choreography, Eta};
use crate::expr::{Expr, Value};

const INDENT: &str = "  ";

/// Renders an expression; binary operations are always parenthesised.
pub fn pretty_expr(e: &Expr) -> String {
    match e {
        Expr::Lit(Value::Int(n)) => n.to_string(),
        Expr::Lit(Value::Bool(b)) => b.to_string(),
        Expr::Lit(Value::Str(s)) => quote(s),
        Expr::Var(x) => x.to_string(),
        Expr::Opaque(text) => format!("opaque({})", quote(text)),
        Expr::Not(inner) => format!("not {}", pretty_expr(inner)),
        Expr::BinOp(op, l, r) => format!("({} {op} {})", pretty_expr(l), pretty_expr(r)),
    }
}

fn statements(c: &Choreography, depth: usize, out: &mut String) {
    let pad = INDENT.repeat(depth);
    let mut node = c;
    loop {
        match node {
            Choreography::End => return,
            Choreography::Interaction { eta, ann, cont } => {
                out.push_str(&pad);
                match eta {
                    Eta::Com {
                        sender,
                        expr,
                        receiver,
                        target,
                    } => out.push_str(&format!("{sender}.{} -> {receiver}.{target}", pretty_expr(expr))),
                    Eta::Sel {
                        chooser,
                        target,
                        label,
                    } => out.push_str(&format!("{chooser} -> {target} [{label}]")),
                }
                if let Some(a) = ann {
                    out.push_str(&format!(" @ {}", quote(a.as_str())));
                }
                out.push_str(";\n");
                node = cont;
            }
            Choreography::Cond {
                decider,
                guard,
                then,
                els,
            } => {
                out.push_str(&format!("{pad}if {decider}.{} {{\n", pretty_expr(guard.expr())));
                statements(then, depth + 1, out);
                out.push_str(&format!("{pad}}} else {{\n"));
                statements(els, depth + 1, out);
                out.push_str(&format!("{pad}}}\n"));
                return;
            }
            Choreography::Call(x) => {
                out.push_str(&format!("{pad}call {x};\n"));
                return;
            }
        }
    }
}

/// Renders a program in the surface syntax. Parsing the result gives back
/// `p` whenever its identifiers avoid the keywords.
pub fn pretty(p: &ChorProgram) -> String {
    let mut out = String::new();
    for (name, body) in p.defs.iter() {
        out.push_str(&format!("def {name} {{\n"));
        statements(body, 1, &mut out);
        out.push_str("}\n\n");
    }
    out.push_str("main {\n");
    statements(&p.main, 1, &mut out);
    out.push_str("}\n");
    out
}
