use super::lexer::{lex, Tok, Token};
use super::{ParseError, ParsedProgram, SourceSpan};
use crate::cc::{ChorProgram, Choreography, Defs, Eta};
use crate::expr::{BinOp, BoolExpr, Expr, Value};
use crate::ident::{Ann, Label, ProcName, ProcessId, VarName};
use crate::path::{ChorLoc, ChorScope, TermPath};

enum Stmt {
    Act {
        eta: Eta,
        ann: Option<Ann>,
        span: SourceSpan,
    },
    Cond {
        pid: ProcessId,
        guard: BoolExpr,
        then: Block,
        els: Block,
        span: SourceSpan,
    },
    Call {
        name: ProcName,
        span: SourceSpan,
    },
}

impl Stmt {
    fn span(&self) -> &SourceSpan {
        match self {
            Stmt::Act { span, .. } | Stmt::Cond { span, .. } | Stmt::Call { span, .. } => span,
        }
    }
}

struct Block {
    stmts: Vec<Stmt>,
    /// Span of the closing brace.
    close: SourceSpan,
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.tokens[(self.at + n).min(self.tokens.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(ParseError::expected(t.span.clone(), expected, &t.tok))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(t) if t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek().tok, Tok::Keyword(w) if w == k)
    }

    fn sym(&mut self, s: &str) -> PResult<SourceSpan> {
        if self.is_sym(s) {
            Ok(self.next().span)
        } else {
            self.unexpected(&[&format!("`{s}`")])
        }
    }

    fn kw(&mut self, k: &str) -> PResult<SourceSpan> {
        if self.is_kw(k) {
            Ok(self.next().span)
        } else {
            self.unexpected(&[&format!("`{k}`")])
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next().span))
            }
            _ => self.unexpected(&["identifier"]),
        }
    }

    fn pid(&mut self) -> PResult<(ProcessId, SourceSpan)> {
        let (s, span) = self.ident()?;
        Ok((ProcessId::new(s).expect("lexer identifiers are valid"), span))
    }

    fn string(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.unexpected(&["string literal"]),
        }
    }

    /// Skips to the end of the current statement: past the next `;`, or up
    /// to the `}` closing the current block.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match &self.peek().tok {
                Tok::Eof => return,
                Tok::Sym(";") if depth == 0 => {
                    self.next();
                    return;
                }
                Tok::Sym("{") => depth += 1,
                Tok::Sym("}") => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    if depth == 0 {
                        self.next();
                        if !self.is_kw("else") {
                            return;
                        }
                        continue;
                    }
                }
                _ => {}
            }
            self.next();
        }
    }

    fn block(&mut self) -> PResult<Block> {
        self.sym("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.is_sym("}") {
                let close = self.next().span;
                return Ok(Block { stmts, close });
            }
            if self.peek().tok == Tok::Eof {
                return self.unexpected(&["`}`"]);
            }
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
        }
    }

    fn annotation(&mut self) -> PResult<Option<Ann>> {
        if !self.is_sym("@") {
            return Ok(None);
        }
        self.next();
        let span = self.peek().span.clone();
        let text = self.string()?;
        Ann::new(text)
            .map(Some)
            .map_err(|_| ParseError::message(span, "annotations must not be empty".into()))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span.clone();
        match self.peek().tok.clone() {
            Tok::Keyword("if") => {
                self.next();
                let (pid, _) = self.pid()?;
                self.sym(".")?;
                let guard_start = self.peek().span.clone();
                let guard = self.expr()?;
                let guard_span = guard_start.to(&self.tokens[self.at - 1].span);
                let guard = BoolExpr::new(guard).map_err(|e| {
                    ParseError::message(guard_span, format!("guard is not boolean: {e}"))
                })?;
                let then = self.block()?;
                self.kw("else")?;
                let els = self.block()?;
                let span = start.to(&els.close);
                Ok(Stmt::Cond {
                    pid,
                    guard,
                    then,
                    els,
                    span,
                })
            }
            Tok::Keyword("call") => {
                self.next();
                let (name, _) = self.ident()?;
                let end = self.sym(";")?;
                Ok(Stmt::Call {
                    name: ProcName::new(name).expect("lexer identifiers are valid"),
                    span: start.to(&end),
                })
            }
            Tok::Ident(_) => {
                let (sender, _) = self.pid()?;
                let eta = if self.is_sym(".") {
                    self.next();
                    let expr = self.expr()?;
                    self.sym("->")?;
                    let (receiver, _) = self.pid()?;
                    self.sym(".")?;
                    let (target, _) = self.ident()?;
                    Eta::Com {
                        sender,
                        expr,
                        receiver,
                        target: VarName::new(target).expect("lexer identifiers are valid"),
                    }
                } else if self.is_sym("->") {
                    self.next();
                    let (target, _) = self.pid()?;
                    self.sym("[")?;
                    let label = if self.is_kw("left") {
                        Label::Left
                    } else if self.is_kw("right") {
                        Label::Right
                    } else {
                        return self.unexpected(&["`left`", "`right`"]);
                    };
                    self.next();
                    self.sym("]")?;
                    Eta::Sel {
                        chooser: sender,
                        target,
                        label,
                    }
                } else {
                    return self.unexpected(&["`.`", "`->`"]);
                };
                let ann = self.annotation()?;
                let end = self.sym(";")?;
                Ok(Stmt::Act {
                    eta,
                    ann,
                    span: start.to(&end),
                })
            }
            _ => self.unexpected(&["identifier", "`if`", "`call`", "`}`"]),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(0)
    }

    /// Operators by binding strength, loosest first.
    const LEVELS: [&'static [(&'static str, BinOp)]; 5] = [
        &[("or", BinOp::Or)],
        &[("and", BinOp::And)],
        &[("==", BinOp::Eq), ("<", BinOp::Lt)],
        &[("+", BinOp::Add), ("-", BinOp::Sub), ("++", BinOp::Concat)],
        &[("*", BinOp::Mul)],
    ];

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        if level == Self::LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = Self::LEVELS[level].iter().find(|(s, _)| match &self.peek().tok {
                Tok::Sym(t) | Tok::Keyword(t) => t == s,
                _ => false,
            });
            let Some(&(_, op)) = op else { return Ok(lhs) };
            self.next();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::binop(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            self.next();
            return Ok(Expr::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek().tok.clone();
        match tok {
            Tok::Int(n) => {
                self.next();
                Ok(Expr::Lit(Value::Int(n)))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.next();
                let Tok::Int(n) = self.next().tok else { unreachable!() };
                Ok(Expr::Lit(Value::Int(-n)))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Expr::Lit(Value::Str(s)))
            }
            Tok::Keyword("true") => {
                self.next();
                Ok(Expr::Lit(Value::Bool(true)))
            }
            Tok::Keyword("false") => {
                self.next();
                Ok(Expr::Lit(Value::Bool(false)))
            }
            Tok::Keyword("opaque") => {
                self.next();
                self.sym("(")?;
                let text = self.string()?;
                self.sym(")")?;
                Ok(Expr::Opaque(text))
            }
            Tok::Ident(x) => {
                self.next();
                Ok(Expr::Var(VarName::new(x).expect("lexer identifiers are valid")))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            _ => self.unexpected(&["expression"]),
        }
    }

    fn program(&mut self) -> (Vec<(ProcName, Block)>, Option<Block>) {
        let mut defs = Vec::new();
        let mut main: Option<Block> = None;
        loop {
            let t = self.peek().clone();
            let result = match t.tok {
                Tok::Eof => break,
                Tok::Keyword("def") => {
                    self.next();
                    self.ident().and_then(|(name, _)| {
                        let block = self.block()?;
                        defs.push((ProcName::new(name).expect("lexer identifiers are valid"), block));
                        Ok(())
                    })
                }
                Tok::Keyword("main") => {
                    self.next();
                    self.block().and_then(|block| {
                        if main.is_some() {
                            return Err(ParseError::message(t.span.clone(), "duplicate `main`".into()));
                        }
                        main = Some(block);
                        Ok(())
                    })
                }
                _ => self.unexpected(&["`def`", "`main`"]),
            };
            if let Err(e) = result {
                self.errors.push(e);
                // Resynchronise on the next top-level keyword.
                while !matches!(self.peek().tok, Tok::Eof | Tok::Keyword("def" | "main")) {
                    self.next();
                }
            }
        }
        if main.is_none() && self.errors.is_empty() {
            let span = self.peek().span.clone();
            self.errors
                .push(ParseError::message(span, "missing `main` block".into()));
        }
        (defs, main)
    }
}

/// Statements still to run once the current block is exhausted, innermost
/// first, each with the closing brace of its block.
type Rest<'a> = [(&'a [Stmt], &'a SourceSpan)];

struct Builder<'a> {
    spans: &'a mut std::collections::BTreeMap<ChorLoc, SourceSpan>,
    errors: &'a mut Vec<ParseError>,
    scope: ChorScope,
}

impl Builder<'_> {
    fn build(&mut self, cur: &[Stmt], close: &SourceSpan, outer: &Rest<'_>, path: TermPath) -> Choreography {
        let loc = ChorLoc {
            scope: self.scope.clone(),
            path: path.clone(),
        };
        let Some((first, rest)) = cur.split_first() else {
            return match outer.split_first() {
                Some(((stmts, close), outer)) => self.build(stmts, close, outer, path),
                None => {
                    self.spans.insert(loc, close.clone());
                    Choreography::End
                }
            };
        };
        self.spans.insert(loc, first.span().clone());
        match first {
            Stmt::Act { eta, ann, .. } => Choreography::Interaction {
                eta: eta.clone(),
                ann: ann.clone(),
                cont: Box::new(self.build(rest, close, outer, path.child(0))),
            },
            Stmt::Cond {
                pid,
                guard,
                then,
                els,
                ..
            } => {
                let mut stack: Vec<(&[Stmt], &SourceSpan)> = vec![(rest, close)];
                stack.extend_from_slice(outer);
                Choreography::Cond {
                    decider: pid.clone(),
                    guard: guard.clone(),
                    then: Box::new(self.build(&then.stmts, &then.close, &stack, path.child(0))),
                    els: Box::new(self.build(&els.stmts, &els.close, &stack, path.child(1))),
                }
            }
            Stmt::Call { name, .. } => {
                let trailing = rest.first().or_else(|| outer.iter().find_map(|(s, _)| s.first()));
                if let Some(next) = trailing {
                    let e = ParseError::message(
                        next.span().clone(),
                        format!("statement after `call {name}` is unreachable"),
                    );
                    if !self.errors.contains(&e) {
                        self.errors.push(e);
                    }
                }
                Choreography::Call(name.clone())
            }
        }
    }
}

pub fn parse_file(file: &str, src: &str) -> Result<ParsedProgram, Vec<ParseError>> {
    let (tokens, lex_errors) = lex(file, src);
    let mut parser = Parser {
        tokens,
        at: 0,
        errors: lex_errors,
    };
    let (defs, main) = parser.program();
    let mut errors = parser.errors;
    let mut spans = std::collections::BTreeMap::new();
    let mut out_defs = Defs::default();
    for (name, block) in &defs {
        let body = Builder {
            spans: &mut spans,
            errors: &mut errors,
            scope: ChorScope::Def(name.clone()),
        }
        .build(&block.stmts, &block.close, &[], TermPath::root());
        out_defs.push(name.clone(), body);
    }
    let main = main.map(|block| {
        Builder {
            spans: &mut spans,
            errors: &mut errors,
            scope: ChorScope::Main,
        }
        .build(&block.stmts, &block.close, &[], TermPath::root())
    });
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span.start);
        return Err(errors);
    }
    Ok(ParsedProgram {
        program: ChorProgram { defs: out_defs, main: main.expect("no errors means main was parsed") },
        spans,
    })
}
