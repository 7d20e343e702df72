//! Textual syntax for choreographies.
//!
//! ```text
//! program := def* "main" block
//! def     := "def" IDENT block
//! block   := "{" stmt* "}"
//! stmt    := pid "." expr "->" pid "." IDENT annot? ";"
//!          | pid "->" pid "[" ("left" | "right") "]" annot? ";"
//!          | "if" pid "." expr block "else" block
//!          | "call" IDENT ";"
//! annot   := "@" STRING
//! ```
//!
//! Statements following an `if` run after either branch, so they are
//! copied into both. A `call` must be the last statement on its path.
//! Binary operators bind, loosest first: `or`, `and`, `==` and `<`,
//! `+` `-` `++`, `*`; `not` is prefix. `opaque("...")` holds text that is
//! only ever pasted into generated code.

mod lexer;
mod parser;
mod pretty;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cc::ChorProgram;
use crate::path::ChorLoc;

pub use lexer::KEYWORDS;
pub use parser::parse_file;
pub use pretty::{pretty, pretty_expr};

/// A 1-based line and column; columns count characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// A source range; `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub start: Pos,
    pub end: Pos,
}

impl SourceSpan {
    /// From the start of `self` to the end of `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start: self.start,
            end: other.end,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start.line, self.start.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// Tokens that would have been accepted; empty for non-syntax errors.
    pub expected: Vec<String>,
    pub found: Option<String>,
}

impl ParseError {
    pub(crate) fn message(span: SourceSpan, message: String) -> Self {
        Self {
            span,
            message,
            expected: Vec::new(),
            found: None,
        }
    }

    pub(crate) fn expected(span: SourceSpan, expected: &[&str], found: &lexer::Tok) -> Self {
        let found = found.describe();
        let list = match expected {
            [] => String::new(),
            [one] => one.to_string(),
            [init @ .., last] => format!("{} or {last}", init.join(", ")),
        };
        Self {
            span,
            message: format!("expected {list}, found {found}"),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: Some(found),
        }
    }
}

/// A parsed program with the source range of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProgram {
    pub program: ChorProgram,
    /// Interactions, conditionals and calls map to their statement; `End`
    /// maps to the closing brace where control leaves the program.
    pub spans: BTreeMap<ChorLoc, SourceSpan>,
}

impl ParsedProgram {
    pub fn span(&self, loc: &ChorLoc) -> Option<&SourceSpan> {
        self.spans.get(loc)
    }
}

/// Parses `source`, naming it `<input>` in spans.
pub fn parse(source: &str) -> Result<ParsedProgram, Vec<ParseError>> {
    parse_file("<input>", source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::{validate_program, Choreography, WellFormednessError};
    use crate::path::{ChorLoc, TermPath};
    use crate::samples::auth_program;

    pub(crate) const AUTH: &str = r#"main {
  Client.credentials -> Ip.credentials @ "authenticate";
  if Ip.opaque("check(credentials)") {
    Ip -> Server [left] @ "authOk";
    Ip -> Client [left] @ "authOk";
    Server.opaque("makeToken") -> Client.token @ "acceptToken";
  } else {
    Ip -> Server [right] @ "authFail";
    Ip -> Client [right] @ "authFail";
  }
}
"#;

    fn at(line: usize, col: usize) -> Pos {
        Pos { line, col }
    }

    #[test]
    fn auth_parses_to_reference_term() {
        let parsed = parse(AUTH).unwrap();
        assert_eq!(parsed.program, auth_program());
    }

    #[test]
    fn every_node_has_a_span() {
        let parsed = parse(AUTH).unwrap();
        parsed.program.main.walk(&mut |path, _| {
            assert!(parsed.span(&ChorLoc::main(path.clone())).is_some(), "{path}");
        });
        let cond = parsed.span(&ChorLoc::main(vec![0])).unwrap();
        assert_eq!((cond.start, cond.end), (at(3, 3), at(10, 4)));
        let end = parsed.span(&ChorLoc::main(vec![0, 1, 0, 0])).unwrap();
        assert_eq!(end.start, at(11, 1));
    }

    #[test]
    fn empty_main() {
        assert_eq!(parse("main { }").unwrap().program.main, Choreography::End);
    }

    #[test]
    fn self_communication_is_a_validation_error() {
        let parsed = parse("main { a.x -> a.y; }").unwrap();
        assert!(matches!(
            validate_program(&parsed.program)[..],
            [WellFormednessError::SelfCommunication { .. }]
        ));
    }

    #[test]
    fn trailing_statements_join_both_branches() {
        let parsed = parse("main { if p.b { p -> q [left]; } else { p -> q [right]; } p.1 -> q.x; }").unwrap();
        let then = parsed.program.main.at(&TermPath::from(vec![0, 0])).unwrap();
        let els = parsed.program.main.at(&TermPath::from(vec![1, 0])).unwrap();
        assert_eq!(then, els);
        assert_eq!(
            parsed.span(&ChorLoc::main(vec![0, 0])),
            parsed.span(&ChorLoc::main(vec![1, 0]))
        );
    }

    #[test]
    fn statement_after_call_is_rejected() {
        let errors = parse("def X { } main { call X; p.1 -> q.x; }").unwrap_err();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].span.start, at(1, 26));
    }

    #[test]
    fn errors_carry_expectations_and_recover() {
        let errors = parse("main {\n  p.1 -> q;\n  p -> q [up];\n  p.2 -> q.y;\n}").unwrap_err();
        assert_eq!(errors.len(), 2);
        assert_eq!(errors[0].span.start, at(2, 11));
        assert_eq!(errors[0].expected, ["`.`"]);
        assert_eq!(errors[0].found.as_deref(), Some("`;`"));
        assert_eq!(errors[1].span.start, at(3, 11));
        assert_eq!(errors[1].expected, ["`left`", "`right`"]);
        assert_eq!(errors[1].to_string(), "<input>:3:11: expected `left` or `right`, found identifier `up`");
    }

    #[test]
    fn non_boolean_guard_is_rejected() {
        let errors = parse("main { if p.(1 + 2) { } else { } }").unwrap_err();
        assert!(errors[0].message.starts_with("guard is not boolean"));
    }

    #[test]
    fn missing_main() {
        let errors = parse("def X { }").unwrap_err();
        assert_eq!(errors[0].message, "missing `main` block");
    }

    #[test]
    fn precedence() {
        let parsed = parse("main { p.not a == b or c and 1 + 2 * -3 < x -> q.y; }").unwrap();
        let Choreography::Interaction { eta, .. } = &parsed.program.main else { panic!() };
        let crate::cc::Eta::Com { expr, .. } = eta else { panic!() };
        assert_eq!(
            pretty_expr(expr),
            "((not a == b) or (c and ((1 + (2 * -3)) < x)))"
        );
    }
}
