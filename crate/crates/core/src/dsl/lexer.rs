use num_bigint::BigInt;

use super::{ParseError, Pos, SourceSpan};

pub const KEYWORDS: [&str; 13] = [
    "def", "main", "if", "else", "call", "left", "right", "opaque", "true", "false", "and", "or",
    "not",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Keyword(&'static str),
    Int(BigInt),
    Str(String),
    /// Punctuation and operators, including `->`.
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Keyword(k) => format!("`{k}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

// Longest first, so that `->` wins over `-` and `++` over `+`.
const SYMBOLS: [&str; 15] = [
    "->", "++", "==", "{", "}", "(", ")", "[", "]", ".", ";", "@", "+", "-", "*",
];
const LESS: &str = "<";

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }
}

/// Splits `src` into tokens, ending with `Eof`. Lexical errors are
/// collected; the offending characters are skipped.
pub fn lex(file: &str, src: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut cur = Cursor {
        chars: src.char_indices().peekable(),
        src,
        pos: Pos { line: 1, col: 1 },
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let span = |start: Pos, end: Pos| SourceSpan {
        file: file.to_string(),
        start,
        end,
    };

    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if src[cur.offset()..].starts_with("//") {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.pos;
        let offset = cur.offset();
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                tok: Tok::Eof,
                span: span(start, start),
            });
            return (tokens, errors);
        };

        let tok = if c.is_ascii_alphabetic() {
            let mut word = String::new();
            while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                word.push(cur.bump().unwrap());
            }
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                digits.push(cur.bump().unwrap());
            }
            Tok::Int(digits.parse().expect("ascii digits"))
        } else if c == '"' {
            cur.bump();
            match lex_string(&mut cur) {
                Ok(s) => Tok::Str(s),
                Err(msg) => {
                    errors.push(ParseError::message(span(start, cur.pos), msg));
                    continue;
                }
            }
        } else if let Some(sym) = SYMBOLS
            .iter()
            .chain([&LESS])
            .find(|s| src[offset..].starts_with(**s))
        {
            for _ in 0..sym.len() {
                cur.bump();
            }
            Tok::Sym(sym)
        } else {
            cur.bump();
            errors.push(ParseError::message(
                span(start, cur.pos),
                format!("unexpected character {c:?}"),
            ));
            continue;
        };
        tokens.push(Token {
            tok,
            span: span(start, cur.pos),
        });
    }
}

/// Reads a string body after the opening quote, consuming the closing one.
fn lex_string(cur: &mut Cursor<'_>) -> Result<String, String> {
    let mut out = String::new();
    loop {
        match cur.bump() {
            None => return Err("unterminated string literal".into()),
            Some('"') => return Ok(out),
            Some('\\') => match cur.bump() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some('u') => {
                    if cur.bump() != Some('{') {
                        return Err("expected `{` after \\u".into());
                    }
                    let mut hex = String::new();
                    loop {
                        match cur.bump() {
                            Some('}') => break,
                            Some(c) if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
                            _ => return Err("malformed \\u{...} escape".into()),
                        }
                    }
                    let c = u32::from_str_radix(&hex, 16)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| format!("invalid code point \\u{{{hex}}}"))?;
                    out.push(c);
                }
                other => return Err(format!("unknown escape \\{}", other.map(String::from).unwrap_or_default())),
            },
            Some(c) => out.push(c),
        }
    }
}

/// Inverse of the string lexer: a quoted literal for `s`.
pub fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
