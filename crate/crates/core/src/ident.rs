//! Identifier newtypes shared by both calculi.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier `{0}`: expected [A-Za-z][A-Za-z0-9_]*")]
pub struct InvalidIdent(pub String);

/// Returns true if `s` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

macro_rules! ident_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self, InvalidIdent> {
                let name = name.into();
                if is_ident(&name) {
                    Ok(Self(name))
                } else {
                    Err(InvalidIdent(name))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = InvalidIdent;

            fn try_from(s: &str) -> Result<Self, InvalidIdent> {
                Self::new(s)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

ident_type!(
    /// Name of a process (an endpoint of the choreography).
    ProcessId
);
ident_type!(
    /// Name of a memory cell in a process's local store.
    VarName
);
ident_type!(
    /// Name of a procedure (recursion variable).
    ProcName
);

/// Selection label. Only the binary choice exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Left,
    Right,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Left => "left",
            Label::Right => "right",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("annotations must be nonempty")]
pub struct EmptyAnnotation;

/// Opaque metadata attached to an interaction. Unannotated interactions
/// carry `None` wherever an `Option<Ann>` appears.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ann(String);

impl Ann {
    pub fn new(text: impl Into<String>) -> Result<Self, EmptyAnnotation> {
        let text = text.into();
        if text.is_empty() {
            Err(EmptyAnnotation)
        } else {
            Ok(Self(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ident_lexical_rule() {
        assert!(is_ident("Client"));
        assert!(is_ident("a_1"));
        assert!(!is_ident(""));
        assert!(!is_ident("1a"));
        assert!(!is_ident("_a"));
        assert!(!is_ident("a-b"));
        assert!(ProcessId::new("Ip").is_ok());
        assert_eq!(VarName::new("x y"), Err(InvalidIdent("x y".into())));
    }

    #[test]
    fn annotation_nonempty() {
        assert!(Ann::new("").is_err());
        assert_eq!(Ann::new("authOk").unwrap().as_str(), "authOk");
    }
}
