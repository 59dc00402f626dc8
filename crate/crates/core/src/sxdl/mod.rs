//! The `.sxdl` surface language: schema extensions, instance assertions,
//! environment snapshots and behavior declarations.
//!
//! ```text
//! document     := statement*
//! statement    := classDecl | instanceDecl | linkDecl | envDecl | behaviorDecl
//! classDecl    := "class" IDENT ":" IDENT ";"
//! instanceDecl := "instance" IDENT ":" IDENT ("=" literal)? "{" member* "}"
//! member       := attrAssign | roleAssign
//! attrAssign   := ("has" IDENT | HASIDENT) IDENT? "=" literal (";" | "{" member* "}")
//!               | ("has" IDENT | HASIDENT) IDENT "{" member* "}"
//! roleAssign   := "role" WORD "->" IDENT ";"
//! linkDecl     := "link" IDENT "." WORD "->" IDENT ";"
//! envDecl      := "environment" "{" instanceDecl* "}"
//! behaviorDecl := "behavior" (IDENT | STRING) "{" attrAssign* "effect" ":" IDENT "{" attrAssign* "}" "}"
//! literal      := STRING | NUMBER | "true" | "false" | "nan"
//! ```
//!
//! A `WORD` is an identifier that may also be a keyword. `HASIDENT` is the
//! fused spelling `hasFPS` of `has FPS`. In the unit form
//! `has Power Watt { ... }` the second identifier is the text value. In a
//! link, a member spelled `has<Class>` asserts an ownership link instead of
//! a role. Identifiers starting with `_` are document-local labels for
//! anonymous instances. Comments run from `//` to the end of the line.
//!
//! A name may only be referenced after its declaration; names that are not
//! declared anywhere in the document are resolved against the KB at load.

mod ast;
mod dump;
mod lexer;
mod loader;
mod parser;

use thiserror::Error;

pub use ast::*;
pub use dump::dump;
pub use loader::{load, LoadError, LoadErrorKind, LoadReport};
pub use parser::parse;

use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: lexical error: {message}")]
    Lexical { line: u32, col: u32, message: String },
    #[error("{line}:{col}: syntax error: unexpected `{found}`, expected {expected}")]
    Syntax {
        line: u32,
        col: u32,
        found: String,
        expected: String,
    },
    #[error("{line}:{col}: `{name}` is referenced before its declaration")]
    ForwardReference { line: u32, col: u32, name: String },
}

impl ParseError {
    pub fn position(&self) -> (u32, u32) {
        match self {
            ParseError::Lexical { line, col, .. }
            | ParseError::Syntax { line, col, .. }
            | ParseError::ForwardReference { line, col, .. } => (*line, *col),
        }
    }
}

/// Parses raw bytes; invalid UTF-8 is a lexical error at the offending byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<Document, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() as u32 + 1;
            let col = valid.rsplit('\n').next().unwrap_or_default().chars().count() as u32 + 1;
            Err(ParseError::Lexical {
                line,
                col,
                message: "invalid UTF-8".into(),
            })
        }
    }
}

#[derive(Debug, Error)]
pub enum SxdlError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Parses and loads `text` in one step.
pub fn load_str(text: &str, kb: &mut KnowledgeBase) -> Result<LoadReport, SxdlError> {
    let doc = parse(text)?;
    Ok(load(&doc, kb)?)
}
