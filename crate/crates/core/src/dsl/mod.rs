//! A line-oriented netlist language for two-port optical chains.
//!
//! ```text
//! file      = { line }
//! line      = [ "chain" NAME ":" element { "->" element } ] [ "#" comment ] NEWLINE
//! element   = "bs" "(" expr ")"
//!           | "phase" ( "upper" | "lower" | "both" ) "(" expr ")"
//!           | "mirror" [ "(" expr ")" ]
//!           | NAME                          (a previously defined chain)
//! expr      = term { ("+" | "-") term }
//! term      = unary { ("*" | "/") unary }
//! unary     = "-" unary | primary
//! primary   = NUMBER | "pi" | SYMBOL | "(" expr ")"
//! ```
//!
//! Elements are listed in propagation order. The compiled matrix is the
//! product in reverse textual order, so the leftmost element acts first on
//! the input field. Expressions are real and in radians (or a reflectance
//! for `bs`); free symbols such as `psi`, `phi` and `zeta` are supplied at
//! compile time through [`Bindings`].
//!
//! A chain may only reference chains defined above it, which rules out
//! cycles. Redefining a name shadows the earlier chain for everything below.

mod ast;
mod check;
mod compile;
mod lexer;
mod parser;

pub use ast::{BinOp, Chain, CircuitAst, Element, ElementKind, Expr, Span};
pub use check::check;
pub use compile::{compile, compile_chain_at, Bindings};
pub use lexer::{Lexer, Token, TokenKind};
pub use parser::parse;

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A message tied to a 1-based line and column of the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}
