//! Textual front end.
//!
//! Three file kinds share one lexer:
//!
//! * models (`.psm`): domains, shared variables, constants, the tick horizon
//!   and machines;
//! * properties (`.pprop`): probability and deadlock-freedom queries;
//! * configurations (`.pcfg`): named constant bindings.
//!
//! Identifiers are ASCII letters, digits and underscores starting with a
//! letter; `//` starts a comment that runs to the end of the line.

mod config;
mod cursor;
mod lexer;
mod model;
mod print;
mod props;

use std::fmt;

use thiserror::Error;

use crate::model::{Diagnostic, Location, Severity, SourceSpan};

pub use config::{parse_config, parse_config_named};
pub use model::{parse_model, parse_model_named};
pub use print::{pretty_print, pretty_print_configs, pretty_print_properties};
pub use props::{parse_properties, parse_properties_named, PropertyFile};

/// Default file label used in spans when none is given.
pub const ANONYMOUS: &str = "<input>";

/// A single syntax problem at a known location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }

    fn into_diagnostic(self) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            location: Location::default(),
            span: Some(self.span),
            message: self.message,
        }
    }
}

/// Parse failure: one or more diagnostics, each carrying a span.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub(crate) fn from_errors(errors: Vec<SyntaxError>) -> Self {
        Self {
            diagnostics: errors.into_iter().map(SyntaxError::into_diagnostic).collect(),
        }
    }

    pub fn first(&self) -> &Diagnostic {
        &self.diagnostics[0]
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", d.span.as_ref().expect("syntax diagnostics carry spans"))?;
            write!(f, ": {}", d.message)?;
        }
        Ok(())
    }
}
