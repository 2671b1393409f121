use std::fmt;
use std::sync::Arc;

/// A region of source text. Lines and columns are 1-based; columns count
/// characters, not bytes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, line: u32, column: u32, length: u32) -> Self {
        Self {
            file,
            line: line.max(1),
            column: column.max(1),
            length: length.max(1),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Optional source location attached to model constructs.
///
/// Locations never take part in structural equality: two networks that
/// differ only in where their text came from compare equal.
#[derive(Clone, Debug, Default)]
pub struct Loc(pub Option<SourceSpan>);

impl Loc {
    pub const NONE: Loc = Loc(None);

    pub fn span(&self) -> Option<&SourceSpan> {
        self.0.as_ref()
    }
}

impl From<SourceSpan> for Loc {
    fn from(span: SourceSpan) -> Self {
        Loc(Some(span))
    }
}

impl PartialEq for Loc {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}
