use std::fmt;
use std::sync::Arc;

use super::SyntaxError;
use crate::model::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident,
    Number,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Colon,
    ColonColon,
    Assign,
    Equals,
    EqEq,
    NotEq,
    LessEq,
    Plus,
    Minus,
    Star,
    Slash,
    Question,
    Wedge,
    DotDot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tok::Ident => "identifier",
            Tok::Number => "number",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::ColonColon => "`::`",
            Tok::Assign => "`:=`",
            Tok::Equals => "`=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::LessEq => "`<=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Question => "`?`",
            Tok::Wedge => "`/\\`",
            Tok::DotDot => "`..`",
            Tok::Eof => "end of input",
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token<'src> {
    pub kind: Tok,
    pub text: &'src str,
    pub span: SourceSpan,
}

impl Token<'_> {
    pub fn describe(&self) -> String {
        match self.kind {
            Tok::Eof => "end of input".to_string(),
            Tok::Ident | Tok::Number => format!("`{}`", self.text),
            other => other.to_string(),
        }
    }
}

/// Splits `src` into tokens. `//` comments and whitespace are skipped; the
/// token list always ends with [`Tok::Eof`].
pub(crate) fn tokenize<'src>(file: &Arc<str>, src: &'src str) -> Result<Vec<Token<'src>>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = src.char_indices().peekable();
    let (mut line, mut column) = (1u32, 1u32);

    let span = |line: u32, column: u32, len: usize| {
        SourceSpan::new(file.clone(), line, column, len.min(u32::MAX as usize) as u32)
    };

    while let Some(&(start, c)) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c == '/' && src[start..].starts_with("//") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }

        let (kind, len) = if c.is_ascii_alphabetic() {
            let len = src[start..]
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                .count();
            (Tok::Ident, len)
        } else if c.is_ascii_digit() || (c == '.' && next_is_digit(src, start + 1)) {
            (Tok::Number, number_len(&src[start..]))
        } else {
            let rest = &src[start..];
            let two = [
                ("::", Tok::ColonColon),
                (":=", Tok::Assign),
                ("==", Tok::EqEq),
                ("!=", Tok::NotEq),
                ("<=", Tok::LessEq),
                ("/\\", Tok::Wedge),
                ("..", Tok::DotDot),
            ];
            if let Some((text, kind)) = two.iter().find(|(text, _)| rest.starts_with(text)) {
                (*kind, text.len())
            } else {
                let kind = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '=' => Tok::Equals,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '?' => Tok::Question,
                    _ => {
                        return Err(SyntaxError::new(
                            span(line, column, 1),
                            format!("unexpected character `{}`", c.escape_debug()),
                        ))
                    }
                };
                (kind, c.len_utf8())
            }
        };
        let text = &src[start..start + len];
        tokens.push(Token {
            kind,
            text,
            span: span(line, column, text.chars().count()),
        });
        column += text.chars().count() as u32;
        while chars.peek().is_some_and(|&(i, _)| i < start + len) {
            chars.next();
        }
    }
    tokens.push(Token {
        kind: Tok::Eof,
        text: "",
        span: span(line, column, 1),
    });
    Ok(tokens)
}

fn next_is_digit(src: &str, at: usize) -> bool {
    src.as_bytes().get(at).is_some_and(u8::is_ascii_digit)
}

/// Length of a decimal literal `digits [. digits] [e [+-] digits]`. A `.`
/// followed by another `.` is left for the range operator.
fn number_len(rest: &str) -> usize {
    let bytes = rest.as_bytes();
    let digits = |mut i: usize| {
        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        i
    };
    let mut i = digits(0);
    if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i = digits(i + 1);
    }
    if matches!(bytes.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if bytes.get(j).is_some_and(u8::is_ascii_digit) {
            i = digits(j);
        }
    }
    i
}
