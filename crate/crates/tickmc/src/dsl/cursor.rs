use std::sync::Arc;

use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;
use crate::model::{parse_decimal, Loc, Rational};

/// Nesting limit for parenthesised expressions.
const MAX_DEPTH: usize = 128;

pub(crate) struct Cursor<'src> {
    tokens: Vec<Token<'src>>,
    pos: usize,
    depth: usize,
}

pub(crate) type PResult<T> = Result<T, SyntaxError>;

impl<'src> Cursor<'src> {
    pub fn new(file: &str, src: &'src str) -> PResult<Self> {
        let file: Arc<str> = Arc::from(file);
        Ok(Self {
            tokens: tokenize(&file, src)?,
            pos: 0,
            depth: 0,
        })
    }

    pub fn peek(&self) -> &Token<'src> {
        &self.tokens[self.pos]
    }

    pub fn bump(&mut self) -> Token<'src> {
        let token = self.tokens[self.pos].clone();
        if token.kind != Tok::Eof {
            self.pos += 1;
        }
        token
    }

    pub fn at(&self, kind: Tok) -> bool {
        self.peek().kind == kind
    }

    pub fn at_kw(&self, keyword: &str) -> bool {
        let t = self.peek();
        t.kind == Tok::Ident && t.text == keyword
    }

    pub fn eat(&mut self, kind: Tok) -> Option<Token<'src>> {
        self.at(kind).then(|| self.bump())
    }

    pub fn eat_kw(&mut self, keyword: &str) -> Option<Token<'src>> {
        self.at_kw(keyword).then(|| self.bump())
    }

    pub fn error_here(&self, expected: &str) -> SyntaxError {
        let t = self.peek();
        SyntaxError::new(
            t.span.clone(),
            format!("expected {expected}, found {}", t.describe()),
        )
    }

    pub fn expect(&mut self, kind: Tok) -> PResult<Token<'src>> {
        self.eat(kind).ok_or_else(|| self.error_here(&kind.to_string()))
    }

    pub fn expect_kw(&mut self, keyword: &str) -> PResult<Token<'src>> {
        self.eat_kw(keyword)
            .ok_or_else(|| self.error_here(&format!("`{keyword}`")))
    }

    /// An identifier that is not one of `reserved`.
    pub fn name(&mut self, what: &str, reserved: &[&str]) -> PResult<Token<'src>> {
        let t = self.peek();
        if t.kind == Tok::Ident && !reserved.contains(&t.text) {
            Ok(self.bump())
        } else if t.kind == Tok::Ident {
            Err(SyntaxError::new(
                t.span.clone(),
                format!("expected {what}, found keyword `{}`", t.text),
            ))
        } else {
            Err(self.error_here(what))
        }
    }

    /// A decimal literal with an optional leading minus sign.
    pub fn signed_number(&mut self) -> PResult<(Rational, Loc)> {
        let minus = self.eat(Tok::Minus);
        let t = self.peek().clone();
        if t.kind != Tok::Number {
            return Err(self.error_here("number"));
        }
        self.bump();
        let value = parse_decimal(t.text).ok_or_else(|| {
            SyntaxError::new(t.span.clone(), format!("malformed number `{}`", t.text))
        })?;
        Ok(match minus {
            Some(m) => (-value, Loc::from(m.span)),
            None => (value, Loc::from(t.span)),
        })
    }

    pub fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(SyntaxError::new(
                self.peek().span.clone(),
                format!("expression nested deeper than {MAX_DEPTH} levels"),
            ));
        }
        Ok(())
    }

    pub fn leave(&mut self) {
        self.depth -= 1;
    }
}
