use num_traits::ToPrimitive;

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;
use super::{ParseError, SyntaxError, ANONYMOUS};
use crate::engine::{Predicate, Query, QueryKind, TickBound, TickMode, VarAtom};
use crate::model::{CmpOp, Loc};

/// Name of the built-in tick counter in predicates.
const TICKS: &str = "ticks";
/// Name of the sweep parameter.
const PARAM: &str = "t";

/// Parsed property file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyFile {
    /// Imported configuration modules, e.g. `uvc_config` for
    /// `import uvc_config::*`.
    pub imports: Vec<String>,
    pub queries: Vec<Query>,
}

impl PropertyFile {
    pub fn query(&self, id: &str) -> Option<&Query> {
        self.queries.iter().find(|q| q.id == id)
    }
}

/// Parses a property file.
///
/// Two forms are accepted:
///
/// ```text
/// prob property P1:
///   Prob=? of [Finally shuman==inRed /\ srobot==transitionRow /\ ticks==t]
///   with constants C1
///
/// prob property P2:
///   not Exists [Finally deadlock]
///   with constant C1
/// ```
///
/// Qualified names such as `modUVC::rpUVC::shuman` resolve to their last
/// segment. An atom whose left side is `ticks`, or whose right side is a
/// number or the parameter `t`, constrains the tick counter: `==` selects
/// exact-tick mode and `<=` cumulative mode. An optional
/// `for t in A..B` clause gives the default sweep range.
pub fn parse_properties(text: &str) -> Result<PropertyFile, ParseError> {
    parse_properties_named(ANONYMOUS, text)
}

pub fn parse_properties_named(file: &str, text: &str) -> Result<PropertyFile, ParseError> {
    let mut cur = Cursor::new(file, text).map_err(|e| ParseError::from_errors(vec![e]))?;
    let mut out = PropertyFile::default();
    let mut errors = Vec::new();
    let result = (|| -> PResult<()> {
        loop {
            if cur.at(Tok::Eof) {
                return Ok(());
            } else if cur.eat_kw("import").is_some() {
                out.imports.push(import(&mut cur)?);
            } else if cur.at_kw("prob") {
                let q = property(&mut cur)?;
                if out.query(&q.id).is_some() {
                    let span = q.loc.span().cloned().expect("span");
                    errors.push(SyntaxError::new(span, format!("duplicate property `{}`", q.id)));
                } else {
                    out.queries.push(q);
                }
            } else {
                return Err(cur.error_here("`import` or `prob property`"));
            }
        }
    })();
    if let Err(e) = result {
        errors.push(e);
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ParseError::from_errors(errors))
    }
}

fn import(cur: &mut Cursor) -> PResult<String> {
    let mut path = vec![cur.name("module name", &[])?.text.to_string()];
    while cur.eat(Tok::ColonColon).is_some() {
        if cur.eat(Tok::Star).is_some() {
            break;
        }
        path.push(cur.name("module name", &[])?.text.to_string());
    }
    cur.eat(Tok::Semi);
    Ok(path.join("::"))
}

fn property(cur: &mut Cursor) -> PResult<Query> {
    cur.expect_kw("prob")?;
    cur.expect_kw("property")?;
    let id = cur.name("property name", &[])?;
    cur.expect(Tok::Colon)?;
    let kind = if cur.eat_kw("not").is_some() {
        cur.expect_kw("Exists")?;
        cur.expect(Tok::LBracket)?;
        cur.expect_kw("Finally")?;
        cur.expect_kw("deadlock")?;
        cur.expect(Tok::RBracket)?;
        QueryKind::DeadlockFreedom
    } else {
        cur.expect_kw("Prob")?;
        cur.expect(Tok::Equals)?;
        cur.expect(Tok::Question)?;
        cur.expect_kw("of")?;
        cur.expect(Tok::LBracket)?;
        cur.expect_kw("Finally")?;
        let kind = predicate(cur)?;
        cur.expect(Tok::RBracket)?;
        kind
    };
    cur.expect_kw("with")?;
    if cur.eat_kw("constants").is_none() {
        cur.eat_kw("constant")
            .ok_or_else(|| cur.error_here("`constants`"))?;
    }
    let config = cur.name("configuration name", &[])?;
    let mut sweep = None;
    if cur.eat_kw("for").is_some() {
        cur.expect_kw(PARAM)?;
        cur.expect_kw("in")?;
        let lo = tick_number(cur)?;
        cur.expect(Tok::DotDot)?;
        let hi_span = cur.peek().span.clone();
        let hi = tick_number(cur)?;
        if hi < lo {
            return Err(SyntaxError::new(hi_span, "empty sweep range"));
        }
        sweep = Some(lo..=hi);
    }
    cur.eat(Tok::Semi);
    Ok(Query {
        id: id.text.to_string(),
        config: config.text.to_string(),
        kind,
        sweep,
        loc: Loc::from(id.span),
    })
}

fn tick_number(cur: &mut Cursor) -> PResult<u32> {
    let t = cur.peek().clone();
    let (value, _) = cur.signed_number()?;
    value
        .is_integer()
        .then(|| value.to_integer().to_u32())
        .flatten()
        .ok_or_else(|| SyntaxError::new(t.span, "expected a non-negative integer tick"))
}

fn qualified_name<'a>(cur: &mut Cursor<'a>) -> PResult<(&'a str, crate::model::SourceSpan)> {
    let first = cur.name("variable", &["deadlock"])?;
    let mut last = first.text;
    while cur.eat(Tok::ColonColon).is_some() {
        last = cur.name("variable", &[])?.text;
    }
    Ok((last, first.span))
}

fn predicate(cur: &mut Cursor) -> PResult<QueryKind> {
    let mut predicate = Predicate::new();
    let mut ticks: Option<TickMode> = None;
    loop {
        if cur.eat_kw("true").is_none() {
            let (lhs, span) = qualified_name(cur)?;
            let op = cur.bump().clone();
            if !matches!(op.kind, Tok::EqEq | Tok::NotEq | Tok::LessEq) {
                return Err(SyntaxError::new(
                    op.span.clone(),
                    format!("expected `==`, `!=` or `<=`, found {}", op.describe()),
                ));
            }
            let rhs = cur.peek().clone();
            let is_tick = lhs == TICKS
                || rhs.kind == Tok::Number
                || (rhs.kind == Tok::Ident && rhs.text == PARAM);
            if is_tick {
                let bound = if rhs.kind == Tok::Number {
                    TickBound::At(tick_number(cur)?)
                } else {
                    cur.expect_kw(PARAM)?;
                    TickBound::Param
                };
                let mode = match op.kind {
                    Tok::EqEq => TickMode::Exact(bound),
                    Tok::LessEq => TickMode::Cumulative(bound),
                    _ => {
                        return Err(SyntaxError::new(
                            op.span,
                            "tick conditions use `==` or `<=`",
                        ))
                    }
                };
                if ticks.replace(mode).is_some() {
                    return Err(SyntaxError::new(span, "more than one tick condition"));
                }
            } else {
                let op = match op.kind {
                    Tok::EqEq => CmpOp::Eq,
                    Tok::NotEq => CmpOp::Ne,
                    _ => {
                        return Err(SyntaxError::new(
                            op.span,
                            "`<=` only applies to the tick counter",
                        ))
                    }
                };
                let value = cur.name("value", &[])?;
                predicate.atoms.push(VarAtom {
                    var: lhs.to_string(),
                    op,
                    value: value.text.to_string(),
                });
            }
        }
        if cur.eat(Tok::Wedge).is_none() && cur.eat_kw("and").is_none() {
            break;
        }
    }
    Ok(QueryKind::Probability {
        predicate,
        ticks: ticks.unwrap_or(TickMode::Unbounded),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING_1: &str = "import uvc_config::*

prob property P1:
  Prob=? of [Finally
    modUVC::rpUVC::shuman==inRed /\\
    modUVC::rpUVC::srobot==transitionRow /\\
    modUVC::ctrlUVC::stm_ref3::uvs==t]
  with constants C1
";

    const LISTING_2: &str = "prob property P2:
\tnot Exists [Finally deadlock]
\twith constant C1
";

    #[test]
    fn injury_property() {
        let file = parse_properties(LISTING_1).unwrap();
        assert_eq!(file.imports, vec!["uvc_config"]);
        let q = &file.queries[0];
        assert_eq!(q.id, "P1");
        assert_eq!(q.config, "C1");
        assert_eq!(
            q.kind,
            QueryKind::Probability {
                predicate: Predicate::new()
                    .eq("shuman", "inRed")
                    .eq("srobot", "transitionRow"),
                ticks: TickMode::Exact(TickBound::Param),
            }
        );
    }

    #[test]
    fn deadlock_property() {
        let file = parse_properties(LISTING_2).unwrap();
        assert_eq!(file.queries[0].kind, QueryKind::DeadlockFreedom);
        assert_eq!(file.queries[0].config, "C1");
    }

    #[test]
    fn cumulative_tick_only() {
        let file =
            parse_properties("prob property Q: Prob=? of [Finally ticks <= 5] with constants C")
                .unwrap();
        assert_eq!(
            file.queries[0].kind,
            QueryKind::Probability {
                predicate: Predicate::new(),
                ticks: TickMode::Cumulative(TickBound::At(5)),
            }
        );
    }

    #[test]
    fn sweep_clause() {
        let file = parse_properties(
            "prob property Q: Prob=? of [Finally x == a and ticks == t] with constants C for t in 1..30;",
        )
        .unwrap();
        assert_eq!(file.queries[0].sweep, Some(1..=30));
    }

    #[test]
    fn errors_carry_spans() {
        let err = parse_properties("prob property Q: Prob=? of [Finally x < a] with constants C")
            .unwrap_err();
        assert_eq!(err.first().span.as_ref().unwrap().column, 39);
        let err = parse_properties("prob property Q: Prob=? of [Finally x <= a] with constants C")
            .unwrap_err();
        assert_eq!(err.first().message, "`<=` only applies to the tick counter");
        let err = parse_properties(
            "prob property Q: Prob=? of [Finally ticks == 1 /\\ ticks <= 2] with constants C",
        )
        .unwrap_err();
        assert_eq!(err.first().message, "more than one tick condition");
    }
}
