use super::cursor::{Cursor, PResult};
use super::lexer::Tok;
use super::{ParseError, SyntaxError, ANONYMOUS};
use crate::model::{
    BinOp, Branch, CmpOp, ConstantDef, ConstantKind, DuplicateDefinition, EnumDomain, GuardExpr,
    Loc, MachineDef, Network, ProbExpr, SharedVar, StateDef, Transition, Update,
};

/// Words that cannot name a model construct.
pub(crate) const KEYWORDS: &[&str] = &[
    "domain", "var", "const", "horizon", "machine", "initial", "state", "final", "from", "when",
    "goto", "or", "and", "not", "set", "true",
];

/// Parses a model file into a [`Network`].
///
/// Syntax errors stop the parse; duplicate definitions are collected and
/// reported together. Semantic checks are left to
/// [`validate_network`](crate::model::validate_network).
pub fn parse_model(text: &str) -> Result<Network, ParseError> {
    parse_model_named(ANONYMOUS, text)
}

pub fn parse_model_named(file: &str, text: &str) -> Result<Network, ParseError> {
    let mut parser = ModelParser {
        cur: Cursor::new(file, text).map_err(|e| ParseError::from_errors(vec![e]))?,
        duplicates: Vec::new(),
        net: Network::new(),
    };
    match parser.file() {
        Ok(()) if parser.duplicates.is_empty() => Ok(parser.net),
        Ok(()) => Err(ParseError::from_errors(parser.duplicates)),
        Err(e) => {
            let mut errors = parser.duplicates;
            errors.push(e);
            Err(ParseError::from_errors(errors))
        }
    }
}

struct ModelParser<'src> {
    cur: Cursor<'src>,
    duplicates: Vec<SyntaxError>,
    net: Network,
}

impl ModelParser<'_> {
    fn duplicate(&mut self, loc: &Loc, err: DuplicateDefinition) {
        let span = loc.span().cloned().expect("parsed constructs carry spans");
        self.duplicates.push(SyntaxError::new(span, err.to_string()));
    }

    fn file(&mut self) -> PResult<()> {
        loop {
            if self.cur.at(Tok::Eof) {
                return Ok(());
            } else if self.cur.at_kw("domain") {
                self.domain()?;
            } else if self.cur.at_kw("var") {
                self.var()?;
            } else if self.cur.at_kw("const") {
                self.constant()?;
            } else if self.cur.at_kw("horizon") {
                self.horizon()?;
            } else if self.cur.at_kw("machine") {
                self.machine()?;
            } else {
                return Err(self
                    .cur
                    .error_here("`domain`, `var`, `const`, `horizon` or `machine`"));
            }
        }
    }

    fn domain(&mut self) -> PResult<()> {
        self.cur.expect_kw("domain")?;
        let name = self.cur.name("domain name", KEYWORDS)?;
        self.cur.expect(Tok::LBrace)?;
        let mut values = vec![self.cur.name("domain value", KEYWORDS)?.text.to_string()];
        while self.cur.eat(Tok::Comma).is_some() {
            if self.cur.at(Tok::RBrace) {
                break;
            }
            values.push(self.cur.name("domain value", KEYWORDS)?.text.to_string());
        }
        self.cur.expect(Tok::RBrace)?;
        self.cur.eat(Tok::Semi);
        let loc = Loc::from(name.span);
        let domain = EnumDomain {
            name: name.text.to_string(),
            values,
            loc: loc.clone(),
        };
        if let Err(e) = self.net.add_domain(domain) {
            self.duplicate(&loc, e);
        }
        Ok(())
    }

    fn var(&mut self) -> PResult<()> {
        self.cur.expect_kw("var")?;
        let name = self.cur.name("variable name", KEYWORDS)?;
        self.cur.expect(Tok::Colon)?;
        let domain = self.cur.name("domain name", KEYWORDS)?;
        self.cur.expect(Tok::Equals)?;
        let initial = self.cur.name("initial value", KEYWORDS)?;
        self.cur.expect(Tok::Semi)?;
        let loc = Loc::from(name.span);
        let var = SharedVar {
            name: name.text.to_string(),
            domain: domain.text.to_string(),
            initial: initial.text.to_string(),
            loc: loc.clone(),
        };
        if let Err(e) = self.net.add_var(var) {
            self.duplicate(&loc, e);
        }
        Ok(())
    }

    fn constant(&mut self) -> PResult<()> {
        self.cur.expect_kw("const")?;
        let name = self.cur.name("constant name", KEYWORDS)?;
        self.cur.expect(Tok::Colon)?;
        let kind_token = self.cur.peek().clone();
        let kind = (kind_token.kind == Tok::Ident)
            .then(|| ConstantKind::from_keyword(kind_token.text))
            .flatten()
            .ok_or_else(|| self.cur.error_here("`probability`, `count` or `ratio`"))?;
        self.cur.bump();
        let value = if self.cur.eat(Tok::Equals).is_some() {
            Some(self.cur.signed_number()?.0)
        } else {
            None
        };
        self.cur.expect(Tok::Semi)?;
        let loc = Loc::from(name.span);
        let constant = ConstantDef {
            name: name.text.to_string(),
            kind,
            value,
            loc: loc.clone(),
        };
        if let Err(e) = self.net.add_constant(constant) {
            self.duplicate(&loc, e);
        }
        Ok(())
    }

    fn horizon(&mut self) -> PResult<()> {
        let kw = self.cur.expect_kw("horizon")?;
        let name = self.cur.name("horizon constant", KEYWORDS)?;
        self.cur.expect(Tok::Semi)?;
        if self.net.horizon.is_some() {
            self.duplicates
                .push(SyntaxError::new(kw.span, "duplicate horizon declaration"));
        } else {
            self.net.horizon = Some(name.text.to_string());
            self.net.horizon_loc = Loc::from(name.span);
        }
        Ok(())
    }

    fn machine(&mut self) -> PResult<()> {
        self.cur.expect_kw("machine")?;
        let name = self.cur.name("machine name", KEYWORDS)?;
        self.cur.expect(Tok::LBrace)?;
        let mut machine = MachineDef::new(name.text, "");
        machine.loc = Loc::from(name.span.clone());
        let mut initial_seen = false;
        loop {
            if self.cur.eat(Tok::RBrace).is_some() {
                break;
            } else if let Some(kw) = self.cur.eat_kw("initial") {
                let state = self.cur.name("initial state identifier", KEYWORDS)?;
                self.cur.expect(Tok::Semi)?;
                if initial_seen {
                    self.duplicates
                        .push(SyntaxError::new(kw.span, "duplicate initial declaration"));
                }
                initial_seen = true;
                machine.initial = state.text.to_string();
            } else if self.cur.at_kw("state") || self.cur.at_kw("final") {
                let is_final = self.cur.eat_kw("final").is_some();
                self.cur.expect_kw("state")?;
                loop {
                    let state = self.cur.name("state identifier", KEYWORDS)?;
                    let loc = Loc::from(state.span);
                    if machine.state_index(state.text).is_some() {
                        self.duplicate(
                            &loc,
                            DuplicateDefinition {
                                kind: "state",
                                name: state.text.to_string(),
                            },
                        );
                    } else {
                        machine.states.push(StateDef {
                            name: state.text.to_string(),
                            is_final,
                            loc,
                        });
                    }
                    if self.cur.eat(Tok::Comma).is_none() {
                        break;
                    }
                }
                self.cur.expect(Tok::Semi)?;
            } else if self.cur.at_kw("from") {
                let transition = self.transition()?;
                machine.transitions.push(transition);
            } else {
                return Err(self
                    .cur
                    .error_here("`initial`, `state`, `final`, `from` or `}`"));
            }
        }
        if !initial_seen {
            self.duplicates.push(SyntaxError::new(
                name.span,
                format!("machine `{}` declares no initial state", name.text),
            ));
        }
        if machine.states.is_empty() {
            let span = machine.loc.span().cloned().expect("span");
            self.duplicates.push(SyntaxError::new(
                span,
                format!("machine `{}` declares no states", name.text),
            ));
        }
        let loc = machine.loc.clone();
        if let Err(e) = self.net.add_machine(machine) {
            self.duplicate(&loc, e);
        }
        Ok(())
    }

    fn transition(&mut self) -> PResult<Transition> {
        let kw = self.cur.expect_kw("from")?;
        let source = self.cur.name("source state identifier", KEYWORDS)?;
        let guard = if self.cur.eat_kw("when").is_some() {
            self.guard()?
        } else {
            GuardExpr::True
        };
        self.cur.expect_kw("goto")?;
        let mut transition = Transition::new(source.text, guard);
        transition.loc = Loc::from(kw.span);
        transition.branches.push(self.branch()?);
        while self.cur.eat_kw("or").is_some() {
            transition.branches.push(self.branch()?);
        }
        self.cur.expect(Tok::Semi)?;
        Ok(transition)
    }

    fn branch(&mut self) -> PResult<Branch> {
        let start = self.cur.peek().span.clone();
        let weight = if self.cur.eat(Tok::LBracket).is_some() {
            let w = self.prob_expr()?;
            self.cur.expect(Tok::RBracket)?;
            w
        } else {
            ProbExpr::one()
        };
        let target = self.cur.name("target state identifier", KEYWORDS)?;
        let mut branch = Branch::new(weight, target.text);
        branch.loc = Loc::from(start);
        if self.cur.eat_kw("set").is_some() {
            loop {
                let var = self.cur.name("variable name", KEYWORDS)?;
                self.cur.expect(Tok::Assign)?;
                let value = self.cur.name("value", KEYWORDS)?;
                branch.updates.push(Update {
                    var: var.text.to_string(),
                    value: value.text.to_string(),
                });
                if self.cur.eat(Tok::Comma).is_none() {
                    break;
                }
            }
        }
        Ok(branch)
    }

    fn guard(&mut self) -> PResult<GuardExpr> {
        self.cur.enter()?;
        let mut lhs = self.guard_and()?;
        while self.cur.eat_kw("or").is_some() {
            lhs = lhs.or(self.guard_and()?);
        }
        self.cur.leave();
        Ok(lhs)
    }

    fn guard_and(&mut self) -> PResult<GuardExpr> {
        let mut lhs = self.guard_unary()?;
        while self.cur.eat_kw("and").is_some() {
            lhs = lhs.and(self.guard_unary()?);
        }
        Ok(lhs)
    }

    fn guard_unary(&mut self) -> PResult<GuardExpr> {
        if self.cur.eat_kw("not").is_some() {
            self.cur.enter()?;
            let inner = self.guard_unary()?;
            self.cur.leave();
            return Ok(inner.negate());
        }
        if self.cur.eat_kw("true").is_some() {
            return Ok(GuardExpr::True);
        }
        if self.cur.eat(Tok::LParen).is_some() {
            let inner = self.guard()?;
            self.cur.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let var = self.cur.name("guard", KEYWORDS)?;
        let op = if self.cur.eat(Tok::EqEq).is_some() {
            CmpOp::Eq
        } else if self.cur.eat(Tok::NotEq).is_some() {
            CmpOp::Ne
        } else {
            return Err(self.cur.error_here("`==` or `!=`"));
        };
        let value = self.cur.name("value", KEYWORDS)?;
        Ok(GuardExpr::Atom {
            var: var.text.to_string(),
            op,
            value: value.text.to_string(),
        })
    }

    fn prob_expr(&mut self) -> PResult<ProbExpr> {
        self.cur.enter()?;
        let mut lhs = self.prob_term()?;
        loop {
            let op = if self.cur.eat(Tok::Plus).is_some() {
                BinOp::Add
            } else if self.cur.eat(Tok::Minus).is_some() {
                BinOp::Sub
            } else {
                break;
            };
            lhs = ProbExpr::bin(op, lhs, self.prob_term()?);
        }
        self.cur.leave();
        Ok(lhs)
    }

    fn prob_term(&mut self) -> PResult<ProbExpr> {
        let mut lhs = self.prob_unary()?;
        loop {
            let op = if self.cur.eat(Tok::Star).is_some() {
                BinOp::Mul
            } else if self.cur.eat(Tok::Slash).is_some() {
                BinOp::Div
            } else {
                break;
            };
            lhs = ProbExpr::bin(op, lhs, self.prob_unary()?);
        }
        Ok(lhs)
    }

    fn prob_unary(&mut self) -> PResult<ProbExpr> {
        if self.cur.eat(Tok::Minus).is_some() {
            self.cur.enter()?;
            let inner = self.prob_unary()?;
            self.cur.leave();
            return Ok(ProbExpr::Neg(Box::new(inner)));
        }
        if self.cur.eat(Tok::LParen).is_some() {
            let inner = self.prob_expr()?;
            self.cur.expect(Tok::RParen)?;
            return Ok(inner);
        }
        if self.cur.at(Tok::Number) {
            let (value, _) = self.cur.signed_number()?;
            return Ok(ProbExpr::Num(value));
        }
        let name = self.cur.name("probability expression", KEYWORDS)?;
        Ok(ProbExpr::Const(name.text.to_string()))
    }
}
