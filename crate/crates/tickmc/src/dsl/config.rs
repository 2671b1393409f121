use std::collections::btree_map::Entry;

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;
use super::{ParseError, SyntaxError, ANONYMOUS};
use crate::model::ScenarioConfig;

/// Parses `config <name> { <const> = <number>; ... }` blocks.
pub fn parse_config(text: &str) -> Result<Vec<ScenarioConfig>, ParseError> {
    parse_config_named(ANONYMOUS, text)
}

pub fn parse_config_named(file: &str, text: &str) -> Result<Vec<ScenarioConfig>, ParseError> {
    let mut cur = Cursor::new(file, text).map_err(|e| ParseError::from_errors(vec![e]))?;
    let mut configs: Vec<ScenarioConfig> = Vec::new();
    let mut errors = Vec::new();
    let result = (|| -> PResult<()> {
        while !cur.at(Tok::Eof) {
            cur.expect_kw("config")?;
            let name = cur.name("configuration name", &[])?;
            cur.expect(Tok::LBrace)?;
            let mut cfg = ScenarioConfig::new(name.text);
            while cur.eat(Tok::RBrace).is_none() {
                let constant = cur.name("constant name or `}`", &[])?;
                cur.expect(Tok::Equals)?;
                let (value, _) = cur.signed_number()?;
                cur.expect(Tok::Semi)?;
                match cfg.bindings.entry(constant.text.to_string()) {
                    Entry::Occupied(_) => errors.push(SyntaxError::new(
                        constant.span,
                        format!(
                            "duplicate constant `{}` in config `{}`",
                            constant.text, name.text
                        ),
                    )),
                    Entry::Vacant(e) => {
                        e.insert(value);
                    }
                }
            }
            if configs.iter().any(|c| c.name == cfg.name) {
                errors.push(SyntaxError::new(
                    name.span,
                    format!("duplicate config `{}`", name.text),
                ));
            } else {
                configs.push(cfg);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        errors.push(e);
    }
    if errors.is_empty() {
        Ok(configs)
    } else {
        Err(ParseError::from_errors(errors))
    }
}
