//! Reading model, property and configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tickmc::dsl::{parse_config_named, parse_model_named, parse_properties_named, PropertyFile};
use tickmc::engine::Query;
use tickmc::model::{bind_constants, validate_network, ConcreteNetwork, Network, ScenarioConfig};

use crate::error::{CliError, CliResult};

/// Everything a command read from disk, with content hashes for the
/// manifest.
#[derive(Default)]
pub struct Inputs {
    pub network: Network,
    pub properties: PropertyFile,
    pub configs: Vec<ScenarioConfig>,
    pub hashes: BTreeMap<String, String>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        self.hashes
            .insert(path.display().to_string(), hex::encode(Sha256::digest(text.as_bytes())));
        Ok(text)
    }

    pub fn load_model(&mut self, path: &Path) -> CliResult<()> {
        let text = self.read(path)?;
        let name = path.display().to_string();
        self.network = parse_model_named(&name, &text).map_err(CliError::input)?;
        let report = validate_network(&self.network);
        for d in report.iter().filter(|d| !d.is_error()) {
            log::warn!("{d}");
        }
        let errors: Vec<String> = report.iter().filter(|d| d.is_error()).map(ToString::to_string).collect();
        if !errors.is_empty() {
            return Err(CliError::Input(errors.join("\n")));
        }
        Ok(())
    }

    pub fn load_properties(&mut self, path: &Path) -> CliResult<()> {
        let text = self.read(path)?;
        self.properties = parse_properties_named(&path.display().to_string(), &text).map_err(CliError::input)?;
        Ok(())
    }

    /// Loads the given config files or, when there are none, the files
    /// implied by the property imports (`import uvc::*` reads `uvc.pcfg`
    /// beside the property file), falling back to `<model>.pcfg`.
    pub fn load_configs(&mut self, explicit: &[PathBuf], model: &Path, props: Option<&Path>) -> CliResult<()> {
        let paths: Vec<PathBuf> = if !explicit.is_empty() {
            explicit.to_vec()
        } else {
            let imported: Vec<PathBuf> = match props {
                Some(p) => {
                    let dir = p.parent().unwrap_or(Path::new(""));
                    self.properties
                        .imports
                        .iter()
                        .map(|i| dir.join(format!("{}.pcfg", i.rsplit("::").next().unwrap_or(i))))
                        .collect()
                }
                None => Vec::new(),
            };
            if imported.is_empty() {
                vec![model.with_extension("pcfg")]
            } else {
                imported
            }
        };
        for path in paths {
            let text = self.read(&path)?;
            for cfg in parse_config_named(&path.display().to_string(), &text).map_err(CliError::input)? {
                if self.configs.iter().any(|c| c.name == cfg.name) {
                    return Err(CliError::input(format!("config `{}` is defined more than once", cfg.name)));
                }
                self.configs.push(cfg);
            }
        }
        Ok(())
    }

    pub fn config(&self, name: &str) -> CliResult<&ScenarioConfig> {
        self.configs.iter().find(|c| c.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.configs.iter().map(|c| c.name.as_str()).collect();
            CliError::input(format!("unknown config `{name}` (known: {})", known.join(", ")))
        })
    }

    pub fn bind(&self, name: &str) -> CliResult<ConcreteNetwork> {
        Ok(bind_constants(&self.network, self.config(name)?)?)
    }

    /// The query named `id`, or the first probability query.
    pub fn probability_query(&self, id: Option<&str>) -> CliResult<&Query> {
        match id {
            Some(id) => self
                .properties
                .query(id)
                .ok_or_else(|| CliError::input(format!("unknown property `{id}`"))),
            None => self
                .properties
                .queries
                .iter()
                .find(|q| q.tick_mode().is_some())
                .ok_or_else(|| CliError::input("the property file has no probability query")),
        }
    }
}
