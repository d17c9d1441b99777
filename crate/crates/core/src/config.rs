//! Declarative run configuration: one structured text document captures the
//! algebra, the action, the algebra object, the window, tolerances and the
//! seed, so a run is reproducible from the file alone.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub algebra: Option<AlgebraSpec>,
    pub action: ActionSpec,
    #[serde(default)]
    pub object: Option<ObjectSpec>,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    /// ordered block dimension list
    pub blocks: Vec<usize>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ActionSpec {
    /// finite group action; `model` picks the realization
    Group {
        group: String,
        #[serde(default = "default_model")]
        model: String,
    },
    /// truncated Cuntz core
    Cuntz { n: usize, depth: usize },
    /// truncated semicircular system: "scalar" or "m2-pair"
    Semicircular {
        family: String,
        #[serde(default = "default_cap")]
        degree_cap: usize,
    },
}

fn default_model() -> String {
    "inner".into()
}

fn default_cap() -> usize {
    6
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectSpec {
    Trivial,
    GroupAlgebra {
        /// subgroup elements by index; empty means the whole group
        #[serde(default)]
        subgroup: Vec<usize>,
        /// "trivial" or "sign-z2z2"
        #[serde(default = "default_cocycle")]
        cocycle: String,
    },
    CuntzGrading,
}

fn default_cocycle() -> String {
    "trivial".into()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub window: usize,
    pub tol: f64,
    pub seed: u64,
    pub out: Option<String>,
    pub suite: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            window: 2,
            tol: 1e-9,
            seed: 17,
            out: None,
            suite: "all".into(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.tol <= 0.0 || self.run.tol > 1.0 {
            return Err(Error::Config("tolerance must be in (0, 1]".into()));
        }
        match &self.action {
            ActionSpec::Group { group, model } => {
                crate::examples::group::FiniteGroup::by_name(group)?;
                if model != "inner" && model != "permutation" {
                    return Err(Error::Config(format!(
                        "unknown group model '{model}' (inner | permutation)"
                    )));
                }
                if let Some(ObjectSpec::CuntzGrading) = self.object {
                    return Err(Error::Config(
                        "the grading object needs a cuntz action".into(),
                    ));
                }
            }
            ActionSpec::Cuntz { n, depth } => {
                if *n < 2 || *depth < 2 {
                    return Err(Error::Config("cuntz needs n >= 2 and depth >= 2".into()));
                }
                if self.run.window > *depth {
                    return Err(Error::Config(
                        "the grading window cannot exceed the depth".into(),
                    ));
                }
                if matches!(self.object, Some(ObjectSpec::GroupAlgebra { .. })) {
                    return Err(Error::Config(
                        "a group algebra object needs a group action".into(),
                    ));
                }
            }
            ActionSpec::Semicircular { family, degree_cap } => {
                if family != "scalar" && family != "m2-pair" {
                    return Err(Error::Config(format!(
                        "unknown semicircular family '{family}' (scalar | m2-pair)"
                    )));
                }
                if *degree_cap < 2 {
                    return Err(Error::Config("degree cap must be at least 2".into()));
                }
            }
        }
        if let Some(ObjectSpec::GroupAlgebra { cocycle, .. }) = &self.object {
            if cocycle != "trivial" && cocycle != "sign-z2z2" {
                return Err(Error::Config(format!("unknown cocycle '{cocycle}'")));
            }
        }
        Ok(())
    }

    /// Configuration hash: stable across reserialization of an equivalent
    /// configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(&hasher.finalize()[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[action]
kind = "group"
group = "z4"
model = "inner"

[object]
kind = "group-algebra"

[run]
window = 2
tol = 1e-9
seed = 42
suite = "all"
"#;

    #[test]
    fn round_trip_is_hash_equal() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        let text = cfg.to_toml();
        let cfg2 = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(cfg.hash(), cfg2.hash());
    }

    #[test]
    fn bad_group_rejected() {
        let text = SAMPLE.replace("\"z4\"", "\"z0x\"");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn cuntz_window_bound() {
        let text = r#"
[action]
kind = "cuntz"
n = 2
depth = 2

[run]
window = 3
"#;
        assert!(RunConfig::from_toml(text).is_err());
    }
}
