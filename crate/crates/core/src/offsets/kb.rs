use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    TherapeuticClass,
    CareSetting,
    Severity,
}

/// Treatments that can substitute for one another under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparableGroup {
    pub condition: String,
    pub basis: Basis,
    pub members: Vec<String>,
    /// Allowed substitution pairs, in either direction. All pairs are
    /// allowed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[String; 2]>>,
}

impl ComparableGroup {
    pub fn allows(&self, a: &str, b: &str) -> bool {
        match &self.pairs {
            None => a != b,
            Some(pairs) => pairs
                .iter()
                .any(|[x, y]| (x == a && y == b) || (x == b && y == a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparabilityKb {
    #[serde(rename = "group", default)]
    pub groups: Vec<ComparableGroup>,
}

impl ComparabilityKb {
    pub fn validate(&self) -> Result<()> {
        for (n, g) in self.groups.iter().enumerate() {
            if g.condition.is_empty() {
                return Err(Error::invalid(format!("comparable group {n} has no condition")));
            }
            let distinct: BTreeSet<&str> = g.members.iter().map(String::as_str).collect();
            if distinct.len() != g.members.len() {
                return Err(Error::invalid(format!("comparable group {n} lists a member twice")));
            }
            if distinct.len() < 2 {
                return Err(Error::invalid(format!("comparable group {n} needs at least 2 members")));
            }
            for [a, b] in g.pairs.iter().flatten() {
                if !distinct.contains(a.as_str()) || !distinct.contains(b.as_str()) || a == b {
                    return Err(Error::invalid(format!(
                        "comparable group {n} pair ({a}, {b}) must name two distinct members"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let kb: ComparabilityKb =
            toml::from_str(text).map_err(|e| Error::Config(format!("comparability KB: {e}")))?;
        kb.validate()?;
        Ok(kb)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("KB serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}
