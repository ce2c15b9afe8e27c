//! Declarative episode grouper keyed on (claim type, condition).

use serde::{Deserialize, Serialize};

use super::model::{ClaimRecord, ClaimType};

pub const UNGROUPED: &str = "UNGROUPED";

/// One rule of the grouper. A `None` key matches anything. The label may use
/// `{condition}` and `{claim_type}` placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRule {
    #[serde(default)]
    pub claim_type: Option<ClaimType>,
    #[serde(default)]
    pub condition: Option<String>,
    pub label: String,
}

impl EpisodeRule {
    fn specificity(&self) -> u8 {
        u8::from(self.claim_type.is_some()) * 2 + u8::from(self.condition.is_some())
    }

    fn matches(&self, claim: &ClaimRecord) -> bool {
        self.claim_type.is_none_or(|t| t == claim.claim_type)
            && self.condition.as_deref().is_none_or(|c| c == claim.condition)
    }

    fn render(&self, claim: &ClaimRecord) -> String {
        self.label
            .replace("{condition}", &claim.condition)
            .replace("{claim_type}", claim.claim_type.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRules {
    #[serde(default)]
    pub rules: Vec<EpisodeRule>,
    #[serde(default = "default_catch_all")]
    pub catch_all: String,
}

fn default_catch_all() -> String {
    UNGROUPED.to_string()
}

impl Default for EpisodeRules {
    fn default() -> Self {
        EpisodeRules {
            rules: Vec::new(),
            catch_all: default_catch_all(),
        }
    }
}

impl EpisodeRules {
    /// Rule table whose only entry maps every claim to `{condition}:{claim_type}`.
    pub fn per_condition_and_type() -> Self {
        EpisodeRules {
            rules: vec![EpisodeRule {
                claim_type: None,
                condition: None,
                label: "{condition}:{claim_type}".to_string(),
            }],
            catch_all: default_catch_all(),
        }
    }

    pub fn with_rule(mut self, claim_type: Option<ClaimType>, condition: Option<&str>, label: &str) -> Self {
        self.rules.push(EpisodeRule {
            claim_type,
            condition: condition.map(str::to_string),
            label: label.to_string(),
        });
        self
    }

    /// Most specific matching rule wins; among equally specific rules the
    /// first listed wins.
    pub fn label_for(&self, claim: &ClaimRecord) -> String {
        let mut best: Option<&EpisodeRule> = None;
        for rule in self.rules.iter().filter(|r| r.matches(claim)) {
            if best.is_none_or(|b| rule.specificity() > b.specificity()) {
                best = Some(rule);
            }
        }
        match best {
            Some(rule) => rule.render(claim),
            None => self.catch_all.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeLabel {
    pub claim_index: usize,
    pub event_label: String,
    pub condition: String,
}

pub fn assign_episodes(claims: &[ClaimRecord], rules: &EpisodeRules) -> Vec<EpisodeLabel> {
    claims
        .iter()
        .enumerate()
        .map(|(claim_index, claim)| EpisodeLabel {
            claim_index,
            event_label: rules.label_for(claim),
            condition: claim.condition.clone(),
        })
        .collect()
}

/// Claims paired with their episode labels.
#[derive(Debug, Clone)]
pub struct LabeledClaims {
    claims: Vec<ClaimRecord>,
    labels: Vec<EpisodeLabel>,
}

impl LabeledClaims {
    pub fn new(claims: Vec<ClaimRecord>, rules: &EpisodeRules) -> Self {
        let labels = assign_episodes(&claims, rules);
        LabeledClaims { claims, labels }
    }

    pub fn claims(&self) -> &[ClaimRecord] {
        &self.claims
    }

    pub fn labels(&self) -> &[EpisodeLabel] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClaimRecord, &EpisodeLabel)> {
        self.claims.iter().zip(&self.labels)
    }

    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }
}
