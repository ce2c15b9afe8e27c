//! Viewpoints, drill paths, and support-filtered path enumeration.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::window::WindowSpec;
use crate::claims::{ClaimRecord, EpisodeLabel, LabeledClaims};
use crate::error::{Error, Result};

pub const OTHER: &str = "OTHER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Condition,
    ClaimType,
    TherapeuticClass,
    DrugName,
    Procedure,
    PlaceOfService,
    EventLabel,
}

impl Attribute {
    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Condition => "condition",
            Attribute::ClaimType => "claim_type",
            Attribute::TherapeuticClass => "therapeutic_class",
            Attribute::DrugName => "drug_name",
            Attribute::Procedure => "procedure",
            Attribute::PlaceOfService => "place_of_service",
            Attribute::EventLabel => "event_label",
        }
    }

    pub fn value_of<'a>(self, claim: &'a ClaimRecord, label: &'a EpisodeLabel) -> &'a str {
        match self {
            Attribute::Condition => &claim.condition,
            Attribute::ClaimType => claim.claim_type.as_str(),
            Attribute::TherapeuticClass => &claim.therapeutic_class,
            Attribute::DrugName => &claim.drug_name,
            Attribute::Procedure => &claim.procedure,
            Attribute::PlaceOfService => &claim.place_of_service,
            Attribute::EventLabel => &label.event_label,
        }
    }
}

/// An ordered attribute hierarchy with a support threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewpointSpec {
    pub attributes: Vec<Attribute>,
    /// Minimum distinct claimants a node needs in at least one period.
    #[serde(default = "default_support")]
    pub min_support: u64,
}

fn default_support() -> u64 {
    1
}

impl ViewpointSpec {
    pub fn new(attributes: Vec<Attribute>, min_support: u64) -> Result<Self> {
        let v = ViewpointSpec {
            attributes,
            min_support,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::invalid("viewpoint needs at least one attribute"));
        }
        let mut seen = HashSet::new();
        for a in &self.attributes {
            if !seen.insert(a) {
                return Err(Error::invalid(format!("viewpoint repeats attribute {}", a.as_str())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentValue {
    Value(String),
    /// Residual bucket: every value except the listed supported siblings,
    /// including empty values.
    Other { excluded: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub attribute: Attribute,
    pub value: SegmentValue,
}

impl Segment {
    pub fn value(attribute: Attribute, value: &str) -> Self {
        Segment {
            attribute,
            value: SegmentValue::Value(value.to_string()),
        }
    }

    fn matches(&self, claim: &ClaimRecord, label: &EpisodeLabel) -> bool {
        let v = self.attribute.value_of(claim, label);
        match &self.value {
            SegmentValue::Value(x) => x == v,
            SegmentValue::Other { excluded } => !excluded.iter().any(|e| e == v),
        }
    }

    fn display_value(&self) -> &str {
        match &self.value {
            SegmentValue::Value(v) => v,
            SegmentValue::Other { .. } => OTHER,
        }
    }
}

/// A prefix assignment of values along a viewpoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DrillPath {
    pub segments: Vec<Segment>,
}

impl DrillPath {
    pub fn new(segments: Vec<Segment>) -> Self {
        DrillPath { segments }
    }

    /// Convenience constructor from `(attribute, value)` pairs.
    pub fn of(pairs: &[(Attribute, &str)]) -> Self {
        DrillPath::new(pairs.iter().map(|&(a, v)| Segment::value(a, v)).collect())
    }

    pub fn child(&self, segment: Segment) -> Self {
        let mut segments = self.segments.clone();
        segments.push(segment);
        DrillPath { segments }
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn matches(&self, claim: &ClaimRecord, label: &EpisodeLabel) -> bool {
        self.segments.iter().all(|s| s.matches(claim, label))
    }

    /// The condition segment alone, which scopes the patient count.
    pub fn condition_scope(&self) -> DrillPath {
        DrillPath::new(
            self.segments
                .iter()
                .filter(|s| s.attribute == Attribute::Condition)
                .cloned()
                .collect(),
        )
    }

    pub fn last_value(&self) -> Option<&str> {
        self.segments.last().map(Segment::display_value)
    }

    pub fn value_of(&self, attribute: Attribute) -> Option<&str> {
        self.segments
            .iter()
            .find(|s| s.attribute == attribute)
            .map(Segment::display_value)
    }

    fn sort_key(&self) -> Vec<(Attribute, &str)> {
        self.segments.iter().map(|s| (s.attribute, s.display_value())).collect()
    }
}

impl PartialOrd for DrillPath {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DrillPath {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| self.segments.cmp(&other.segments))
    }
}

impl fmt::Display for DrillPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{}={}", s.attribute.as_str(), s.display_value())?;
        }
        Ok(())
    }
}

/// True when `parent` is a strict prefix of `child` in rendered form.
pub fn is_ancestor(parent: &str, child: &str) -> bool {
    child.len() > parent.len() && child.starts_with(parent) && child.as_bytes()[parent.len()] == b'/'
}

fn peak_claimants(claims: &LabeledClaims, idx: &[usize], window: &WindowSpec) -> u64 {
    let mut seen: HashSet<(usize, &str)> = HashSet::new();
    let mut counts = vec![0u64; window.periods()];
    for &i in idx {
        let c = &claims.claims()[i];
        if let Some(p) = window.period_of(c.service_month()) {
            if seen.insert((p, c.enrollee_id.as_str())) {
                counts[p] += 1;
            }
        }
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Every supported prefix path of the viewpoint, in lexicographic order.
///
/// A node is kept when its distinct-claimant count reaches `min_support` in
/// at least one period of the window. Below the top level, siblings that miss
/// the threshold, together with claims whose next attribute is empty, are
/// pooled into an `OTHER` node so that children always add up to the parent.
pub fn enumerate_paths(claims: &LabeledClaims, spec: &ViewpointSpec, window: &WindowSpec) -> Vec<DrillPath> {
    let members: Vec<usize> = claims
        .claims()
        .iter()
        .enumerate()
        .filter(|(_, c)| window.contains(c.service_month()))
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::new();
    descend(claims, spec, window, &DrillPath::default(), &members, 0, &mut out);
    out.sort();
    out
}

fn descend(
    claims: &LabeledClaims,
    spec: &ViewpointSpec,
    window: &WindowSpec,
    prefix: &DrillPath,
    members: &[usize],
    depth: usize,
    out: &mut Vec<DrillPath>,
) {
    let Some(&attribute) = spec.attributes.get(depth) else {
        return;
    };
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut residual = false;
    for &i in members {
        let v = attribute.value_of(&claims.claims()[i], &claims.labels()[i]);
        if v.is_empty() {
            residual = true;
        } else {
            groups.entry(v).or_default().push(i);
        }
    }
    if groups.is_empty() {
        return;
    }
    let mut supported = BTreeSet::new();
    for (value, idx) in &groups {
        if peak_claimants(claims, idx, window) >= spec.min_support {
            supported.insert(*value);
            let path = prefix.child(Segment::value(attribute, value));
            out.push(path.clone());
            descend(claims, spec, window, &path, idx, depth + 1, out);
        } else {
            residual = true;
        }
    }
    if depth > 0 && residual && !supported.is_empty() {
        out.push(prefix.child(Segment {
            attribute,
            value: SegmentValue::Other {
                excluded: supported.iter().map(|s| s.to_string()).collect(),
            },
        }));
    }
}
