//! Oracle cases stored as tab-separated text.
//!
//! Columns: `name`, `kind`, `provenance`, `oracle`, `inputs`, `expected`,
//! `tolerance`. Inputs are `key=value` pairs separated by `;`, and list
//! values are comma-separated. Lines starting with `#` are comments.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Paper,
    Trivial,
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub name: String,
    /// Operation under test, e.g. `ewa` or `migration_total`.
    pub kind: String,
    pub provenance: Provenance,
    /// Oracle function that produced a derived expectation.
    pub oracle: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub expected: f64,
    pub tolerance: f64,
}

impl OracleCase {
    pub fn text(&self, key: &str) -> &str {
        self.inputs
            .get(key)
            .unwrap_or_else(|| panic!("case {} lacks input {key}", self.name))
    }

    pub fn number(&self, key: &str) -> f64 {
        self.text(key)
            .parse()
            .unwrap_or_else(|_| panic!("case {}: input {key} is not a number", self.name))
    }

    pub fn numbers(&self, key: &str) -> Vec<f64> {
        self.text(key)
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .unwrap_or_else(|_| panic!("case {}: bad list {key}", self.name))
            })
            .collect()
    }

    /// A list of index lists written as `0 1,1,0 2` (groups by comma,
    /// members by space).
    pub fn index_lists(&self, key: &str) -> Vec<Vec<usize>> {
        self.text(key)
            .split(',')
            .map(|g| g.split_whitespace().map(|x| x.parse().expect("index")).collect())
            .collect()
    }

    pub fn matches(&self, got: f64) -> bool {
        (got - self.expected).abs() <= self.tolerance
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<OracleCase>, String> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or("empty corpus")?;
    let expected = "name\tkind\tprovenance\toracle\tinputs\texpected\ttolerance";
    if header != expected {
        return Err(format!("corpus header must be: {expected}"));
    }
    for (n, line) in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(format!("line {}: expected 7 columns, found {}", n + 1, cols.len()));
        }
        let provenance = match cols[2] {
            "PAPER" => Provenance::Paper,
            "TRIVIAL" => Provenance::Trivial,
            "DERIVED" => Provenance::Derived,
            other => return Err(format!("line {}: unknown provenance {other}", n + 1)),
        };
        let oracle = (!cols[3].is_empty()).then(|| cols[3].to_string());
        if provenance == Provenance::Derived && oracle.is_none() {
            return Err(format!("line {}: derived case must name its oracle", n + 1));
        }
        let mut inputs = BTreeMap::new();
        for pair in cols[4].split(';').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("line {}: input {pair} lacks '='", n + 1))?;
            inputs.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| format!("line {}: bad {what}", n + 1));
        out.push(OracleCase {
            name: cols[0].to_string(),
            kind: cols[1].to_string(),
            provenance,
            oracle,
            inputs,
            expected: num(cols[5], "expected")?,
            tolerance: num(cols[6], "tolerance")?,
        });
    }
    Ok(out)
}
