//! KPI panels: per-period counts and ratio estimates for one drill path in
//! one analysis window.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::path::{Attribute, DrillPath, SegmentValue};
use super::se::{self, ClaimantTotal};
use super::window::WindowSpec;
use crate::claims::{EnrollmentRecord, LabeledClaims};
use crate::month::Month;

/// The six ratio KPIs of the decomposition chain
/// `s = a·e` and `e = i·p·v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpiKind {
    /// s: cost per enrollee.
    CostPerEnrollee,
    /// a: cost per unit of quantity.
    UnitPrice,
    /// e: quantity per enrollee.
    Utilization,
    /// i: quantity per claimant.
    Intensity,
    /// p: claimants per patient.
    Participation,
    /// v: patients per enrollee.
    Prevalence,
}

impl KpiKind {
    pub const ALL: [KpiKind; 6] = [
        KpiKind::CostPerEnrollee,
        KpiKind::UnitPrice,
        KpiKind::Utilization,
        KpiKind::Intensity,
        KpiKind::Participation,
        KpiKind::Prevalence,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KpiKind::CostPerEnrollee => "cost_per_enrollee",
            KpiKind::UnitPrice => "unit_price",
            KpiKind::Utilization => "utilization",
            KpiKind::Intensity => "intensity",
            KpiKind::Participation => "participation",
            KpiKind::Prevalence => "prevalence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        KpiKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// A ratio estimate; `value` is `None` when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: Option<f64>,
    pub se: Option<f64>,
}

impl Estimate {
    pub const MISSING: Estimate = Estimate { value: None, se: None };

    pub fn new(value: f64, se: f64) -> Self {
        Estimate {
            value: Some(value),
            se: Some(se),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodKpis {
    pub start: Month,
    pub end: Month,
    pub cost: f64,
    pub quantity: f64,
    pub claimants: u64,
    pub patients: u64,
    /// Average enrollment: member-months divided by the resolution.
    pub enrollees: f64,
    pub episodes: u64,
    pub estimates: [Estimate; 6],
}

impl PeriodKpis {
    pub fn kpi(&self, kind: KpiKind) -> Estimate {
        self.estimates[kind.index()]
    }

    pub fn value(&self, kind: KpiKind) -> Option<f64> {
        self.estimates[kind.index()].value
    }
}

/// One drill path aggregated over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiPanel {
    pub path: String,
    pub window: String,
    pub resolution_months: u32,
    pub periods_per_year: usize,
    pub periods: Vec<PeriodKpis>,
}

impl KpiPanel {
    pub fn series(&self, kind: KpiKind) -> Vec<Option<f64>> {
        self.periods.iter().map(|p| p.value(kind)).collect()
    }

    /// Raw quantity per period, `None` where enrollment is empty.
    pub fn quantities(&self) -> Vec<Option<f64>> {
        self.periods
            .iter()
            .map(|p| (p.enrollees > 0.0).then_some(p.quantity))
            .collect()
    }

    pub fn member_months(&self) -> Vec<f64> {
        self.periods
            .iter()
            .map(|p| p.enrollees * f64::from(self.resolution_months))
            .collect()
    }
}

/// Precomputed per-window state shared by every panel of the window.
pub struct Aggregator<'a> {
    claims: &'a LabeledClaims,
    window: WindowSpec,
    /// Period of each claim, `None` when outside the window or the runout.
    claim_period: Vec<Option<usize>>,
    enrollee: Vec<u32>,
    member_months: Vec<f64>,
    /// Claims inside the window, overall and per condition value.
    in_window: Vec<usize>,
    by_condition: HashMap<String, Vec<usize>>,
    /// Distinct patients per period, overall and per condition value.
    patients_all: Vec<u64>,
    patients_by_condition: HashMap<String, Vec<u64>>,
}

impl<'a> Aggregator<'a> {
    /// `runout_months` is the largest admitted gap, in calendar months,
    /// between service and payment.
    pub fn new(
        claims: &'a LabeledClaims,
        enrollment: &[EnrollmentRecord],
        window: &WindowSpec,
        runout_months: u32,
    ) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let enrollee = claims
            .claims()
            .iter()
            .map(|c| {
                let next = ids.len() as u32;
                *ids.entry(c.enrollee_id.as_str()).or_insert(next)
            })
            .collect();
        let claim_period: Vec<Option<usize>> = claims
            .claims()
            .iter()
            .map(|c| {
                if c.payment_lag_months() > runout_months as i32 {
                    None
                } else {
                    window.period_of(c.service_month())
                }
            })
            .collect();
        let mut member_months = vec![0.0; window.periods()];
        for r in enrollment.iter().filter(|r| r.enrolled) {
            if let Some(p) = window.period_of(r.month) {
                member_months[p] += 1.0;
            }
        }
        let in_window: Vec<usize> = (0..claims.len()).filter(|&i| claim_period[i].is_some()).collect();
        let mut by_condition: HashMap<String, Vec<usize>> = HashMap::new();
        for &i in &in_window {
            by_condition
                .entry(claims.claims()[i].condition.clone())
                .or_default()
                .push(i);
        }
        let mut agg = Aggregator {
            claims,
            window: window.clone(),
            claim_period,
            enrollee,
            member_months,
            in_window,
            by_condition,
            patients_all: Vec::new(),
            patients_by_condition: HashMap::new(),
        };
        agg.patients_all = agg.count_distinct(&agg.in_window);
        agg.patients_by_condition = agg
            .by_condition
            .iter()
            .map(|(k, idx)| (k.clone(), agg.count_distinct(idx)))
            .collect();
        agg
    }

    fn count_distinct(&self, idx: &[usize]) -> Vec<u64> {
        let mut seen = HashSet::new();
        let mut counts = vec![0u64; self.window.periods()];
        for &i in idx {
            let p = self.claim_period[i].expect("in-window claim");
            if seen.insert((p, self.enrollee[i])) {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Claims that can match `path`: one condition's claims when the path
    /// fixes a condition value, otherwise every claim in the window.
    fn candidates(&self, path: &DrillPath) -> &[usize] {
        let fixed = path.segments.iter().find_map(|s| match (&s.attribute, &s.value) {
            (Attribute::Condition, SegmentValue::Value(v)) => Some(v),
            _ => None,
        });
        match fixed {
            Some(v) => self.by_condition.get(v).map_or(&[], Vec::as_slice),
            None => &self.in_window,
        }
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    fn matching<'p>(&'p self, path: &'p DrillPath) -> impl Iterator<Item = (usize, usize)> + 'p {
        let claims = self.claims.claims();
        let labels = self.claims.labels();
        self.candidates(path)
            .iter()
            .filter(move |&&i| path.matches(&claims[i], &labels[i]))
            .map(move |&i| (i, self.claim_period[i].expect("in-window claim")))
    }

    fn distinct_enrollees(&self, path: &DrillPath) -> Vec<u64> {
        match path.segments.as_slice() {
            [] => return self.patients_all.clone(),
            [s] => {
                if let SegmentValue::Value(v) = &s.value {
                    return self
                        .patients_by_condition
                        .get(v)
                        .cloned()
                        .unwrap_or_else(|| vec![0; self.window.periods()]);
                }
            }
            _ => {}
        }
        let idx: Vec<usize> = self.matching(path).map(|(i, _)| i).collect();
        self.count_distinct(&idx)
    }

    pub fn panel(&self, path: &DrillPath) -> KpiPanel {
        let n = self.window.periods();
        let mut cost = vec![0.0; n];
        let mut quantity = vec![0.0; n];
        let mut per_claimant: Vec<HashMap<u32, ClaimantTotal>> = vec![HashMap::new(); n];
        let mut episodes: Vec<HashSet<(u32, &str)>> = vec![HashSet::new(); n];
        for (i, p) in self.matching(path) {
            let claim = &self.claims.claims()[i];
            let who = self.enrollee[i];
            cost[p] += claim.allowed_amount;
            quantity[p] += claim.quantity;
            let t = per_claimant[p].entry(who).or_default();
            t.cost += claim.allowed_amount;
            t.quantity += claim.quantity;
            episodes[p].insert((who, self.claims.labels()[i].event_label.as_str()));
        }
        let patients = self.distinct_enrollees(&path.condition_scope());
        let resolution = f64::from(self.window.resolution_months);

        let periods = (0..n)
            .map(|p| {
                let (start, end) = self.window.period_bounds(p);
                let mut totals: Vec<(u32, ClaimantTotal)> = per_claimant[p].iter().map(|(k, v)| (*k, *v)).collect();
                totals.sort_by_key(|(k, _)| *k);
                let totals: Vec<ClaimantTotal> = totals.into_iter().map(|(_, t)| t).collect();
                let enrollees = self.member_months[p] / resolution;
                let claimants = totals.len() as u64;
                let estimates = [
                    se::cost_per_enrollee(&totals, cost[p], enrollees),
                    se::unit_price(&totals, cost[p], quantity[p]),
                    se::utilization(&totals, quantity[p], enrollees),
                    se::intensity(&totals, quantity[p]),
                    se::count_ratio(claimants as f64, patients[p] as f64),
                    se::count_ratio(patients[p] as f64, enrollees),
                ];
                PeriodKpis {
                    start,
                    end,
                    cost: cost[p],
                    quantity: quantity[p],
                    claimants,
                    patients: patients[p],
                    enrollees,
                    episodes: episodes[p].len() as u64,
                    estimates,
                }
            })
            .collect();
        KpiPanel {
            path: path.to_string(),
            window: self.window.id.clone(),
            resolution_months: self.window.resolution_months,
            periods_per_year: self.window.periods_per_year(),
            periods,
        }
    }
}

/// Aggregates a single drill path. For many paths over the same window,
/// build one [`Aggregator`] and call [`Aggregator::panel`] repeatedly.
pub fn aggregate(
    claims: &LabeledClaims,
    enrollment: &[EnrollmentRecord],
    path: &DrillPath,
    window: &WindowSpec,
    runout_months: u32,
) -> KpiPanel {
    Aggregator::new(claims, enrollment, window, runout_months).panel(path)
}
