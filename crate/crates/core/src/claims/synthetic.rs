//! Seeded synthetic claims with scripted rates and known ground truth.
//!
//! Each month, every enrollee independently has each condition with the
//! scripted prevalence; each patient independently claims each treatment of
//! the condition with the scripted participation; the claimed quantity is
//! Poisson with the scripted intensity; and the allowed amount is quantity
//! times unit price times a mean-one Gamma jitter.

use std::collections::BTreeSet;

use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use super::model::{ClaimRecord, ClaimType, EnrollmentRecord};
use crate::error::{Error, Result};
use crate::month::Month;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticScenario {
    pub n_enrollees: u32,
    pub start_month: Month,
    pub months: u32,
    pub seed: u64,
    /// Coefficient of variation of the per-claim price jitter.
    #[serde(default = "default_price_cv")]
    pub price_cv: f64,
    #[serde(default = "default_lag_days")]
    pub mean_payment_lag_days: f64,
    #[serde(rename = "condition", default)]
    pub conditions: Vec<ConditionRates>,
    #[serde(rename = "treatment", default)]
    pub treatments: Vec<TreatmentRates>,
    #[serde(rename = "injection", default)]
    pub injections: Vec<Injection>,
    #[serde(rename = "offset_script", default)]
    pub offset_scripts: Vec<OffsetScript>,
}

fn default_price_cv() -> f64 {
    0.1
}

fn default_lag_days() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionRates {
    pub name: String,
    /// Probability that an enrollee is a patient in a given month.
    pub prevalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentRates {
    pub condition: String,
    /// Unique within the condition. For RX treatments it doubles as the
    /// drug name when `drug_name` is left empty.
    pub name: String,
    pub claim_type: ClaimType,
    #[serde(default)]
    pub therapeutic_class: String,
    #[serde(default)]
    pub drug_name: String,
    #[serde(default)]
    pub procedure: String,
    #[serde(default)]
    pub place_of_service: String,
    /// Probability that a patient claims this treatment in a given month.
    pub participation: f64,
    /// Mean quantity per claimant.
    pub intensity: f64,
    pub unit_price: f64,
}

impl TreatmentRates {
    fn effective_drug_name(&self) -> &str {
        if self.claim_type == ClaimType::Rx && self.drug_name.is_empty() {
            &self.name
        } else {
            &self.drug_name
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateComponent {
    UnitPrice,
    Intensity,
    Participation,
    Prevalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InjectionShape {
    Step,
    Ramp,
}

/// A scripted relative change of one rate component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub condition: String,
    /// Required for every component except prevalence.
    #[serde(default)]
    pub treatment: Option<String>,
    pub component: RateComponent,
    /// 1-based month index within the scenario.
    pub onset_month: u32,
    pub shape: InjectionShape,
    pub magnitude: f64,
}

impl Injection {
    /// Multiplier applied to the target component in 1-based month `m`.
    pub fn multiplier(&self, m: u32, months: u32) -> f64 {
        if m < self.onset_month {
            return 1.0;
        }
        match self.shape {
            InjectionShape::Step => 1.0 + self.magnitude,
            InjectionShape::Ramp => {
                let span = f64::from(months - self.onset_month + 1);
                1.0 + self.magnitude * f64::from(m - self.onset_month + 1) / span
            }
        }
    }
}

/// Moves `monthly_switch_fraction` of the remaining claimants of
/// `from_treatment` to `to_treatment` every month from onset, cumulatively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetScript {
    pub condition: String,
    pub from_treatment: String,
    pub to_treatment: String,
    pub onset_month: u32,
    pub monthly_switch_fraction: f64,
}

impl OffsetScript {
    /// Fraction of the original `from` participation still retained in month `m`.
    pub fn retained(&self, m: u32) -> f64 {
        if m < self.onset_month {
            1.0
        } else {
            (1.0 - self.monthly_switch_fraction).powi((m - self.onset_month + 1) as i32)
        }
    }
}

/// The scripted truth a synthetic run was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub start_month: Month,
    pub months: u32,
    #[serde(rename = "injection", default)]
    pub injections: Vec<Injection>,
    #[serde(rename = "offset_script", default)]
    pub offset_scripts: Vec<OffsetScript>,
}

/// Expected rates of one (condition, treatment) cell in one month.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRates {
    pub condition: String,
    pub treatment: String,
    pub prevalence: f64,
    pub participation: f64,
    pub intensity: f64,
    pub unit_price: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub claims: Vec<ClaimRecord>,
    pub enrollment: Vec<EnrollmentRecord>,
    pub truth: GroundTruth,
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl SyntheticScenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: SyntheticScenario = toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(format!("scenario: {m}")));
        if self.n_enrollees == 0 || self.months == 0 {
            return bad("n_enrollees and months must be positive".into());
        }
        if !(self.price_cv >= 0.0) || !(self.mean_payment_lag_days >= 0.0) {
            return bad("price_cv and mean_payment_lag_days must be non-negative".into());
        }
        let mut names = BTreeSet::new();
        for c in &self.conditions {
            if !unit_interval(c.prevalence) {
                return bad(format!("prevalence of {} outside [0,1]", c.name));
            }
            if !names.insert(c.name.as_str()) {
                return bad(format!("duplicate condition {}", c.name));
            }
        }
        let mut cells = BTreeSet::new();
        for t in &self.treatments {
            if !names.contains(t.condition.as_str()) {
                return bad(format!("treatment {} references unknown condition {}", t.name, t.condition));
            }
            if !cells.insert((t.condition.as_str(), t.name.as_str())) {
                return bad(format!("duplicate treatment {}/{}", t.condition, t.name));
            }
            if !unit_interval(t.participation) || !(t.intensity >= 0.0) || !(t.unit_price >= 0.0) {
                return bad(format!("rates of {}/{} out of range", t.condition, t.name));
            }
            match t.claim_type {
                ClaimType::Rx if !t.procedure.is_empty() => {
                    return bad(format!("RX treatment {} must not set procedure", t.name))
                }
                ClaimType::Inpatient | ClaimType::Outpatient if !t.drug_name.is_empty() => {
                    return bad(format!("medical treatment {} must not set drug_name", t.name))
                }
                _ => {}
            }
        }
        let in_range = |m: u32| (1..=self.months).contains(&m);
        for inj in &self.injections {
            if !in_range(inj.onset_month) {
                return bad(format!("injection onset {} outside 1..={}", inj.onset_month, self.months));
            }
            if !(inj.magnitude > -1.0) || !inj.magnitude.is_finite() {
                return bad("injection magnitude must be finite and greater than -1".into());
            }
            match (&inj.component, &inj.treatment) {
                (RateComponent::Prevalence, Some(_)) => {
                    return bad("prevalence injections apply to a condition, not a treatment".into())
                }
                (RateComponent::Prevalence, None) => {
                    if !names.contains(inj.condition.as_str()) {
                        return bad(format!("injection references unknown condition {}", inj.condition));
                    }
                }
                (_, None) => return bad("injection needs a treatment".into()),
                (_, Some(t)) => {
                    if !cells.contains(&(inj.condition.as_str(), t.as_str())) {
                        return bad(format!("injection references unknown treatment {}/{t}", inj.condition));
                    }
                }
            }
        }
        for s in &self.offset_scripts {
            if !in_range(s.onset_month) {
                return bad(format!("offset onset {} outside 1..={}", s.onset_month, self.months));
            }
            if !unit_interval(s.monthly_switch_fraction) {
                return bad("switch fraction outside [0,1]".into());
            }
            for t in [&s.from_treatment, &s.to_treatment] {
                if !cells.contains(&(s.condition.as_str(), t.as_str())) {
                    return bad(format!("offset script references unknown treatment {}/{t}", s.condition));
                }
            }
            if s.from_treatment == s.to_treatment {
                return bad("offset script must move between distinct treatments".into());
            }
        }
        Ok(())
    }

    pub fn month_range(&self) -> (Month, Month) {
        (self.start_month, self.start_month.offset(self.months as i32 - 1))
    }

    /// Scripted rates for 1-based month index `m`, one entry per treatment in
    /// declaration order.
    pub fn expected_rates(&self, m: u32) -> Vec<CellRates> {
        let mut cells: Vec<CellRates> = self
            .treatments
            .iter()
            .map(|t| CellRates {
                condition: t.condition.clone(),
                treatment: t.name.clone(),
                prevalence: self
                    .conditions
                    .iter()
                    .find(|c| c.name == t.condition)
                    .map_or(0.0, |c| c.prevalence),
                participation: t.participation,
                intensity: t.intensity,
                unit_price: t.unit_price,
            })
            .collect();
        for inj in &self.injections {
            let factor = inj.multiplier(m, self.months);
            for cell in cells.iter_mut().filter(|c| c.condition == inj.condition) {
                match (inj.component, inj.treatment.as_deref()) {
                    (RateComponent::Prevalence, _) => cell.prevalence *= factor,
                    (component, Some(t)) if t == cell.treatment => match component {
                        RateComponent::UnitPrice => cell.unit_price *= factor,
                        RateComponent::Intensity => cell.intensity *= factor,
                        RateComponent::Participation => cell.participation *= factor,
                        RateComponent::Prevalence => unreachable!(),
                    },
                    _ => {}
                }
            }
        }
        for script in &self.offset_scripts {
            let find = |name: &str| {
                cells
                    .iter()
                    .position(|c| c.condition == script.condition && c.treatment == name)
            };
            if let (Some(from), Some(to)) = (find(&script.from_treatment), find(&script.to_treatment)) {
                let before = cells[from].participation;
                let after = before * script.retained(m);
                cells[from].participation = after;
                cells[to].participation += before - after;
            }
        }
        for c in &mut cells {
            c.prevalence = c.prevalence.clamp(0.0, 1.0);
            c.participation = c.participation.clamp(0.0, 1.0);
        }
        cells
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            start_month: self.start_month,
            months: self.months,
            injections: self.injections.clone(),
            offset_scripts: self.offset_scripts.clone(),
        }
    }
}

fn round_cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn enrollee_id(j: u32) -> String {
    format!("E{j:06}")
}

/// Generates claims, enrollment, and the ground truth for a scenario.
/// Identical scenarios (including seed) give identical output.
pub fn generate_synthetic(scenario: &SyntheticScenario) -> Result<SyntheticData> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let ids: Vec<String> = (0..scenario.n_enrollees).map(enrollee_id).collect();
    let jitter = if scenario.price_cv > 0.0 {
        let shape = 1.0 / (scenario.price_cv * scenario.price_cv);
        Some(Gamma::new(shape, 1.0 / shape).map_err(|e| Error::invalid(e.to_string()))?)
    } else {
        None
    };
    let lag = if scenario.mean_payment_lag_days > 0.0 {
        Some(Exp::new(1.0 / scenario.mean_payment_lag_days).map_err(|e| Error::invalid(e.to_string()))?)
    } else {
        None
    };

    let mut claims = Vec::new();
    let mut enrollment = Vec::with_capacity(ids.len() * scenario.months as usize);
    for m in 1..=scenario.months {
        let month = scenario.start_month.offset(m as i32 - 1);
        enrollment.extend(ids.iter().map(|id| EnrollmentRecord {
            enrollee_id: id.clone(),
            month,
            enrolled: true,
        }));
        let rates = scenario.expected_rates(m);
        for condition in &scenario.conditions {
            let members: Vec<(&TreatmentRates, &CellRates)> = scenario
                .treatments
                .iter()
                .zip(&rates)
                .filter(|(t, _)| t.condition == condition.name)
                .collect();
            let Some(prevalence) = members.first().map(|(_, r)| r.prevalence) else {
                continue;
            };
            let quantity_dists: Vec<Option<Poisson<f64>>> = members
                .iter()
                .map(|(_, r)| (r.intensity > 0.0).then(|| Poisson::new(r.intensity).expect("positive mean")))
                .collect();
            for id in &ids {
                if rng.random::<f64>() >= prevalence {
                    continue;
                }
                for ((treatment, cell), qd) in members.iter().zip(&quantity_dists) {
                    if rng.random::<f64>() >= cell.participation {
                        continue;
                    }
                    let quantity = qd.as_ref().map_or(0.0, |d| d.sample(&mut rng));
                    let price = cell.unit_price * jitter.as_ref().map_or(1.0, |g| g.sample(&mut rng));
                    let day: u32 = rng.random_range(1..=28);
                    let service_date = month.first_day() + Duration::days(i64::from(day) - 1);
                    let lag_days = lag.as_ref().map_or(0.0, |d| d.sample(&mut rng)).floor() as i64;
                    claims.push(ClaimRecord {
                        enrollee_id: id.clone(),
                        service_date,
                        paid_date: service_date + Duration::days(lag_days),
                        claim_type: treatment.claim_type,
                        condition: condition.name.clone(),
                        therapeutic_class: treatment.therapeutic_class.clone(),
                        drug_name: treatment.effective_drug_name().to_string(),
                        procedure: treatment.procedure.clone(),
                        place_of_service: treatment.place_of_service.clone(),
                        quantity,
                        allowed_amount: round_cents(quantity * price),
                    });
                }
            }
        }
    }
    Ok(SyntheticData {
        claims,
        enrollment,
        truth: scenario.ground_truth(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_drug_scenario(n: u32, months: u32) -> SyntheticScenario {
        SyntheticScenario {
            n_enrollees: n,
            start_month: "2014-01".parse().unwrap(),
            months,
            seed: 11,
            price_cv: 0.1,
            mean_payment_lag_days: 20.0,
            conditions: vec![ConditionRates {
                name: "DIAB2".into(),
                prevalence: 0.05,
            }],
            treatments: vec![
                TreatmentRates {
                    condition: "DIAB2".into(),
                    name: "A".into(),
                    claim_type: ClaimType::Rx,
                    therapeutic_class: "C1".into(),
                    drug_name: String::new(),
                    procedure: String::new(),
                    place_of_service: String::new(),
                    participation: 0.4,
                    intensity: 2.0,
                    unit_price: 50.0,
                },
                TreatmentRates {
                    condition: "DIAB2".into(),
                    name: "B".into(),
                    claim_type: ClaimType::Rx,
                    therapeutic_class: "C1".into(),
                    drug_name: String::new(),
                    procedure: String::new(),
                    place_of_service: String::new(),
                    participation: 0.3,
                    intensity: 1.0,
                    unit_price: 20.0,
                },
            ],
            injections: vec![],
            offset_scripts: vec![],
        }
    }

    #[test]
    fn null_scenario_has_constant_rates() {
        let s = two_drug_scenario(100, 24);
        let data = generate_synthetic(&s).unwrap();
        assert!(data.truth.injections.is_empty());
        let first = s.expected_rates(1);
        for m in 2..=24 {
            assert_eq!(s.expected_rates(m), first);
        }
    }

    #[test]
    fn same_seed_is_deterministic() {
        let s = two_drug_scenario(500, 6);
        let a = generate_synthetic(&s).unwrap();
        let b = generate_synthetic(&s).unwrap();
        assert_eq!(a.claims, b.claims);
        assert_eq!(a.enrollment, b.enrollment);
        let mut s2 = s.clone();
        s2.seed += 1;
        assert_ne!(generate_synthetic(&s2).unwrap().claims, a.claims);
    }

    #[test]
    fn step_price_injection_raises_empirical_price() {
        let mut s = two_drug_scenario(10_000, 24);
        s.injections.push(Injection {
            condition: "DIAB2".into(),
            treatment: Some("A".into()),
            component: RateComponent::UnitPrice,
            onset_month: 13,
            shape: InjectionShape::Step,
            magnitude: 0.5,
        });
        let data = generate_synthetic(&s).unwrap();
        let (start, _) = s.month_range();
        let mut sums = [(0.0, 0.0); 2];
        for c in data.claims.iter().filter(|c| c.drug_name == "A") {
            let half = usize::from(start.months_until(c.service_month()) >= 12);
            sums[half].0 += c.allowed_amount;
            sums[half].1 += c.quantity;
        }
        let before = sums[0].0 / sums[0].1;
        let after = sums[1].0 / sums[1].1;
        let lift = after / before - 1.0;
        assert!((lift - 0.5).abs() <= 0.05, "lift {lift}");
    }

    #[test]
    fn claimant_counts_match_script_within_three_se() {
        let s = two_drug_scenario(10_000, 12);
        let data = generate_synthetic(&s).unwrap();
        let (start, _) = s.month_range();
        for (drug, participation) in [("A", 0.4_f64), ("B", 0.3)] {
            let rate = 0.05 * participation;
            let expected = 10_000.0 * rate;
            let se = (10_000.0 * rate * (1.0 - rate)).sqrt();
            let mut per_month = [0.0; 12];
            for c in data.claims.iter().filter(|c| c.drug_name == drug) {
                per_month[start.months_until(c.service_month()) as usize] += 1.0;
            }
            // mean over 12 months has se / sqrt(12)
            let mean = per_month.iter().sum::<f64>() / 12.0;
            assert!((mean - expected).abs() <= 3.0 * se / 12f64.sqrt(), "{drug}: {mean} vs {expected}");
        }
    }

    #[test]
    fn ramp_interpolates_to_full_magnitude() {
        let inj = Injection {
            condition: "X".into(),
            treatment: Some("A".into()),
            component: RateComponent::Participation,
            onset_month: 13,
            shape: InjectionShape::Ramp,
            magnitude: 1.2,
        };
        assert_eq!(inj.multiplier(12, 24), 1.0);
        assert!((inj.multiplier(13, 24) - 1.1).abs() < 1e-12);
        assert!((inj.multiplier(24, 24) - 2.2).abs() < 1e-12);
    }

    #[test]
    fn offset_script_conserves_participation() {
        let mut s = two_drug_scenario(10, 24);
        s.offset_scripts.push(OffsetScript {
            condition: "DIAB2".into(),
            from_treatment: "A".into(),
            to_treatment: "B".into(),
            onset_month: 13,
            monthly_switch_fraction: 0.1,
        });
        for m in [1, 12, 13, 24] {
            let r = s.expected_rates(m);
            assert!((r[0].participation + r[1].participation - 0.7).abs() < 1e-12);
        }
        let r = s.expected_rates(14);
        assert!((r[0].participation - 0.4 * 0.81).abs() < 1e-12);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = two_drug_scenario(10, 24);
        s.injections.push(Injection {
            condition: "DIAB2".into(),
            treatment: Some("A".into()),
            component: RateComponent::UnitPrice,
            onset_month: 30,
            shape: InjectionShape::Step,
            magnitude: 0.5,
        });
        assert!(generate_synthetic(&s).is_err());

        let mut s = two_drug_scenario(10, 24);
        s.offset_scripts.push(OffsetScript {
            condition: "DIAB2".into(),
            from_treatment: "A".into(),
            to_treatment: "B".into(),
            onset_month: 3,
            monthly_switch_fraction: 1.5,
        });
        assert!(s.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut s = two_drug_scenario(10, 24);
        s.injections.push(Injection {
            condition: "DIAB2".into(),
            treatment: None,
            component: RateComponent::Prevalence,
            onset_month: 5,
            shape: InjectionShape::Ramp,
            magnitude: -0.2,
        });
        let text = s.to_toml();
        assert_eq!(SyntheticScenario::from_toml(&text).unwrap(), s);
    }
}
