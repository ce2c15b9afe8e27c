use chrono::NaiveDate;

use super::*;
use crate::claims::{
    generate_synthetic, ClaimRecord, ClaimType, ConditionRates, EnrollmentRecord, EpisodeRules, LabeledClaims,
    SyntheticScenario, TreatmentRates,
};
use crate::month::Month;

fn rx(id: &str, date: (i32, u32, u32), condition: &str, class: &str, drug: &str, qty: f64, amount: f64) -> ClaimRecord {
    let d = NaiveDate::from_ymd_opt(date.0, date.1, date.2).unwrap();
    ClaimRecord {
        enrollee_id: id.into(),
        service_date: d,
        paid_date: d,
        claim_type: ClaimType::Rx,
        condition: condition.into(),
        therapeutic_class: class.into(),
        drug_name: drug.into(),
        procedure: String::new(),
        place_of_service: String::new(),
        quantity: qty,
        allowed_amount: amount,
    }
}

fn enroll(n: usize, from: &str, months: i32) -> Vec<EnrollmentRecord> {
    let start: Month = from.parse().unwrap();
    let mut out = Vec::new();
    for m in 0..months {
        for j in 0..n {
            out.push(EnrollmentRecord {
                enrollee_id: format!("E{j}"),
                month: start.offset(m),
                enrolled: true,
            });
        }
    }
    out
}

fn viewpoint(min_support: u64) -> ViewpointSpec {
    ViewpointSpec::new(
        vec![
            Attribute::Condition,
            Attribute::ClaimType,
            Attribute::TherapeuticClass,
            Attribute::DrugName,
        ],
        min_support,
    )
    .unwrap()
}

fn window24(resolution: u32) -> WindowSpec {
    WindowSpec::new("w", 24, resolution, "2016-12".parse().unwrap()).unwrap()
}

fn labeled(claims: Vec<ClaimRecord>) -> LabeledClaims {
    LabeledClaims::new(claims, &EpisodeRules::per_condition_and_type())
}

fn rendered(paths: &[DrillPath]) -> Vec<String> {
    paths.iter().map(ToString::to_string).collect()
}

#[test]
fn single_chain_yields_every_prefix() {
    let claims = labeled(vec![rx("E1", (2016, 2, 3), "DIAB2", "GLP-1", "Trulicity", 1.0, 10.0)]);
    let paths = enumerate_paths(&claims, &viewpoint(1), &window24(3));
    assert_eq!(
        rendered(&paths),
        vec![
            "condition=DIAB2",
            "condition=DIAB2/claim_type=RX",
            "condition=DIAB2/claim_type=RX/therapeutic_class=GLP-1",
            "condition=DIAB2/claim_type=RX/therapeutic_class=GLP-1/drug_name=Trulicity",
        ]
    );
}

#[test]
fn support_filter_can_empty_the_result() {
    let claims = labeled(vec![rx("E1", (2016, 2, 3), "DIAB2", "GLP-1", "Trulicity", 1.0, 10.0)]);
    assert!(enumerate_paths(&claims, &viewpoint(2), &window24(3)).is_empty());
}

#[test]
fn two_drugs_under_one_class_match_brute_force() {
    let claims = labeled(vec![
        rx("E1", (2016, 2, 3), "DIAB2", "Biguanides", "Metformin HCL", 1.0, 10.0),
        rx("E2", (2016, 2, 9), "DIAB2", "Biguanides", "Glumetza", 1.0, 30.0),
        rx("E3", (2015, 7, 9), "DIAB2", "Biguanides", "Glumetza", 2.0, 60.0),
    ]);
    let got: Vec<String> = rendered(&enumerate_paths(&claims, &viewpoint(1), &window24(3)));

    // Brute force: every distinct prefix of every claim's attribute tuple.
    let mut expected = std::collections::BTreeSet::new();
    for c in claims.claims() {
        let values = [
            ("condition", c.condition.as_str()),
            ("claim_type", c.claim_type.as_str()),
            ("therapeutic_class", c.therapeutic_class.as_str()),
            ("drug_name", c.drug_name.as_str()),
        ];
        for depth in 1..=values.len() {
            let p: Vec<String> = values[..depth].iter().map(|(a, v)| format!("{a}={v}")).collect();
            expected.insert(p.join("/"));
        }
    }
    let mut got_sorted = got.clone();
    got_sorted.sort();
    assert_eq!(got_sorted, expected.into_iter().collect::<Vec<_>>());
    assert_eq!(got.len(), 5);
}

#[test]
fn pruned_siblings_pool_into_other() {
    let mut claims = Vec::new();
    for j in 0..3 {
        claims.push(rx(&format!("E{j}"), (2016, 2, 3), "DIAB2", "Biguanides", "Metformin HCL", 1.0, 10.0));
    }
    claims.push(rx("E9", (2016, 2, 3), "DIAB2", "Biguanides", "Glumetza", 1.0, 30.0));
    let claims = labeled(claims);
    let paths = rendered(&enumerate_paths(&claims, &viewpoint(2), &window24(3)));
    assert!(paths.contains(&"condition=DIAB2/claim_type=RX/therapeutic_class=Biguanides/drug_name=OTHER".to_string()));
    assert!(!paths.iter().any(|p| p.ends_with("Glumetza")));
}

#[test]
fn one_row_hand_arithmetic() {
    let claims = labeled(vec![rx("E0", (2015, 1, 10), "DIAB2", "GLP-1", "Trulicity", 10.0, 100.0)]);
    let enrollment = enroll(10, "2015-01", 24);
    let w = WindowSpec::new("m", 24, 1, "2016-12".parse().unwrap()).unwrap();
    let path = DrillPath::of(&[(Attribute::Condition, "DIAB2"), (Attribute::DrugName, "Trulicity")]);
    let panel = aggregate(&claims, &enrollment, &path, &w, 3);
    let p0 = &panel.periods[0];
    assert_eq!(p0.enrollees, 10.0);
    assert_eq!(p0.claimants, 1);
    assert_eq!(p0.patients, 1);
    assert_eq!(p0.episodes, 1);
    assert_eq!(p0.value(KpiKind::CostPerEnrollee), Some(10.0));
    assert_eq!(p0.value(KpiKind::UnitPrice), Some(10.0));
    assert_eq!(p0.value(KpiKind::Utilization), Some(1.0));
    assert_eq!(p0.value(KpiKind::Intensity), Some(10.0));
    assert_eq!(p0.value(KpiKind::Participation), Some(1.0));
    assert_eq!(p0.value(KpiKind::Prevalence), Some(0.1));

    let p1 = &panel.periods[1];
    assert_eq!(p1.value(KpiKind::CostPerEnrollee), Some(0.0));
    assert_eq!(p1.value(KpiKind::UnitPrice), None);
    assert_eq!(p1.value(KpiKind::Utilization), Some(0.0));
}

#[test]
fn runout_excludes_late_payments_and_empty_enrollment_is_missing() {
    let mut late = rx("E0", (2015, 1, 10), "DIAB2", "GLP-1", "Trulicity", 10.0, 100.0);
    late.paid_date = NaiveDate::from_ymd_opt(2015, 6, 1).unwrap();
    let claims = labeled(vec![late]);
    let enrollment = enroll(10, "2015-01", 12);
    let w = WindowSpec::new("m", 24, 1, "2016-12".parse().unwrap()).unwrap();
    let path = DrillPath::of(&[(Attribute::Condition, "DIAB2")]);
    let strict = aggregate(&claims, &enrollment, &path, &w, 3);
    assert_eq!(strict.periods[0].cost, 0.0);
    let lenient = aggregate(&claims, &enrollment, &path, &w, 6);
    assert_eq!(lenient.periods[0].cost, 100.0);
    // second year has no enrollment rows
    assert_eq!(strict.periods[12].value(KpiKind::CostPerEnrollee), None);
    assert_eq!(strict.periods[12].value(KpiKind::Prevalence), None);
}

fn scenario(n: u32, months: u32, seed: u64) -> SyntheticScenario {
    let t = |name: &str, class: &str, participation: f64, intensity: f64, price: f64| TreatmentRates {
        condition: "DIAB2".into(),
        name: name.into(),
        claim_type: ClaimType::Rx,
        therapeutic_class: class.into(),
        drug_name: String::new(),
        procedure: String::new(),
        place_of_service: String::new(),
        participation,
        intensity,
        unit_price: price,
    };
    SyntheticScenario {
        n_enrollees: n,
        start_month: "2015-01".parse().unwrap(),
        months,
        seed,
        price_cv: 0.1,
        mean_payment_lag_days: 10.0,
        conditions: vec![ConditionRates {
            name: "DIAB2".into(),
            prevalence: 0.05,
        }],
        treatments: vec![
            t("Metformin HCL", "Biguanides", 0.4, 2.0, 12.0),
            t("Glumetza", "Biguanides", 0.2, 1.0, 40.0),
            t("Trulicity", "GLP-1", 0.3, 1.0, 300.0),
        ],
        injections: vec![],
        offset_scripts: vec![],
    }
}

#[test]
fn multiplicative_chain_and_additivity_hold() {
    let s = scenario(3000, 24, 5);
    let data = generate_synthetic(&s).unwrap();
    let claims = labeled(data.claims);
    let w = window24(3);
    let spec = viewpoint(40);
    let paths = enumerate_paths(&claims, &spec, &w);
    let agg = Aggregator::new(&claims, &data.enrollment, &w, 3);
    let panels: Vec<KpiPanel> = paths.iter().map(|p| agg.panel(p)).collect();

    for panel in &panels {
        for p in &panel.periods {
            let s = p.value(KpiKind::CostPerEnrollee).unwrap();
            if let (Some(a), Some(e)) = (p.value(KpiKind::UnitPrice), p.value(KpiKind::Utilization)) {
                assert!((s - a * e).abs() <= 1e-9 * s.abs());
            }
            if let (Some(e), Some(i), Some(pp), Some(v)) = (
                p.value(KpiKind::Utilization),
                p.value(KpiKind::Intensity),
                p.value(KpiKind::Participation),
                p.value(KpiKind::Prevalence),
            ) {
                assert!((e - i * pp * v).abs() <= 1e-9 * e.abs());
            }
            assert!(p.claimants <= p.patients && (p.patients as f64) <= p.enrollees);
        }
    }

    // parent cost equals the sum of its direct children (OTHER included)
    let names: Vec<String> = rendered(&paths);
    for (pi, parent) in names.iter().enumerate() {
        let depth = paths[pi].depth();
        let kids: Vec<usize> = (0..names.len())
            .filter(|&c| paths[c].depth() == depth + 1 && is_ancestor(parent, &names[c]))
            .collect();
        if kids.is_empty() {
            continue;
        }
        for t in 0..w.periods() {
            let total: f64 = kids.iter().map(|&c| panels[c].periods[t].cost).sum();
            let parent_cost = panels[pi].periods[t].cost;
            assert!((total - parent_cost).abs() <= 1e-9 * parent_cost.abs().max(1.0), "{parent} period {t}");
        }
    }
    assert!(names.iter().any(|n| n.ends_with("drug_name=OTHER")) || names.len() >= 7);
}

#[test]
fn three_month_periods_sum_to_six_month_periods() {
    let s = scenario(800, 24, 9);
    let data = generate_synthetic(&s).unwrap();
    let claims = labeled(data.claims);
    let path = DrillPath::of(&[(Attribute::Condition, "DIAB2"), (Attribute::ClaimType, "RX")]);
    let q = aggregate(&claims, &data.enrollment, &path, &window24(3), 3);
    let h = aggregate(&claims, &data.enrollment, &path, &window24(6), 3);
    for (k, half) in h.periods.iter().enumerate() {
        let a = &q.periods[2 * k];
        let b = &q.periods[2 * k + 1];
        assert!((a.cost + b.cost - half.cost).abs() < 1e-6);
        assert_eq!(a.quantity + b.quantity, half.quantity);
        assert_eq!((a.enrollees + b.enrollees) * 3.0, half.enrollees * 6.0);
    }
}

#[test]
fn scripted_prevalence_recovered_within_three_se() {
    let s = scenario(10_000, 24, 21);
    let data = generate_synthetic(&s).unwrap();
    let claims = labeled(data.claims);
    let w = WindowSpec::new("m", 24, 1, "2016-12".parse().unwrap()).unwrap();
    let path = DrillPath::of(&[(Attribute::Condition, "DIAB2")]);
    let panel = aggregate(&claims, &data.enrollment, &path, &w, 3);
    let v = panel.series(KpiKind::Prevalence);
    let mean = v.iter().flatten().sum::<f64>() / v.len() as f64;
    // A patient appears only if they hold at least one claim, so the observed
    // rate is prevalence times P(any claim | patient).
    let p_any: f64 = 1.0 - (1.0 - 0.4) * (1.0 - 0.2) * (1.0 - 0.3);
    let expected = 0.05 * p_any;
    let se = (expected * (1.0 - expected) / 10_000.0 / 24.0).sqrt();
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn yoy_null_and_hand_arithmetic() {
    let mk = |vals: &[(f64, f64)]| KpiPanel {
        path: "p".into(),
        window: "w".into(),
        resolution_months: 6,
        periods_per_year: 2,
        periods: vals
            .iter()
            .map(|&(v, se)| PeriodKpis {
                start: "2015-01".parse().unwrap(),
                end: "2015-06".parse().unwrap(),
                cost: 0.0,
                quantity: 0.0,
                claimants: 0,
                patients: 0,
                enrollees: 1.0,
                episodes: 0,
                estimates: [Estimate::new(v, se); 6],
            })
            .collect(),
    };
    let flat = yoy_normalize(&mk(&[(3.0, 1.0), (4.0, 1.0), (3.0, 1.0), (4.0, 1.0)]), KpiKind::Utilization).unwrap();
    assert_eq!(flat.values, vec![Some(0.0), Some(0.0)]);

    let r2 = 2f64.sqrt();
    let z = yoy_normalize(&mk(&[(10.0, r2), (10.0, r2), (12.0, r2), (10.0, 0.0)]), KpiKind::UnitPrice).unwrap();
    assert!((z.values[0].unwrap() - 1.0).abs() < 1e-12);
    assert!(z.values[1].unwrap().abs() < 1e-12);

    assert!(yoy_normalize(&mk(&[(1.0, 1.0), (1.0, 1.0)]), KpiKind::Utilization).is_err());
}

#[test]
fn synthetic_null_z_is_standardized() {
    // 1,000 independent no-change replications; pooled z must look N(0, 1).
    let mut zs = Vec::new();
    let path = DrillPath::of(&[(Attribute::Condition, "DIAB2"), (Attribute::DrugName, "Metformin HCL")]);
    for rep in 0..1000 {
        let mut s = scenario(2000, 24, 1000 + rep);
        s.treatments.truncate(1);
        let data = generate_synthetic(&s).unwrap();
        let claims = labeled(data.claims);
        let panel = aggregate(&claims, &data.enrollment, &path, &window24(3), 3);
        for kpi in [KpiKind::CostPerEnrollee, KpiKind::Utilization] {
            zs.extend(yoy_normalize(&panel, kpi).unwrap().present());
        }
    }
    let n = zs.len() as f64;
    let mean = zs.iter().sum::<f64>() / n;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.1, "mean {mean}");
    assert!((var - 1.0).abs() <= 0.1, "variance {var}");
}
