//! Library results checked against the independent reference oracles.

mod common;

use costdriver::hierarchy::NormalizedSeries;
use costdriver::impact::{ewa, impact_total, ImpactBreakdown, ImpactConfig};
use costdriver::offsets::{compute_migration, offset_cost_impact, OffsetNetwork, OffsetNode};
use costdriver::spc::{cusum, CusumConfig, ReportingRule};
use costdriver_testkit::{
    brute_force_migration, cusum_recurrence, decomposition_by_definition, ewa_direct, offset_impact_by_definition,
    parse_corpus, proportional_flows_feasible, OffsetFixture, OracleCase, Provenance,
};
use rand::Rng;

use common::{data_dir, random_panel, rng};

fn corpus() -> Vec<OracleCase> {
    let text = std::fs::read_to_string(data_dir().join("oracle_cases.tsv")).unwrap();
    parse_corpus(&text).unwrap()
}

fn network(c: &OracleCase) -> OffsetNetwork {
    let o = c.numbers("o");
    let r = c.numbers("r");
    let po = c.inputs.get("po").map(|_| c.numbers("po"));
    let pr = c.inputs.get("pr").map(|_| c.numbers("pr"));
    let node = |name: String, cap: f64, price: Option<f64>| {
        let n = OffsetNode::new(&name, cap);
        match price {
            Some(p) => n.priced(p),
            None => n,
        }
    };
    let originators = o
        .iter()
        .enumerate()
        .map(|(i, &x)| node(format!("o{i}"), x, po.as_ref().map(|p| p[i])))
        .collect();
    let receivers = r
        .iter()
        .enumerate()
        .map(|(j, &x)| node(format!("r{j}"), x, pr.as_ref().map(|p| p[j])))
        .collect();
    OffsetNetwork::with_reach(originators, receivers, c.index_lists("reach")).unwrap()
}

fn cusum_of(c: &OracleCase) -> costdriver::spc::DetectionResult {
    let h = c.inputs.get("h").map_or(1e9, |_| c.number("h"));
    let cfg = CusumConfig::new(c.number("k"), h, h, ReportingRule::AnyPoint);
    cusum(&NormalizedSeries::from_values(c.numbers("z")), &cfg).unwrap()
}

/// The library's answer for a corpus case.
fn library(c: &OracleCase) -> f64 {
    match c.kind.as_str() {
        "ewa" => ewa(&c.numbers("values"), c.number("w")).unwrap(),
        "impact_total" => {
            let s = c.numbers("s");
            let cfg = ImpactConfig::new(c.number("w"), c.number("periods_per_year") as usize, s.len()).unwrap();
            impact_total(&s, &cfg).unwrap().unwrap()
        }
        "cusum_final_upper" => cusum_of(c).final_upper(),
        "cusum_final_lower" => cusum_of(c).final_lower(),
        "cusum_first_crossing_up" => cusum_of(c).first_crossing_up.expect("crossing") as f64,
        "migration_total" | "brute_force_migration" => compute_migration(&network(c)).unwrap().total,
        "migration_outflow_0" => compute_migration(&network(c)).unwrap().outflows[0],
        "migration_outflow_1" => compute_migration(&network(c)).unwrap().outflows[1],
        "offset_impact" => {
            let net = network(c);
            let flows = compute_migration(&net).unwrap();
            offset_cost_impact(&net, &flows, c.number("member_months")).unwrap()
        }
        other => panic!("case {}: unknown kind {other}", c.name),
    }
}

fn leak(s: String) -> &'static str {
    Box::leak(s.into_boxed_str())
}

/// The named oracle's answer for a corpus case.
fn oracle(c: &OracleCase, name: &str) -> f64 {
    match name {
        "ewa_direct" => match c.kind.as_str() {
            "ewa" => ewa_direct(&c.numbers("values"), c.number("w")),
            "impact_total" => {
                let s = c.numbers("s");
                let t = c.number("periods_per_year") as usize;
                let diffs: Vec<f64> = (t..s.len()).map(|i| s[i] - s[i - t]).collect();
                ewa_direct(&diffs, c.number("w"))
            }
            k => panic!("ewa_direct cannot answer {k}"),
        },
        "cusum_recurrence" => {
            let z: Vec<Option<f64>> = c.numbers("z").into_iter().map(Some).collect();
            let (u, d) = cusum_recurrence(&z, c.number("k"));
            match c.kind.as_str() {
                "cusum_final_upper" => *u.last().unwrap(),
                "cusum_final_lower" => *d.last().unwrap(),
                "cusum_first_crossing_up" => u.iter().position(|&x| x > c.number("h")).expect("crossing") as f64,
                k => panic!("cusum_recurrence cannot answer {k}"),
            }
        }
        "brute_force_migration" => {
            brute_force_migration(&c.numbers("o"), &c.numbers("r"), &c.index_lists("reach"), 1e-3)
        }
        "proportional_flows_feasible" => {
            let (o, r, reach) = (c.numbers("o"), c.numbers("r"), c.index_lists("reach"));
            let pm = brute_force_migration(&o, &r, &reach, 1e-3);
            assert!(proportional_flows_feasible(&o, &r, &reach, pm));
            let i: usize = c.kind.rsplit('_').next().unwrap().parse().unwrap();
            pm * o[i] / o.iter().sum::<f64>()
        }
        "offset_impact_by_definition" => {
            let nodes = |caps: Vec<f64>, prices: Vec<f64>, tag: &str| -> Vec<(&'static str, f64, f64)> {
                caps.into_iter()
                    .zip(prices)
                    .enumerate()
                    .map(|(i, (cap, price))| (leak(format!("{tag}{i}")), cap, price))
                    .collect()
            };
            offset_impact_by_definition(&OffsetFixture {
                condition: "C",
                originators: nodes(c.numbers("o"), c.numbers("po"), "o"),
                receivers: nodes(c.numbers("r"), c.numbers("pr"), "r"),
                member_months: c.number("member_months"),
                target: c.expected,
            })
        }
        other => panic!("case {}: unknown oracle {other}", c.name),
    }
}

#[test]
fn corpus_is_well_formed() {
    let cases = corpus();
    assert!(cases.len() >= 15);
    let mut names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), cases.len(), "duplicate case names");
    assert!(cases.iter().any(|c| c.provenance == Provenance::Derived));
}

#[test]
fn corpus_oracles_reproduce_expectations() {
    for c in corpus() {
        if let Some(name) = &c.oracle {
            let got = oracle(&c, name);
            assert!(c.matches(got), "oracle {name} on {}: {got} vs {}", c.name, c.expected);
        }
    }
}

#[test]
fn library_reproduces_corpus() {
    for c in corpus() {
        let got = library(&c);
        if c.kind == "brute_force_migration" {
            // The closed form is conservative on non-complete topologies.
            assert!(got <= c.expected + c.tolerance, "{}: {got} exceeds {}", c.name, c.expected);
            assert!(got > 0.0);
        } else {
            assert!(c.matches(got), "{}: {got} vs {}", c.name, c.expected);
        }
    }
}

#[test]
fn decomposition_agrees_with_reference_on_random_panels() {
    let mut r = rng(101);
    for trial in 0..1000 {
        let len = r.random_range(8..=40);
        let t = [2, 4, 12][r.random_range(0..3)];
        if len <= t {
            continue;
        }
        let w = [0.3, 0.5, 0.8][r.random_range(0..3)];
        let c = random_panel(&mut r, len);
        let cfg = ImpactConfig::new(w, t, len).unwrap();
        let got = ImpactBreakdown::compute(&c.s, &c.a, &c.e, &c.i, &c.p, &c.v, &cfg).unwrap().unwrap();
        let want = decomposition_by_definition(&c.s, &c.a, &c.e, &c.i, &c.p, &c.v, w, t);
        let pairs = [
            (got.total, want.total),
            (got.price, want.price),
            (got.utilization, want.utilization),
            (got.intensity, want.intensity),
            (got.participation, want.participation),
            (got.prevalence, want.prevalence),
        ];
        let scale = pairs.iter().map(|p| p.1.abs()).fold(1e-300, f64::max);
        for (g, w_) in pairs {
            assert!((g - w_).abs() <= 1e-12 * scale, "trial {trial}: {pairs:?}");
        }
    }
}

#[test]
fn cusum_matches_recurrence_on_random_series() {
    let mut r = rng(202);
    for _ in 0..1000 {
        let len = r.random_range(1..=30);
        let k = r.random_range(0.0..1.5);
        let z: Vec<Option<f64>> = (0..len)
            .map(|_| (r.random::<f64>() > 0.1).then(|| r.random_range(-4.0..4.0)))
            .collect();
        if z.iter().all(Option::is_none) {
            continue;
        }
        let series = NormalizedSeries {
            values: z.clone(),
            periods_per_year: 0,
            periods: len,
        };
        let got = cusum(&series, &CusumConfig::new(k, 3.0, 3.0, ReportingRule::AnyPoint)).unwrap();
        let (u, d) = cusum_recurrence(&z, k);
        assert_eq!(got.upper, u);
        assert_eq!(got.lower, d);
    }
}
