//! Published case-study numbers reproduced from the shipped fixtures.
//!
//! Set `COSTDRIVER_BLESS=1` to rewrite `tests/data/trulicity_panel.csv`
//! from the testkit solver.

mod common;

use costdriver::impact::{ImpactBreakdown, ImpactConfig};
use costdriver::offsets::{
    compute_migration, identify_offsets, offset_cost_impact, Basis, ComparabilityKb, ComparableGroup, TreatmentSignal,
};
use costdriver::spc::Direction;
use costdriver_testkit::{diabetes_offsets, offset_impact_by_definition, trulicity_panel, TRULICITY_TARGETS};

use common::{parse_columns, trulicity_csv_path};

fn shipped_panel() -> String {
    let path = trulicity_csv_path();
    if std::env::var_os("COSTDRIVER_BLESS").is_some() {
        std::fs::write(&path, trulicity_panel().to_csv()).unwrap();
    }
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn trulicity_breakdown() -> ImpactBreakdown {
    let c = parse_columns(&shipped_panel());
    let cfg = ImpactConfig::new(0.8, 12, c.s.len()).unwrap();
    ImpactBreakdown::compute(&c.s, &c.a, &c.e, &c.i, &c.p, &c.v, &cfg)
        .unwrap()
        .expect("complete panel")
}

#[test]
fn shipped_panel_matches_the_solver() {
    assert_eq!(shipped_panel(), trulicity_panel().to_csv());
}

#[test]
fn shipped_panel_is_internally_consistent() {
    let c = parse_columns(&shipped_panel());
    assert_eq!(c.s.len(), 24);
    for t in 0..24 {
        assert!((c.e[t] - c.i[t] * c.p[t] * c.v[t]).abs() <= 1e-15 * c.e[t].abs().max(1.0));
        assert!((c.s[t] - c.a[t] * c.e[t]).abs() <= 1e-12 * c.s[t].abs().max(1.0));
    }
}

#[test]
fn trulicity_decomposition_hits_published_figures() {
    let r = trulicity_breakdown();
    let got = [r.total, r.price, r.utilization, r.intensity, r.participation, r.prevalence];
    let names = ["total", "price", "utilization", "intensity", "participation", "prevalence"];
    for ((g, t), n) in got.iter().zip(TRULICITY_TARGETS).zip(names) {
        assert!((g - t).abs() <= 1e-4, "{n}: {g} vs {t}");
    }
    assert_eq!(r.dominant().0, "participation");
    // Price share of the total is about 9%.
    assert!((r.price / r.total - 0.090).abs() < 0.002);
}

fn diabetes_signals() -> Vec<TreatmentSignal> {
    let f = diabetes_offsets();
    let node = |(name, volume, price): (&str, f64, f64), direction: Direction, sign: f64| TreatmentSignal {
        path: format!("condition={}/drug_name={name}", f.condition),
        condition: f.condition.to_string(),
        treatment: name.to_string(),
        direction,
        change: sign * volume,
        lagged_price: Some(price),
    };
    let mut out: Vec<TreatmentSignal> = f.receivers.iter().map(|&n| node(n, Direction::Up, 1.0)).collect();
    out.extend(f.originators.iter().map(|&n| node(n, Direction::Down, -1.0)));
    out
}

#[test]
fn diabetes_offset_chain_reproduces_published_impact() {
    let f = diabetes_offsets();
    let kb = ComparabilityKb {
        groups: vec![ComparableGroup {
            condition: f.condition.to_string(),
            basis: Basis::TherapeuticClass,
            members: ["Trulicity", "Janumet", "Glumetza", "Metformin HCL"].map(String::from).to_vec(),
            pairs: None,
        }],
    };
    let nets = identify_offsets(&diabetes_signals(), &kb, "short");
    assert_eq!(nets.len(), 1);
    let net = &nets[0];
    assert_eq!(net.originators.len(), 3);
    assert_eq!(net.receivers.len(), 1);
    assert_eq!(net.receivers[0].treatment, "Trulicity");
    let flows = compute_migration(net).unwrap();
    let impact = offset_cost_impact(net, &flows, f.member_months).unwrap();
    assert!((impact - 0.2720).abs() <= 1e-4, "{impact}");
    assert!((impact - offset_impact_by_definition(&f)).abs() < 1e-12);
}
