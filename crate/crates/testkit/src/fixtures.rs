//! Fixture construction: small inverse problems whose solutions reproduce
//! published impact figures.

use crate::reference::{decomposition_by_definition, RefBreakdown};

/// Published targets for the GLP-1 receptor agonist example, in PMPM:
/// total, unit price, utilization, intensity, participation, prevalence.
pub const TRULICITY_TARGETS: [f64; 6] = [0.1087, 0.0098, 0.0989, 0.0073, 0.1044, -0.0129];

/// Values the solver aims for. The published level-two components sum to
/// 0.0988 against a level-one utilization of 0.0989, a rounding gap of
/// 0.0001; intensity and participation are each moved by half of it so all
/// six figures stay within rounding.
const SOLVER_TARGETS: [f64; 4] = [0.1087, 0.0098, 0.00735, 0.10445];

/// Monthly KPI panel over two years: level in the first year, shifted
/// level in the second.
#[derive(Debug, Clone, PartialEq)]
pub struct TrulicityPanel {
    pub periods_per_year: usize,
    pub w: f64,
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub e: Vec<f64>,
    pub i: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    /// Relative year-two changes of unit price, intensity, participation
    /// and prevalence.
    pub growth: [f64; 4],
}

impl TrulicityPanel {
    /// The panel as comma-separated text with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,s,a,e,i,p,v\n");
        for t in 0..self.s.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t + 1,
                self.s[t],
                self.a[t],
                self.e[t],
                self.i[t],
                self.p[t],
                self.v[t]
            ));
        }
        out
    }
}

const A0: f64 = 650.0;
const I0: f64 = 1.3;
const P0: f64 = 0.004;
const V0: f64 = 0.075;
const T: usize = 12;
const W: f64 = 0.8;

fn panel_for(g: [f64; 4]) -> TrulicityPanel {
    let mut out = TrulicityPanel {
        periods_per_year: T,
        w: W,
        s: Vec::new(),
        a: Vec::new(),
        e: Vec::new(),
        i: Vec::new(),
        p: Vec::new(),
        v: Vec::new(),
        growth: g,
    };
    for t in 0..2 * T {
        let year2 = if t >= T { 1.0 } else { 0.0 };
        let a = A0 * (1.0 + year2 * g[0]);
        let i = I0 * (1.0 + year2 * g[1]);
        let p = P0 * (1.0 + year2 * g[2]);
        let v = V0 * (1.0 + year2 * g[3]);
        let e = i * p * v;
        out.a.push(a);
        out.i.push(i);
        out.p.push(p);
        out.v.push(v);
        out.e.push(e);
        out.s.push(a * e);
    }
    out
}

fn decompose(panel: &TrulicityPanel) -> RefBreakdown {
    decomposition_by_definition(
        &panel.s,
        &panel.a,
        &panel.e,
        &panel.i,
        &panel.p,
        &panel.v,
        panel.w,
        panel.periods_per_year,
    )
}

fn residual(g: [f64; 4]) -> [f64; 4] {
    let r = decompose(&panel_for(g));
    [
        r.total - SOLVER_TARGETS[0],
        r.price - SOLVER_TARGETS[1],
        r.intensity - SOLVER_TARGETS[2],
        r.participation - SOLVER_TARGETS[3],
    ]
}

#[allow(clippy::needless_range_loop)]
fn solve4(m: [[f64; 4]; 4], b: [f64; 4]) -> [f64; 4] {
    let mut a = [[0.0; 5]; 4];
    for r in 0..4 {
        a[r][..4].copy_from_slice(&m[r]);
        a[r][4] = b[r];
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in 0..4 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..5 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    [a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]]
}

/// Solves for the four year-two growth rates with Newton's method on a
/// finite-difference Jacobian, and returns the resulting panel.
pub fn trulicity_panel() -> TrulicityPanel {
    let mut g = [0.03, 0.03, 0.4, -0.05];
    for _ in 0..50 {
        let f = residual(g);
        if f.iter().all(|x| x.abs() < 1e-15) {
            break;
        }
        let mut jac = [[0.0; 4]; 4];
        for c in 0..4 {
            let h = 1e-7;
            let mut gp = g;
            gp[c] += h;
            let fp = residual(gp);
            for r in 0..4 {
                jac[r][c] = (fp[r] - f[r]) / h;
            }
        }
        let step = solve4(jac, f);
        for c in 0..4 {
            g[c] -= step[c];
        }
    }
    panel_for(g)
}

/// One treatment of the offsets fixture: name, volume change, lagged price.
pub type FixtureNode = (&'static str, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetFixture {
    pub condition: &'static str,
    pub originators: Vec<FixtureNode>,
    pub receivers: Vec<FixtureNode>,
    pub member_months: f64,
    /// Published PMPM figure the fixture reproduces.
    pub target: f64,
}

/// Type 2 diabetes scenario: one injectable gaining volume from three oral
/// drugs. With complete connections the receiver binds, each originator
/// gives up half of its decrease, and the net cost of the migrated volume
/// is 272,000 over one million member-months.
pub fn diabetes_offsets() -> OffsetFixture {
    OffsetFixture {
        condition: "DIAB2",
        originators: vec![("Janumet", 300.0, 250.0), ("Glumetza", 100.0, 200.0), ("Metformin HCL", 1600.0, 15.0)],
        receivers: vec![("Trulicity", 1000.0, 331.5)],
        member_months: 1_000_000.0,
        target: 0.2720,
    }
}

/// Offset impact of a complete network by definition: migrated total,
/// proportional outflows, receiver inflows, priced and normalized.
pub fn offset_impact_by_definition(f: &OffsetFixture) -> f64 {
    let sum_o: f64 = f.originators.iter().map(|n| n.1).sum();
    let sum_r: f64 = f.receivers.iter().map(|n| n.1).sum();
    let pm = if sum_o < sum_r { sum_o } else { sum_r };
    let lost: f64 = f.originators.iter().map(|n| pm * n.1 / sum_o * n.2).sum();
    let gained: f64 = f.receivers.iter().map(|n| pm * n.1 / sum_r * n.2).sum();
    (gained - lost) / f.member_months
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trulicity_hits_targets() {
        let panel = trulicity_panel();
        let r = decompose(&panel);
        let got = [r.total, r.price, r.utilization, r.intensity, r.participation, r.prevalence];
        for (g, t) in got.iter().zip(TRULICITY_TARGETS) {
            assert!((g - t).abs() <= 1e-4, "{got:?}");
        }
        assert!(panel.growth.iter().all(|g| g.abs() < 1.0), "{:?}", panel.growth);
    }

    #[test]
    fn published_figures_are_consistent() {
        let [total, price, util, intensity, participation, prevalence] = TRULICITY_TARGETS;
        assert!((price + util - total).abs() < 1e-12);
        assert!((intensity + participation + prevalence - util).abs() <= 2e-4);
    }

    #[test]
    fn offsets_fixture_by_definition() {
        let f = diabetes_offsets();
        assert!((offset_impact_by_definition(&f) - f.target).abs() < 1e-12);
    }
}
