//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

/// Columns of a panel: cost per enrollee, unit price, utilization,
/// intensity, participation, prevalence.
#[derive(Debug, Clone)]
pub struct Columns {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub e: Vec<f64>,
    pub i: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn parse_columns(csv: &str) -> Columns {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("period,s,a,e,i,p,v"));
    let mut c = Columns {
        s: vec![],
        a: vec![],
        e: vec![],
        i: vec![],
        p: vec![],
        v: vec![],
    };
    for line in lines.filter(|l| !l.is_empty()) {
        let x: Vec<f64> = line.split(',').skip(1).map(|f| f.parse().expect("number")).collect();
        assert_eq!(x.len(), 6, "row {line}");
        c.s.push(x[0]);
        c.a.push(x[1]);
        c.e.push(x[2]);
        c.i.push(x[3]);
        c.p.push(x[4]);
        c.v.push(x[5]);
    }
    c
}

pub fn trulicity_csv_path() -> PathBuf {
    data_dir().join("trulicity_panel.csv")
}

/// A random panel whose factors multiply exactly: e = i·p·v and s = a·e.
pub fn random_panel(rng: &mut ChaCha8Rng, len: usize) -> Columns {
    let mut walk = |base: f64, vol: f64| {
        let mut x = base;
        (0..len)
            .map(|_| {
                x *= rng.random_range(-vol..vol).exp();
                x
            })
            .collect::<Vec<f64>>()
    };
    let a = walk(100.0, 0.2);
    let i = walk(2.0, 0.15);
    let p = walk(0.4, 0.15);
    let v = walk(0.08, 0.1);
    let e: Vec<f64> = (0..len).map(|t| i[t] * p[t] * v[t]).collect();
    let s: Vec<f64> = (0..len).map(|t| a[t] * e[t]).collect();
    Columns { s, a, e, i, p, v }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every file under `root` as (relative path, contents), sorted by path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

/// Asserts two output trees hold the same files with the same bytes.
pub fn assert_same_tree(a: &Path, b: &Path) {
    let (x, y) = (snapshot(a), snapshot(b));
    let names = |s: &[(String, Vec<u8>)]| s.iter().map(|f| f.0.clone()).collect::<Vec<_>>();
    assert_eq!(names(&x), names(&y), "file sets differ");
    for (fa, fb) in x.iter().zip(&y) {
        assert!(fa.1 == fb.1, "{} differs", fa.0);
    }
}

pub fn example_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join("config").join("pipeline.toml")
}

/// Rows of a CSV file as maps from header to value.
pub fn read_rows(path: &Path) -> Vec<std::collections::BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}
