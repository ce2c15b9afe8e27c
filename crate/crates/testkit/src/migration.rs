//! Brute-force maximization of migrated volume under proportional
//! allocation.

/// True when the total `pm` split over originators in proportion to their
/// capacities, and over each originator's receivers in proportion to
/// theirs, stays within every capacity.
pub fn proportional_flows_feasible(o: &[f64], r: &[f64], reach: &[Vec<usize>], pm: f64) -> bool {
    let total_o: f64 = o.iter().sum();
    let mut inflow = vec![0.0; r.len()];
    for (idx, oi) in o.iter().enumerate() {
        let out = pm * oi / total_o;
        if out > oi * (1.0 + 1e-12) {
            return false;
        }
        let mut reachable = 0.0;
        for &j in &reach[idx] {
            reachable += r[j];
        }
        if reachable <= 0.0 {
            return false;
        }
        for &j in &reach[idx] {
            inflow[j] += out * r[j] / reachable;
        }
    }
    inflow.iter().zip(r).all(|(got, cap)| *got <= cap * (1.0 + 1e-12))
}

/// Largest feasible total, scanning `[0, Σo]` in steps of `resolution` and
/// refining the last feasible step by bisection.
pub fn brute_force_migration(o: &[f64], r: &[f64], reach: &[Vec<usize>], resolution: f64) -> f64 {
    assert!(resolution > 0.0, "grid resolution must be positive");
    let upper: f64 = o.iter().sum();
    let steps = (upper / resolution).ceil() as usize;
    let mut best = 0.0;
    for k in 0..=steps {
        let pm = (k as f64 * resolution).min(upper);
        if proportional_flows_feasible(o, r, reach, pm) {
            best = pm;
        } else {
            break;
        }
    }
    let mut lo = best;
    let mut hi = (best + resolution).min(upper);
    if proportional_flows_feasible(o, r, reach, hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if proportional_flows_feasible(o, r, reach, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
