//! Straight-line transcriptions of the EWA, CUSUM and decomposition formulas.

/// `(1-w)/(1-w^n) · Σ_{k=1}^{n} w^{n-k} c_k` evaluated term by term.
pub fn ewa_direct(c: &[f64], w: f64) -> f64 {
    let n = c.len();
    let mut sum = 0.0;
    for (idx, value) in c.iter().enumerate() {
        let k = idx + 1;
        let mut weight = 1.0;
        for _ in 0..(n - k) {
            weight *= w;
        }
        sum += weight * value;
    }
    let mut wn = 1.0;
    for _ in 0..n {
        wn *= w;
    }
    (1.0 - w) / (1.0 - wn) * sum
}

/// Non-restarting CUSUM trajectories. Missing values leave both statistics
/// unchanged.
pub fn cusum_recurrence(z: &[Option<f64>], k: f64) -> (Vec<f64>, Vec<f64>) {
    let mut up = Vec::new();
    let mut down = Vec::new();
    let mut u_prev = 0.0_f64;
    let mut d_prev = 0.0_f64;
    for zt in z {
        let (u, d) = match zt {
            Some(x) => {
                let u = u_prev + x - k;
                let d = d_prev + x + k;
                (if u > 0.0 { u } else { 0.0 }, if d < 0.0 { d } else { 0.0 })
            }
            None => (u_prev, d_prev),
        };
        up.push(u);
        down.push(d);
        u_prev = u;
        d_prev = d;
    }
    (up, down)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefBreakdown {
    pub total: f64,
    pub price: f64,
    pub utilization: f64,
    pub intensity: f64,
    pub participation: f64,
    pub prevalence: f64,
}

fn share_out(raw: &[f64], target: f64) -> Vec<f64> {
    let delta: f64 = raw.iter().sum::<f64>() - target;
    let mut mass = 0.0;
    for r in raw {
        mass += r.abs();
    }
    let mut out = Vec::new();
    for r in raw {
        if mass == 0.0 {
            out.push(r - delta / raw.len() as f64);
        } else {
            out.push(r - delta * r.abs() / mass);
        }
    }
    out
}

/// Two-level decomposition of complete series (no missing periods).
/// Index 0 of every slice is period 1; `t` runs over `T+1..=P`.
#[allow(clippy::too_many_arguments)]
pub fn decomposition_by_definition(
    s: &[f64],
    a: &[f64],
    e: &[f64],
    i: &[f64],
    p: &[f64],
    v: &[f64],
    w: f64,
    big_t: usize,
) -> RefBreakdown {
    let n = s.len();
    let mut c = Vec::new();
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut ci = Vec::new();
    let mut cp = Vec::new();
    let mut cv = Vec::new();
    for t in big_t..n {
        let l = t - big_t;
        c.push(s[t] - s[l]);
        c1.push(e[l] * (a[t] - a[l]));
        c2.push((e[t] - e[l]) * a[l]);
        ci.push((i[t] - i[l]) * p[l] * v[l] * a[l]);
        cp.push((p[t] - p[l]) * i[l] * v[l] * a[l]);
        cv.push((v[t] - v[l]) * i[l] * p[l] * a[l]);
    }
    let total = ewa_direct(&c, w);
    let level1 = share_out(&[ewa_direct(&c1, w), ewa_direct(&c2, w)], total);
    let level2 = share_out(&[ewa_direct(&ci, w), ewa_direct(&cp, w), ewa_direct(&cv, w)], level1[1]);
    RefBreakdown {
        total,
        price: level1[0],
        utilization: level1[1],
        intensity: level2[0],
        participation: level2[1],
        prevalence: level2[2],
    }
}
