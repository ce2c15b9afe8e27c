//! Monte Carlo threshold learning against a target false-alarm rate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cusum::{cusum, CusumConfig, Direction, ReportingRule};
use super::null::{derive_seed, NullModel};
use crate::error::{Error, Result};
use crate::hierarchy::NormalizedSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPlan {
    pub model: NullModel,
    pub k: f64,
    pub length: usize,
    pub target_far: f64,
    /// Strictly ascending candidate thresholds.
    pub trial_thresholds: Vec<f64>,
    pub n_sims: usize,
    pub seed: u64,
    pub reporting_rule: ReportingRule,
    /// Which statistic is calibrated: `Up` uses `h_high`, `Down` uses `h_low`.
    pub side: Direction,
    pub auto_reset: bool,
    /// When set to `T`, the model describes standardized KPI levels rather
    /// than the normalized series: each simulation draws `length + T` levels
    /// and calibrates on `(x(t) − x(t−T)) / √2`, reproducing the lag-`T`
    /// dependence that year-over-year differencing induces.
    pub yoy_lag: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRate {
    pub threshold: f64,
    pub far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub trials: Vec<TrialRate>,
    pub n_sims: usize,
    pub seed: u64,
    /// Set when every trial lies on the same side of the target.
    pub warning: Option<String>,
}

/// Evenly spaced grid `start, start+step, ...` up to and including `stop`.
pub fn trial_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && stop >= start, "grid needs step > 0 and stop >= start");
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| round_grid(start + step * i as f64)).collect()
}

/// Strips accumulated binary noise so grid values print as typed.
fn round_grid(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Flag decision of every trial threshold on one series. Without auto-reset
/// the trajectory does not depend on the threshold, so it is computed once
/// and compared against each trial; with auto-reset each trial runs its own
/// CUSUM.
fn flags(series: &NormalizedSeries, plan: &CalibrationPlan) -> Vec<bool> {
    let run = |h: f64| {
        let mut cfg = CusumConfig::new(plan.k, h, h, plan.reporting_rule);
        cfg.auto_reset = plan.auto_reset;
        cusum(series, &cfg).expect("validated plan")
    };
    if plan.auto_reset {
        return plan
            .trial_thresholds
            .iter()
            .map(|&h| {
                let r = run(h);
                if plan.side == Direction::Up {
                    r.flagged_up
                } else {
                    r.flagged_down
                }
            })
            .collect();
    }
    let r = run(1.0);
    let path: Vec<f64> = if plan.side == Direction::Up {
        r.upper
    } else {
        r.lower.iter().map(|d| -d).collect()
    };
    let stat = match plan.reporting_rule {
        ReportingRule::AnyPoint => path.iter().copied().fold(0.0, f64::max),
        ReportingRule::EndOfWindow => path.last().copied().unwrap_or(0.0),
    };
    plan.trial_thresholds.iter().map(|&h| stat > h).collect()
}

fn validate(plan: &CalibrationPlan) -> Result<()> {
    plan.model.validate()?;
    if plan.trial_thresholds.is_empty() {
        return Err(Error::invalid("trial threshold list is empty"));
    }
    if plan.trial_thresholds.windows(2).any(|w| !(w[0] < w[1])) || !(plan.trial_thresholds[0] > 0.0) {
        return Err(Error::invalid("trial thresholds must be positive and strictly ascending"));
    }
    if plan.n_sims < 100 {
        return Err(Error::invalid(format!("n_sims {} below the minimum of 100", plan.n_sims)));
    }
    if !(plan.target_far > 0.0 && plan.target_far < 1.0) {
        return Err(Error::invalid("target false-alarm rate must lie in (0, 1)"));
    }
    if plan.length == 0 || !(plan.k >= 0.0) {
        return Err(Error::invalid("calibration needs length >= 1 and k >= 0"));
    }
    if plan.yoy_lag == Some(0) {
        return Err(Error::invalid("year-over-year lag must be at least 1"));
    }
    if plan.side == Direction::Flat {
        return Err(Error::invalid("calibration side must be UP or DOWN"));
    }
    Ok(())
}

fn simulate(plan: &CalibrationPlan, rng: &mut ChaCha8Rng) -> NormalizedSeries {
    match plan.yoy_lag {
        None => NormalizedSeries::from_values(plan.model.sample(plan.length, rng)),
        Some(lag) => {
            let x = plan.model.sample(plan.length + lag, rng);
            let z = (lag..x.len()).map(|t| (x[t] - x[t - lag]) / std::f64::consts::SQRT_2);
            NormalizedSeries::from_values(z.collect())
        }
    }
}

/// Flag counts per trial threshold over `n_sims` null series. Every
/// threshold sees the same simulated series, and simulation `i` always uses
/// `derive_seed(seed, i)`, so the result does not depend on thread count.
fn flag_counts(plan: &CalibrationPlan) -> Vec<usize> {
    let per_sim: Vec<Vec<bool>> = (0..plan.n_sims)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, i as u64));
            flags(&simulate(plan, &mut rng), plan)
        })
        .collect();
    let mut counts = vec![0usize; plan.trial_thresholds.len()];
    for sim in &per_sim {
        for (c, &f) in counts.iter_mut().zip(sim) {
            *c += usize::from(f);
        }
    }
    counts
}

/// Estimated false-alarm rate of every trial threshold.
pub fn estimate_far(plan: &CalibrationPlan) -> Result<Vec<TrialRate>> {
    validate(plan)?;
    Ok(plan
        .trial_thresholds
        .iter()
        .zip(flag_counts(plan))
        .map(|(&threshold, c)| TrialRate {
            threshold,
            far: c as f64 / plan.n_sims as f64,
        })
        .collect())
}

/// Returns the trial threshold whose simulated false-alarm rate is closest
/// to the target; ties go to the larger threshold.
pub fn learn_threshold(plan: &CalibrationPlan) -> Result<ThresholdReport> {
    let trials = estimate_far(plan)?;
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if (t.far - plan.target_far).abs() <= (trials[best].far - plan.target_far).abs() {
            best = i;
        }
    }
    let warning = if trials.iter().all(|t| t.far > plan.target_far) {
        Some(format!(
            "target FAR {} unreachable: smallest rate {} at the largest trial threshold {}",
            plan.target_far,
            trials.last().map_or(0.0, |t| t.far),
            trials.last().map_or(0.0, |t| t.threshold),
        ))
    } else if trials.iter().all(|t| t.far < plan.target_far) {
        Some(format!(
            "target FAR {} unreachable: largest rate {} at the smallest trial threshold {}",
            plan.target_far, trials[0].far, trials[0].threshold,
        ))
    } else {
        None
    };
    Ok(ThresholdReport {
        threshold: trials[best].threshold,
        trials,
        n_sims: plan.n_sims,
        seed: plan.seed,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spc::simulate_null;

    fn plan(trials: Vec<f64>) -> CalibrationPlan {
        CalibrationPlan {
            model: NullModel::white_noise(1.0),
            k: 0.5,
            length: 8,
            target_far: 0.05,
            trial_thresholds: trials,
            n_sims: 2000,
            seed: 17,
            reporting_rule: ReportingRule::EndOfWindow,
            side: Direction::Up,
            auto_reset: false,
            yoy_lag: None,
        }
    }

    #[test]
    fn singleton_list_returns_its_value() {
        let r = learn_threshold(&plan(vec![3.0])).unwrap();
        assert_eq!(r.threshold, 3.0);
    }

    #[test]
    fn far_is_monotone_under_common_random_numbers() {
        for rule in [ReportingRule::AnyPoint, ReportingRule::EndOfWindow] {
            for auto_reset in [false, true] {
                let mut p = plan(trial_grid(0.1, 8.0, 0.1));
                p.reporting_rule = rule;
                p.auto_reset = auto_reset;
                let rates = estimate_far(&p).unwrap();
                assert!(rates.windows(2).all(|w| w[0].far >= w[1].far), "{rule:?} reset={auto_reset}");
            }
        }
    }

    #[test]
    fn unreachable_target_warns_with_boundary() {
        // Both rates are zero, so the tie goes to the larger threshold.
        let r = learn_threshold(&plan(vec![50.0, 60.0])).unwrap();
        assert_eq!(r.threshold, 60.0);
        assert!(r.warning.is_some());
        let r = learn_threshold(&plan(vec![0.001, 0.002])).unwrap();
        assert_eq!(r.threshold, 0.002);
        assert!(r.warning.is_some());
    }

    #[test]
    fn independent_resimulation_confirms_far() {
        let p = plan(trial_grid(0.05, 8.0, 0.05));
        let learned = learn_threshold(&p).unwrap();
        assert!(learned.warning.is_none());
        let mut check = plan(vec![learned.threshold]);
        check.n_sims = 10_000;
        check.seed = 0xDEAD_BEEF;
        let far = estimate_far(&check).unwrap()[0].far;
        assert!((far - 0.05).abs() <= 0.015, "h={} far={far}", learned.threshold);
    }

    #[test]
    fn shared_trajectory_matches_per_threshold_runs() {
        let model = NullModel::ar1(1.3, 0.4).unwrap();
        for rule in [ReportingRule::AnyPoint, ReportingRule::EndOfWindow] {
            for side in [Direction::Up, Direction::Down] {
                let mut p = plan(trial_grid(0.1, 6.0, 0.1));
                p.reporting_rule = rule;
                p.side = side;
                for seed in 0..50 {
                    let series = simulate_null(&model, 12, seed).unwrap();
                    let fast = flags(&series, &p);
                    p.auto_reset = true;
                    let mut slow = Vec::new();
                    for &h in &p.trial_thresholds {
                        let r = cusum(&series, &CusumConfig::new(p.k, h, h, rule)).unwrap();
                        slow.push(if side == Direction::Up { r.flagged_up } else { r.flagged_down });
                    }
                    p.auto_reset = false;
                    assert_eq!(fast, slow);
                }
            }
        }
    }

    #[test]
    fn identical_across_runs() {
        let p = plan(trial_grid(0.5, 4.0, 0.5));
        assert_eq!(learn_threshold(&p).unwrap(), learn_threshold(&p).unwrap());
    }

    #[test]
    fn down_side_is_symmetric_for_white_noise() {
        let up = learn_threshold(&plan(trial_grid(0.05, 8.0, 0.05))).unwrap();
        let mut p = plan(trial_grid(0.05, 8.0, 0.05));
        p.side = Direction::Down;
        let down = learn_threshold(&p).unwrap();
        assert!((up.threshold - down.threshold).abs() <= 0.3);
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(learn_threshold(&plan(vec![])).is_err());
        assert!(learn_threshold(&plan(vec![2.0, 1.0])).is_err());
        let mut p = plan(vec![1.0]);
        p.n_sims = 99;
        assert!(learn_threshold(&p).is_err());
        let mut p = plan(vec![1.0]);
        p.side = Direction::Flat;
        assert!(learn_threshold(&p).is_err());
        let mut p = plan(vec![1.0]);
        p.yoy_lag = Some(0);
        assert!(learn_threshold(&p).is_err());
    }

    #[test]
    fn yoy_levels_have_unit_variance_and_lag_correlation() {
        let mut p = plan(vec![1.0]);
        p.length = 8;
        p.yoy_lag = Some(2);
        let (mut sq, mut lag1, mut lag2, mut n) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..20_000 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(5, i));
            let z: Vec<f64> = simulate(&p, &mut rng).present().collect();
            assert_eq!(z.len(), 8);
            sq += z.iter().map(|v| v * v).sum::<f64>() / 8.0;
            lag1 += z.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / 7.0;
            lag2 += z.windows(3).map(|w| w[0] * w[2]).sum::<f64>() / 6.0;
            n += 1.0;
        }
        assert!((sq / n - 1.0).abs() < 0.02);
        assert!((lag1 / n).abs() < 0.02);
        assert!((lag2 / n + 0.5).abs() < 0.02);
    }

    #[test]
    fn yoy_levels_without_overlap_match_white_noise() {
        // With length <= lag every difference uses fresh levels, so the
        // calibrated threshold agrees with plain white noise.
        let base = plan(trial_grid(0.05, 8.0, 0.05));
        let mut p = base.clone();
        p.length = 4;
        p.yoy_lag = Some(4);
        let mut wn = base;
        wn.length = 4;
        let a = learn_threshold(&p).unwrap();
        let b = learn_threshold(&wn).unwrap();
        assert!((a.threshold - b.threshold).abs() <= 0.3, "{} vs {}", a.threshold, b.threshold);
    }

    #[test]
    fn overlapping_differences_need_a_lower_threshold() {
        let mut wn = plan(trial_grid(0.05, 8.0, 0.05));
        wn.length = 8;
        let mut p = wn.clone();
        p.yoy_lag = Some(2);
        assert!(learn_threshold(&p).unwrap().threshold < learn_threshold(&wn).unwrap().threshold);
    }

    #[test]
    fn grid_values_are_clean_decimals() {
        let g = trial_grid(0.05, 1.0, 0.05);
        assert_eq!(g.len(), 20);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[19], 1.0);
    }
}
