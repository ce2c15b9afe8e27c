//! Learns a CUSUM threshold by Monte Carlo for a target false alarm rate,
//! then runs the detector on a series with a level shift.
//!
//! Run with `cargo run --example cusum_detection`.

use std::error::Error;

use costdriver::hierarchy::NormalizedSeries;
use costdriver::spc::{cusum, learn_threshold, trial_grid, CalibrationPlan, CusumConfig, Direction, NullModel, ReportingRule};

fn main() -> Result<(), Box<dyn Error>> {
    let length = 16;
    let k = 0.5;
    let plan = CalibrationPlan {
        model: NullModel::white_noise(1.0),
        k,
        length,
        target_far: 0.025,
        trial_thresholds: trial_grid(0.5, 8.0, 0.1),
        n_sims: 4000,
        seed: 11,
        reporting_rule: ReportingRule::EndOfWindow,
        side: Direction::Up,
        auto_reset: false,
        yoy_lag: None,
    };
    let report = learn_threshold(&plan)?;
    println!("learned h = {} over {} simulations", report.threshold, report.n_sims);
    for t in report.trials.iter().filter(|t| (t.threshold - report.threshold).abs() < 0.35) {
        println!("  h = {:>4}  estimated FAR {:.4}", t.threshold, t.far);
    }

    // Normalized changes: quiet for eight periods, then a sustained +1.2 shift.
    let z: Vec<f64> = (0..length)
        .map(|t| {
            let noise = [0.3, -0.6, 0.1, 0.4, -0.2, -0.5, 0.6, -0.1][t % 8];
            if t < 8 { noise } else { noise + 1.2 }
        })
        .collect();
    let config = CusumConfig::new(k, report.threshold, report.threshold, ReportingRule::EndOfWindow);
    let result = cusum(&NormalizedSeries::from_values(z.clone()), &config)?;

    println!("\n{:>3} {:>6} {:>7} {:>7}", "t", "z", "upper", "lower");
    for (t, zt) in z.iter().enumerate() {
        println!("{t:>3} {zt:>6.2} {:>7.3} {:>7.3}", result.upper[t], result.lower[t]);
    }
    println!(
        "\ndirection {}, first upward crossing at period {:?}",
        result.direction.as_str(),
        result.first_crossing_up
    );
    Ok(())
}
