use std::time::Instant;

use nis_core::*;

fn mean_est_gap(grid: &GridResult) -> f64 {
    let mut acc = 0.0;
    for r in &grid.records {
        let mut sq = 0.0;
        for d in 0..3 {
            let dv = r.nis.posterior_mean[d] - r.is.posterior_mean[d];
            sq += dv * dv;
        }
        acc += sq.sqrt();
    }
    acc / grid.records.len() as f64
}

fn main() {
    let base = ExperimentConfig {
        n_observations: 1000,
        n_obs_realizations: 8,
        n_mc_trials: 50,
        master_seed: 1729,
        ..ExperimentConfig::default()
    };
    for m in [100usize, 500, 1000, 10_000] {
        let config = ExperimentConfig {
            n_samples: m,
            n_obs_realizations: if m == 10_000 { 4 } else { 8 },
            n_mc_trials: if m == 10_000 { 25 } else { 50 },
            ..base.clone()
        };
        let t = Instant::now();
        let grid = run_grid(&config).unwrap();
        let (is, nis) = (&grid.is_stats, &grid.nis_stats);
        println!(
            "M={m:>6} M_T={:>2} ({:>5.1}s): bias {:.3}/{:.3} var {:.3}/{:.3} mse {:.3}/{:.3} mmw {:.3}/{:.3} gap {:.4}",
            grid.clip_count,
            t.elapsed().as_secs_f64(),
            is.bias, nis.bias,
            is.variance, nis.variance,
            is.mse, nis.mse,
            is.mean_max_weight, nis.mean_max_weight,
            mean_est_gap(&grid),
        );
    }
}
