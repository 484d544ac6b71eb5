use std::time::Instant;

use nis_core::*;

fn main() {
    let config = ExperimentConfig {
        n_observations: 1000,
        n_samples: 500,
        n_obs_realizations: 12,
        n_mc_trials: 100,
        master_seed: 1729,
        ..ExperimentConfig::default()
    };
    let clip_counts: Vec<usize> = (1..=30).collect();
    let t = Instant::now();
    let cells = sweep_clipping(&config, &clip_counts, &[1000]).unwrap();
    println!("{} cells in {:.1}s", cells.len(), t.elapsed().as_secs_f64());
    for cell in &cells {
        println!(
            "M_T={:>2}: bias {:.4} var {:.4} mse {:.4}",
            cell.clip_count, cell.stats.bias, cell.stats.variance, cell.stats.mse
        );
    }
}
