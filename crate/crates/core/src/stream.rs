//! Reproducible random substreams for parallel trial execution.
//!
//! Every unit of work (one observation realization, one Monte Carlo trial)
//! gets its own generator, derived from the master seed and the work unit's
//! coordinates through a keyed 64-bit mixing chain. Streams never cross
//! worker boundaries, so results are independent of scheduling and worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed to samplers. ChaCha has a portable, documented
/// stream, so identical seeds give identical draws on every platform.
pub type Stream = ChaCha8Rng;

/// What a derived stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    /// Observation synthesis; one stream per observation realization
    /// (the trial index is ignored by convention).
    Observations,
    /// Proposal sampling inside one Monte Carlo trial.
    Sampling,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Observations => 0x4f42_5345_5256_4531,
            StreamRole::Sampling => 0x5341_4d50_4c49_4e47,
        }
    }
}

/// splitmix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the reproducible substream for one unit of work.
///
/// The stream is uniquely determined by the tuple
/// `(master_seed, obs_index, trial_index, role)` and is statistically
/// independent of streams derived for other tuples.
pub fn derive_stream(
    master_seed: u64,
    obs_index: usize,
    trial_index: usize,
    role: StreamRole,
) -> Stream {
    let mut h = master_seed ^ 0x9e37_79b9_7f4a_7c15;
    h = mix64(h ^ role.tag());
    h = mix64(h.wrapping_add(obs_index as u64));
    h = mix64(h.wrapping_add(trial_index as u64));
    ChaCha8Rng::seed_from_u64(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_tuple_same_stream() {
        let mut a = derive_stream(99, 3, 17, StreamRole::Sampling);
        let mut b = derive_stream(99, 3, 17, StreamRole::Sampling);
        for _ in 0..100 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn distinct_tuples_distinct_streams() {
        let base: Vec<u64> = {
            let mut r = derive_stream(1, 0, 0, StreamRole::Sampling);
            (0..4).map(|_| r.random()).collect()
        };
        for (s, p, j, role) in [
            (1u64, 0usize, 1usize, StreamRole::Sampling),
            (1, 1, 0, StreamRole::Sampling),
            (2, 0, 0, StreamRole::Sampling),
            (1, 0, 0, StreamRole::Observations),
        ] {
            let mut r = derive_stream(s, p, j, role);
            let head: Vec<u64> = (0..4).map(|_| r.random()).collect();
            assert_ne!(base, head, "tuple ({s},{p},{j},{role:?}) collided");
        }
    }

    #[test]
    fn sibling_streams_look_independent() {
        // Empirical correlation of 10^4 uniforms from adjacent trial streams.
        let n = 10_000usize;
        let mut a = derive_stream(5, 0, 0, StreamRole::Sampling);
        let mut b = derive_stream(5, 0, 1, StreamRole::Sampling);
        let xs: Vec<f64> = (0..n).map(|_| a.random::<f64>()).collect();
        let ys: Vec<f64> = (0..n).map(|_| b.random::<f64>()).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>();
        let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>();
        let rho = cov / (vx * vy).sqrt();
        assert!(rho.abs() < 0.05, "rho = {rho}");
    }
}
