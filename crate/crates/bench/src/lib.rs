//! Instance sets shared by the criterion benchmarks.

use cpn_core::generators::{lattice_net, rng, sample_start};
use cpn_core::{q, Instance, Result};

/// `n` lattice trials with resampled resources and goal, 10% resources.
pub fn lattice_trials(rows: usize, cols: usize, n: usize, seed: u64) -> Result<Vec<Instance>> {
    let net = lattice_net(rows, cols)?;
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let (m0, goal) = sample_start(&net, &q(1, 10), &mut rng)?;
            Ok(Instance {
                net: net.clone(),
                m0,
                goal,
            })
        })
        .collect()
}
