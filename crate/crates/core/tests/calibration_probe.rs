//! Manual calibration probe for the duration-mixture estimator of
//! `N_1(W_* < y)` using the adaptive deep-minimum indicator.
//!
//! Run with:
//!   cargo test -p bsphere-core --test calibration_probe -- --ignored --nocapture

use bsphere_core::deep_min::{sample_w_star_deep, DeepMinConfig};
use bsphere_core::rng::tagged_rng;
use bsphere_core::sampler::{DurationMixture, SampleConfig};
use rayon::prelude::*;

fn estimate(ppu: f64, n_min: usize, n_max: usize, reps: usize, margin: f64, ys: &[f64]) -> Vec<f64> {
    let mixture = DurationMixture::geometric(2f64.powi(-10), 2f64.powi(10), 48, ppu, n_min, n_max).unwrap();
    let dm = DeepMinConfig { margin, ..DeepMinConfig::default() };
    let per_node: Vec<Vec<f64>> = mixture
        .nodes
        .par_iter()
        .enumerate()
        .map(|(node_idx, node)| {
            let cfg = SampleConfig { grid_size: node.grid_size, duration: node.t, start_label: 1.0, seed: 0 };
            let mut hits = vec![0usize; ys.len()];
            for rep in 0..reps {
                let mut rng = tagged_rng(99, (node_idx * reps + rep) as u64, 3);
                let w = sample_w_star_deep(&cfg, ys, &dm, &mut rng);
                for (k, y) in ys.iter().enumerate() {
                    if w < *y {
                        hits[k] += 1;
                    }
                }
            }
            hits.iter().map(|h| *h as f64 / reps as f64).collect()
        })
        .collect();
    let mut out = vec![0.0; ys.len()];
    for (node, means) in mixture.nodes.iter().zip(&per_node) {
        for k in 0..ys.len() {
            out[k] += node.weight * means[k];
        }
    }
    // Tail correction from the largest node.
    for k in 0..ys.len() {
        out[k] += mixture.tail_mass * per_node.last().unwrap()[k];
    }
    out
}

#[test]
#[ignore]
fn probe_deep_mixture() {
    let ys = [0.0, -1.0];
    let targets = [1.5, 0.375];
    for margin in [4.0, 6.0, 8.0] {
        for (ppu, n_min, n_max, reps) in [(256.0, 64, 2048, 500), (1024.0, 128, 8192, 500)] {
            let t0 = std::time::Instant::now();
            let est = estimate(ppu, n_min, n_max, reps, margin, &ys);
            println!(
                "margin {margin} ppu {ppu:>6}: y=0: {:.4} ({:+.2}%)  y=-1: {:.4} ({:+.2}%)   [{:?}]",
                est[0],
                100.0 * (est[0] - targets[0]) / targets[0],
                est[1],
                100.0 * (est[1] - targets[1]) / targets[1],
                t0.elapsed()
            );
        }
    }
}
