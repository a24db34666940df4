#![allow(dead_code)]

use mwis_core::ensembles::{gen_erdos_renyi, gen_random_regular, sample_exp_weights};
use mwis_core::{Graph, NodeWeights};

/// Small mixed corpus: even seeds give Erdős–Rényi graphs, odd seeds random
/// regular ones, all with 2 to 10 nodes and Exp(1) weights.
pub fn small_instance(seed: u64) -> (Graph, NodeWeights) {
    let n = 2 + (seed as usize * 7 + 3) % 9;
    let g = if seed.is_multiple_of(2) {
        let c = (1.0 + (seed % 5) as f64 * 0.5).min((n - 1) as f64);
        gen_erdos_renyi(n, c, seed).unwrap()
    } else {
        let r = match n {
            2 => 1,
            _ if n % 2 == 1 => 2,
            _ => 2 + (seed / 2 % 2) as usize,
        };
        gen_random_regular(n, r, seed).unwrap()
    };
    (g, sample_exp_weights(n, seed))
}

pub fn small_corpus(count: u64) -> Vec<(Graph, NodeWeights)> {
    (0..count).map(small_instance).collect()
}

/// Integer weights in 1..=3, which make ties common.
pub fn tie_heavy_instance(seed: u64) -> (Graph, NodeWeights) {
    let (g, w) = small_instance(seed);
    let ints = w
        .as_slice()
        .iter()
        .map(|&x| (1.0 + (x * 1.5).floor()).min(3.0))
        .collect();
    (g, NodeWeights::new(ints).unwrap())
}
