#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redblue::instance::{gen_euclidean, gen_grid, Instance, RandomParams, Solution};
use redblue::Distance;

/// Cost of an arbitrary open set by direct scan.
pub fn scan_cost<D: Distance>(inst: &Instance<D>, open: &[usize]) -> D {
    inst.clients()
        .iter()
        .map(|&j| {
            let mut best = inst.d(j, open[0]);
            for &i in &open[1..] {
                if inst.d(j, i) < best {
                    best = inst.d(j, i);
                }
            }
            best
        })
        .sum()
}

pub fn open_set(sol: &Solution) -> Vec<usize> {
    sol.red.iter().chain(&sol.blue).copied().collect()
}

/// Small random sizes: up to `max_fac` facilities per colour and
/// `max_clients` clients, budgets at least one overall.
pub fn random_params(seed: u64, max_fac: usize, max_clients: usize) -> RandomParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_red = rng.random_range(1..=max_fac);
    let n_blue = rng.random_range(1..=max_fac);
    let k_r = rng.random_range(0..=n_red.min(4));
    let k_b = rng.random_range(usize::from(k_r == 0)..=n_blue.min(4));
    RandomParams { n_clients: rng.random_range(1..=max_clients), n_red, n_blue, k_r, k_b, box_size: 100.0, seed }
}

pub fn grid(seed: u64, max_fac: usize, max_clients: usize) -> Instance<i64> {
    gen_grid(&random_params(seed, max_fac, max_clients)).unwrap()
}

pub fn euclid(seed: u64, max_fac: usize, max_clients: usize) -> Instance<f64> {
    gen_euclidean(&random_params(seed, max_fac, max_clients)).unwrap()
}

pub fn random_sol<D: Distance>(inst: &Instance<D>, rng: &mut impl Rng) -> Solution {
    let pick = |pool: &[usize], k: usize, rng: &mut _| -> Vec<usize> {
        sample(rng, pool.len(), k).into_iter().map(|t| pool[t]).collect()
    };
    let red = pick(inst.red(), inst.k_r(), rng);
    let blue = pick(inst.blue(), inst.k_b(), rng);
    Solution::new(red, blue)
}

/// All `k`-subsets of `items` by recursion.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(&items[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    with.extend(subsets(&items[1..], k));
    with
}

pub fn all_solutions<D: Distance>(inst: &Instance<D>) -> Vec<Solution> {
    let reds = subsets(inst.red(), inst.k_r());
    let blues = subsets(inst.blue(), inst.k_b());
    reds.iter().flat_map(|r| blues.iter().map(move |b| Solution::new(r.clone(), b.clone()))).collect()
}
