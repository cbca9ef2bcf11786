use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Instance, Solution};
use crate::error::{Error, Result};
use crate::metric::{Distance, MetricSpace, Validation};

/// Sizes for the random generators. Locations are laid out as clients,
/// then red facilities, then blue facilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub n_clients: usize,
    pub n_red: usize,
    pub n_blue: usize,
    pub k_r: usize,
    pub k_b: usize,
    pub box_size: f64,
    pub seed: u64,
}

impl RandomParams {
    fn check(&self) -> Result<()> {
        if self.k_r > self.n_red {
            return Err(Error::Budget { name: "k_r", budget: self.k_r, available: self.n_red });
        }
        if self.k_b > self.n_blue {
            return Err(Error::Budget { name: "k_b", budget: self.k_b, available: self.n_blue });
        }
        if self.k_r + self.k_b == 0 {
            return Err(Error::EmptyBudget);
        }
        if !(self.box_size.is_finite() && self.box_size > 0.0) {
            return Err(Error::Config(format!("box size must be positive, got {}", self.box_size)));
        }
        Ok(())
    }

    fn n(&self) -> usize {
        self.n_clients + self.n_red + self.n_blue
    }

    fn assemble<D: Distance>(&self, space: MetricSpace<D>) -> Result<Instance<D>> {
        let c = self.n_clients;
        let r = c + self.n_red;
        Instance::new(space, (0..c).collect(), (c..r).collect(), (r..self.n()).collect(), self.k_r, self.k_b)
    }
}

/// Uniform points in a `box_size` square with Euclidean distances.
/// Deterministic in `seed`.
pub fn gen_euclidean(params: &RandomParams) -> Result<Instance<f64>> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pts: Vec<(f64, f64)> = (0..params.n())
        .map(|_| (rng.random_range(0.0..params.box_size), rng.random_range(0.0..params.box_size)))
        .collect();
    let table = pts.iter().map(|&(ax, ay)| pts.iter().map(|&(bx, by)| (ax - bx).hypot(ay - by)).collect()).collect();
    params.assemble(MetricSpace::from_matrix(table, Validation::default())?)
}

/// Uniform integer points in `[0, box_size]²` with Manhattan distances,
/// giving an exact integer metric. Deterministic in `seed`.
pub fn gen_grid(params: &RandomParams) -> Result<Instance<i64>> {
    params.check()?;
    let side = params.box_size.floor() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pts: Vec<(i64, i64)> =
        (0..params.n()).map(|_| (rng.random_range(0..=side), rng.random_range(0..=side))).collect();
    let table =
        pts.iter().map(|&(ax, ay)| pts.iter().map(|&(bx, by)| (ax - bx).abs() + (ay - by).abs()).collect()).collect();
    params.assemble(MetricSpace::from_matrix(table, Validation::exact())?)
}

/// A uniformly random feasible solution.
pub fn random_solution<D: Distance, R: Rng>(inst: &Instance<D>, rng: &mut R) -> Solution {
    let mut pick =
        |pool: &[usize], k: usize| -> Vec<usize> { sample(rng, pool.len(), k).into_iter().map(|t| pool[t]).collect() };
    let red = pick(inst.red(), inst.k_r());
    let blue = pick(inst.blue(), inst.k_b());
    Solution::new(red, blue)
}
