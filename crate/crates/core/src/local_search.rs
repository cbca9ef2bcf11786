//! The p-swap local search.
//!
//! Starting from a feasible solution, repeatedly exchange up to `p` red and
//! up to `p` blue facilities while doing so lowers the connection cost.
//! Candidate moves are scored incrementally against the current assignment
//! and reduced in a fixed canonical order, so the chosen move never depends
//! on whether candidates were evaluated in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::combin::{binomial, combinations};
use crate::error::{Error, Result};
use crate::instance::{evaluate, random_solution, Assignment, Colour, Instance, Solution};
use crate::metric::Distance;

/// Exchange of equal-size subsets within each colour.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwapMove {
    pub close_red: Vec<usize>,
    pub open_red: Vec<usize>,
    pub close_blue: Vec<usize>,
    pub open_blue: Vec<usize>,
}

impl SwapMove {
    pub fn is_empty(&self) -> bool {
        self.close_red.is_empty() && self.close_blue.is_empty()
    }

    /// Swap size per colour: `(red, blue)`.
    pub fn size(&self) -> (usize, usize) {
        (self.close_red.len(), self.close_blue.len())
    }

    pub fn apply(&self, sol: &Solution) -> Solution {
        let swap = |side: &[usize], close: &[usize], open: &[usize]| {
            side.iter().copied().filter(|i| !close.contains(i)).chain(open.iter().copied()).collect()
        };
        Solution::new(
            swap(&sol.red, &self.close_red, &self.open_red),
            swap(&sol.blue, &self.close_blue, &self.open_blue),
        )
    }

    /// Checks the move against `sol`: equal sizes per colour, closed
    /// facilities currently open, opened facilities currently closed and of
    /// the right colour, no repeats.
    pub fn validate<D: Distance>(&self, inst: &Instance<D>, sol: &Solution) -> Result<()> {
        for (colour, close, open) in
            [(Colour::Red, &self.close_red, &self.open_red), (Colour::Blue, &self.close_blue, &self.open_blue)]
        {
            if close.len() != open.len() {
                return Err(Error::InvalidMove(format!("{colour:?} closes {} but opens {}", close.len(), open.len())));
            }
            let side = sol.side(colour);
            if let Some(i) = close.iter().find(|i| !side.contains(i)) {
                return Err(Error::InvalidMove(format!("facility {i} is not open")));
            }
            if let Some(i) =
                open.iter().find(|&&i| side.contains(&i) || i >= inst.n() || inst.colour(i) != Some(colour))
            {
                return Err(Error::InvalidMove(format!("facility {i} cannot be opened as {colour:?}")));
            }
            for set in [close, open] {
                let mut sorted = set.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != set.len() {
                    return Err(Error::InvalidMove(format!("repeated facility in {set:?}")));
                }
            }
        }
        Ok(())
    }
}

/// One colour's half of a move.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ColourSwap {
    close: Vec<usize>,
    open: Vec<usize>,
}

fn colour_swaps(open: &[usize], closed: &[usize], p: usize) -> Vec<ColourSwap> {
    let mut out = Vec::new();
    for a in 0..=p.min(open.len()).min(closed.len()) {
        let opens = combinations(closed, a);
        for close in combinations(open, a) {
            for o in &opens {
                out.push(ColourSwap { close: close.clone(), open: o.clone() });
            }
        }
    }
    out
}

fn colour_count(open: usize, closed: usize, p: usize) -> u128 {
    (0..=p.min(open).min(closed))
        .map(|a| binomial(open, a).saturating_mul(binomial(closed, a)))
        .fold(0u128, u128::saturating_add)
}

/// Number of non-empty moves in the `p`-swap neighbourhood of a feasible
/// solution, without enumerating it.
pub fn neighborhood_size<D: Distance>(inst: &Instance<D>, p: usize) -> u128 {
    let red = colour_count(inst.k_r(), inst.red().len() - inst.k_r(), p);
    let blue = colour_count(inst.k_b(), inst.blue().len() - inst.k_b(), p);
    red.saturating_mul(blue) - 1
}

/// The `p`-swap neighbourhood of a solution in canonical order.
///
/// Each colour's swaps are ordered by size, then by the closed tuple, then
/// by the opened tuple (all lexicographic by index). Moves are the product
/// of red swaps (outer) and blue swaps (inner), minus the empty move.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    red: Vec<ColourSwap>,
    blue: Vec<ColourSwap>,
}

impl Neighborhood {
    pub fn new<D: Distance>(inst: &Instance<D>, sol: &Solution, p: usize) -> Self {
        let closed = |pool: &[usize], side: &[usize]| -> Vec<usize> {
            pool.iter().copied().filter(|i| side.binary_search(i).is_err()).collect()
        };
        Neighborhood {
            red: colour_swaps(&sol.red, &closed(inst.red(), &sol.red), p),
            blue: colour_swaps(&sol.blue, &closed(inst.blue(), &sol.blue), p),
        }
    }

    pub fn len(&self) -> usize {
        self.red.len() * self.blue.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn parts(&self, idx: usize) -> (&ColourSwap, &ColourSwap) {
        let flat = idx + 1;
        (&self.red[flat / self.blue.len()], &self.blue[flat % self.blue.len()])
    }

    pub fn get(&self, idx: usize) -> SwapMove {
        let (r, b) = self.parts(idx);
        SwapMove {
            close_red: r.close.clone(),
            open_red: r.open.clone(),
            close_blue: b.close.clone(),
            open_blue: b.open.clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SwapMove> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// Enumerates every move with at most `p` swaps per colour.
pub fn neighborhood<D: Distance>(inst: &Instance<D>, sol: &Solution, p: usize) -> impl Iterator<Item = SwapMove> {
    let nb = Neighborhood::new(inst, sol, p);
    (0..nb.len()).map(move |i| nb.get(i))
}

/// Assignment of a solution plus each client's second-nearest open
/// facility, which is enough to price most moves without a rescan.
#[derive(Debug, Clone)]
pub struct IncrementalState<'a, D> {
    inst: &'a Instance<D>,
    solution: Solution,
    open: Vec<usize>,
    assignment: Assignment<D>,
    second: Vec<Option<(usize, D)>>,
}

impl<'a, D: Distance> IncrementalState<'a, D> {
    pub fn new(inst: &'a Instance<D>, solution: Solution) -> Result<Self> {
        let assignment = evaluate(inst, &solution)?;
        let open = solution.open();
        let second = inst
            .clients()
            .iter()
            .zip(&assignment.facility)
            .map(|(&j, &first)| {
                let mut best: Option<(usize, D)> = None;
                for &i in open.iter().filter(|&&i| i != first) {
                    let d = inst.d(j, i);
                    if best.is_none_or(|(_, b)| d < b) {
                        best = Some((i, d));
                    }
                }
                best
            })
            .collect();
        Ok(IncrementalState { inst, solution, open, assignment, second })
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    pub fn assignment(&self) -> &Assignment<D> {
        &self.assignment
    }

    pub fn cost(&self) -> D {
        self.assignment.total
    }

    /// `cost(after) - cost(before)` for a validated move.
    pub fn delta(&self, mv: &SwapMove) -> Result<D> {
        mv.validate(self.inst, &self.solution)?;
        Ok(self.delta_parts([&mv.close_red, &mv.close_blue], [&mv.open_red, &mv.open_blue]))
    }

    fn delta_parts(&self, close: [&[usize]; 2], open: [&[usize]; 2]) -> D {
        let is_closed = |i: usize| close[0].contains(&i) || close[1].contains(&i);
        let inst = self.inst;
        let mut delta = D::ZERO;
        for (t, &j) in inst.clients().iter().enumerate() {
            let current = self.assignment.cost[t];
            let mut best = if !is_closed(self.assignment.facility[t]) {
                Some(current)
            } else {
                match self.second[t] {
                    Some((s, ds)) if !is_closed(s) => Some(ds),
                    _ => self.open.iter().filter(|&&i| !is_closed(i)).map(|&i| inst.d(j, i)).reduce(D::min),
                }
            };
            for &i in open[0].iter().chain(open[1]) {
                let d = inst.d(j, i);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
            let best = best.expect("moves keep each colour's cardinality");
            delta = delta + (best - current);
        }
        delta
    }

    fn delta_at(&self, nb: &Neighborhood, idx: usize) -> D {
        let (r, b) = nb.parts(idx);
        self.delta_parts([&r.close, &b.close], [&r.open, &b.open])
    }
}

/// Incremental cost change of `mv` applied to `sol`.
pub fn delta_cost<D: Distance>(inst: &Instance<D>, sol: &Solution, mv: &SwapMove) -> Result<D> {
    IncrementalState::new(inst, sol.clone())?.delta(mv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    #[default]
    Best,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Swap radius per colour.
    pub p: usize,
    /// 0 accepts any strict improvement; otherwise a move must reach
    /// `cost' <= (1 - epsilon / n) * cost`.
    pub epsilon: f64,
    pub rule: Rule,
    /// Seed for the random initial solution.
    pub seed: u64,
    pub max_iters: usize,
    pub parallel: bool,
    /// Refuse neighbourhoods with more moves than this.
    pub max_neighborhood: u128,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            p: 1,
            epsilon: 0.0,
            rule: Rule::Best,
            seed: 0,
            max_iters: 1_000_000,
            parallel: true,
            max_neighborhood: 100_000_000,
        }
    }
}

impl SearchConfig {
    pub fn with_p(p: usize) -> Self {
        SearchConfig { p, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    LocalOptimum,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<D> {
    pub solution: Solution,
    pub assignment: Assignment<D>,
    pub iterations: usize,
    /// Cost of the initial solution followed by the cost after each move.
    pub trace: Vec<D>,
    pub termination: Termination,
}

impl<D: Distance> SearchResult<D> {
    pub fn cost(&self) -> D {
        self.assignment.total
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "solution": self.solution,
            "cost": self.cost().to_json(),
            "iterations": self.iterations,
            "trace": self.trace.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "termination": self.termination,
        })
    }
}

/// Runs the p-swap heuristic from `initial`, or from a random feasible
/// solution drawn with `config.seed`.
pub fn run<D: Distance>(
    inst: &Instance<D>,
    config: &SearchConfig,
    initial: Option<&Solution>,
) -> Result<SearchResult<D>> {
    config.validate()?;
    let size = neighborhood_size(inst, config.p);
    if size > config.max_neighborhood {
        return Err(Error::CapExceeded { needed: size, cap: config.max_neighborhood });
    }
    let start = match initial {
        Some(sol) => sol.clone(),
        None => random_solution(inst, &mut ChaCha8Rng::seed_from_u64(config.seed)),
    };
    let mut state = IncrementalState::new(inst, start)?;
    let mut trace = vec![state.cost()];
    let shrink = 1.0 - config.epsilon / inst.n() as f64;
    let accepts = |delta: D, cost: D| {
        D::improves(delta, cost) && (config.epsilon == 0.0 || (cost + delta).to_f64() <= shrink * cost.to_f64())
    };

    let mut iterations = 0;
    let termination = loop {
        if iterations >= config.max_iters {
            break Termination::IterationCap;
        }
        let nb = Neighborhood::new(inst, state.solution(), config.p);
        let cost = state.cost();
        let chosen = match config.rule {
            Rule::Best => best_move(&state, &nb, config.parallel).filter(|&(_, d)| accepts(d, cost)),
            Rule::First => first_move(&state, &nb, config.parallel, |d| accepts(d, cost)),
        };
        let Some((idx, _)) = chosen else {
            break Termination::LocalOptimum;
        };
        let next = nb.get(idx).apply(state.solution());
        state = IncrementalState::new(inst, next)?;
        trace.push(state.cost());
        iterations += 1;
    };

    Ok(SearchResult {
        solution: state.solution().clone(),
        assignment: state.assignment().clone(),
        iterations,
        trace,
        termination,
    })
}

/// Lowest delta, ties to the earliest move in canonical order.
fn best_move<D: Distance>(state: &IncrementalState<D>, nb: &Neighborhood, parallel: bool) -> Option<(usize, D)> {
    let pick = |a: (usize, D), b: (usize, D)| match a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)) {
        std::cmp::Ordering::Greater => b,
        _ => a,
    };
    if parallel {
        (0..nb.len()).into_par_iter().map(|i| (i, state.delta_at(nb, i))).reduce_with(pick)
    } else {
        (0..nb.len()).map(|i| (i, state.delta_at(nb, i))).reduce(pick)
    }
}

fn first_move<D: Distance>(
    state: &IncrementalState<D>,
    nb: &Neighborhood,
    parallel: bool,
    accepts: impl Fn(D) -> bool + Sync,
) -> Option<(usize, D)> {
    if parallel {
        (0..nb.len()).into_par_iter().map(|i| (i, state.delta_at(nb, i))).find_first(|&(_, d)| accepts(d))
    } else {
        (0..nb.len()).map(|i| (i, state.delta_at(nb, i))).find(|&(_, d)| accepts(d))
    }
}
