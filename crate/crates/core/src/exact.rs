//! Exhaustive oracles for desk-scale instances: the global optimum by
//! enumeration, and local optimality by scanning a full neighbourhood with
//! every neighbour re-evaluated from scratch.

use rayon::prelude::*;
use serde::Serialize;

use crate::combin::{binomial, next_combination, unrank};
use crate::error::{Error, Result};
use crate::instance::{cost, Instance, Solution};
use crate::local_search::{neighborhood_size, Neighborhood, SwapMove};
use crate::metric::Distance;

/// Default limit on enumerated candidates.
pub const DEFAULT_CAP: u128 = 100_000_000;

const CHUNK: u128 = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult<D> {
    pub solution: Solution,
    pub cost: D,
    /// Number of feasible solutions examined.
    pub examined: u128,
}

/// Per-client distance to the nearest facility of `set`; `None` when the
/// set is empty.
fn client_mins<D: Distance>(inst: &Instance<D>, set: &[usize]) -> Vec<Option<D>> {
    inst.clients().iter().map(|&j| set.iter().map(|&i| inst.d(j, i)).reduce(D::min)).collect()
}

fn combined<D: Distance>(a: &[Option<D>], b: &[Option<D>]) -> D {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(v), None) | (None, Some(v)) => *v,
            (None, None) => unreachable!("at least one facility is open"),
        })
        .sum()
}

/// Exact optimum by enumerating all `C(|R|, k_r) * C(|B|, k_b)` feasible
/// solutions. Among optimal solutions the lexicographically least `(R, B)`
/// is returned. Refuses instead of sampling when the count exceeds `cap`.
pub fn brute_force_opt<D: Distance>(inst: &Instance<D>, cap: u128) -> Result<OptResult<D>> {
    let (red, blue) = (inst.red(), inst.blue());
    let (k_r, k_b) = (inst.k_r(), inst.k_b());
    let count_r = binomial(red.len(), k_r);
    let count_b = binomial(blue.len(), k_b);
    let examined = count_r.saturating_mul(count_b);
    if examined > cap {
        return Err(Error::CapExceeded { needed: examined, cap });
    }

    // Materialise the side with fewer subsets; stream the other in chunks.
    let red_is_small = count_r <= count_b;
    let (small_pool, small_k, large_pool, large_k, large_count) =
        if red_is_small { (red, k_r, blue, k_b, count_b) } else { (blue, k_b, red, k_r, count_r) };
    let small: Vec<(Vec<usize>, Vec<Option<D>>)> = crate::combin::combinations(small_pool, small_k)
        .into_iter()
        .map(|set| {
            let mins = client_mins(inst, &set);
            (set, mins)
        })
        .collect();

    // Key: (cost, red rank, blue rank); ranks follow lexicographic order.
    type Best<D> = Option<(D, u128, u128)>;
    let better = |a: Best<D>, b: Best<D>| -> Best<D> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                let ord = x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2));
                Some(if ord.is_le() { x } else { y })
            }
        }
    };
    let chunks = large_count.div_ceil(CHUNK);
    let best = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * CHUNK;
            let end = (start + CHUNK).min(large_count);
            let mut idx = unrank(large_pool.len(), large_k, start);
            let mut best: Best<D> = None;
            for rank in start..end {
                let set: Vec<usize> = idx.iter().map(|&t| large_pool[t]).collect();
                let mins = client_mins(inst, &set);
                for (s_rank, (_, s_mins)) in small.iter().enumerate() {
                    let total = combined(&mins, s_mins);
                    let key = if red_is_small { (s_rank as u128, rank) } else { (rank, s_rank as u128) };
                    best = better(best, Some((total, key.0, key.1)));
                }
                next_combination(&mut idx, large_pool.len());
            }
            best
        })
        .reduce(|| None, better);

    let (total, r_rank, b_rank) = best.expect("at least one feasible solution");
    let pick = |pool: &[usize], k: usize, rank: u128| -> Vec<usize> {
        unrank(pool.len(), k, rank).into_iter().map(|t| pool[t]).collect()
    };
    let solution = Solution::new(pick(red, k_r, r_rank), pick(blue, k_b, b_rank));
    Ok(OptResult { solution, cost: total, examined })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LocalOptVerdict<D> {
    LocallyOptimal {
        moves_checked: usize,
        /// Non-improving moves that leave the cost unchanged.
        zero_delta_moves: usize,
    },
    Improvable {
        witness: SwapMove,
        delta: D,
    },
}

impl<D> LocalOptVerdict<D> {
    pub fn is_locally_optimal(&self) -> bool {
        matches!(self, LocalOptVerdict::LocallyOptimal { .. })
    }
}

/// Scans the whole `p`-swap neighbourhood of `sol`. Reports the first
/// strictly improving move in canonical order, or confirms none exists.
/// Moves that leave the cost unchanged are not improvements.
pub fn is_local_opt<D: Distance>(
    inst: &Instance<D>,
    sol: &Solution,
    p: usize,
    cap: u128,
) -> Result<LocalOptVerdict<D>> {
    if p == 0 {
        return Err(Error::Config("p must be at least 1".into()));
    }
    let base = cost(inst, sol)?;
    let size = neighborhood_size(inst, p);
    if size > cap {
        return Err(Error::CapExceeded { needed: size, cap });
    }
    let nb = Neighborhood::new(inst, sol, p);
    let rescan = |mv: &SwapMove| -> D {
        let open = mv.apply(sol).open();
        inst.clients().iter().map(|&j| open.iter().map(|&i| inst.d(j, i)).reduce(D::min).expect("nonempty")).sum()
    };

    // (first improving move, count of zero-delta moves)
    type Acc<D> = (Option<(usize, D)>, usize);
    let merge = |a: Acc<D>, b: Acc<D>| -> Acc<D> {
        let first = match (a.0, b.0) {
            (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
            (x, y) => x.or(y),
        };
        (first, a.1 + b.1)
    };
    let (first, zeros) = (0..nb.len())
        .into_par_iter()
        .map(|idx| {
            let delta = rescan(&nb.get(idx)) - base;
            if D::improves(delta, base) {
                (Some((idx, delta)), 0)
            } else {
                (None, usize::from(D::eq_tol(base + delta, base, crate::metric::FLOAT_TOLERANCE)))
            }
        })
        .reduce(|| (None, 0), merge);

    Ok(match first {
        Some((idx, delta)) => LocalOptVerdict::Improvable { witness: nb.get(idx), delta },
        None => LocalOptVerdict::LocallyOptimal { moves_checked: nb.len(), zero_delta_moves: zeros },
    })
}

/// How the optimum of an instance was established.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum OptEvidence<D> {
    /// Full enumeration.
    Exhaustive(OptResult<D>),
    /// A known solution whose cost equals the budget-free lower bound
    /// (each client at its nearest facility of either colour).
    LowerBound { solution: Solution, cost: D },
}

impl<D: Distance> OptEvidence<D> {
    pub fn cost(&self) -> D {
        match self {
            OptEvidence::Exhaustive(r) => r.cost,
            OptEvidence::LowerBound { cost, .. } => *cost,
        }
    }
}

/// Exact optimum when it can be established: by enumeration under `cap`,
/// otherwise by any of `hints` attaining the budget-free lower bound.
/// Returns `None` when neither applies.
pub fn certified_opt<D: Distance>(inst: &Instance<D>, cap: u128, hints: &[Solution]) -> Result<Option<OptEvidence<D>>> {
    match brute_force_opt(inst, cap) {
        Ok(r) => return Ok(Some(OptEvidence::Exhaustive(r))),
        Err(Error::CapExceeded { .. }) => {}
        Err(e) => return Err(e),
    }
    let bound = inst.unbudgeted_lower_bound();
    for hint in hints {
        let c = cost(inst, hint)?;
        if D::le_tol(c, bound, 0.0) {
            return Ok(Some(OptEvidence::LowerBound { solution: hint.clone(), cost: c }));
        }
    }
    Ok(None)
}
