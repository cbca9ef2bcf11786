//! Locality-gap instances for the p-swap heuristic.
//!
//! For integers `1 <= p <= ell / 2` the instance below has a solution that
//! no swap of at most `p` facilities per colour improves, yet costs at least
//! `5 + 2/p - 10p/(ell + 1)` times the optimum. With `beta = 2p` and
//! `alpha = beta * (ell - p)` the metric is the shortest-path closure of
//! three disconnected groups:
//!
//! - left: a local red hub joined by length-`alpha` edges to `p + 1`
//!   clients, each co-located with a global red;
//! - middle: `p` subgroups, each a local red hub joined by length-`beta`
//!   edges to `ell` clients, each co-located with a global blue;
//! - right: `p(ell + 1)` local blues, each joined to `p` private clients by
//!   unit edges, the `t`-th of which is also joined to global blue `o_t`.
//!
//! Locally optimal cost is `alpha(p+1) + beta*p*ell + p²(ell+1)`; the
//! optimum is `p²(ell+1)`.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{certified_opt, is_local_opt, LocalOptVerdict, OptEvidence};
use crate::instance::{cost, Instance, Solution};
use crate::local_search::SwapMove;
use crate::metric::{GraphSpec, MetricSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapParams {
    pub p: usize,
    pub ell: usize,
}

impl GapParams {
    pub fn new(p: usize, ell: usize) -> Result<Self> {
        if p == 0 || ell < 2 * p {
            return Err(Error::Config(format!("gap parameters need 1 <= p <= ell/2, got p={p}, ell={ell}")));
        }
        Ok(GapParams { p, ell })
    }

    pub fn beta(&self) -> i64 {
        2 * self.p as i64
    }

    pub fn alpha(&self) -> i64 {
        self.beta() * (self.ell - self.p) as i64
    }

    pub fn k_r(&self) -> usize {
        self.p + 1
    }

    pub fn k_b(&self) -> usize {
        self.p * (self.ell + 1)
    }

    pub fn expected_local_cost(&self) -> i64 {
        let (p, ell) = (self.p as i64, self.ell as i64);
        self.alpha() * (p + 1) + self.beta() * p * ell + p * p * (ell + 1)
    }

    pub fn expected_global_cost(&self) -> i64 {
        let (p, ell) = (self.p as i64, self.ell as i64);
        p * p * (ell + 1)
    }

    pub fn expected_ratio(&self) -> Ratio<i64> {
        Ratio::new(self.expected_local_cost(), self.expected_global_cost())
    }

    /// `5 + 2/p - 10p/(ell + 1)`.
    pub fn ratio_lower_bound(&self) -> Ratio<i64> {
        let (p, ell) = (self.p as i64, self.ell as i64);
        Ratio::from_integer(5) + Ratio::new(2, p) - Ratio::new(10 * p, ell + 1)
    }
}

/// One middle subgroup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subgroup {
    pub hub: usize,
    pub clients: Vec<usize>,
    /// `global[u]` is co-located with `clients[u]`.
    pub global: Vec<usize>,
}

/// Location indices of each part of the construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapLayout {
    pub left_hub: usize,
    pub left_clients: Vec<usize>,
    pub left_global: Vec<usize>,
    pub middle: Vec<Subgroup>,
    /// `o_1 .. o_p`.
    pub right_global: Vec<usize>,
    pub right_local: Vec<usize>,
    /// `right_clients[f][t]` hangs off `right_local[f]` and `right_global[t]`.
    pub right_clients: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapInstance {
    pub params: GapParams,
    pub instance: Instance<i64>,
    pub local: Solution,
    pub global: Solution,
    pub layout: GapLayout,
}

impl GapInstance {
    pub fn expected_local_cost(&self) -> i64 {
        self.params.expected_local_cost()
    }

    pub fn expected_global_cost(&self) -> i64 {
        self.params.expected_global_cost()
    }
}

/// Builds the gap instance for `params`.
pub fn build(params: GapParams) -> Result<GapInstance> {
    let GapParams { p, ell } = GapParams::new(params.p, params.ell)?;
    let (alpha, beta) = (params.alpha(), params.beta());

    let mut next = 0usize;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    let (mut clients, mut red, mut blue) = (Vec::new(), Vec::new(), Vec::new());

    let left_hub = fresh();
    red.push(left_hub);
    let mut left_clients = Vec::new();
    let mut left_global = Vec::new();
    for _ in 0..=p {
        let (c, g) = (fresh(), fresh());
        edges.push((left_hub, c, alpha));
        edges.push((c, g, 0));
        clients.push(c);
        red.push(g);
        left_clients.push(c);
        left_global.push(g);
    }

    let mut middle = Vec::new();
    for _ in 0..p {
        let hub = fresh();
        red.push(hub);
        let mut sub = Subgroup { hub, clients: Vec::new(), global: Vec::new() };
        for _ in 0..ell {
            let (c, g) = (fresh(), fresh());
            edges.push((hub, c, beta));
            edges.push((c, g, 0));
            clients.push(c);
            blue.push(g);
            sub.clients.push(c);
            sub.global.push(g);
        }
        middle.push(sub);
    }

    let right_global: Vec<usize> = (0..p).map(|_| fresh()).collect();
    blue.extend(&right_global);
    let mut right_local = Vec::new();
    let mut right_clients = Vec::new();
    for _ in 0..p * (ell + 1) {
        let f = fresh();
        blue.push(f);
        right_local.push(f);
        let own: Vec<usize> = right_global
            .iter()
            .map(|&o| {
                let c = fresh();
                edges.push((f, c, 1));
                edges.push((c, o, 1));
                clients.push(c);
                c
            })
            .collect();
        right_clients.push(own);
    }

    let n = next;
    let graph = GraphSpec { n, edges, sentinel_policy: crate::metric::SentinelPolicy::OnePlusEdgeSum };
    let space = MetricSpace::from_graph(&graph)?;
    let instance = Instance::new(space, clients, red, blue, params.k_r(), params.k_b())?;

    let local =
        Solution::new(std::iter::once(left_hub).chain(middle.iter().map(|s| s.hub)).collect(), right_local.clone());
    let global = Solution::new(
        left_global.clone(),
        middle.iter().flat_map(|s| s.global.iter().copied()).chain(right_global.iter().copied()).collect(),
    );
    let layout = GapLayout { left_hub, left_clients, left_global, middle, right_global, right_local, right_clients };
    Ok(GapInstance { params, instance, local, global, layout })
}

fn ratio_str<S: Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Outcome of [`verify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub params: GapParams,
    pub local_cost: i64,
    pub expected_local_cost: i64,
    pub global_cost: i64,
    pub expected_global_cost: i64,
    /// How the optimum was established, if it could be.
    pub opt: Option<OptEvidence<i64>>,
    pub local_opt: LocalOptVerdict<i64>,
    /// Which of the four swap cases a witness move falls in.
    pub failing_case: Option<String>,
    #[serde(serialize_with = "ratio_str")]
    pub ratio: Ratio<i64>,
    #[serde(serialize_with = "ratio_str")]
    pub ratio_lower_bound: Ratio<i64>,
}

impl GapReport {
    pub fn costs_match(&self) -> bool {
        self.local_cost == self.expected_local_cost && self.global_cost == self.expected_global_cost
    }

    pub fn opt_matches(&self) -> bool {
        self.opt.as_ref().is_some_and(|o| o.cost() == self.expected_global_cost)
    }

    pub fn passed(&self) -> bool {
        self.costs_match()
            && self.opt_matches()
            && self.local_opt.is_locally_optimal()
            && self.ratio >= self.ratio_lower_bound
    }
}

/// Names the swap case of a move: by number of reds swapped and whether
/// the left hub is among them.
pub fn swap_case(gap: &GapInstance, mv: &SwapMove) -> &'static str {
    let reds = mv.close_red.len();
    let hub_out = mv.close_red.contains(&gap.layout.left_hub);
    match (reds, hub_out) {
        (0, _) => "R = 0",
        (_, false) => "R >= 1, hub kept",
        (1, true) => "R = 1, hub swapped out",
        (_, true) => "R >= 2, hub swapped out",
    }
}

/// Checks the construction: designated costs match the closed forms, the
/// optimum equals the designated global cost, and no move of at most `p`
/// swaps per colour improves the designated local solution. `cap` bounds
/// both the brute-force optimum and the neighbourhood scan; above it the
/// optimum is certified by the budget-free lower bound instead.
pub fn verify(gap: &GapInstance, cap: u128) -> Result<GapReport> {
    let inst = &gap.instance;
    let local_cost = cost(inst, &gap.local)?;
    let global_cost = cost(inst, &gap.global)?;
    let opt = certified_opt(inst, cap, std::slice::from_ref(&gap.global))?;
    let local_opt = is_local_opt(inst, &gap.local, gap.params.p, cap)?;
    let failing_case = match &local_opt {
        LocalOptVerdict::Improvable { witness, .. } => Some(swap_case(gap, witness).to_string()),
        LocalOptVerdict::LocallyOptimal { .. } => None,
    };
    Ok(GapReport {
        params: gap.params,
        local_cost,
        expected_local_cost: gap.expected_local_cost(),
        global_cost,
        expected_global_cost: gap.expected_global_cost(),
        opt,
        local_opt,
        failing_case,
        ratio: Ratio::new(local_cost, global_cost),
        ratio_lower_bound: gap.params.ratio_lower_bound(),
    })
}
