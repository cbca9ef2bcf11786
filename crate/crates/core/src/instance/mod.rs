//! Problem data: clients, red and blue facilities, opening budgets, and the
//! nearest-open-facility cost of a solution.

mod generate;
mod io;

pub use generate::{gen_euclidean, gen_grid, random_solution, RandomParams};
pub use io::{parse, parse_solution, serialize, serialize_solution, AnyInstance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Distance, MetricSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Red,
    Blue,
}

impl Colour {
    pub fn other(self) -> Colour {
        match self {
            Colour::Red => Colour::Blue,
            Colour::Blue => Colour::Red,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Client,
    Facility(Colour),
}

/// A Budgeted Red-Blue Median instance.
///
/// Every location of the metric is exactly one of: a client, a red
/// facility, or a blue facility. Index sets are kept sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<D> {
    space: MetricSpace<D>,
    clients: Vec<usize>,
    red: Vec<usize>,
    blue: Vec<usize>,
    k_r: usize,
    k_b: usize,
    roles: Vec<Role>,
}

impl<D: Distance> Instance<D> {
    pub fn new(
        space: MetricSpace<D>,
        mut clients: Vec<usize>,
        mut red: Vec<usize>,
        mut blue: Vec<usize>,
        k_r: usize,
        k_b: usize,
    ) -> Result<Self> {
        let n = space.len();
        let mut roles: Vec<Option<Role>> = vec![None; n];
        for (set, role) in
            [(&clients, Role::Client), (&red, Role::Facility(Colour::Red)), (&blue, Role::Facility(Colour::Blue))]
        {
            for &index in set.iter() {
                let slot = roles.get_mut(index).ok_or(Error::IndexOutOfRange { index, n })?;
                if slot.is_some() {
                    return Err(Error::DuplicateLocation { index });
                }
                *slot = Some(role);
            }
        }
        let roles = roles
            .into_iter()
            .enumerate()
            .map(|(index, r)| r.ok_or(Error::UnassignedLocation { index }))
            .collect::<Result<Vec<_>>>()?;
        if k_r > red.len() {
            return Err(Error::Budget { name: "k_r", budget: k_r, available: red.len() });
        }
        if k_b > blue.len() {
            return Err(Error::Budget { name: "k_b", budget: k_b, available: blue.len() });
        }
        if k_r + k_b == 0 {
            return Err(Error::EmptyBudget);
        }
        clients.sort_unstable();
        red.sort_unstable();
        blue.sort_unstable();
        Ok(Instance { space, clients, red, blue, k_r, k_b, roles })
    }

    pub fn space(&self) -> &MetricSpace<D> {
        &self.space
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> D {
        self.space.d(i, j)
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn clients(&self) -> &[usize] {
        &self.clients
    }

    pub fn red(&self) -> &[usize] {
        &self.red
    }

    pub fn blue(&self) -> &[usize] {
        &self.blue
    }

    pub fn facilities(&self, colour: Colour) -> &[usize] {
        match colour {
            Colour::Red => &self.red,
            Colour::Blue => &self.blue,
        }
    }

    pub fn k_r(&self) -> usize {
        self.k_r
    }

    pub fn k_b(&self) -> usize {
        self.k_b
    }

    pub fn budget(&self, colour: Colour) -> usize {
        match colour {
            Colour::Red => self.k_r,
            Colour::Blue => self.k_b,
        }
    }

    pub fn role(&self, location: usize) -> Role {
        self.roles[location]
    }

    /// Colour of a facility; `None` for clients.
    pub fn colour(&self, location: usize) -> Option<Colour> {
        match self.roles[location] {
            Role::Facility(c) => Some(c),
            Role::Client => None,
        }
    }

    /// Rejects solutions with the wrong cardinality, wrong colours, or
    /// repeated facilities.
    pub fn check_solution(&self, sol: &Solution) -> Result<()> {
        for (colour, set) in [(Colour::Red, &sol.red), (Colour::Blue, &sol.blue)] {
            let wrong: Vec<usize> =
                set.iter().copied().filter(|&i| i >= self.n() || self.colour(i) != Some(colour)).collect();
            if !wrong.is_empty() {
                return Err(Error::Infeasible {
                    reason: format!("not {colour:?} facilities:").to_lowercase(),
                    offending: wrong,
                });
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Infeasible {
                    reason: "repeated or unsorted facilities:".into(),
                    offending: set.clone(),
                });
            }
            let budget = self.budget(colour);
            if set.len() != budget {
                return Err(Error::Infeasible {
                    reason: format!("expected {budget} {colour:?} facilities, got").to_lowercase(),
                    offending: set.clone(),
                });
            }
        }
        Ok(())
    }

    /// Lower bound on the optimum: every client paired with its nearest
    /// facility of either colour, ignoring budgets.
    pub fn unbudgeted_lower_bound(&self) -> D {
        self.clients
            .iter()
            .map(|&j| {
                self.red
                    .iter()
                    .chain(&self.blue)
                    .map(|&i| self.d(j, i))
                    .fold(None, |acc: Option<D>, d| Some(acc.map_or(d, |a| a.min(d))))
                    .unwrap_or(D::ZERO)
            })
            .sum()
    }
}

/// A pair `(R, B)` of open red and blue facilities, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    #[serde(rename = "R")]
    pub red: Vec<usize>,
    #[serde(rename = "B")]
    pub blue: Vec<usize>,
}

impl Solution {
    pub fn new(mut red: Vec<usize>, mut blue: Vec<usize>) -> Self {
        red.sort_unstable();
        blue.sort_unstable();
        Solution { red, blue }
    }

    pub fn side(&self, colour: Colour) -> &[usize] {
        match colour {
            Colour::Red => &self.red,
            Colour::Blue => &self.blue,
        }
    }

    /// All open facilities in ascending index order.
    pub fn open(&self) -> Vec<usize> {
        let mut open: Vec<usize> = self.red.iter().chain(&self.blue).copied().collect();
        open.sort_unstable();
        open
    }

    pub fn contains(&self, facility: usize) -> bool {
        self.red.binary_search(&facility).is_ok() || self.blue.binary_search(&facility).is_ok()
    }

    pub fn len(&self) -> usize {
        self.red.len() + self.blue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nearest-open-facility assignment of every client.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment<D> {
    /// Client indices, ascending; the other vectors are parallel to this.
    pub clients: Vec<usize>,
    pub facility: Vec<usize>,
    pub cost: Vec<D>,
    pub total: D,
}

/// Assigns each client to its nearest open facility, ties broken toward
/// the lowest facility index.
pub fn evaluate<D: Distance>(inst: &Instance<D>, sol: &Solution) -> Result<Assignment<D>> {
    inst.check_solution(sol)?;
    let open = sol.open();
    let mut facility = Vec::with_capacity(inst.clients.len());
    let mut cost = Vec::with_capacity(inst.clients.len());
    for &j in &inst.clients {
        let (i, d) = nearest(inst, j, &open).expect("feasible solutions open at least one facility");
        facility.push(i);
        cost.push(d);
    }
    let total = cost.iter().copied().sum();
    Ok(Assignment { clients: inst.clients.clone(), facility, cost, total })
}

/// Total cost of a feasible solution.
pub fn cost<D: Distance>(inst: &Instance<D>, sol: &Solution) -> Result<D> {
    evaluate(inst, sol).map(|a| a.total)
}

/// Nearest facility in `open` (ascending) to `j`, lowest index on ties.
pub(crate) fn nearest<D: Distance>(inst: &Instance<D>, j: usize, open: &[usize]) -> Option<(usize, D)> {
    let mut best: Option<(usize, D)> = None;
    for &i in open {
        let d = inst.d(j, i);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best
}

/// Duplicates every facility shared by `s` and `o` at distance zero, so
/// that the returned solutions are facility-disjoint. `s` keeps the
/// original locations; `o` moves to the copies, which are appended after
/// the existing index range. Both costs are unchanged.
pub fn disjointify<D: Distance>(
    inst: &Instance<D>,
    s: &Solution,
    o: &Solution,
) -> Result<(Instance<D>, Solution, Solution)> {
    inst.check_solution(s)?;
    inst.check_solution(o)?;
    let shared: Vec<usize> = o.open().into_iter().filter(|&i| s.contains(i)).collect();
    if shared.is_empty() {
        return Ok((inst.clone(), s.clone(), o.clone()));
    }
    let base = inst.n();
    let copy_of = |i: usize| shared.binary_search(&i).ok().map(|t| base + t);
    let mut red = inst.red.clone();
    let mut blue = inst.blue.clone();
    for (t, &i) in shared.iter().enumerate() {
        match inst.colour(i) {
            Some(Colour::Red) => red.push(base + t),
            Some(Colour::Blue) => blue.push(base + t),
            None => unreachable!("solutions hold facilities only"),
        }
    }
    let relabel = |set: &[usize]| set.iter().map(|&i| copy_of(i).unwrap_or(i)).collect::<Vec<_>>();
    let o2 = Solution::new(relabel(&o.red), relabel(&o.blue));
    let space = inst.space.with_duplicates(&shared);
    let dup = Instance::new(space, inst.clients.clone(), red, blue, inst.k_r, inst.k_b)?;
    Ok((dup, s.clone(), o2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Validation;

    fn line() -> Instance<i64> {
        // client 0 at x=0, red 1 at x=0, blue 2 at x=3, red 3 at x=5
        let xs = [0i64, 0, 3, 5];
        let table = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
        let space = MetricSpace::from_matrix(table, Validation::exact()).unwrap();
        Instance::new(space, vec![0], vec![1, 3], vec![2], 1, 1).unwrap()
    }

    #[test]
    fn colocated_client_costs_nothing() {
        let inst = line();
        let a = evaluate(&inst, &Solution::new(vec![1], vec![2])).unwrap();
        assert_eq!(a.total, 0);
        assert_eq!(a.facility, vec![1]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let space = MetricSpace::from_matrix(vec![vec![0i64, 2, 2], vec![2, 0, 4], vec![2, 4, 0]], Validation::exact())
            .unwrap();
        let inst = Instance::new(space, vec![0], vec![2], vec![1], 1, 1).unwrap();
        let a = evaluate(&inst, &Solution::new(vec![2], vec![1])).unwrap();
        assert_eq!(a.facility, vec![1]);
    }

    #[test]
    fn infeasible_solutions_rejected() {
        let inst = line();
        let err = evaluate(&inst, &Solution::new(vec![1, 3], vec![2])).unwrap_err();
        assert!(matches!(err, Error::Infeasible { ref offending, .. } if offending == &vec![1, 3]));
        let err = evaluate(&inst, &Solution::new(vec![2], vec![2])).unwrap_err();
        assert!(matches!(err, Error::Infeasible { ref offending, .. } if offending == &vec![2]));
    }

    #[test]
    fn instance_validation() {
        let space = MetricSpace::from_matrix(vec![vec![0i64, 1], vec![1, 0]], Validation::exact()).unwrap();
        assert_eq!(
            Instance::new(space.clone(), vec![0], vec![1], vec![], 2, 0).unwrap_err(),
            Error::Budget { name: "k_r", budget: 2, available: 1 }
        );
        assert_eq!(Instance::new(space.clone(), vec![0], vec![1], vec![], 0, 0).unwrap_err(), Error::EmptyBudget);
        assert_eq!(
            Instance::new(space.clone(), vec![0], vec![0], vec![1], 1, 0).unwrap_err(),
            Error::DuplicateLocation { index: 0 }
        );
        assert_eq!(
            Instance::new(space.clone(), vec![0], vec![], vec![], 0, 0).unwrap_err(),
            Error::UnassignedLocation { index: 1 }
        );
        assert_eq!(
            Instance::new(space, vec![0, 1], vec![2], vec![], 1, 0).unwrap_err(),
            Error::IndexOutOfRange { index: 2, n: 2 }
        );
    }

    #[test]
    fn disjointify_partial_overlap() {
        let inst = line();
        let s = Solution::new(vec![1], vec![2]);
        let o = Solution::new(vec![3], vec![2]);
        let (dup, s2, o2) = disjointify(&inst, &s, &o).unwrap();
        assert_eq!(dup.n(), 5);
        assert_eq!(s2, s);
        assert_eq!(o2, Solution::new(vec![3], vec![4]));
        assert_eq!(cost(&dup, &s2).unwrap(), cost(&inst, &s).unwrap());
        assert_eq!(cost(&dup, &o2).unwrap(), cost(&inst, &o).unwrap());
    }

    #[test]
    fn disjointify_noop_when_disjoint() {
        let inst = line();
        let inst = Instance::new(inst.space().clone(), vec![0], vec![1, 3], vec![2], 1, 0).unwrap();
        let s = Solution::new(vec![1], vec![]);
        let o = Solution::new(vec![3], vec![]);
        let (same, s2, o2) = disjointify(&inst, &s, &o).unwrap();
        assert_eq!(same, inst);
        assert_eq!((s2, o2), (s, o));
    }

    #[test]
    fn disjointify_full_overlap() {
        let space = MetricSpace::from_matrix(vec![vec![0i64, 4], vec![4, 0]], Validation::exact()).unwrap();
        let inst = Instance::new(space, vec![0], vec![1], vec![], 1, 0).unwrap();
        let s = Solution::new(vec![1], vec![]);
        let (dup, s2, o2) = disjointify(&inst, &s, &s).unwrap();
        assert_eq!(dup.red(), &[1, 2]);
        assert_eq!(dup.d(1, 2), 0);
        assert_eq!(o2, Solution::new(vec![2], vec![]));
        assert_eq!(cost(&dup, &s2).unwrap(), 4);
        assert_eq!(cost(&dup, &o2).unwrap(), 4);
    }

    #[test]
    fn lower_bound_ignores_budgets() {
        let inst = line();
        assert_eq!(inst.unbudgeted_lower_bound(), 0);
    }
}
