//! Structure relating a local solution `S` to a global solution `O`.
//!
//! Each facility of `O` is mapped by phi to its nearest facility of `S`.
//! Facilities of `S` are classified by their preimages, grouped around the
//! facilities with nonempty preimage, and the groups are merged into
//! blocks that are colour balanced, closed under phi, and led by a single
//! facility whose companions are all good or very good. Checkers verify
//! the block properties and the two standard per-client distance bounds.
//!
//! Every tie resolves to the lowest facility index. `S` and `O` must be
//! facility-disjoint; see [`crate::instance::disjointify`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Colour, Instance, Solution};
use crate::metric::{Distance, FLOAT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Local,
    Global,
}

/// The phi map with its derived degree and centre.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiMap {
    /// Facilities of `S`, ascending.
    pub local: Vec<usize>,
    /// Facilities of `O`, ascending.
    pub global: Vec<usize>,
    pub phi: BTreeMap<usize, usize>,
    /// Sorted preimage of every local facility (possibly empty).
    pub preimage: BTreeMap<usize, Vec<usize>>,
    /// Nearest preimage of every local facility with nonzero degree.
    pub cent: BTreeMap<usize, usize>,
    pub colour: BTreeMap<usize, Colour>,
}

impl PhiMap {
    pub fn deg(&self, i: usize) -> usize {
        self.preimage.get(&i).map_or(0, Vec::len)
    }

    pub fn side(&self, i: usize) -> Option<Side> {
        if self.local.binary_search(&i).is_ok() {
            Some(Side::Local)
        } else if self.global.binary_search(&i).is_ok() {
            Some(Side::Global)
        } else {
            None
        }
    }

    fn colour_of(&self, i: usize) -> Colour {
        self.colour[&i]
    }
}

fn argmin<D: Distance>(candidates: impl IntoIterator<Item = usize>, dist: impl Fn(usize) -> D) -> Option<usize> {
    let mut best: Option<(usize, D)> = None;
    for i in candidates {
        let d = dist(i);
        if best.is_none_or(|(bi, bd)| d < bd || (d == bd && i < bi)) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

pub fn build_phi<D: Distance>(inst: &Instance<D>, s: &Solution, o: &Solution) -> Result<PhiMap> {
    inst.check_solution(s)?;
    inst.check_solution(o)?;
    let local = s.open();
    let global = o.open();
    let shared: Vec<usize> = global.iter().copied().filter(|i| local.binary_search(i).is_ok()).collect();
    if !shared.is_empty() {
        return Err(Error::Overlap(shared));
    }
    let phi: BTreeMap<usize, usize> =
        global.iter().map(|&g| (g, argmin(local.iter().copied(), |i| inst.d(g, i)).expect("S is nonempty"))).collect();
    let mut preimage: BTreeMap<usize, Vec<usize>> = local.iter().map(|&i| (i, Vec::new())).collect();
    for (&g, &i) in &phi {
        preimage.get_mut(&i).expect("phi maps into S").push(g);
    }
    let cent = preimage
        .iter()
        .filter(|(_, pre)| !pre.is_empty())
        .map(|(&i, pre)| (i, argmin(pre.iter().copied(), |g| inst.d(i, g)).expect("nonempty")))
        .collect();
    let colour =
        local.iter().chain(&global).map(|&i| (i, inst.colour(i).expect("solutions hold facilities"))).collect();
    Ok(PhiMap { local, global, phi, preimage, cent, colour })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FacilityClass {
    /// Empty preimage.
    VeryGood,
    /// No preimage shares its colour.
    Good,
    Bad,
}

pub fn classify(phi: &PhiMap) -> BTreeMap<usize, FacilityClass> {
    phi.local
        .iter()
        .map(|&i| {
            let pre = &phi.preimage[&i];
            let class = if pre.is_empty() {
                FacilityClass::VeryGood
            } else if pre.iter().all(|&g| phi.colour_of(g) != phi.colour_of(i)) {
                FacilityClass::Good
            } else {
                FacilityClass::Bad
            };
            (i, class)
        })
        .collect()
}

/// `|G ∩ B*| - |G ∩ B|` over facilities of `S ∪ O`.
pub fn deficiency(phi: &PhiMap, members: impl IntoIterator<Item = usize>) -> i64 {
    members
        .into_iter()
        .map(|i| match (phi.side(i), phi.colour.get(&i)) {
            (Some(Side::Global), Some(Colour::Blue)) => 1,
            (Some(Side::Local), Some(Colour::Blue)) => -1,
            _ => 0,
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupClass {
    Balanced,
    Good,
    Bad,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    pub representative: usize,
    pub colour: Colour,
    /// Members in `S`, ascending, including the representative.
    pub local: Vec<usize>,
    /// Members in `O`: the preimage of the representative.
    pub global: Vec<usize>,
    pub class: GroupClass,
    pub deficiency: i64,
}

impl Group {
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.local.iter().chain(&self.global).copied()
    }
}

fn group_class(phi: &PhiMap, classes: &BTreeMap<usize, FacilityClass>, rep: usize, local: &[usize]) -> GroupClass {
    let count = |set: &[usize], c: Colour| set.iter().filter(|&&i| phi.colour_of(i) == c).count();
    let global = &phi.preimage[&rep];
    let c = phi.colour_of(rep);
    if count(local, Colour::Red) == count(global, Colour::Red)
        && count(local, Colour::Blue) == count(global, Colour::Blue)
    {
        GroupClass::Balanced
    } else if classes[&rep] == FacilityClass::Good && local.iter().all(|&i| i == rep || phi.colour_of(i) != c) {
        GroupClass::Good
    } else {
        GroupClass::Bad
    }
}

/// Partitions `S ∪ O` into groups, one per facility of `S` with nonzero
/// degree, visited in ascending index order. Each group is padded with
/// very good facilities (lowest index first) to become balanced if
/// possible, else good; otherwise the colour too scarce for balance is
/// used up first and the rest filled from the other colour, making a bad
/// group.
pub fn make_groups(phi: &PhiMap, classes: &BTreeMap<usize, FacilityClass>) -> Result<Vec<Group>> {
    let mut pool: BTreeMap<Colour, VecDeque<usize>> = [Colour::Red, Colour::Blue]
        .into_iter()
        .map(|c| {
            let vg = phi
                .local
                .iter()
                .copied()
                .filter(|&i| classes[&i] == FacilityClass::VeryGood && phi.colour_of(i) == c)
                .collect();
            (c, vg)
        })
        .collect();
    let take = |pool: &mut BTreeMap<Colour, VecDeque<usize>>, c: Colour, k: usize| -> Vec<usize> {
        let q = pool.get_mut(&c).expect("both colours present");
        q.drain(..k.min(q.len())).collect()
    };

    let mut groups = Vec::new();
    let mut seen_bad = false;
    for &rep in phi.local.iter().filter(|&&i| phi.deg(i) > 0) {
        let pre = &phi.preimage[&rep];
        let c = phi.colour_of(rep);
        let pad = pre.len() - 1;
        let same = pre.iter().filter(|&&g| phi.colour_of(g) == c).count();
        let other = pre.len() - same;
        let avail = |pool: &BTreeMap<Colour, VecDeque<usize>>, c: Colour| pool[&c].len();

        let (x, fallback) = if same >= 1 && avail(&pool, c) >= same - 1 && avail(&pool, c.other()) >= other {
            let mut x = take(&mut pool, c, same - 1);
            x.extend(take(&mut pool, c.other(), other));
            (x, false)
        } else if classes[&rep] == FacilityClass::Good && avail(&pool, c.other()) >= pad {
            (take(&mut pool, c.other(), pad), false)
        } else {
            let deficient = if same == 0 || avail(&pool, c.other()) < other { c.other() } else { c };
            let mut x = take(&mut pool, deficient, pad);
            let rest = pad - x.len();
            x.extend(take(&mut pool, deficient.other(), rest));
            if x.len() != pad {
                return Err(Error::Internal(format!(
                    "group of {rep} needs {pad} very good facilities but only {} remain",
                    x.len()
                )));
            }
            (x, true)
        };

        let mut local: Vec<usize> = std::iter::once(rep).chain(x).collect();
        local.sort_unstable();
        let class = group_class(phi, classes, rep, &local);
        if fallback != (class == GroupClass::Bad) {
            return Err(Error::Internal(format!("group of {rep} classified {class:?} against its construction")));
        }
        if fallback {
            seen_bad = true;
        }
        if seen_bad && pool.values().all(|q| !q.is_empty()) {
            return Err(Error::Internal("very good facilities of both colours remain after a bad group".into()));
        }
        let deficiency = deficiency(phi, local.iter().chain(pre).copied());
        groups.push(Group { representative: rep, colour: c, local, global: pre.clone(), class, deficiency });
    }
    if let Some(&left) = pool.values().flatten().next() {
        return Err(Error::Internal(format!("very good facility {left} left ungrouped")));
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub leader: usize,
    /// Representatives of the constituent groups, in merge order.
    pub groups: Vec<usize>,
    pub local: Vec<usize>,
    pub global: Vec<usize>,
}

impl Block {
    fn from_groups(leader: usize, groups: &[&Group]) -> Block {
        let mut local: Vec<usize> = groups.iter().flat_map(|g| g.local.iter().copied()).collect();
        let mut global: Vec<usize> = groups.iter().flat_map(|g| g.global.iter().copied()).collect();
        local.sort_unstable();
        global.sort_unstable();
        Block { leader, groups: groups.iter().map(|g| g.representative).collect(), local, global }
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.local.iter().chain(&self.global).copied()
    }
}

/// Merges groups into blocks: balanced groups stand alone; good groups
/// with differently coloured representatives pair up (lower-indexed
/// representative leads); each bad group absorbs good groups of opposite
/// deficiency sign until its deficiency is zero.
pub fn make_blocks(groups: &[Group]) -> Result<Vec<Block>> {
    let mut blocks = Vec::new();
    for g in groups.iter().filter(|g| g.class == GroupClass::Balanced) {
        blocks.push(Block::from_groups(g.representative, &[g]));
    }

    let good = |c: Colour| -> VecDeque<&Group> {
        groups.iter().filter(|g| g.class == GroupClass::Good && g.colour == c).collect()
    };
    let (mut red_good, mut blue_good) = (good(Colour::Red), good(Colour::Blue));
    while !red_good.is_empty() && !blue_good.is_empty() {
        let (a, b) = (red_good.pop_front().unwrap(), blue_good.pop_front().unwrap());
        let (first, second) = if a.representative < b.representative { (a, b) } else { (b, a) };
        blocks.push(Block::from_groups(first.representative, &[first, second]));
    }

    for bad in groups.iter().filter(|g| g.class == GroupClass::Bad) {
        // Red-representative good groups carry +1, blue ones -1.
        let supply = if bad.deficiency > 0 { &mut blue_good } else { &mut red_good };
        let need = bad.deficiency.unsigned_abs() as usize;
        if supply.len() < need {
            return Err(Error::Internal(format!(
                "bad group of {} has deficiency {} but only {} compensating good groups remain",
                bad.representative,
                bad.deficiency,
                supply.len()
            )));
        }
        let mut parts = vec![bad];
        parts.extend(supply.drain(..need));
        blocks.push(Block::from_groups(bad.representative, &parts));
    }

    if let Some(g) = red_good.iter().chain(&blue_good).next() {
        return Err(Error::Internal(format!("good group of {} left over", g.representative)));
    }
    Ok(blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockViolationKind {
    /// A facility of `S ∪ O` is in no block or in several.
    Partition,
    ColourBalance,
    PhiClosure,
    Leader,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockViolation {
    pub block: Option<usize>,
    pub kind: BlockViolationKind,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub blocks: usize,
    pub violations: Vec<BlockViolation>,
}

impl BlockReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `blocks` partition `S ∪ O` and that each block is colour
/// balanced, closed under phi, and has a valid leader.
pub fn check_block_properties(blocks: &[Block], phi: &PhiMap, classes: &BTreeMap<usize, FacilityClass>) -> BlockReport {
    let mut violations = Vec::new();
    let mut owner: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (b, block) in blocks.iter().enumerate() {
        for i in block.members() {
            owner.entry(i).or_default().push(b);
        }
    }
    for &i in phi.local.iter().chain(&phi.global) {
        if owner.get(&i).map_or(0, Vec::len) != 1 {
            violations.push(BlockViolation { block: None, kind: BlockViolationKind::Partition, witness: vec![i] });
        }
    }
    for (&i, _) in owner.iter().filter(|(i, _)| phi.side(**i).is_none()) {
        violations.push(BlockViolation { block: None, kind: BlockViolationKind::Partition, witness: vec![i] });
    }

    for (b, block) in blocks.iter().enumerate() {
        let mut flag = |kind, witness: Vec<usize>| {
            violations.push(BlockViolation { block: Some(b), kind, witness });
        };
        let members: BTreeSet<usize> = block.members().collect();
        let local: Vec<usize> = members.iter().copied().filter(|&i| phi.side(i) == Some(Side::Local)).collect();
        let global: Vec<usize> = members.iter().copied().filter(|&i| phi.side(i) == Some(Side::Global)).collect();

        for c in [Colour::Red, Colour::Blue] {
            let ls: Vec<usize> = local.iter().copied().filter(|&i| phi.colour_of(i) == c).collect();
            let gs: Vec<usize> = global.iter().copied().filter(|&i| phi.colour_of(i) == c).collect();
            if ls.len() != gs.len() {
                flag(BlockViolationKind::ColourBalance, ls.into_iter().chain(gs).collect());
            }
        }

        for &i in &local {
            let missing: Vec<usize> = phi.preimage[&i].iter().copied().filter(|g| !members.contains(g)).collect();
            if !missing.is_empty() {
                flag(BlockViolationKind::PhiClosure, std::iter::once(i).chain(missing).collect());
            }
        }
        for &g in &global {
            let image = phi.phi[&g];
            if !members.contains(&image) {
                flag(BlockViolationKind::PhiClosure, vec![g, image]);
            }
        }

        let leader = block.leader;
        if !local.contains(&leader) || phi.deg(leader) == 0 {
            flag(BlockViolationKind::Leader, vec![leader]);
        }
        let others = local.iter().copied().filter(|&i| i != leader);
        let bad: Vec<usize> = others.clone().filter(|i| classes[i] == FacilityClass::Bad).collect();
        if !bad.is_empty() {
            flag(BlockViolationKind::Leader, bad);
        }
        let good: Vec<usize> = others.filter(|i| classes[i] == FacilityClass::Good).collect();
        if good.iter().any(|&i| phi.colour_of(i) != phi.colour_of(good[0])) {
            flag(BlockViolationKind::Leader, good);
        }
    }
    BlockReport { blocks: blocks.len(), violations }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClientBound<D> {
    pub client: usize,
    /// `c_j + 2 c*_j - d(j, phi(o_j))`.
    pub slack_nearest: D,
    /// `2 c_j + 3 c*_j - d(j, cent(phi(o_j)))`.
    pub slack_cent: D,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport<D> {
    pub clients: usize,
    /// Clients violating `d(j, phi(o_j)) - c_j <= 2 c*_j`.
    pub nearest_violations: Vec<usize>,
    /// Clients violating `d(j, cent(phi(o_j))) - c_j <= 3 c*_j + c_j`.
    pub cent_violations: Vec<usize>,
    pub min_slack_nearest: Option<D>,
    pub max_slack_nearest: Option<D>,
    pub min_slack_cent: Option<D>,
    pub max_slack_cent: Option<D>,
}

impl<D> BoundsReport<D> {
    pub fn ok(&self) -> bool {
        self.nearest_violations.is_empty() && self.cent_violations.is_empty()
    }
}

/// Per-client slack of the two standard bounds.
pub fn client_bounds<D: Distance>(inst: &Instance<D>, phi: &PhiMap) -> Vec<ClientBound<D>> {
    inst.clients()
        .iter()
        .map(|&j| {
            let s_j = argmin(phi.local.iter().copied(), |i| inst.d(j, i)).expect("S nonempty");
            let o_j = argmin(phi.global.iter().copied(), |i| inst.d(j, i)).expect("O nonempty");
            let (c, c_star) = (inst.d(j, s_j), inst.d(j, o_j));
            let image = phi.phi[&o_j];
            let centre = phi.cent[&image];
            ClientBound {
                client: j,
                slack_nearest: c + c_star + c_star - inst.d(j, image),
                slack_cent: c + c + c_star + c_star + c_star - inst.d(j, centre),
            }
        })
        .collect()
}

pub fn check_standard_bounds<D: Distance>(inst: &Instance<D>, phi: &PhiMap) -> BoundsReport<D> {
    let rows = client_bounds(inst, phi);
    let negative = |slack: D| !D::le_tol(D::ZERO, slack, FLOAT_TOLERANCE);
    let extreme = |f: fn(&ClientBound<D>) -> D, max: bool| {
        rows.iter().map(f).reduce(|a, b| if (b.total_cmp(&a).is_gt()) == max { b } else { a })
    };
    BoundsReport {
        clients: rows.len(),
        nearest_violations: rows.iter().filter(|r| negative(r.slack_nearest)).map(|r| r.client).collect(),
        cent_violations: rows.iter().filter(|r| negative(r.slack_cent)).map(|r| r.client).collect(),
        min_slack_nearest: extreme(|r| r.slack_nearest, false),
        max_slack_nearest: extreme(|r| r.slack_nearest, true),
        min_slack_cent: extreme(|r| r.slack_cent, false),
        max_slack_cent: extreme(|r| r.slack_cent, true),
    }
}

/// Everything derived from one `(S, O)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition<D> {
    pub phi: PhiMap,
    pub classes: BTreeMap<usize, FacilityClass>,
    pub groups: Vec<Group>,
    pub blocks: Vec<Block>,
    pub block_report: BlockReport,
    pub bounds: BoundsReport<D>,
}

impl<D> Decomposition<D> {
    pub fn ok(&self) -> bool {
        self.block_report.ok() && self.bounds.ok()
    }
}

/// Runs the full pipeline on disjoint `s` and `o`.
pub fn decompose<D: Distance>(inst: &Instance<D>, s: &Solution, o: &Solution) -> Result<Decomposition<D>> {
    let phi = build_phi(inst, s, o)?;
    let classes = classify(&phi);
    let groups = make_groups(&phi, &classes)?;
    let blocks = make_blocks(&groups)?;
    let block_report = check_block_properties(&blocks, &phi, &classes);
    let bounds = check_standard_bounds(inst, &phi);
    Ok(Decomposition { phi, classes, groups, blocks, block_report, bounds })
}
