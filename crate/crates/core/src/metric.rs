//! Metric spaces over a fixed set of locations.
//!
//! A [`MetricSpace`] is a dense, validated distance table. Distances are
//! generic over [`Distance`], which is implemented for `i64` (exact integer
//! arithmetic, used by the locality-gap constructions) and `f64` (Euclidean
//! instances, compared with a relative tolerance).
//!
//! Zero distance between distinct locations is allowed: co-located
//! facilities and clients are expressed that way.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

/// Above this many locations the O(n³) triangle check only runs on request.
pub const TRIANGLE_CHECK_LIMIT: usize = 512;

/// Scalar type of a distance table.
pub trait Distance:
    Copy
    + PartialOrd
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    /// True for the exact (integer) path.
    const EXACT: bool;

    fn to_f64(self) -> f64;

    /// Document encoding: integers as JSON numbers, fractions as decimal
    /// strings.
    fn to_json(self) -> serde_json::Value;

    /// Total order used for deterministic reductions.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// `lhs <= rhs`, with relative tolerance `tol` on the inexact path.
    fn le_tol(lhs: Self, rhs: Self, tol: f64) -> bool;

    /// `lhs == rhs`, with relative tolerance `tol` on the inexact path.
    fn eq_tol(lhs: Self, rhs: Self, tol: f64) -> bool {
        Self::le_tol(lhs, rhs, tol) && Self::le_tol(rhs, lhs, tol)
    }

    fn is_valid_length(self) -> bool;

    /// Whether a cost change `delta` from a solution of cost `cost` counts
    /// as a strict improvement.
    fn improves(delta: Self, cost: Self) -> bool;

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Distance for i64 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    const EXACT: bool = true;

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn to_json(self) -> serde_json::Value {
        self.into()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn le_tol(lhs: Self, rhs: Self, _tol: f64) -> bool {
        lhs <= rhs
    }

    fn is_valid_length(self) -> bool {
        self >= 0
    }

    fn improves(delta: Self, _cost: Self) -> bool {
        delta < 0
    }
}

/// Relative tolerance for floating-point comparisons.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Floating-point deltas must beat this fraction of the current cost to be
/// counted as improvements, so rounding noise never drives the search.
const FLOAT_IMPROVEMENT: f64 = 1e-12;

impl Distance for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const EXACT: bool = false;

    fn to_f64(self) -> f64 {
        self
    }

    fn to_json(self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn le_tol(lhs: Self, rhs: Self, tol: f64) -> bool {
        lhs <= rhs + tol * lhs.abs().max(rhs.abs()).max(1.0)
    }

    fn is_valid_length(self) -> bool {
        self.is_finite() && self >= 0.0
    }

    fn improves(delta: Self, cost: Self) -> bool {
        delta < -FLOAT_IMPROVEMENT * cost.abs().max(1.0)
    }
}

/// How thoroughly [`MetricSpace::from_matrix`] validates its input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    /// Relative tolerance for the inexact path; ignored for integers.
    pub tolerance: f64,
    /// Run the triangle check even above [`TRIANGLE_CHECK_LIMIT`].
    pub force_triangle: bool,
}

impl Default for Validation {
    fn default() -> Self {
        Validation { tolerance: FLOAT_TOLERANCE, force_triangle: false }
    }
}

impl Validation {
    pub fn exact() -> Self {
        Validation { tolerance: 0.0, force_triangle: true }
    }
}

/// A validated, symmetric distance table over `n` locations.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace<D> {
    n: usize,
    dist: Vec<D>,
}

impl<D: Distance> MetricSpace<D> {
    /// Builds a metric space from a square table, checking every metric
    /// axiom. Errors carry the witnessing indices.
    pub fn from_matrix(table: Vec<Vec<D>>, validation: Validation) -> Result<Self> {
        let n = table.len();
        let mut dist = Vec::with_capacity(n * n);
        for (row, entries) in table.into_iter().enumerate() {
            if entries.len() != n {
                return Err(Error::NotSquare { row, len: entries.len(), n });
            }
            dist.extend(entries);
        }
        let space = MetricSpace { n, dist };
        space.validate(validation)?;
        Ok(space)
    }

    /// Checks the metric axioms in the order: entries, diagonal, symmetry,
    /// triangle inequality.
    pub fn validate(&self, validation: Validation) -> Result<()> {
        let n = self.n;
        let tol = validation.tolerance;
        for i in 0..n {
            for j in 0..n {
                if !self.d(i, j).is_valid_length() {
                    return Err(Error::NegativeDistance { i, j });
                }
            }
        }
        for i in 0..n {
            if !D::eq_tol(self.d(i, i), D::ZERO, tol) {
                return Err(Error::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !D::eq_tol(self.d(i, j), self.d(j, i), tol) {
                    return Err(Error::Asymmetric { i, j });
                }
            }
        }
        if n <= TRIANGLE_CHECK_LIMIT || validation.force_triangle {
            for i in 0..n {
                for k in 0..n {
                    let direct = self.d(i, k);
                    for j in 0..n {
                        if !D::le_tol(direct, self.d(i, j) + self.d(j, k), tol) {
                            return Err(Error::TriangleViolation { i, j, k });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Shortest-path metric of a weighted graph. Pairs in different
    /// components get the graph's sentinel distance.
    pub fn from_graph(spec: &GraphSpec<D>) -> Result<Self> {
        spec.validate()?;
        let n = spec.n;
        let mut best: Vec<Option<D>> = vec![None; n * n];
        for i in 0..n {
            best[i * n + i] = Some(D::ZERO);
        }
        for &(u, v, len) in &spec.edges {
            for (a, b) in [(u, v), (v, u)] {
                let slot = &mut best[a * n + b];
                if slot.is_none_or(|cur| len < cur) {
                    *slot = Some(len);
                }
            }
        }
        floyd_warshall(n, &mut best);
        let sentinel = spec.sentinel();
        let dist = best.into_iter().map(|d| d.unwrap_or(sentinel)).collect();
        Ok(MetricSpace { n, dist })
    }

    /// Re-applies shortest-path closure. A valid metric is left unchanged.
    pub fn closure(&self) -> Self {
        let mut best: Vec<Option<D>> = self.dist.iter().copied().map(Some).collect();
        floyd_warshall(self.n, &mut best);
        MetricSpace { n: self.n, dist: best.into_iter().map(|d| d.unwrap_or(D::ZERO)).collect() }
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> D {
        self.dist[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, i: usize) -> &[D] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn to_table(&self) -> Vec<Vec<D>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Appends copies of existing locations; each copy is at distance zero
    /// from its original and inherits all of its other distances.
    pub fn with_duplicates(&self, originals: &[usize]) -> Self {
        let old = self.n;
        let n = old + originals.len();
        let source = |i: usize| if i < old { i } else { originals[i - old] };
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (source(i), source(j));
                dist.push(if a == b { D::ZERO } else { self.d(a, b) });
            }
        }
        MetricSpace { n, dist }
    }
}

fn floyd_warshall<D: Distance>(n: usize, best: &mut [Option<D>]) {
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = best[i * n + k] else { continue };
            for j in 0..n {
                let Some(kj) = best[k * n + j] else { continue };
                let via = ik + kj;
                let slot = &mut best[i * n + j];
                if slot.is_none_or(|cur| via < cur) {
                    *slot = Some(via);
                }
            }
        }
    }
}

/// Distance assigned to pairs of locations with no connecting path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SentinelPolicy<D> {
    /// `1 + Σ edge lengths`, which exceeds every shortest path.
    OnePlusEdgeSum,
    Fixed(D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec<D> {
    pub n: usize,
    pub edges: Vec<(usize, usize, D)>,
    pub sentinel_policy: SentinelPolicy<D>,
}

impl<D: Distance> GraphSpec<D> {
    pub fn new(n: usize) -> Self {
        GraphSpec { n, edges: Vec::new(), sentinel_policy: SentinelPolicy::OnePlusEdgeSum }
    }

    pub fn edge(&mut self, u: usize, v: usize, len: D) -> &mut Self {
        self.edges.push((u, v, len));
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (edge, &(u, v, len)) in self.edges.iter().enumerate() {
            if u >= self.n || v >= self.n {
                return Err(Error::EdgeEndpoint { edge, n: self.n });
            }
            if !len.is_valid_length() {
                return Err(Error::NegativeEdge { edge });
            }
        }
        Ok(())
    }

    pub fn sentinel(&self) -> D {
        match self.sentinel_policy {
            SentinelPolicy::OnePlusEdgeSum => D::ONE + self.edges.iter().map(|&(_, _, len)| len).sum::<D>(),
            SentinelPolicy::Fixed(m) => m,
        }
    }
}
