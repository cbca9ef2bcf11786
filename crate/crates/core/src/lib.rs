//! Budgeted Red-Blue Median toolkit.
//!
//! Clients and two colours of facilities live in a metric space; a solution
//! opens exactly `k_r` red and `k_b` blue facilities and every client
//! connects to its nearest open facility. The crate provides:
//!
//! - [`metric`]: validated metric spaces and shortest-path closure;
//! - [`instance`]: the problem model, cost evaluation, JSON I/O, generators;
//! - [`local_search`]: the p-swap heuristic with incremental move pricing;
//! - [`exact`]: brute-force optimum and local-optimality oracles;
//! - [`decomposition`]: the phi map, groups and blocks relating a local and a
//!   global solution, with checkers for their structural properties;
//! - [`gap`]: locality-gap instances with designated local and global optima.

mod combin;
pub mod decomposition;
pub mod error;
pub mod exact;
pub mod gap;
pub mod instance;
pub mod local_search;
pub mod metric;

pub use error::{Error, Result};
pub use instance::{evaluate, AnyInstance, Assignment, Colour, Instance, Solution};
pub use metric::{Distance, GraphSpec, MetricSpace, Validation};
