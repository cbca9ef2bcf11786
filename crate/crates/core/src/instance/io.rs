//! JSON documents for instances and solutions.
//!
//! ```json
//! {"n": 3, "metric": {"matrix": [[0,1,2],[1,0,1],[2,1,0]]},
//!  "clients": [0], "red": [1], "blue": [2], "k_r": 1, "k_b": 0}
//! ```
//!
//! The metric may instead be `{"graph": {"edges": [[u, v, len], ...]}}`,
//! closed under shortest paths. Integer tables select the exact path;
//! any fractional entry (a JSON float or a decimal string) selects the
//! floating-point path. Fractional distances are written as decimal
//! strings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Instance, Solution};
use crate::error::{Error, Result};
use crate::metric::{Distance, GraphSpec, MetricSpace, Validation};

/// An instance on either numeric path.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyInstance {
    Int(Instance<i64>),
    Float(Instance<f64>),
}

impl From<Instance<i64>> for AnyInstance {
    fn from(inst: Instance<i64>) -> Self {
        AnyInstance::Int(inst)
    }
}

impl From<Instance<f64>> for AnyInstance {
    fn from(inst: Instance<f64>) -> Self {
        AnyInstance::Float(inst)
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    n: usize,
    metric: MetricDoc,
    clients: Vec<usize>,
    red: Vec<usize>,
    blue: Vec<usize>,
    k_r: usize,
    k_b: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MetricDoc {
    Matrix(Vec<Vec<Value>>),
    Graph(GraphDoc),
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    edges: Vec<(usize, usize, Value)>,
}

fn as_int(v: &Value) -> Option<i64> {
    match v {
        Value::Number(num) => num.as_i64(),
        _ => None,
    }
}

fn as_float(v: &Value) -> Result<f64> {
    match v {
        Value::Number(num) => num.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::Format(format!("not a distance: {v}")))
}

pub fn parse(bytes: &[u8]) -> Result<AnyInstance> {
    let doc: Document = serde_json::from_slice(bytes)?;
    let values: Vec<&Value> = match &doc.metric {
        MetricDoc::Matrix(rows) => rows.iter().flatten().collect(),
        MetricDoc::Graph(g) => g.edges.iter().map(|(_, _, len)| len).collect(),
    };
    if values.iter().all(|v| as_int(v).is_some()) {
        build(doc, |v| Ok(as_int(v).expect("checked integral"))).map(AnyInstance::Int)
    } else {
        build(doc, as_float).map(AnyInstance::Float)
    }
}

fn build<D: Distance>(doc: Document, scalar: impl Fn(&Value) -> Result<D>) -> Result<Instance<D>> {
    let space = match doc.metric {
        MetricDoc::Matrix(rows) => {
            if rows.len() != doc.n {
                return Err(Error::Format(format!("matrix has {} rows but n = {}", rows.len(), doc.n)));
            }
            let table = rows
                .iter()
                .map(|row| row.iter().map(&scalar).collect::<Result<Vec<D>>>())
                .collect::<Result<Vec<_>>>()?;
            MetricSpace::from_matrix(table, Validation::default())?
        }
        MetricDoc::Graph(g) => {
            let mut spec = GraphSpec::new(doc.n);
            for (u, v, len) in &g.edges {
                spec.edge(*u, *v, scalar(len)?);
            }
            MetricSpace::from_graph(&spec)?
        }
    };
    Instance::new(space, doc.clients, doc.red, doc.blue, doc.k_r, doc.k_b)
}

/// Writes the instance with its metric as an explicit matrix.
pub fn serialize<D: Distance>(inst: &Instance<D>) -> Vec<u8> {
    let table = inst.space().to_table().into_iter().map(|row| row.into_iter().map(D::to_json).collect()).collect();
    let doc = Document {
        n: inst.n(),
        metric: MetricDoc::Matrix(table),
        clients: inst.clients().to_vec(),
        red: inst.red().to_vec(),
        blue: inst.blue().to_vec(),
        k_r: inst.k_r(),
        k_b: inst.k_b(),
    };
    serde_json::to_vec(&doc).expect("instance documents always serialize")
}

impl AnyInstance {
    pub fn serialize(&self) -> Vec<u8> {
        match self {
            AnyInstance::Int(inst) => serialize(inst),
            AnyInstance::Float(inst) => serialize(inst),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyInstance::Int(inst) => inst.n(),
            AnyInstance::Float(inst) => inst.n(),
        }
    }
}

pub fn parse_solution(bytes: &[u8]) -> Result<Solution> {
    let sol: Solution = serde_json::from_slice(bytes)?;
    Ok(Solution::new(sol.red, sol.blue))
}

pub fn serialize_solution(sol: &Solution) -> Vec<u8> {
    serde_json::to_vec(sol).expect("solutions always serialize")
}
