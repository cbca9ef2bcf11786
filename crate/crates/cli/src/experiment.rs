use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use redblue::exact::{certified_opt, DEFAULT_CAP};
use redblue::gap::{self, GapParams};
use redblue::instance::{gen_euclidean, RandomParams};
use redblue::local_search::{run as search, SearchConfig};
use redblue::{AnyInstance, Distance, Instance, Solution};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::{read_instance, with_instance, CmdResult, Failure, OK};
use crate::ExperimentArgs;

pub const SCHEMA: &str = "# redblue-experiment schema v1";
pub const COLUMNS: [&str; 9] =
    ["instance", "p", "seed", "local_cost", "opt", "ratio", "iterations", "wall_ms", "error"];

/// Ratios above this at p = 1 are flagged in the summary.
const P1_FLAG: f64 = 7.0 + 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialMode {
    /// A random feasible solution drawn from the row seed.
    #[default]
    Random,
    /// The designated local solution of gap instances; random elsewhere.
    Designated,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EuclideanCorpus {
    pub count: u64,
    /// Instance `i` uses `seed + i`.
    #[serde(flatten)]
    pub params: RandomParams,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Every `*.json` file in this directory, in name order.
    #[serde(default)]
    pub corpus_dir: Option<PathBuf>,
    /// Gap instances as `[p, ell]` pairs.
    #[serde(default)]
    pub gap: Vec<(usize, usize)>,
    #[serde(default)]
    pub euclidean: Option<EuclideanCorpus>,
    pub p_values: Vec<usize>,
    #[serde(default)]
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub initial: InitialMode,
    #[serde(default = "default_cap")]
    pub opt_cap: u128,
    #[serde(default = "default_neighborhood")]
    pub max_neighborhood: u128,
    pub out: PathBuf,
    /// Optional JSON summary of ratios per p.
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

fn default_cap() -> u128 {
    DEFAULT_CAP
}

fn default_neighborhood() -> u128 {
    10_000_000
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.p_values.is_empty() || self.p_values.contains(&0) {
            return Err(Failure::input("p_values must be non-empty and at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Failure::input("seeds must be non-empty"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Failure::input(format!("epsilon must lie in [0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Resolves relative paths against `base`.
    fn rebase(&mut self, base: &Path) {
        for path in [self.corpus_dir.as_mut(), Some(&mut self.out), self.summary.as_mut()].into_iter().flatten() {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

struct Entry {
    name: String,
    instance: Result<AnyInstance, String>,
    designated: Option<Solution>,
    hints: Vec<Solution>,
}

fn corpus(spec: &ExperimentSpec) -> Result<Vec<Entry>, Failure> {
    let mut entries = Vec::new();
    if let Some(dir) = &spec.corpus_dir {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        for path in files {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let instance = read_instance(&path).map_err(|f| f.message);
            entries.push(Entry { name, instance, designated: None, hints: vec![] });
        }
    }
    for &(p, ell) in &spec.gap {
        let name = format!("gap-p{p}-l{ell}");
        match GapParams::new(p, ell).and_then(gap::build) {
            Ok(g) => entries.push(Entry {
                name,
                instance: Ok(g.instance.into()),
                designated: Some(g.local),
                hints: vec![g.global],
            }),
            Err(e) => entries.push(Entry { name, instance: Err(e.to_string()), designated: None, hints: vec![] }),
        }
    }
    if let Some(e) = &spec.euclidean {
        for i in 0..e.count {
            let params = RandomParams { seed: e.params.seed + i, ..e.params };
            entries.push(Entry {
                name: format!("euclid-{}", params.seed),
                instance: gen_euclidean(&params).map(Into::into).map_err(|e| e.to_string()),
                designated: None,
                hints: vec![],
            });
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub p: String,
    pub seed: String,
    pub local_cost: String,
    pub opt: String,
    pub ratio: Option<f64>,
    pub iterations: String,
    pub wall_ms: String,
    pub error: String,
}

impl Row {
    fn record(&self) -> [String; 9] {
        [
            self.instance.clone(),
            self.p.clone(),
            self.seed.clone(),
            self.local_cost.clone(),
            self.opt.clone(),
            self.ratio.map_or(String::new(), |r| r.to_string()),
            self.iterations.clone(),
            self.wall_ms.clone(),
            self.error.clone(),
        ]
    }
}

fn ratio(l: f64, o: f64) -> f64 {
    if o > 0.0 {
        l / o
    } else if l > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

fn run_row<D: Distance>(
    inst: &Instance<D>,
    opt: Option<f64>,
    initial: Option<&Solution>,
    config: &SearchConfig,
    row: &mut Row,
) {
    let start = Instant::now();
    match search(inst, config, initial) {
        Ok(r) => {
            row.local_cost = r.cost().to_string();
            row.iterations = r.iterations.to_string();
            row.ratio = opt.map(|o| ratio(r.cost().to_f64(), o));
        }
        Err(e) => row.error = e.to_string(),
    }
    row.wall_ms = format!("{:.3}", start.elapsed().as_secs_f64() * 1e3);
}

/// Computes every row in spec order: instances, then p values, then seeds.
pub fn rows(spec: &ExperimentSpec) -> Result<Vec<Row>, Failure> {
    let entries = corpus(spec)?;
    // Optimum per instance, for display and for ratios.
    let opts: Vec<Option<(String, f64)>> = entries
        .par_iter()
        .map(|e| {
            let inst = e.instance.as_ref().ok()?;
            with_instance!(inst, inst => certified_opt(inst, spec.opt_cap, &e.hints).ok().flatten().map(|o| (o.cost().to_string(), o.cost().to_f64())))
        })
        .collect();

    let mut tasks = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        if e.instance.is_err() {
            tasks.push((i, None));
            continue;
        }
        for &p in &spec.p_values {
            for &seed in &spec.seeds {
                tasks.push((i, Some((p, seed))));
            }
        }
    }

    Ok(tasks
        .into_par_iter()
        .map(|(i, task)| {
            let e = &entries[i];
            let mut row = Row {
                instance: e.name.clone(),
                opt: opts[i].as_ref().map(|o| o.0.clone()).unwrap_or_default(),
                ..Row::default()
            };
            let (inst, (p, seed)) = match (&e.instance, task) {
                (Err(msg), _) => {
                    row.error = msg.clone();
                    return row;
                }
                (Ok(inst), Some(task)) => (inst, task),
                (Ok(_), None) => unreachable!("tasks for parsed instances carry parameters"),
            };
            row.p = p.to_string();
            row.seed = seed.to_string();
            let config = SearchConfig {
                p,
                epsilon: spec.epsilon,
                seed,
                max_neighborhood: spec.max_neighborhood,
                ..SearchConfig::default()
            };
            let initial = match spec.initial {
                InitialMode::Designated => e.designated.as_ref(),
                InitialMode::Random => None,
            };
            let opt = opts[i].as_ref().map(|o| o.1);
            with_instance!(inst, inst => run_row(inst, opt, initial, &config, &mut row));
            row
        })
        .collect())
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::input(format!("{}: {e}", path.display()));
    let mut file = File::create(path).map_err(io)?;
    writeln!(file, "{SCHEMA}").map_err(io)?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| Failure::input(format!("{}: {e}", path.display()));
    w.write_record(COLUMNS).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PSummary {
    pub rows: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

pub fn summarize(rows: &[Row]) -> BTreeMap<usize, PSummary> {
    let mut by_p: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in rows {
        if let (Ok(p), Some(r)) = (row.p.parse(), row.ratio) {
            by_p.entry(p).or_default().push(r);
        }
    }
    by_p.into_iter()
        .map(|(p, rs)| {
            let max = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = rs.iter().sum::<f64>() / rs.len() as f64;
            (p, PSummary { rows: rs.len(), max_ratio: max, mean_ratio: mean })
        })
        .collect()
}

pub fn run(args: &ExperimentArgs) -> CmdResult {
    let text = fs::read_to_string(&args.spec).map_err(|e| Failure::input(format!("{}: {e}", args.spec.display())))?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", args.spec.display())))?;
    spec.rebase(args.spec.parent().unwrap_or(Path::new(".")));
    if let Some(out) = &args.out {
        spec.out = out.clone();
    }
    spec.validate()?;

    let rows = rows(&spec)?;
    write_csv(&spec.out, &rows)?;
    let summary = summarize(&rows);
    let errors = rows.iter().filter(|r| !r.error.is_empty()).count();
    let flagged = summary.get(&1).is_some_and(|s| s.max_ratio > P1_FLAG);
    for (p, s) in &summary {
        println!("p={p}: {} rows with ratio, max {:.6}, mean {:.6}", s.rows, s.max_ratio, s.mean_ratio);
    }
    if flagged {
        println!("flagged: p=1 ratio exceeds 7");
    }
    println!("{} rows, {errors} errors, written to {}", rows.len(), spec.out.display());
    if let Some(path) = &spec.summary {
        let doc = json!({ "per_p": summary, "errors": errors, "flagged_p1_above_7": flagged });
        let text = serde_json::to_string_pretty(&doc).expect("json values serialize");
        fs::write(path, text + "\n").map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    // The ratio summary is a report; a flag alone does not fail the run.
    Ok(OK)
}
