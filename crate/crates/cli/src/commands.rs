use std::fs;
use std::path::Path;

use redblue::decomposition::decompose as decompose_pair;
use redblue::exact::{brute_force_opt, is_local_opt, LocalOptVerdict};
use redblue::gap::{self, GapParams};
use redblue::instance::{disjointify, parse, parse_solution, serialize, serialize_solution};
use redblue::local_search::{run, Rule, SearchConfig};
use redblue::{AnyInstance, Distance, Error, Instance, Solution};
use serde_json::{json, Value};

use crate::{DecomposeArgs, ExactArgs, GengapArgs, RuleArg, SolveArgs, VerifyArgs};

pub const OK: u8 = 0;
pub const FAILED: u8 = 1;
pub const INPUT: u8 = 2;
pub const CAP: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => CAP,
            Error::Internal(_) => FAILED,
            _ => INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

pub type CmdResult = Result<u8, Failure>;

/// Runs `$body` with `$inst` bound to the instance on whichever numeric
/// path it was parsed.
macro_rules! with_instance {
    ($any:expr, $inst:ident => $body:expr) => {
        match $any {
            AnyInstance::Int($inst) => $body,
            AnyInstance::Float($inst) => $body,
        }
    };
}
pub(crate) use with_instance;

pub fn read_instance(path: &Path) -> Result<AnyInstance, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse(&bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_solution(path: &Path) -> Result<Solution, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_solution(&bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes pretty JSON to `out`, or to stdout.
fn emit(out: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    match out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn solve(args: &SolveArgs) -> CmdResult {
    let any = read_instance(&args.instance)?;
    let initial = args.initial.as_deref().map(read_solution).transpose()?;
    let config = SearchConfig {
        p: args.p,
        epsilon: args.epsilon,
        rule: match args.rule {
            RuleArg::Best => Rule::Best,
            RuleArg::First => Rule::First,
        },
        seed: args.seed,
        max_iters: args.max_iters,
        ..SearchConfig::default()
    };
    let doc = with_instance!(any, inst => run(&inst, &config, initial.as_ref())?.to_json());
    emit(args.out.as_deref(), &doc)?;
    if args.out.is_some() {
        println!("cost {} after {} iterations", doc["cost"], doc["iterations"]);
    }
    Ok(OK)
}

pub fn exact(args: &ExactArgs) -> CmdResult {
    let any = read_instance(&args.instance)?;
    let doc = with_instance!(any, inst => {
        let r = brute_force_opt(&inst, args.cap)?;
        json!({ "solution": r.solution, "cost": r.cost.to_json(), "examined": r.examined })
    });
    emit(args.out.as_deref(), &doc)?;
    if args.out.is_some() {
        println!("optimum {}", doc["cost"]);
    }
    Ok(OK)
}

fn verdict_json<D: Distance>(v: &LocalOptVerdict<D>) -> Value {
    match v {
        LocalOptVerdict::LocallyOptimal { moves_checked, zero_delta_moves } => json!({
            "verdict": "locally-optimal",
            "moves_checked": moves_checked,
            "zero_delta_moves": zero_delta_moves,
        }),
        LocalOptVerdict::Improvable { witness, delta } => json!({
            "verdict": "improvable",
            "witness": witness,
            "delta": delta.to_json(),
        }),
    }
}

fn check_local<D: Distance>(inst: &Instance<D>, sol: &Solution, args: &VerifyArgs) -> Result<(bool, Value), Failure> {
    let v = is_local_opt(inst, sol, args.p, args.cap)?;
    match &v {
        LocalOptVerdict::LocallyOptimal { moves_checked, .. } => {
            println!("locally optimal for p={} ({moves_checked} moves checked)", args.p)
        }
        LocalOptVerdict::Improvable { witness, delta } => println!(
            "improving move: close red {:?} open red {:?} close blue {:?} open blue {:?}, delta {delta}",
            witness.close_red, witness.open_red, witness.close_blue, witness.open_blue
        ),
    }
    Ok((v.is_locally_optimal(), verdict_json(&v)))
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let any = read_instance(&args.instance)?;
    let sol = read_solution(&args.solution)?;
    let (ok, doc) = with_instance!(any, inst => check_local(&inst, &sol, args)?);
    if let Some(out) = &args.out {
        emit(Some(out), &doc)?;
    }
    Ok(if ok { OK } else { FAILED })
}

fn decompose_doc<D: Distance + serde::Serialize>(
    inst: &Instance<D>,
    s: &Solution,
    o: &Solution,
    split: bool,
) -> Result<(bool, Value), Failure> {
    let (inst, s, o) = if split { disjointify(inst, s, o)? } else { (inst.clone(), s.clone(), o.clone()) };
    let d = decompose_pair(&inst, &s, &o)?;
    let ok = d.ok();
    let doc = json!({
        "n": inst.n(),
        "s": s,
        "o": o,
        "ok": ok,
        "decomposition": serde_json::to_value(&d).map_err(|e| Failure::input(e.to_string()))?,
    });
    Ok((ok, doc))
}

pub fn decompose(args: &DecomposeArgs) -> CmdResult {
    let any = read_instance(&args.instance)?;
    let s = read_solution(&args.s)?;
    let o = read_solution(&args.o)?;
    let (ok, doc) = with_instance!(any, inst => decompose_doc(&inst, &s, &o, args.disjointify)?);
    emit(args.out.as_deref(), &doc)?;
    if args.out.is_some() {
        println!("{}", if ok { "all block and client checks pass" } else { "decomposition checks failed" });
    }
    Ok(if ok { OK } else { FAILED })
}

pub fn expected_json(params: GapParams) -> Value {
    json!({
        "p": params.p,
        "ell": params.ell,
        "alpha": params.alpha(),
        "beta": params.beta(),
        "k_r": params.k_r(),
        "k_b": params.k_b(),
        "local_cost": params.expected_local_cost(),
        "global_cost": params.expected_global_cost(),
        "ratio": params.expected_ratio().to_string(),
        "ratio_lower_bound": params.ratio_lower_bound().to_string(),
    })
}

pub fn gengap(args: &GengapArgs) -> CmdResult {
    let g = gap::build(GapParams::new(args.p, args.ell)?)?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::input(format!("{}: {e}", args.out.display())))?;
    write_bytes(&args.out.join("instance.json"), &serialize(&g.instance))?;
    write_bytes(&args.out.join("local.json"), &serialize_solution(&g.local))?;
    write_bytes(&args.out.join("global.json"), &serialize_solution(&g.global))?;
    emit(Some(&args.out.join("expected.json")), &expected_json(g.params))?;
    if !args.verify {
        return Ok(OK);
    }
    let report = gap::verify(&g, args.cap)?;
    let doc = serde_json::to_value(&report).map_err(|e| Failure::input(e.to_string()))?;
    emit(Some(&args.out.join("report.json")), &doc)?;
    println!(
        "local {} (expected {}), optimum {}, ratio {}, {}",
        report.local_cost,
        report.expected_local_cost,
        report.opt.as_ref().map_or("unknown".to_string(), |o| o.cost().to_string()),
        report.ratio,
        if report.local_opt.is_locally_optimal() { "locally optimal" } else { "improvable" },
    );
    Ok(if report.passed() { OK } else { FAILED })
}
