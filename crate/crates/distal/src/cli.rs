//! Command-line front end: JSON I/O over the library, reproducible run
//! manifests, and plot-data emission for cell-count sweeps.
//!
//! Conventions shared by every command:
//! * stdout carries exactly one JSON object per result (`tuple enumerate`
//!   emits JSON Lines; `decompose --sweep` emits CSV);
//! * all integers in JSON are decimal strings, so factorial-scale values
//!   survive consumers that parse numbers as doubles;
//! * exit 0 = success, 1 = a checked property failed (the counterexample
//!   is in the JSON), 2 = input error (a `{"error": …}` diagnostic is
//!   printed);
//! * `--manifest PATH` records the command, input digests, certificates,
//!   horizon, and seed; `replay PATH` re-runs a manifest bit-exactly.

use crate::error::{Error, Result};
use crate::formula::{EvalContext, SpaceSpec, Term};
use crate::operator::{Cert, Operator, OperatorTuple, Sign};
use crate::pdelta::{p_delta, q_delta};
use crate::predicate::{Predicate, PredicateFile, RegularVerdict, SubPredicate};
use crate::sexpr;
use crate::shd::{
    canonical_witness, case1_regime, catchall_construct, combine_system, decompose,
    decompose_with_system, firstcoord_shd, order_shd, select_shd, verify_shd, CatchallInput,
    ParamFormula, System,
};
use crate::tuplespace::{sufficient_delta, Extremum, TupleSpace};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "distal", version, about = "Sparse-predicate arithmetic toolkit")]
struct Cli {
    /// Member-count horizon for window searches and certificates.
    #[arg(long, global = true, default_value_t = 96)]
    horizon: usize,

    /// Sampling seed recorded in the manifest (commands themselves are
    /// deterministic).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for the verify/decompose grids.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write a reproducible run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Query a sparse predicate.
    Pred {
        #[command(subcommand)]
        cmd: PredCmd,
    },
    /// Apply and classify shift-polynomial operators.
    Op {
        #[command(subcommand)]
        cmd: OpCmd,
    },
    /// Work with gapped tuple spaces.
    Tuple {
        #[command(subcommand)]
        cmd: TupleCmd,
    },
    /// Evaluate the extremal functions P and Q at a threshold.
    Pdelta(PdeltaArgs),
    /// Build, verify, and apply strong honest definitions.
    Shd {
        #[command(subcommand)]
        cmd: ShdCmd,
    },
    /// Split a window into cells of constant truth pattern.
    Decompose(DecomposeArgs),
    /// Re-run a recorded manifest bit-exactly.
    Replay {
        /// Manifest file produced by --manifest.
        path: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum PredCmd {
    /// n-th member (0-based).
    Nth {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        index: usize,
    },
    /// k-fold successor of a member (negative k clamps at the least member).
    Successor {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
    },
    /// Eventual period of the member sequence modulo m.
    Period {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        modulus: String,
    },
    /// Check the window against the declared growth profile.
    Regular {
        #[arg(long)]
        pred: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum OpCmd {
    /// Apply Σ aᵢσⁱ to a member.
    Apply {
        #[arg(long)]
        pred: PathBuf,
        /// Coefficient list, lowest power first, e.g. [-2,1].
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Eventual sign of the operator on the predicate.
    Sign {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Least shift count after which the operator dominates twice itself.
    S2 {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, default_value_t = 64)]
        max: usize,
    },
    /// Least shift count after which a beats b on the window.
    Beats {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = 64)]
        max: usize,
    },
    /// Innocuous-shift constant for a leading operator.
    Lambda {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a1: String,
        #[arg(long, default_value_t = 64)]
        max: usize,
    },
}

#[derive(Args, Debug)]
struct SubArgs {
    /// Start index of the working subsequence.
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Index step of the working subsequence.
    #[arg(long, default_value_t = 1)]
    step: usize,
}

#[derive(Subcommand, Debug)]
enum TupleCmd {
    /// Is the tuple a member of the gapped space?
    Contains {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        /// Tuple values, e.g. [32,16,8].
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// Smallest certified gap for an operator tuple.
    Delta {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long, default_value_t = 16)]
        max: usize,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// Extreme dot value over an index box.
    Extreme {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        maximize: bool,
        /// Index bounds per coordinate, e.g. [[0,5],[null,null]].
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// First members in dot order, one JSON object per line.
    Enumerate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long)]
        delta: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[command(flatten)]
        sub: SubArgs,
    },
}

#[derive(Args, Debug)]
struct PdeltaArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    ops: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: usize,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[command(flatten)]
    sub: SubArgs,
}

#[derive(Subcommand, Debug)]
enum ShdCmd {
    /// Candidate system for an order-expressible family.
    Order {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Honest definition of the first extremal coordinate.
    Firstcoord {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        #[command(flatten)]
        sub: SubArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a system against a family over finite windows.
    Verify {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "B")]
        pool: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
        wa: Vec<i64>,
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
        wa2: Option<Vec<i64>>,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// Pick the first candidate and parameters pinning a point's type.
    Select {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "B")]
        pool: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
        window: Vec<i64>,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// Merge a candidate system into a single disjunctive candidate.
    Combine {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the least witness between two dot-bounds.
    Canonical {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ops-a")]
        ops_a: PathBuf,
        #[arg(long = "ops-b")]
        ops_b: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y1: String,
        #[arg(long, allow_hyphen_values = true)]
        y2: String,
        /// Lower coordinate bounds, e.g. [0,"-inf"].
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        /// Upper coordinate bounds, e.g. ["inf",40].
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value_t = 64)]
        max_index: usize,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// Three-regime comparison of two leading operators.
    Case1 {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ops-a")]
        ops_a: PathBuf,
        #[arg(long = "ops-b")]
        ops_b: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y1: String,
        #[arg(long, allow_hyphen_values = true)]
        y2: String,
        #[command(flatten)]
        sub: SubArgs,
    },
    /// Construct a pinning definition for one parameter instance.
    Catchall {
        /// Order atom θ(x;y) as a formula file.
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        /// Integer multiplier E in E·x.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        e: String,
        /// Function symbol: "id" or "const:<value>".
        #[arg(long, default_value = "id")]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// Parameter set file: list of [b, [a…]] pairs.
        #[arg(long = "S")]
        s: PathBuf,
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
        window: Vec<i64>,
        #[arg(long, default_value_t = 64)]
        max_lambda: usize,
        #[command(flatten)]
        sub: SubArgs,
    },
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long)]
    phi: PathBuf,
    #[arg(long = "B")]
    pool: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    window: Vec<i64>,
    /// Verified system supplying per-cell witnesses.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Also write the decomposition JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit CSV (size,cells) for these window sizes instead of JSON.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<usize>>,
}

/// Reproducibility record emitted by --manifest.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// Full argument vector, minus the binary name and the --manifest flag.
    pub command: Vec<String>,
    pub horizon: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jobs: Option<usize>,
    /// sha256 hex digest per input file, path-sorted.
    pub inputs: BTreeMap<String, String>,
    /// Gap and shift certificates established during the run.
    pub certificates: Vec<Json>,
}

/// Per-run state: input digests and certificates for the manifest.
struct Rig {
    horizon: usize,
    inputs: BTreeMap<String, String>,
    certs: Vec<Json>,
}

impl Rig {
    fn new(horizon: usize) -> Rig {
        Rig {
            horizon,
            inputs: BTreeMap::new(),
            certs: Vec::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::BadInput(format!("cannot read {}: {e}", path.display())))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        self.inputs.insert(path.display().to_string(), digest);
        String::from_utf8(bytes)
            .map_err(|_| Error::BadInput(format!("{} is not UTF-8", path.display())))
    }

    fn cert(&mut self, value: Json) {
        self.certs.push(value);
    }

    /// Record the ordering certificate a tuple-space call established.
    fn record_space_cert(&mut self, ts: &TupleSpace, ops: &OperatorTuple) {
        if let Some(rec) = ts.cached_cert(ops) {
            let signs: Vec<Json> = rec
                .signs
                .iter()
                .map(|s| json!({"sign": sign_str(s.sign), "mode": cert_json(s.cert)}))
                .collect();
            self.cert(json!({
                "kind": "order",
                "arity": ts.arity(),
                "delta": ts.delta(),
                "tier": rec.tier,
                "cap": rec.cap,
                "signs": signs,
            }));
        }
    }
}

struct CmdOut {
    lines: Vec<String>,
    violation: bool,
}

impl CmdOut {
    fn one(value: Json) -> CmdOut {
        CmdOut {
            lines: vec![value.to_string()],
            violation: false,
        }
    }
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Positive => "positive",
        Sign::Negative => "negative",
        Sign::Zero => "zero",
    }
}

fn cert_json(c: Cert) -> Json {
    match c {
        Cert::Exact => json!("exact"),
        Cert::Heuristic { horizon } => json!({"heuristic": {"horizon": horizon}}),
    }
}

fn cert_mode_fields(c: Cert) -> (String, Option<usize>) {
    match c {
        Cert::Exact => ("exact".into(), None),
        Cert::Heuristic { horizon } => ("heuristic".into(), Some(horizon)),
    }
}

fn parse_big(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::BadInput(format!("cannot parse integer {s:?}")))
}

fn json_big(v: &Json) -> Result<BigInt> {
    match v {
        Json::Number(n) => parse_big(&n.to_string()),
        Json::String(s) => parse_big(s),
        other => Err(Error::BadInput(format!("expected an integer, got {other}"))),
    }
}

fn parse_big_list(src: &str) -> Result<Vec<BigInt>> {
    let v: Json = serde_json::from_str(src)
        .map_err(|e| Error::BadInput(format!("cannot parse integer list {src:?}: {e}")))?;
    match v {
        Json::Array(items) => items.iter().map(json_big).collect(),
        other => Err(Error::BadInput(format!("expected a JSON array, got {other}"))),
    }
}

fn big_strs(xs: &[BigInt]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn load_pred(rig: &mut Rig, path: &Path) -> Result<Arc<Predicate>> {
    let text = rig.read(path)?;
    let file: PredicateFile = serde_json::from_str(&text)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    file.build()
}

fn load_sub(rig: &mut Rig, path: &Path, sub: &SubArgs) -> Result<SubPredicate> {
    let base = load_pred(rig, path)?;
    SubPredicate::new(base, sub.start, sub.step)
}

/// Operator files: {"ops":[[a0,…],…]} or {"coeffs":[a0,…]} for a single one.
fn load_ops(rig: &mut Rig, path: &Path) -> Result<OperatorTuple> {
    let text = rig.read(path)?;
    let v: Json = serde_json::from_str(&text)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    let lists: Vec<Vec<BigInt>> = if let Some(ops) = v.get("ops") {
        match ops {
            Json::Array(items) => items
                .iter()
                .map(|row| match row {
                    Json::Array(cs) => cs.iter().map(json_big).collect(),
                    other => Err(Error::BadInput(format!(
                        "each operator is a coefficient list, got {other}"
                    ))),
                })
                .collect::<Result<_>>()?,
            other => {
                return Err(Error::BadInput(format!(
                    "\"ops\" must be a list of coefficient lists, got {other}"
                )))
            }
        }
    } else if let Some(coeffs) = v.get("coeffs") {
        match coeffs {
            Json::Array(cs) => vec![cs.iter().map(json_big).collect::<Result<_>>()?],
            other => {
                return Err(Error::BadInput(format!(
                    "\"coeffs\" must be a coefficient list, got {other}"
                )))
            }
        }
    } else {
        return Err(Error::BadInput(format!(
            "{} has neither \"ops\" nor \"coeffs\"",
            path.display()
        )));
    };
    OperatorTuple::new(lists.into_iter().map(Operator::new).collect())
}

/// Formula files: JSON {"formula":…, "param_len":…} when the text opens
/// with '{'; otherwise an s-expression with the parameter count inferred
/// from the largest y-index present.
fn load_param_formula(rig: &mut Rig, path: &Path) -> Result<ParamFormula> {
    let text = rig.read(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let pf: ParamFormula = serde_json::from_str(&text)
            .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
        ParamFormula::new(pf.formula, pf.param_len)
    } else {
        let formula = sexpr::parse_formula(&text)?;
        let mut vars = std::collections::BTreeSet::new();
        formula.free_vars(&mut vars);
        let param_len = vars
            .iter()
            .filter_map(|v| v.strip_prefix('y').and_then(|i| i.parse::<usize>().ok()))
            .max()
            .unwrap_or(0);
        ParamFormula::new(formula, param_len)
    }
}

fn load_system(rig: &mut Rig, path: &Path) -> Result<System> {
    let text = rig.read(path)?;
    let sys: System = serde_json::from_str(&text)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    System::new(sys.candidates, sys.provenance)
}

/// Parameter pools: a JSON list of rows; scalar rows are wrapped.
fn load_rows(rig: &mut Rig, path: &Path) -> Result<Vec<Vec<BigInt>>> {
    let text = rig.read(path)?;
    let v: Json = serde_json::from_str(&text)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    let items = match v {
        Json::Array(items) => items,
        other => {
            return Err(Error::BadInput(format!(
                "expected a JSON list of parameter rows, got {other}"
            )))
        }
    };
    items
        .iter()
        .map(|row| match row {
            Json::Array(cs) => cs.iter().map(json_big).collect(),
            scalar => Ok(vec![json_big(scalar)?]),
        })
        .collect()
}

/// S-sets for the pivot construction: a JSON list of [b, [a…]] pairs
/// (a scalar second component is wrapped).
fn load_s_set(rig: &mut Rig, path: &Path) -> Result<Vec<(BigInt, Vec<BigInt>)>> {
    let text = rig.read(path)?;
    let v: Json = serde_json::from_str(&text)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    let items = match v {
        Json::Array(items) => items,
        other => {
            return Err(Error::BadInput(format!(
                "expected a JSON list of [b, [a…]] pairs, got {other}"
            )))
        }
    };
    items
        .iter()
        .map(|pair| match pair {
            Json::Array(parts) if parts.len() == 2 => {
                let b = json_big(&parts[0])?;
                let a = match &parts[1] {
                    Json::Array(cs) => cs.iter().map(json_big).collect::<Result<_>>()?,
                    scalar => vec![json_big(scalar)?],
                };
                Ok((b, a))
            }
            other => Err(Error::BadInput(format!(
                "expected a [b, [a…]] pair, got {other}"
            ))),
        })
        .collect()
}

/// Extended-value vectors for witness bounds: integers plus "inf"/"-inf".
fn parse_value_list(src: &str) -> Result<Vec<crate::formula::Value>> {
    use crate::formula::Value;
    let v: Json = serde_json::from_str(src)
        .map_err(|e| Error::BadInput(format!("cannot parse bound list {src:?}: {e}")))?;
    let items = match v {
        Json::Array(items) => items,
        other => return Err(Error::BadInput(format!("expected a JSON array, got {other}"))),
    };
    items
        .iter()
        .map(|item| match item {
            Json::String(s) if matches!(s.as_str(), "inf" | "+inf" | "pos_inf") => {
                Ok(Value::PosInf)
            }
            Json::String(s) if matches!(s.as_str(), "-inf" | "neg_inf") => Ok(Value::NegInf),
            other => Ok(Value::Int(json_big(other)?)),
        })
        .collect()
}

fn write_output_file(path: &Path, bytes: &str) -> Result<()> {
    std::fs::write(path, bytes)
        .map_err(|e| Error::BadInput(format!("cannot write {}: {e}", path.display())))
}

fn pq_json(r: &crate::tuplespace::PQResult) -> Json {
    json!({
        "z": big_strs(&r.tuple),
        "indices": r.indices,
        "value": r.value.to_string(),
        "boundary": r.boundary,
    })
}

fn window_pair(w: &[i64]) -> (i64, i64) {
    (w[0], w[1])
}

/// Substitute x ↦ x − y₁ and shift every parameter index up by one:
/// θ(x;y) becomes θ′(x;w,y) = θ(x−w;y).
fn shifted_theta(theta: &ParamFormula) -> Result<ParamFormula> {
    let mut f = theta.formula.clone();
    for j in (1..=theta.param_len).rev() {
        f = f.subst(&format!("y{j}"), &Term::var(format!("y{}", j + 1)));
    }
    f = f.subst("x", &Term::var("x").sub(Term::var("y1")));
    ParamFormula::new(f, theta.param_len + 1)
}

/// Register the function symbol named by --f and return its name.
fn register_f(ctx: &EvalContext, spec: &str) -> Result<String> {
    if spec == "id" {
        ctx.register_term_fn("id", "t", Term::var("t"));
        return Ok("id".into());
    }
    if let Some(v) = spec.strip_prefix("const:") {
        let c = parse_big(v)?;
        ctx.register_term_fn(spec, "t", Term::big(c));
        return Ok(spec.into());
    }
    Err(Error::BadInput(format!(
        "unknown function spec {spec:?}; use \"id\" or \"const:<value>\""
    )))
}

/// Print one line to stdout, ignoring a closed pipe (e.g. `… | head`).
fn emit(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn err_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    let name: String = dbg
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect();
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Entry point used by the binary and by the golden tests. `args` excludes
/// the program name. Returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let mut argv = vec!["distal".to_string()];
    argv.extend_from_slice(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = {
                    use std::io::Write;
                    write!(std::io::stdout().lock(), "{e}")
                };
                return 0;
            }
            emit(&json!({"error": e.to_string(), "kind": "usage"}).to_string());
            return 2;
        }
    };
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    if let Cmd::Replay { path } = &cli.cmd {
        return replay(path);
    }
    let mut rig = Rig::new(cli.horizon);
    match dispatch(&cli, &mut rig) {
        Ok(out) => {
            for line in &out.lines {
                emit(line);
            }
            if let Some(path) = &cli.manifest {
                let manifest = RunManifest {
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    command: strip_manifest_flag(args),
                    horizon: cli.horizon,
                    seed: cli.seed,
                    jobs: cli.jobs,
                    inputs: rig.inputs.clone(),
                    certificates: rig.certs.clone(),
                };
                let text = match serde_json::to_string_pretty(&manifest) {
                    Ok(t) => t,
                    Err(e) => {
                        emit(&json!({"error": e.to_string(), "kind": "json"}).to_string());
                        return 2;
                    }
                };
                if let Err(e) = std::fs::write(path, text + "\n") {
                    emit(&json!({"error": e.to_string(), "kind": "io"}).to_string());
                    return 2;
                }
            }
            if out.violation {
                1
            } else {
                0
            }
        }
        Err(e) => {
            emit(&json!({"error": e.to_string(), "kind": err_kind(&e)}).to_string());
            2
        }
    }
}

fn strip_manifest_flag(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--manifest" {
            skip = true;
            continue;
        }
        if a.starts_with("--manifest=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn replay(path: &Path) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            emit(&json!({"error": format!("cannot read {}: {e}", path.display()), "kind": "io"}).to_string());
            return 2;
        }
    };
    let manifest: RunManifest = match serde_json::from_str(&text) {
        Ok(m) => m,
        Err(e) => {
            emit(&json!({"error": format!("{}: {e}", path.display()), "kind": "bad_input"}).to_string());
            return 2;
        }
    };
    for (input, digest) in &manifest.inputs {
        match std::fs::read(input) {
            Ok(bytes) => {
                let now = hex::encode(Sha256::digest(&bytes));
                if now != *digest {
                    emit(
                        &json!({"error": format!("input {input} changed since the manifest was written"),
                               "kind": "digest_mismatch"})
                        .to_string(),
                    );
                    return 2;
                }
            }
            Err(e) => {
                emit(&json!({"error": format!("cannot read {input}: {e}"), "kind": "io"}).to_string());
                return 2;
            }
        }
    }
    run(&manifest.command)
}

fn dispatch(cli: &Cli, rig: &mut Rig) -> Result<CmdOut> {
    match &cli.cmd {
        Cmd::Pred { cmd } => pred_cmd(cmd, rig),
        Cmd::Op { cmd } => op_cmd(cmd, rig),
        Cmd::Tuple { cmd } => tuple_cmd(cmd, rig),
        Cmd::Pdelta(args) => pdelta_cmd(args, rig),
        Cmd::Shd { cmd } => shd_cmd(cmd, rig),
        Cmd::Decompose(args) => decompose_cmd(args, rig),
        Cmd::Replay { .. } => unreachable!("replay is handled before dispatch"),
    }
}

fn pred_cmd(cmd: &PredCmd, rig: &mut Rig) -> Result<CmdOut> {
    match cmd {
        PredCmd::Nth { pred, index } => {
            let p = load_pred(rig, pred)?;
            Ok(CmdOut::one(json!({
                "index": index,
                "value": p.nth(*index)?.to_string(),
            })))
        }
        PredCmd::Successor { pred, x, k } => {
            let p = load_pred(rig, pred)?;
            let x = parse_big(x)?;
            Ok(CmdOut::one(json!({
                "x": x.to_string(),
                "k": k,
                "value": p.successor(&x, *k)?.to_string(),
            })))
        }
        PredCmd::Period { pred, modulus } => {
            let p = load_pred(rig, pred)?;
            let m = parse_big(modulus)?;
            let (preperiod, period) = p.congruence_period(&m, rig.horizon)?;
            Ok(CmdOut::one(json!({
                "modulus": m.to_string(),
                "preperiod": preperiod,
                "period": period,
            })))
        }
        PredCmd::Regular { pred } => {
            let p = load_pred(rig, pred)?;
            let report = p.check_regular_window(rig.horizon)?;
            let verdict = match &report.verdict {
                RegularVerdict::Consistent => json!({"verdict": "consistent"}),
                RegularVerdict::Refuted { index, residual } => json!({
                    "verdict": "refuted",
                    "index": index,
                    "residual": residual.to_string(),
                }),
                RegularVerdict::Inconclusive => json!({"verdict": "inconclusive"}),
            };
            let mut out = verdict;
            out["ratios_checked"] = json!(report.ratios.len());
            Ok(CmdOut::one(out))
        }
    }
}

fn op_cmd(cmd: &OpCmd, rig: &mut Rig) -> Result<CmdOut> {
    let full = |rig: &mut Rig, pred: &Path| -> Result<SubPredicate> {
        Ok(SubPredicate::full(load_pred(rig, pred)?))
    };
    match cmd {
        OpCmd::Apply { pred, coeffs, x } => {
            let sub = full(rig, pred)?;
            let op = Operator::new(parse_big_list(coeffs)?);
            let x = parse_big(x)?;
            Ok(CmdOut::one(json!({
                "coeffs": big_strs(op.coeffs()),
                "x": x.to_string(),
                "value": op.apply(&sub, &x)?.to_string(),
            })))
        }
        OpCmd::Sign { pred, coeffs } => {
            let sub = full(rig, pred)?;
            let op = Operator::new(parse_big_list(coeffs)?);
            let class = op.sign_classify(&sub, rig.horizon)?;
            let (mode, h) = cert_mode_fields(class.cert);
            let mut out = json!({"sign": sign_str(class.sign), "mode": mode});
            if let Some(h) = h {
                out["window"] = json!(h);
            }
            Ok(CmdOut::one(out))
        }
        OpCmd::S2 { pred, coeffs, max } => {
            let sub = full(rig, pred)?;
            let op = Operator::new(parse_big_list(coeffs)?);
            let w = crate::operator::s2_witness(&op, &sub, rig.horizon, *max)?;
            let (mode, h) = cert_mode_fields(w.cert);
            rig.cert(json!({"kind": "s2", "value": w.value, "mode": mode}));
            let mut out = json!({"value": w.value, "mode": mode});
            if let Some(h) = h {
                out["window"] = json!(h);
            }
            Ok(CmdOut::one(out))
        }
        OpCmd::Beats { pred, a, b, max } => {
            let sub = full(rig, pred)?;
            let a = Operator::new(parse_big_list(a)?);
            let b = Operator::new(parse_big_list(b)?);
            let w = crate::operator::beats_witness(&a, &b, &sub, rig.horizon, *max)?;
            let (mode, h) = cert_mode_fields(w.cert);
            rig.cert(json!({"kind": "beats", "value": w.value, "mode": mode}));
            let mut out = json!({"value": w.value, "mode": mode});
            if let Some(h) = h {
                out["window"] = json!(h);
            }
            Ok(CmdOut::one(out))
        }
        OpCmd::Lambda { pred, a1, max } => {
            let sub = full(rig, pred)?;
            let a1 = Operator::new(parse_big_list(a1)?);
            let w = crate::operator::innocuous_lambda(&a1, &sub, rig.horizon, *max)?;
            let (mode, h) = cert_mode_fields(w.cert);
            rig.cert(json!({"kind": "lambda", "value": w.value, "mode": mode}));
            let mut out = json!({"value": w.value, "mode": mode});
            if let Some(h) = h {
                out["window"] = json!(h);
            }
            Ok(CmdOut::one(out))
        }
    }
}

fn tuple_cmd(cmd: &TupleCmd, rig: &mut Rig) -> Result<CmdOut> {
    match cmd {
        TupleCmd::Contains {
            pred,
            n,
            delta,
            z,
            sub,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ts = TupleSpace::new(sp, *n, *delta)?;
            let tuple = parse_big_list(z)?;
            Ok(CmdOut::one(json!({
                "z": big_strs(&tuple),
                "contains": ts.contains(&tuple)?,
            })))
        }
        TupleCmd::Delta {
            pred,
            ops,
            max,
            sub,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ops = load_ops(rig, ops)?;
            let w = sufficient_delta(&sp, &ops, rig.horizon, *max)?;
            rig.cert(json!({"kind": "delta", "delta": w.delta, "tier": w.tier}));
            Ok(CmdOut::one(serde_json::to_value(w)?))
        }
        TupleCmd::Extreme {
            pred,
            ops,
            delta,
            maximize,
            bounds,
            sub,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ops = load_ops(rig, ops)?;
            let ts = TupleSpace::new(sp, ops.arity(), *delta)?;
            let rec = ts.ensure_cert(&ops, rig.horizon)?;
            let bounds = match bounds {
                Some(src) => serde_json::from_str::<Vec<(Option<usize>, Option<usize>)>>(src)
                    .map_err(|e| Error::BadInput(format!("cannot parse bounds {src:?}: {e}")))?,
                None => ts.free_box(),
            };
            let ext = ts.extreme(&ops, &rec.signs, *maximize, &bounds)?;
            rig.record_space_cert(&ts, &ops);
            let out = match ext {
                Extremum::Tuple { indices, value } => {
                    let z = ts.values(&indices)?;
                    json!({"kind": "tuple", "indices": indices, "z": big_strs(&z),
                           "value": value.to_string()})
                }
                Extremum::Unbounded => json!({"kind": "unbounded"}),
                Extremum::Infeasible => json!({"kind": "infeasible"}),
            };
            Ok(CmdOut::one(out))
        }
        TupleCmd::Enumerate {
            pred,
            ops,
            delta,
            count,
            sub,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ops = load_ops(rig, ops)?;
            let ts = TupleSpace::new(sp, ops.arity(), *delta)?;
            let rec = ts.ensure_cert(&ops, rig.horizon)?;
            let members = ts.enumerate_in_order(&ops, &rec.signs, *count)?;
            rig.record_space_cert(&ts, &ops);
            let mut lines = Vec::new();
            for (indices, value) in members {
                let z = ts.values(&indices)?;
                lines.push(
                    json!({"z": big_strs(&z), "value": value.to_string()}).to_string(),
                );
            }
            Ok(CmdOut {
                lines,
                violation: false,
            })
        }
    }
}

fn pdelta_cmd(args: &PdeltaArgs, rig: &mut Rig) -> Result<CmdOut> {
    let sp = load_sub(rig, &args.pred, &args.sub)?;
    let ops = load_ops(rig, &args.ops)?;
    if ops.arity() != args.n {
        return Err(Error::ArityMismatch {
            expected: args.n,
            got: ops.arity(),
        });
    }
    let ts = TupleSpace::new(sp, args.n, args.delta)?;
    let x = parse_big(&args.x)?;
    let p = p_delta(&ts, &ops, &x, rig.horizon)?;
    let q = q_delta(&ts, &ops, &x, rig.horizon)?;
    rig.record_space_cert(&ts, &ops);
    Ok(CmdOut::one(json!({
        "x": x.to_string(),
        "P": pq_json(&p),
        "Q": pq_json(&q),
    })))
}

fn shd_cmd(cmd: &ShdCmd, rig: &mut Rig) -> Result<CmdOut> {
    match cmd {
        ShdCmd::Order { phi, out } => {
            let pf = load_param_formula(rig, phi)?;
            let system = order_shd(&pf)?;
            let text = serde_json::to_string(&system)?;
            if let Some(path) = out {
                write_output_file(path, &text)?;
            }
            Ok(CmdOut {
                lines: vec![text],
                violation: false,
            })
        }
        ShdCmd::Firstcoord {
            pred,
            ops,
            n,
            delta,
            sub,
            out,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ops = load_ops(rig, ops)?;
            if ops.arity() != *n {
                return Err(Error::ArityMismatch {
                    expected: *n,
                    got: ops.arity(),
                });
            }
            let ctx = EvalContext::new(sp, rig.horizon);
            let space = SpaceSpec::new(sub.start, sub.step, *n, *delta);
            let (phi, system) = firstcoord_shd(&ctx, &ops, &space)?;
            if let Some(ts) = ctx.space(&space).ok() {
                rig.record_space_cert(&ts, &ops);
            }
            let value = json!({"phi": phi, "system": system});
            let text = value.to_string();
            if let Some(path) = out {
                write_output_file(path, &text)?;
            }
            Ok(CmdOut {
                lines: vec![text],
                violation: false,
            })
        }
        ShdCmd::Verify {
            phi,
            system,
            pool,
            pred,
            wa,
            wa2,
            sub,
        } => {
            let pf = load_param_formula(rig, phi)?;
            let system = load_system(rig, system)?;
            let rows = load_rows(rig, pool)?;
            let sp = load_sub(rig, pred, sub)?;
            let ctx = EvalContext::new(sp, rig.horizon);
            ctx.register_term_fn("id", "t", Term::var("t"));
            let wa = window_pair(wa);
            let wa2 = wa2.as_ref().map(|w| window_pair(w)).unwrap_or(wa);
            let report = verify_shd(&ctx, &pf, &system, &rows, wa, wa2)?;
            let violation = !report.pass;
            Ok(CmdOut {
                lines: vec![serde_json::to_string(&report)?],
                violation,
            })
        }
        ShdCmd::Select {
            phi,
            system,
            pool,
            pred,
            point,
            window,
            sub,
        } => {
            let pf = load_param_formula(rig, phi)?;
            let system = load_system(rig, system)?;
            let rows = load_rows(rig, pool)?;
            let sp = load_sub(rig, pred, sub)?;
            let ctx = EvalContext::new(sp, rig.horizon);
            ctx.register_term_fn("id", "t", Term::var("t"));
            let point = parse_big(point)?;
            let sel = select_shd(&ctx, &pf, &system, &rows, &point, window_pair(window))?;
            Ok(CmdOut::one(serde_json::to_value(&sel)?))
        }
        ShdCmd::Combine { system, out } => {
            let system = load_system(rig, system)?;
            let combined = combine_system(&system)?;
            let text = serde_json::to_string(&combined)?;
            if let Some(path) = out {
                write_output_file(path, &text)?;
            }
            Ok(CmdOut {
                lines: vec![text],
                violation: false,
            })
        }
        ShdCmd::Canonical {
            pred,
            ops_a,
            ops_b,
            n,
            delta,
            x,
            y1,
            y2,
            u,
            v,
            max_index,
            sub,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ops_a = load_ops(rig, ops_a)?;
            let ops_b = load_ops(rig, ops_b)?;
            let ts = TupleSpace::new(sp, *n, *delta)?;
            let outcome = canonical_witness(
                &ts,
                &ops_a,
                &ops_b,
                &parse_big(x)?,
                &parse_big(y1)?,
                &parse_big(y2)?,
                &parse_value_list(u)?,
                &parse_value_list(v)?,
                rig.horizon,
                *max_index,
            )?;
            rig.record_space_cert(&ts, &ops_a);
            Ok(CmdOut::one(serde_json::to_value(&outcome)?))
        }
        ShdCmd::Case1 {
            pred,
            ops_a,
            ops_b,
            n,
            delta,
            x,
            y1,
            y2,
            sub,
        } => {
            let sp = load_sub(rig, pred, sub)?;
            let ops_a = load_ops(rig, ops_a)?;
            let ops_b = load_ops(rig, ops_b)?;
            let ts = TupleSpace::new(sp, *n, *delta)?;
            let report = case1_regime(
                &ts,
                &ops_a,
                &ops_b,
                &parse_big(x)?,
                &parse_big(y1)?,
                &parse_big(y2)?,
                rig.horizon,
            )?;
            rig.record_space_cert(&ts, &ops_a);
            let violation = !report.consistent;
            Ok(CmdOut {
                lines: vec![serde_json::to_string(&report)?],
                violation,
            })
        }
        ShdCmd::Catchall {
            theta,
            pred,
            ops,
            n,
            delta,
            e,
            f,
            x0,
            s,
            window,
            max_lambda,
            sub,
        } => {
            let theta_phi = load_param_formula(rig, theta)?;
            let theta_sys = order_shd(&theta_phi)?;
            let theta2_phi = shifted_theta(&theta_phi)?;
            let theta2_sys = order_shd(&theta2_phi)?;
            let sp = load_sub(rig, pred, sub)?;
            let ops = load_ops(rig, ops)?;
            if ops.arity() != *n {
                return Err(Error::ArityMismatch {
                    expected: *n,
                    got: ops.arity(),
                });
            }
            let ctx = EvalContext::new(sp, rig.horizon);
            let f_name = register_f(&ctx, f)?;
            let space = SpaceSpec::new(sub.start, sub.step, *n, *delta);
            let input = CatchallInput {
                theta_phi: &theta_phi,
                theta_sys: &theta_sys,
                theta2_phi: &theta2_phi,
                theta2_sys: &theta2_sys,
                e_mult: parse_big(e)?,
                ops: &ops,
                space: &space,
                f_name: &f_name,
                max_lambda: *max_lambda,
                window: window_pair(window),
            };
            let witness = catchall_construct(&ctx, &input, &parse_big(x0)?, &load_s_set(rig, s)?)?;
            rig.cert(json!({"kind": "lambda", "value": witness.lambda, "mode": "window"}));
            if let Ok(ts) = ctx.space(&space) {
                rig.record_space_cert(&ts, &ops);
            }
            Ok(CmdOut::one(serde_json::to_value(&witness)?))
        }
    }
}

fn decompose_cmd(args: &DecomposeArgs, rig: &mut Rig) -> Result<CmdOut> {
    let pf = load_param_formula(rig, &args.phi)?;
    let rows = load_rows(rig, &args.pool)?;
    let sp = load_sub(rig, &args.pred, &SubArgs { start: 0, step: 1 })?;
    let ctx = EvalContext::new(sp, rig.horizon);
    ctx.register_term_fn("id", "t", Term::var("t"));
    let window = window_pair(&args.window);
    let system = match &args.system {
        Some(path) => Some(load_system(rig, path)?),
        None => None,
    };
    let full = match &system {
        Some(sys) => decompose_with_system(&ctx, &pf, sys, &rows, window)?,
        None => decompose(&ctx, &pf, &rows, window)?,
    };
    let text = serde_json::to_string(&full)?;
    if let Some(path) = &args.out {
        write_output_file(path, &text)?;
    }
    if let Some(sizes) = &args.sweep {
        let mut lines = vec!["size,cells".to_string()];
        for &size in sizes {
            if size == 0 {
                return Err(Error::BadInput("sweep sizes must be positive".into()));
            }
            let hi = window.0 + (size as i64 - 1);
            if hi > window.1 {
                return Err(Error::BadInput(format!(
                    "sweep size {size} exceeds the window {window:?}"
                )));
            }
            let dec = decompose(&ctx, &pf, &rows, (window.0, hi))?;
            lines.push(format!("{size},{}", dec.cell_count()));
        }
        return Ok(CmdOut {
            lines,
            violation: false,
        });
    }
    Ok(CmdOut {
        lines: vec![text],
        violation: false,
    })
}
