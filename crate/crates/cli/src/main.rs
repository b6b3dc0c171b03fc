use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nusec_core::acceptance::{determinism, run_criterion, CriterionResult, CRITERIA, DEFAULT_SEED};
use nusec_core::distributions::{
    gaussian_vectors, random_multiset, reed_solomon_distribution, rip_projection_distribution, two_point_reverse,
    uniform, PermDistribution,
};
use nusec_core::hardness::{
    alg_c1, alg_c2, alg_e, c1_distribution, c2_distribution, combined_mixture, encrypted_distribution,
    half_unique_radius, high_probe_ordering, is_decodable, low_probe_ordering, search_code, top_two_swapped,
    BinaryCode, HardFunction, DEFAULT_KAPPA,
};
use nusec_core::lower_bounds::{entropy_lb_experiment, semitone_minimax_range};
use nusec_core::matching_ext::{korula_pal, kp_experiment, max_weight_matching, BipartiteInstance};
use nusec_core::perm_core::{Permutation, ValueOrdering};
use nusec_core::properties::{check_bip_exact, check_uiop_exact, check_uiop_mc, support_cover};
use nusec_core::report::{canonicalize, to_canonical_string};
use nusec_core::rng::{derive_seed, run_trials, seeded, SimRng};
use nusec_core::secretary_algs::{
    classic_threshold_policy, competitive_ratio, multi_choice_policy, pcs, random_threshold_policy,
    DEFAULT_ALPHA,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Secretary problems under non-uniform arrival orders.
///
/// Every command is deterministic given its arguments and seed. JSON output
/// embeds the resolved configuration; CSV output has the two columns
/// `key,value`, one row per leaf of the JSON result (nested keys joined by '.').
#[derive(Parser, Debug)]
#[command(name = "nusec", version)]
struct Cli {
    /// Base seed; required by every command except `reproduce`.
    #[arg(long, env = "NUSEC_SEED", global = true)]
    seed: Option<u64>,
    /// Worker threads for trial loops (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Json,
    Csv,
    /// Distribution text format (`construct` with an explicit support only).
    Text,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Build a permutation distribution and describe or export it.
    Construct(ConstructArgs),
    /// Audit ordering or block-independence properties of a distribution.
    Check(CheckArgs),
    /// Estimate success probability or competitive ratio of a policy.
    Simulate(SimulateArgs),
    /// Entropy lower-bound experiment and adversary minimax table.
    Lowerbound(LowerboundArgs),
    /// Policies on the hardness constructions.
    Hardness(HardnessArgs),
    /// Korula-Pál online matching experiments.
    Matching(MatchingArgs),
    /// Run the acceptance suite and print a pass/fail table.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DistKind {
    Uniform,
    TwoPointReverse,
    Multiset,
    ReedSolomon,
    Rip,
    C1,
    C2,
    /// Explicit support read from `--input`.
    File,
}

#[derive(Args, Debug, Serialize)]
struct DistArgs {
    #[arg(long, value_enum, default_value_t = DistKind::Uniform)]
    dist: DistKind,
    /// Number of items.
    #[arg(long)]
    n: Option<usize>,
    /// Tuple size for `multiset`.
    #[arg(long, default_value_t = 3)]
    dist_k: usize,
    /// Target parameter for `multiset`.
    #[arg(long, default_value_t = 0.5)]
    dist_delta: f64,
    /// Hash levels for `reed-solomon`.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Ambient dimension for `rip`.
    #[arg(long, default_value_t = 200)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// Distribution text file for `--dist file`.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Number of sampled permutations to include.
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Args, Debug, Serialize)]
struct CheckArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Check the ordering property for tuples of this size.
    #[arg(long)]
    uiop_k: Option<usize>,
    /// Check block independence for this many items (needs `--bip-q`).
    #[arg(long, requires = "bip_q")]
    bip_p: Option<usize>,
    #[arg(long, requires = "bip_p")]
    bip_q: Option<usize>,
    /// Top-k mass against the entropy bound.
    #[arg(long)]
    cover_k: Option<usize>,
    /// Exact check over the explicit support (default); otherwise sampled.
    #[arg(long)]
    exact: bool,
    /// Sampled check: draws per tuple.
    #[arg(long)]
    trials: Option<u64>,
    /// Sampled check: number of random tuples.
    #[arg(long, default_value_t = 200)]
    tuples: usize,
    /// Exit with status 1 if the measured parameter exceeds this.
    #[arg(long)]
    expect_delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PolicyKind {
    Classic,
    RandomThreshold,
    MultiChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Values {
    /// Item 1 is best.
    Identity,
    /// Item n is best.
    Increasing,
    /// A seeded random ordering.
    Random,
    /// Item n-1 best, then item n, then decreasing index.
    TopTwoSwapped,
    /// Item n best, then items (n/4, 3n/8].
    LowProbe,
    /// Item n best, then items (3n/8, n/2].
    HighProbe,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, value_enum, default_value_t = PolicyKind::Classic)]
    policy: PolicyKind,
    #[arg(long, value_enum, default_value_t = Values::Identity)]
    values: Values,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Selections allowed for `multi-choice`.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Blocks for `multi-choice`.
    #[arg(long, default_value_t = 100)]
    q: usize,
}

#[derive(Args, Debug, Serialize)]
struct LowerboundArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Number of permutations in the support.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Trials for the policy estimate when n is too large for the exact oracle.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Also tabulate the adversary minimax over all semitone sequences of length 2..=s.
    #[arg(long)]
    minimax_s: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Construction {
    C1,
    C2,
    Encrypted,
    Combined,
}

#[derive(Args, Debug, Serialize)]
struct HardnessArgs {
    #[arg(long, value_enum)]
    construction: Construction,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// Message bits of the encrypting construction.
    #[arg(long, default_value_t = 6)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Values::HighProbe)]
    values: Values,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Code file (`m L` header then one bit string per message).
    #[arg(long)]
    code: Option<PathBuf>,
    /// Search this many random codes for half-unique radius ceil(m/10).
    #[arg(long)]
    code_search: Option<usize>,
    /// Save the code used.
    #[arg(long)]
    write_code: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MatchingArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Weight matrix file; runs uniform arrivals on it instead of the adversarial construction.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Acceptance,
}

#[derive(Args, Debug, Serialize)]
struct ReproduceArgs {
    #[arg(long, value_enum, default_value_t = Suite::Acceptance)]
    suite: Suite,
    /// Criteria to run (default: all).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<usize>,
    /// Directory for one JSON result file per criterion.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Assertion(String),
}

impl From<nusec_core::Error> for Failure {
    fn from(e: nusec_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn need_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| usage("--seed (or NUSEC_SEED) is required"))
}

fn need_n(a: &DistArgs) -> CliResult<usize> {
    a.n.ok_or_else(|| usage("--n is required for this distribution"))
}

fn build_dist(a: &DistArgs, seed: u64) -> CliResult<PermDistribution> {
    Ok(match a.dist {
        DistKind::Uniform => uniform(need_n(a)?),
        DistKind::TwoPointReverse => two_point_reverse(need_n(a)?),
        DistKind::Multiset => random_multiset(need_n(a)?, a.dist_k, a.dist_delta, derive_seed(seed, 1))?,
        DistKind::ReedSolomon => reed_solomon_distribution(need_n(a)?, a.levels)?.0,
        DistKind::Rip => rip_projection_distribution(&gaussian_vectors(a.dim, need_n(a)?, derive_seed(seed, 2))?),
        DistKind::C1 => c1_distribution(need_n(a)?)?,
        DistKind::C2 => c2_distribution(need_n(a)?, a.kappa)?,
        DistKind::File => {
            let path = a.input.as_ref().ok_or_else(|| usage("--dist file needs --input"))?;
            let dist = PermDistribution::from_text(&fs::read_to_string(path)?)?;
            if let Some(n) = a.n.filter(|&n| n != dist.n()) {
                return Err(usage(format!("--n {n} does not match the file's n = {}", dist.n())));
            }
            dist
        }
    })
}

fn value_ordering(v: Values, n: usize, seed: u64) -> ValueOrdering {
    match v {
        Values::Identity => ValueOrdering::identity(n),
        Values::Increasing => ValueOrdering::increasing(n),
        Values::Random => ValueOrdering::random(n, &mut seeded(derive_seed(seed, 3))),
        Values::TopTwoSwapped => top_two_swapped(n),
        Values::LowProbe => low_probe_ordering(n),
        Values::HighProbe => high_probe_ordering(n),
    }
}

fn construct(a: &ConstructArgs, seed: u64, format: Format) -> CliResult<Output> {
    let dist = build_dist(&a.dist, seed)?;
    if format == Format::Text {
        return Ok(Output::Raw(dist.to_text()?));
    }
    let samples: Vec<String> =
        (0..a.samples as u64).map(|t| dist.sample_seeded(derive_seed(seed, 1000 + t)).to_line()).collect();
    let support = dist.support();
    Ok(Output::Result(json!({
        "kind": dist.kind(),
        "n": dist.n(),
        "support_size": support.map(|s| s.len()),
        "entropy_bits": support.map(|s| s.merged().entropy_bits()),
        "samples": samples,
    })))
}

fn check(a: &CheckArgs, seed: u64) -> CliResult<Output> {
    let dist = build_dist(&a.dist, seed)?;
    let sampled = a.trials.is_some() && !a.exact;
    let mut result = serde_json::Map::new();
    let mut worst = None::<f64>;
    let mut note = |d: f64| worst = Some(worst.map_or(d, |w: f64| w.max(d)));
    if let Some(k) = a.uiop_k {
        let r = match a.trials.filter(|_| sampled) {
            Some(t) => check_uiop_mc(&dist, k, a.tuples, t, derive_seed(seed, 4), DEFAULT_ALPHA)?,
            None => check_uiop_exact(&dist, k)?,
        };
        note(r.implied_delta);
        result.insert("uiop".into(), to_value(&r));
    }
    if let (Some(p), Some(q)) = (a.bip_p, a.bip_q) {
        if sampled {
            return Err(usage("block independence is checked exactly only; drop --trials"));
        }
        let r = check_bip_exact(&dist, p, q)?;
        note(r.implied_delta);
        result.insert("bip".into(), to_value(&r));
    }
    if let Some(k) = a.cover_k {
        let c = support_cover(&dist, k)?;
        result.insert(
            "cover".into(),
            json!({
                "k": k, "mass": c.mass, "entropy_bits": c.entropy_bits, "holds": c.holds(),
                "bound": if c.bound.is_finite() { json!(c.bound) } else { json!("-inf") },
                "atoms": c.atoms.iter().map(Permutation::to_line).collect::<Vec<_>>(),
            }),
        );
    }
    if result.is_empty() {
        return Err(usage("nothing to check: pass --uiop-k, --bip-p/--bip-q or --cover-k"));
    }
    let result = Value::Object(result);
    if let (Some(limit), Some(w)) = (a.expect_delta, worst) {
        if w > limit + 1e-12 {
            return Ok(Output::Failed(result, format!("measured delta {w} exceeds {limit}")));
        }
    }
    Ok(Output::Result(result))
}

fn simulate(a: &SimulateArgs, seed: u64) -> CliResult<Output> {
    let dist = build_dist(&a.dist, seed)?;
    let n = dist.n();
    let sigma = value_ordering(a.values, n, seed);
    let run_seed = derive_seed(seed, 5);
    let result = match a.policy {
        PolicyKind::Classic => to_value(&pcs(|_: &mut SimRng| classic_threshold_policy(n), &dist, &sigma, a.trials, run_seed)?),
        PolicyKind::RandomThreshold => {
            to_value(&pcs(|r: &mut SimRng| random_threshold_policy(n, r), &dist, &sigma, a.trials, run_seed)?)
        }
        PolicyKind::MultiChoice => {
            let mut values = vec![0.0; n];
            for (r, item) in sigma.rank_to_item().into_iter().enumerate() {
                values[item - 1] = (n - r) as f64;
            }
            let (k, q) = (a.k, a.q);
            to_value(&competitive_ratio(|r: &mut SimRng| multi_choice_policy(n, k, q, r), &dist, &values, k, a.trials, run_seed)?)
        }
    };
    Ok(Output::Result(result))
}

fn lowerbound(a: &LowerboundArgs, seed: u64) -> CliResult<Output> {
    let r = entropy_lb_experiment(a.n, a.k, a.trials, seed)?;
    let mut v = json!({ "experiment": r });
    if let Some(s) = a.minimax_s {
        let rows = (2..=s)
            .map(|s| semitone_minimax_range(s).map(|(lo, hi)| json!({ "s": s, "min": lo, "max": hi })))
            .collect::<nusec_core::Result<Vec<_>>>()?;
        v["minimax"] = json!(rows);
    }
    Ok(Output::Result(v))
}

fn load_code(a: &HardnessArgs, seed: u64) -> CliResult<(BinaryCode, Value)> {
    let l = a.n / 8;
    let (code, origin) = if let Some(path) = &a.code {
        (BinaryCode::read(path)?, json!({ "file": path }))
    } else if let Some(attempts) = a.code_search {
        let target = a.m.div_ceil(10);
        let (code, _) = search_code(a.m, l, target, attempts, derive_seed(seed, 6))?;
        (code, json!({ "search": { "target": target, "attempts": attempts } }))
    } else {
        (BinaryCode::random(a.m, l, &mut seeded(derive_seed(seed, 6)))?, json!("random"))
    };
    let radius = half_unique_radius(&code, None)?;
    Ok((code, json!({ "origin": origin, "radius": radius })))
}

fn hardness(a: &HardnessArgs, seed: u64) -> CliResult<Output> {
    let n = a.n;
    let sigma = value_ordering(a.values, n, seed);
    let run_seed = derive_seed(seed, 7);
    let mut v = json!({ "ordering": to_value(&is_decodable(&sigma, n, a.kappa)?) });
    let est = match a.construction {
        Construction::C1 => pcs(|_: &mut SimRng| alg_c1(n), &c1_distribution(n)?, &sigma, a.trials, run_seed)?,
        Construction::C2 => pcs(|_: &mut SimRng| alg_c2(n), &c2_distribution(n, a.kappa)?, &sigma, a.trials, run_seed)?,
        Construction::Encrypted | Construction::Combined => {
            let (code, info) = load_code(a, seed)?;
            if let Some(path) = &a.write_code {
                code.write(path)?;
            }
            v["code"] = info;
            let code = Arc::new(code);
            let g = Arc::new(HardFunction::random(a.m, n / 2, derive_seed(seed, 8))?);
            if a.construction == Construction::Encrypted {
                let dist = encrypted_distribution(n, code.clone(), g.clone())?;
                pcs(|_: &mut SimRng| alg_e(n, code.clone(), g.clone()).expect("validated"), &dist, &sigma, a.trials, run_seed)?
            } else {
                let c = combined_mixture(n, a.kappa, code, g)?;
                pcs(|r: &mut SimRng| c.policy(r), &c.distribution, &sigma, a.trials, run_seed)?
            }
        }
    };
    v["pcs"] = to_value(&est);
    Ok(Output::Result(v))
}

fn matching(a: &MatchingArgs, seed: u64) -> CliResult<Output> {
    let Some(path) = &a.instance else {
        return Ok(Output::Result(to_value(&kp_experiment(a.n, a.k, a.delta, a.trials, seed)?)));
    };
    let inst = BipartiteInstance::read(path)?;
    let opt = max_weight_matching(&inst)?.weight;
    let n = inst.n();
    let weights = run_trials(a.trials, derive_seed(seed, 9), |t, rng: &mut SimRng| {
        let pi = Permutation::random(n, rng);
        korula_pal(&inst, &pi, derive_seed(seed, 10 + t)).map(|m| m.weight)
    })
    .into_iter()
    .collect::<nusec_core::Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = weights.iter().map(|w| if opt > 0.0 { w / opt } else { 1.0 }).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    Ok(Output::Result(json!({ "n": n, "edges": inst.edge_count(), "opt_weight": opt, "trials": a.trials, "mean_ratio": mean })))
}

fn reproduce(a: &ReproduceArgs, seed: u64) -> CliResult<Output> {
    let ids: Vec<usize> = if a.criteria.is_empty() { (1..=CRITERIA).collect() } else { a.criteria.clone() };
    if let Some(&bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA) {
        return Err(usage(format!("no criterion {bad}; valid ids are 1..={CRITERIA}")));
    }
    let results: Vec<CriterionResult> = if ids.contains(&16) {
        let (mut rs, det) = determinism(&ids, seed)?;
        rs.push(det);
        rs
    } else {
        ids.iter().map(|&id| run_criterion(id, seed)).collect::<nusec_core::Result<_>>()?
    };
    if let Some(dir) = &a.output_dir {
        fs::create_dir_all(dir)?;
        for r in &results {
            fs::write(dir.join(format!("criterion-{:02}.json", r.id)), to_canonical_string(r)?)?;
        }
    }
    let mut table: String = results.iter().map(|r| r.line() + "\n").collect();
    let passed = results.iter().filter(|r| r.passed).count();
    table.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    if passed == results.len() {
        Ok(Output::Raw(table))
    } else {
        Ok(Output::RawFailed(table, format!("{} criteria failed", results.len() - passed)))
    }
}

enum Output {
    Result(Value),
    Failed(Value, String),
    Raw(String),
    RawFailed(String, String),
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, rows)),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(cli: &Cli, seed: Option<u64>, result: &Value) -> CliResult<String> {
    match cli.format {
        Format::Json => {
            let doc = json!({
                "version": VERSION,
                "command": to_value(&cli.command),
                "seed": seed,
                "result": result,
            });
            Ok(to_canonical_string(&doc)?)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", &canonicalize(result), &mut rows);
            let mut s = String::from("key,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
            }
            Ok(s)
        }
        Format::Text => Err(usage("--format text is only available for `construct`")),
    }
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("--threads: {e}")))?;
    }
    let seed = match &cli.command {
        Command::Reproduce(_) => Some(cli.seed.unwrap_or(DEFAULT_SEED)),
        _ => Some(need_seed(cli.seed)?),
    };
    let s = seed.expect("resolved");
    let out = match &cli.command {
        Command::Construct(a) => construct(a, s, cli.format)?,
        Command::Check(a) => check(a, s)?,
        Command::Simulate(a) => simulate(a, s)?,
        Command::Lowerbound(a) => lowerbound(a, s)?,
        Command::Hardness(a) => hardness(a, s)?,
        Command::Matching(a) => matching(a, s)?,
        Command::Reproduce(a) => reproduce(a, s)?,
    };
    let path = cli.output.as_deref();
    match out {
        Output::Raw(text) => emit(path, &text),
        Output::RawFailed(text, why) => {
            emit(path, &text)?;
            Err(Failure::Assertion(why))
        }
        Output::Result(v) => emit(path, &render(cli, seed, &v)?),
        Output::Failed(v, why) => {
            emit(path, &render(cli, seed, &v)?)?;
            Err(Failure::Assertion(why))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("nusec: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("nusec: {msg}");
            ExitCode::from(2)
        }
    }
}
