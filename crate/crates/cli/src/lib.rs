//! The `divkit` command line.
//!
//! [`run`] takes the full argument vector and returns the exit status with
//! everything that would be printed, so the binary is a thin wrapper and
//! tests can drive it in-process.
//!
//! Exit status is 0 on success, 2 on a usage error and 1 on any other
//! error, in which case standard error holds one JSON line
//! `{"error": kind, "message": text}`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use divkit::convert::{self, ConversionResult, Method};
use divkit::dist::{bvn_decompose, Channel, DeterministicRule, Dist};
use divkit::divergences::DivergenceSpec;
use divkit::kcut::{self, counterexample_pair, CutResult};
use divkit::mechanisms::{self, ClaimCheck, PrivacyClaim, RandomizedResponse};
use divkit::regions::{region_contains_region, ErrorPoint, RegionSpec, DEFAULT_GRID};
use divkit::sample::Sampler;
use divkit::table::{emit_csv, emit_svg, round_sig};

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Parser)]
#[command(name = "divkit", version, about = "Exact divergences, k-cuts and privacy regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a divergence on a pair of distributions.
    Div(DivArgs),
    /// Compute the k-cut of a divergence and its gap to the full value.
    Cut(CutArgs),
    /// Test whether a divergence equals its k-cut, on one pair or on
    /// random pairs.
    GenTest(GenTestArgs),
    /// Tabulate a privacy region or test membership.
    Region(RegionArgs),
    /// Convert Rényi or Hellinger bounds to (ε, δ)-DP.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Decompose a channel into a mixture of deterministic rules.
    Bvn(BvnArgs),
    /// Error-rate points of randomized response for adjacent inputs.
    RrCloud(RrCloudArgs),
    /// Check a privacy claim for randomized response.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct PairArgs {
    /// First distribution (JSON file with labels and probs).
    #[arg(long, requires = "mu2", conflicts_with = "counterexample")]
    mu1: Option<PathBuf>,
    /// Second distribution.
    #[arg(long, requires = "mu1")]
    mu2: Option<PathBuf>,
    /// Use the built-in three-point pair for orders α,β.
    #[arg(long, value_name = "ALPHA,BETA")]
    counterexample: Option<String>,
}

#[derive(Debug, Args)]
struct DivArgs {
    /// Divergence: eps:E, renyi:A, kl, max, tv or hellinger.
    #[arg(long = "div")]
    spec: String,
    #[command(flatten)]
    pair: PairArgs,
    /// Report logarithmic divergences in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Debug, Args)]
struct CutArgs {
    #[arg(long = "div")]
    spec: String,
    /// Number of outcomes of the decision rules.
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    pair: PairArgs,
    /// Use the Rényi closed forms (k = 2 or 3).
    #[arg(long)]
    closed_form: bool,
    #[arg(long)]
    bits: bool,
}

#[derive(Debug, Args)]
struct GenTestArgs {
    #[arg(long = "div")]
    spec: String,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    pair: PairArgs,
    /// Random pairs to test when no pair is given.
    #[arg(long, default_value_t = 200)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest space size for random pairs.
    #[arg(long, default_value_t = 6)]
    max_len: usize,
    /// Gap above which a pair counts as a counterexample.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
struct RegionArgs {
    /// Region: dp:E,D, renyi:A,R, gauss:D or hd:R.
    #[arg(long)]
    spec: String,
    /// Tabulate N points of the lower boundary.
    #[arg(long, value_name = "N", conflicts_with_all = ["contains", "within"])]
    boundary: Option<usize>,
    /// Test whether the point PFA,PMD lies in the region.
    #[arg(long, value_name = "PFA,PMD", conflicts_with = "within")]
    contains: Option<String>,
    /// Check that the region lies inside another one.
    #[arg(long, value_name = "SPEC")]
    within: Option<String>,
    /// Grid size for --within.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, visible_alias = "out", value_enum, default_value = "json")]
    format: Format,
    /// Shorthand for --format svg.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Subcommand)]
enum ConvertCommand {
    /// Rényi DP to (ε, δ)-DP.
    Rdp2dp {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        delta: f64,
        /// mironov, refined or tangent.
        #[arg(long, default_value = "refined")]
        method: String,
    },
    /// Hellinger bound to (ε, δ)-DP.
    Hd2dp {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        rho: f64,
    },
    /// Try to falsify "Δ ≤ ρ implies (ε, δ)-DP" on random pairs.
    Falsify {
        #[arg(long = "div")]
        spec: String,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct BvnArgs {
    /// Channel JSON file with in_labels, out_labels and matrix.
    #[arg(long)]
    channel: PathBuf,
}

#[derive(Debug, Args)]
struct RrCloudArgs {
    /// Number of input bits.
    #[arg(long, default_value_t = 3)]
    bits: usize,
    /// Per-bit flip probability.
    #[arg(long, default_value_t = 0.34)]
    flip: f64,
    /// Region used for the inside column.
    #[arg(long, default_value = "dp:0.67,0.05")]
    region: String,
    /// Null and alternative inputs; defaults to 00..0 and 00..1.
    #[arg(long, value_name = "X0,X1", conflicts_with = "all_pairs")]
    pair: Option<String>,
    /// Emit points for every adjacent pair.
    #[arg(long)]
    all_pairs: bool,
    #[arg(long, visible_alias = "out", value_enum, default_value = "csv")]
    format: Format,
    /// Shorthand for --format svg.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Mechanism, e.g. rr:3,0.34.
    #[arg(long)]
    mech: String,
    /// Claim: dp:E,D, rdp:A,R, zcdp:XI,R or tcdp:R,OMEGA.
    #[arg(long)]
    claim: String,
}

#[derive(Debug)]
enum CliError {
    Core(divkit::Error),
    Io(String),
    Input(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Input(_) => "input",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io(m) | CliError::Input(m) => m.clone(),
        }
    }
}

impl From<divkit::Error> for CliError {
    fn from(e: divkit::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the command line on `argv` (including the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    status: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    status: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(stdout) => Outcome {
            status: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => {
            let line = json!({ "error": e.kind(), "message": e.message() });
            Outcome {
                status: 1,
                stdout: String::new(),
                stderr: format!("{line}\n"),
            }
        }
    }
}

fn dispatch(command: Command) -> CliResult<String> {
    match command {
        Command::Div(a) => div(a),
        Command::Cut(a) => cut(a),
        Command::GenTest(a) => gen_test(a),
        Command::Region(a) => region(a),
        Command::Convert(c) => convert_cmd(c),
        Command::Bvn(a) => bvn(a),
        Command::RrCloud(a) => rr_cloud(a),
        Command::Check(a) => check(a),
    }
}

/// A number rounded to 12 significant digits; non-finite values become the
/// strings `"inf"`, `"-inf"` and `"nan"`.
fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x.is_infinite() {
        Value::from(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        let r = round_sig(x);
        Value::from(if r == 0.0 { 0.0 } else { r })
    }
}

fn to_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn parse_spec(s: &str) -> CliResult<DivergenceSpec> {
    Ok(s.parse::<DivergenceSpec>()?)
}

fn parse_floats(s: &str, want: usize, what: &str) -> CliResult<Vec<f64>> {
    let nums: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("cannot parse {what} {s:?}")))
        })
        .collect::<CliResult<_>>()?;
    if nums.len() != want {
        return Err(CliError::Input(format!("{what} needs {want} comma-separated numbers")));
    }
    Ok(nums)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        match e.classify() {
            serde_json::error::Category::Data => CliError::Core(divkit::Error::Domain(msg)),
            _ => CliError::Input(msg),
        }
    })
}

fn load_pair(args: &PairArgs) -> CliResult<(Dist, Dist)> {
    match (&args.mu1, &args.mu2, &args.counterexample) {
        (Some(a), Some(b), None) => Ok((read_json(a)?, read_json(b)?)),
        (None, None, Some(ab)) => {
            let v = parse_floats(ab, 2, "counterexample orders")?;
            Ok(counterexample_pair(v[0], v[1])?)
        }
        _ => Err(CliError::Input(
            "give either --mu1 and --mu2 or --counterexample".into(),
        )),
    }
}

/// Divisor and unit name for `--bits`.
fn units(spec: &DivergenceSpec, bits: bool) -> (f64, &'static str) {
    if bits && spec.is_logarithmic() {
        (std::f64::consts::LN_2, "bits")
    } else if spec.is_logarithmic() {
        (1.0, "nats")
    } else {
        (1.0, "none")
    }
}

fn div(a: DivArgs) -> CliResult<String> {
    let spec = parse_spec(&a.spec)?;
    let (mu1, mu2) = load_pair(&a.pair)?;
    let value = spec.eval(&mu1, &mu2)?;
    let (scale, unit) = units(&spec, a.bits);
    Ok(to_json(json!({
        "divergence": spec.to_string(),
        "units": unit,
        "value": num(value / scale),
    })))
}

fn rule_json(rule: &DeterministicRule) -> Value {
    let mut map = Map::new();
    for (input, &out) in rule.in_labels().iter().zip(rule.assignment()) {
        map.insert(input.clone(), Value::from(rule.out_labels()[out].clone()));
    }
    Value::Object(map)
}

fn cut_json(spec: &DivergenceSpec, r: &CutResult, scale: f64, unit: &str) -> Value {
    json!({
        "divergence": spec.to_string(),
        "units": unit,
        "k": r.k,
        "value": num(r.value / scale),
        "full_value": num(r.full_value / scale),
        "gap": num(r.gap / scale),
        "witness": rule_json(&r.witness),
    })
}

fn cut(a: CutArgs) -> CliResult<String> {
    let spec = parse_spec(&a.spec)?;
    let (mu1, mu2) = load_pair(&a.pair)?;
    let result = if a.closed_form {
        match (&spec, a.k) {
            (DivergenceSpec::Renyi { alpha }, 2) => kcut::renyi_2cut_closed_form(*alpha, &mu1, &mu2)?,
            (DivergenceSpec::Renyi { alpha }, 3) => kcut::renyi_3cut_closed_form(*alpha, &mu1, &mu2)?,
            _ => {
                return Err(CliError::Input(
                    "--closed-form needs a finite-order Rényi divergence and k of 2 or 3".into(),
                ))
            }
        }
    } else {
        kcut::k_cut(&spec, a.k, &mu1, &mu2)?
    };
    let (scale, unit) = units(&spec, a.bits);
    Ok(to_json(cut_json(&spec, &result, scale, unit)))
}

fn gen_test(a: GenTestArgs) -> CliResult<String> {
    let spec = parse_spec(&a.spec)?;
    if a.pair.mu1.is_some() || a.pair.counterexample.is_some() {
        let (mu1, mu2) = load_pair(&a.pair)?;
        let r = kcut::generatedness_gap(&spec, a.k, &mu1, &mu2)?;
        let mut v = cut_json(&spec, &r, 1.0, units(&spec, false).1);
        v["generated_on_pair"] = Value::from(!(r.gap > a.tolerance));
        return Ok(to_json(v));
    }
    if a.trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let sampler = Sampler::new(a.seed).with_len(2, a.max_len.max(2))?;
    let mut worst: Option<(f64, u64, Dist, Dist)> = None;
    let mut counterexamples = 0u64;
    for i in 0..a.trials {
        let (mu1, mu2) = sampler.pair(i);
        let r = kcut::generatedness_gap(&spec, a.k, &mu1, &mu2)?;
        // an infinite full value cut down to an infinite value has gap 0
        let gap = if r.gap.is_nan() { f64::INFINITY } else { r.gap };
        if gap > a.tolerance {
            counterexamples += 1;
        }
        if worst.as_ref().is_none_or(|w| gap > w.0) {
            worst = Some((gap, i, mu1, mu2));
        }
    }
    let (gap, index, mu1, mu2) = worst.expect("at least one trial");
    Ok(to_json(json!({
        "divergence": spec.to_string(),
        "k": a.k,
        "trials": a.trials,
        "seed": a.seed,
        "counterexamples": counterexamples,
        "generated_on_sample": counterexamples == 0,
        "max_gap": num(gap),
        "worst_trial": index,
        "worst_pair": {
            "mu1": mu1.probs().iter().map(|&p| num(p)).collect::<Vec<_>>(),
            "mu2": mu2.probs().iter().map(|&p| num(p)).collect::<Vec<_>>(),
        },
    })))
}

fn point_json(p: &ErrorPoint) -> Value {
    json!({ "pfa": num(p.pfa), "pmd": num(p.pmd) })
}

fn region(a: RegionArgs) -> CliResult<String> {
    let spec: RegionSpec = a.spec.parse()?;
    if let Some(point) = &a.contains {
        let v = parse_floats(point, 2, "point")?;
        let p = ErrorPoint::new(v[0], v[1])?;
        return Ok(to_json(json!({
            "region": spec.to_string(),
            "point": point_json(&p),
            "inside": spec.contains(p),
            "violation": num(spec.violation(p)),
        })));
    }
    if let Some(outer) = &a.within {
        let outer: RegionSpec = outer.parse()?;
        let c = region_contains_region(&spec, &outer, a.grid)?;
        return Ok(to_json(json!({
            "inner": spec.to_string(),
            "outer": outer.to_string(),
            "contained": c.contained,
            "max_violation": num(c.max_violation),
            "worst": c.worst.as_ref().map(point_json),
            "points_checked": c.points_checked,
        })));
    }
    let n = a.boundary.unwrap_or(DEFAULT_GRID);
    let points = spec.boundary(n)?;
    Ok(match svg_or(a.svg, a.format) {
        Format::Csv => format!("{}\n", emit_csv(&points, None)),
        Format::Svg => emit_svg(&points, &[]),
        Format::Json => to_json(json!({
            "region": spec.to_string(),
            "boundary": points.iter().map(point_json).collect::<Vec<_>>(),
        })),
    })
}

fn conversion_json(r: &ConversionResult) -> Value {
    let aux: Map<String, Value> = r.aux.iter().map(|(k, &v)| (k.clone(), num(v))).collect();
    json!({
        "method": r.method.to_string(),
        "eps": num(r.eps),
        "delta": num(r.delta),
        "aux": aux,
        "notes": r.notes,
    })
}

fn convert_cmd(c: ConvertCommand) -> CliResult<String> {
    match c {
        ConvertCommand::Rdp2dp {
            alpha,
            rho,
            delta,
            method,
        } => {
            let method: Method = method.parse()?;
            Ok(to_json(conversion_json(&convert::rdp_to_dp(method, alpha, rho, delta)?)))
        }
        ConvertCommand::Hd2dp { eps, rho } => {
            Ok(to_json(conversion_json(&convert::hellinger_to_dp(eps, rho)?)))
        }
        ConvertCommand::Falsify {
            spec,
            rho,
            eps,
            delta,
            trials,
            seed,
        } => {
            let spec = parse_spec(&spec)?;
            let f = convert::divergence_to_dp_check(&spec, rho, eps, delta, trials, seed)?;
            let witness = f.witness.as_ref().map(|(p, q)| {
                json!({
                    "mu1": p.iter().map(|&x| num(x)).collect::<Vec<_>>(),
                    "mu2": q.iter().map(|&x| num(x)).collect::<Vec<_>>(),
                    "eps_divergence": num(f.witness_divergence.unwrap_or(f64::NAN)),
                })
            });
            Ok(to_json(json!({
                "divergence": spec.to_string(),
                "rho": num(rho),
                "eps": num(eps),
                "delta": num(delta),
                "seed": seed,
                "falsified": f.falsified,
                "draws": f.draws,
                "accepted": f.accepted,
                "max_eps_divergence": num(f.max_eps_divergence),
                "witness": witness,
            })))
        }
    }
}

fn bvn(a: BvnArgs) -> CliResult<String> {
    let channel: Channel = read_json(&a.channel)?;
    let d = bvn_decompose(&channel)?;
    let rebuilt = d.reconstruct();
    let error = rebuilt
        .iter()
        .zip(channel.matrix())
        .flat_map(|(r, m)| r.iter().zip(m).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let terms: Vec<Value> = d
        .terms
        .iter()
        .map(|t| json!({ "weight": num(t.weight), "rule": rule_json(&t.rule) }))
        .collect();
    Ok(to_json(json!({
        "terms": terms,
        "total_weight": num(d.total_weight()),
        "reconstruction_error": num(error),
    })))
}

fn svg_or(svg: bool, format: Format) -> Format {
    if svg {
        Format::Svg
    } else {
        format
    }
}

fn rr_cloud(a: RrCloudArgs) -> CliResult<String> {
    let mech = RandomizedResponse::new(a.bits, a.flip)?;
    let region: RegionSpec = a.region.parse()?;
    let pairs = if a.all_pairs {
        mech.adjacent_pairs()
    } else if let Some(pair) = &a.pair {
        let (x0, x1) = pair
            .split_once(',')
            .ok_or_else(|| CliError::Input(format!("--pair {pair:?} must look like 000,001")))?;
        vec![(x0.trim().to_string(), x1.trim().to_string())]
    } else {
        let zeros = "0".repeat(a.bits);
        let last = format!("{}1", &zeros[1..]);
        vec![(zeros, last)]
    };
    let mut clouds = Vec::with_capacity(pairs.len());
    for (x0, x1) in &pairs {
        let points = mechanisms::error_cloud(&mech, x0, x1)?;
        let inside: Vec<bool> = points.iter().map(|&p| region.admits(p)).collect();
        clouds.push((x0, x1, points, inside));
    }
    Ok(match svg_or(a.svg, a.format) {
        Format::Csv if !a.all_pairs => {
            let (_, _, points, inside) = &clouds[0];
            format!("{}\n", emit_csv(points, Some(inside)))
        }
        Format::Csv => {
            let mut out = String::from("x0,x1,pfa,pmd,inside\n");
            for (x0, x1, points, inside) in &clouds {
                for line in emit_csv(points, Some(inside)).lines().skip(1) {
                    out.push_str(&format!("{x0},{x1},{line}\n"));
                }
            }
            out
        }
        Format::Svg => {
            let boundary = region.boundary(DEFAULT_GRID)?;
            let all: Vec<ErrorPoint> = clouds.iter().flat_map(|c| c.2.iter().copied()).collect();
            emit_svg(&boundary, &all)
        }
        Format::Json => {
            let items: Vec<Value> = clouds
                .iter()
                .map(|(x0, x1, points, inside)| {
                    json!({
                        "x0": x0,
                        "x1": x1,
                        "all_inside": inside.iter().all(|&b| b),
                        "points": points
                            .iter()
                            .zip(inside)
                            .map(|(p, &ins)| {
                                let mut v = point_json(p);
                                v["inside"] = Value::from(ins);
                                v
                            })
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            to_json(json!({
                "mechanism": mech.to_string(),
                "region": region.to_string(),
                "pairs": items,
            }))
        }
    })
}

fn check_json(claim: &PrivacyClaim, mech: &RandomizedResponse, c: &ClaimCheck) -> Value {
    let verification = serde_json::to_value(c.verification).expect("enum serializes");
    json!({
        "mechanism": mech.to_string(),
        "claim": claim.to_string(),
        "holds": c.holds,
        "verification": verification,
        "worst_margin": num(c.worst_margin),
        "witness": {
            "x0": c.witness.x0,
            "x1": c.witness.x1,
            "alpha": c.witness.alpha.map(num),
            "value": num(c.witness.value),
            "bound": num(c.witness.bound),
        },
    })
}

fn check(a: CheckArgs) -> CliResult<String> {
    let mech: RandomizedResponse = a.mech.parse()?;
    let claim: PrivacyClaim = a.claim.parse()?;
    let c = mechanisms::check_claim(&mech, &claim)?;
    Ok(to_json(check_json(&claim, &mech, &c)))
}
