//! `cbe-mom`: moments of moments of the CβE characteristic polynomial.

mod record;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};

use cbe_mom::asymptotics::{
    asymptotic_ratio, coeff_general, coeff_k1, coeff_k1_integral, coeff_k2, coeff_volume,
    finiteness_domain, singularity_order, CoeffEstimate, McBudget, RatioMethod, SingularPoint,
};
use cbe_mom::jack::jack_eval;
use cbe_mom::mom::{mom_exact, mom_exact_j, mom_quadrature, MomOptions, DEFAULT_MAX_LAYER};
use cbe_mom::montecarlo::{mom_mc, sample_cbe, McConfig};
use cbe_mom::{parse_rational, ArraySpec, RationalParam, Signature};

use record::{csv_num, decimal_json, error_json, rational_json, Record};

#[derive(Parser, Debug)]
#[command(
    name = "cbe-mom",
    version,
    about = "Moments of moments of the circular beta ensemble"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML or JSON file supplying defaults for any flag. A JSON output
    /// record is accepted too; its "inputs" are used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for the parallel kernels.
    #[arg(long, global = true, env = "CBE_MOM_WORKERS")]
    workers: Option<usize>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Include wall-clock time in the output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// MoM_N(k;q) by the exact DP, J enumeration, Jack quadrature or Monte Carlo.
    Mom(MomArgs),
    /// The leading coefficient c(k;q).
    Coeff(CoeffArgs),
    /// MoM_N / N^exponent over a list of N.
    Scan(ScanArgs),
    /// Evaluate a Jack polynomial.
    Jack(JackArgs),
    /// Dump CβE samples from the Metropolis chain.
    Sample(SampleArgs),
    /// Singularity order and divergence threshold at an extremal point.
    Singularity(SingularityArgs),
    /// What is known about finiteness of c(k;q).
    Finiteness(FinitenessArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MomMethod {
    Exact,
    JEnum,
    Quadrature,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ScanMethod {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CoeffMethod {
    /// Closed form for k = 1, single-row integral for k = 2, array integral otherwise.
    Auto,
    ClosedForm,
    Selberg,
    SingleRow,
    Array,
    Volume,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PointKind {
    Extremal,
    Star,
}

fn string_or_number<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<String>, D::Error> {
    Ok(match Option::<Value>::deserialize(d)? {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(v) => Some(v.to_string()),
    })
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("not a non-negative integer: {s}")),
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct McFlags {
    /// Monte Carlo sample count (accepts 1e6).
    #[arg(long, value_parser = parse_count)]
    mc_budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Independent Metropolis chains.
    #[arg(long)]
    chains: Option<usize>,
    /// Burn-in sweeps per chain.
    #[arg(long)]
    burn_in: Option<usize>,
}

impl McFlags {
    fn fill(&mut self, budget: u64) {
        self.mc_budget.get_or_insert(budget);
        self.seed.get_or_insert(0);
    }

    fn fill_chains(&mut self, budget: u64) {
        self.fill(budget);
        self.chains.get_or_insert(McConfig::default().chains);
        self.burn_in.get_or_insert(McConfig::default().burn_in);
    }

    fn mc_config(&self) -> McConfig {
        let d = McConfig::default();
        McConfig {
            chains: self.chains.unwrap_or(d.chains),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            samples: self.mc_budget.unwrap_or(d.samples as u64) as usize,
            seed: self.seed.unwrap_or(0),
            ..d
        }
    }

    fn budget(&self) -> McBudget {
        McBudget::new(self.mc_budget.unwrap_or(0), self.seed.unwrap_or(0))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct MomArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// beta as an integer or p/q (exact), or a decimal (Monte Carlo only).
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
    #[arg(long, value_enum)]
    method: Option<MomMethod>,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
    /// Cap on DP layer (or quadrature grid) size.
    #[arg(long)]
    max_layer_size: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct CoeffArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
    #[arg(long, value_enum)]
    method: Option<CoeffMethod>,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct ScanArgs {
    /// N values: "20,40,80", "1..20" or "20..200:20".
    #[arg(long = "N")]
    #[serde(rename = "N", deserialize_with = "string_or_number")]
    n: Option<String>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
    #[arg(long, value_enum)]
    method: Option<ScanMethod>,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
    #[arg(long)]
    max_layer_size: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct JackArgs {
    /// Signature, e.g. "2,1,0".
    #[arg(long)]
    lambda: Option<String>,
    /// Complex points, e.g. "1,0.5+0.25i".
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct SampleArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<u32>,
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct SingularityArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, value_enum)]
    point: Option<PointKind>,
    /// Evaluate the order at this beta (integer or p/q).
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", default)]
struct FinitenessArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    #[serde(deserialize_with = "string_or_number")]
    beta: Option<String>,
}

/// beta as typed: exact when given as an integer or `p/q`.
enum Beta {
    Exact(BigRational),
    Float(f64),
}

impl Beta {
    fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let decimal = !t.contains('/') && t.contains(['.', 'e', 'E']);
        let b = if decimal {
            Beta::Float(t.parse().with_context(|| format!("bad beta {t:?}"))?)
        } else {
            Beta::Exact(parse_rational(t)?)
        };
        if !(b.value() > 0.0) {
            bail!("beta must be positive, got {t}");
        }
        Ok(b)
    }

    fn value(&self) -> f64 {
        match self {
            Beta::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Beta::Float(x) => *x,
        }
    }

    /// beta for floating-point paths: a decimal is read as the rational it spells.
    fn float_param(&self) -> Result<RationalParam> {
        match self {
            Beta::Exact(r) => Ok(RationalParam::from_beta(r.clone())?),
            Beta::Float(x) => Ok(RationalParam::from_beta(parse_rational(&x.to_string())?)?),
        }
    }

    fn exact(&self, what: &str) -> Result<RationalParam> {
        match self {
            Beta::Exact(r) => Ok(RationalParam::from_beta(r.clone())?),
            Beta::Float(x) => bail!("{what} needs beta as an integer or p/q, got decimal {x}"),
        }
    }
}

fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| anyhow!("missing --{name}"))
}

fn beta_arg(v: &Option<String>) -> Result<Beta> {
    Beta::parse(&required(v, "beta")?)
}

fn load_config(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = if path.extension().is_some_and(|e| e == "toml") {
        serde_json::to_value(toml::from_str::<toml::Value>(&text).context("parsing TOML config")?)?
    } else {
        serde_json::from_str(&text).context("parsing JSON config")?
    };
    match value {
        Value::Object(mut m) => match m.remove("inputs") {
            Some(inputs @ Value::Object(_)) => Ok(inputs),
            _ => Ok(Value::Object(m)),
        },
        _ => bail!("config must be a table/object"),
    }
}

/// Flags over config: every non-null flag replaces the config entry.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Value>) -> Result<T> {
    let mut base = match config {
        Some(Value::Object(m)) => m.clone(),
        _ => Map::new(),
    };
    if let Value::Object(f) = serde_json::to_value(flags)? {
        for (k, v) in f {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).context("resolving flags and config")
}

struct Ctx {
    workers: Option<usize>,
    format: Option<Format>,
    timing: bool,
    start: Instant,
}

impl Ctx {
    fn finish(&self, rec: Record) -> Record {
        if self.timing {
            rec.set("wall_ms", self.start.elapsed().as_secs_f64() * 1e3)
        } else {
            rec
        }
    }

    fn mom_options(&self, max_layer: Option<usize>) -> MomOptions {
        MomOptions {
            max_layer: max_layer.unwrap_or(DEFAULT_MAX_LAYER),
            workers: self.workers,
            ..Default::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            println!(
                "{}",
                serde_json::to_string_pretty(&error_json(&e)).expect("error serializes")
            );
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<String> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()?;
    }
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let ctx = Ctx {
        workers: cli.workers,
        format: cli.format,
        timing: cli.timing,
        start: Instant::now(),
    };
    let cfg = config.as_ref();
    match cli.command {
        Command::Mom(a) => cmd_mom(resolve(&a, cfg)?, &ctx),
        Command::Coeff(a) => cmd_coeff(resolve(&a, cfg)?, &ctx),
        Command::Scan(a) => cmd_scan(resolve(&a, cfg)?, &ctx),
        Command::Jack(a) => cmd_jack(resolve(&a, cfg)?, &ctx),
        Command::Sample(a) => cmd_sample(resolve(&a, cfg)?, &ctx),
        Command::Singularity(a) => cmd_singularity(resolve(&a, cfg)?, &ctx),
        Command::Finiteness(a) => cmd_finiteness(resolve(&a, cfg)?, &ctx),
    }
}

fn cmd_mom(mut a: MomArgs, ctx: &Ctx) -> Result<String> {
    let spec = ArraySpec::new(
        required(&a.n, "N")?,
        required(&a.k, "k")?,
        required(&a.q, "q")?,
    )?;
    let beta = beta_arg(&a.beta)?;
    let fallback = if matches!(beta, Beta::Float(_)) {
        MomMethod::Mc
    } else {
        MomMethod::Exact
    };
    let method = *a.method.get_or_insert(fallback);
    if method == MomMethod::Mc {
        a.mc.fill_chains(McConfig::default().samples as u64);
    }
    let opts = ctx.mom_options(a.max_layer_size);
    let mut rec = Record::new("mom", serde_json::to_value(&a)?);
    let (value_csv, se) = match method {
        MomMethod::Exact | MomMethod::JEnum => {
            let delta = beta.exact("the exact method")?;
            let r = if method == MomMethod::Exact {
                mom_exact(&spec, &delta, &opts)?
            } else {
                mom_exact_j(&spec, &delta, &opts)?
            };
            let v = r.value.exact().expect("exact method").clone();
            rec = rec
                .set("method", r.method.to_string())
                .set("value", rational_json(&v))
                .set(
                    "stats",
                    json!({ "nodes": r.stats.nodes, "max_layer": r.stats.max_layer }),
                );
            (v.to_string(), None)
        }
        MomMethod::Quadrature => {
            let delta = beta.float_param()?;
            let r = mom_quadrature(&spec, &delta, &opts)?;
            let v = r.value.to_f64();
            rec = rec
                .set("method", r.method.to_string())
                .set("value", decimal_json(v))
                .set("stats", json!({ "grid_points": r.stats.nodes }));
            (v.to_string(), None)
        }
        MomMethod::Mc => {
            let cfg = a.mc.mc_config();
            let r = mom_mc(&spec, beta.value(), &cfg)?;
            let e = &r.estimate;
            rec = rec
                .set("method", "monte-carlo")
                .set("value", decimal_json(e.mean))
                .set("std_error", e.std_error)
                .set("seed", cfg.seed)
                .set("mc_budget", cfg.samples)
                .set(
                    "diagnostics",
                    json!({
                        "effective_samples": e.effective_samples,
                        "acceptance": r.diagnostics.acceptance,
                        "warnings": r.diagnostics.warnings,
                    }),
                );
            for w in &r.diagnostics.warnings {
                eprintln!("warning: {w}");
            }
            (e.mean.to_string(), e.std_error)
        }
    };
    match ctx.format {
        Some(Format::Csv) => Ok(format!(
            "N,k,q,beta,method,value,std_error\n{},{},{},{},{},{},{}",
            spec.n,
            spec.k,
            spec.q,
            a.beta.as_deref().unwrap_or_default(),
            method_name(method),
            value_csv,
            csv_num(se)
        )),
        _ => Ok(ctx.finish(rec).to_json()),
    }
}

fn method_name(m: MomMethod) -> &'static str {
    match m {
        MomMethod::Exact => "exact",
        MomMethod::JEnum => "j-enum",
        MomMethod::Quadrature => "quadrature",
        MomMethod::Mc => "mc",
    }
}

/// `prod Gamma(d i) / Gamma(d (q+i))` for integer `d`, exactly.
fn coeff_k1_exact(q: u32, beta: &Beta) -> Option<BigRational> {
    let Beta::Exact(b) = beta else { return None };
    let d = BigRational::from_integer(2.into()) / b;
    if !d.is_integer() {
        return None;
    }
    let d = d.to_integer().to_u64()?;
    let fact = |n: u64| (1..n).fold(BigInt::one(), |acc, i| acc * i);
    let mut r = BigRational::one();
    for i in 1..=u64::from(q) {
        r *= BigRational::new(fact(d * i), fact(d * (u64::from(q) + i)));
    }
    Some(r)
}

fn estimate_record(rec: Record, e: &CoeffEstimate) -> Record {
    rec.set("value", decimal_json(e.estimate.mean))
        .set("std_error", e.estimate.std_error)
        .set("seed", e.budget.seed)
        .set("mc_budget", e.budget.samples)
        .set(
            "diagnostics",
            json!({
                "effective_samples": e.estimate.effective_samples,
                "hit_rate": e.hit_rate,
                "flags": e.flags,
                "finiteness": e.finiteness,
            }),
        )
}

fn cmd_coeff(mut a: CoeffArgs, ctx: &Ctx) -> Result<String> {
    let (k, q) = (required(&a.k, "k")?, required(&a.q, "q")?);
    let beta = beta_arg(&a.beta)?;
    let mut method = *a.method.get_or_insert(CoeffMethod::Auto);
    if method == CoeffMethod::Auto {
        method = match k {
            1 => CoeffMethod::ClosedForm,
            2 => CoeffMethod::SingleRow,
            _ => CoeffMethod::Array,
        };
    }
    if method != CoeffMethod::ClosedForm {
        a.mc.fill(1_000_000);
    }
    let b = beta.value();
    let rec = Record::new("coeff", serde_json::to_value(&a)?);
    let needs = |want: u32, name: &str| -> Result<()> {
        if k != want {
            bail!("the {name} method needs k = {want}");
        }
        Ok(())
    };
    let rec = match method {
        CoeffMethod::ClosedForm => {
            needs(1, "closed-form")?;
            let mut value = decimal_json(coeff_k1(q, b));
            if let Some(r) = coeff_k1_exact(q, &beta) {
                value["exact"] = rational_json(&r);
            }
            rec.set("method", "closed-form").set("value", value).set(
                "diagnostics",
                json!({ "finiteness": finiteness_domain(k, q, Some(b)) }),
            )
        }
        CoeffMethod::Selberg => {
            needs(1, "selberg")?;
            estimate_record(
                rec.set("method", "selberg-integral"),
                &coeff_k1_integral(q, b, a.mc.budget())?,
            )
        }
        CoeffMethod::SingleRow => {
            needs(2, "single-row")?;
            estimate_record(
                rec.set("method", "single-row-integral"),
                &coeff_k2(q, b, a.mc.budget())?,
            )
        }
        CoeffMethod::Array => estimate_record(
            rec.set("method", "array-integral"),
            &coeff_general(k, q, b, a.mc.budget())?,
        ),
        CoeffMethod::Volume => {
            if b != 2.0 {
                bail!("the volume method computes c(k;q) at beta = 2 only");
            }
            estimate_record(
                rec.set("method", "volume"),
                &coeff_volume(k, q, a.mc.budget())?,
            )
        }
        CoeffMethod::Auto => unreachable!("resolved above"),
    };
    Ok(ctx.finish(rec).to_json())
}

/// "20,40,80", "1..20" (inclusive) or "20..200:20".
fn parse_n_list(s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let (lo, hi, step): (u32, u32, usize) = (lo.parse()?, hi.parse()?, step.parse()?);
            if step == 0 {
                bail!("zero step in {part:?}");
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(
                part.parse()
                    .with_context(|| format!("bad N value {part:?}"))?,
            );
        }
    }
    if out.is_empty() {
        bail!("empty N list");
    }
    Ok(out)
}

fn cmd_scan(mut a: ScanArgs, ctx: &Ctx) -> Result<String> {
    let ns = parse_n_list(&required(&a.n, "N")?)?;
    let (k, q) = (required(&a.k, "k")?, required(&a.q, "q")?);
    let beta = beta_arg(&a.beta)?;
    let fallback = if matches!(beta, Beta::Float(_)) {
        ScanMethod::Mc
    } else {
        ScanMethod::Exact
    };
    let method = *a.method.get_or_insert(fallback);
    let ratio_method = match method {
        ScanMethod::Exact => RatioMethod::Exact(ctx.mom_options(a.max_layer_size)),
        ScanMethod::Mc => {
            a.mc.fill_chains(McConfig::default().samples as u64);
            RatioMethod::MonteCarlo(a.mc.mc_config())
        }
    };
    let delta = match method {
        ScanMethod::Exact => beta.exact("an exact scan")?,
        ScanMethod::Mc => beta.float_param()?,
    };
    let table = asymptotic_ratio(k, q, &delta, &ns, &ratio_method)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    if ctx.format == Some(Format::Json) {
        let rows: Vec<Value> = table
            .rows
            .iter()
            .map(|r| {
                let mut v =
                    json!({ "N": r.n, "MoM": r.mom, "ratio": r.ratio, "slope": r.running_slope });
                if let Some(x) = &r.exact {
                    v["exact"] = rational_json(x);
                }
                if method == ScanMethod::Mc {
                    v["std_error"] = json!(r.std_error);
                }
                v
            })
            .collect();
        let rec = Record::new("scan", serde_json::to_value(&a)?)
            .set(
                "method",
                if method == ScanMethod::Exact {
                    "exact"
                } else {
                    "monte-carlo"
                },
            )
            .set("exponent", table.exponent)
            .set("rows", rows)
            .set("slope", table.slope)
            .set("warnings", table.warnings.clone());
        return Ok(ctx.finish(rec).to_json());
    }
    let mut out = String::from(if method == ScanMethod::Mc {
        "N,MoM,ratio,slope,std_error"
    } else {
        "N,MoM,ratio,slope"
    });
    for r in &table.rows {
        let mom = r
            .exact
            .as_ref()
            .and_then(ToPrimitive::to_f64)
            .filter(|v| v.is_finite())
            .unwrap_or(r.mom);
        out.push_str(&format!(
            "\n{},{},{},{}",
            r.n,
            mom,
            r.ratio,
            csv_num(r.running_slope)
        ));
        if method == ScanMethod::Mc {
            out.push_str(&format!(",{}", csv_num(r.std_error)));
        }
    }
    Ok(out)
}

fn cmd_jack(a: JackArgs, ctx: &Ctx) -> Result<String> {
    let parts: Vec<u32> = required(&a.lambda, "lambda")?
        .split(',')
        .map(|p| p.trim().parse().with_context(|| format!("bad part {p:?}")))
        .collect::<Result<_>>()?;
    let lambda = Signature::new(parts)?;
    let points: Vec<Complex64> = required(&a.points, "points")?
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<Complex64>()
                .map_err(|e| anyhow!("bad point {p:?}: {e}"))
        })
        .collect::<Result<_>>()?;
    let delta = beta_arg(&a.beta)?.float_param()?;
    let v = jack_eval(&lambda, &points, &delta)?;
    let rec = Record::new("jack", serde_json::to_value(&a)?)
        .set("value", json!({ "re": v.re, "im": v.im }));
    Ok(ctx.finish(rec).to_json())
}

fn cmd_sample(mut a: SampleArgs, ctx: &Ctx) -> Result<String> {
    let n = required(&a.n, "N")?;
    let beta = beta_arg(&a.beta)?.value();
    a.mc.fill_chains(1000);
    let cfg = a.mc.mc_config();
    let (samples, diag) = sample_cbe(n, beta, &cfg)?;
    for w in &diag.warnings {
        eprintln!("warning: {w}");
    }
    if ctx.format == Some(Format::Csv) {
        let header: Vec<String> = (1..=n).map(|j| format!("theta_{j}")).collect();
        let mut out = format!("sample,{}", header.join(","));
        for (i, s) in samples.iter().enumerate() {
            let row: Vec<String> = s.angles.iter().map(f64::to_string).collect();
            out.push_str(&format!("\n{i},{}", row.join(",")));
        }
        return Ok(out);
    }
    let angles: Vec<&Vec<f64>> = samples.iter().map(|s| &s.angles).collect();
    let rec = Record::new("sample", serde_json::to_value(&a)?)
        .set("samples", json!(angles))
        .set("seed", cfg.seed)
        .set(
            "diagnostics",
            json!({ "acceptance": diag.acceptance, "warnings": diag.warnings }),
        );
    Ok(ctx.finish(rec).to_json())
}

fn cmd_singularity(mut a: SingularityArgs, ctx: &Ctx) -> Result<String> {
    let (k, q) = (required(&a.k, "k")?, required(&a.q, "q")?);
    let kind = *a.point.get_or_insert(PointKind::Extremal);
    let point = match kind {
        PointKind::Extremal => SingularPoint::extremal(k, q)?,
        PointKind::Star if k == 2 => SingularPoint::star(q),
        PointKind::Star => bail!("the star point belongs to the k = 2 single-row integral"),
    };
    let order = singularity_order(&point)?;
    let dim = point.dimension();
    let mut rec = Record::new("singularity", serde_json::to_value(&a)?)
        .set("order", order.to_string())
        .set("order_constant", rational_json(&order.a))
        .set("order_inverse_beta", rational_json(&order.b))
        .set("dimension", dim)
        .set_opt("threshold", order.threshold(dim).map(|t| rational_json(&t)));
    if let Some(b) = &a.beta {
        let delta = Beta::parse(b)?.float_param()?;
        rec = rec.set("value", rational_json(&order.at(&delta.beta())?));
    }
    Ok(ctx.finish(rec).to_json())
}

fn cmd_finiteness(a: FinitenessArgs, ctx: &Ctx) -> Result<String> {
    let (k, q) = (required(&a.k, "k")?, required(&a.q, "q")?);
    if k == 0 || q == 0 {
        bail!("k and q must be at least 1");
    }
    let beta = a
        .beta
        .as_deref()
        .map(Beta::parse)
        .transpose()?
        .map(|b| b.value());
    let report = finiteness_domain(k, q, beta);
    let rec = Record::new("finiteness", serde_json::to_value(&a)?)
        .set("label", report.label())
        .set("report", serde_json::to_value(&report)?);
    Ok(ctx.finish(rec).to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_n_list("20..60:20").unwrap(), vec![20, 40, 60]);
        assert_eq!(parse_n_list("3, 5,8").unwrap(), vec![3, 5, 8]);
        assert!(parse_n_list("").is_err());
        assert!(parse_n_list("1..4:0").is_err());
    }

    #[test]
    fn beta_kinds() {
        assert!(matches!(Beta::parse("7/3").unwrap(), Beta::Exact(_)));
        assert!(matches!(Beta::parse("2").unwrap(), Beta::Exact(_)));
        assert!(matches!(Beta::parse("2.5").unwrap(), Beta::Float(_)));
        assert!(Beta::parse("2.5").unwrap().exact("x").is_err());
        assert!(Beta::parse("0").is_err());
        assert!(Beta::parse("-1/2").is_err());
    }

    #[test]
    fn k1_exact_tags() {
        let b = Beta::parse("2").unwrap();
        assert_eq!(
            coeff_k1_exact(2, &b).unwrap(),
            BigRational::new(1.into(), 12.into())
        );
        assert_eq!(
            coeff_k1_exact(1, &Beta::parse("1").unwrap()).unwrap(),
            BigRational::new(1.into(), 6.into())
        );
        assert!(coeff_k1_exact(1, &Beta::parse("4").unwrap()).is_none());
    }

    #[test]
    fn flags_override_config() {
        let cfg = json!({ "N": 3, "k": 2, "q": 1, "beta": 2, "method": "quadrature" });
        let flags = MomArgs {
            n: Some(5),
            ..Default::default()
        };
        let r: MomArgs = resolve(&flags, Some(&cfg)).unwrap();
        assert_eq!(r.n, Some(5));
        assert_eq!(r.k, Some(2));
        assert_eq!(r.beta.as_deref(), Some("2"));
        assert_eq!(r.method, Some(MomMethod::Quadrature));
    }

    #[test]
    fn counts_accept_scientific() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("250").unwrap(), 250);
        assert!(parse_count("1.5").is_err());
    }
}
