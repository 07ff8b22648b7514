mod config;
mod report;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{config_error, load_file, merge, one_or_many, required, ConfigError};
use report::{Format, Report};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use weyl_lab::covering::{check_cover, cover_level, dimension_threshold, CoverParams};
use weyl_lab::exponents::{exponent_table, s_of};
use weyl_lab::measures::{decay_fit_with, DecayOptions};
use weyl_lab::moments::{
    bound_exponent, diagonal_term, growth_fit, lemma_l2_sum, moment_mc, moment_quadrature, short_interval_l2_sum,
    BoundParams, Theorem,
};
use weyl_lab::rng::DEFAULT_SEED;
use weyl_lab::suite::{run_suite, SuiteKind};
use weyl_lab::vinogradov::{count, count_table, CountValue};
use weyl_lab::weyl::{completion_sum, set_incremental_corruption, weyl_sum, Method};
use weyl_lab::{Complex64, LabError, MeasureSpec, Stream, TorusPoint, WeightSequence};

/// Numerical laboratory for restricted Weyl sums.
#[derive(Parser, Debug)]
#[command(name = "weyl-lab", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Global {
    /// JSON file with the same keys as the flags; flags override it.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Master seed of every random stream.
    #[arg(long, global = true, value_parser = parse_seed)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Worker threads (also WEYL_LAB_THREADS).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<Format>,
    /// Test hook: perturb the incremental kernel (also WEYL_LAB_CORRUPT_KERNEL=1).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    corrupt_kernel: Option<bool>,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|e| format!("invalid seed '{s}': {e}"))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weyl sum S(x; N) (and optionally the completion sum W).
    Sum(SumArgs),
    /// Mean value int |S(x; N)|^rho d mu(x).
    Moment(MomentArgs),
    /// Fourier transform of a measure at one frequency.
    Fourier(FourierArgs),
    /// Fitted Fourier decay exponent over dyadic shells.
    Decay(DecayArgs),
    /// Exact Vinogradov solution counts.
    Vinogradov(VinogradovArgs),
    /// Exponent and dimension formulas.
    Exponents(ExponentArgs),
    /// Large-value covers over dyadic N.
    Cover(CoverArgs),
    /// Lattice L2 sums of moment-curve transforms.
    L2check(L2Args),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SumArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    /// Point coordinates, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<Vec<f64>>,
    /// One or more sum lengths.
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    n: Option<Vec<u64>>,
    /// direct or incremental.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    /// unit, alternating, log:P or const:RE[:IM].
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<String>,
    /// Also report the completion sum W.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    completion: Option<bool>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentArgs {
    /// lebesgue:D, sphere:D, moment:D[:A:B] or segment:W1,W2,...
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    n: Option<Vec<u64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    /// mc or quadrature.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<String>,
    /// Add a bound column: mvt, mvt-higher-box, mvt-higher, mvt-mom, trivial, mvt-l.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theorem: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FourierArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shells: Option<u32>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// Only frequencies orthogonal to a segment.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perpendicular: Option<bool>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VinogradovArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<u32>,
    /// Number of variables per side; defaults to d(d+1)/2.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<u32>,
    #[arg(long = "N")]
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    /// Frequency; omit for the full table.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<Vec<i64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<String>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<u32>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<String>,
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    n: Option<Vec<u64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<String>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct L2Args {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<u32>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    n: Option<Vec<u64>>,
    /// The interval [1/2, 1/2 + 1/(2d)] instead of [delta, 1/2].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    short: Option<bool>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyArgs {
    /// fast or full.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    suite: Option<String>,
    /// Restrict to these criterion numbers.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    criteria: Option<Vec<u32>>,
}

struct Ctx {
    seed: u64,
    /// Globals that belong in the report (not threads or paths).
    echo: Map<String, Value>,
}

impl Ctx {
    fn stream(&self, label: &str) -> Stream {
        Stream::for_task(self.seed, label)
    }
}

fn parse_weights(s: Option<&str>) -> Result<WeightSequence> {
    let s = s.unwrap_or("unit");
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| -> Result<f64> {
        p.parse()
            .map_err(|_| config_error(format!("weights: cannot parse number '{p}' in '{s}'")))
    };
    Ok(match parts.as_slice() {
        ["unit"] => WeightSequence::unit(),
        ["alternating"] => WeightSequence::alternating(),
        ["log", p] => WeightSequence::log_power(num(p)?)?,
        ["const", re] => WeightSequence::constant(Complex64::new(num(re)?, 0.0), 0.0)?,
        ["const", re, im] => WeightSequence::constant(Complex64::new(num(re)?, num(im)?), 0.0)?,
        _ => {
            return Err(config_error(format!(
                "weights: expected unit, alternating, log:P or const:RE[:IM], got '{s}'"
            )))
        }
    })
}

fn parse_measure(s: &Option<String>) -> Result<MeasureSpec> {
    let s = required(s, "measure")?;
    s.parse::<MeasureSpec>()
        .map_err(|e| config_error(format!("measure: {e}")))
}

fn num(x: f64) -> Value {
    json!(x)
}

fn config_echo<T: Serialize>(args: &T, ctx: &Ctx) -> Map<String, Value> {
    let mut m = match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    m.extend(ctx.echo.clone());
    m
}

fn cmd_sum(a: &SumArgs, ctx: &Ctx) -> Result<Report> {
    let x = TorusPoint::new(required(&a.x, "x")?)?;
    if let Some(d) = a.d {
        if d != x.dim() {
            return Err(config_error(format!("d = {d} but x has {} coordinates", x.dim())));
        }
    }
    let method = match a.method.as_deref().unwrap_or("incremental") {
        "direct" => Method::Direct,
        "incremental" => Method::Incremental,
        other => return Err(config_error(format!("method: expected direct or incremental, got '{other}'"))),
    };
    let w = parse_weights(a.weights.as_deref())?;
    let completion = a.completion.unwrap_or(false);
    let mut cols = vec!["N", "re", "im", "abs", "method", "phase_error_budget"];
    if completion {
        cols.push("completion");
    }
    let mut r = Report::new("sum", &cols);
    for &n in &required(&a.n, "N")? {
        let s = weyl_sum(&x, n, &w, method)?;
        let mut row = vec![
            json!(n),
            num(s.value.re),
            num(s.value.im),
            num(s.value.norm()),
            json!(a.method.as_deref().unwrap_or("incremental")),
            num(s.phase_error_budget),
        ];
        if completion {
            row.push(num(completion_sum(&x, n, &w)?));
        }
        r.push(row);
    }
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_moment(a: &MomentArgs, ctx: &Ctx) -> Result<Report> {
    let m = parse_measure(&a.measure)?;
    let rho = a.rho.unwrap_or(2.0);
    let ns = required(&a.n, "N")?;
    let w = parse_weights(a.weights.as_deref())?;
    let samples = a.samples.unwrap_or(10_000);
    let quadrature = match a.method.as_deref().unwrap_or("mc") {
        "mc" => false,
        "quadrature" => true,
        other => return Err(config_error(format!("method: expected mc or quadrature, got '{other}'"))),
    };
    let bound = match &a.theorem {
        Some(t) => {
            let th: Theorem = t.parse().map_err(|e| config_error(format!("theorem: {e}")))?;
            let p = BoundParams {
                d: m.ambient_dim() as u32,
                sigma: a.sigma.unwrap_or(0.0),
                s: a.s.unwrap_or(rho / 2.0),
                delta: a.delta.unwrap_or(0.5),
            };
            Some((bound_exponent(th, p)?, p.delta))
        }
        None => None,
    };
    let mut r = Report::new("moment", &["N", "value", "stderr", "samples", "diagonal", "bound"]);
    let mut pts = Vec::new();
    for &n in &ns {
        let e = if quadrature {
            moment_quadrature(&m, rho, n, &w, a.resolution.unwrap_or(0))?
        } else {
            moment_mc(&m, rho, n, &w, samples, &ctx.stream(&format!("moment-{n}")))?
        };
        pts.push((n as f64, e.value));
        let b = bound.map(|((pn, pd), delta)| num((n as f64).powf(pn) * delta.powf(pd)));
        r.push(vec![
            json!(n),
            num(e.value),
            num(e.stderr),
            json!(e.sample_count),
            num(diagonal_term(&m, &w, n)),
            b.unwrap_or(Value::Null),
        ]);
    }
    if pts.len() >= 3 {
        let f = growth_fit(&pts)?;
        r.note("slope", f.slope);
        r.note("intercept", f.intercept);
        r.note("residual", f.residual);
    }
    if let Some(((pn, pd), _)) = bound {
        r.note("bound_exponent_N", pn);
        r.note("bound_exponent_delta", pd);
    }
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_fourier(a: &FourierArgs, ctx: &Ctx) -> Result<Report> {
    let m = parse_measure(&a.measure)?;
    let xi = required(&a.xi, "xi")?;
    let z = m.fourier_transform(&xi, a.resolution.unwrap_or(0))?;
    let mut r = Report::new("fourier", &["xi", "re", "im", "abs"]);
    let label: Vec<String> = xi.iter().map(|v| v.to_string()).collect();
    r.push(vec![json!(label.join(" ")), num(z.re), num(z.im), num(z.norm())]);
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_decay(a: &DecayArgs, ctx: &Ctx) -> Result<Report> {
    let m = parse_measure(&a.measure)?;
    let opts = DecayOptions {
        perpendicular_only: a.perpendicular.unwrap_or(false),
    };
    let mut s = ctx.stream("decay");
    let fit = decay_fit_with(&m, a.shells.unwrap_or(8), a.samples.unwrap_or(16), opts, &mut s)?;
    let mut r = Report::new("decay", &["k", "max_abs", "frequencies"]);
    for sh in &fit.shells {
        r.push(vec![json!(sh.k), num(sh.max_abs), json!(sh.frequencies)]);
    }
    r.note("sigma", fit.sigma);
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn count_cells(c: &CountValue) -> Vec<Value> {
    match c {
        CountValue::Exact(v) => vec![json!(v.to_string())],
        CountValue::Weighted(z) => vec![json!(format!("{}{:+}i", z.re, z.im))],
    }
}

fn cmd_vinogradov(a: &VinogradovArgs, ctx: &Ctx) -> Result<Report> {
    let d = a.d.unwrap_or(2);
    let s = match a.s {
        Some(s) => s,
        None => s_of(f64::from(d))? as u32,
    };
    let n = required(&a.n, "N")?;
    let w = parse_weights(a.weights.as_deref())?;
    let mut cols: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).collect();
    cols.push("count".into());
    let col_refs: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
    let mut r = Report::new("vinogradov", &col_refs);
    let push = |r: &mut Report, xi: &[i64], c: &CountValue| {
        let mut row: Vec<Value> = xi.iter().map(|v| json!(v)).collect();
        row.extend(count_cells(c));
        r.push(row);
    };
    match &a.xi {
        Some(xi) => {
            let c = count(d, s, n, xi, &w)?;
            push(&mut r, xi, &c.count);
        }
        None => {
            let t = count_table(d, s, n, &w)?;
            r.note("entries", t.len());
            for (xi, c) in &t {
                push(&mut r, xi, &c.count);
            }
        }
    }
    r.note("s", s);
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_exponents(a: &ExponentArgs, ctx: &Ctx) -> Result<Report> {
    let d = required(&a.d, "d")?;
    let alpha = required(&a.alpha, "alpha")?;
    let sigma = a.sigma.unwrap_or(1.0 / f64::from(d));
    let table = exponent_table(d, alpha, sigma, a.rho.unwrap_or(2.0), a.theta.unwrap_or(0.5))?;
    let mut r = Report::new("exponents", &["name", "value", "minimizer_k", "vacuous", "params"]);
    for e in &table {
        let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        r.push(vec![
            json!(e.name),
            num(e.value),
            e.minimizer_k.map_or(Value::Null, |k| json!(k)),
            json!(e.vacuous),
            json!(params.join(" ")),
        ]);
    }
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_cover(a: &CoverArgs, ctx: &Ctx) -> Result<Report> {
    let m = parse_measure(&Some(a.measure.clone().unwrap_or_else(|| "segment:1,0".into())))?;
    let ns = a.n.clone().unwrap_or_else(|| (6..=10).map(|i| 1u64 << i).collect());
    let p = CoverParams {
        alpha: a.alpha.unwrap_or(0.7),
        epsilon: a.epsilon.unwrap_or(weyl_lab::covering::DEFAULT_EPSILON),
        rho: a.rho.unwrap_or(2.0),
        theta: a.theta.unwrap_or(0.5),
        resolution: a.resolution.unwrap_or(0),
    };
    let w = parse_weights(a.weights.as_deref())?;
    let d = m.ambient_dim();
    let mut cols = vec!["N".to_string()];
    cols.extend((1..=d).map(|j| format!("center_{j}")));
    cols.extend((1..=d).map(|j| format!("half_side_{j}")));
    cols.push("W".into());
    let col_refs: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
    let mut r = Report::new("cover", &col_refs);
    let mut levels = Vec::new();
    let mut reports = Vec::new();
    for &n in &ns {
        let (rep, pts) = cover_level(&m, n, &p, &w)?;
        let chk = check_cover(&rep, &pts);
        for (rect, wv) in rep.rectangles.iter().zip(&rep.centre_values) {
            let mut row = vec![json!(n)];
            row.extend(rect.center().iter().map(|c| num(*c)));
            row.extend(rect.half_sides().iter().map(|z| num(*z)));
            row.push(num(*wv));
            r.push(row);
        }
        levels.push(json!({
            "N": n,
            "L": rep.l,
            "points": rep.points,
            "zeta": rep.zeta,
            "bound": rep.bound,
            "normalized": rep.normalized,
            "disjoint": chk.disjoint,
            "covered": chk.covered,
        }));
        reports.push(rep);
    }
    r.note("levels", levels);
    if reports.len() >= 4 {
        let ks: Vec<usize> = (0..d).collect();
        match dimension_threshold(&reports, &ks) {
            Ok(t) => r.note("dimension_threshold", t),
            Err(e) => r.note("dimension_threshold", format!("unavailable: {e}")),
        }
    }
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_l2(a: &L2Args, ctx: &Ctx) -> Result<Report> {
    let d = a.d.unwrap_or(2);
    let delta = a.delta.unwrap_or(0.3);
    let ns = a.n.clone().unwrap_or_else(|| vec![4, 8, 16, 32]);
    let res = a.resolution.unwrap_or(0);
    let mut r = Report::new("l2check", &["N", "a", "b", "sum", "reference", "ratio"]);
    let mut worst: f64 = 0.0;
    for &n in &ns {
        let l = if a.short.unwrap_or(false) {
            short_interval_l2_sum(d, n, res)?
        } else {
            lemma_l2_sum(d, delta, n, res)?
        };
        worst = worst.max(l.ratio);
        r.push(vec![
            json!(n),
            num(l.interval.0),
            num(l.interval.1),
            num(l.sum),
            num(l.reference),
            num(l.ratio),
        ]);
    }
    r.note("max_ratio", worst);
    r.config = config_echo(a, ctx);
    Ok(r)
}

fn cmd_verify(a: &VerifyArgs, ctx: &Ctx) -> Result<(Report, ExitCode)> {
    let kind: SuiteKind = a
        .suite
        .as_deref()
        .unwrap_or("fast")
        .parse()
        .map_err(|e: LabError| config_error(format!("suite: {e}")))?;
    let outcomes = run_suite(kind, a.criteria.as_deref(), ctx.seed);
    let mut r = Report::new("verify", &["id", "name", "passed", "measured", "expected", "slack"]);
    for o in &outcomes {
        println!("{o}");
        r.push(vec![
            json!(o.id),
            json!(o.name),
            json!(o.passed),
            json!(o.measured),
            json!(o.expected),
            o.slack.map_or(Value::Null, num),
        ]);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let capacity = outcomes.iter().any(|o| o.capacity);
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    r.note("failed", failed);
    r.config = config_echo(a, ctx);
    let code = if capacity {
        ExitCode::from(2)
    } else if failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    };
    Ok((r, code))
}

fn env_flag(name: &str) -> bool {
    std::env::var(name).is_ok_and(|v| !matches!(v.trim(), "" | "0" | "false"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.global.config {
        Some(p) => load_file(p)?,
        None => Map::new(),
    };
    let g: Global = merge(&cli.global, &file, true)?;
    let threads = match g.threads {
        Some(t) => Some(t),
        None => match std::env::var("WEYL_LAB_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| config_error(format!("WEYL_LAB_THREADS: expected an integer >= 1, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(config_error("threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    if g.corrupt_kernel.unwrap_or(false) || env_flag("WEYL_LAB_CORRUPT_KERNEL") {
        set_incremental_corruption(true);
    }
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let mut echo = Map::new();
    echo.insert("seed".into(), json!(seed));
    let ctx = Ctx { seed, echo };
    let format = g.format.unwrap_or_default();
    let (report, code) = match &cli.command {
        Command::Sum(a) => (cmd_sum(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Moment(a) => (cmd_moment(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Fourier(a) => (cmd_fourier(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Decay(a) => (cmd_decay(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Vinogradov(a) => (cmd_vinogradov(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Exponents(a) => (cmd_exponents(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Cover(a) => (cmd_cover(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::L2check(a) => (cmd_l2(&merge(a, &file, false)?, &ctx)?, ExitCode::SUCCESS),
        Command::Verify(a) => {
            let (r, code) = cmd_verify(&merge(a, &file, false)?, &ctx)?;
            if g.output.is_none() {
                return Ok(code);
            }
            (r, code)
        }
    };
    let text = report.render(format);
    match &g.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<ConfigError>().is_some();
            let lab = e.downcast_ref::<LabError>();
            match lab {
                Some(l) if l.is_capacity() => ExitCode::from(2),
                Some(LabError::InvalidInput(_) | LabError::UnsupportedDimension(_)) => ExitCode::from(2),
                _ if usage => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    };
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    code
}
