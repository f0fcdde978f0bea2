//! Batch command-line front end: estimation on user data, contaminated
//! sample simulation, Monte Carlo risk runs and full table reproduction.
//! All outputs are machine-readable (CSV plus a JSON metadata sidecar).

// `!(x > 0.0)` doubles as a NaN guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::process::ExitCode;

use mdsurv::adaptive::{select_k, sigma_y_hat, PenaltyConfig};
use mdsurv::estimator::{clip, heuristic_from_raw, spectral_cutoff, EstimatorConfig, Variant};
use mdsurv::models::{error_by_key, sample_contaminated, target_by_key};
use mdsurv::risk::{csv_header, csv_row, run_experiment, table1_specs, table2_specs, KMode};
use mdsurv::sampling::rng_for;
use mdsurv::CoreError;

use config::{parse_k_mode, parse_variant, RunConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const USAGE: &str = "\
mdsurv — survival function estimation under multiplicative measurement errors

USAGE:
    mdsurv estimate --data PATH --error KEY [--k INT|adaptive] [--chi F]
                    [--variant raw|clipped|heuristic] [--x-max F] [--out PATH]
    mdsurv simulate --config PATH | [--target KEY --error KEY --n INT --seed U64] [--out PATH]
    mdsurv mise     --config PATH [--seed U64] [--chi F] [--out PATH]
    mdsurv tables   1|2 [--reps N] [--seed U64] [--chi F] [--out PATH]

GLOBAL FLAGS:
    --threads N     size of the worker pool (default: all cores)

Catalog keys: targets gamma_4_05, weibull_2, beta_4_5_scaled, loggamma_0_4_3
(or parametric gamma:<shape>:<rate>, weibull:<m>, lognormal:<mu>:<lambda>,
loggamma:<mu>:<a>:<lambda>, beta1:<b>); errors unif_0_1, unif_half_3half,
beta_1_2 (and the `noiseless` fixture).
";

/// Usage/config errors exit with 2, numerical failures with 3.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 3,
        }
    }

    fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::G0Violation { .. }
            | CoreError::DegenerateEstimate
            | CoreError::TooManyExclusions { .. } => Self::numerical(e.to_string()),
            other => Self::usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct Flags {
    values: Vec<(String, String)>,
    positional: Vec<String>,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> Result<Self, CliError> {
        let mut values = Vec::new();
        let mut positional = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--") {
                if !allowed.contains(&name) {
                    return Err(CliError::usage(format!(
                        "unknown flag `--{name}`\n\n{USAGE}"
                    )));
                }
                let value = it
                    .next()
                    .ok_or_else(|| CliError::usage(format!("flag `--{name}` needs a value")))?;
                values.push((name.to_string(), value.clone()));
            } else {
                positional.push(arg.clone());
            }
        }
        Ok(Self { values, positional })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, CliError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::usage(format!("flag `--{name}`: cannot parse `{v}`"))),
        }
    }
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::usage(USAGE));
    };
    match command.as_str() {
        "estimate" => cmd_estimate(&args[1..]),
        "simulate" => cmd_simulate(&args[1..]),
        "mise" => cmd_mise(&args[1..]),
        "tables" => cmd_tables(&args[1..]),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::usage(format!(
            "unknown command `{other}`\n\n{USAGE}"
        ))),
    }
}

fn install_thread_pool(flags: &Flags) -> Result<(), CliError> {
    if let Some(threads) = flags.parsed::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::usage(format!("cannot write `{path}`: {e}")))
}

fn sidecar_path(out: &str) -> String {
    format!("{out}.meta.json")
}

/// One positive decimal observation per line (LF or CRLF).
fn read_observations(path: &str) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read `{path}`: {e}")))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| {
            CliError::usage(format!("{path}:{}: not a number: `{line}`", lineno + 1))
        })?;
        if !(value > 0.0) || !value.is_finite() {
            return Err(CliError::usage(format!(
                "{path}:{}: observations must be positive, got {value}",
                lineno + 1
            )));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("{path}: empty sample")));
    }
    Ok(out)
}

fn cmd_estimate(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(
        args,
        &[
            "data", "error", "k", "chi", "variant", "x-max", "out", "threads",
        ],
    )?;
    install_thread_pool(&flags)?;
    let data_path = flags
        .get("data")
        .ok_or_else(|| CliError::usage("estimate needs --data PATH"))?;
    let error_key = flags
        .get("error")
        .ok_or_else(|| CliError::usage("estimate needs --error KEY"))?;
    let error = error_by_key(error_key).map_err(CliError::from_core)?;
    let sample = read_observations(data_path)?;

    let chi = flags.parsed::<f64>("chi")?.unwrap_or(2.0);
    let k_mode = parse_k_mode(flags.get("k").unwrap_or("adaptive"))?;
    let variant = parse_variant(flags.get("variant").unwrap_or("clipped"))?;
    let out = flags.get("out").unwrap_or("estimate.csv");

    let sample_max = sample.iter().cloned().fold(0.0, f64::max);
    let mut ecfg = EstimatorConfig {
        x_max: Some(flags.parsed::<f64>("x-max")?.unwrap_or(2.0 * sample_max)),
        ..EstimatorConfig::default()
    };
    // The cap guards the adaptive search; an explicit --k wins over it.
    if let KMode::Fixed(k) = k_mode {
        ecfg.k_max = Some(k.max(sample.len()));
    }

    let pcfg = PenaltyConfig::with_chi(chi);
    let k_hat = match k_mode {
        KMode::Fixed(k) => k,
        KMode::Adaptive => {
            select_k(&sample, &error, &pcfg, &ecfg)
                .map_err(CliError::from_core)?
                .k_hat
        }
        KMode::OracleGrid => {
            return Err(CliError::usage(
                "oracle mode needs a known target; use `mise` with k = oracle",
            ))
        }
    };

    let raw = spectral_cutoff(&sample, &error, k_hat as f64, &ecfg).map_err(CliError::from_core)?;
    let clipped = clip(&raw);
    let heuristic = if variant == Variant::Heuristic {
        Some(heuristic_from_raw(&raw).map_err(CliError::from_core)?)
    } else {
        None
    };

    let mut csv = String::new();
    if heuristic.is_some() {
        csv.push_str("x,survival_raw,survival_clipped,survival_heuristic\n");
    } else {
        csv.push_str("x,survival_raw,survival_clipped\n");
    }
    for i in 0..raw.xs.len() {
        match &heuristic {
            Some(h) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    raw.xs[i], raw.values[i], clipped.values[i], h.values[i]
                );
            }
            None => {
                let _ = writeln!(csv, "{},{},{}", raw.xs[i], raw.values[i], clipped.values[i]);
            }
        }
    }
    write_file(out, &csv)?;

    let meta = serde_json::json!({
        "n": sample.len(),
        "k_hat": k_hat,
        "chi": chi,
        "sigma_y_hat": sigma_y_hat(&sample).map_err(CliError::from_core)?,
        "config": {
            "data": data_path,
            "error": error_key,
            "k": flags.get("k").unwrap_or("adaptive"),
            "variant": variant.to_string(),
            "estimator": ecfg,
        },
        "version": VERSION,
    });
    write_file(
        &sidecar_path(out),
        &format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )
}

fn cmd_simulate(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(
        args,
        &[
            "config",
            "target",
            "error",
            "n",
            "seed",
            "dependence",
            "m",
            "lambda",
            "rho",
            "out",
            "threads",
        ],
    )?;
    install_thread_pool(&flags)?;
    let mut cfg = match flags.get("config") {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::parse("")?,
    };
    for key in [
        "target",
        "error",
        "n",
        "seed",
        "dependence",
        "m",
        "lambda",
        "rho",
        "out",
    ] {
        if let Some(v) = flags.get(key) {
            cfg.set(key, v.to_string());
        }
    }
    let error_key = cfg
        .get("error")
        .ok_or_else(|| CliError::usage("simulate needs `error`"))?
        .to_string();
    let error = error_by_key(&error_key).map_err(CliError::from_core)?;
    let n: usize = cfg
        .get("n")
        .ok_or_else(|| CliError::usage("simulate needs `n`"))?
        .parse()
        .map_err(|_| CliError::usage("`n` must be an integer"))?;
    let seed = cfg.seed()?;
    let out = cfg.out().unwrap_or("sample.txt").to_string();

    let mut rng = rng_for(seed);
    let (ys, dependence_echo) = match cfg.get("dependence").unwrap_or("iid") {
        "ar1_gamma" => {
            use mdsurv::dependence::{sample_ar1_gamma, Ar1GammaConfig};
            let m: u32 = cfg
                .get("m")
                .unwrap_or("1")
                .parse()
                .map_err(|_| CliError::usage("`m` must be an integer"))?;
            let lambda: f64 = cfg
                .get("lambda")
                .unwrap_or("1")
                .parse()
                .map_err(|_| CliError::usage("`lambda` must be a number"))?;
            let rho: f64 = cfg
                .get("rho")
                .unwrap_or("0")
                .parse()
                .map_err(|_| CliError::usage("`rho` must be a number"))?;
            let ar = Ar1GammaConfig::new(m, lambda, rho).map_err(CliError::from_core)?;
            let xs = sample_ar1_gamma(n, &ar, &mut rng);
            let ys = mdsurv::models::contaminate(&xs, &error, &mut rng);
            (
                ys,
                serde_json::json!({"kind": "ar1_gamma", "m": m, "lambda": lambda, "rho": rho}),
            )
        }
        "iid" => {
            let target_key = cfg
                .get("target")
                .ok_or_else(|| CliError::usage("simulate needs `target` for iid data"))?;
            let target = target_by_key(target_key).map_err(CliError::from_core)?;
            let ys = sample_contaminated(&target, &error, n, &mut rng);
            (ys, serde_json::json!({"kind": "iid", "target": target_key}))
        }
        other => {
            return Err(CliError::usage(format!(
                "dependence must be iid or ar1_gamma, got `{other}`"
            )))
        }
    };

    let mut body = String::new();
    for y in &ys {
        let _ = writeln!(body, "{y}");
    }
    write_file(&out, &body)?;

    let meta = serde_json::json!({
        "n": n,
        "seed": seed,
        "error": error_key,
        "dependence": dependence_echo,
        "version": VERSION,
    });
    write_file(
        &sidecar_path(&out),
        &format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )
}

fn cmd_mise(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["config", "seed", "chi", "out", "threads"])?;
    install_thread_pool(&flags)?;
    let path = flags
        .get("config")
        .ok_or_else(|| CliError::usage("mise needs --config PATH"))?;
    let mut cfg = RunConfig::from_file(path)?;
    for key in ["seed", "chi", "out"] {
        if let Some(v) = flags.get(key) {
            cfg.set(key, v.to_string());
        }
    }
    let spec = cfg.experiment_spec()?;
    let out = cfg.out().unwrap_or("mise.csv").to_string();

    let result = run_experiment(&spec).map_err(CliError::from_core)?;
    let csv = format!("{}\n{}\n", csv_header(), csv_row(&spec, &result));
    write_file(&out, &csv)?;

    let meta = serde_json::json!({
        "spec": spec,
        "result": result,
        "version": VERSION,
    });
    write_file(
        &sidecar_path(&out),
        &format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )
}

fn cmd_tables(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["which", "reps", "seed", "chi", "out", "threads"])?;
    install_thread_pool(&flags)?;
    let which = match (
        flags.get("which"),
        flags.positional.first().map(|s| s.as_str()),
    ) {
        (Some(w), _) => w.to_string(),
        (None, Some(w)) => w.to_string(),
        (None, None) => return Err(CliError::usage("tables needs `1` or `2`")),
    };
    let reps = flags.parsed::<usize>("reps")?.unwrap_or(200);
    let seed = flags.parsed::<u64>("seed")?.unwrap_or(1);
    let chi = flags.parsed::<f64>("chi")?.unwrap_or(2.0);
    let default_out = format!("table{which}.csv");
    let out = flags.get("out").unwrap_or(&default_out).to_string();

    let specs = match which.as_str() {
        "1" => table1_specs(reps, seed, chi),
        "2" => table2_specs(reps, seed, chi),
        other => {
            return Err(CliError::usage(format!(
                "tables needs 1 or 2, got `{other}`"
            )))
        }
    };

    let mut csv = String::from(csv_header());
    csv.push('\n');
    let mut meta_rows = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let result = run_experiment(spec).map_err(CliError::from_core)?;
        eprintln!(
            "cell {}/{}: {} n={} done ({} replications)",
            i + 1,
            specs.len(),
            spec.target_key,
            spec.n,
            spec.replications
        );
        csv.push_str(&csv_row(spec, &result));
        csv.push('\n');
        meta_rows.push(serde_json::json!({"spec": spec, "result": result}));
    }
    write_file(&out, &csv)?;
    let meta = serde_json::json!({
        "table": which,
        "rows": meta_rows,
        "version": VERSION,
    });
    write_file(
        &sidecar_path(&out),
        &format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()),
    )
}
