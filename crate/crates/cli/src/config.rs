//! Flat `key = value` run configuration files.
//!
//! One assignment per line, `#` starts a comment, unknown keys are rejected.
//! Defaults mirror the library defaults and the resolved spec is echoed into
//! the JSON metadata of every output, so runs are self-describing.

use std::collections::BTreeMap;

use mdsurv::adaptive::PenaltyConfig;
use mdsurv::dependence::Ar1GammaConfig;
use mdsurv::estimator::{EstimatorConfig, Variant};
use mdsurv::risk::{Dependence, ExperimentSpec, KMode};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "target",
    "error",
    "dependence",
    "m",
    "lambda",
    "rho",
    "n",
    "replications",
    "seed",
    "chi",
    "use_theoretical_chi",
    "variant",
    "k",
    "t_step",
    "x_min",
    "x_max",
    "n_x",
    "k_max",
    "out",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config `{path}`: {e}")))?;
        Self::parse(&text)
    }

    /// Command-line overrides win over file values.
    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn out(&self) -> Option<&str> {
        self.get("out")
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::usage(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn dependence(&self) -> Result<Dependence, CliError> {
        match self.get("dependence").unwrap_or("iid") {
            "iid" => Ok(Dependence::Iid),
            "ar1_gamma" => {
                let m: u32 = self.parsed("m")?.unwrap_or(1);
                let lambda: f64 = self.parsed("lambda")?.unwrap_or(1.0);
                let rho: f64 = self.parsed("rho")?.unwrap_or(0.0);
                let cfg = Ar1GammaConfig::new(m, lambda, rho)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                Ok(Dependence::Ar1Gamma(cfg))
            }
            other => Err(CliError::usage(format!(
                "config key `dependence`: expected iid or ar1_gamma, got `{other}`"
            ))),
        }
    }

    pub fn estimator(&self) -> Result<EstimatorConfig, CliError> {
        let mut cfg = EstimatorConfig::default();
        if let Some(v) = self.parsed("t_step")? {
            cfg.t_step = v;
        }
        if let Some(v) = self.parsed("x_min")? {
            cfg.x_min = v;
        }
        if let Some(v) = self.parsed("x_max")? {
            cfg.x_max = Some(v);
        }
        if let Some(v) = self.parsed("n_x")? {
            cfg.n_x = v;
        }
        if let Some(v) = self.parsed("k_max")? {
            cfg.k_max = Some(v);
        }
        Ok(cfg)
    }

    pub fn penalty(&self) -> Result<PenaltyConfig, CliError> {
        Ok(PenaltyConfig {
            chi: self.parsed("chi")?.unwrap_or(2.0),
            use_theoretical: self.parsed("use_theoretical_chi")?.unwrap_or(false),
        })
    }

    pub fn variant(&self) -> Result<Variant, CliError> {
        parse_variant(self.get("variant").unwrap_or("clipped"))
    }

    pub fn k_mode(&self) -> Result<KMode, CliError> {
        parse_k_mode(self.get("k").unwrap_or("adaptive"))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(self.parsed("seed")?.unwrap_or(1))
    }

    pub fn experiment_spec(&self) -> Result<ExperimentSpec, CliError> {
        let target_key = self
            .get("target")
            .ok_or_else(|| CliError::usage("config key `target` is required"))?
            .to_string();
        let error_key = self
            .get("error")
            .ok_or_else(|| CliError::usage("config key `error` is required"))?
            .to_string();
        let spec = ExperimentSpec {
            target_key,
            error_key,
            dependence: self.dependence()?,
            n: self
                .parsed("n")?
                .ok_or_else(|| CliError::usage("config key `n` is required"))?,
            replications: self.parsed("replications")?.unwrap_or(200),
            seed: self.seed()?,
            estimator: self.estimator()?,
            penalty: self.penalty()?,
            variant: self.variant()?,
            k_mode: self.k_mode()?,
        };
        spec.validate().map_err(CliError::from_core)?;
        Ok(spec)
    }
}

pub fn parse_variant(v: &str) -> Result<Variant, CliError> {
    match v {
        "raw" => Ok(Variant::Raw),
        "clipped" => Ok(Variant::Clipped),
        "heuristic" => Ok(Variant::Heuristic),
        other => Err(CliError::usage(format!(
            "variant must be raw|clipped|heuristic, got `{other}`"
        ))),
    }
}

pub fn parse_k_mode(v: &str) -> Result<KMode, CliError> {
    match v {
        "adaptive" => Ok(KMode::Adaptive),
        "oracle" => Ok(KMode::OracleGrid),
        other => other.parse::<usize>().map(KMode::Fixed).map_err(|_| {
            CliError::usage(format!("k must be an integer or `adaptive`, got `{other}`"))
        }),
    }
}
