//! Catalog of target densities (with survival functions, samplers and
//! closed-form Mellin transforms) and error densities (with samplers,
//! closed-form `M_{3/2}[g]` and decay exponent `γ`).
//!
//! Development-point conventions: densities are transformed at `c = 3/2`,
//! survival functions at `c = 1/2`, linked by the survival identity
//! `M_{1/2}[S](t) = (1/2+it)^{-1} M_{3/2}[f](t)`.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::QuadratureConfig;
use crate::sampling::{self, SimRng};
use crate::special::{complex_log_gamma, erfc, ln_gamma, reg_beta, reg_gamma_upper};

/// Parametric family of a target distribution on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetFamily {
    /// Gamma(shape, rate): `f(x) = rate^shape x^{shape-1} e^{-rate·x} / Γ(shape)`.
    Gamma { shape: f64, rate: f64 },
    /// Standard Weibull(shape): `f(x) = m x^{m-1} e^{-x^m}`, `S(x) = e^{-x^m}`.
    Weibull { shape: f64 },
    /// Scaled Beta(4,5) on (0,2): `f(x) = 140 (x/2)³ (1-x/2)⁴`.
    ScaledBeta45,
    /// Scaled Log-Gamma: `f(x) = λ^a e^{λμ}/Γ(a) · x^{-λ-1} (log x - μ)^{a-1}`
    /// on `(e^μ, ∞)`; requires `λ > 1/2` so the transform at `c = 3/2` exists.
    ScaledLogGamma { mu: f64, a: f64, lambda: f64 },
    /// Log-normal(μ, λ): `log X ~ N(μ, λ²)`.
    LogNormal { mu: f64, lambda: f64 },
    /// Beta(1, b): `f(x) = b (1-x)^{b-1}` on (0,1).
    BetaOne { b: u32 },
}

/// A ground-truth model: density, survival function, closed-form Mellin
/// transforms and a sampler. Used by the simulation harness only; the
/// estimator itself never sees the target.
#[derive(Debug, Clone)]
pub struct TargetModel {
    name: String,
    family: TargetFamily,
    /// 1 - 1e-4 quantile: `S(x_max_eff) <= 1e-4`.
    x_max_eff: f64,
}

impl TargetModel {
    pub fn new(name: impl Into<String>, family: TargetFamily) -> Result<Self> {
        validate_family(&family)?;
        let mut model = Self {
            name: name.into(),
            family,
            x_max_eff: 0.0,
        };
        model.x_max_eff = bisect_survival(&model, 1e-4);
        let q = model.oracle_quad();
        let mass = q.integrate(|x| model.density(x));
        if (mass - 1.0).abs() > 1e-8 {
            return Err(CoreError::InvalidConfig(format!(
                "density of {} integrates to {mass}, not 1",
                model.name
            )));
        }
        Ok(model)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(
            format!("gamma_{shape}_{rate}"),
            TargetFamily::Gamma { shape, rate },
        )
    }

    pub fn weibull(shape: f64) -> Result<Self> {
        Self::new(format!("weibull_{shape}"), TargetFamily::Weibull { shape })
    }

    pub fn log_normal(mu: f64, lambda: f64) -> Result<Self> {
        Self::new(
            format!("lognormal_{mu}_{lambda}"),
            TargetFamily::LogNormal { mu, lambda },
        )
    }

    pub fn scaled_log_gamma(mu: f64, a: f64, lambda: f64) -> Result<Self> {
        Self::new(
            format!("loggamma_{mu}_{a}_{lambda}"),
            TargetFamily::ScaledLogGamma { mu, a, lambda },
        )
    }

    pub fn beta_one(b: u32) -> Result<Self> {
        Self::new(format!("beta_1_{b}"), TargetFamily::BetaOne { b })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> TargetFamily {
        self.family
    }

    pub fn x_max_eff(&self) -> f64 {
        self.x_max_eff
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.family {
            TargetFamily::Gamma { shape, rate } => {
                ((shape - 1.0) * x.ln() - rate * x + shape * rate.ln() - ln_gamma(shape)).exp()
            }
            TargetFamily::Weibull { shape } => shape * x.powf(shape - 1.0) * (-x.powf(shape)).exp(),
            TargetFamily::ScaledBeta45 => {
                if x >= 2.0 {
                    0.0
                } else {
                    let u = 0.5 * x;
                    140.0 * u.powi(3) * (1.0 - u).powi(4)
                }
            }
            TargetFamily::ScaledLogGamma { mu, a, lambda } => {
                if x <= mu.exp() {
                    0.0
                } else {
                    (a * lambda.ln() + lambda * mu - ln_gamma(a) - (lambda + 1.0) * x.ln()
                        + (a - 1.0) * (x.ln() - mu).ln())
                    .exp()
                }
            }
            TargetFamily::LogNormal { mu, lambda } => {
                let z = (x.ln() - mu) / lambda;
                (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * lambda * x)
            }
            TargetFamily::BetaOne { b } => {
                // Closed at x = 1 so quadrature nodes on the boundary see the
                // one-sided limit (matters only for b = 1).
                if x > 1.0 {
                    0.0
                } else {
                    b as f64 * (1.0 - x).powi(b as i32 - 1)
                }
            }
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self.family {
            TargetFamily::Gamma { shape, rate } => reg_gamma_upper(shape, rate * x),
            TargetFamily::Weibull { shape } => (-x.powf(shape)).exp(),
            TargetFamily::ScaledBeta45 => {
                if x >= 2.0 {
                    0.0
                } else {
                    1.0 - reg_beta(4.0, 5.0, 0.5 * x)
                }
            }
            TargetFamily::ScaledLogGamma { mu, a, lambda } => {
                if x <= mu.exp() {
                    1.0
                } else {
                    reg_gamma_upper(a, lambda * (x.ln() - mu))
                }
            }
            TargetFamily::LogNormal { mu, lambda } => {
                0.5 * erfc((x.ln() - mu) / (lambda * std::f64::consts::SQRT_2))
            }
            TargetFamily::BetaOne { b } => {
                if x >= 1.0 {
                    0.0
                } else {
                    (1.0 - x).powi(b as i32)
                }
            }
        }
    }

    /// Closed-form `M_{3/2}[f](t)`.
    pub fn mellin_f32(&self, t: f64) -> Complex64 {
        let z = Complex64::new(0.5, t); // c - 1 + it at c = 3/2
        match self.family {
            TargetFamily::Gamma { shape, rate } => {
                let lg = complex_log_gamma(z + shape).expect("argument in right half plane");
                (lg - ln_gamma(shape) - z * rate.ln()).exp()
            }
            TargetFamily::Weibull { shape } => {
                let w = z / shape;
                let lg = complex_log_gamma(w).expect("argument in right half plane");
                w * lg.exp()
            }
            TargetFamily::ScaledBeta45 => {
                // 280 · 2^z · B(z+4, 5) = 6720 · 2^z · Γ(z+4) / Γ(z+9)
                let num = complex_log_gamma(z + 4.0).expect("right half plane");
                let den = complex_log_gamma(z + 9.0).expect("right half plane");
                6720.0 * (z * std::f64::consts::LN_2 + num - den).exp()
            }
            TargetFamily::ScaledLogGamma { mu, a, lambda } => {
                // λ^a e^{μz} (λ - z)^{-a}; Re(λ - z) = λ - 1/2 > 0.
                let base = Complex64::new(lambda, 0.0) - z;
                (a * lambda.ln() + mu * z - a * base.ln()).exp()
            }
            TargetFamily::LogNormal { mu, lambda } => {
                (mu * z + 0.5 * lambda * lambda * z * z).exp()
            }
            TargetFamily::BetaOne { b } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for j in 1..=b {
                    acc *= j as f64 / (z + j as f64);
                }
                acc
            }
        }
    }

    /// Closed-form `M_{1/2}[S](t) = (1/2 + it)^{-1} M_{3/2}[f](t)`.
    pub fn mellin_s12(&self, t: f64) -> Complex64 {
        self.mellin_f32(t) / Complex64::new(0.5, t)
    }

    /// `n` i.i.d. draws, deterministic given the generator state.
    pub fn sample(&self, rng: &mut SimRng, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.sample_one(rng));
        }
        out
    }

    pub fn sample_one(&self, rng: &mut SimRng) -> f64 {
        match self.family {
            TargetFamily::Gamma { shape, rate } => sampling::gamma(rng, shape, rate),
            TargetFamily::Weibull { shape } => (-sampling::open_unit(rng).ln()).powf(1.0 / shape),
            TargetFamily::ScaledBeta45 => 2.0 * sampling::beta(rng, 4.0, 5.0),
            TargetFamily::ScaledLogGamma { mu, a, lambda } => {
                (mu + sampling::gamma(rng, a, lambda)).exp()
            }
            TargetFamily::LogNormal { mu, lambda } => {
                (mu + lambda * sampling::standard_normal(rng)).exp()
            }
            TargetFamily::BetaOne { b } => 1.0 - sampling::open_unit(rng).powf(1.0 / b as f64),
        }
    }

    /// Node placement for the numerical Mellin oracle of this density. The
    /// endpoints are set so the ignored head mass `∫_0^{x_min} f` and tail of
    /// `∫ x^{1/2} f` are below ~1e-10; finite supports end exactly at the
    /// support boundary.
    pub fn oracle_quad(&self) -> QuadratureConfig {
        let (x_min, x_max, n_x) = match self.family {
            // Head mass ~ (rate·x)^shape near 0.
            TargetFamily::Gamma { shape, rate } => (
                1e-12f64.powf(1.0 / shape.min(1.0)) / rate,
                1.2 * bisect_survival(self, 1e-13),
                150_000,
            ),
            // Head mass ~ x^shape near 0.
            TargetFamily::Weibull { shape } => (
                1e-12f64.powf(1.0 / shape.min(1.0)),
                1.2 * bisect_survival(self, 1e-13),
                120_000,
            ),
            TargetFamily::ScaledBeta45 => (1e-8, 2.0, 120_000),
            TargetFamily::ScaledLogGamma { mu, .. } => {
                (mu.exp(), 1.3 * bisect_survival(self, 3e-15), 200_000)
            }
            TargetFamily::LogNormal { .. } => (1e-8, 1.2 * bisect_survival(self, 1e-14), 150_000),
            TargetFamily::BetaOne { .. } => (1e-12, 1.0, 120_000),
        };
        QuadratureConfig::new(x_min, x_max, n_x).expect("catalog bounds are valid")
    }

    /// `∫_0^∞ S(x)² dx` by quadrature (truncation error well below 1e-8).
    pub fn survival_norm2(&self) -> f64 {
        let q =
            QuadratureConfig::new(1e-12, self.oracle_quad().x_max, 200_000).expect("valid range");
        let head = 1e-12; // ∫_0^{x_min} S² with S ≈ 1
        head + q.integrate(|x| {
            let s = self.survival(x);
            s * s
        })
    }
}

fn validate_family(family: &TargetFamily) -> Result<()> {
    let ok = match *family {
        TargetFamily::Gamma { shape, rate } => shape > 0.0 && rate > 0.0,
        TargetFamily::Weibull { shape } => shape > 0.0,
        TargetFamily::ScaledBeta45 => true,
        TargetFamily::ScaledLogGamma { a, lambda, .. } => a > 0.0 && lambda > 0.5,
        TargetFamily::LogNormal { lambda, .. } => lambda > 0.0,
        TargetFamily::BetaOne { b } => b >= 1,
    };
    if ok {
        Ok(())
    } else {
        Err(CoreError::InvalidConfig(format!(
            "invalid target parameters: {family:?}"
        )))
    }
}

/// Smallest `x` with `S(x) <= threshold`, by doubling then bisection.
fn bisect_survival(model: &TargetModel, threshold: f64) -> f64 {
    let mut hi = 1.0;
    let mut guard = 0;
    while model.survival(hi) > threshold && guard < 1100 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model.survival(mid) > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// The four targets of the simulation study.
///
/// | key | family | density |
/// |-----|--------|---------|
/// | `gamma_4_05` | Gamma(4, rate 0.5) | `x³ e^{-x/2} / 96` |
/// | `weibull_2` | Weibull(2) | `2x e^{-x²}` |
/// | `beta_4_5_scaled` | scaled Beta(4,5) on (0,2) | `140 (x/2)³ (1-x/2)⁴` |
/// | `loggamma_0_4_3` | scaled Log-Gamma(0, 4, 3) | `13.5 x^{-4} log³x` on (1,∞) |
pub fn catalog_targets() -> Vec<TargetModel> {
    vec![
        TargetModel::new(
            "gamma_4_05",
            TargetFamily::Gamma {
                shape: 4.0,
                rate: 0.5,
            },
        )
        .expect("catalog entry is valid"),
        TargetModel::new("weibull_2", TargetFamily::Weibull { shape: 2.0 })
            .expect("catalog entry is valid"),
        TargetModel::new("beta_4_5_scaled", TargetFamily::ScaledBeta45)
            .expect("catalog entry is valid"),
        TargetModel::new(
            "loggamma_0_4_3",
            TargetFamily::ScaledLogGamma {
                mu: 0.0,
                a: 4.0,
                lambda: 3.0,
            },
        )
        .expect("catalog entry is valid"),
    ]
}

/// Resolve a target by catalog key or parametric form
/// (`gamma:<shape>:<rate>`, `weibull:<m>`, `lognormal:<mu>:<lambda>`,
/// `loggamma:<mu>:<a>:<lambda>`, `beta1:<b>`).
pub fn target_by_key(key: &str) -> Result<TargetModel> {
    for m in catalog_targets() {
        if m.name() == key {
            return Ok(m);
        }
    }
    let parts: Vec<&str> = key.split(':').collect();
    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| {
            CoreError::InvalidConfig(format!("bad number `{s}` in target key `{key}`"))
        })
    };
    match parts.as_slice() {
        ["gamma", shape, rate] => TargetModel::gamma(parse(shape)?, parse(rate)?),
        ["weibull", m] => TargetModel::weibull(parse(m)?),
        ["lognormal", mu, lambda] => TargetModel::log_normal(parse(mu)?, parse(lambda)?),
        ["loggamma", mu, a, lambda] => {
            TargetModel::scaled_log_gamma(parse(mu)?, parse(a)?, parse(lambda)?)
        }
        ["beta1", b] => TargetModel::beta_one(
            b.parse::<u32>()
                .map_err(|_| CoreError::InvalidConfig(format!("bad integer `{b}` in `{key}`")))?,
        ),
        _ => Err(CoreError::InvalidConfig(format!(
            "unknown target key `{key}`"
        ))),
    }
}

/// Error (noise) distribution families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    /// Uniform(0, 1), the multiplicative censoring case.
    Uniform01,
    /// Uniform(1/2, 3/2), symmetric noise around 1.
    UniformHalf,
    /// Beta(1, 2) with density `2(1-x)` on (0,1).
    BetaOneTwo,
    /// Point mass at 1: `M ≡ 1`. Test fixture for the noiseless limit;
    /// it has no Lebesgue density and is not part of the catalog.
    Noiseless,
}

/// A noise model: density `g`, closed-form `M_{3/2}[g]`, decay exponent `γ`
/// and the `[G1]` bracketing constants, plus a sampler.
#[derive(Debug, Clone)]
pub struct ErrorModel {
    name: String,
    family: ErrorFamily,
    gamma_exponent: f64,
    sigma_u: f64,
    xg_sup: f64,
    g1_lower: f64,
    g1_upper: f64,
}

impl ErrorModel {
    pub fn uniform_01() -> Self {
        Self {
            name: "unif_0_1".into(),
            family: ErrorFamily::Uniform01,
            gamma_exponent: 1.0,
            sigma_u: 0.5,
            xg_sup: 1.0,
            g1_lower: 2.0 / 3.0,
            g1_upper: 1.0,
        }
    }

    pub fn uniform_half() -> Self {
        // |M| = |(3/2)^{3/2+it} - (1/2)^{3/2+it}| / |3/2+it|; the numerator's
        // modulus lies in [1.5^1.5 - 0.5^1.5, 1.5^1.5 + 0.5^1.5].
        Self {
            name: "unif_half_3half".into(),
            family: ErrorFamily::UniformHalf,
            gamma_exponent: 1.0,
            sigma_u: 1.0,
            xg_sup: 1.5,
            g1_lower: 0.98,
            g1_upper: 2.20,
        }
    }

    pub fn beta_1_2() -> Self {
        Self {
            name: "beta_1_2".into(),
            family: ErrorFamily::BetaOneTwo,
            gamma_exponent: 2.0,
            sigma_u: 1.0 / 3.0,
            xg_sup: 0.5,
            g1_lower: 8.0 / 15.0,
            g1_upper: 2.0,
        }
    }

    pub fn noiseless() -> Self {
        Self {
            name: "noiseless".into(),
            family: ErrorFamily::Noiseless,
            gamma_exponent: 0.0,
            sigma_u: 1.0,
            xg_sup: 1.0,
            g1_lower: 1.0,
            g1_upper: 1.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> ErrorFamily {
        self.family
    }

    /// Decay exponent `γ` in the `[G1]` bracketing.
    pub fn gamma_exponent(&self) -> f64 {
        self.gamma_exponent
    }

    /// `E[U]`.
    pub fn sigma_u(&self) -> f64 {
        self.sigma_u
    }

    /// `sup_u u·g(u)`.
    pub fn xg_sup(&self) -> f64 {
        self.xg_sup
    }

    /// `[G1]` constants: `c_g (1+t²)^{-γ/2} <= |M_{3/2}[g](t)| <= C_g (...)`.
    pub fn g1_constants(&self) -> (f64, f64) {
        (self.g1_lower, self.g1_upper)
    }

    /// Noise density, closed at jump boundaries so quadrature nodes placed
    /// exactly on a support endpoint see the one-sided limit.
    pub fn density(&self, u: f64) -> f64 {
        match self.family {
            ErrorFamily::Uniform01 => {
                if u > 0.0 && u <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ErrorFamily::UniformHalf => {
                if (0.5..=1.5).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
            ErrorFamily::BetaOneTwo => {
                if u > 0.0 && u <= 1.0 {
                    2.0 * (1.0 - u)
                } else {
                    0.0
                }
            }
            ErrorFamily::Noiseless => 0.0,
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        match self.family {
            ErrorFamily::Uniform01 => u.clamp(0.0, 1.0),
            ErrorFamily::UniformHalf => (u - 0.5).clamp(0.0, 1.0),
            ErrorFamily::BetaOneTwo => {
                let v = u.clamp(0.0, 1.0);
                v * (2.0 - v)
            }
            ErrorFamily::Noiseless => {
                if u >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed-form `M_{3/2}[g](t)`.
    pub fn mellin_g32(&self, t: f64) -> Complex64 {
        let z = Complex64::new(1.5, t);
        match self.family {
            ErrorFamily::Uniform01 => 1.0 / z,
            ErrorFamily::UniformHalf => {
                let hi = (z * 1.5f64.ln()).exp();
                let lo = (z * 0.5f64.ln()).exp();
                (hi - lo) / z
            }
            ErrorFamily::BetaOneTwo => 2.0 / (z * (z + 1.0)),
            ErrorFamily::Noiseless => Complex64::new(1.0, 0.0),
        }
    }

    pub fn sample(&self, rng: &mut SimRng, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one(&self, rng: &mut SimRng) -> f64 {
        match self.family {
            ErrorFamily::Uniform01 => sampling::open_unit(rng),
            ErrorFamily::UniformHalf => 0.5 + sampling::open_unit(rng),
            ErrorFamily::BetaOneTwo => 1.0 - sampling::open_unit(rng).sqrt(),
            ErrorFamily::Noiseless => 1.0,
        }
    }

    /// Quadrature window for the numerical Mellin oracle of the density.
    pub fn oracle_quad(&self) -> QuadratureConfig {
        let (x_min, x_max, n_x) = match self.family {
            ErrorFamily::Uniform01 => (1e-8, 1.0, 150_000),
            ErrorFamily::UniformHalf => (0.5, 1.5, 60_000),
            ErrorFamily::BetaOneTwo => (1e-8, 1.0, 120_000),
            ErrorFamily::Noiseless => (1e-8, 1.0, 100),
        };
        QuadratureConfig::new(x_min, x_max, n_x).expect("catalog bounds are valid")
    }
}

/// The three noise models of the simulation study:
/// `unif_0_1` (γ=1), `unif_half_3half` (γ=1), `beta_1_2` (γ=2).
pub fn catalog_errors() -> Vec<ErrorModel> {
    vec![
        ErrorModel::uniform_01(),
        ErrorModel::uniform_half(),
        ErrorModel::beta_1_2(),
    ]
}

pub fn error_by_key(key: &str) -> Result<ErrorModel> {
    match key {
        "unif_0_1" => Ok(ErrorModel::uniform_01()),
        "unif_half_3half" => Ok(ErrorModel::uniform_half()),
        "beta_1_2" => Ok(ErrorModel::beta_1_2()),
        "noiseless" => Ok(ErrorModel::noiseless()),
        _ => Err(CoreError::InvalidConfig(format!(
            "unknown error key `{key}`"
        ))),
    }
}

/// Contaminate latent draws: `Y_j = X_j · U_j` with fresh independent noise.
pub fn contaminate(xs: &[f64], error: &ErrorModel, rng: &mut SimRng) -> Vec<f64> {
    xs.iter().map(|&x| x * error.sample_one(rng)).collect()
}

/// `n` contaminated observations `Y = X·U` with i.i.d. `X` from `target`.
pub fn sample_contaminated(
    target: &TargetModel,
    error: &ErrorModel,
    n: usize,
    rng: &mut SimRng,
) -> Vec<f64> {
    let xs = target.sample(rng, n);
    contaminate(&xs, error, rng)
}
