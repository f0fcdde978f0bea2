//! Seeded random generation for the simulation harness.
//!
//! All draws flow through a `ChaCha12Rng` owned by the caller. Replication
//! streams are derived by [`split_seed`], a SplitMix64 finalizer over
//! `(seed, index)`, so replications can run in parallel and still reproduce
//! bit-exactly in any schedule.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// Deterministic stream seed for replication `index` of a run seeded by `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xB5AD_4ECE_DA1C_E2A9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Uniform draw from the open interval (0, 1).
pub fn open_unit(rng: &mut SimRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// Standard normal via the Marsaglia polar method.
pub fn standard_normal(rng: &mut SimRng) -> f64 {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        let s = x * x + y * y;
        if s > 0.0 && s < 1.0 {
            return x * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Gamma(shape, rate) via Marsaglia–Tsang squeeze, boosted for shape < 1.
pub fn gamma(rng: &mut SimRng, shape: f64, rate: f64) -> f64 {
    assert!(
        shape > 0.0 && rate > 0.0,
        "gamma(shape={shape}, rate={rate})"
    );
    if shape < 1.0 {
        // Γ(a) = Γ(a+1) · U^{1/a}
        let boost = open_unit(rng).powf(1.0 / shape);
        return gamma(rng, shape + 1.0, rate) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let mut x;
        let mut v;
        loop {
            x = standard_normal(rng);
            v = 1.0 + c * x;
            if v > 0.0 {
                break;
            }
        }
        v = v * v * v;
        let u = open_unit(rng);
        if u < 1.0 - 0.0331 * x * x * x * x || u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v / rate;
        }
    }
}

/// Beta(a, b) as a Gamma ratio (rejection-free).
pub fn beta(rng: &mut SimRng, a: f64, b: f64) -> f64 {
    let x = gamma(rng, a, 1.0);
    let y = gamma(rng, b, 1.0);
    x / (x + y)
}

/// Binomial(m, p) as a Bernoulli sum; `m` is small everywhere we use this.
pub fn binomial(rng: &mut SimRng, m: u32, p: f64) -> u32 {
    (0..m).filter(|_| rng.random::<f64>() < p).count() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_seed_is_deterministic_and_spreads() {
        assert_eq!(split_seed(42, 0), split_seed(42, 0));
        assert_ne!(split_seed(42, 0), split_seed(42, 1));
        assert_ne!(split_seed(42, 0), split_seed(43, 0));
    }

    #[test]
    fn gamma_moments() {
        let mut rng = rng_for(7);
        let n = 200_000;
        let (shape, rate) = (4.0, 0.5);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let x = gamma(&mut rng, shape, rate);
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        // mean 8, var 16; 3·SE bands
        assert!(
            (mean - 8.0).abs() < 3.0 * 4.0 / (n as f64).sqrt(),
            "mean {mean}"
        );
        assert!((var - 16.0).abs() < 0.5, "var {var}");
    }

    #[test]
    fn gamma_small_shape_mean() {
        let mut rng = rng_for(11);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| gamma(&mut rng, 0.5, 2.0)).sum::<f64>() / n as f64;
        assert!((mean - 0.25).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn beta_mean() {
        let mut rng = rng_for(3);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| beta(&mut rng, 4.0, 5.0)).sum::<f64>() / n as f64;
        assert!((mean - 4.0 / 9.0).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn binomial_bounds_and_mean() {
        let mut rng = rng_for(5);
        let n = 50_000;
        let mut sum = 0u64;
        for _ in 0..n {
            let b = binomial(&mut rng, 4, 0.3);
            assert!(b <= 4);
            sum += b as u64;
        }
        let mean = sum as f64 / n as f64;
        assert!((mean - 1.2).abs() < 0.02, "mean {mean}");
    }
}
