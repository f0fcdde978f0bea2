//! Forward and inverse Mellin quadrature on grids.
//!
//! The forward transform `M_c[h](t) = ∫_0^∞ x^{c-1+it} h(x) dx` is evaluated
//! by the trapezoid rule on the log-spaced nodes of a [`QuadratureConfig`];
//! it serves as the numerical oracle for the closed forms in the model
//! catalog. The inverse transform and the Plancherel norm act on a
//! [`MellinSeries`], i.e. on band-limited data over a symmetric [`TGrid`].

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::{MellinSeries, QuadratureConfig};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Numerical Mellin transform `∫_0^∞ x^{c-1+it} h(x) dx`, truncated to
/// `[q.x_min, q.x_max]`.
pub fn mellin_numeric<F: Fn(f64) -> f64>(h: F, c: f64, t: f64, q: &QuadratureConfig) -> Complex64 {
    let h_u = q.log_step();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..q.n_x {
        let x = q.node(j);
        let u = x.ln();
        let w = if j == 0 || j == q.n_x - 1 { 0.5 } else { 1.0 };
        // x^{c-1+it} dx = e^{cu} e^{itu} du on the log grid.
        let amp = w * h(x) * (c * u).exp();
        acc += Complex64::from_polar(amp, t * u);
    }
    acc * h_u
}

/// Inverse Mellin transform of a band-limited series at a single point:
/// `(2π)^{-1} ∫_{-k}^{k} x^{-c-it} H(t) dt` by the trapezoid rule.
///
/// Returns the real part; for a Hermitian series the imaginary part is a pure
/// rounding residual, which is asserted in debug builds.
pub fn mellin_inverse_at(series: &MellinSeries, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(CoreError::NonPositiveArgument { value: x });
    }
    let g = &series.grid;
    let ln_x = x.ln();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for j in 0..g.len() {
        let t = g.node(j);
        let w = g.trapezoid_weight(j);
        let kernel = Complex64::from_polar(w, -t * ln_x);
        acc += kernel * series.values[j];
        scale += w * series.values[j].norm();
    }
    let value = acc * x.powf(-series.dev_point) * g.step() / TWO_PI;
    debug_assert!(
        value.im.abs() <= 1e-8 * (scale * g.step() / TWO_PI).max(1e-300),
        "non-Hermitian series: imaginary residual {} at x={x}",
        value.im
    );
    Ok(value.re)
}

/// Inverse Mellin transform on many points at once.
///
/// Same quadrature as [`mellin_inverse_at`], but the oscillatory kernel is
/// advanced by the recurrence `e^{-i t_{j+1} ln x} = e^{-i t_j ln x} · z`,
/// exploiting Hermitian pairing of `±t` nodes. Agrees with the pointwise
/// routine to ~1e-12 relative.
pub fn mellin_inverse_on_grid(series: &MellinSeries, xs: &[f64]) -> Result<Vec<f64>> {
    let g = &series.grid;
    let m = g.n_half();
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        if !(x > 0.0) {
            return Err(CoreError::NonPositiveArgument { value: x });
        }
        let ln_x = x.ln();
        let z = Complex64::from_polar(1.0, -g.step() * ln_x);
        let mut kernel = Complex64::new(1.0, 0.0);
        // t = 0 node once, then symmetric pairs t = ±j·h.
        let mut acc = series.values[m].re;
        for j in 1..=m {
            kernel *= z;
            let w = if j == m { 0.5 } else { 1.0 };
            let pair = kernel * series.values[m + j] + kernel.conj() * series.values[m - j];
            acc += w * pair.re;
        }
        out.push(acc * x.powf(-series.dev_point) * g.step() / TWO_PI);
    }
    Ok(out)
}

/// Squared Plancherel norm `(2π)^{-1} ∫_{-k}^{k} |H(t)|² dt` of a series;
/// equals the squared `L²(R_+, x^{2c-1})` norm of its band-limited inverse.
pub fn plancherel_norm2(series: &MellinSeries) -> f64 {
    let g = &series.grid;
    let mut acc = 0.0;
    for j in 0..g.len() {
        acc += g.trapezoid_weight(j) * series.values[j].norm_sqr();
    }
    acc * g.step() / TWO_PI
}

/// Multiplicative convolution `(h1 * h2)(y) = ∫ h1(y/x) h2(x) x^{-1} dx`
/// by the trapezoid rule on the log grid of `q`.
pub fn mult_convolve_numeric<F, G>(h1: F, h2: G, y: f64, q: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(y > 0.0) {
        return Err(CoreError::NonPositiveArgument { value: y });
    }
    let h_u = q.log_step();
    let mut acc = 0.0;
    for j in 0..q.n_x {
        let x = q.node(j);
        let w = if j == 0 || j == q.n_x - 1 { 0.5 } else { 1.0 };
        acc += w * h1(y / x) * h2(x);
    }
    Ok(acc * h_u)
}
