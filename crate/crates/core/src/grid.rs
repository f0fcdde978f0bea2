//! Frequency grids and Mellin-domain series.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Symmetric uniform grid on `[-k, k]` for the frequency variable `t`.
///
/// Nodes are `t_j = (j - n_half) * step` for `j = 0..=2*n_half`, so the node
/// count is odd, `t = 0` is always a node and the set is exactly symmetric:
/// `t` is a node iff `-t` is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    step: f64,
    n_half: usize,
}

impl TGrid {
    /// Grid with half-width `half_width` and step `step`; `half_width/step`
    /// must be a positive integer (the grid hits `±half_width` exactly).
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        let ratio = half_width / step;
        let n_half = ratio.round();
        if n_half < 1.0 || (ratio - n_half).abs() > 1e-9 * ratio.max(1.0) {
            return Err(CoreError::InvalidConfig(format!(
                "half-width {half_width} is not an integer multiple of step {step}"
            )));
        }
        Ok(Self {
            step,
            n_half: n_half as usize,
        })
    }

    /// Grid built from the number of steps on each side of zero.
    pub fn from_steps(n_half: usize, step: f64) -> Result<Self> {
        if n_half == 0 {
            return Err(CoreError::InvalidConfig("grid needs n_half >= 1".into()));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "grid step must be positive, got {step}"
            )));
        }
        Ok(Self { step, n_half })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn half_width(&self) -> f64 {
        self.n_half as f64 * self.step
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    /// Total node count, `2 * n_half + 1`.
    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node value at index `j` in `0..len()`.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - self.n_half as f64) * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.node(j))
    }

    /// Trapezoid weight of node `j` (1/2 at the two end points, 1 inside).
    pub fn trapezoid_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.len() - 1 {
            0.5
        } else {
            1.0
        }
    }
}

/// Complex values of a Mellin-domain function sampled on a [`TGrid`], together
/// with the development point `c` of the transform they represent.
///
/// A series that is the Mellin transform of a real-valued function satisfies
/// Hermitian symmetry, `value(-t) = conj(value(t))`.
#[derive(Debug, Clone)]
pub struct MellinSeries {
    pub grid: TGrid,
    pub values: Vec<Complex64>,
    pub dev_point: f64,
}

impl MellinSeries {
    pub fn new(grid: TGrid, values: Vec<Complex64>, dev_point: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::InvalidConfig(format!(
                "series length {} does not match grid node count {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            dev_point,
        })
    }

    /// Sample a closed-form transform `f(t)` on every node of `grid`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: TGrid, dev_point: f64, f: F) -> Self {
        let values = grid.nodes().map(f).collect();
        Self {
            grid,
            values,
            dev_point,
        }
    }

    /// Maximal deviation from Hermitian symmetry over all node pairs.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for j in 0..=self.grid.n_half() {
            let a = self.values[j];
            let b = self.values[n - 1 - j];
            worst = worst.max((a - b.conj()).norm());
        }
        worst
    }
}

/// Node placement for the x-space oracle integrals: `n_x` geometrically spaced
/// nodes covering `[x_min, x_max]`, i.e. the trapezoid rule applied after the
/// substitution `x = exp(u)`. Oscillatory Mellin kernels have constant
/// frequency in `u`, which keeps the rule accurate uniformly in `t`.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
}

impl QuadratureConfig {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if !(x_min > 0.0) || !(x_max > x_min) {
            return Err(CoreError::InvalidConfig(format!(
                "quadrature range must satisfy 0 < x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_x < 2 {
            return Err(CoreError::InvalidConfig(format!(
                "quadrature needs n_x >= 2, got {n_x}"
            )));
        }
        Ok(Self { x_min, x_max, n_x })
    }

    /// Node `j` of the log grid; the two end nodes are pinned to `x_min` and
    /// `x_max` exactly so supports ending there are sampled on their boundary.
    pub fn node(&self, j: usize) -> f64 {
        if j == 0 {
            self.x_min
        } else if j == self.n_x - 1 {
            self.x_max
        } else {
            let h = self.log_step();
            (self.x_min.ln() + j as f64 * h).exp()
        }
    }

    pub fn log_step(&self) -> f64 {
        (self.x_max.ln() - self.x_min.ln()) / (self.n_x - 1) as f64
    }

    /// Integrate `f` against the log-spaced trapezoid rule:
    /// `∫ f(x) dx ≈ Σ w_j f(x_j) x_j h_u` with `x_j = exp(u_min + j h_u)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.log_step();
        let mut acc = 0.0;
        for j in 0..self.n_x {
            let x = self.node(j);
            let w = if j == 0 || j == self.n_x - 1 {
                0.5
            } else {
                1.0
            };
            acc += w * f(x) * x;
        }
        acc * h
    }
}
