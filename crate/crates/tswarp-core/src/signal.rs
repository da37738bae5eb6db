//! Uniformly sampled signals on `[0,1]` and their derivative densities.
//!
//! A [`Signal`] holds samples `s(u_j)` at the grid nodes `u_j = j/N` and is
//! interpreted piecewise-linearly between nodes. The derivative density
//! `|s'| / ||s'||_1` built here is the probability density transported by the
//! divergence in [`crate::transport`].

use alloc::vec::Vec;
use core::fmt;

// Provides floor/round/sqrt/exp on f64 in no_std builds. Test builds pull in
// std, whose inherent methods shadow the trait and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Signals below this total variation (scaled by sample count) are treated as
/// constant: the derivative density would be a 0/0 normalization.
pub const ZERO_VARIATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalError {
    /// A signal needs at least two samples.
    TooShort { len: usize },
    /// NaN or infinite sample.
    NonFinite { index: usize },
    /// Resampling target grid smaller than two points.
    GridTooSmall { m: usize },
    /// Total variation is (numerically) zero; the derivative density and the
    /// transport divergence are undefined for constant signals.
    ZeroVariation,
    /// Density construction saw a negative value.
    NegativeDensity { index: usize },
}

impl fmt::Display for SignalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalError::TooShort { len } => {
                write!(f, "signal needs at least 2 samples, got {len}")
            }
            SignalError::NonFinite { index } => {
                write!(f, "non-finite sample at index {index}")
            }
            SignalError::GridTooSmall { m } => {
                write!(f, "resampling grid needs at least 2 points, got {m}")
            }
            SignalError::ZeroVariation => {
                write!(f, "signal has zero total variation (constant)")
            }
            SignalError::NegativeDensity { index } => {
                write!(f, "negative density value at index {index}")
            }
        }
    }
}

impl core::error::Error for SignalError {}

/// A real-valued function on `[0,1]` represented by uniform samples.
///
/// With `N+1` samples, sample `j` is the value at `u_j = j * Δ`, `Δ = 1/N`.
/// Samples are validated to be finite and at least two.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
}

impl Signal {
    pub fn new(samples: Vec<f64>) -> Result<Self, SignalError> {
        if samples.len() < 2 {
            return Err(SignalError::TooShort { len: samples.len() });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        Ok(Signal { samples })
    }

    /// Samples `f` at the `len` uniform grid nodes.
    pub fn from_fn(len: usize, f: impl Fn(f64) -> f64) -> Result<Self, SignalError> {
        if len < 2 {
            return Err(SignalError::TooShort { len });
        }
        let n = (len - 1) as f64;
        Signal::new((0..len).map(|j| f(j as f64 / n)).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // len >= 2 by construction
    }

    /// Grid step `Δ = 1/N`.
    pub fn grid_step(&self) -> f64 {
        1.0 / (self.samples.len() - 1) as f64
    }

    /// Piecewise-linear evaluation at `x ∈ [0,1]` (clamped outside).
    ///
    /// Queries that are bitwise-equal to a grid node `j/N` return `samples[j]`
    /// exactly, so node identities such as warping by the identity hold without
    /// rounding residue.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let n = (self.samples.len() - 1) as f64;
        let pos = x * n;
        let nearest = pos.round();
        let j = nearest as usize;
        if j < self.samples.len() && x == j as f64 / n {
            return self.samples[j];
        }
        let j = (pos.floor() as usize).min(self.samples.len() - 2);
        let t = pos - j as f64;
        self.samples[j] + t * (self.samples[j + 1] - self.samples[j])
    }

    /// Piecewise-linear interpolation onto the uniform grid with `m` points.
    /// Endpoints are preserved exactly; `resample(s, s.len())` is the identity.
    pub fn resample(&self, m: usize) -> Result<Signal, SignalError> {
        if m < 2 {
            return Err(SignalError::GridTooSmall { m });
        }
        let nm = (m - 1) as f64;
        let samples = (0..m).map(|k| self.eval(k as f64 / nm)).collect();
        Signal::new(samples)
    }

    /// Numerical derivative on the grid: central differences at interior
    /// nodes, one-sided at the endpoints. Output length equals input length.
    pub fn derivative(&self) -> Vec<f64> {
        let s = &self.samples;
        let n = s.len();
        let dx = self.grid_step();
        let mut out = Vec::with_capacity(n);
        out.push((s[1] - s[0]) / dx);
        for j in 1..n - 1 {
            out.push((s[j + 1] - s[j - 1]) / (2.0 * dx));
        }
        out.push((s[n - 1] - s[n - 2]) / dx);
        out
    }

    /// The normalized derivative density `|s'| / ||s'||_1` together with the
    /// normalizer. Fails with [`SignalError::ZeroVariation`] for (numerically)
    /// constant signals.
    pub fn derivative_density(&self) -> Result<DerivativeDensity, SignalError> {
        let abs: Vec<f64> = self.derivative().iter().map(|d| d.abs()).collect();
        let mass = trapezoid(&abs, self.grid_step());
        if mass <= ZERO_VARIATION_EPS * self.samples.len() as f64 {
            return Err(SignalError::ZeroVariation);
        }
        let values = abs.iter().map(|v| v / mass).collect();
        Ok(DerivativeDensity { values, mass })
    }
}

/// A probability density on the signal grid: non-negative values whose
/// trapezoidal integral is 1, plus the mass that was divided out.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeDensity {
    values: Vec<f64>,
    mass: f64,
}

impl DerivativeDensity {
    /// Builds a density from raw non-negative values by normalizing with the
    /// trapezoid rule. `mass` records the integral of the raw values.
    pub fn new(values: Vec<f64>) -> Result<Self, SignalError> {
        if values.len() < 2 {
            return Err(SignalError::TooShort { len: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        if let Some(index) = values.iter().position(|v| *v < 0.0) {
            return Err(SignalError::NegativeDensity { index });
        }
        let dx = 1.0 / (values.len() - 1) as f64;
        let mass = trapezoid(&values, dx);
        if mass <= ZERO_VARIATION_EPS * values.len() as f64 {
            return Err(SignalError::ZeroVariation);
        }
        let values = values.iter().map(|v| v / mass).collect();
        Ok(DerivativeDensity { values, mass })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The normalizer `||s'||_1` (trapezoidal integral of the raw values).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }
}

/// Trapezoidal integral of uniformly spaced samples.
pub(crate) fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}
