//! One-dimensional optimal transport: CDFs, generalized inverses, transport
//! maps, and the transport divergence between signals.
//!
//! Monotone functions are stored as knot sequences that may carry jump
//! discontinuities, so a generalized inverse is exactly representable: flat
//! regions reflect to jumps and jumps to flat regions, with the value at a
//! jump being the upper one (right-continuity). The inverse is evaluated two
//! ways — directly from the defining infimum by binary search, and by
//! materializing the reflected curve — and the two routes agree.

use alloc::vec::Vec;
use core::fmt;

// Provides floor/round/sqrt/exp on f64 in no_std builds. Test builds pull in
// std, whose inherent methods shadow the trait and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::signal::{trapezoid, DerivativeDensity, Signal, SignalError};

#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneError {
    TooFewKnots { len: usize },
    NonFinite { index: usize },
    /// `knots_x` must be strictly increasing.
    NotStrictlyIncreasing { index: usize },
    /// Values must be non-decreasing along the curve (including jumps).
    NotMonotone { index: usize },
    /// The function must attain more than one value for an inverse to have a
    /// non-degenerate domain.
    DegenerateRange,
}

impl fmt::Display for MonotoneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonotoneError::TooFewKnots { len } => {
                write!(f, "monotone function needs at least 2 knots, got {len}")
            }
            MonotoneError::NonFinite { index } => write!(f, "non-finite knot at index {index}"),
            MonotoneError::NotStrictlyIncreasing { index } => {
                write!(f, "knot positions must be strictly increasing (index {index})")
            }
            MonotoneError::NotMonotone { index } => {
                write!(f, "knot values must be non-decreasing (index {index})")
            }
            MonotoneError::DegenerateRange => write!(f, "function range has zero width"),
        }
    }
}

impl core::error::Error for MonotoneError {}

/// A non-decreasing, right-continuous function on `[a,b]`, piecewise-linear
/// between knots and allowed to jump at them.
///
/// At knot `i` the function takes `upper[i]`; the segment to the next knot
/// interpolates from `upper[i]` to `lower[i+1]`. A knot with
/// `lower[i] < upper[i]` is a jump whose value is the upper one.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFunction {
    xs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl MonotoneFunction {
    /// A continuous piecewise-linear non-decreasing function.
    pub fn new(knots_x: Vec<f64>, knots_y: Vec<f64>) -> Result<Self, MonotoneError> {
        Self::with_jumps(knots_x, knots_y.clone(), knots_y)
    }

    /// A piecewise-linear non-decreasing function with jump discontinuities:
    /// `lower[i]` is the left limit at knot `i`, `upper[i]` the value there.
    pub fn with_jumps(
        knots_x: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, MonotoneError> {
        let n = knots_x.len();
        if n < 2 || lower.len() != n || upper.len() != n {
            return Err(MonotoneError::TooFewKnots {
                len: n.min(lower.len()).min(upper.len()),
            });
        }
        for i in 0..n {
            if !knots_x[i].is_finite() || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(MonotoneError::NonFinite { index: i });
            }
            if lower[i] > upper[i] {
                return Err(MonotoneError::NotMonotone { index: i });
            }
            if i > 0 {
                if knots_x[i] <= knots_x[i - 1] {
                    return Err(MonotoneError::NotStrictlyIncreasing { index: i });
                }
                if lower[i] < upper[i - 1] {
                    return Err(MonotoneError::NotMonotone { index: i });
                }
            }
        }
        if upper[n - 1] <= lower[0] {
            return Err(MonotoneError::DegenerateRange);
        }
        Ok(MonotoneFunction {
            xs: knots_x,
            lower,
            upper,
        })
    }

    pub fn knots_x(&self) -> &[f64] {
        &self.xs
    }

    /// Function values at the knots (the upper value at jumps).
    pub fn knots_y(&self) -> &[f64] {
        &self.upper
    }

    /// Left limits at the knots.
    pub fn left_limits(&self) -> &[f64] {
        &self.lower
    }

    /// `[a, b]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// `[c, d]`: the closure of the attained values, including the left limit
    /// at the first knot.
    pub fn codomain(&self) -> (f64, f64) {
        (self.lower[0], self.upper[self.upper.len() - 1])
    }

    /// Right-continuous evaluation; queries outside `[a,b]` are clamped.
    /// At a knot the value is exactly `knots_y[i]`.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.domain();
        let x = x.clamp(a, b);
        // index of the last knot at or before x
        let i = self.xs.partition_point(|k| *k <= x) - 1;
        if self.xs[i] == x || i == self.xs.len() - 1 {
            return self.upper[i];
        }
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.upper[i] + t * (self.lower[i + 1] - self.upper[i])
    }

    /// The generalized inverse evaluated directly from its definition,
    /// `F†(y) = inf{ x : F(x) > y }` with `inf ∅ = b`, by binary search over
    /// the knots.
    pub fn inverse_eval(&self, y: f64) -> f64 {
        let n = self.xs.len();
        if y < self.upper[0] {
            return self.xs[0];
        }
        if y >= self.upper[n - 1] {
            return self.xs[n - 1]; // inf ∅ = b
        }
        // first knot whose value exceeds y; the crossing is in (i-1, i]
        let i = self.upper.partition_point(|v| *v <= y);
        if self.lower[i] > y {
            // crossing inside the (strictly rising) segment
            let t = (y - self.upper[i - 1]) / (self.lower[i] - self.upper[i - 1]);
            self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
        } else {
            // the jump at knot i crosses y
            self.xs[i]
        }
    }

    /// The generalized inverse as a function: the graph of `F` reflected
    /// through `y = x`, with flat regions becoming jumps and jumps becoming
    /// flat regions.
    pub fn generalized_inverse(&self) -> MonotoneFunction {
        // Walk the closure of the graph as a curve monotone in both
        // coordinates, swap coordinates, and regroup equal positions into
        // jumps.
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(2 * self.xs.len());
        for i in 0..self.xs.len() {
            if self.lower[i] != self.upper[i] {
                points.push((self.lower[i], self.xs[i]));
            }
            points.push((self.upper[i], self.xs[i]));
        }
        let mut xs = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut k = 0;
        while k < points.len() {
            let pos = points[k].0;
            let lo = points[k].1;
            let mut hi = lo;
            while k + 1 < points.len() && points[k + 1].0 == pos {
                k += 1;
                hi = points[k].1;
            }
            xs.push(pos);
            lower.push(lo);
            upper.push(hi);
            k += 1;
        }
        MonotoneFunction { xs, lower, upper }
    }
}

/// Cumulative trapezoidal integral of a density, clamped to `[0,1]`:
/// `F(u_j) = ∫_0^{u_j} d`, with `F(0) = 0` and `F(1) = 1` up to quadrature
/// round-off.
pub fn cdf_from_density(density: &DerivativeDensity) -> MonotoneFunction {
    let v = density.values();
    let dx = density.grid_step();
    let n = v.len();
    let n1 = (n - 1) as f64;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut acc = 0.0f64;
    xs.push(0.0);
    ys.push(0.0);
    for j in 1..n {
        acc += dx * 0.5 * (v[j - 1] + v[j]);
        xs.push(j as f64 / n1);
        ys.push(acc.clamp(0.0, 1.0));
    }
    MonotoneFunction::new(xs, ys).expect("cumulative integral of a valid density is monotone")
}

/// The optimal transport map between two densities on `[0,1]`, evaluated on
/// the source grid, together with its finite-difference derivative (clamped
/// at zero).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    map: MonotoneFunction,
    derivative: Vec<f64>,
}

impl TransportMap {
    pub fn map(&self) -> &MonotoneFunction {
        &self.map
    }

    /// `g(u_j)` on the source grid.
    pub fn values(&self) -> &[f64] {
        self.map.knots_y()
    }

    /// Cached `g'` on the source grid, clamped at zero.
    pub fn derivative(&self) -> &[f64] {
        &self.derivative
    }
}

/// `g = F†_dst ∘ F_src` on the source grid.
pub fn transport_map(src: &DerivativeDensity, dst: &DerivativeDensity) -> TransportMap {
    let f_src = cdf_from_density(src);
    let f_dst = cdf_from_density(dst);
    let levels = f_src.knots_y();
    let values: Vec<f64> = levels.iter().map(|y| f_dst.inverse_eval(*y)).collect();

    let n = values.len();
    let dx = src.grid_step();
    let mut derivative = Vec::with_capacity(n);
    derivative.push(((values[1] - values[0]) / dx).max(0.0));
    for j in 1..n - 1 {
        derivative.push(((values[j + 1] - values[j - 1]) / (2.0 * dx)).max(0.0));
    }
    derivative.push(((values[n - 1] - values[n - 2]) / dx).max(0.0));

    let xs = f_src.knots_x().to_vec();
    let map = MonotoneFunction::new(xs, values)
        .expect("composition of monotone functions is monotone");
    TransportMap { map, derivative }
}

/// Sup-norm residual of the push-forward property on the source grid:
/// `max_j |F_dst(g(u_j)) − F_src(u_j)|`. Zero (up to quadrature) when `g`
/// pushes `src` onto `dst`.
pub fn push_forward_residual(
    g: &TransportMap,
    src: &DerivativeDensity,
    dst: &DerivativeDensity,
) -> f64 {
    let f_src = cdf_from_density(src);
    let f_dst = cdf_from_density(dst);
    f_src
        .knots_y()
        .iter()
        .zip(g.values())
        .map(|(level, gj)| (f_dst.eval(*gj) - level).abs())
        .fold(0.0, f64::max)
}

/// 2-Wasserstein distance via quantile functions:
/// `W₂² = ∫_0^1 |F†_src(q) − F†_dst(q)|² dq`, trapezoid rule on the finer of
/// the two grids.
pub fn wasserstein2(src: &DerivativeDensity, dst: &DerivativeDensity) -> f64 {
    let f_src = cdf_from_density(src);
    let f_dst = cdf_from_density(dst);
    let m = src.len().max(dst.len());
    let m1 = (m - 1) as f64;
    let integrand: Vec<f64> = (0..m)
        .map(|k| {
            let q = k as f64 / m1;
            let diff = f_src.inverse_eval(q) - f_dst.inverse_eval(q);
            diff * diff
        })
        .collect();
    trapezoid(&integrand, 1.0 / m1).sqrt()
}

/// The transport divergence between two non-constant signals:
///
/// `d(s,φ) = ( ∫_0^1 |s(x) − φ(g(x))|² √(g'(x)) dx )^{1/2}`
///
/// where `g` is the transport map between the derivative densities of `s`
/// and `φ`. Signals of differing lengths are resampled to the longer grid.
/// The divergence is directional (not symmetric) and vanishes when the two
/// signals are warp-equivalent.
pub fn transport_divergence(s: &Signal, phi: &Signal) -> Result<f64, SignalError> {
    let m = s.len().max(phi.len());
    let (s_r, phi_r);
    let (s, phi) = if s.len() == phi.len() {
        (s, phi)
    } else {
        s_r = s.resample(m)?;
        phi_r = phi.resample(m)?;
        (&s_r, &phi_r)
    };

    let src = s.derivative_density()?;
    let dst = phi.derivative_density()?;
    let g = transport_map(&src, &dst);

    let samples = s.samples();
    let integrand: Vec<f64> = samples
        .iter()
        .zip(g.values().iter().zip(g.derivative()))
        .map(|(sj, (gj, dgj))| {
            let diff = sj - phi.eval(*gj);
            diff * diff * dgj.sqrt()
        })
        .collect();
    Ok(trapezoid(&integrand, s.grid_step()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Signal;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn uniform_density(n: usize) -> DerivativeDensity {
        DerivativeDensity::new(vec![1.0; n]).unwrap()
    }

    /// Density of value 2 on [0, 1/2] and 0 on (1/2, 1], sampled on the grid.
    fn half_density(n: usize) -> DerivativeDensity {
        let n1 = (n - 1) as f64;
        DerivativeDensity::new(
            (0..n)
                .map(|j| if j as f64 / n1 <= 0.5 { 2.0 } else { 0.0 })
                .collect(),
        )
        .unwrap()
    }

    /// Random continuous monotone PL function on [0,1] with occasional flats.
    fn random_monotone(rng: &mut StdRng) -> MonotoneFunction {
        let n = rng.random_range(3..12);
        let mut xs = vec![0.0];
        for i in 1..n {
            xs.push(i as f64 / (n - 1) as f64);
        }
        let mut ys = vec![0.0];
        let mut acc = 0.0;
        for _ in 1..n {
            // flat step with probability 1/3
            let inc: f64 = if rng.random_range(0..3) == 0 {
                0.0
            } else {
                rng.random::<f64>()
            };
            acc += inc;
            ys.push(acc);
        }
        if acc == 0.0 {
            *ys.last_mut().unwrap() = 1.0;
        }
        MonotoneFunction::new(xs, ys).unwrap()
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(
            MonotoneFunction::new(vec![0.0], vec![0.0]),
            Err(MonotoneError::TooFewKnots { .. })
        ));
        assert!(matches!(
            MonotoneFunction::new(vec![0.0, 0.0], vec![0.0, 1.0]),
            Err(MonotoneError::NotStrictlyIncreasing { index: 1 })
        ));
        assert!(matches!(
            MonotoneFunction::new(vec![0.0, 1.0], vec![1.0, 0.0]),
            Err(MonotoneError::NotMonotone { index: 1 })
        ));
        assert!(matches!(
            MonotoneFunction::new(vec![0.0, 1.0], vec![0.5, 0.5]),
            Err(MonotoneError::DegenerateRange)
        ));
        assert!(matches!(
            MonotoneFunction::with_jumps(vec![0.0, 1.0], vec![0.0, 0.9], vec![0.5, 0.4]),
            Err(MonotoneError::NotMonotone { index: 1 })
        ));
    }

    #[test]
    fn eval_hits_knots_exactly_and_respects_jumps() {
        let f = MonotoneFunction::with_jumps(
            vec![0.0, 0.4, 1.0],
            vec![0.0, 0.2, 0.8],
            vec![0.0, 0.5, 1.0],
        )
        .unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.4), 0.5); // upper value at the jump
        assert_eq!(f.eval(1.0), 1.0);
        // left of the jump the segment ends at the lower value
        assert_close(f.eval(0.4 - 1e-9), 0.2, 1e-8);
        // between knots: linear from upper[1]=0.5 to lower[2]=0.8
        assert_close(f.eval(0.7), 0.65, 1e-12);
    }

    #[test]
    fn identity_inverts_to_identity() {
        let n = 11;
        let xs: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        let f = MonotoneFunction::new(xs.clone(), xs.clone()).unwrap();
        let inv = f.generalized_inverse();
        for &x in &xs {
            assert_eq!(inv.eval(x), x);
            assert_eq!(f.inverse_eval(x), x);
        }
        assert_close(inv.eval(0.317), 0.317, 1e-15);
    }

    #[test]
    fn strictly_increasing_inverse_matches_analytic_sqrt() {
        let n = 65;
        let xs: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let f = MonotoneFunction::new(xs, ys).unwrap();
        for k in 0..=100 {
            let y = k as f64 / 100.0;
            // PL interpolation error of x² knots is O(Δ²) after inversion
            assert_close(f.inverse_eval(y), y.sqrt(), 2e-2);
        }
    }

    #[test]
    fn flat_start_collapses_per_definition() {
        // F = 0 on [0, 1/2), then 2(x - 1/2): F†(y) = 1/2 + y/2 for y in [0,1),
        // F†(1) = 1, and F†(0) = 1/2 (the flat start collapses to its end).
        let f = MonotoneFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.inverse_eval(0.0), 0.5);
        assert_close(f.inverse_eval(0.4), 0.7, 1e-15);
        assert_eq!(f.inverse_eval(1.0), 1.0);

        let inv = f.generalized_inverse();
        assert_eq!(inv.eval(0.0), 0.5);
        assert_close(inv.eval(0.4), 0.7, 1e-15);
        assert_eq!(inv.eval(1.0), 1.0);
    }

    #[test]
    fn jump_reflects_to_flat_region() {
        // F jumps from 0.2 to 0.8 at x = 1/2: F† is constant 1/2 on [0.2, 0.8).
        let f = MonotoneFunction::with_jumps(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.2, 0.8],
            vec![0.0, 0.8, 1.0],
        )
        .unwrap();
        for y in [0.2, 0.35, 0.5, 0.65, 0.79] {
            assert_eq!(f.inverse_eval(y), 0.5);
        }
        let inv = f.generalized_inverse();
        for y in [0.2, 0.35, 0.5, 0.65, 0.79] {
            assert_eq!(inv.eval(y), 0.5);
        }
    }

    #[test]
    fn double_inverse_recovers_the_function() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..40 {
            let f = random_monotone(&mut rng);
            let back = f.generalized_inverse().generalized_inverse();
            for k in 0..=200 {
                let x = k as f64 / 200.0;
                assert_close(back.eval(x), f.eval(x), 1e-9);
            }
        }
    }

    #[test]
    fn inverse_composed_with_function_laws() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..40 {
            let f = random_monotone(&mut rng);
            let xs = f.knots_x().to_vec();
            let ys = f.knots_y().to_vec();
            for k in 0..=100 {
                let x = k as f64 / 100.0;
                let roundtrip = f.inverse_eval(f.eval(x));
                assert!(roundtrip >= x - 1e-9, "F†(F({x})) = {roundtrip} < x");
            }
            // equality where F is strictly right-increasing
            for i in 0..xs.len() - 1 {
                if ys[i + 1] > ys[i] {
                    let x = 0.5 * (xs[i] + xs[i + 1]);
                    assert_close(f.inverse_eval(f.eval(x)), x, 1e-9);
                }
            }
        }
    }

    #[test]
    fn direct_and_materialized_inverse_agree() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..40 {
            let f = random_monotone(&mut rng);
            let inv = f.generalized_inverse();
            let (c, d) = f.codomain();
            for k in 0..=300 {
                let y = c + (d - c) * k as f64 / 300.0;
                assert_eq!(f.inverse_eval(y), inv.eval(y), "y = {y}");
            }
        }
    }

    #[test]
    fn cdf_of_uniform_density_is_identity() {
        let f = cdf_from_density(&uniform_density(33));
        for (x, y) in f.knots_x().iter().zip(f.knots_y()) {
            assert_close(*y, *x, 1e-12);
        }
    }

    #[test]
    fn cdf_of_triangular_density_is_quadratic() {
        // |s'| ∝ 2x: the trapezoid rule is exact on linear integrands, so the
        // CDF knots equal x² up to round-off.
        let n = 65;
        let n1 = (n - 1) as f64;
        let d = DerivativeDensity::new((0..n).map(|j| 2.0 * j as f64 / n1).collect()).unwrap();
        let f = cdf_from_density(&d);
        for (x, y) in f.knots_x().iter().zip(f.knots_y()) {
            assert_close(*y, x * x, 1e-9);
        }
    }

    #[test]
    fn cdf_of_half_density_saturates() {
        let n = 201;
        let f = cdf_from_density(&half_density(n));
        let ys = f.knots_y();
        let n1 = (n - 1) as f64;
        // F(1/2) is 1 up to the one-cell smear of the sampled step
        let j_half = (0.5 * n1) as usize;
        assert_close(ys[j_half], 1.0, 2.0 / n1);
        assert_close(ys[n - 1], 1.0, 1e-12);
        // flat tail once the density is gone
        for j in j_half + 1..n {
            assert_eq!(ys[j], ys[n - 1]);
        }
    }

    #[test]
    fn transport_between_equal_densities_is_identity() {
        let s = Signal::from_fn(201, |x| (2.0 * core::f64::consts::PI * x).sin() + 0.3 * x)
            .unwrap();
        let d = s.derivative_density().unwrap();
        let g = transport_map(&d, &d);
        for (x, gx) in g.map().knots_x().iter().zip(g.values()) {
            assert_close(*gx, *x, 1e-9);
        }
    }

    #[test]
    fn transport_uniform_to_half_is_halving() {
        let n = 257;
        let n1 = (n - 1) as f64;
        let g = transport_map(&uniform_density(n), &half_density(n));
        let values = g.values();
        // interior nodes follow x/2 within the quadrature error; the last node
        // jumps to 1 because inf ∅ = b at the saturated level.
        for j in 0..n - 1 {
            let x = j as f64 / n1;
            assert_close(values[j], 0.5 * x, 2.0 / n1);
        }
        assert_eq!(values[n - 1], 1.0);
    }

    #[test]
    fn transport_recovers_the_inverse_warp() {
        // φ = s ∘ w with strictly increasing analytic w: the map between the
        // derivative densities of s and φ is w⁻¹.
        let n = 513;
        let w = |x: f64| x - 0.2 * (core::f64::consts::PI * x).sin() / core::f64::consts::PI;
        let s = |x: f64| x + 0.25 * (2.0 * core::f64::consts::PI * x).sin()
            / (2.0 * core::f64::consts::PI);
        let sig = Signal::from_fn(n, s).unwrap();
        let warped = Signal::from_fn(n, |x| s(w(x))).unwrap();
        let g = transport_map(
            &sig.derivative_density().unwrap(),
            &warped.derivative_density().unwrap(),
        );

        // Newton inversion of w as the independent oracle.
        let w_prime =
            |x: f64| 1.0 - 0.2 * (core::f64::consts::PI * x).cos();
        let w_inv = |y: f64| {
            let mut x = y;
            for _ in 0..60 {
                x -= (w(x) - y) / w_prime(x);
            }
            x.clamp(0.0, 1.0)
        };

        let n1 = (n - 1) as f64;
        let max_err = g
            .values()
            .iter()
            .enumerate()
            .map(|(j, gj)| (gj - w_inv(j as f64 / n1)).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 5.0 / n1, "max error {max_err}");
    }

    #[test]
    fn transport_map_is_monotone() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..30 {
            let len = rng.random_range(8..120);
            let a = DerivativeDensity::new((0..len).map(|_| rng.random::<f64>()).collect());
            let b = DerivativeDensity::new((0..len).map(|_| rng.random::<f64>()).collect());
            let (Ok(a), Ok(b)) = (a, b) else { continue };
            let g = transport_map(&a, &b);
            let v = g.values();
            for j in 1..v.len() {
                assert!(v[j] >= v[j - 1] - 1e-12);
            }
            for d in g.derivative() {
                assert!(*d >= 0.0);
            }
        }
    }

    #[test]
    fn push_forward_residual_of_computed_maps_is_small() {
        for n in [129usize, 257] {
            let n1 = (n - 1) as f64;
            let src = uniform_density(n);
            let dst = half_density(n);
            let g = transport_map(&src, &dst);
            let r = push_forward_residual(&g, &src, &dst);
            assert!(r <= 5.0 / n1, "residual {r} at n = {n}");
        }
    }

    #[test]
    fn push_forward_residual_detects_identity_misuse() {
        let n = 101;
        let src = uniform_density(n);
        let identity = transport_map(&src, &src);
        assert!(push_forward_residual(&identity, &src, &src) <= 1e-9);
        let dst = half_density(n);
        assert!(push_forward_residual(&identity, &src, &dst) > 0.1);
    }

    /// Smooth analytic density pair with closed-form CDFs (both integrate to
    /// one exactly): a = 1 + sin(2πx)/2, b = 1 + cos(3πx)/2.
    fn analytic_pair(n: usize) -> (DerivativeDensity, DerivativeDensity) {
        let n1 = (n - 1) as f64;
        let a = DerivativeDensity::new(
            (0..n)
                .map(|j| 1.0 + 0.5 * (2.0 * core::f64::consts::PI * j as f64 / n1).sin())
                .collect(),
        )
        .unwrap();
        let b = DerivativeDensity::new(
            (0..n)
                .map(|j| 1.0 + 0.5 * (3.0 * core::f64::consts::PI * j as f64 / n1).cos())
                .collect(),
        )
        .unwrap();
        (a, b)
    }

    fn cdf_a(x: f64) -> f64 {
        x + (1.0 - (2.0 * core::f64::consts::PI * x).cos()) / (4.0 * core::f64::consts::PI)
    }

    fn cdf_b(x: f64) -> f64 {
        x + (3.0 * core::f64::consts::PI * x).sin() / (6.0 * core::f64::consts::PI)
    }

    #[test]
    fn push_forward_residual_of_computed_maps_sits_at_the_floor() {
        // The grid CDF composed with its own exact generalized inverse cancels
        // to round-off, so the residual of a computed map is machine-level at
        // every resolution.
        for n in [129usize, 257] {
            let (a, b) = analytic_pair(n);
            let g = transport_map(&a, &b);
            let r = push_forward_residual(&g, &a, &b);
            assert!(r <= 1e-12, "residual {r} at n = {n}");
        }
    }

    #[test]
    fn push_forward_error_against_true_cdfs_halves_under_refinement() {
        // Measured against the closed-form CDFs the map error is dominated by
        // the trapezoidal quadrature and drops superlinearly.
        let residual = |n: usize| {
            let (a, b) = analytic_pair(n);
            let g = transport_map(&a, &b);
            let n1 = (n - 1) as f64;
            g.values()
                .iter()
                .enumerate()
                .map(|(j, gj)| (cdf_b(*gj) - cdf_a(j as f64 / n1)).abs())
                .fold(0.0, f64::max)
        };
        let r1 = residual(129);
        let r2 = residual(257);
        assert!(r2 <= 0.75 * r1, "r(129) = {r1}, r(257) = {r2}");
    }

    #[test]
    fn wasserstein_basics() {
        let n = 513;
        let u = uniform_density(n);
        assert!(wasserstein2(&u, &u) <= 1e-9);

        // uniform vs uniform-on-half: W₂² = ∫ (q/2)² dq = 1/12
        let w = wasserstein2(&u, &half_density(n));
        assert_close(w, (1.0f64 / 12.0).sqrt(), 1e-2);

        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let len = rng.random_range(8..80);
            let a = DerivativeDensity::new((0..len).map(|_| rng.random::<f64>()).collect());
            let b = DerivativeDensity::new((0..len).map(|_| rng.random::<f64>()).collect());
            let (Ok(a), Ok(b)) = (a, b) else { continue };
            assert_close(wasserstein2(&a, &b), wasserstein2(&b, &a), 1e-12);
        }
    }

    #[test]
    fn divergence_vanishes_on_self() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let len = rng.random_range(16..200);
            let s = Signal::new((0..len).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
                .unwrap();
            if s.derivative_density().is_err() {
                continue;
            }
            assert!(transport_divergence(&s, &s).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn divergence_to_a_shifted_copy_is_the_shift() {
        let s = Signal::from_fn(401, |x| (2.0 * core::f64::consts::PI * x).sin()).unwrap();
        let shifted = Signal::new(s.samples().iter().map(|v| v + 0.7).collect()).unwrap();
        // equal derivative densities force the identity map
        assert_close(transport_divergence(&s, &shifted).unwrap(), 0.7, 1e-9);
    }

    #[test]
    fn divergence_is_small_on_warped_copies_and_shrinks() {
        let s = |x: f64| (2.0 * core::f64::consts::PI * x).sin();
        let w = |x: f64| x - 0.25 * (core::f64::consts::PI * x).sin() / core::f64::consts::PI;
        let mut prev = f64::INFINITY;
        for n in [501usize, 1001, 2001] {
            let a = Signal::from_fn(n, s).unwrap();
            let b = Signal::from_fn(n, |x| s(w(x))).unwrap();
            let d = transport_divergence(&a, &b).unwrap();
            assert!(d < prev, "d = {d} did not shrink at n = {n}");
            prev = d;
        }
        assert!(prev <= 1e-2, "divergence at n = 2001 is {prev}");
    }

    #[test]
    fn divergence_resamples_mismatched_grids() {
        let a = Signal::from_fn(101, |x| x * x).unwrap();
        let b = Signal::from_fn(301, |x| x * x).unwrap();
        let d = transport_divergence(&a, &b).unwrap();
        assert!(d <= 1e-3, "d = {d}");
    }

    #[test]
    fn divergence_requires_variation() {
        let s = Signal::from_fn(50, |x| x).unwrap();
        let c = Signal::new(vec![1.0; 50]).unwrap();
        assert!(matches!(
            transport_divergence(&s, &c),
            Err(SignalError::ZeroVariation)
        ));
        assert!(matches!(
            transport_divergence(&c, &s),
            Err(SignalError::ZeroVariation)
        ));
    }

    #[test]
    fn divergence_is_directional() {
        let a = Signal::from_fn(201, |x| (-((x - 0.3) / 0.05).powi(2)).exp()).unwrap();
        let b = Signal::from_fn(201, |x| 0.5 * (-((x - 0.6) / 0.2).powi(2)).exp()).unwrap();
        let ab = transport_divergence(&a, &b).unwrap();
        let ba = transport_divergence(&b, &a).unwrap();
        assert!((ab - ba).abs() > 1e-6, "unexpectedly symmetric: {ab} vs {ba}");
    }
}
