//! Deformation-based synthetic data: monotone piecewise-linear warps, a
//! deterministic template catalog, and labeled datasets built by warping
//! templates.
//!
//! Each atomic subclass is one template; its samples are `template ∘ g` for
//! random non-decreasing `g` fixing 0 and 1. Generation is fully determined
//! by the spec: every atom draws from its own counter-based RNG stream, so
//! atoms can be generated concurrently without changing the output.

use alloc::vec::Vec;
use core::fmt;

// Provides floor/round/sqrt/exp on f64 in no_std builds. Test builds pull in
// std, whose inherent methods shadow the trait and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{DatasetMeta, Label, LabeledDataset, LabeledItem};
use crate::signal::Signal;

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    /// A warp needs at least two knots.
    TooFewKnots { got: usize },
    RoughnessOutOfRange { got: f64 },
    ZeroCount { field: &'static str },
    GridTooSmall { got: usize },
    /// Warp knots must be a non-decreasing map of [0,1] onto [0,1] fixing the
    /// endpoints.
    BadWarp { reason: &'static str },
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::TooFewKnots { got } => {
                write!(f, "warp needs at least 2 knots, got {got}")
            }
            SynthError::RoughnessOutOfRange { got } => {
                write!(f, "warp roughness must be in [0,1], got {got}")
            }
            SynthError::ZeroCount { field } => write!(f, "{field} must be at least 1"),
            SynthError::GridTooSmall { got } => {
                write!(f, "grid size must be at least 16, got {got}")
            }
            SynthError::BadWarp { reason } => write!(f, "invalid warp: {reason}"),
        }
    }
}

impl core::error::Error for SynthError {}

/// A non-decreasing piecewise-linear map of `[0,1]` onto `[0,1]` with
/// `g(0) = 0` and `g(1) = 1` exactly. Flat (zero-slope) segments are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpFunction {
    knots_x: Vec<f64>,
    knots_y: Vec<f64>,
}

impl WarpFunction {
    pub fn new(knots_x: Vec<f64>, knots_y: Vec<f64>) -> Result<Self, SynthError> {
        if knots_x.len() < 2 || knots_x.len() != knots_y.len() {
            return Err(SynthError::TooFewKnots { got: knots_x.len() });
        }
        if knots_x[0] != 0.0 || *knots_x.last().unwrap() != 1.0 {
            return Err(SynthError::BadWarp {
                reason: "knot positions must span [0,1]",
            });
        }
        if knots_y[0] != 0.0 || *knots_y.last().unwrap() != 1.0 {
            return Err(SynthError::BadWarp {
                reason: "warp must fix g(0) = 0 and g(1) = 1",
            });
        }
        for i in 1..knots_x.len() {
            if knots_x[i] <= knots_x[i - 1] {
                return Err(SynthError::BadWarp {
                    reason: "knot positions must be strictly increasing",
                });
            }
            if knots_y[i] < knots_y[i - 1] {
                return Err(SynthError::BadWarp {
                    reason: "warp values must be non-decreasing",
                });
            }
        }
        Ok(WarpFunction { knots_x, knots_y })
    }

    /// The identity warp on a uniform knot grid.
    pub fn identity(knots: usize) -> Self {
        let k = knots.max(2);
        let xs: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        WarpFunction {
            knots_y: xs.clone(),
            knots_x: xs,
        }
    }

    pub fn knots_x(&self) -> &[f64] {
        &self.knots_x
    }

    pub fn knots_y(&self) -> &[f64] {
        &self.knots_y
    }

    /// Piecewise-linear evaluation, exact at knots; for the identity warp
    /// `eval(x) == x` bitwise.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.knots_x.partition_point(|k| *k <= x) - 1;
        if self.knots_x[i] == x || i == self.knots_x.len() - 1 {
            return self.knots_y[i];
        }
        let slope = (self.knots_y[i + 1] - self.knots_y[i])
            / (self.knots_x[i + 1] - self.knots_x[i]);
        self.knots_y[i] + (x - self.knots_x[i]) * slope
    }

    /// True if some segment has zero slope.
    pub fn has_flat_segment(&self) -> bool {
        self.knots_y.windows(2).any(|w| w[0] == w[1])
    }
}

/// Draws a random warp with `knots` segments on the uniform knot grid.
///
/// Positive segment increments are `exp(roughness * z)` for standard normal
/// `z`, then normalized so the last knot is exactly 1; `roughness = 0` yields
/// the identity. With probability `roughness / 2` one interior segment is
/// flattened to exercise the zero-slope case.
pub fn random_warp(
    knots: usize,
    roughness: f64,
    rng: &mut impl Rng,
) -> Result<WarpFunction, SynthError> {
    if knots < 2 {
        return Err(SynthError::TooFewKnots { got: knots });
    }
    if !(0.0..=1.0).contains(&roughness) {
        return Err(SynthError::RoughnessOutOfRange { got: roughness });
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut increments: Vec<f64> = (0..knots)
        .map(|_| (roughness * normal.sample(rng)).exp())
        .collect();
    let flatten: f64 = rng.random();
    if flatten < roughness / 2.0 && knots >= 3 {
        let segment = rng.random_range(1..knots - 1);
        increments[segment] = 0.0;
    }

    let mut cumulative = Vec::with_capacity(knots + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for inc in &increments {
        acc += inc;
        cumulative.push(acc);
    }
    let total = acc;
    let knots_y: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    let knots_x: Vec<f64> = (0..=knots).map(|i| i as f64 / knots as f64).collect();
    WarpFunction::new(knots_x, knots_y)
}

/// Samples `s(g(u_j))` on the grid of `s` by linear interpolation.
pub fn apply_warp(s: &Signal, g: &WarpFunction) -> Signal {
    let n1 = (s.len() - 1) as f64;
    let samples = (0..s.len())
        .map(|j| s.eval(g.eval(j as f64 / n1)))
        .collect();
    Signal::new(samples).expect("warping preserves length and finiteness")
}

/// Signed bump amplitudes per catalog slot. Time warps absorb bump positions
/// and widths completely, so templates are kept apart by what warping cannot
/// change: bump count, sign order, and amplitudes.
const BUMP_PATTERNS: [&[f64]; 12] = [
    &[1.0],
    &[0.55],
    &[1.0, -0.75],
    &[-1.0],
    &[0.9, 0.5],
    &[1.0, -0.5, 0.7],
    &[-0.6, 1.0],
    &[0.45, -0.45],
    &[1.0, 0.7, -0.9],
    &[-0.85, 0.35],
    &[0.75, -1.0, 0.5],
    &[0.3, 0.9],
];

/// Deterministic catalog of `k` smooth, well-separated templates: trains of
/// signed Gaussian bumps over a gentle tilt. Bump amplitude patterns cycle
/// through twelve warp-inequivalent shapes and rescale on every cycle; width
/// and position vary with the index. The tilt keeps the derivative density
/// away from zero between bumps.
pub fn template_catalog(k: usize, grid_size: usize) -> Result<Vec<Signal>, SynthError> {
    if k < 1 {
        return Err(SynthError::ZeroCount { field: "k" });
    }
    if grid_size < 2 {
        return Err(SynthError::GridTooSmall { got: grid_size });
    }
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let amplitudes = BUMP_PATTERNS[j % BUMP_PATTERNS.len()];
        let scale = 1.0 + 0.3 * (j / BUMP_PATTERNS.len()) as f64;
        let sigma = 0.05 + 0.015 * (j % 4) as f64;
        let shift = 0.22 * ((j + 1) as f64 * GOLDEN).fract() - 0.11;
        let template = Signal::from_fn(grid_size, |x| {
            let mut v = 0.3 * x;
            for (b, amp) in amplitudes.iter().enumerate() {
                let center = (b + 1) as f64 / (amplitudes.len() + 1) as f64 + shift;
                let z = (x - center) / sigma;
                v += scale * amp * (-0.5 * z * z).exp();
            }
            v
        })
        .expect("grid size checked above");
        out.push(template);
    }
    Ok(out)
}

/// Parameters of one synthetic dataset. The catalog assigns template
/// `class * atoms_per_class + atom` to each atomic subclass.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub atoms_per_class: usize,
    pub samples_per_atom: usize,
    pub grid_size: usize,
    pub warp_knots: usize,
    pub warp_roughness: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Number of warp segments used when none is specified.
    pub const DEFAULT_WARP_KNOTS: usize = 12;

    pub fn validate(&self) -> Result<(), SynthError> {
        for (field, value) in [
            ("num_classes", self.num_classes),
            ("atoms_per_class", self.atoms_per_class),
            ("samples_per_atom", self.samples_per_atom),
        ] {
            if value < 1 {
                return Err(SynthError::ZeroCount { field });
            }
        }
        if self.grid_size < 16 {
            return Err(SynthError::GridTooSmall {
                got: self.grid_size,
            });
        }
        if self.warp_knots < 2 {
            return Err(SynthError::TooFewKnots {
                got: self.warp_knots,
            });
        }
        if !(0.0..=1.0).contains(&self.warp_roughness) {
            return Err(SynthError::RoughnessOutOfRange {
                got: self.warp_roughness,
            });
        }
        Ok(())
    }
}

/// Generates the labeled dataset described by `spec`: for every class and
/// atom, `samples_per_atom` random warps of that atom's template, labeled
/// with the class index (and the atom index as provenance).
///
/// Each atom uses RNG stream `class * atoms_per_class + atom` of a
/// counter-based generator seeded with `spec.seed`, so the output is
/// bit-reproducible and independent of generation order.
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<LabeledDataset, SynthError> {
    spec.validate()?;
    let templates = template_catalog(spec.num_classes * spec.atoms_per_class, spec.grid_size)?;
    let mut items = Vec::with_capacity(
        spec.num_classes * spec.atoms_per_class * spec.samples_per_atom,
    );
    for class in 0..spec.num_classes {
        for atom in 0..spec.atoms_per_class {
            let template = &templates[class * spec.atoms_per_class + atom];
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream((class * spec.atoms_per_class + atom) as u64);
            for _ in 0..spec.samples_per_atom {
                let warp = random_warp(spec.warp_knots, spec.warp_roughness, &mut rng)?;
                items.push(LabeledItem {
                    signal: apply_warp(template, &warp),
                    label: Label::from(class),
                    atom: Some(atom),
                });
            }
        }
    }
    Ok(LabeledDataset::new(items, DatasetMeta::Synthetic(spec.clone()))
        .expect("spec counts are at least 1"))
}
