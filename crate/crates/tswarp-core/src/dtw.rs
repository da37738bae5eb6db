//! Discrete dynamic time warping by dynamic programming, in the classic and
//! the step-weighted form, with path recovery and a brute-force oracle for
//! small instances.
//!
//! Steps are `{(1,0), (0,1), (1,1)}`; a `(0,0)` step never decreases the cost
//! and is excluded. The weighted form multiplies each step's mismatch by
//! `(Δi + Δj)/N`, i.e. `1/N` for horizontal or vertical steps and `2/N` for
//! diagonal ones. Backtracking breaks ties deterministically: diagonal, then
//! vertical (source index advances), then horizontal.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::signal::Signal;

const BRUTE_FORCE_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum DtwError {
    /// Weighted DTW is defined for equal sample counts.
    LengthMismatch { left: usize, right: usize },
    /// Brute-force enumeration is restricted to `N + M <= 12`.
    InstanceTooLarge { size: usize, max: usize },
    EmptyPath,
    /// A path must start at `(0, 0)`.
    BadStart { got: (usize, usize) },
    /// Per-step increments must be in `{0,1}` with at least one coordinate
    /// advancing.
    BadStep { index: usize },
    /// A path must end at `(N, M)` for the signals it is evaluated against.
    BadEnd {
        expected: (usize, usize),
        got: (usize, usize),
    },
}

impl fmt::Display for DtwError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtwError::LengthMismatch { left, right } => {
                write!(f, "weighted DTW needs equal lengths, got {left} and {right}")
            }
            DtwError::InstanceTooLarge { size, max } => {
                write!(f, "instance size N+M = {size} exceeds brute-force bound {max}")
            }
            DtwError::EmptyPath => write!(f, "warping path is empty"),
            DtwError::BadStart { got } => {
                write!(f, "warping path must start at (0,0), got {got:?}")
            }
            DtwError::BadStep { index } => {
                write!(f, "inadmissible step at path index {index}")
            }
            DtwError::BadEnd { expected, got } => {
                write!(f, "warping path must end at {expected:?}, got {got:?}")
            }
        }
    }
}

impl core::error::Error for DtwError {}

/// A discrete warping path: aligned index pairs from `(0,0)` to `(N,M)` with
/// per-step weights `(Δi + Δj)/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    steps: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl DiscretePath {
    /// Validates the step sequence and attaches the step weights.
    pub fn new(steps: Vec<(usize, usize)>) -> Result<Self, DtwError> {
        if steps.is_empty() {
            return Err(DtwError::EmptyPath);
        }
        if steps[0] != (0, 0) {
            return Err(DtwError::BadStart { got: steps[0] });
        }
        for k in 1..steps.len() {
            let di = steps[k].0.wrapping_sub(steps[k - 1].0);
            let dj = steps[k].1.wrapping_sub(steps[k - 1].1);
            if di > 1 || dj > 1 || (di == 0 && dj == 0) {
                return Err(DtwError::BadStep { index: k });
            }
        }
        let end = *steps.last().unwrap();
        if end.0 == 0 || end.1 == 0 {
            return Err(DtwError::BadEnd {
                expected: (1, 1),
                got: end,
            });
        }
        let n = end.0 as f64;
        let weights = steps
            .windows(2)
            .map(|w| ((w[1].0 - w[0].0) + (w[1].1 - w[0].1)) as f64 / n)
            .collect();
        Ok(DiscretePath { steps, weights })
    }

    /// Index pairs `(i, j)`, including the start node.
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    /// Weights for steps `1..=L` (the step into the start node does not
    /// exist, so there are `steps.len() - 1` of them).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn start(&self) -> (usize, usize) {
        self.steps[0]
    }

    pub fn end(&self) -> (usize, usize) {
        *self.steps.last().unwrap()
    }
}

/// An optimal cost together with one path attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct DtwResult {
    pub cost: f64,
    pub path: DiscretePath,
}

#[derive(Clone, Copy, PartialEq)]
enum Dir {
    Start,
    Diagonal,
    Vertical,
    Horizontal,
}

/// Shared DP over the full table with direction recovery.
///
/// `node_weight(i, j, dir)` is the factor multiplying the mismatch when a
/// path enters `(i, j)` via `dir`.
fn dtw_full(a: &[f64], b: &[f64], weighted: bool) -> DtwResult {
    let n = a.len();
    let m = b.len();
    let nf = (n - 1) as f64;
    let (w_straight, w_diag) = if weighted {
        (1.0 / nf, 2.0 / nf)
    } else {
        (1.0, 1.0)
    };
    let start_cost = if weighted { 0.0 } else { (a[0] - b[0]).abs() };

    let mut cost = vec![0.0f64; n * m];
    let mut dirs = vec![Dir::Start; n * m];
    cost[0] = start_cost;
    for j in 1..m {
        cost[j] = cost[j - 1] + (a[0] - b[j]).abs() * w_straight;
        dirs[j] = Dir::Horizontal;
    }
    for i in 1..n {
        let row = i * m;
        let prev = row - m;
        cost[row] = cost[prev] + (a[i] - b[0]).abs() * w_straight;
        dirs[row] = Dir::Vertical;
        for j in 1..m {
            let c = (a[i] - b[j]).abs();
            let mut best = cost[prev + j - 1] + c * w_diag;
            let mut dir = Dir::Diagonal;
            let vertical = cost[prev + j] + c * w_straight;
            if vertical < best {
                best = vertical;
                dir = Dir::Vertical;
            }
            let horizontal = cost[row + j - 1] + c * w_straight;
            if horizontal < best {
                best = horizontal;
                dir = Dir::Horizontal;
            }
            cost[row + j] = best;
            dirs[row + j] = dir;
        }
    }

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    loop {
        steps.push((i, j));
        match dirs[i * m + j] {
            Dir::Start => break,
            Dir::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Dir::Vertical => i -= 1,
            Dir::Horizontal => j -= 1,
        }
    }
    steps.reverse();
    DtwResult {
        cost: cost[n * m - 1],
        path: DiscretePath::new(steps).expect("backtracked path is admissible"),
    }
}

/// Cost-only DP with a two-row rolling buffer.
fn dtw_rolling(a: &[f64], b: &[f64], weighted: bool) -> f64 {
    let n = a.len();
    let m = b.len();
    let nf = (n - 1) as f64;
    let (w_straight, w_diag) = if weighted {
        (1.0 / nf, 2.0 / nf)
    } else {
        (1.0, 1.0)
    };

    let mut prev = vec![0.0f64; m];
    let mut curr = vec![0.0f64; m];
    curr[0] = if weighted { 0.0 } else { (a[0] - b[0]).abs() };
    for j in 1..m {
        curr[j] = curr[j - 1] + (a[0] - b[j]).abs() * w_straight;
    }
    for i in 1..n {
        core::mem::swap(&mut prev, &mut curr);
        curr[0] = prev[0] + (a[i] - b[0]).abs() * w_straight;
        for j in 1..m {
            let c = (a[i] - b[j]).abs();
            let mut best = prev[j - 1] + c * w_diag;
            let vertical = prev[j] + c * w_straight;
            if vertical < best {
                best = vertical;
            }
            let horizontal = curr[j - 1] + c * w_straight;
            if horizontal < best {
                best = horizontal;
            }
            curr[j] = best;
        }
    }
    curr[m - 1]
}

/// Classic DTW: the exact minimum of the summed pointwise mismatch over all
/// admissible warping paths, with one optimal path.
pub fn dtw(s: &Signal, phi: &Signal) -> DtwResult {
    dtw_full(s.samples(), phi.samples(), false)
}

/// Classic DTW cost without path recovery (two-row DP).
pub fn dtw_cost(s: &Signal, phi: &Signal) -> f64 {
    dtw_rolling(s.samples(), phi.samples(), false)
}

/// Step-weighted DTW between equal-length signals: mismatches are weighted by
/// `(Δi + Δj)/N`, which makes the optimum converge, as the grid refines, to
/// the continuous warping-path formulation it approximates.
pub fn dtw_weighted(s: &Signal, phi: &Signal) -> Result<DtwResult, DtwError> {
    if s.len() != phi.len() {
        return Err(DtwError::LengthMismatch {
            left: s.len(),
            right: phi.len(),
        });
    }
    Ok(dtw_full(s.samples(), phi.samples(), true))
}

/// Weighted DTW cost without path recovery.
pub fn dtw_weighted_cost(s: &Signal, phi: &Signal) -> Result<f64, DtwError> {
    if s.len() != phi.len() {
        return Err(DtwError::LengthMismatch {
            left: s.len(),
            right: phi.len(),
        });
    }
    Ok(dtw_rolling(s.samples(), phi.samples(), true))
}

/// Exhaustive minimum over all admissible paths; restricted to instances with
/// `N + M <= 12`. Test oracle for the DP implementations.
pub fn brute_force_dtw(s: &Signal, phi: &Signal, weighted: bool) -> Result<f64, DtwError> {
    let a = s.samples();
    let b = phi.samples();
    let size = (a.len() - 1) + (b.len() - 1);
    if size > BRUTE_FORCE_MAX {
        return Err(DtwError::InstanceTooLarge {
            size,
            max: BRUTE_FORCE_MAX,
        });
    }
    if weighted && a.len() != b.len() {
        return Err(DtwError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let nf = (a.len() - 1) as f64;
    let mut best = f64::INFINITY;
    let start = if weighted { 0.0 } else { (a[0] - b[0]).abs() };
    enumerate(a, b, 0, 0, start, weighted, nf, &mut best);
    Ok(best)
}

fn enumerate(
    a: &[f64],
    b: &[f64],
    i: usize,
    j: usize,
    acc: f64,
    weighted: bool,
    nf: f64,
    best: &mut f64,
) {
    if i == a.len() - 1 && j == b.len() - 1 {
        if acc < *best {
            *best = acc;
        }
        return;
    }
    for (di, dj) in [(1usize, 1usize), (1, 0), (0, 1)] {
        let (ni, nj) = (i + di, j + dj);
        if ni >= a.len() || nj >= b.len() {
            continue;
        }
        let c = (a[ni] - b[nj]).abs();
        let add = if weighted {
            c * ((di + dj) as f64 / nf)
        } else {
            c
        };
        enumerate(a, b, ni, nj, acc + add, weighted, nf, best);
    }
}

/// Objective value of a given path, with or without the step weights.
/// Rejects paths that are malformed or do not span the given signals.
pub fn evaluate_path(
    s: &Signal,
    phi: &Signal,
    path: &DiscretePath,
    weighted: bool,
) -> Result<f64, DtwError> {
    let expected = (s.len() - 1, phi.len() - 1);
    if path.end() != expected {
        return Err(DtwError::BadEnd {
            expected,
            got: path.end(),
        });
    }
    let a = s.samples();
    let b = phi.samples();
    let steps = path.steps();
    if weighted {
        let mut acc = 0.0;
        for (k, w) in path.weights().iter().enumerate() {
            let (i, j) = steps[k + 1];
            acc += (a[i] - b[j]).abs() * w;
        }
        Ok(acc)
    } else {
        Ok(steps.iter().map(|&(i, j)| (a[i] - b[j]).abs()).sum())
    }
}
