//! Grid simulation of the continuum limit: the bridge with exchangeable
//! increments, its Vervaat transform, jump reflections, the exploration
//! process, the rearranged process `Z`, its local time, and the recursive
//! marks `D_n`.
//!
//! Everything lives on a dyadic grid of `m` cells; continuum claims carry
//! `O(m^{-1/2})` discretization bias, so statistical tolerances sit an order
//! above Monte Carlo noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joyal::{joyal_functional, JoyalOutput, TieRule};
use crate::model::ThetaVector;
use crate::walks::StepFunction;

/// Endpoint tolerance for the Vervaat transform's bridge check.
pub const BRIDGE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// GridPath
// ---------------------------------------------------------------------------

/// A real-valued path sampled at the `m + 1` points of a uniform grid on
/// `[0, 1]`, with the injected jumps recorded as `(grid index, size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    m: usize,
    values: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    jumps: Vec<(usize, f64)>,
}

impl GridPath {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "need at least one cell");
        assert!(
            values.iter().all(|v| v.is_finite()),
            "values must be finite"
        );
        Self {
            m: values.len() - 1,
            values,
            jumps: Vec::new(),
        }
    }

    pub fn with_jumps(mut self, jumps: Vec<(usize, f64)>) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jumps(&self) -> &[(usize, f64)] {
        &self.jumps
    }

    /// View the path as a step function on the grid cells, using the left
    /// endpoint of each cell.
    pub fn to_step(&self) -> StepFunction {
        let w = 1.0 / self.m as f64;
        StepFunction::new(vec![w; self.m], self.values[..self.m].to_vec())
            .expect("grid cells are positive")
    }

    /// Value just before a grid index (the previous grid point; 0 at the
    /// left edge).
    fn left_limit(&self, idx: usize) -> f64 {
        if idx == 0 {
            self.values[0]
        } else {
            self.values[idx - 1]
        }
    }
}

// ---------------------------------------------------------------------------
// Bridge construction
// ---------------------------------------------------------------------------

/// Standard Brownian bridge on the grid: a Gaussian random walk conditioned
/// by the pivot `b_k = W_k - (k/m) W_m`, which has the exact bridge
/// covariance `s(1 - t)` on grid points.
pub fn brownian_bridge<R: Rng>(m: usize, rng: &mut R) -> GridPath {
    assert!(m >= 2 && m.is_power_of_two(), "grid resolution must be 2^k");
    let scale = (1.0 / m as f64).sqrt();
    let mut walk = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    walk.push(0.0);
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(rng);
        acc += scale * z;
        walk.push(acc);
    }
    let last = walk[m];
    let values = walk
        .iter()
        .enumerate()
        .map(|(k, &w)| w - (k as f64 / m as f64) * last)
        .collect();
    GridPath::new(values)
}

/// The bridge with exchangeable increments
/// `X(s) = theta_0 b_s + sum_i theta_i (1{U_i <= s} - s)`.
///
/// Jump times are uniform, snapped to distinct grid indices in `1..=m` and
/// recorded in the jump list; `X(1) = 0` exactly.
pub fn bridge_exchangeable<R: Rng>(theta: &ThetaVector, m: usize, rng: &mut R) -> GridPath {
    let bridge = brownian_bridge(m, rng);
    let theta0 = theta.theta0();
    let mut values: Vec<f64> = bridge.values().iter().map(|&b| theta0 * b).collect();
    let mut jumps: Vec<(usize, f64)> = Vec::with_capacity(theta.hub_count());
    for &th in theta.thetas() {
        let idx = loop {
            let u: f64 = rng.random();
            let k = ((u * m as f64).round() as usize).clamp(1, m);
            if !jumps.iter().any(|&(j, _)| j == k) {
                break k;
            }
        };
        jumps.push((idx, th));
        for (j, v) in values.iter_mut().enumerate() {
            let indicator = if j >= idx { 1.0 } else { 0.0 };
            *v += th * (indicator - j as f64 / m as f64);
        }
    }
    jumps.sort_unstable_by_key(|&(idx, _)| idx);
    GridPath::new(values).with_jumps(jumps)
}

// ---------------------------------------------------------------------------
// Vervaat transform
// ---------------------------------------------------------------------------

/// Rotate a bridge at its (leftmost) argmin and recenter, yielding a
/// nonnegative path with zero endpoints; jump times shift along.
pub fn vervaat(x: &GridPath) -> Result<GridPath> {
    let m = x.m();
    let values = x.values();
    let gap = (values[0] - values[m]).abs();
    if gap > BRIDGE_TOL {
        return Err(Error::NonBridge(gap));
    }
    let mut s_min = 0usize;
    for (k, &v) in values.iter().enumerate().take(m) {
        if v < values[s_min] {
            s_min = k;
        }
    }
    let vmin = values[s_min];
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let idx = s_min + j;
        let v = if idx <= m {
            values[idx]
        } else {
            values[idx - m]
        };
        out.push(v - vmin);
    }
    out[m] = 0.0;
    let jumps = x
        .jumps()
        .iter()
        .map(|&(k, size)| (((k + m) - s_min) % m, size))
        .collect();
    Ok(GridPath::new(out).with_jumps(jumps))
}

// ---------------------------------------------------------------------------
// Jump reflections
// ---------------------------------------------------------------------------

/// The reflection attached to one jump: on `[start, end]` it holds
/// `inf over [t_i, s] of X minus X(t_i-)`, and vanishes elsewhere.
#[derive(Debug, Clone)]
pub struct JumpReflection {
    pub start: usize,
    pub end: usize,
    /// Values on grid indices `start..=end`.
    pub profile: Vec<f64>,
}

/// Remove the jumps of a Vervaat-transformed path by reflection:
/// `Y = X - sum_i R_i`, continuous across each jump time.
///
/// `T_i` is the first grid time `>= t_i` with `X <= X(t_i-)`; if the path is
/// never absorbed earlier the window closes at the last grid point, where
/// `X = 0` forces absorption (a grid artifact, visible as `end == m`). The
/// running infimum is clamped at the pre-jump level so the reflection
/// vanishes at absorption exactly as in the continuum, keeping `Y(1) = 0`.
pub fn jump_reflections(x: &GridPath) -> (GridPath, Vec<JumpReflection>) {
    let m = x.m();
    let mut y = x.values().to_vec();
    let mut reflections = Vec::with_capacity(x.jumps().len());
    for &(t_idx, _) in x.jumps() {
        let level = x.left_limit(t_idx);
        let mut profile = Vec::new();
        let mut running = f64::INFINITY;
        let mut end = m;
        for (s, &v) in x.values().iter().enumerate().skip(t_idx) {
            running = running.min(v);
            profile.push((running - level).max(0.0));
            if v <= level {
                end = s;
                break;
            }
        }
        for (k, &r) in profile.iter().enumerate() {
            y[t_idx + k] -= r;
        }
        reflections.push(JumpReflection {
            start: t_idx,
            end,
            profile,
        });
    }
    (GridPath::new(y).with_jumps(x.jumps().to_vec()), reflections)
}

// ---------------------------------------------------------------------------
// Exploration process
// ---------------------------------------------------------------------------

/// The exploration process `H = (2 / theta_0^2) Y` built from the full
/// pipeline: exchangeable bridge, Vervaat transform, jump reflections.
pub fn exploration<R: Rng>(theta: &ThetaVector, m: usize, rng: &mut R) -> Result<GridPath> {
    if theta.theta0() <= 0.0 {
        return Err(Error::DegenerateTheta);
    }
    let x_br = bridge_exchangeable(theta, m, rng);
    let x = vervaat(&x_br)?;
    let (y, _) = jump_reflections(&x);
    let scale = 2.0 / (theta.theta0() * theta.theta0());
    let values = y.values().iter().map(|&v| scale * v).collect();
    Ok(GridPath::new(values).with_jumps(y.jumps().to_vec()))
}

// ---------------------------------------------------------------------------
// Z, local time, and marks
// ---------------------------------------------------------------------------

/// One draw of `Z = J^U(H)` together with its marks and pivot.
#[derive(Debug, Clone)]
pub struct LimitZ {
    pub z: JoyalOutput,
    pub u: f64,
}

/// Apply the Joyal functional at an independent uniform pivot to the grid
/// exploration process. The mark durations sum to 1 within grid tolerance.
pub fn limit_z<R: Rng>(h: &GridPath, rng: &mut R) -> Result<LimitZ> {
    let u: f64 = rng.random();
    let step = h.to_step();
    let z = joyal_functional(&step, u, TieRule::ByLeftEndpoint)?;
    Ok(LimitZ { z, u })
}

/// The local time of `Z`: on each excursion interval `(g_i, d_i)` it equals
/// the height of the corresponding generalized excursion, extended between
/// excursions by the left-continuous step rule. Non-decreasing by
/// construction.
pub fn local_time(h: &GridPath, u: f64) -> Result<StepFunction> {
    let step = h.to_step();
    let set = crate::joyal::generalized_excursions(&step, u)?;
    let mut items: Vec<(f64, f64)> = set.items.iter().map(|e| (e.height, e.length)).collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let widths: Vec<f64> = items.iter().map(|&(_, l)| l).collect();
    let values: Vec<f64> = items.iter().map(|&(h, _)| h).collect();
    StepFunction::new(widths, values)
}

/// The recursive marks: `D_n` is the first excursion endpoint after
/// `D_{n-1} + V_n (1 - D_{n-1})` with fresh uniform `V_n`; when no endpoint
/// remains, `D_n = 1` and the sequence stops.
pub fn marks_d<R: Rng>(d_list: &[f64], rng: &mut R, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut prev = 0.0;
    for _ in 0..k {
        let v: f64 = rng.random();
        let threshold = prev + v * (1.0 - prev);
        let next = d_list
            .iter()
            .copied()
            .find(|&d| d > threshold)
            .unwrap_or(1.0);
        out.push(next);
        if next >= 1.0 {
            break;
        }
        prev = next;
    }
    out
}
