//! Heteroclinic connections `Uᵢⱼ` and surface tensions `σᵢⱼ`.
//!
//! The line is truncated to `[−L, L]` with the endpoints clamped to the two
//! wells. The action is discretized with the trapezoid rule on a uniform
//! grid and minimized by [`bb_descent`]; the reported action is the
//! Richardson extrapolation of the `n`-node and `(2n−1)`-node values.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::optimize::{bb_descent, DescentOptions, StopReason};
use crate::potential::{LocalQuadraticConstants, Potential};
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicProfile {
    /// Zero-based indices `(i, j)` of the wells at `η = −L` and `η = +L`.
    pub pair: (usize, usize),
    pub half_length: f64,
    pub values: Vec<Vec2>,
    /// Richardson-extrapolated action.
    pub action: f64,
    /// Trapezoid action of `values` itself.
    pub discrete_action: f64,
    /// `∫ (½|U′|² − W(U)) dη`, zero for an exact minimizer.
    pub equipartition_residual: f64,
    /// Best actions of the randomized restarts, when requested.
    pub restart_actions: Vec<f64>,
    /// Set when restarts disagree by more than [`RESTART_AGREEMENT`].
    pub restarts_disagree: bool,
}

/// Restarts whose actions differ by more than this are flagged.
pub const RESTART_AGREEMENT: f64 = 1e-6;

impl HeteroclinicProfile {
    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.values.len() - 1) as f64
    }

    pub fn eta(&self, k: usize) -> f64 {
        -self.half_length + self.spacing() * k as f64
    }

    /// Piecewise-linear interpolant, clamped to the end wells outside `[−L, L]`.
    pub fn sample(&self, eta: f64) -> Vec2 {
        let n = self.values.len();
        if eta <= -self.half_length {
            return self.values[0];
        }
        if eta >= self.half_length {
            return self.values[n - 1];
        }
        let s = (eta + self.half_length) / self.spacing();
        let k = (s.floor() as usize).min(n - 2);
        let t = s - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    /// The same connection traversed from `aⱼ` to `aᵢ`.
    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.pair = (self.pair.1, self.pair.0);
        r.values.reverse();
        r
    }

    /// CSV with a schema line naming the pair and action, then `eta,u1,u2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# schema=triple-junction/profile/1 pair={}-{} action={} half_length={} nodes={}",
            self.pair.0 + 1,
            self.pair.1 + 1,
            self.action,
            self.half_length,
            self.nodes()
        )?;
        writeln!(out, "eta,u1,u2")?;
        for (k, u) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", self.eta(k), u.x, u.y)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConnectionOptions {
    pub max_iterations: usize,
    /// Relative action decrease over `stall_window` iterations that ends the descent.
    pub stall_tolerance: f64,
    pub stall_window: usize,
    /// Number of randomized restarts besides the canonical initialization.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ConnectionOptions {
    fn default() -> Self {
        Self { max_iterations: 200_000, stall_tolerance: 1e-12, stall_window: 50, restarts: 0, seed: 0 }
    }
}

/// Trapezoid action of a chain with spacing `dx`, gradient written for
/// interior nodes only (endpoints are clamped).
fn chain_action(p: &Potential, values: &[Vec2], dx: f64, grad: Option<&mut [f64]>) -> f64 {
    let n = values.len();
    let mut action = 0.0;
    for k in 0..n - 1 {
        action += 0.5 * (values[k + 1] - values[k]).norm_squared() / dx;
    }
    for (k, u) in values.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        action += dx * w * p.evaluate(*u);
    }
    if let Some(g) = grad {
        for k in 1..n - 1 {
            let d = (2.0 * values[k] - values[k - 1] - values[k + 1]) / dx + dx * p.gradient(values[k]);
            g[2 * (k - 1)] = d.x;
            g[2 * (k - 1) + 1] = d.y;
        }
    }
    action
}

fn equipartition(p: &Potential, values: &[Vec2], dx: f64) -> f64 {
    let n = values.len();
    let mut kinetic = 0.0;
    for k in 0..n - 1 {
        kinetic += 0.5 * (values[k + 1] - values[k]).norm_squared() / dx;
    }
    let mut pot = 0.0;
    for (k, u) in values.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        pot += dx * w * p.evaluate(*u);
    }
    kinetic - pot
}

struct ChainResult {
    values: Vec<Vec2>,
    action: f64,
    converged: bool,
    grad_max: f64,
}

/// Minimize the clamped chain action starting from `init`.
fn relax_chain(p: &Potential, init: Vec<Vec2>, dx: f64, opts: &ConnectionOptions) -> ChainResult {
    let n = init.len();
    let (left, right) = (init[0], init[n - 1]);
    let mut x: Vec<f64> = init[1..n - 1].iter().flat_map(|u| [u.x, u.y]).collect();
    let mut buf = init;
    let descent = DescentOptions {
        max_iterations: opts.max_iterations,
        gradient_tolerance: 1e-13,
        stall_tolerance: opts.stall_tolerance,
        stall_window: opts.stall_window,
        initial_step: 0.25 * dx,
        ..Default::default()
    };
    let report = bb_descent(
        &mut x,
        |x, g| {
            for k in 1..n - 1 {
                buf[k] = Vec2::new(x[2 * (k - 1)], x[2 * (k - 1) + 1]);
            }
            chain_action(p, &buf, dx, Some(g))
        },
        &descent,
    );
    let mut values = Vec::with_capacity(n);
    values.push(left);
    values.extend((0..n - 2).map(|k| Vec2::new(x[2 * k], x[2 * k + 1])));
    values.push(right);
    let converged = report.stop != StopReason::BudgetExhausted;
    ChainResult { action: report.energy, values, converged, grad_max: report.grad_max }
}

fn linear_chain(from: Vec2, to: Vec2, n: usize) -> Vec<Vec2> {
    (0..n).map(|k| from + (to - from) * (k as f64 / (n - 1) as f64)).collect()
}

/// Halve the spacing of a chain, interpolating the new midpoints.
fn refine_chain(values: &[Vec2]) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(2 * values.len() - 1);
    for k in 0..values.len() - 1 {
        out.push(values[k]);
        out.push(0.5 * (values[k] + values[k + 1]));
    }
    out.push(values[values.len() - 1]);
    out
}

/// Minimize with clamped endpoints `from`, `to` on `[−L, L]` with `n` nodes,
/// then at `2n − 1` nodes. Returns the coarse chain and the extrapolated action.
fn solve_clamped(
    p: &Potential,
    init: Vec<Vec2>,
    half_length: f64,
    opts: &ConnectionOptions,
) -> (ChainResult, f64) {
    let n = init.len();
    let dx = 2.0 * half_length / (n - 1) as f64;
    let coarse = relax_chain(p, init, dx, opts);
    let fine = relax_chain(p, refine_chain(&coarse.values), 0.5 * dx, opts);
    let extrapolated = (4.0 * fine.action - coarse.action) / 3.0;
    let converged = coarse.converged && fine.converged;
    let grad_max = coarse.grad_max.max(fine.grad_max);
    (ChainResult { converged, grad_max, ..coarse }, extrapolated)
}

fn check_connection_args(p: &Potential, i: usize, j: usize, half_length: f64, nodes: usize) -> Result<()> {
    let m = p.minima().len();
    if i >= m || j >= m || i == j {
        return Err(Error::InvalidArgument(format!("pair ({}, {}) is not a pair of distinct wells", i + 1, j + 1)));
    }
    if half_length <= 0.0 {
        return Err(Error::InvalidArgument("truncation length must be positive".into()));
    }
    if nodes < 200 {
        return Err(Error::InvalidArgument(format!("{nodes} nodes; at least 200 are required")));
    }
    Ok(())
}

/// Action-minimizing connection from `aᵢ` (at `η = −L`) to `aⱼ` (at `η = +L`).
pub fn compute_connection(
    p: &Potential,
    i: usize,
    j: usize,
    half_length: f64,
    nodes: usize,
    opts: &ConnectionOptions,
) -> Result<HeteroclinicProfile> {
    check_connection_args(p, i, j, half_length, nodes)?;
    let (ai, aj) = (p.minimum(i), p.minimum(j));
    let dx = 2.0 * half_length / (nodes - 1) as f64;

    let (best, extrapolated) = solve_clamped(p, linear_chain(ai, aj, nodes), half_length, opts);
    let mut converged = best.converged;
    let mut best_values = best.values;
    let mut best_action = extrapolated;

    let mut restart_actions = Vec::new();
    if opts.restarts > 0 {
        restart_actions.push(extrapolated);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let scale = (aj - ai).norm();
        let normal = Vec2::new(-(aj - ai).y, (aj - ai).x) / scale;
        for _ in 0..opts.restarts {
            // bump the straight path sideways by a random smooth detour
            let amp = scale * (rng.gen::<f64>() - 0.5);
            let modes = rng.gen_range(1..=3) as f64;
            let init: Vec<Vec2> = linear_chain(ai, aj, nodes)
                .into_iter()
                .enumerate()
                .map(|(k, u)| {
                    let s = k as f64 / (nodes - 1) as f64;
                    u + normal * amp * (std::f64::consts::PI * modes * s).sin()
                })
                .collect();
            let (r, ext) = solve_clamped(p, init, half_length, opts);
            restart_actions.push(ext);
            if ext < best_action {
                best_action = ext;
                best_values = r.values;
                converged = r.converged;
            }
        }
    }
    let spread = restart_actions.iter().fold(f64::NEG_INFINITY, |m, &a| m.max(a))
        - restart_actions.iter().fold(f64::INFINITY, |m, &a| m.min(a));

    let profile = HeteroclinicProfile {
        pair: (i, j),
        half_length,
        discrete_action: chain_action(p, &best_values, dx, None),
        equipartition_residual: equipartition(p, &best_values, dx),
        values: best_values,
        action: best_action,
        restarts_disagree: restart_actions.len() > 1 && spread > RESTART_AGREEMENT,
        restart_actions,
    };
    if converged {
        Ok(profile)
    } else {
        Err(Error::ConnectionNotConverged(Box::new(profile)))
    }
}

/// Connections for the pairs (1,2), (1,3), (2,3), computed concurrently.
pub fn compute_all_connections(
    p: &Potential,
    half_length: f64,
    nodes: usize,
    opts: &ConnectionOptions,
) -> Result<[HeteroclinicProfile; 3]> {
    use rayon::prelude::*;
    let out: Vec<HeteroclinicProfile> = [(0, 1), (0, 2), (1, 2)]
        .par_iter()
        .map(|&(i, j)| compute_connection(p, i, j, half_length, nodes, opts))
        .collect::<Result<_>>()?;
    Ok(out.try_into().expect("three pairs"))
}

/// Surface tensions `σ₁₂`, `σ₁₃`, `σ₂₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTensions {
    pub s12: f64,
    pub s13: f64,
    pub s23: f64,
}

impl SurfaceTensions {
    /// Positive tensions satisfying the three strict triangle inequalities.
    pub fn new(s12: f64, s13: f64, s23: f64) -> Result<Self> {
        let t = Self { s12, s13, s23 };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        for (v, name) in [(self.s12, "σ12"), (self.s13, "σ13"), (self.s23, "σ23")] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be positive")));
            }
        }
        let cases = [
            ((1, 2), self.s12, [(1, 3), (2, 3)], self.s13 + self.s23),
            ((1, 3), self.s13, [(1, 2), (2, 3)], self.s12 + self.s23),
            ((2, 3), self.s23, [(1, 2), (1, 3)], self.s12 + self.s13),
        ];
        for (pair, v, others, sum) in cases {
            if v >= sum {
                return Err(Error::HypothesisViolation {
                    pair,
                    others,
                    detail: format!("{v} ≥ {sum}"),
                });
            }
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.s12 + self.s13 + self.s23
    }

    /// Tension between zero-based phases `i` and `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.s12,
            (0, 2) => self.s13,
            (1, 2) => self.s23,
            _ => panic!("no tension for pair ({i}, {j})"),
        }
    }

    /// Exchange the labels of phases 1 and 2.
    pub fn swapped_12(&self) -> Self {
        Self { s12: self.s12, s13: self.s23, s23: self.s13 }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { s12: t * self.s12, s13: t * self.s13, s23: t * self.s23 }
    }
}

/// Collect the three actions into [`SurfaceTensions`], failing when the
/// triangle inequalities do not hold strictly.
pub fn assemble_tensions(profiles: &[HeteroclinicProfile]) -> Result<SurfaceTensions> {
    let find = |a: usize, b: usize| {
        profiles
            .iter()
            .find(|pr| (pr.pair.0.min(pr.pair.1), pr.pair.0.max(pr.pair.1)) == (a, b))
            .map(|pr| pr.action)
            .ok_or_else(|| Error::InvalidArgument(format!("no profile for pair ({}, {})", a + 1, b + 1)))
    };
    SurfaceTensions::new(find(0, 1)?, find(0, 2)?, find(1, 2)?)
}

/// Stall tolerance of the constrained descents behind [`verify_near_well_bound`].
pub const NEAR_WELL_STALL_TOLERANCE: f64 = 1e-11;
/// Iteration budget of each constrained descent.
pub const NEAR_WELL_ITERATIONS: usize = 50_000;
/// Gradient max-norm at which a constrained descent that used its whole
/// budget is still accepted.
pub const NEAR_WELL_GRADIENT_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearWellBoundReport {
    pub delta: f64,
    pub sigma: f64,
    pub actions: Vec<f64>,
    /// `min over trials of (action − σ)/δ²`.
    pub min_scaled_gap: f64,
    /// `max(0, −min_scaled_gap)`, the smallest `C` with `action ≥ σ − Cδ²`.
    pub fitted_constant: f64,
    pub big_c_w: f64,
    pub passed: bool,
}

/// Minimize the action with endpoints on the circles `|v − aᵢ| = δ`,
/// `|v − aⱼ| = δ` at random angles and compare with `σᵢⱼ − C_W δ²`.
#[allow(clippy::too_many_arguments)]
pub fn verify_near_well_bound(
    p: &Potential,
    pair: (usize, usize),
    delta: f64,
    trials: usize,
    constants: &LocalQuadraticConstants,
    half_length: f64,
    nodes: usize,
    opts: &ConnectionOptions,
) -> Result<NearWellBoundReport> {
    let (i, j) = pair;
    check_connection_args(p, i, j, half_length, nodes)?;
    if !(delta >= 0.0 && delta < constants.delta_w) {
        return Err(Error::InvalidArgument(format!("δ = {delta} must lie in [0, δ_W = {})", constants.delta_w)));
    }
    let (ai, aj) = (p.minimum(i), p.minimum(j));
    let sigma = compute_connection(p, i, j, half_length, nodes, opts)?.action;

    // off-well endpoints leave a nearly flat translation mode along which the
    // descent drifts without bound on its iteration count; the action is
    // resolved long before, so a small gradient is accepted as converged
    let constrained = if delta > 0.0 {
        ConnectionOptions {
            stall_tolerance: opts.stall_tolerance.max(NEAR_WELL_STALL_TOLERANCE),
            max_iterations: opts.max_iterations.min(NEAR_WELL_ITERATIONS),
            ..*opts
        }
    } else {
        *opts
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut actions = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (t1, t2) = (rng.gen::<f64>() * std::f64::consts::TAU, rng.gen::<f64>() * std::f64::consts::TAU);
        let from = ai + delta * Vec2::new(t1.cos(), t1.sin());
        let to = aj + delta * Vec2::new(t2.cos(), t2.sin());
        let (r, ext) = solve_clamped(p, linear_chain(from, to, nodes), half_length, &constrained);
        if !(r.converged || r.grad_max < NEAR_WELL_GRADIENT_TOLERANCE) {
            return Err(Error::InvalidArgument(format!(
                "constrained descent stopped with gradient {:e}",
                r.grad_max
            )));
        }
        actions.push(ext);
    }
    let min_gap = actions.iter().map(|a| a - sigma).fold(f64::INFINITY, f64::min);
    let (min_scaled_gap, fitted_constant) = if delta > 0.0 {
        let s = min_gap / (delta * delta);
        (s, (-s).max(0.0))
    } else {
        (0.0, 0.0)
    };
    Ok(NearWellBoundReport {
        delta,
        sigma,
        actions,
        min_scaled_gap,
        fitted_constant,
        big_c_w: constants.big_c_w,
        passed: fitted_constant <= constants.big_c_w,
    })
}
