//! Masked Cartesian discretization of `J_ε` on the unit disk.
//!
//! Interior nodes (`|z| < 1`) are the unknowns. Nodes of the boundary band
//! are pinned to `g_ε` at their radially projected angle, and exterior nodes
//! hold `NaN`. Energies are deterministic: rows are assembled in parallel but
//! reduced sequentially in row order.

mod competitor;
mod grid;
mod io;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_data::BoundaryCondition;
use crate::junction_geometry::TriodPartition;
use crate::optimize::{bb_descent, DescentOptions, IterationRecord, StopReason};
use crate::potential::Potential;
use crate::{Error, Result, Vec2};

pub use competitor::{competitor, CompetitorLayout, CompetitorOptions};
pub use grid::{build_grid, DiskGrid, NodeKind, MIN_NODES};
pub use io::{read_field, write_field, FieldDump};

/// A discrete field on a [`DiskGrid`]; exterior entries are `NaN`.
#[derive(Debug, Clone)]
pub struct DiskField {
    grid: Arc<DiskGrid>,
    epsilon: f64,
    values: Vec<Vec2>,
}

impl DiskField {
    /// Interior values from `interior`, band values from `trace`.
    pub fn from_fn<F>(grid: Arc<DiskGrid>, epsilon: f64, trace: &dyn BoundaryCondition, interior: F) -> Self
    where
        F: Fn(Vec2) -> Vec2 + Sync,
    {
        let values = (0..grid.n() * grid.n())
            .into_par_iter()
            .map(|k| match grid.kind(k) {
                NodeKind::Interior => interior(grid.point(k)),
                NodeKind::Band { theta } => trace.value(theta),
                NodeKind::Exterior => Vec2::new(f64::NAN, f64::NAN),
            })
            .collect();
        Self { grid, epsilon, values }
    }

    /// Wrap raw node values. Only the exterior pattern is checked.
    pub fn from_values(grid: Arc<DiskGrid>, epsilon: f64, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != grid.n() * grid.n() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {}×{} grid",
                values.len(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(Self { grid, epsilon, values })
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> Vec2 {
        self.values[self.grid.index(i, j)]
    }

    /// Largest deviation of the band values from `trace`.
    pub fn boundary_mismatch(&self, trace: &dyn BoundaryCondition) -> f64 {
        self.grid
            .kinds()
            .iter()
            .zip(&self.values)
            .filter_map(|(kind, u)| match kind {
                NodeKind::Band { theta } => Some((u - trace.value(*theta)).norm()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    fn gather(&self) -> Vec<f64> {
        let free = self.grid.free_nodes();
        let mut x = Vec::with_capacity(2 * free.len());
        for &k in free {
            x.push(self.values[k].x);
            x.push(self.values[k].y);
        }
        x
    }

    fn scatter(&mut self, x: &[f64]) {
        for (m, &k) in self.grid.free_nodes().iter().enumerate() {
            self.values[k] = Vec2::new(x[2 * m], x[2 * m + 1]);
        }
    }
}

/// `J_ε` split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    /// `∫ ε/2 |∇u|²`.
    pub dirichlet: f64,
    /// `∫ W(u)/ε`.
    pub potential: f64,
    /// `∫ ε/2 |∂ₓu|²`.
    pub dirichlet_x: f64,
    /// `∫ ε/2 |∂_y u|²`.
    pub dirichlet_y: f64,
}

impl EnergyBreakdown {
    fn from_sums(epsilon: f64, sx: f64, sy: f64, sw: f64) -> Self {
        let (dx, dy, pot) = (epsilon * sx, epsilon * sy, sw / epsilon);
        Self { total: dx + dy + pot, dirichlet: dx + dy, potential: pot, dirichlet_x: dx, dirichlet_y: dy }
    }
}

/// Energy of `values`, writing the gradient with respect to every free node
/// into `grad` when given (non-free entries are zeroed).
fn assemble(p: &Potential, grid: &DiskGrid, epsilon: f64, values: &[Vec2], grad: Option<&mut [Vec2]>) -> EnergyBreakdown {
    let n = grid.n();
    let row = |j: usize, g: Option<&mut [Vec2]>| -> [f64; 3] {
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let k = j * n + i;
            let u = values[k];
            if grid.wx[k] > 0.0 {
                sx += grid.wx[k] * (values[k + 1] - u).norm_squared();
            }
            if grid.wy[k] > 0.0 {
                sy += grid.wy[k] * (values[k + n] - u).norm_squared();
            }
            if grid.mass[k] > 0.0 {
                sw += grid.mass[k] * p.evaluate(u);
            }
        }
        if let Some(g) = g {
            for (i, gk) in g.iter_mut().enumerate() {
                let k = j * n + i;
                if !matches!(grid.kind(k), NodeKind::Interior) {
                    *gk = Vec2::zeros();
                    continue;
                }
                let u = values[k];
                let mut stiff = grid.wx[k] * (u - values[k + 1]) + grid.wy[k] * (u - values[k + n]);
                if grid.wx[k - 1] > 0.0 {
                    stiff += grid.wx[k - 1] * (u - values[k - 1]);
                }
                if grid.wy[k - n] > 0.0 {
                    stiff += grid.wy[k - n] * (u - values[k - n]);
                }
                *gk = 2.0 * epsilon * stiff + (grid.mass[k] / epsilon) * p.gradient(u);
            }
        }
        [sx, sy, sw]
    };
    let rows: Vec<[f64; 3]> = match grad {
        Some(g) => g.par_chunks_mut(n).enumerate().map(|(j, gr)| row(j, Some(gr))).collect(),
        None => (0..n).into_par_iter().map(|j| row(j, None)).collect(),
    };
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for [a, b, c] in rows {
        sx += a;
        sy += b;
        sw += c;
    }
    EnergyBreakdown::from_sums(epsilon, sx, sy, sw)
}

/// Discrete `J_ε` of a field: cut-cell weighted midpoint rule for `W` and
/// edge differences for the Dirichlet term.
pub fn energy(p: &Potential, f: &DiskField) -> EnergyBreakdown {
    assemble(p, &f.grid, f.epsilon, &f.values, None)
}

/// Energy and its gradient with respect to the interior nodes, flattened as
/// `(u₁, u₂)` pairs in the order of [`DiskGrid::free_nodes`].
pub fn energy_gradient(p: &Potential, f: &DiskField) -> (EnergyBreakdown, Vec<f64>) {
    let mut g = vec![Vec2::zeros(); f.values.len()];
    let e = assemble(p, &f.grid, f.epsilon, &f.values, Some(&mut g));
    let flat = f.grid.free_nodes().iter().flat_map(|&k| [g[k].x, g[k].y]).collect();
    (e, flat)
}

/// Starting point of a minimization.
#[derive(Debug, Clone)]
pub enum InitialGuess {
    /// An explicit field, usually the competitor.
    Field(DiskField),
    /// The sharp-interface map `u₀` of a triod.
    SharpU0(TriodPartition),
    /// Seeded random convex combinations of the three minima.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Convergence requires a gradient max-norm below `tolerance · h / ε`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 50_000, tolerance: 1e-7, seed: 0 }
    }
}

/// Energy history of a minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLog {
    pub entries: Vec<IterationRecord>,
    pub stop: StopReason,
    pub converged: bool,
    pub gradient_threshold: f64,
}

impl ConvergenceLog {
    pub fn final_energy(&self) -> f64 {
        self.entries.last().map_or(f64::NAN, |r| r.energy)
    }

    /// Largest increase between consecutive logged energies (zero for a
    /// monotone log).
    pub fn max_increase(&self) -> f64 {
        self.entries.windows(2).map(|w| w[1].energy - w[0].energy).fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# schema=triple-junction/convergence/1 stop={:?} converged={}",
            self.stop, self.converged
        )?;
        writeln!(out, "iteration,energy,step,gradnorm")?;
        for r in &self.entries {
            writeln!(out, "{},{},{},{}", r.iteration, r.energy, r.step, r.grad_norm)?;
        }
        Ok(())
    }
}

fn initial_field(
    p: &Potential,
    grid: &Arc<DiskGrid>,
    trace: &dyn BoundaryCondition,
    epsilon: f64,
    init: InitialGuess,
    seed: u64,
) -> Result<DiskField> {
    match init {
        InitialGuess::Field(mut f) => {
            if f.grid.n() != grid.n() || f.epsilon != epsilon {
                return Err(Error::InvalidArgument(format!(
                    "initial field (n = {}, ε = {}) does not match (n = {}, ε = {epsilon})",
                    f.grid.n(),
                    f.epsilon,
                    grid.n()
                )));
            }
            for (k, kind) in grid.kinds().iter().enumerate() {
                if let NodeKind::Band { theta } = kind {
                    f.values[k] = trace.value(*theta);
                }
            }
            Ok(f)
        }
        InitialGuess::SharpU0(triod) => Ok(DiskField::from_fn(grid.clone(), epsilon, trace, |z| triod.u0(p, z).0)),
        InitialGuess::Random => {
            let mut f = DiskField::from_fn(grid.clone(), epsilon, trace, |_| Vec2::zeros());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let minima = p.minima();
            for &k in grid.free_nodes() {
                let w: Vec<f64> = minima.iter().map(|_| rng.gen::<f64>()).collect();
                let total: f64 = w.iter().sum();
                f.values[k] = minima.iter().zip(&w).map(|(a, wi)| a * (wi / total)).sum();
            }
            Ok(f)
        }
    }
}

/// Minimize the discrete `J_ε` with `u = g_ε` on the boundary band.
///
/// Returns the converged field and its log, or
/// [`Error::SolverNotConverged`] with the best iterate when the iteration
/// budget runs out before the gradient test passes.
pub fn minimize(
    p: &Potential,
    grid: &Arc<DiskGrid>,
    trace: &dyn BoundaryCondition,
    epsilon: f64,
    init: InitialGuess,
    opts: &SolverOptions,
) -> Result<(DiskField, ConvergenceLog)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("ε = {epsilon} must be positive")));
    }
    let mut field = initial_field(p, grid, trace, epsilon, init, opts.seed)?;
    let h = grid.spacing();
    let threshold = opts.tolerance * h / epsilon;
    let hessian_scale = 16.0 * epsilon + p.hessian_bounds().1.max(1.0) * h * h / epsilon;
    let descent = DescentOptions {
        max_iterations: opts.max_iterations,
        gradient_tolerance: threshold,
        initial_step: 1.0 / hessian_scale,
        ..DescentOptions::default()
    };

    let mut x = field.gather();
    let mut work = field.clone();
    let mut full_grad = vec![Vec2::zeros(); work.values.len()];
    let report = bb_descent(
        &mut x,
        |x, g| {
            work.scatter(x);
            let e = assemble(p, grid, epsilon, &work.values, Some(&mut full_grad));
            for (m, &k) in grid.free_nodes().iter().enumerate() {
                g[2 * m] = full_grad[k].x;
                g[2 * m + 1] = full_grad[k].y;
            }
            e.total
        },
        &descent,
    );
    field.scatter(&x);
    let converged = report.grad_max < threshold;
    let log = ConvergenceLog { entries: report.history, stop: report.stop, converged, gradient_threshold: threshold };
    if converged {
        Ok((field, log))
    } else {
        Err(Error::SolverNotConverged { best: Box::new(field), log })
    }
}

/// The sup-norm and scaled gradient of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub epsilon: f64,
    /// `max |u|` over active nodes.
    pub sup_norm: f64,
    /// `ε · max |∇ₕu|` from forward differences at interior nodes.
    pub scaled_gradient: f64,
}

pub fn check_apriori(f: &DiskField) -> AprioriReport {
    let grid = &f.grid;
    let n = grid.n();
    let h = grid.spacing();
    let sup_norm = f.values.iter().filter(|u| u.x.is_finite()).map(|u| u.norm()).fold(0.0, f64::max);
    let max_grad = grid
        .free_nodes()
        .iter()
        .map(|&k| {
            let dx = (f.values[k + 1] - f.values[k]) / h;
            let dy = (f.values[k + n] - f.values[k]) / h;
            (dx.norm_squared() + dy.norm_squared()).sqrt()
        })
        .fold(0.0, f64::max);
    AprioriReport { epsilon: f.epsilon, sup_norm, scaled_gradient: f.epsilon * max_grad }
}

/// Common bounds over a sweep of a-priori reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriSummary {
    /// A single constant bounding both `max|u|` and `ε·max|∇ₕu|`.
    pub m_sup: f64,
    /// `(max − min)/min` of the scaled gradients.
    pub gradient_variation: f64,
}

pub fn summarize_apriori(reports: &[AprioriReport]) -> AprioriSummary {
    let m_sup = reports.iter().map(|r| r.sup_norm.max(r.scaled_gradient)).fold(0.0, f64::max);
    let gmax = reports.iter().map(|r| r.scaled_gradient).fold(0.0, f64::max);
    let gmin = reports.iter().map(|r| r.scaled_gradient).fold(f64::INFINITY, f64::min);
    let gradient_variation = if gmin > 0.0 { (gmax - gmin) / gmin } else { f64::INFINITY };
    AprioriSummary { m_sup, gradient_variation }
}
