//! Connections, labels, per-ε solves and sweep fits.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use triple_junction::boundary_data::{BoundaryCondition, BoundaryTrace, ConstantTrace};
use triple_junction::connections::{assemble_tensions, compute_all_connections, HeteroclinicProfile, SurfaceTensions};
use triple_junction::disk_solver::{
    build_grid, check_apriori, competitor, energy, minimize, summarize_apriori, AprioriReport, AprioriSummary,
    ConvergenceLog, DiskField, DiskGrid, EnergyBreakdown, InitialGuess,
};
use triple_junction::interface_diagnostics::{
    bound_report, fit_alpha, fit_sweep, interface_stats, BoundReport, InterfaceStats, SliceContext, SliceVariant,
    SweepFit,
};
use triple_junction::junction_geometry::{canonical_labels, JunctionAngles, TriodPartition};
use triple_junction::potential::Potential;
use triple_junction::{Error, Vec2};

use crate::{BoundaryConfig, RunConfig, RunError};

/// Potential, tensions and angles after relabeling so that `α₂ ≥ α₁`.
#[derive(Debug, Clone)]
pub struct Setup {
    pub potential: Potential,
    pub tensions: SurfaceTensions,
    pub angles: JunctionAngles,
    /// Profiles for the pairs (1,2), (1,3), (2,3) in the canonical labels.
    pub profiles: Vec<HeteroclinicProfile>,
    /// Labels 1 and 2 of the input were exchanged.
    pub relabeled: bool,
    pub delta_w: f64,
}

impl Setup {
    pub fn minima(&self) -> [Vec2; 3] {
        [self.potential.minimum(0), self.potential.minimum(1), self.potential.minimum(2)]
    }

    pub fn triod(&self) -> TriodPartition {
        TriodPartition::new(self.angles)
    }

    pub fn trace(&self, epsilon: f64, c0: f64) -> Result<BoundaryTrace, RunError> {
        Ok(BoundaryTrace::new(self.angles, self.minima(), epsilon, c0)?)
    }

    pub fn slice_context(&self, trace: BoundaryTrace) -> SliceContext {
        SliceContext::new(trace, self.tensions, self.delta_w)
    }
}

fn swap12(k: usize) -> usize {
    match k {
        0 => 1,
        1 => 0,
        k => k,
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Setup, RunError> {
    let p = cfg.potential.build()?;
    let profiles =
        compute_all_connections(&p, cfg.connection_half_length, cfg.connection_nodes, &cfg.connection)?;
    let tensions = match cfg.tension_override() {
        Some(t) => {
            t.check()?;
            t
        }
        None => assemble_tensions(&profiles)?,
    };
    let (potential, tensions, angles) = canonical_labels(&p, &tensions)?;
    let relabeled = potential != p;
    let mut profiles = profiles.to_vec();
    if relabeled {
        for pr in &mut profiles {
            pr.pair = (swap12(pr.pair.0), swap12(pr.pair.1));
        }
    }
    profiles.sort_by_key(|pr| (pr.pair.0.min(pr.pair.1), pr.pair.0.max(pr.pair.1)));
    let delta_w = 0.5 * potential.min_pair_distance();
    Ok(Setup { potential, tensions, angles, profiles, relabeled, delta_w })
}

/// Everything measured on one minimizer.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub epsilon: f64,
    pub field: DiskField,
    pub log: ConvergenceLog,
    pub energy: EnergyBreakdown,
    pub competitor_energy: f64,
    pub apriori: AprioriReport,
    /// Refined slice statistics, when `ε^{1/4} < δ_W`.
    pub refined: Option<InterfaceStats>,
    /// Weak slice statistics, when `ε^{1/6} < δ_W`.
    pub weak: Option<InterfaceStats>,
    pub bound: Option<BoundReport>,
    /// Wall time of the minimization.
    pub seconds: f64,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.log.converged
    }
}

fn run_minimizer(
    p: &Potential,
    grid: &Arc<DiskGrid>,
    trace: &dyn BoundaryCondition,
    epsilon: f64,
    init: InitialGuess,
    cfg: &RunConfig,
) -> Result<(DiskField, ConvergenceLog, f64), RunError> {
    let start = Instant::now();
    let (field, log) = match minimize(p, grid, trace, epsilon, init, &cfg.solver) {
        Ok(r) => r,
        Err(Error::SolverNotConverged { best, log }) => (*best, log),
        Err(e) => return Err(e.into()),
    };
    Ok((field, log, start.elapsed().as_secs_f64()))
}

/// Slack coefficient of the refined variant at this field, or `None` when the
/// refined threshold is not below `δ_W`.
pub fn refined_alpha(field: &DiskField, ctx: &SliceContext) -> Result<Option<f64>, RunError> {
    let thr = field.epsilon().powf(0.25);
    if thr >= ctx.delta_w {
        return Ok(None);
    }
    Ok(Some(fit_alpha(field, ctx, thr)?))
}

/// Minimize from the competitor and measure. Non-convergence is recorded in
/// the outcome's log rather than raised.
pub fn solve_one(
    setup: &Setup,
    cfg: &RunConfig,
    grid: &Arc<DiskGrid>,
    epsilon: f64,
    alpha: Option<f64>,
) -> Result<SolveOutcome, RunError> {
    let p = &setup.potential;
    if let BoundaryConfig::Phase(k) = cfg.boundary {
        let a = p.minimum(k - 1);
        let trace = ConstantTrace(a);
        let start = DiskField::from_fn(grid.clone(), epsilon, &trace, |_| a);
        let competitor_energy = energy(p, &start).total;
        let (field, log, seconds) = run_minimizer(p, grid, &trace, epsilon, InitialGuess::Field(start), cfg)?;
        return Ok(SolveOutcome {
            epsilon,
            energy: energy(p, &field),
            competitor_energy,
            apriori: check_apriori(&field),
            field,
            log,
            refined: None,
            weak: None,
            bound: None,
            seconds,
        });
    }

    let trace = setup.trace(epsilon, cfg.c0)?;
    let comp = competitor(p, epsilon, grid, setup.triod(), &setup.profiles, &trace, cfg.competitor)?;
    let competitor_energy = energy(p, &comp).total;
    let (field, log, seconds) = run_minimizer(p, grid, &trace, epsilon, InitialGuess::Field(comp), cfg)?;
    let e = energy(p, &field);
    let ctx = setup.slice_context(trace);

    let alpha = match alpha {
        Some(a) => Some(a),
        None => refined_alpha(&field, &ctx)?,
    };
    let refined = match alpha {
        Some(alpha) if epsilon.powf(0.25) < ctx.delta_w => {
            Some(interface_stats(&field, &ctx, SliceVariant::Refined { alpha })?)
        }
        _ => None,
    };
    let weak = if epsilon.powf(1.0 / 6.0) < ctx.delta_w {
        Some(interface_stats(&field, &ctx, SliceVariant::Weak)?)
    } else {
        None
    };
    let bound = refined.as_ref().or(weak.as_ref()).map(|s| bound_report(e.total, competitor_energy, s, &ctx));
    Ok(SolveOutcome {
        epsilon,
        energy: e,
        competitor_energy,
        apriori: check_apriori(&field),
        field,
        log,
        refined,
        weak,
        bound,
        seconds,
    })
}

/// Fitted constants of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConstants {
    /// Refined slack coefficient, fitted at the largest `ε` unless configured.
    pub alpha: Option<f64>,
    /// `C` in `|y*| ≤ Cε^{1/4}`, fitted at the largest `ε` with a floor of
    /// one grid spacing.
    pub localization: Option<f64>,
    /// Largest `ε` at which `|y*| ≤ Cε^{1/4}` fails, if any.
    pub localization_violation: Option<f64>,
    pub bounds: Option<SweepFit>,
    pub apriori: AprioriSummary,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub outcomes: Vec<SolveOutcome>,
    pub constants: SweepConstants,
}

impl Sweep {
    pub fn all_converged(&self) -> bool {
        self.outcomes.iter().all(SolveOutcome::converged)
    }

    /// `C ε^{1/4}`.
    pub fn localization_scale(&self, epsilon: f64) -> Option<f64> {
        self.constants.localization.map(|c| c * epsilon.powf(0.25))
    }
}

pub fn sweep(setup: &Setup, cfg: &RunConfig) -> Result<Sweep, RunError> {
    if cfg.epsilons.len() < 3 {
        return Err(RunError::Config(format!("a sweep needs at least 3 ε values, got {}", cfg.epsilons.len())));
    }
    let grid = Arc::new(build_grid(cfg.n)?);
    let first = solve_one(setup, cfg, &grid, cfg.epsilons[0], cfg.alpha)?;
    let alpha = cfg.alpha.or(first.refined.as_ref().and_then(|s| s.variant.alpha()));
    let rest: Vec<SolveOutcome> = cfg.epsilons[1..]
        .par_iter()
        .map(|&eps| solve_one(setup, cfg, &grid, eps, alpha))
        .collect::<Result<_, _>>()?;
    let mut outcomes = vec![first];
    outcomes.extend(rest);

    let h = grid.spacing();
    let ystar = |o: &SolveOutcome| o.refined.as_ref().and_then(|s| s.ystar.case1()).map(|(y, _)| y);
    let localization = ystar(&outcomes[0]).map(|y| y.abs().max(h) / outcomes[0].epsilon.powf(0.25));
    let localization_violation = localization.and_then(|c| {
        outcomes[1..]
            .iter()
            .find(|o| ystar(o).is_none_or(|y| y.abs() > c * o.epsilon.powf(0.25)))
            .map(|o| o.epsilon)
    });
    let reports: Vec<BoundReport> = outcomes.iter().filter_map(|o| o.bound.clone()).collect();
    let bounds = if reports.len() == outcomes.len() { Some(fit_sweep(&reports)?) } else { None };
    let apriori = summarize_apriori(&outcomes.iter().map(|o| o.apriori).collect::<Vec<_>>());
    Ok(Sweep { outcomes, constants: SweepConstants { alpha, localization, localization_violation, bounds, apriori } })
}
