//! CSV and JSON artifacts. Every CSV opens with a `# schema=…` line and
//! numbers use Rust's shortest round-trip formatting, so fixed inputs give
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use triple_junction::appendix_checks::EtildeScan;
use triple_junction::interface_diagnostics::{CaseFlag, InterfaceStats, YStar};

use crate::pipeline::{Setup, SolveOutcome, Sweep};
use crate::RunError;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, RunError> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, RunError> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| RunError::Config(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(dir.join(name))
}

/// File-name fragment for an `ε` value, e.g. `0.05` → `eps0.05`.
pub fn eps_tag(epsilon: f64) -> String {
    format!("eps{epsilon}")
}

#[derive(Debug, Serialize)]
pub struct TensionsDoc {
    pub potential: String,
    pub minima: Vec<[f64; 2]>,
    pub relabeled: bool,
    pub s12: f64,
    pub s13: f64,
    pub s23: f64,
    pub sum: f64,
    pub angles: [f64; 3],
}

impl TensionsDoc {
    pub fn new(setup: &Setup) -> Self {
        let t = setup.tensions;
        Self {
            potential: setup.potential.tag().to_string(),
            minima: setup.potential.minima().iter().map(|a| [a.x, a.y]).collect(),
            relabeled: setup.relabeled,
            s12: t.s12,
            s13: t.s13,
            s23: t.s23,
            sum: t.sum(),
            angles: setup.angles.as_array(),
        }
    }
}

fn ystar_fields(y: &YStar) -> (&'static str, String) {
    match *y {
        YStar::Case1 { y, .. } => ("case1", y.to_string()),
        YStar::Case2 { y } => ("case2", opt(y)),
    }
}

const STATS_COLUMNS: &str = "epsilon,n,potential,variant,threshold,slack,case,ystar,mu1,mu2,beta,m_measure,s_measure";

fn stats_row(s: &InterfaceStats, n: usize, tag: &str) -> String {
    let (case, y) = ystar_fields(&s.ystar);
    let variant = match s.variant.alpha() {
        Some(a) => format!("refined(alpha={a})"),
        None => "weak".to_string(),
    };
    format!(
        "{},{n},{tag},{variant},{},{},{case},{y},{},{},{},{},{}",
        s.epsilon,
        s.threshold,
        s.slack,
        opt(s.mu1),
        opt(s.mu2),
        opt(s.beta),
        opt(s.m_measure),
        opt(s.s_measure)
    )
}

pub fn write_interface_stats<W: Write>(mut out: W, stats: &[&InterfaceStats], n: usize, tag: &str) -> Result<(), RunError> {
    writeln!(out, "# schema=triple-junction/interface-stats/1")?;
    writeln!(out, "{STATS_COLUMNS}")?;
    for s in stats {
        writeln!(out, "{}", stats_row(s, n, tag))?;
    }
    Ok(())
}

const SOLVE_COLUMNS: &str = "epsilon,n,potential,converged,iterations,energy,dirichlet,potential_energy,competitor_energy,\
sum_sigma,excess,competitor_excess,case,e_measured,ystar,mu1,mu2,beta,s_measure,sup_norm,scaled_gradient";

fn solve_row(o: &SolveOutcome, n: usize, tag: &str) -> String {
    let b = o.bound.as_ref();
    let s = o.refined.as_ref().or(o.weak.as_ref());
    let case = b.map_or("", |b| match b.case {
        CaseFlag::Case1 => "case1",
        CaseFlag::Case2 => "case2",
    });
    let y = s.and_then(|s| s.ystar.case1()).map(|(y, _)| y);
    format!(
        "{},{n},{tag},{},{},{},{},{},{},{},{},{},{case},{},{},{},{},{},{},{},{}",
        o.epsilon,
        o.converged(),
        o.log.entries.len(),
        o.energy.total,
        o.energy.dirichlet,
        o.energy.potential,
        o.competitor_energy,
        opt(b.map(|b| b.sum_sigma)),
        opt(b.map(|b| b.excess())),
        opt(b.map(|b| b.competitor_excess())),
        opt(b.and_then(|b| b.e_measured)),
        opt(y),
        opt(s.and_then(|s| s.mu1)),
        opt(s.and_then(|s| s.mu2)),
        opt(s.and_then(|s| s.beta)),
        opt(s.and_then(|s| s.s_measure)),
        o.apriori.sup_norm,
        o.apriori.scaled_gradient,
    )
}

/// One row per solve: energies, bound gaps and slice statistics.
pub fn write_solve_rows<W: Write>(mut out: W, outcomes: &[SolveOutcome], n: usize, tag: &str) -> Result<(), RunError> {
    writeln!(out, "# schema=triple-junction/solve/1")?;
    writeln!(out, "{SOLVE_COLUMNS}")?;
    for o in outcomes {
        writeln!(out, "{}", solve_row(o, n, tag))?;
    }
    Ok(())
}

/// Fitted constants as `name,value` rows.
pub fn write_sweep_fit<W: Write>(mut out: W, sweep: &Sweep) -> Result<(), RunError> {
    let c = &sweep.constants;
    writeln!(out, "# schema=triple-junction/sweep-fit/1")?;
    writeln!(out, "name,value")?;
    let mut row = |name: &str, v: Option<f64>| writeln!(out, "{name},{}", opt(v));
    row("alpha", c.alpha)?;
    row("localization_c", c.localization)?;
    row("localization_violation_epsilon", c.localization_violation)?;
    let b = c.bounds.as_ref();
    row("c_upper", b.map(|b| b.c_upper))?;
    row("c1_lower", b.map(|b| b.c1_lower))?;
    row("c_lower", b.map(|b| b.c_lower))?;
    row("c_e", b.map(|b| b.c_e))?;
    row("minimizer_exponent", b.map(|b| b.minimizer_exponent))?;
    row("competitor_exponent", b.map(|b| b.competitor_exponent))?;
    row("apriori_m", Some(c.apriori.m_sup))?;
    row("apriori_gradient_variation", Some(c.apriori.gradient_variation))?;
    Ok(())
}

pub fn write_scans<W: Write>(mut out: W, scans: &[EtildeScan]) -> Result<(), RunError> {
    writeln!(out, "# schema=triple-junction/etilde-scan/1")?;
    writeln!(out, "alpha1,alpha2,alpha3,resolution,argmin_mu,argmin_y,min_value,target,gap,on_boundary,near_origin")?;
    for s in scans {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.angles[0],
            s.angles[1],
            s.angles[2],
            s.resolution,
            s.argmin.0,
            s.argmin.1,
            s.min_value,
            s.target,
            s.gap,
            s.on_boundary,
            s.argmin_near_origin()
        )?;
    }
    Ok(())
}
