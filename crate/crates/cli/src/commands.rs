//! The five subcommands. Each writes its artifacts under the configured
//! output directory and returns a short human-readable summary.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use triple_junction::appendix_checks::{strict_inequality_residual, scan_etilde, EtildeScan};
use triple_junction::disk_solver::{build_grid, write_field};
use triple_junction::junction_geometry::{solve_angles, JunctionAngles};
use triple_junction::potential::{certify_h1, Sampling};

use crate::pipeline::{self, Setup, SolveOutcome};
use crate::report::{self, eps_tag, TensionsDoc};
use crate::{RunConfig, RunError};

pub fn sigma(cfg: &RunConfig) -> Result<(Setup, String), RunError> {
    let setup = pipeline::prepare(cfg)?;
    let dir = &cfg.output_dir;
    for pr in &setup.profiles {
        let mut out = report::create(dir, &format!("profile_{}{}.csv", pr.pair.0 + 1, pr.pair.1 + 1))?;
        pr.write_csv(&mut out)?;
        out.flush()?;
    }
    report::write_json(dir, "tensions.json", &TensionsDoc::new(&setup))?;
    let t = setup.tensions;
    let msg = format!("σ12 = {} σ13 = {} σ23 = {} (sum {})", t.s12, t.s13, t.s23, t.sum());
    Ok((setup, msg))
}

#[derive(Debug, Serialize)]
struct AnglesDoc {
    tensions: [f64; 3],
    angles: [f64; 3],
    relabeled: bool,
    ray_12: f64,
    ray_13: f64,
    ray_32: f64,
    sine_law_residual: f64,
}

/// Young angles of the configured tensions, or of the computed ones when the
/// configuration has none.
pub fn angles(cfg: &RunConfig) -> Result<String, RunError> {
    let t = match cfg.tension_override() {
        Some(t) => t,
        None => pipeline::prepare(cfg)?.tensions,
    };
    let a = solve_angles(&t)?;
    let doc = AnglesDoc {
        tensions: [t.s12, t.s13, t.s23],
        angles: a.as_array(),
        relabeled: a.relabeled,
        ray_12: a.ray_12(),
        ray_13: a.ray_13(),
        ray_32: a.ray_32(),
        sine_law_residual: a.sine_law_residual(&t),
    };
    report::write_json(&cfg.output_dir, "angles.json", &doc)?;
    Ok(format!("α = ({}, {}, {}){}", a.alpha1, a.alpha2, a.alpha3, if a.relabeled { ", phases 1 and 2 exchanged" } else { "" }))
}

fn persist_outcome(cfg: &RunConfig, setup: &Setup, o: &SolveOutcome) -> Result<(), RunError> {
    let dir = &cfg.output_dir;
    let tag = eps_tag(o.epsilon);
    let mut out = report::create(dir, &format!("field_{tag}.tjf"))?;
    write_field(&mut out, &o.field, setup.potential.tag(), setup.angles.as_array())?;
    out.flush()?;
    let mut out = report::create(dir, &format!("convergence_{tag}.csv"))?;
    o.log.write_csv(&mut out)?;
    out.flush()?;
    if let Some(s) = o.refined.as_ref().or(o.weak.as_ref()) {
        let mut out = report::create(dir, &format!("lambda_{tag}.csv"))?;
        s.lambda.write_csv(&mut out, o.epsilon, cfg.n, setup.potential.tag())?;
        out.flush()?;
    }
    Ok(())
}

fn persist_tables(cfg: &RunConfig, setup: &Setup, outcomes: &[SolveOutcome], name: &str) -> Result<(), RunError> {
    let dir = &cfg.output_dir;
    let tag = setup.potential.tag();
    let mut out = report::create(dir, name)?;
    report::write_solve_rows(&mut out, outcomes, cfg.n, tag)?;
    out.flush()?;
    let stats: Vec<_> = outcomes.iter().flat_map(|o| o.refined.iter().chain(o.weak.iter())).collect();
    let mut out = report::create(dir, "interface_stats.csv")?;
    report::write_interface_stats(&mut out, &stats, cfg.n, tag)?;
    out.flush()?;
    Ok(())
}

fn unconverged(outcomes: &[SolveOutcome]) -> Result<(), RunError> {
    let bad: Vec<String> = outcomes.iter().filter(|o| !o.converged()).map(|o| o.epsilon.to_string()).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(RunError::NotConverged(format!(
            "ε = {} stopped before the gradient test passed; artifacts carry converged=false",
            bad.join(", ")
        )))
    }
}

/// One solve per configured `ε`, each written out even when it did not
/// converge.
pub fn solve(cfg: &RunConfig) -> Result<String, RunError> {
    let setup = pipeline::prepare(cfg)?;
    report::write_json(&cfg.output_dir, "tensions.json", &TensionsDoc::new(&setup))?;
    let grid = Arc::new(build_grid(cfg.n)?);
    let mut outcomes = Vec::new();
    for &eps in &cfg.epsilons {
        let o = pipeline::solve_one(&setup, cfg, &grid, eps, cfg.alpha)?;
        persist_outcome(cfg, &setup, &o)?;
        outcomes.push(o);
    }
    persist_tables(cfg, &setup, &outcomes, "solve.csv")?;
    unconverged(&outcomes)?;
    let lines: Vec<String> = outcomes
        .iter()
        .map(|o| format!("ε = {}: J = {} competitor = {}", o.epsilon, o.energy.total, o.competitor_energy))
        .collect();
    Ok(lines.join("\n"))
}

pub fn sweep(cfg: &RunConfig) -> Result<String, RunError> {
    let setup = pipeline::prepare(cfg)?;
    report::write_json(&cfg.output_dir, "tensions.json", &TensionsDoc::new(&setup))?;
    let sw = pipeline::sweep(&setup, cfg)?;
    for o in &sw.outcomes {
        persist_outcome(cfg, &setup, o)?;
    }
    persist_tables(cfg, &setup, &sw.outcomes, "sweep.csv")?;
    let mut out = report::create(&cfg.output_dir, "sweep_fit.csv")?;
    report::write_sweep_fit(&mut out, &sw)?;
    out.flush()?;
    unconverged(&sw.outcomes)?;
    let c = &sw.constants;
    let mut msg = format!("Σσ = {}", setup.tensions.sum());
    for o in &sw.outcomes {
        msg += &format!("\nε = {}: J = {} competitor = {}", o.epsilon, o.energy.total, o.competitor_energy);
    }
    if let Some(b) = &c.bounds {
        msg += &format!(
            "\nexponents: minimizer {} competitor {}; C_upper = {} C_lower = {}",
            b.minimizer_exponent, b.competitor_exponent, b.c_upper, b.c_lower
        );
    }
    if let Some(l) = c.localization {
        msg += &format!("\nlocalization C = {l}");
    }
    Ok(msg)
}

/// Random valid triple with `α₂ ≥ α₁`.
pub fn random_angles(rng: &mut impl Rng) -> JunctionAngles {
    loop {
        let a1 = rng.gen_range(0.02..PI - 0.02);
        let a2 = rng.gen_range(0.02..PI - 0.02);
        let a3 = TAU - a1 - a2;
        if a3 > 0.02 && a3 < PI - 0.02 {
            if let Ok(a) = JunctionAngles::new(a1.min(a2), a1.max(a2), a3) {
                return a;
            }
        }
    }
}

/// Scan agreement tolerance at the exact origin node.
pub const SCAN_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const SINE_LAW_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

pub fn scan_passes(s: &EtildeScan) -> bool {
    s.argmin_near_origin() && (s.gap).abs() <= SCAN_TOLERANCE
}

/// The closed-form and geometry checks, independent of any PDE solve.
pub fn verification_checks(cfg: &RunConfig) -> (Vec<Check>, Vec<EtildeScan>) {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let configured = cfg.angles.map(|[a1, a2, a3]| JunctionAngles::new(a1, a2, a3));
    if let Some(r) = &configured {
        let detail = match r {
            Ok(a) => format!("{:?}", a.as_array()),
            Err(e) => e.to_string(),
        };
        checks.push(Check::new("configured_angles", r.is_ok(), detail));
    }

    let equal = JunctionAngles::new(TAU / 3.0, TAU / 3.0, TAU / 3.0).expect("equal angles");
    let mut triples = vec![equal];
    if let Some(Ok(a)) = configured {
        triples.push(a);
    }
    triples.extend((0..10).map(|_| random_angles(&mut rng)));
    let scans: Vec<EtildeScan> = triples.iter().filter_map(|a| scan_etilde(a, 201).ok()).collect();
    let worst = scans.iter().map(|s| s.gap.abs()).fold(0.0, f64::max);
    checks.push(Check::new(
        "etilde_scan",
        scans.len() == triples.len() && scans.iter().all(scan_passes),
        format!("{} scans, worst |gap| {worst:e}", scans.len()),
    ));

    let mut worst_b = 0.0f64;
    let mut positive = true;
    for _ in 0..1000 {
        let a = random_angles(&mut rng);
        let (direct, closed) = strict_inequality_residual(&a);
        worst_b = worst_b.max((direct - closed).abs());
        positive &= closed > 0.0;
    }
    checks.push(Check::new(
        "strict_inequality",
        worst_b < IDENTITY_TOLERANCE && positive,
        format!("1000 triples, worst difference {worst_b:e}, positive {positive}"),
    ));

    let mut worst_law = 0.0f64;
    let mut worst_trip = 0.0f64;
    for _ in 0..100 {
        let a = random_angles(&mut rng);
        let t = a.tensions_up_to_scale().scaled(rng.gen_range(0.5..5.0));
        match solve_angles(&t) {
            Ok(b) => {
                worst_law = worst_law.max(b.sine_law_residual(&t));
                let d = a.as_array().iter().zip(b.as_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                worst_trip = worst_trip.max(d);
            }
            Err(_) => worst_law = f64::INFINITY,
        }
    }
    checks.push(Check::new(
        "young_round_trip",
        worst_law < SINE_LAW_TOLERANCE && worst_trip < SINE_LAW_TOLERANCE,
        format!("100 triples, sine-law residual {worst_law:e}, angle round trip {worst_trip:e}"),
    ));

    if let Some(t) = cfg.tension_override() {
        let r = solve_angles(&t);
        let detail = match &r {
            Ok(a) => format!("angles {:?}", a.as_array()),
            Err(e) => e.to_string(),
        };
        checks.push(Check::new("configured_tensions", r.is_ok(), detail));
    }

    match cfg.potential.build() {
        Ok(p) => {
            let rep = certify_h1(&p, &Sampling { seed: cfg.seed, ..Sampling::default() });
            let failed: Vec<String> =
                rep.clauses.iter().filter(|c| !c.passed).map(|c| format!("{:?}", c.clause)).collect();
            checks.push(Check::new(
                "potential_h1",
                rep.passed(),
                if failed.is_empty() { "all clauses hold".into() } else { failed.join(" ") },
            ));
        }
        Err(e) => checks.push(Check::new("potential_h1", false, e.to_string())),
    }
    (checks, scans)
}

pub fn verify(cfg: &RunConfig) -> Result<String, RunError> {
    let (checks, scans) = verification_checks(cfg);
    let dir = &cfg.output_dir;
    let mut out = report::create(dir, "verify.csv")?;
    writeln!(out, "# schema=triple-junction/verify/1")?;
    writeln!(out, "check,passed,detail")?;
    for c in &checks {
        writeln!(out, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"))?;
    }
    out.flush()?;
    let mut out = report::create(dir, "etilde_scans.csv")?;
    report::write_scans(&mut out, &scans)?;
    out.flush()?;
    let lines: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    let summary = lines.join("\n");
    if checks.iter().all(|c| c.passed) {
        Ok(summary)
    } else {
        Err(RunError::Verification(summary))
    }
}

