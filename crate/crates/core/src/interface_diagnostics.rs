//! Slice statistics of a computed field.
//!
//! Every set measure is an `h`-weighted count of grid nodes along rows
//! `γ_y = {y = const} ∩ B₁` or along the graph `x ↦ (x, ζ(x))`, with
//! `ζ(x) = min{y*, √(1 − x²)}`. Two threshold/slack pairs are supported:
//! the weak variant `(ε^{1/6}, ε^{1/3})` and the refined variant
//! `(ε^{1/4}, α ε^{1/2})`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{BoundaryCondition, BoundaryTrace};
use crate::connections::SurfaceTensions;
use crate::disk_solver::{DiskField, NodeKind};
use crate::junction_geometry::JunctionAngles;
use crate::{Error, Result, Vec2};

/// Everything the measurements need besides the field.
#[derive(Debug, Clone)]
pub struct SliceContext {
    pub trace: BoundaryTrace,
    pub tensions: SurfaceTensions,
    /// Radius below which `|u − aᵢ|` counts as "in phase `i`"; thresholds
    /// must lie in `(0, δ_W)`.
    pub delta_w: f64,
}

impl SliceContext {
    pub fn new(trace: BoundaryTrace, tensions: SurfaceTensions, delta_w: f64) -> Self {
        Self { trace, tensions, delta_w }
    }

    fn angles(&self) -> &JunctionAngles {
        &self.trace.angles
    }

    fn trim(&self) -> f64 {
        self.trace.c0 * self.trace.epsilon
    }

    /// Lowest admissible `y*`, `−cos(α₃/2) + c₀ε`.
    pub fn y_start(&self) -> f64 {
        -(0.5 * self.angles().alpha3).cos() + self.trim()
    }

    /// Case 1 requires `y* ≤ cos((α₂ − α₁)/2) − c₀ε`.
    pub fn y_case_limit(&self) -> f64 {
        self.angles().half_gap().cos() - self.trim()
    }

    fn check_threshold(&self, threshold: f64) -> Result<()> {
        if threshold > 0.0 && threshold < self.delta_w {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("threshold {threshold} is outside (0, δ_W = {})", self.delta_w)))
        }
    }
}

/// Threshold and slack used to define `λᵢ` and `y*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum SliceVariant {
    /// Threshold `ε^{1/6}`, slack `ε^{1/3}`.
    Weak,
    /// Threshold `ε^{1/4}`, slack `α ε^{1/2}`.
    Refined { alpha: f64 },
}

impl SliceVariant {
    pub fn threshold(&self, epsilon: f64) -> f64 {
        match self {
            Self::Weak => epsilon.powf(1.0 / 6.0),
            Self::Refined { .. } => epsilon.powf(0.25),
        }
    }

    pub fn slack(&self, epsilon: f64) -> f64 {
        match self {
            Self::Weak => epsilon.cbrt(),
            Self::Refined { alpha } => alpha * epsilon.sqrt(),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::Weak => None,
            Self::Refined { alpha } => Some(*alpha),
        }
    }
}

/// `λᵢ(y)` and `𝓛¹(γ_y)` on every grid row that meets the disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaProfiles {
    pub threshold: f64,
    pub y: Vec<f64>,
    pub row_length: Vec<f64>,
    pub lambda: [Vec<f64>; 3],
}

impl LambdaProfiles {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, epsilon: f64, n: usize, tag: &str) -> std::io::Result<()> {
        writeln!(
            out,
            "# schema=triple-junction/lambda/1 epsilon={epsilon} n={n} potential={tag} threshold={}",
            self.threshold
        )?;
        writeln!(out, "y,row_length,lambda1,lambda2,lambda3")?;
        for r in 0..self.y.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.y[r], self.row_length[r], self.lambda[0][r], self.lambda[1][r], self.lambda[2][r]
            )?;
        }
        Ok(())
    }
}

/// Per-row `h · #{interior nodes with |u − aᵢ| < threshold}` for all three phases.
pub fn lambda_profiles(f: &DiskField, ctx: &SliceContext, threshold: f64) -> Result<LambdaProfiles> {
    ctx.check_threshold(threshold)?;
    let grid = f.grid();
    let (n, h) = (grid.n(), grid.spacing());
    let minima = ctx.trace.minima;
    let rows: Vec<Option<(f64, f64, [f64; 3])>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut count = 0usize;
            let mut hits = [0usize; 3];
            for i in 0..n {
                if grid.kind_at(i, j) != NodeKind::Interior {
                    continue;
                }
                count += 1;
                let u = f.value(i, j);
                for (c, a) in hits.iter_mut().zip(&minima) {
                    if (u - a).norm() < threshold {
                        *c += 1;
                    }
                }
            }
            (count > 0).then(|| (grid.coord(j), h * count as f64, hits.map(|c| h * c as f64)))
        })
        .collect();
    let mut out = LambdaProfiles { threshold, y: vec![], row_length: vec![], lambda: [vec![], vec![], vec![]] };
    for (y, len, lam) in rows.into_iter().flatten() {
        out.y.push(y);
        out.row_length.push(len);
        for i in 0..3 {
            out.lambda[i].push(lam[i]);
        }
    }
    Ok(out)
}

/// `λᵢ(y)` alone, as `(y, λᵢ(y))` pairs; `phase` is one-based.
pub fn lambda_profile(f: &DiskField, ctx: &SliceContext, phase: usize, threshold: f64) -> Result<Vec<(f64, f64)>> {
    if !(1..=3).contains(&phase) {
        return Err(Error::InvalidArgument(format!("phase {phase} is not 1, 2 or 3")));
    }
    let prof = lambda_profiles(f, ctx, threshold)?;
    Ok(prof.y.iter().copied().zip(prof.lambda[phase - 1].iter().copied()).collect())
}

/// Outcome of the `y*` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum YStar {
    /// `y* ≤ cos((α₂ − α₁)/2) − c₀ε`; `row` is the grid row index.
    Case1 { y: f64, row: usize },
    /// `y*` lies above the Case-1 limit, or the criterion never holds.
    Case2 { y: Option<f64> },
}

impl YStar {
    pub fn case1(&self) -> Option<(f64, usize)> {
        match *self {
            Self::Case1 { y, row } => Some((y, row)),
            Self::Case2 { .. } => None,
        }
    }
}

/// Smallest grid row `y ≥ −cos(α₃/2) + c₀ε` with
/// `λ₁(y) + λ₂(y) ≥ 𝓛¹(γ_y) − slack`.
pub fn locate_ystar(f: &DiskField, ctx: &SliceContext, threshold: f64, slack: f64) -> Result<YStar> {
    if !(slack > 0.0) {
        return Err(Error::InvalidArgument(format!("slack {slack} must be positive")));
    }
    let prof = lambda_profiles(f, ctx, threshold)?;
    let grid = f.grid();
    let y_start = ctx.y_start();
    let found = (0..prof.y.len()).find(|&r| {
        prof.y[r] >= y_start - 1e-12
            && prof.lambda[0][r] + prof.lambda[1][r] >= prof.row_length[r] - slack - 1e-12
    });
    Ok(match found {
        Some(r) if prof.y[r] <= ctx.y_case_limit() => {
            let y = prof.y[r];
            YStar::Case1 { y, row: ((y + 1.0) / grid.spacing()).round() as usize }
        }
        Some(r) => YStar::Case2 { y: Some(prof.y[r]) },
        None => YStar::Case2 { y: None },
    })
}

/// Value of `u` at `(x_i, ζ(x_i))`: the grid node on row `y*` when it is
/// interior, the boundary trace otherwise.
fn value_on_zeta(f: &DiskField, ctx: &SliceContext, i: usize, row: usize) -> Vec2 {
    let grid = f.grid();
    if grid.kind_at(i, row) == NodeKind::Interior {
        return f.value(i, row);
    }
    let x = grid.coord(i);
    let top = (1.0 - x * x).max(0.0).sqrt();
    let y = grid.coord(row).min(top);
    ctx.trace.value(y.atan2(x))
}

/// `(μ₁, μ₂) = (𝓛¹(K₁⁺), 𝓛¹(K₂⁻))` along `x ↦ (x, ζ(x))`.
pub fn measure_mu(f: &DiskField, ctx: &SliceContext, ystar: YStar, threshold: f64) -> Result<(f64, f64)> {
    ctx.check_threshold(threshold)?;
    let (_, row) = ystar
        .case1()
        .ok_or_else(|| Error::CaseTwo("μ₁, μ₂ are only defined when y* is in Case 1".into()))?;
    let grid = f.grid();
    let (n, h) = (grid.n(), grid.spacing());
    let s3 = (0.5 * ctx.angles().alpha3).sin();
    let sd = ctx.angles().half_gap().sin();
    let trim = ctx.trim();
    let [a1, a2, _] = ctx.trace.minima;
    let (mut mu1, mut mu2) = (0.0, 0.0);
    for i in 0..n {
        let x = grid.coord(i);
        if x.abs() >= 1.0 {
            continue;
        }
        let u = value_on_zeta(f, ctx, i, row);
        if x >= -sd + trim && x <= s3 - trim && (u - a1).norm() < threshold {
            mu1 += h;
        }
        if x >= -s3 + trim && x <= -sd - trim && (u - a2).norm() < threshold {
            mu2 += h;
        }
    }
    Ok((mu1, mu2))
}

/// `𝓛¹(M)` for `M = {y ∈ [−cos(α₃/2) + c₀ε, y*] : λ₃(y) > 0}`, each row
/// owning the cell `[y − h/2, y + h/2]` clipped to the interval.
fn measure_m(prof: &LambdaProfiles, y_start: f64, ystar: f64, h: f64) -> f64 {
    (0..prof.y.len())
        .filter(|&r| prof.lambda[2][r] > 0.0)
        .map(|r| {
            let lo = (prof.y[r] - 0.5 * h).max(y_start);
            let hi = (prof.y[r] + 0.5 * h).min(ystar);
            (hi - lo).max(0.0)
        })
        .sum()
}

/// The slice statistics of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceStats {
    pub epsilon: f64,
    pub variant: SliceVariant,
    pub threshold: f64,
    pub slack: f64,
    pub ystar: YStar,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    /// `y* + cos(α₃/2) − 𝓛¹(M)`.
    pub beta: Option<f64>,
    pub m_measure: Option<f64>,
    /// `𝓛¹(S)` with `S = [−cos(α₃/2) + c₀ε, y*] \ M`.
    pub s_measure: Option<f64>,
    pub lambda: LambdaProfiles,
}

pub fn interface_stats(f: &DiskField, ctx: &SliceContext, variant: SliceVariant) -> Result<InterfaceStats> {
    let eps = f.epsilon();
    let threshold = variant.threshold(eps);
    let slack = variant.slack(eps);
    let lambda = lambda_profiles(f, ctx, threshold)?;
    let ystar = locate_ystar(f, ctx, threshold, slack)?;
    let mut stats = InterfaceStats {
        epsilon: eps,
        variant,
        threshold,
        slack,
        ystar,
        mu1: None,
        mu2: None,
        beta: None,
        m_measure: None,
        s_measure: None,
        lambda,
    };
    if let Some((y, _)) = ystar.case1() {
        let (mu1, mu2) = measure_mu(f, ctx, ystar, threshold)?;
        let y_start = ctx.y_start();
        let m = measure_m(&stats.lambda, y_start, y, f.grid().spacing());
        stats.mu1 = Some(mu1);
        stats.mu2 = Some(mu2);
        stats.m_measure = Some(m);
        stats.beta = Some(y + (0.5 * ctx.angles().alpha3).cos() - m);
        stats.s_measure = Some((y - y_start - m).max(0.0));
    }
    Ok(stats)
}

/// Empirical slack coefficient `α`: twice the largest deficit
/// `(𝓛¹(γ_y) − λ₁ − λ₂)/√ε` over rows `y ∈ [¼ cos((α₂−α₁)/2), ¾ cos((α₂−α₁)/2)]`,
/// which only cross the 1–2 interface.
pub fn fit_alpha(f: &DiskField, ctx: &SliceContext, threshold: f64) -> Result<f64> {
    let prof = lambda_profiles(f, ctx, threshold)?;
    let cd = ctx.angles().half_gap().cos();
    let deficit = (0..prof.y.len())
        .filter(|&r| prof.y[r] >= 0.25 * cd && prof.y[r] <= 0.75 * cd)
        .map(|r| prof.row_length[r] - prof.lambda[0][r] - prof.lambda[1][r])
        .fold(0.0, f64::max);
    Ok((2.0 * deficit / f.epsilon().sqrt()).max(f.grid().spacing() / f.epsilon().sqrt()))
}

/// Admissible box of the slice minimization problem with endpoint trim `trim`
/// (`c₀ε` for measured statistics, `0` for the continuum problem).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceBox {
    pub mu1: (f64, f64),
    pub mu2: (f64, f64),
    pub y: (f64, f64),
}

impl SliceBox {
    pub fn new(angles: &JunctionAngles, trim: f64) -> Self {
        let s3 = (0.5 * angles.alpha3).sin();
        let c3 = (0.5 * angles.alpha3).cos();
        let (sd, cd) = angles.half_gap().sin_cos();
        Self {
            mu1: (0.0, s3 + sd - 2.0 * trim),
            mu2: (0.0, s3 - sd - 2.0 * trim),
            y: (-c3 + trim, cd - trim),
        }
    }

    pub fn contains(&self, mu1: f64, mu2: f64, y: f64) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo - 1e-12 && v <= hi + 1e-12;
        inside(mu1, self.mu1) && inside(mu2, self.mu2) && inside(y, self.y)
    }

    pub fn clamp(&self, mu1: f64, mu2: f64, y: f64) -> (f64, f64, f64) {
        (mu1.clamp(self.mu1.0, self.mu1.1), mu2.clamp(self.mu2.0, self.mu2.1), y.clamp(self.y.0, self.y.1))
    }
}

/// The two radicals of `E(μ₁, μ₂, y*)`: the `Ω₂` part and the `Ω₁` part.
pub fn lower_bound_parts(mu1: f64, mu2: f64, ystar: f64, t: &SurfaceTensions, angles: &JunctionAngles) -> (f64, f64) {
    let s3 = (0.5 * angles.alpha3).sin();
    let c3 = (0.5 * angles.alpha3).cos();
    let (sd, cd) = angles.half_gap().sin_cos();
    let plus = t.s13 + t.s23;
    let a = s3 * plus + (mu2 - mu1 + sd) * (t.s23 - t.s13);
    let b = (ystar + c3) * plus;
    let lower = a.hypot(b);
    let upper = t.s12 * (mu1 + mu2).hypot(cd - ystar);
    (lower, upper)
}

/// `E(μ₁, μ₂, y*)` inside the admissible box with trim `trim`.
pub fn lower_bound_e(
    mu1: f64,
    mu2: f64,
    ystar: f64,
    tensions: &SurfaceTensions,
    angles: &JunctionAngles,
    trim: f64,
) -> Result<f64> {
    let b = SliceBox::new(angles, trim);
    if !b.contains(mu1, mu2, ystar) {
        return Err(Error::OutOfBox(format!("(μ₁, μ₂, y*) = ({mu1}, {mu2}, {ystar}) outside {b:?}")));
    }
    let (lo, up) = lower_bound_parts(mu1, mu2, ystar, tensions, angles);
    Ok(lo + up)
}

/// Which case the `y*` search landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseFlag {
    Case1,
    Case2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub energy: f64,
    pub competitor_energy: f64,
    pub sum_sigma: f64,
    pub case: CaseFlag,
    /// `E` at the measured `(μ₁, μ₂, y*)`, clamped into the trimmed box.
    pub e_measured: Option<f64>,
    pub s_measure: Option<f64>,
}

impl BoundReport {
    /// `J − Σσ`.
    pub fn excess(&self) -> f64 {
        self.energy - self.sum_sigma
    }

    pub fn competitor_excess(&self) -> f64 {
        self.competitor_energy - self.sum_sigma
    }
}

pub fn bound_report(
    energy: f64,
    competitor_energy: f64,
    stats: &InterfaceStats,
    ctx: &SliceContext,
) -> BoundReport {
    let (case, e_measured) = match (stats.ystar.case1(), stats.mu1, stats.mu2) {
        (Some((y, _)), Some(mu1), Some(mu2)) => {
            let b = SliceBox::new(ctx.angles(), ctx.trim());
            let (m1, m2, yy) = b.clamp(mu1, mu2, y);
            let (lo, up) = lower_bound_parts(m1, m2, yy, &ctx.tensions, ctx.angles());
            (CaseFlag::Case1, Some(lo + up))
        }
        _ => (CaseFlag::Case2, None),
    };
    BoundReport {
        epsilon: stats.epsilon,
        energy,
        competitor_energy,
        sum_sigma: ctx.tensions.sum(),
        case,
        e_measured,
        s_measure: stats.s_measure,
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Constants fitted over a sweep of [`BoundReport`]s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    /// Smallest `C` with `competitor − Σσ ≤ Cε` on the sweep.
    pub c_upper: f64,
    /// Smallest `C₁ ≥ 0` with `J ≥ Σσ − C₁ε^{1/3}`.
    pub c1_lower: f64,
    /// Smallest `C ≥ 0` with `J ≥ Σσ − Cε^{1/2}`.
    pub c_lower: f64,
    /// Smallest `C ≥ 0` with `E(measured) ≤ J + Cε^{1/3}`.
    pub c_e: f64,
    /// Log-log slope of `|J − Σσ|` against `ε`.
    pub minimizer_exponent: f64,
    /// Log-log slope of `competitor − Σσ` against `ε`.
    pub competitor_exponent: f64,
}

pub fn fit_sweep(reports: &[BoundReport]) -> Result<SweepFit> {
    if reports.len() < 3 {
        return Err(Error::InvalidArgument(format!("{} sweep entries; at least 3 are required", reports.len())));
    }
    let eps: Vec<f64> = reports.iter().map(|r| r.epsilon).collect();
    let max_over = |f: &dyn Fn(&BoundReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
    Ok(SweepFit {
        c_upper: max_over(&|r| r.competitor_excess() / r.epsilon),
        c1_lower: max_over(&|r| -r.excess() / r.epsilon.cbrt()),
        c_lower: max_over(&|r| -r.excess() / r.epsilon.sqrt()),
        c_e: max_over(&|r| r.e_measured.map_or(0.0, |e| (e - r.energy) / r.epsilon.cbrt())),
        minimizer_exponent: log_log_slope(&eps, &reports.iter().map(|r| r.excess().abs()).collect::<Vec<_>>()),
        competitor_exponent: log_log_slope(&eps, &reports.iter().map(|r| r.competitor_excess()).collect::<Vec<_>>()),
    })
}

/// Directional energy in the frame rotated by `angle`:
/// `x̃ = cos·x + sin·y`, `ỹ = −sin·x + cos·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedAccount {
    pub angle: f64,
    /// `∫ ε/2 |∂u/∂x̃|²`.
    pub along: f64,
    /// `∫ ε/2 |∂u/∂ỹ|²`.
    pub across: f64,
    /// `∫ W(u)/ε` over the same sample cells.
    pub potential: f64,
}

fn bilinear(f: &DiskField, z: Vec2) -> Option<Vec2> {
    let grid = f.grid();
    let (n, h) = (grid.n(), grid.spacing());
    let gx = (z.x + 1.0) / h;
    let gy = (z.y + 1.0) / h;
    let (i, j) = (gx.floor(), gy.floor());
    if i < 0.0 || j < 0.0 || i as usize >= n - 1 || j as usize >= n - 1 {
        return None;
    }
    let (i, j) = (i as usize, j as usize);
    let (tx, ty) = (gx - i as f64, gy - j as f64);
    let corners = [f.value(i, j), f.value(i + 1, j), f.value(i, j + 1), f.value(i + 1, j + 1)];
    if corners.iter().any(|c| !c.x.is_finite()) {
        return None;
    }
    Some(
        (1.0 - tx) * (1.0 - ty) * corners[0]
            + tx * (1.0 - ty) * corners[1]
            + (1.0 - tx) * ty * corners[2]
            + tx * ty * corners[3],
    )
}

/// Directional energy on a rotated sample lattice of spacing `h`, restricted
/// to `B₁ ∩ {y ≥ y_min}` when `y_min` is given.
pub fn rotated_energy_account(
    p: &crate::potential::Potential,
    f: &DiskField,
    angle: f64,
    y_min: Option<f64>,
) -> RotatedAccount {
    let grid = f.grid();
    let (n, h) = (grid.n() as isize, grid.spacing());
    let eps = f.epsilon();
    let (s, c) = angle.sin_cos();
    let ex = Vec2::new(c, s);
    let ey = Vec2::new(-s, c);
    let half = n / 2 + 2;
    let keep = |z: Vec2| z.norm_squared() < 1.0 && y_min.is_none_or(|y0| z.y >= y0);
    let point = |a: isize, b: isize| ex * (a as f64 * h) + ey * (b as f64 * h);
    let rows: Vec<[f64; 3]> = (-half..=half)
        .into_par_iter()
        .map(|b| {
            let mut acc = [0.0; 3];
            for a in -half..=half {
                let z = point(a, b);
                if !keep(z) {
                    continue;
                }
                let Some(u) = bilinear(f, z) else { continue };
                acc[2] += h * h * p.evaluate(u) / eps;
                let zx = point(a + 1, b);
                if keep(zx) {
                    if let Some(v) = bilinear(f, zx) {
                        acc[0] += 0.5 * eps * (v - u).norm_squared();
                    }
                }
                let zy = point(a, b + 1);
                if keep(zy) {
                    if let Some(v) = bilinear(f, zy) {
                        acc[1] += 0.5 * eps * (v - u).norm_squared();
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; 3];
    for r in rows {
        for k in 0..3 {
            total[k] += r[k];
        }
    }
    RotatedAccount { angle, along: total[0], across: total[1], potential: total[2] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::ConstantTrace;
    use crate::disk_solver::build_grid;
    use crate::junction_geometry::{solve_angles, TriodPartition};
    use crate::potential::Potential;
    use std::sync::Arc;

    fn setup(angles: JunctionAngles, eps: f64, c0: f64) -> (Potential, SliceContext) {
        let p = Potential::product(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0)).unwrap();
        let minima = [p.minimum(0), p.minimum(1), p.minimum(2)];
        let trace = BoundaryTrace::new(angles, minima, eps, c0).unwrap();
        let ctx = SliceContext::new(trace, angles.tensions_up_to_scale(), 1.0);
        (p, ctx)
    }

    fn equal() -> JunctionAngles {
        solve_angles(&SurfaceTensions::new(1.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_field_fills_rows() {
        let (p, ctx) = setup(equal(), 0.1, 1.0);
        let grid = Arc::new(build_grid(129).unwrap());
        let a = p.minimum(0);
        let f = DiskField::from_fn(grid.clone(), 0.1, &ConstantTrace(a), |_| a);
        let prof = lambda_profiles(&f, &ctx, 0.5).unwrap();
        for r in 0..prof.y.len() {
            assert_eq!(prof.lambda[0][r], prof.row_length[r]);
            assert_eq!(prof.lambda[1][r], 0.0);
            let exact = 2.0 * (1.0 - prof.y[r] * prof.y[r]).sqrt();
            assert!((prof.row_length[r] - exact).abs() <= 2.0 * grid.spacing());
        }
        assert!(lambda_profiles(&f, &ctx, 1.5).is_err());
        assert!(lambda_profiles(&f, &ctx, 0.0).is_err());
    }

    #[test]
    fn sharp_field_equal_angles() {
        let angles = equal();
        let (p, ctx) = setup(angles, 0.01, 1.0);
        let grid = Arc::new(build_grid(129).unwrap());
        let triod = TriodPartition::new(angles);
        let f = DiskField::from_fn(grid.clone(), 0.01, &ctx.trace, |z| triod.u0(&p, z).0);
        let prof = lambda_profiles(&f, &ctx, 0.3).unwrap();
        for r in 0..prof.y.len() {
            if prof.y[r] > 0.0 {
                assert_eq!(prof.lambda[0][r] + prof.lambda[1][r], prof.row_length[r]);
            }
        }
        let ys = locate_ystar(&f, &ctx, 0.3, 1e-9).unwrap();
        let (y, _) = ys.case1().unwrap();
        assert!(y >= 0.0 && y < grid.spacing());
        let (mu1, mu2) = measure_mu(&f, &ctx, ys, 0.3).unwrap();
        assert_eq!((mu1, mu2), (0.0, 0.0));
    }

    #[test]
    fn sharp_field_unequal_angles_recovers_slice_minimizer() {
        let angles = JunctionAngles::new(1.9, 2.5, std::f64::consts::TAU - 4.4).unwrap();
        let (p, ctx) = setup(angles, 0.002, 1.0);
        let triod = TriodPartition::new(angles);
        let sd = angles.half_gap().sin();
        let mut errs = vec![];
        for n in [129, 257] {
            let grid = Arc::new(build_grid(n).unwrap());
            let f = DiskField::from_fn(grid.clone(), 0.002, &ctx.trace, |z| triod.u0(&p, z).0);
            let ys = locate_ystar(&f, &ctx, 0.3, 1e-9).unwrap();
            let (mu1, mu2) = measure_mu(&f, &ctx, ys, 0.3).unwrap();
            assert_eq!(mu2, 0.0);
            assert!((mu1 - sd).abs() <= 2.0 * grid.spacing() + 0.002);
            errs.push((mu1 - sd).abs());
        }
        assert!(errs[1] <= errs[0] + 1e-12);
    }

    #[test]
    fn pure_phase_three_is_case_two() {
        let (p, ctx) = setup(equal(), 0.1, 1.0);
        let grid = Arc::new(build_grid(65).unwrap());
        let a3 = p.minimum(2);
        let f = DiskField::from_fn(grid, 0.1, &ConstantTrace(a3), |_| a3);
        let ys = locate_ystar(&f, &ctx, 0.5, 0.1).unwrap();
        assert_eq!(ys, YStar::Case2 { y: None });
        assert!(matches!(measure_mu(&f, &ctx, ys, 0.5), Err(Error::CaseTwo(_))));
        let stats = interface_stats(&f, &ctx, SliceVariant::Weak).unwrap();
        assert!(stats.mu1.is_none());
    }

    #[test]
    fn e_at_slice_minimizer_is_sum_of_tensions() {
        let angles = JunctionAngles::new(1.9, 2.5, std::f64::consts::TAU - 4.4).unwrap();
        let t = angles.tensions_up_to_scale().scaled(1.7);
        let e = lower_bound_e(angles.half_gap().sin(), 0.0, 0.0, &t, &angles, 0.0).unwrap();
        assert!((e - t.sum()).abs() < 1e-12);
        assert!(matches!(lower_bound_e(-0.1, 0.0, 0.0, &t, &angles, 0.0), Err(Error::OutOfBox(_))));
    }

    #[test]
    fn e_equal_tensions_origin() {
        let angles = equal();
        let t = SurfaceTensions::new(0.7, 0.7, 0.7).unwrap();
        let e = lower_bound_e(0.0, 0.0, 0.0, &t, &angles, 0.0).unwrap();
        assert!((e - 2.1).abs() < 1e-12);
    }

    #[test]
    fn mu2_always_increases_e() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a1 = rng.gen_range(1.0..2.9);
            let a2 = rng.gen_range(a1..3.1);
            let a3 = std::f64::consts::TAU - a1 - a2;
            let Ok(angles) = JunctionAngles::new(a1, a2, a3) else { continue };
            let t = angles.tensions_up_to_scale();
            let b = SliceBox::new(&angles, 0.0);
            let mu1 = rng.gen_range(b.mu1.0..=b.mu1.1);
            let mu2 = rng.gen_range(1e-3..=b.mu2.1.max(2e-3)).min(b.mu2.1);
            let y = rng.gen_range(b.y.0..=b.y.1);
            if mu2 <= 0.0 {
                continue;
            }
            let with = lower_bound_e(mu1, mu2, y, &t, &angles, 0.0).unwrap();
            let without = lower_bound_e(mu1, 0.0, y, &t, &angles, 0.0).unwrap();
            assert!(with > without);
        }
    }

    #[test]
    fn log_log_slope_of_power_law() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.75)).collect();
        assert!((log_log_slope(&x, &y) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rotated_account_identity_and_constant() {
        let (p, _) = setup(equal(), 0.1, 1.0);
        let grid = Arc::new(build_grid(129).unwrap());
        let a = p.minimum(1);
        let c = DiskField::from_fn(grid.clone(), 0.1, &ConstantTrace(a), |_| a);
        let acc = rotated_energy_account(&p, &c, 0.3, None);
        assert!(acc.along < 1e-25 && acc.across < 1e-25);
        assert!(acc.potential.abs() < 1e-20);

        struct Linear;
        impl BoundaryCondition for Linear {
            fn value(&self, theta: f64) -> Vec2 {
                Vec2::new(theta.cos(), 0.5 * theta.sin())
            }
        }
        let f = DiskField::from_fn(grid.clone(), 0.1, &Linear, |z| Vec2::new(z.x, 0.5 * z.y));
        let e = crate::disk_solver::energy(&p, &f);
        // ε/2 · π · |∂ₓu|² = 0.05π and ε/2 · π · |∂_y u|² = 0.0125π
        assert!((e.dirichlet_x - 0.05 * std::f64::consts::PI).abs() < 0.01);
        let acc = rotated_energy_account(&p, &f, 0.0, None);
        assert!((acc.along - e.dirichlet_x).abs() < 0.03 * e.dirichlet_x);
        assert!((acc.across - e.dirichlet_y).abs() < 0.03 * e.dirichlet_y);
        // a linear field has the same total Dirichlet energy in any frame
        let rot = rotated_energy_account(&p, &f, 0.4, None);
        assert!((rot.along + rot.across - acc.along - acc.across).abs() < 0.02 * (acc.along + acc.across));
    }
}
