//! Triple-well potentials `W: ℝ² → [0, ∞)` and their certification.
//!
//! The reference family is the product `W(u) = ∏ᵢ |u − aᵢ|²`, whose
//! derivatives are exact closed forms and whose Hessian at each minimum is
//! isotropic. Arbitrary bivariate polynomials with declared minima are also
//! supported; they are what a run configuration tagged `"polynomial"` builds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Mat2, Result, Vec2};

/// Absolute tolerance for `W(aᵢ) = 0` and `W_u(aᵢ) = 0`.
pub const MINIMUM_TOLERANCE: f64 = 1e-10;

/// One monomial `coef · x^px · y^py`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coef: f64,
    pub px: u32,
    pub py: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Product,
    Polynomial(Vec<PolyTerm>),
}

/// A potential with declared minima. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    family: Family,
    minima: Vec<Vec2>,
    outer_radius: f64,
    hessian_bounds: (f64, f64),
}

impl Potential {
    /// `W(u) = |u − a₁|² |u − a₂|² |u − a₃|²`.
    pub fn product(a1: Vec2, a2: Vec2, a3: Vec2) -> Result<Self> {
        let pts = [a1, a2, a3];
        for i in 0..3 {
            for j in i + 1..3 {
                if (pts[i] - pts[j]).norm() < 1e-12 {
                    return Err(Error::InvalidConfiguration(format!(
                        "minima a{} and a{} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let (e1, e2) = (a2 - a1, a3 - a1);
        let cross = e1.x * e2.y - e1.y * e2.x;
        if cross.abs() <= 1e-12 * e1.norm() * e2.norm() {
            return Err(Error::InvalidConfiguration("minima are collinear".into()));
        }
        Ok(Self::product_unvalidated(pts.to_vec()))
    }

    /// Product potential over arbitrary points, without the distinctness and
    /// collinearity checks. Used to feed degenerate inputs to [`certify_h1`].
    pub fn product_unvalidated(minima: Vec<Vec2>) -> Self {
        let outer = minima.iter().map(|a| a.norm()).fold(0.0, f64::max) + 1.0;
        Self::assemble(Family::Product, minima, outer)
    }

    /// Polynomial potential `Σ c x^p y^q` with declared minima. When
    /// `outer_radius` is `None` it is estimated by scanning rings for the
    /// radial coercivity condition.
    pub fn polynomial(terms: Vec<PolyTerm>, minima: Vec<Vec2>, outer_radius: Option<f64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidConfiguration("polynomial potential has no terms".into()));
        }
        if minima.len() < 2 {
            return Err(Error::InvalidConfiguration("a potential needs at least two minima".into()));
        }
        let mut p = Self::assemble(Family::Polynomial(terms), minima, 1.0);
        p.outer_radius = match outer_radius {
            Some(r) if r > 0.0 => r,
            Some(r) => return Err(Error::InvalidConfiguration(format!("outer radius {r} must be positive"))),
            None => p.estimate_outer_radius(),
        };
        Ok(p)
    }

    /// The two-well slice `W(x, y) = ¼(1 − x²)² + ½y²` with minima `(±1, 0)`.
    /// Its 1–2 connection runs along the x-axis with action `2√2/3`.
    pub fn two_well_slice() -> Self {
        let terms = vec![
            PolyTerm { coef: 0.25, px: 0, py: 0 },
            PolyTerm { coef: -0.5, px: 2, py: 0 },
            PolyTerm { coef: 0.25, px: 4, py: 0 },
            PolyTerm { coef: 0.5, px: 0, py: 2 },
        ];
        Self::polynomial(terms, vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)], Some(2.0))
            .expect("slice potential is well formed")
    }

    fn assemble(family: Family, minima: Vec<Vec2>, outer_radius: f64) -> Self {
        let mut p = Self { family, minima, outer_radius, hessian_bounds: (0.0, 0.0) };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in &p.minima {
            let ev = p.hessian(*a).symmetric_eigenvalues();
            lo = lo.min(ev.min());
            hi = hi.max(ev.max());
        }
        p.hessian_bounds = (lo, hi);
        p
    }

    fn estimate_outer_radius(&self) -> f64 {
        let base = self.minima.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let mut last_bad = base;
        let mut r = base + 0.05;
        while r < 100.0 * (1.0 + base) {
            for k in 0..360 {
                let t = std::f64::consts::TAU * k as f64 / 360.0;
                let u = Vec2::new(r * t.cos(), r * t.sin());
                if self.gradient(u).dot(&u) <= 0.0 {
                    last_bad = r;
                    break;
                }
            }
            r *= 1.05;
        }
        last_bad + 1.0
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tag(&self) -> &'static str {
        match self.family {
            Family::Product => "product",
            Family::Polynomial(_) => "polynomial",
        }
    }

    pub fn minima(&self) -> &[Vec2] {
        &self.minima
    }

    pub fn minimum(&self, i: usize) -> Vec2 {
        self.minima[i]
    }

    /// Radius beyond which `W_u(u)·u > 0`.
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// Smallest and largest Hessian eigenvalue over the minima.
    pub fn hessian_bounds(&self) -> (f64, f64) {
        self.hessian_bounds
    }

    /// Smallest pairwise distance between the declared minima.
    pub fn min_pair_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.minima.len() {
            for j in i + 1..self.minima.len() {
                d = d.min((self.minima[i] - self.minima[j]).norm());
            }
        }
        d
    }

    /// The same potential with phases 1 and 2 exchanged.
    pub fn with_swapped_12(&self) -> Self {
        let mut p = self.clone();
        p.minima.swap(0, 1);
        p
    }

    pub fn evaluate(&self, u: Vec2) -> f64 {
        match &self.family {
            Family::Product => self.minima.iter().map(|a| (u - a).norm_squared()).product(),
            Family::Polynomial(terms) => terms
                .iter()
                .map(|t| t.coef * u.x.powi(t.px as i32) * u.y.powi(t.py as i32))
                .sum(),
        }
    }

    pub fn gradient(&self, u: Vec2) -> Vec2 {
        match &self.family {
            Family::Product => {
                let d: Vec<f64> = self.minima.iter().map(|a| (u - a).norm_squared()).collect();
                let mut g = Vec2::zeros();
                for (i, a) in self.minima.iter().enumerate() {
                    let rest: f64 = d.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product();
                    g += 2.0 * (u - a) * rest;
                }
                g
            }
            Family::Polynomial(terms) => {
                let mut g = Vec2::zeros();
                for t in terms {
                    if t.px > 0 {
                        g.x += t.coef * t.px as f64 * u.x.powi(t.px as i32 - 1) * u.y.powi(t.py as i32);
                    }
                    if t.py > 0 {
                        g.y += t.coef * t.py as f64 * u.x.powi(t.px as i32) * u.y.powi(t.py as i32 - 1);
                    }
                }
                g
            }
        }
    }

    pub fn hessian(&self, u: Vec2) -> Mat2 {
        match &self.family {
            Family::Product => {
                let m = self.minima.len();
                let r: Vec<Vec2> = self.minima.iter().map(|a| u - a).collect();
                let d: Vec<f64> = r.iter().map(|v| v.norm_squared()).collect();
                let prod_except = |skip: &[usize]| -> f64 {
                    (0..m).filter(|k| !skip.contains(k)).map(|k| d[k]).product()
                };
                let mut h = Mat2::zeros();
                for i in 0..m {
                    h += Mat2::identity() * (2.0 * prod_except(&[i]));
                    for j in 0..m {
                        if j != i {
                            h += (2.0 * r[i]) * (2.0 * r[j]).transpose() * prod_except(&[i, j]);
                        }
                    }
                }
                h
            }
            Family::Polynomial(terms) => {
                let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
                for t in terms {
                    let (p, q) = (t.px as i32, t.py as i32);
                    let (pf, qf) = (p as f64, q as f64);
                    if p > 1 {
                        hxx += t.coef * pf * (pf - 1.0) * u.x.powi(p - 2) * u.y.powi(q);
                    }
                    if q > 1 {
                        hyy += t.coef * qf * (qf - 1.0) * u.x.powi(p) * u.y.powi(q - 2);
                    }
                    if p > 0 && q > 0 {
                        hxy += t.coef * pf * qf * u.x.powi(p - 1) * u.y.powi(q - 1);
                    }
                }
                Mat2::new(hxx, hxy, hxy, hyy)
            }
        }
    }
}

/// How densely [`certify_h1`] samples the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Grid nodes per axis over the square `[−R, R]²`, `R = outer_radius + margin`.
    pub grid_per_axis: usize,
    pub margin: f64,
    pub random_samples: usize,
    pub ring_samples: usize,
    /// Extra radii on which radial coercivity is checked, besides the outer radius.
    pub extra_rings: Vec<f64>,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { grid_per_axis: 201, margin: 1.0, random_samples: 2000, ring_samples: 720, extra_rings: vec![], seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum H1Clause {
    /// `W(aᵢ) = 0` and `W_u(aᵢ) = 0`.
    ZerosAtMinima,
    /// The declared zero set consists of three distinct points.
    ThreeDistinctMinima,
    /// `W > 0` at every sample away from the minima.
    PositiveElsewhere,
    /// Hessian eigenvalues at the minima are positive.
    NondegenerateMinima,
    /// `W_u(u)·u > 0` on the sampled rings.
    RadialCoercivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseOutcome {
    pub clause: H1Clause,
    pub passed: bool,
    /// Worst sample for the clause and the offending value.
    pub worst_point: Option<[f64; 2]>,
    pub worst_value: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub clauses: Vec<ClauseOutcome>,
    pub c1: f64,
    pub c2: f64,
    pub sampling: Sampling,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, clause: H1Clause) -> &ClauseOutcome {
        self.clauses.iter().find(|c| c.clause == clause).expect("every clause is reported")
    }
}

/// Sample-based check of the (H1) hypotheses. Failures are reported per
/// clause rather than raised.
pub fn certify_h1(p: &Potential, sampling: &Sampling) -> CertificationReport {
    let mut clauses = Vec::new();
    let minima = p.minima();

    // zeros and critical points at the minima
    let mut worst = (None, 0.0);
    for a in minima {
        let v = p.evaluate(*a).abs().max(p.gradient(*a).amax());
        if v >= worst.1 {
            worst = (Some([a.x, a.y]), v);
        }
    }
    clauses.push(ClauseOutcome {
        clause: H1Clause::ZerosAtMinima,
        passed: worst.1 <= MINIMUM_TOLERANCE,
        worst_point: worst.0,
        worst_value: worst.1,
        samples: minima.len(),
    });

    // distinct zero set
    let mut distinct: Vec<Vec2> = Vec::new();
    for a in minima {
        if distinct.iter().all(|b| (a - b).norm() > 1e-9) {
            distinct.push(*a);
        }
    }
    let closest = p.min_pair_distance();
    clauses.push(ClauseOutcome {
        clause: H1Clause::ThreeDistinctMinima,
        passed: distinct.len() == 3 && minima.len() == 3,
        worst_point: None,
        worst_value: distinct.len() as f64,
        samples: minima.len(),
    });

    // positivity on a grid plus random samples in the ball
    let radius = p.outer_radius() + sampling.margin;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut points = Vec::with_capacity(sampling.grid_per_axis.pow(2) + sampling.random_samples);
    let m = sampling.grid_per_axis.max(2);
    for i in 0..m {
        for j in 0..m {
            let u = Vec2::new(
                -radius + 2.0 * radius * i as f64 / (m - 1) as f64,
                -radius + 2.0 * radius * j as f64 / (m - 1) as f64,
            );
            if u.norm() <= radius {
                points.push(u);
            }
        }
    }
    for _ in 0..sampling.random_samples {
        let r = radius * rng.gen::<f64>().sqrt();
        let t = rng.gen::<f64>() * std::f64::consts::TAU;
        points.push(Vec2::new(r * t.cos(), r * t.sin()));
    }
    let exclusion = 1e-9_f64.max(1e-9 * closest.min(1.0));
    let mut worst = (None, f64::INFINITY);
    let mut checked = 0;
    for u in &points {
        if distinct.iter().any(|a| (u - a).norm() <= exclusion) {
            continue;
        }
        checked += 1;
        let w = p.evaluate(*u);
        if w < worst.1 {
            worst = (Some([u.x, u.y]), w);
        }
    }
    clauses.push(ClauseOutcome {
        clause: H1Clause::PositiveElsewhere,
        passed: worst.1 > 0.0,
        worst_point: worst.0,
        worst_value: worst.1,
        samples: checked,
    });

    // Hessian bounds from eigenvalues at the minima
    let (c1, c2) = p.hessian_bounds();
    let mut worst = (None, f64::INFINITY);
    for a in minima {
        let lo = p.hessian(*a).symmetric_eigenvalues().min();
        if lo < worst.1 {
            worst = (Some([a.x, a.y]), lo);
        }
    }
    clauses.push(ClauseOutcome {
        clause: H1Clause::NondegenerateMinima,
        passed: c1 > 0.0,
        worst_point: worst.0,
        worst_value: worst.1,
        samples: minima.len(),
    });

    // radial coercivity on the outer ring and any requested rings
    let mut rings = vec![p.outer_radius()];
    rings.extend(sampling.extra_rings.iter().copied());
    let mut worst = (None, f64::INFINITY);
    let mut checked = 0;
    for r in rings {
        for k in 0..sampling.ring_samples.max(1) {
            let t = std::f64::consts::TAU * k as f64 / sampling.ring_samples.max(1) as f64;
            let u = Vec2::new(r * t.cos(), r * t.sin());
            let s = p.gradient(u).dot(&u);
            checked += 1;
            if s < worst.1 {
                worst = (Some([u.x, u.y]), s);
            }
        }
    }
    clauses.push(ClauseOutcome {
        clause: H1Clause::RadialCoercivity,
        passed: worst.1 > 0.0,
        worst_point: worst.0,
        worst_value: worst.1,
        samples: checked,
    });

    CertificationReport { clauses, c1, c2, sampling: sampling.clone() }
}

/// Constants of the local quadratic bounds near the wells:
/// `½ c_W δ² ≤ W(u) ≤ ½ C_W δ²` on `|u − aᵢ| = δ < δ_W`, and
/// `W(u) ≥ ½ c_W δ²` whenever `minᵢ |u − aᵢ| ≥ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalQuadraticConstants {
    pub delta_w: f64,
    pub c_w: f64,
    pub big_c_w: f64,
}

const CIRCLE_SAMPLES: usize = 1440;
const FAR_GRID: usize = 241;

fn circle_ratios(p: &Potential, delta: f64, samples: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in p.minima() {
        for k in 0..samples {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            let u = a + delta * Vec2::new(t.cos(), t.sin());
            let ratio = p.evaluate(u) / (0.5 * delta * delta);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    (lo, hi)
}

/// Minimum of `W/(½δ²)` over grid samples of the ball `|u| ≤ outer_radius`
/// lying at distance at least `δ` from every minimum.
fn far_ratio(p: &Potential, delta: f64, grid: usize) -> f64 {
    let r = p.outer_radius();
    let mut lo = f64::INFINITY;
    for i in 0..grid {
        for j in 0..grid {
            let u = Vec2::new(
                -r + 2.0 * r * i as f64 / (grid - 1) as f64,
                -r + 2.0 * r * j as f64 / (grid - 1) as f64,
            );
            if u.norm() > r || p.minima().iter().any(|a| (u - a).norm() < delta) {
                continue;
            }
            lo = lo.min(p.evaluate(u) / (0.5 * delta * delta));
        }
    }
    lo
}

/// Tightest `c_W`, `C_W` over the tested radii and the largest tested radius
/// for which both inequalities hold with `c_W > 0`.
pub fn estimate_local_constants(p: &Potential, deltas: &[f64]) -> Result<LocalQuadraticConstants> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("empty δ grid".into()));
    }
    let half = 0.5 * p.min_pair_distance();
    for &d in deltas {
        if !(d > 0.0 && d < half) {
            return Err(Error::InvalidArgument(format!(
                "δ = {d} must lie in (0, {half}) (half the smallest distance between minima)"
            )));
        }
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));

    let (mut c_w, mut big_c_w) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut best: Option<LocalQuadraticConstants> = None;
    for &d in &sorted {
        let (lo, hi) = circle_ratios(p, d, CIRCLE_SAMPLES);
        let far = far_ratio(p, d, FAR_GRID);
        c_w = c_w.min(lo).min(far);
        big_c_w = big_c_w.max(hi);
        if c_w > 0.0 {
            best = Some(LocalQuadraticConstants { delta_w: d, c_w, big_c_w });
        } else {
            break;
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no tested δ admits a positive c_W".into()))
}

impl LocalQuadraticConstants {
    /// Largest relative violation of the two inequalities over `radii`
    /// (each `≤ δ_W`) with `angles` samples per circle. Non-positive means
    /// both inequalities hold on the sample set.
    pub fn worst_violation(&self, p: &Potential, radii: &[f64], angles: usize) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &d in radii {
            let (lo, hi) = circle_ratios(p, d, angles);
            worst = worst.max((self.c_w - lo) / self.c_w);
            worst = worst.max((hi - self.big_c_w) / self.big_c_w);
            let far = far_ratio(p, d, FAR_GRID + 40);
            worst = worst.max((self.c_w - far) / self.c_w);
        }
        worst
    }
}
