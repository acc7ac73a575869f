//! Closed-form checks of the slice minimization problem, independent of
//! any PDE solve.
//!
//! With `μ₂ = 0` and `μ* = sin((α₂ − α₁)/2) − μ₁`, and tensions replaced by
//! the sines of the opposite angles, the slice functional becomes
//!
//! ```text
//! Ẽ(μ*, y*) = √([s₃(S₁ + S₂) + μ*(S₁ − S₂)]² + [(y* + c₃)(S₁ + S₂)]²)
//!           + S₃ √((s_d − μ*)² + (c_d − y*)²)
//! ```
//!
//! where `Sᵢ = sin αᵢ`, `s₃, c₃` are the sine and cosine of `α₃/2` and
//! `s_d, c_d` those of `(α₂ − α₁)/2`. Its minimum `S₁ + S₂ + S₃` is attained
//! only at `(0, 0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connections::SurfaceTensions;
use crate::junction_geometry::JunctionAngles;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Trig {
    s1: f64,
    s2: f64,
    s3: f64,
    sh3: f64,
    ch3: f64,
    sd: f64,
    cd: f64,
}

impl Trig {
    fn new(a: &JunctionAngles) -> Self {
        let (sh3, ch3) = (0.5 * a.alpha3).sin_cos();
        let (sd, cd) = a.half_gap().sin_cos();
        Self { s1: a.alpha1.sin(), s2: a.alpha2.sin(), s3: a.alpha3.sin(), sh3, ch3, sd, cd }
    }
}

/// `μ* ∈ [−sin(α₃/2), sin((α₂−α₁)/2)]`, `y* ∈ [−cos(α₃/2), cos((α₂−α₁)/2)]`.
pub fn etilde_box(angles: &JunctionAngles) -> ((f64, f64), (f64, f64)) {
    let t = Trig::new(angles);
    ((-t.sh3, t.sd), (-t.ch3, t.cd))
}

fn etilde_unchecked(mu: f64, y: f64, t: &Trig) -> f64 {
    let plus = t.s1 + t.s2;
    let a = t.sh3 * plus + mu * (t.s1 - t.s2);
    let b = (y + t.ch3) * plus;
    a.hypot(b) + t.s3 * (t.sd - mu).hypot(t.cd - y)
}

pub fn etilde(mu: f64, y: f64, angles: &JunctionAngles) -> Result<f64> {
    let ((mlo, mhi), (ylo, yhi)) = etilde_box(angles);
    let tol = 1e-12;
    if mu < mlo - tol || mu > mhi + tol || y < ylo - tol || y > yhi + tol {
        return Err(Error::OutOfBox(format!(
            "(μ*, y*) = ({mu}, {y}) outside [{mlo}, {mhi}] × [{ylo}, {yhi}]"
        )));
    }
    Ok(etilde_unchecked(mu, y, &Trig::new(angles)))
}

/// Brute-force grid minimization of `Ẽ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtildeScan {
    pub angles: [f64; 3],
    pub resolution: usize,
    pub argmin: (f64, f64),
    pub argmin_index: (usize, usize),
    /// Index of the node at `0` on each axis.
    pub origin_index: (usize, usize),
    pub min_value: f64,
    /// `Σ sin αᵢ`.
    pub target: f64,
    /// `min_value − target`.
    pub gap: f64,
    /// Whether the argmin lies on the edge of the scanned box.
    pub on_boundary: bool,
}

impl EtildeScan {
    /// Argmin within one grid cell of the origin node on both axes.
    pub fn argmin_near_origin(&self) -> bool {
        self.argmin_index.0.abs_diff(self.origin_index.0) <= 1 && self.argmin_index.1.abs_diff(self.origin_index.1) <= 1
    }
}

/// `m` nodes on `[lo, hi]` with `lo ≤ 0 ≤ hi`, uniform on each side of an
/// exact node at `0`. Returns the nodes and the index of `0`.
fn axis_with_origin(lo: f64, hi: f64, m: usize) -> (Vec<f64>, usize) {
    let span = hi - lo;
    let k0 = if hi <= 0.0 {
        m - 1
    } else if lo >= 0.0 {
        0
    } else {
        (((-lo) / span * (m - 1) as f64).round() as usize).clamp(1, m - 2)
    };
    let nodes = (0..m)
        .map(|k| {
            if k < k0 {
                lo * (k0 - k) as f64 / k0 as f64
            } else if k == k0 {
                0.0
            } else {
                hi * (k - k0) as f64 / (m - 1 - k0) as f64
            }
        })
        .collect();
    (nodes, k0)
}

/// Scan `Ẽ` on a `resolution × resolution` grid covering the box, with
/// `(0, 0)` as an exact node. Ties go to the lowest row-major index.
pub fn scan_etilde(angles: &JunctionAngles, resolution: usize) -> Result<EtildeScan> {
    if resolution < 101 {
        return Err(Error::InvalidArgument(format!("resolution {resolution}; at least 101 is required")));
    }
    let t = Trig::new(angles);
    let ((mlo, mhi), (ylo, yhi)) = etilde_box(angles);
    let (mus, m0) = axis_with_origin(mlo, mhi, resolution);
    let (ys, y0) = axis_with_origin(ylo, yhi, resolution);
    let row_min: Vec<(f64, usize)> = mus
        .par_iter()
        .map(|&mu| {
            let mut best = (f64::INFINITY, 0);
            for (j, &y) in ys.iter().enumerate() {
                let v = etilde_unchecked(mu, y, &t);
                if v < best.0 {
                    best = (v, j);
                }
            }
            best
        })
        .collect();
    let mut best = (f64::INFINITY, 0, 0);
    for (i, &(v, j)) in row_min.iter().enumerate() {
        if v < best.0 {
            best = (v, i, j);
        }
    }
    let (min_value, i, j) = best;
    let target = t.s1 + t.s2 + t.s3;
    let last = resolution - 1;
    Ok(EtildeScan {
        angles: angles.as_array(),
        resolution,
        argmin: (mus[i], ys[j]),
        argmin_index: (i, j),
        origin_index: (m0, y0),
        min_value,
        target,
        gap: min_value - target,
        on_boundary: i == 0 || i == last || j == 0 || j == last,
    })
}

/// Left side of the strict inequality minus `(Σ sin αᵢ)²`, and its closed
/// form `4(sin²(α₃/2) − sin²((α₂−α₁)/2))²`.
pub fn strict_inequality_residual(angles: &JunctionAngles) -> (f64, f64) {
    let t = Trig::new(angles);
    let plus = t.s1 + t.s2;
    let a = t.sh3 * plus + t.sd * (t.s1 - t.s2);
    let b = plus * (t.ch3 + t.cd);
    let sum = plus + t.s3;
    let direct = a * a + b * b - sum * sum;
    let k = t.sh3 * t.sh3 - t.sd * t.sd;
    (direct, 4.0 * k * k)
}

/// The Case-2 radical against `Σσ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case2Bound {
    pub radical: f64,
    pub sum_sigma: f64,
    /// `(radical² − (Σσ)²) / κ²` with `κ = Σσ / Σ sin αᵢ`; equals the
    /// closed form of [`strict_inequality_residual`] for Young-consistent tensions.
    pub normalized_gap: f64,
    pub exceeds: bool,
}

pub fn case2_bound(tensions: &SurfaceTensions, angles: &JunctionAngles) -> Case2Bound {
    let t = Trig::new(angles);
    let SurfaceTensions { s13, s23, .. } = *tensions;
    let a = (t.sh3 - t.sd) * s13 + (t.sh3 + t.sd) * s23;
    let b = (s13 + s23) * (t.ch3 + t.cd);
    let radical = a.hypot(b);
    let sum_sigma = tensions.sum();
    let kappa = sum_sigma / (t.s1 + t.s2 + t.s3);
    Case2Bound {
        radical,
        sum_sigma,
        normalized_gap: (radical * radical - sum_sigma * sum_sigma) / (kappa * kappa),
        exceeds: radical > sum_sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn equal() -> JunctionAngles {
        JunctionAngles::new(TAU / 3.0, TAU / 3.0, TAU - 2.0 * TAU / 3.0).unwrap()
    }

    fn angles_strategy() -> impl Strategy<Value = JunctionAngles> {
        (0.05..PI - 0.05, 0.05..PI - 0.05).prop_filter_map("valid triple", |(a1, a2)| {
            let a3 = TAU - a1 - a2;
            JunctionAngles::new(a1, a2, a3).ok()
        })
    }

    #[test]
    fn etilde_at_origin() {
        let a = equal();
        let v = etilde(0.0, 0.0, &a).unwrap();
        assert!((v - 1.5 * 3f64.sqrt()).abs() < 1e-14);
        assert!(matches!(etilde(1.0, 0.0, &a), Err(Error::OutOfBox(_))));
    }

    #[test]
    fn equal_angle_scan() {
        let s = scan_etilde(&equal(), 201).unwrap();
        assert!(s.argmin_near_origin());
        assert!(s.gap.abs() < 1e-9);
        assert!(scan_etilde(&equal(), 100).is_err());
    }

    #[test]
    fn strict_inequality_equal_angles() {
        let (direct, closed) = strict_inequality_residual(&equal());
        assert!((closed - 2.25).abs() < 1e-12);
        assert!((direct - closed).abs() < 1e-12);
    }

    #[test]
    fn strict_inequality_degenerates_at_limit() {
        // α₂ − α₁ → α₃ with α₁ + α₂ + α₃ = 2π
        let a3 = 0.9;
        let a1 = 0.5 * (TAU - 2.0 * a3) - 1e-7;
        let a2 = TAU - a3 - a1;
        let angles = JunctionAngles::new(a1, a2, a3);
        if let Ok(angles) = angles {
            let (direct, closed) = strict_inequality_residual(&angles);
            assert!(closed < 1e-12 && direct.abs() < 1e-10);
        }
    }

    #[test]
    fn case2_equal_tensions() {
        let t = SurfaceTensions::new(1.0, 1.0, 1.0).unwrap();
        let c = case2_bound(&t, &equal());
        // a = 2 sin(π/3) = √3, b = 2 (cos(π/3) + 1) = 3
        assert!((c.radical - 12f64.sqrt()).abs() < 1e-12);
        assert!(c.exceeds);
    }

    proptest! {
        #[test]
        fn etilde_origin_is_sum_of_sines(a in angles_strategy()) {
            let v = etilde(0.0, 0.0, &a).unwrap();
            prop_assert!((v - (a.alpha1.sin() + a.alpha2.sin() + a.alpha3.sin())).abs() < 1e-12);
        }

        #[test]
        fn etilde_never_below_origin(a in angles_strategy(), s in 0.0..1.0f64, r in 0.0..1.0f64) {
            let ((mlo, mhi), (ylo, yhi)) = etilde_box(&a);
            let mu = mlo + s * (mhi - mlo);
            let y = ylo + r * (yhi - ylo);
            prop_assert!(etilde(mu, y, &a).unwrap() >= etilde(0.0, 0.0, &a).unwrap() - 1e-12);
        }

        #[test]
        fn strict_inequality_closed_form(a in angles_strategy()) {
            let (direct, closed) = strict_inequality_residual(&a);
            prop_assert!((direct - closed).abs() < 1e-12);
            prop_assert!(closed > 0.0);
        }

        #[test]
        fn case2_gap_matches_closed_form(a in angles_strategy(), scale in 0.1..10.0f64) {
            let t = a.tensions_up_to_scale().scaled(scale);
            let c = case2_bound(&t, &a);
            prop_assert!((c.normalized_gap - strict_inequality_residual(&a).1).abs() < 1e-10);
            prop_assert!(c.exceeds);
        }
    }
}
