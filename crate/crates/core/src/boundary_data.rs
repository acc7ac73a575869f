//! Boundary trace `g_ε` on the unit circle.
//!
//! Three flat arcs carry the wells `a₁, a₂, a₃`; between them three
//! transition arcs of angular width `2c₀ε` interpolate affinely through a
//! profile `g₀`. The transitions are centered at the triod rays, so the flat
//! arcs converge to the sector arcs of [`TriodPartition`] as `ε → 0`.
//!
//! [`TriodPartition`]: crate::junction_geometry::TriodPartition

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::junction_geometry::JunctionAngles;
use crate::{angle_diff, wrap_angle, Error, Result, Vec2};

/// Monotone transition profiles with `g₀(0) = 0`, `g₀(1) = 1`, `|g₀′| ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionProfile {
    /// `3t² − 2t³`, `max |g₀′| = 3/2`.
    #[default]
    Smoothstep,
    /// `6t⁵ − 15t⁴ + 10t³`, `max |g₀′| = 15/8`.
    Smootherstep,
}

impl TransitionProfile {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Self::Smoothstep => t * t * (3.0 - 2.0 * t),
            Self::Smootherstep => t * t * t * (t * (6.0 * t - 15.0) + 10.0),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Self::Smoothstep => 6.0 * t * (1.0 - t),
            Self::Smootherstep => 30.0 * t * t * (1.0 - t) * (1.0 - t),
        }
    }

    pub fn max_slope(&self) -> f64 {
        match self {
            Self::Smoothstep => 1.5,
            Self::Smootherstep => 1.875,
        }
    }
}

/// Anything that prescribes `u` on the unit circle.
pub trait BoundaryCondition: Sync {
    fn value(&self, theta: f64) -> Vec2;
}

/// A single-phase boundary, `u = a` on all of `∂B₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantTrace(pub Vec2);

impl BoundaryCondition for ConstantTrace {
    fn value(&self, _theta: f64) -> Vec2 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub epsilon: f64,
    pub c0: f64,
    pub angles: JunctionAngles,
    pub minima: [Vec2; 3],
    pub profile: TransitionProfile,
}

/// One transition: centered at `center`, from `from` to `to` counter-clockwise.
#[derive(Debug, Clone, Copy)]
struct Transition {
    center: f64,
    from: usize,
    to: usize,
}

impl BoundaryTrace {
    pub fn new(angles: JunctionAngles, minima: [Vec2; 3], epsilon: f64, c0: f64) -> Result<Self> {
        Self::with_profile(angles, minima, epsilon, c0, TransitionProfile::default())
    }

    pub fn with_profile(
        angles: JunctionAngles,
        minima: [Vec2; 3],
        epsilon: f64,
        c0: f64,
        profile: TransitionProfile,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && c0 > 0.0) {
            return Err(Error::InvalidConfiguration(format!("ε = {epsilon} and c₀ = {c0} must be positive")));
        }
        let smallest = angles.as_array().into_iter().fold(f64::INFINITY, f64::min);
        if c0 * epsilon >= 0.5 * smallest {
            return Err(Error::InvalidConfiguration(format!(
                "transition half-width c₀ε = {} overlaps arcs (smallest sector {smallest})",
                c0 * epsilon
            )));
        }
        Ok(Self { epsilon, c0, angles, minima, profile })
    }

    pub fn half_width(&self) -> f64 {
        self.c0 * self.epsilon
    }

    fn transitions(&self) -> [Transition; 3] {
        [
            Transition { center: self.angles.ray_12(), from: 1, to: 0 },
            Transition { center: self.angles.ray_13(), from: 0, to: 2 },
            Transition { center: self.angles.ray_32(), from: 2, to: 1 },
        ]
    }

    /// The six arc endpoints in increasing order in `[0, 2π)`.
    pub fn arc_endpoints(&self) -> [f64; 6] {
        let w = self.half_width();
        let mut pts = [0.0; 6];
        for (k, t) in self.transitions().iter().enumerate() {
            pts[2 * k] = wrap_angle(t.center - w);
            pts[2 * k + 1] = wrap_angle(t.center + w);
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts
    }

    /// Lipschitz constant in `θ`: `max|g₀′| · max|aᵢ − aⱼ| / (2c₀ε)`.
    pub fn lipschitz(&self) -> f64 {
        let m = &self.minima;
        let spread = (m[0] - m[1]).norm().max((m[0] - m[2]).norm()).max((m[1] - m[2]).norm());
        self.profile.max_slope() * spread / (2.0 * self.half_width())
    }

    pub fn evaluate(&self, theta: f64) -> Vec2 {
        let theta = wrap_angle(theta);
        let w = self.half_width();
        for t in self.transitions() {
            let s = angle_diff(theta, t.center);
            if s >= -w && s < w {
                let a = self.minima[t.from];
                let b = self.minima[t.to];
                return a + (b - a) * self.profile.eval((s + w) / (2.0 * w));
            }
        }
        let a = &self.angles;
        let phase = if theta > a.ray_12() && theta < a.ray_13() {
            0
        } else if theta > a.ray_13() && theta < a.ray_32() {
            2
        } else {
            1
        };
        self.minima[phase]
    }

    /// `n ≥ 6` samples: the six arc endpoints plus `n − 6` uniform angles.
    pub fn samples(&self, n: usize) -> Result<Vec<(f64, Vec2)>> {
        if n < 6 {
            return Err(Error::InvalidArgument(format!("{n} samples; at least 6 are required")));
        }
        let mut thetas: Vec<f64> = self.arc_endpoints().to_vec();
        let extra = n - 6;
        thetas.extend((0..extra).map(|k| TAU * k as f64 / extra as f64));
        thetas.sort_by(|a, b| a.total_cmp(b));
        Ok(thetas.into_iter().map(|t| (t, self.evaluate(t))).collect())
    }

    /// Bound on `|g_ε|`, independent of `ε`.
    pub fn sup_bound(&self) -> f64 {
        self.minima.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// CSV with a schema line, then `theta,g1,g2`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, n: usize) -> Result<()> {
        writeln!(
            out,
            "# schema=triple-junction/trace/1 epsilon={} c0={} g0_profile={:?}",
            self.epsilon, self.c0, self.profile
        )?;
        writeln!(out, "theta,g1,g2")?;
        for (t, g) in self.samples(n)? {
            writeln!(out, "{t},{},{}", g.x, g.y)?;
        }
        Ok(())
    }
}

impl BoundaryCondition for BoundaryTrace {
    fn value(&self, theta: f64) -> Vec2 {
        self.evaluate(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn trace(eps: f64) -> BoundaryTrace {
        let angles = JunctionAngles::new(2.0, 2.3, TAU - 4.3).unwrap();
        let minima = [Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0)];
        BoundaryTrace::new(angles, minima, eps, 1.0).unwrap()
    }

    #[test]
    fn flat_arcs_hold_minima() {
        let t = trace(0.05);
        assert_eq!(t.evaluate(PI), t.minima[0]);
        assert_eq!(t.evaluate(1.5 * PI), t.minima[2]);
        assert_eq!(t.evaluate(0.0), t.minima[1]);
        // right after the 3→2 transition the arc is exactly a₂
        assert_eq!(t.evaluate(t.angles.ray_32() + t.half_width()), t.minima[1]);
    }

    #[test]
    fn transition_midpoint_is_average() {
        let t = trace(0.05);
        let mid = t.evaluate(t.angles.ray_12());
        assert!((mid - 0.5 * (t.minima[0] + t.minima[1])).norm() < 1e-15);
    }

    #[test]
    fn six_samples_are_the_endpoints() {
        let t = trace(0.1);
        let s = t.samples(6).unwrap();
        assert_eq!(s.len(), 6);
        let ends = t.arc_endpoints();
        for (k, (theta, _)) in s.iter().enumerate() {
            assert_eq!(*theta, ends[k]);
        }
        assert!(t.samples(5).is_err());
    }

    #[test]
    fn samples_are_lipschitz_and_periodic() {
        let t = trace(0.05);
        let s = t.samples(20_000).unwrap();
        let lip = t.lipschitz();
        for w in s.windows(2) {
            let d = (w[1].1 - w[0].1).norm();
            assert!(d <= lip * (w[1].0 - w[0].0) + 1e-12);
        }
        let near_end = t.evaluate(TAU - 1e-9);
        assert!((near_end - t.evaluate(0.0)).norm() <= lip * 1e-9);
    }

    #[test]
    fn transition_order_around_circle() {
        let t = trace(0.05);
        let w = t.half_width();
        let a = t.angles;
        // just inside each transition, the value leaves the "from" well
        assert!((t.evaluate(a.ray_12() - 0.99 * w) - t.minima[1]).norm() < 1e-3);
        assert!((t.evaluate(a.ray_13() - 0.99 * w) - t.minima[0]).norm() < 1e-3);
        assert!((t.evaluate(a.ray_32() - 0.99 * w) - t.minima[2]).norm() < 1e-3);
    }

    #[test]
    fn profile_slopes_are_bounded() {
        for p in [TransitionProfile::Smoothstep, TransitionProfile::Smootherstep] {
            assert_eq!(p.eval(0.0), 0.0);
            assert_eq!(p.eval(1.0), 1.0);
            let max = (0..=1000).map(|k| p.derivative(k as f64 / 1000.0)).fold(0.0, f64::max);
            assert!(max <= 2.0 && (max - p.max_slope()).abs() < 1e-6);
        }
    }

    #[test]
    fn overlapping_arcs_rejected() {
        let angles = JunctionAngles::new(2.0, 2.3, TAU - 4.3).unwrap();
        let minima = [Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0)];
        assert!(matches!(
            BoundaryTrace::new(angles, minima, 1.0, 1.0),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn sup_bound_is_independent_of_eps() {
        for eps in [0.2, 0.1, 0.05, 0.01] {
            let t = trace(eps);
            let m = t.samples(4000).unwrap().iter().map(|(_, g)| g.norm()).fold(0.0, f64::max);
            assert!(m <= t.sup_bound() + 1e-12);
        }
    }
}
