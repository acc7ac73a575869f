//! Young's law and the triod partition of the plane.
//!
//! Coordinates follow the convention used throughout the crate: the y-axis
//! bisects the sector of phase 3, which opens downward around `θ = 3π/2`.
//! Phase 1 sits to the left and phase 2 to the right, with the 1–2 ray at
//! `θ = π/2 + (α₂ − α₁)/2`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::connections::SurfaceTensions;
use crate::potential::Potential;
use crate::{angle_diff, wrap_angle, Error, Result, Vec2};

/// Sector opening angles `α₁, α₂, α₃` with `Σαᵢ = 2π`, each in `(0, π)` and
/// `α₂ ≥ α₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionAngles {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// Set when phases 1 and 2 were exchanged to obtain `α₂ ≥ α₁`.
    pub relabeled: bool,
}

impl JunctionAngles {
    /// Validate a triple. Phases 1 and 2 are exchanged when `α₂ < α₁`.
    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64) -> Result<Self> {
        let sum = alpha1 + alpha2 + alpha3;
        if (sum - TAU).abs() > 1e-12 {
            return Err(Error::DegenerateConfiguration(format!("angles sum to {sum}, not 2π")));
        }
        for (k, a) in [alpha1, alpha2, alpha3].into_iter().enumerate() {
            if !(a > 0.0 && a < PI) {
                return Err(Error::DegenerateConfiguration(format!("α{} = {a} is outside (0, π)", k + 1)));
            }
        }
        Ok(if alpha2 >= alpha1 {
            Self { alpha1, alpha2, alpha3, relabeled: false }
        } else {
            Self { alpha1: alpha2, alpha2: alpha1, alpha3, relabeled: true }
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, self.alpha3]
    }

    /// `(α₂ − α₁)/2`, the tilt of the 1–2 ray from the positive y-axis.
    pub fn half_gap(&self) -> f64 {
        0.5 * (self.alpha2 - self.alpha1)
    }

    /// Angle of the ray between phases 1 and 2.
    pub fn ray_12(&self) -> f64 {
        FRAC_PI_2 + self.half_gap()
    }

    /// Angle of the ray between phases 1 and 3.
    pub fn ray_13(&self) -> f64 {
        1.5 * PI - 0.5 * self.alpha3
    }

    /// Angle of the ray between phases 3 and 2.
    pub fn ray_32(&self) -> f64 {
        1.5 * PI + 0.5 * self.alpha3
    }

    /// `|sin α₁/σ₂₃ − sin α₂/σ₁₃| + |sin α₂/σ₁₃ − sin α₃/σ₁₂|` after
    /// normalizing both triples, in the labeling of `self`.
    pub fn sine_law_residual(&self, tensions: &SurfaceTensions) -> f64 {
        let t = if self.relabeled { tensions.swapped_12() } else { *tensions };
        let r = [self.alpha1.sin() / t.s23, self.alpha2.sin() / t.s13, self.alpha3.sin() / t.s12];
        let scale = r.iter().sum::<f64>() / 3.0;
        ((r[0] - r[1]).abs() + (r[1] - r[2]).abs()) / scale
    }

    /// Tensions proportional to the sines, `(sin α₃, sin α₂, sin α₁)` for
    /// `(σ₁₂, σ₁₃, σ₂₃)`.
    pub fn tensions_up_to_scale(&self) -> SurfaceTensions {
        SurfaceTensions { s12: self.alpha3.sin(), s13: self.alpha2.sin(), s23: self.alpha1.sin() }
    }
}

/// Interior angle opposite side `a` of a triangle with sides `a, b, c`.
fn opposite_angle(a: f64, b: f64, c: f64) -> f64 {
    ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
}

/// Young's law: `αᵢ = π − βᵢ` with `βᵢ` the angles of the triangle whose
/// sides are `(σ₂₃, σ₁₃, σ₁₂)`, opposite `(β₁, β₂, β₃)`.
pub fn solve_angles(tensions: &SurfaceTensions) -> Result<JunctionAngles> {
    tensions
        .check()
        .map_err(|e| Error::DegenerateConfiguration(format!("no Young triple: {e}")))?;
    let SurfaceTensions { s12, s13, s23 } = *tensions;
    let beta1 = opposite_angle(s23, s13, s12);
    let beta2 = opposite_angle(s13, s23, s12);
    let beta3 = PI - beta1 - beta2;
    if beta1 <= 0.0 || beta2 <= 0.0 || beta3 <= 0.0 {
        return Err(Error::DegenerateConfiguration("triangle of tensions is flat".into()));
    }
    let (a1, a2) = (PI - beta1, PI - beta2);
    JunctionAngles::new(a1, a2, TAU - a1 - a2)
}

/// Relabel a potential and its tensions so that `α₂ ≥ α₁`, and solve for the angles.
pub fn canonical_labels(
    p: &Potential,
    tensions: &SurfaceTensions,
) -> Result<(Potential, SurfaceTensions, JunctionAngles)> {
    let angles = solve_angles(tensions)?;
    if angles.relabeled {
        Ok((p.with_swapped_12(), tensions.swapped_12(), JunctionAngles { relabeled: false, ..angles }))
    } else {
        Ok((p.clone(), *tensions, angles))
    }
}

/// Result of classifying a point against the triod.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// One-based phase label.
    pub phase: usize,
    /// The point lies on a ray or at the junction; `phase` is then the lower
    /// of the adjacent labels.
    pub on_boundary: bool,
}

/// The partition `{D₁, D₂, D₃}` of the plane into sectors of openings `αᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriodPartition {
    pub angles: JunctionAngles,
}

const RAY_TOLERANCE: f64 = 1e-12;

impl TriodPartition {
    pub fn new(angles: JunctionAngles) -> Self {
        Self { angles }
    }

    /// `(start, end)` angles of each sector, counter-clockwise, in `[0, 2π)`.
    pub fn sector_arcs(&self) -> [(f64, f64); 3] {
        let a = &self.angles;
        [
            (a.ray_12(), a.ray_13()),
            (wrap_angle(a.ray_32()), a.ray_12()),
            (a.ray_13(), a.ray_32()),
        ]
    }

    /// Unit directions of the rays 1–2, 1–3 and 3–2.
    pub fn ray_directions(&self) -> [Vec2; 3] {
        let a = &self.angles;
        [a.ray_12(), a.ray_13(), a.ray_32()].map(|t| Vec2::new(t.cos(), t.sin()))
    }

    pub fn classify(&self, z: Vec2) -> Classification {
        if z.norm() == 0.0 {
            return Classification { phase: 1, on_boundary: true };
        }
        let theta = wrap_angle(z.y.atan2(z.x));
        let a = &self.angles;
        let rays = [(a.ray_12(), 1), (a.ray_13(), 1), (a.ray_32(), 2)];
        for (ray, label) in rays {
            if angle_diff(theta, ray).abs() <= RAY_TOLERANCE {
                return Classification { phase: label, on_boundary: true };
            }
        }
        let phase = if theta > a.ray_12() && theta < a.ray_13() {
            1
        } else if theta > a.ray_13() && theta < a.ray_32() {
            3
        } else {
            2
        };
        Classification { phase, on_boundary: false }
    }

    /// The sharp-interface map `u₀ = Σ aᵢ χ_{Dᵢ}`.
    pub fn u0(&self, p: &Potential, z: Vec2) -> (Vec2, bool) {
        let c = self.classify(z);
        (p.minimum(c.phase - 1), c.on_boundary)
    }
}

pub fn build_triod(angles: JunctionAngles) -> TriodPartition {
    TriodPartition::new(angles)
}
