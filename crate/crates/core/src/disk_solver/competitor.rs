use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary_data::BoundaryCondition;
use crate::connections::HeteroclinicProfile;
use crate::junction_geometry::TriodPartition;
use crate::potential::Potential;
use crate::{Error, Result, Vec2};

use super::{DiskField, DiskGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompetitorOptions {
    /// Radius of the junction patch in units of `ε`.
    pub patch_factor: f64,
    /// Width of the annulus blending into `g_ε`, in units of `ε`.
    pub blend_factor: f64,
}

impl Default for CompetitorOptions {
    fn default() -> Self {
        Self { patch_factor: 2.0, blend_factor: 1.0 }
    }
}

/// One triod ray with the oriented profile across it. Points on the side of
/// phase `lo` are mapped to `η < 0`.
#[derive(Debug, Clone)]
struct RayLayer {
    direction: Vec2,
    lo: usize,
    profile: HeteroclinicProfile,
}

impl RayLayer {
    /// Distance from `z` to the half-line.
    fn distance(&self, z: Vec2) -> f64 {
        let t = z.dot(&self.direction);
        if t >= 0.0 {
            (z - t * self.direction).norm()
        } else {
            z.norm()
        }
    }
}

/// The explicit upper-bound construction: wells in the bulk of each sector,
/// 1D profiles across the rays, a radial blend toward the centroid of the
/// wells inside the junction patch, and an annulus blending into the trace.
#[derive(Debug, Clone)]
pub struct CompetitorLayout {
    epsilon: f64,
    triod: TriodPartition,
    minima: [Vec2; 3],
    rays: [RayLayer; 3],
    opts: CompetitorOptions,
}

impl CompetitorLayout {
    /// `profiles` must cover the pairs (1,2), (1,3), (2,3) in any order and
    /// orientation.
    pub fn new(
        p: &Potential,
        epsilon: f64,
        triod: TriodPartition,
        profiles: &[HeteroclinicProfile],
        opts: CompetitorOptions,
    ) -> Result<Self> {
        if p.minima().len() != 3 {
            return Err(Error::InvalidConfiguration("competitor needs exactly three wells".into()));
        }
        if !(epsilon > 0.0) || (opts.patch_factor + opts.blend_factor) * epsilon >= 1.0 {
            return Err(Error::InvalidConfiguration(format!(
                "ε = {epsilon}: junction patch {}ε and boundary annulus {}ε do not fit in the unit disk",
                opts.patch_factor, opts.blend_factor
            )));
        }
        let oriented = |lo: usize, hi: usize| -> Result<HeteroclinicProfile> {
            profiles
                .iter()
                .find_map(|pr| match pr.pair {
                    (a, b) if (a, b) == (lo, hi) => Some(pr.clone()),
                    (a, b) if (a, b) == (hi, lo) => Some(pr.reversed()),
                    _ => None,
                })
                .ok_or_else(|| Error::InvalidArgument(format!("missing profile for pair ({}, {})", lo + 1, hi + 1)))
        };
        let dirs = triod.ray_directions();
        let rays = [
            RayLayer { direction: dirs[0], lo: 0, profile: oriented(0, 1)? },
            RayLayer { direction: dirs[1], lo: 0, profile: oriented(0, 2)? },
            RayLayer { direction: dirs[2], lo: 1, profile: oriented(1, 2)? },
        ];
        let minima = [p.minimum(0), p.minimum(1), p.minimum(2)];
        Ok(Self { epsilon, triod, minima, rays, opts })
    }

    /// Value of the layered field with no patch or boundary blending.
    pub fn layer_value(&self, z: Vec2) -> Vec2 {
        let phase = self.triod.classify(z).phase - 1;
        let (ray, dist) = self
            .rays
            .iter()
            .filter(|r| r.lo == phase || r.profile.pair.1 == phase)
            .map(|r| (r, r.distance(z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("every sector is bounded by two rays");
        let eta = if ray.lo == phase { -dist / self.epsilon } else { dist / self.epsilon };
        ray.profile.sample(eta)
    }

    fn centroid(&self) -> Vec2 {
        (self.minima[0] + self.minima[1] + self.minima[2]) / 3.0
    }

    /// Competitor value at an interior point, given the trace value at the
    /// projected boundary angle.
    pub fn value(&self, z: Vec2, trace: &dyn BoundaryCondition) -> Vec2 {
        let r = z.norm();
        let patch = self.opts.patch_factor * self.epsilon;
        let inner = 1.0 - self.opts.blend_factor * self.epsilon;
        if r < patch {
            let s = r / patch;
            let rim = if r > 0.0 { self.layer_value(z * (patch / r)) } else { self.centroid() };
            return s * rim + (1.0 - s) * self.centroid();
        }
        let layer = self.layer_value(z);
        if r > inner {
            let t = ((r - inner) / (1.0 - inner)).min(1.0);
            let g = trace.value(z.y.atan2(z.x));
            return (1.0 - t) * layer + t * g;
        }
        layer
    }
}

/// Build the competitor field on `grid`; band nodes carry `trace`.
pub fn competitor(
    p: &Potential,
    epsilon: f64,
    grid: &Arc<DiskGrid>,
    triod: TriodPartition,
    profiles: &[HeteroclinicProfile],
    trace: &dyn BoundaryCondition,
    opts: CompetitorOptions,
) -> Result<DiskField> {
    let layout = CompetitorLayout::new(p, epsilon, triod, profiles, opts)?;
    Ok(DiskField::from_fn(grid.clone(), epsilon, trace, |z| layout.value(z, trace)))
}
