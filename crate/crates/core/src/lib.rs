//! Numerical laboratory for triple junctions of the vector Allen-Cahn energy.
//!
//! The crate minimizes
//!
//! ```text
//! J_ε(u) = ∫_{B₁} ( ε/2 |∇u|² + W(u)/ε ) dz,    u = g_ε on ∂B₁,
//! ```
//!
//! for triple-well potentials `W: ℝ² → [0, ∞)` with general surface tensions,
//! and measures everything that can be computed about the result: the 1D
//! heteroclinic actions `σᵢⱼ`, the Young angles of the limiting triod, the
//! energy sandwich around `σ₁₂ + σ₁₃ + σ₂₃`, and the slice statistics
//! (`y*`, `μ₁`, `μ₂`, `β`) that localize the diffuse junction.
//!
//! Module map:
//!
//! * [`potential`] – triple-well potentials, certification, local quadratic constants.
//! * [`connections`] – heteroclinic profiles and surface tensions.
//! * [`junction_geometry`] – Young's law, the triod partition and the sharp map `u₀`.
//! * [`boundary_data`] – the six-arc boundary trace `g_ε`.
//! * [`disk_solver`] – masked Cartesian discretization, competitor, minimizer.
//! * [`interface_diagnostics`] – slice statistics and lower-bound functionals.
//! * [`appendix_checks`] – standalone checks of the two closed-form minimizations.
//! * [`optimize`] – the Barzilai–Borwein descent shared by the 1D and 2D solvers.

pub mod appendix_checks;
pub mod boundary_data;
pub mod connections;
pub mod disk_solver;
mod error;
pub mod interface_diagnostics;
pub mod junction_geometry;
pub mod optimize;
pub mod potential;

pub use error::{Error, Result};

/// Points and values in the target plane ℝ².
pub type Vec2 = nalgebra::Vector2<f64>;
/// Symmetric 2×2 matrices (Hessians of the potential).
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

/// Signed angular difference `a − b` wrapped into `[−π, π)`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    (a - b + PI).rem_euclid(TAU) - PI
}
