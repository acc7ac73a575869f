//! Run configuration, read from JSON and adjusted by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use triple_junction::connections::{ConnectionOptions, SurfaceTensions};
use triple_junction::disk_solver::{CompetitorOptions, SolverOptions};
use triple_junction::potential::{PolyTerm, Potential};
use triple_junction::Vec2;

use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialConfig {
    /// `W(u) = Π |u − aᵢ|²`.
    Product { minima: [[f64; 2]; 3] },
    Polynomial {
        terms: Vec<PolyTerm>,
        minima: Vec<[f64; 2]>,
        #[serde(default)]
        outer_radius: Option<f64>,
    },
}

impl PotentialConfig {
    /// Equilateral triple of side 2 centered at the origin.
    pub fn equilateral() -> Self {
        let s = 3f64.sqrt();
        Self::Product { minima: [[-1.0, -s / 3.0], [1.0, -s / 3.0], [0.0, 2.0 * s / 3.0]] }
    }

    pub fn isoceles() -> Self {
        Self::Product { minima: [[-1.0, 0.0], [1.0, 0.0], [0.0, 2.0]] }
    }

    pub fn build(&self) -> Result<Potential, RunError> {
        let v = |a: &[f64; 2]| Vec2::new(a[0], a[1]);
        let p = match self {
            Self::Product { minima } => Potential::product(v(&minima[0]), v(&minima[1]), v(&minima[2]))?,
            Self::Polynomial { terms, minima, outer_radius } => {
                if minima.len() != 3 {
                    return Err(RunError::Config(format!("{} minima given; exactly three are required", minima.len())));
                }
                Potential::polynomial(terms.clone(), minima.iter().map(v).collect(), *outer_radius)?
            }
        };
        Ok(p)
    }
}

/// Boundary data for `solve`: the six-arc triod trace, or a single well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConfig {
    Triod,
    /// Constant trace equal to the (one-based) well.
    Phase(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub n: usize,
    pub c0: f64,
    pub boundary: BoundaryConfig,
    pub connection_half_length: f64,
    pub connection_nodes: usize,
    pub connection: ConnectionOptions,
    pub solver: SolverOptions,
    pub competitor: CompetitorOptions,
    /// Slack coefficient of the refined slice variant; fitted at the largest
    /// `ε` when absent.
    pub alpha: Option<f64>,
    /// Replaces the computed surface tensions when present.
    pub tensions: Option<[f64; 3]>,
    /// Angle triple checked by `verify` when present.
    pub angles: Option<[f64; 3]>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::equilateral(),
            epsilons: vec![0.2, 0.1, 0.05],
            n: 257,
            c0: 1.0,
            boundary: BoundaryConfig::Triod,
            connection_half_length: 8.0,
            connection_nodes: 800,
            connection: ConnectionOptions::default(),
            solver: SolverOptions::default(),
            competitor: CompetitorOptions::default(),
            alpha: None,
            tensions: None,
            angles: None,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.epsilons.is_empty() {
            return Err(RunError::Config("ε list is empty".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(RunError::Config(format!("ε list {:?} has non-positive entries", self.epsilons)));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(RunError::Config(format!("ε list {:?} is not strictly decreasing", self.epsilons)));
        }
        if let BoundaryConfig::Phase(k) = self.boundary {
            if !(1..=3).contains(&k) {
                return Err(RunError::Config(format!("boundary phase {k} is not one of 1, 2, 3")));
            }
        }
        Ok(())
    }

    pub fn tension_override(&self) -> Option<SurfaceTensions> {
        self.tensions.map(|[s12, s13, s23]| SurfaceTensions { s12, s13, s23 })
    }

    /// Solver, connection and random options all follow the run seed.
    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.solver.seed = seed;
        self.connection.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c: RunConfig = serde_json::from_str(
            r#"{"potential": {"family": "product", "minima": [[-1,0],[1,0],[0,2]]}, "epsilons": [0.1, 0.05]}"#,
        )
        .unwrap();
        assert_eq!(c.potential, PotentialConfig::isoceles());
        assert_eq!(c.n, 257);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_lists() {
        let mut c = RunConfig { epsilons: vec![0.1, 0.2], ..Default::default() };
        assert!(c.validate().is_err());
        c.epsilons = vec![0.1, 0.1];
        assert!(c.validate().is_err());
        c.epsilons = vec![];
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"epsilon": [0.1]}"#).is_err());
    }
}
