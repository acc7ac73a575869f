use serde::{Deserialize, Serialize};

use crate::{wrap_angle, Error, Result, Vec2};

/// Smallest supported number of nodes per axis.
pub const MIN_NODES: usize = 64;

/// Sub-samples per axis used to estimate the inside fraction of a cell.
const SUBSAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    /// `|z| < 1`; a free unknown.
    Interior,
    /// Outside the open disk but touched by an interior stencil or a cut
    /// cell; pinned to the boundary trace at the radially projected angle.
    Band { theta: f64 },
    Exterior,
}

/// Uniform `n × n` grid on `[−1, 1]²` with the unit disk masked out.
///
/// The discrete energy is assembled from per-cell contributions weighted by
/// each cell's inside fraction `f`: every cell edge carries `(f₁ + f₂)/4`
/// from its two cells and every node carries `h²/4 · Σ f` from its four
/// cells, so that
///
/// ```text
/// J_h(u) = ε Σ_edges w_e |Δ_e u|² + ε⁻¹ Σ_nodes m_v W(u_v).
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid {
    n: usize,
    h: f64,
    kinds: Vec<NodeKind>,
    cell_fraction: Vec<f64>,
    /// Weight of the edge from node `k` to `k + 1`.
    pub(crate) wx: Vec<f64>,
    /// Weight of the edge from node `k` to `k + n`.
    pub(crate) wy: Vec<f64>,
    /// Potential quadrature weight of node `k`.
    pub(crate) mass: Vec<f64>,
    free: Vec<usize>,
}

impl DiskGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidArgument(format!("{n} nodes per axis; at least {MIN_NODES} are required")));
        }
        let h = 2.0 / (n - 1) as f64;
        let coord = |i: usize| -1.0 + h * i as f64;
        let idx = |i: usize, j: usize| j * n + i;

        let mut cell_fraction = vec![0.0; (n - 1) * (n - 1)];
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let mut inside = 0;
                for b in 0..SUBSAMPLES {
                    for a in 0..SUBSAMPLES {
                        let x = coord(i) + h * (a as f64 + 0.5) / SUBSAMPLES as f64;
                        let y = coord(j) + h * (b as f64 + 0.5) / SUBSAMPLES as f64;
                        if x * x + y * y < 1.0 {
                            inside += 1;
                        }
                    }
                }
                cell_fraction[j * (n - 1) + i] = inside as f64 / (SUBSAMPLES * SUBSAMPLES) as f64;
            }
        }

        let inside: Vec<bool> = (0..n * n)
            .map(|k| {
                let (x, y) = (coord(k % n), coord(k / n));
                x * x + y * y < 1.0
            })
            .collect();
        let mut active = inside.clone();
        for j in 0..n {
            for i in 0..n {
                if inside[idx(i, j)] {
                    continue;
                }
                let touches_interior = (i > 0 && inside[idx(i - 1, j)])
                    || (i + 1 < n && inside[idx(i + 1, j)])
                    || (j > 0 && inside[idx(i, j - 1)])
                    || (j + 1 < n && inside[idx(i, j + 1)]);
                let touches_cut_cell = [(0, 0), (1, 0), (0, 1), (1, 1)].iter().any(|&(di, dj)| {
                    let (ci, cj) = (i as isize - di, j as isize - dj);
                    ci >= 0
                        && cj >= 0
                        && (ci as usize) < n - 1
                        && (cj as usize) < n - 1
                        && cell_fraction[cj as usize * (n - 1) + ci as usize] > 0.0
                });
                if touches_interior || touches_cut_cell {
                    active[idx(i, j)] = true;
                }
            }
        }

        let kinds: Vec<NodeKind> = (0..n * n)
            .map(|k| {
                if inside[k] {
                    NodeKind::Interior
                } else if active[k] {
                    let (x, y) = (coord(k % n), coord(k / n));
                    NodeKind::Band { theta: wrap_angle(y.atan2(x)) }
                } else {
                    NodeKind::Exterior
                }
            })
            .collect();

        let mut wx = vec![0.0; n * n];
        let mut wy = vec![0.0; n * n];
        let mut mass = vec![0.0; n * n];
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let f = cell_fraction[j * (n - 1) + i];
                if f == 0.0 {
                    continue;
                }
                wx[idx(i, j)] += 0.25 * f;
                wx[idx(i, j + 1)] += 0.25 * f;
                wy[idx(i, j)] += 0.25 * f;
                wy[idx(i + 1, j)] += 0.25 * f;
                for k in [idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)] {
                    mass[k] += 0.25 * f * h * h;
                }
            }
        }
        let free = (0..n * n).filter(|&k| inside[k]).collect();
        Ok(Self { n, h, kinds, cell_fraction, wx, wy, mass, free })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn coord(&self, i: usize) -> f64 {
        -1.0 + self.h * i as f64
    }

    pub fn point(&self, k: usize) -> Vec2 {
        Vec2::new(self.coord(k % self.n), self.coord(k / self.n))
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.kinds[k]
    }

    pub fn kind_at(&self, i: usize, j: usize) -> NodeKind {
        self.kinds[self.index(i, j)]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Indices of the interior (free) nodes, in row-major order.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    pub fn is_active(&self, k: usize) -> bool {
        !matches!(self.kinds[k], NodeKind::Exterior)
    }

    pub fn cell_fraction(&self, i: usize, j: usize) -> f64 {
        self.cell_fraction[j * (self.n - 1) + i]
    }

    /// Quadrature area of the disk, `Σ m_v`.
    pub fn area(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Classify the nodes of an `n × n` grid on `[−1, 1]²`.
pub fn build_grid(n: usize) -> Result<DiskGrid> {
    DiskGrid::new(n)
}
