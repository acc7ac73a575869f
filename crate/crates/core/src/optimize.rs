//! Monotone Barzilai–Borwein gradient descent.
//!
//! Both the 1D action and the 2D disk energy are minimized with the same
//! scheme: a BB trial step (alternating the long `sᵀs/sᵀy` and short
//! `sᵀy/yᵀy` formulas) accepted through an Armijo backtracking test against
//! the current value, so the recorded objective never increases. When the BB
//! step is unavailable (first iteration, non-positive curvature) the previous
//! accepted step is reused, which reduces to plain backtracking descent.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_iterations: usize,
    /// Stop once the max-norm of the gradient falls below this value.
    pub gradient_tolerance: f64,
    /// Stop once the relative decrease over `stall_window` iterations is
    /// below this value. Zero disables the test.
    pub stall_tolerance: f64,
    pub stall_window: usize,
    pub initial_step: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            gradient_tolerance: 1e-10,
            stall_tolerance: 0.0,
            stall_window: 50,
            initial_step: 1e-3,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GradientTolerance,
    Stalled,
    /// Backtracking could not find a decreasing step; the iterate is at the
    /// resolution limit of the objective.
    LineSearchExhausted,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct DescentReport {
    pub stop: StopReason,
    pub energy: f64,
    pub grad_max: f64,
    pub history: Vec<IterationRecord>,
}

impl DescentReport {
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Minimize `objective` starting from `x`, which holds the best iterate on
/// return. The objective writes its gradient into the second argument and
/// returns its value.
pub fn bb_descent<F>(x: &mut [f64], mut objective: F, opts: &DescentOptions) -> DescentReport
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let dim = x.len();
    let mut grad = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial_grad = vec![0.0; dim];

    let mut energy = objective(x, &mut grad);
    let mut gmax = max_abs(&grad);
    let mut history = vec![IterationRecord { iteration: 0, energy, step: 0.0, grad_norm: gmax }];

    let mut step = opts.initial_step;
    let mut prev: Option<(f64, f64, f64)> = None; // (sᵀs, sᵀy, yᵀy)

    for it in 1..=opts.max_iterations {
        if gmax < opts.gradient_tolerance {
            return DescentReport { stop: StopReason::GradientTolerance, energy, grad_max: gmax, history };
        }
        if opts.stall_tolerance > 0.0 && history.len() > opts.stall_window {
            let old = history[history.len() - 1 - opts.stall_window].energy;
            if (old - energy).abs() <= opts.stall_tolerance * energy.abs().max(f64::MIN_POSITIVE) {
                return DescentReport { stop: StopReason::Stalled, energy, grad_max: gmax, history };
            }
        }

        if let Some((ss, sy, yy)) = prev {
            if sy > 0.0 {
                step = if it % 2 == 0 { ss / sy } else { sy / yy };
            }
        }

        let g2 = dot(&grad, &grad);
        let mut accepted = false;
        let mut trial_energy = energy;
        for _ in 0..=opts.max_backtracks {
            for k in 0..dim {
                trial[k] = x[k] - step * grad[k];
            }
            trial_energy = objective(&trial, &mut trial_grad);
            if trial_energy.is_finite() && trial_energy <= energy - opts.armijo * step * g2 {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return DescentReport { stop: StopReason::LineSearchExhausted, energy, grad_max: gmax, history };
        }

        let (mut ss, mut sy, mut yy) = (0.0, 0.0, 0.0);
        for k in 0..dim {
            let s = trial[k] - x[k];
            let y = trial_grad[k] - grad[k];
            ss += s * s;
            sy += s * y;
            yy += y * y;
        }
        prev = Some((ss, sy, yy));

        x.copy_from_slice(&trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        energy = trial_energy;
        gmax = max_abs(&grad);
        history.push(IterationRecord { iteration: it, energy, step, grad_norm: gmax });
    }

    let stop = if gmax < opts.gradient_tolerance {
        StopReason::GradientTolerance
    } else {
        StopReason::BudgetExhausted
    };
    DescentReport { stop, energy, grad_max: gmax, history }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_ill_conditioned_quadratic() {
        let scales: Vec<f64> = (0..50).map(|k| 1.0 + 99.0 * k as f64 / 49.0).collect();
        let mut x = vec![1.0; 50];
        let report = bb_descent(
            &mut x,
            |x, g| {
                let mut e = 0.0;
                for k in 0..x.len() {
                    g[k] = scales[k] * x[k];
                    e += 0.5 * scales[k] * x[k] * x[k];
                }
                e
            },
            &DescentOptions { gradient_tolerance: 1e-12, ..Default::default() },
        );
        assert_eq!(report.stop, StopReason::GradientTolerance);
        assert!(x.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn history_is_monotone() {
        let mut x = vec![2.0, -1.5];
        let report = bb_descent(
            &mut x,
            |x, g| {
                // Rosenbrock
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            &DescentOptions { gradient_tolerance: 1e-8, ..Default::default() },
        );
        assert!(report.history.windows(2).all(|w| w[1].energy <= w[0].energy));
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
    }
}
