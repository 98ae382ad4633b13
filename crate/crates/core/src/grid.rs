use crate::error::{invalid, Result};
use crate::quadrature::QuadOptions;

/// Tensor grid: weighted x-nodes times a uniform u-grid on `[-u_window, u_window]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    /// `(x, weight)` pairs; weights carry the base measure of each node.
    pub x_nodes: Vec<(f64, f64)>,
    pub u_window: f64,
    pub u_step: f64,
    /// Maximum number of adaptive bisections per line integral.
    pub refinement_max: usize,
}

impl GridSpec {
    pub fn new(x_nodes: Vec<(f64, f64)>, u_window: f64, u_step: f64) -> Result<Self> {
        let g = GridSpec {
            x_nodes,
            u_window,
            u_step,
            refinement_max: QuadOptions::default().max_refinements,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_nodes.is_empty() {
            return invalid("grid has no x-nodes");
        }
        if self
            .x_nodes
            .iter()
            .any(|(x, w)| !x.is_finite() || !w.is_finite() || *w < 0.0)
        {
            return invalid("x-node weights must be finite and non-negative");
        }
        if !(self.u_window.is_finite() && self.u_window > 0.0) {
            return invalid(format!("u-window must be positive, got {}", self.u_window));
        }
        if !(self.u_step.is_finite() && self.u_step > 0.0 && self.u_step < self.u_window) {
            return invalid(format!(
                "u-step must lie in (0, u-window), got {}",
                self.u_step
            ));
        }
        Ok(())
    }

    /// Number of u-cells of width `u_step` covering the window.
    pub fn u_count(&self) -> usize {
        (2.0 * self.u_window / self.u_step).round().max(1.0) as usize
    }

    /// Cell midpoints `-U + (j + 1/2)Δ`.
    pub fn u_nodes(&self) -> Vec<f64> {
        (0..self.u_count())
            .map(|j| -self.u_window + (j as f64 + 0.5) * self.u_step)
            .collect()
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            max_refinements: self.refinement_max,
            ..QuadOptions::default()
        }
    }

    pub fn with_refinement_max(mut self, n: usize) -> Self {
        self.refinement_max = n;
        self
    }

    pub fn total_weight(&self) -> f64 {
        self.x_nodes.iter().map(|(_, w)| w).sum()
    }
}
