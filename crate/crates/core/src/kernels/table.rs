//! Kernels read from a text table of `x u G` triples.
//!
//! ```text
//! # comment
//! interpolation = linear      # or: step
//! 0.0  -1.0  0.0
//! 0.0   0.0  1.0
//! 0.0   1.0  0.0
//! 0.5  -2.0  1.0
//! 0.5   2.0  0.0
//! ```
//!
//! Every distinct `x` becomes a node of mass `1 / n_x`. For each node the `u` values must be
//! distinct (at least two); `G` is interpolated between them and held constant beyond the
//! first and last knot, so the increments `G_t` have compact support.

use std::path::Path;
use std::sync::Arc;

use super::{KernelFn, KernelSpec, Space};
use crate::error::{FsmError, Result};
use crate::quadrature::TailDecay;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Right-continuous piecewise constant.
    Step,
}

#[derive(Clone, Debug)]
pub struct TableKernel {
    pub interpolation: Interpolation,
    xs: Vec<f64>,
    knots: Vec<Vec<(f64, f64)>>,
}

impl TableKernel {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    fn row(&self, x: f64) -> &[(f64, f64)] {
        let i = self.xs.partition_point(|v| *v < x);
        let i = if i == self.xs.len() || (i > 0 && (x - self.xs[i - 1]) < (self.xs[i] - x)) {
            i - 1
        } else {
            i
        };
        &self.knots[i]
    }
}

impl KernelFn for TableKernel {
    fn eval(&self, x: f64, u: f64) -> f64 {
        let k = self.row(x);
        if u <= k[0].0 {
            return k[0].1;
        }
        let last = k[k.len() - 1];
        if u >= last.0 {
            return last.1;
        }
        let j = k.partition_point(|p| p.0 <= u) - 1;
        let (a, b) = (k[j], k[j + 1]);
        match self.interpolation {
            Interpolation::Step => a.1,
            Interpolation::Linear => a.1 + (u - a.0) / (b.0 - a.0) * (b.1 - a.1),
        }
    }

    fn anchors(&self, _x: f64, _out: &mut Vec<f64>) {}

    fn breakpoints(&self, x: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        out.extend(
            self.row(x)
                .iter()
                .map(|p| p.0)
                .filter(|u| *u > lo && *u < hi),
        );
    }

    fn has_jumps(&self) -> bool {
        self.interpolation == Interpolation::Step
    }

    fn tail(&self, _x: f64) -> TailDecay {
        TailDecay::FAST
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> FsmError {
    FsmError::Parse {
        line,
        message: message.into(),
    }
}

/// Parse the table format described in the module docs.
pub fn parse_table(text: &str) -> Result<TableKernel> {
    let mut interpolation = None;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("interpolation") {
            let v = rest.trim().trim_start_matches('=').trim();
            interpolation = Some(match v {
                "linear" => Interpolation::Linear,
                "step" => Interpolation::Step,
                _ => return Err(parse_err(n + 1, format!("unknown interpolation '{v}'"))),
            });
            continue;
        }
        let vals: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if vals.len() != 3 {
            return Err(parse_err(n + 1, "expected three numbers: x u G"));
        }
        let mut v = [0.0f64; 3];
        for (slot, s) in v.iter_mut().zip(&vals) {
            *slot = s
                .parse()
                .map_err(|_| parse_err(n + 1, format!("not a number: '{s}'")))?;
            if !slot.is_finite() {
                return Err(parse_err(n + 1, "values must be finite"));
            }
        }
        rows.push((v[0], v[1], v[2]));
    }
    let interpolation =
        interpolation.ok_or_else(|| parse_err(0, "missing 'interpolation = linear|step' line"))?;
    if rows.is_empty() {
        return Err(parse_err(0, "table has no rows"));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut xs = Vec::new();
    let mut knots: Vec<Vec<(f64, f64)>> = Vec::new();
    for (x, u, g) in rows {
        if xs.last() != Some(&x) {
            xs.push(x);
            knots.push(Vec::new());
        }
        let k = knots.last_mut().unwrap();
        if k.last().map(|p| p.0) == Some(u) {
            return Err(parse_err(0, format!("duplicate u = {u} at x = {x}")));
        }
        k.push((u, g));
    }
    if let Some((i, _)) = knots.iter().enumerate().find(|(_, k)| k.len() < 2) {
        return Err(parse_err(
            0,
            format!("x = {} needs at least two u values", xs[i]),
        ));
    }
    Ok(TableKernel {
        interpolation,
        xs,
        knots,
    })
}

pub fn table_kernel(path: &Path, alpha: f64, hurst: f64) -> Result<KernelSpec> {
    let text = std::fs::read_to_string(path)?;
    let t = parse_table(&text)?;
    let n = t.xs.len();
    let space = Space::FiniteSet {
        points: t.xs.clone(),
        weights: vec![1.0 / n as f64; n],
    };
    KernelSpec::new("table", space, alpha, hurst, Arc::new(t))
}
