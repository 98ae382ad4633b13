//! Octave-wise evaluation of `J = ∫_0^∞ ∫ c^{-Hα} |G_c(x, cu)|^α du dc`.
//!
//! With `s = ln c` and `v = cu` the integrand becomes `e^{-Hαs} A(e^s)` where
//! `A(c) = ∫ |G_c(x, v)|^α dv`. Octave `n` adds `s ∈ [n-1, n] ∪ [-n, -(n-1)]`, each piece
//! integrated with Gauss-Legendre nodes at the same fractional positions.

use serde::{Deserialize, Serialize};

use super::Thresholds;
use crate::grid::GridSpec;
use crate::kernels::KernelSpec;
use crate::numeric::gauss_legendre;
use crate::quadrature::QuadOptions;
use crate::stable::line_alpha_integral;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfVerdict {
    Finite,
    Divergent,
    Indeterminate,
}

impl HopfVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            HopfVerdict::Finite => "finite",
            HopfVerdict::Divergent => "divergent",
            HopfVerdict::Indeterminate => "indeterminate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "finite" => Some(HopfVerdict::Finite),
            "divergent" => Some(HopfVerdict::Divergent),
            "indeterminate" => Some(HopfVerdict::Indeterminate),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopfTrace {
    /// Cumulative `J_1, …, J_N`.
    pub cumulative: Vec<f64>,
    /// `(J_N - J_{N-1}) / (J_{N-1} - J_{N-2})`.
    pub ratio: f64,
    pub verdict: HopfVerdict,
    /// Line integrals that missed their tolerance.
    pub unconverged: usize,
}

const NODES_PER_OCTAVE: usize = 8;

/// `A(c) c^{-Hα}` for `s = ln c`.
fn integrand(
    kernel: &KernelSpec,
    x: f64,
    grid: &GridSpec,
    opts: &QuadOptions,
    s: f64,
) -> (f64, bool) {
    let c = s.exp();
    let window = grid.u_window * c.max(1.0);
    let est = line_alpha_integral(&kernel.increment(c), x, kernel.alpha, window, opts);
    (
        (-kernel.hurst * kernel.alpha * s).exp() * est.value,
        est.converged,
    )
}

pub fn verdict(cumulative: &[f64], th: &Thresholds) -> (f64, HopfVerdict) {
    let n = cumulative.len();
    let last = cumulative[n - 1];
    if last == 0.0 {
        return (0.0, HopfVerdict::Finite);
    }
    let at = |i: isize| if i < 0 { 0.0 } else { cumulative[i as usize] };
    let k = n as isize - 1;
    let d_last = at(k) - at(k - 1);
    let d_prev = at(k - 1) - at(k - 2);
    let ratio = if d_prev > 0.0 {
        d_last / d_prev
    } else if d_last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let v = if last > th.hopf_cap * cumulative[0] || ratio >= th.hopf_divergent_ratio {
        HopfVerdict::Divergent
    } else if ratio < th.hopf_finite_ratio {
        HopfVerdict::Finite
    } else {
        HopfVerdict::Indeterminate
    };
    (ratio, v)
}

pub fn hopf_test(kernel: &KernelSpec, x: f64, grid: &GridSpec, th: &Thresholds) -> HopfTrace {
    let opts = QuadOptions {
        rel_tol: th.hopf_rel_tol,
        max_refinements: grid.refinement_max,
        ..QuadOptions::default()
    };
    let (gx, gw) = gauss_legendre(NODES_PER_OCTAVE);
    let octaves = th.octaves.max(3);
    let mut cumulative = Vec::with_capacity(octaves);
    let mut total = 0.0;
    let mut unconverged = 0;
    for n in 1..=octaves {
        let mut piece = 0.0;
        for (lo, hi) in [(n as f64 - 1.0, n as f64), (-(n as f64), -(n as f64) + 1.0)] {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (t, w) in gx.iter().zip(&gw) {
                let (v, ok) = integrand(kernel, x, grid, &opts, mid + half * t);
                if !ok {
                    unconverged += 1;
                }
                piece += half * w * v;
            }
        }
        total += piece;
        cumulative.push(total);
    }
    let (ratio, verdict) = verdict(&cumulative, th);
    HopfTrace {
        cumulative,
        ratio,
        verdict,
        unconverged,
    }
}
