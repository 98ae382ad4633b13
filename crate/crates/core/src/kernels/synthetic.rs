use std::sync::Arc;

use super::{KernelFn, KernelSpec, Space};
use crate::error::Result;
use crate::quadrature::TailDecay;

/// `G(x, u) = e^{-|u|}`: integrable in `u`, so every x-node is dissipative.
pub struct TwoSidedExp;

impl KernelFn for TwoSidedExp {
    #[inline]
    fn eval(&self, _x: f64, u: f64) -> f64 {
        (-u.abs()).exp()
    }

    fn tail(&self, _x: f64) -> TailDecay {
        TailDecay::FAST
    }
}

pub fn dissipative_synthetic(alpha: f64, hurst: f64) -> Result<KernelSpec> {
    KernelSpec::new(
        "dissipative-synthetic",
        Space::Interval {
            lo: 0.0,
            hi: 1.0,
            circle: false,
        },
        alpha,
        hurst,
        Arc::new(TwoSidedExp),
    )
}

struct Zero;

impl KernelFn for Zero {
    fn eval(&self, _x: f64, _u: f64) -> f64 {
        0.0
    }

    fn anchors(&self, _x: f64, _out: &mut Vec<f64>) {}

    fn tail(&self, _x: f64) -> TailDecay {
        TailDecay::FAST
    }
}

/// The zero kernel on `[0, 1)`, used for padding.
pub fn zero_kernel(alpha: f64, hurst: f64) -> Result<KernelSpec> {
    KernelSpec::new(
        "zero",
        Space::Interval {
            lo: 0.0,
            hi: 1.0,
            circle: false,
        },
        alpha,
        hurst,
        Arc::new(Zero),
    )
}
