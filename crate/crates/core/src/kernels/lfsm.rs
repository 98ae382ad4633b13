use std::sync::Arc;

use super::{check_alpha_hurst, FlowSpec, KernelFn, KernelSpec, Space, KAPPA_ZERO_TOL};
use crate::error::Result;
use crate::quadrature::TailDecay;

type Coef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `G(x, u) = F1(x) u₊^κ + F2(x) u₋^κ`, or `F1(x) ln|u| + F2(x) 1_{u>0}` when `κ = 0`.
pub struct MixedLfsm {
    f1: Coef,
    f2: Coef,
    kappa: f64,
    alpha: f64,
    log_branch: bool,
}

impl MixedLfsm {
    pub fn is_log_branch(&self) -> bool {
        self.log_branch
    }
}

impl KernelFn for MixedLfsm {
    #[inline]
    fn eval(&self, x: f64, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        if self.log_branch {
            let jump = if u > 0.0 { (self.f2)(x) } else { 0.0 };
            (self.f1)(x) * u.abs().ln() + jump
        } else if u > 0.0 {
            (self.f1)(x) * u.powf(self.kappa)
        } else {
            (self.f2)(x) * (-u).powf(self.kappa)
        }
    }

    fn tail(&self, _x: f64) -> TailDecay {
        let k = if self.log_branch { 0.0 } else { self.kappa };
        TailDecay::algebraic(self.alpha * (1.0 - k) - 1.0, std::f64::consts::LN_2)
    }
}

/// Mixed linear fractional kernel on `[0, 1)` with x-dependent coefficients.
///
/// The logarithmic branch is used when `|κ| < 1e-12` or when `force_log` is set. The attached
/// flow is the identity; its additive remainder is read off the generation identity at
/// `u = 1`, which gives `F1(x) ln c` on the logarithmic branch and zero otherwise.
pub fn mixed_lfsm(
    alpha: f64,
    hurst: f64,
    f1: impl Fn(f64) -> f64 + Send + Sync + 'static,
    f2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    force_log: bool,
) -> Result<KernelSpec> {
    check_alpha_hurst(alpha, hurst)?;
    let kappa = hurst - 1.0 / alpha;
    let g = Arc::new(MixedLfsm {
        f1: Arc::new(f1),
        f2: Arc::new(f2),
        kappa,
        alpha,
        log_branch: force_log || kappa.abs() < KAPPA_ZERO_TOL,
    });
    let gg = g.clone();
    let flow = FlowSpec::identity()
        .with_remainder(move |c, x| c.powf(-kappa) * gg.eval(x, c) - gg.eval(x, 1.0));
    Ok(KernelSpec::new(
        "mixed-lfsm",
        Space::Interval {
            lo: 0.0,
            hi: 1.0,
            circle: false,
        },
        alpha,
        hurst,
        g,
    )?
    .with_flow(flow))
}

pub fn mixed_lfsm_const(
    alpha: f64,
    hurst: f64,
    f1: f64,
    f2: f64,
    force_log: bool,
) -> Result<KernelSpec> {
    mixed_lfsm(alpha, hurst, move |_| f1, move |_| f2, force_log)
}
