use std::sync::Arc;

use super::{check_alpha_hurst, FlowSpec, KernelFn, KernelSpec, Space, BREAK_FLOOR};
use crate::error::{invalid, Result};
use crate::quadrature::TailDecay;

/// `G(x, u) = u₊^κ 1_{[0, 1/2)}({x + ln u})` on the unit circle.
pub struct PeriodicExample {
    kappa: f64,
    alpha: f64,
}

impl KernelFn for PeriodicExample {
    #[inline]
    fn eval(&self, x: f64, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let l = u.ln();
        let phase = (x + l).rem_euclid(1.0);
        if phase < 0.5 {
            (self.kappa * l).exp()
        } else {
            0.0
        }
    }

    fn breakpoints(&self, x: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let lo = lo.max(BREAK_FLOOR);
        if hi <= lo {
            return;
        }
        let m0 = (2.0 * (lo.ln() + x)).floor() as i64;
        let m1 = (2.0 * (hi.ln() + x)).ceil() as i64;
        for m in m0..=m1 {
            let b = (m as f64 / 2.0 - x).exp();
            if b > lo && b < hi {
                out.push(b);
            }
        }
    }

    fn tail(&self, _x: f64) -> TailDecay {
        TailDecay::algebraic(-self.kappa * self.alpha, 1.0)
    }
}

/// Log-periodic kernel driven by the rotation `x ↦ {x + ln c}`; needs `κ < 0`.
pub fn periodic_example(alpha: f64, hurst: f64) -> Result<KernelSpec> {
    check_alpha_hurst(alpha, hurst)?;
    let kappa = hurst - 1.0 / alpha;
    if kappa >= 0.0 {
        return invalid(format!(
            "periodic-example needs hurst < 1/alpha (kappa < 0), got kappa = {kappa}"
        ));
    }
    let g = Arc::new(PeriodicExample { kappa, alpha });
    Ok(KernelSpec::new(
        "periodic-example",
        Space::Interval {
            lo: 0.0,
            hi: 1.0,
            circle: true,
        },
        alpha,
        hurst,
        g,
    )?
    .with_flow(FlowSpec::rotation()))
}
