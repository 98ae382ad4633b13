use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_alpha_hurst, KernelFn, KernelSpec, Space, BREAK_FLOOR};
use crate::error::{invalid, Result};
use crate::quadrature::TailDecay;
use crate::rng::derived_rng;

/// Stationary Ornstein-Uhlenbeck path stored on a uniform grid in log-time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuParams {
    pub mean_reversion: f64,
    /// Stationary standard deviation.
    pub std: f64,
    /// Paths cover log-times `[-span, span]`.
    pub span: f64,
    pub step: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        OuParams {
            mean_reversion: 1.0,
            std: 1.0,
            span: 40.0,
            step: 0.05,
        }
    }
}

impl OuParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_reversion > 0.0 && self.mean_reversion.is_finite()) {
            return invalid(format!(
                "mean reversion must be positive, got {}",
                self.mean_reversion
            ));
        }
        if !(self.std > 0.0 && self.std.is_finite()) {
            return invalid(format!(
                "path standard deviation must be positive, got {}",
                self.std
            ));
        }
        if !(self.span > 0.0 && self.step > 0.0 && self.step < self.span) {
            return invalid("path grid needs 0 < step < span");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (2.0 * self.span / self.step).round() as usize + 1
    }
}

/// Exact stationary sampling: `W(0) ~ N(0, s²)` and
/// `W(t + h) = W(t) e^{-λh} + s √(1 - e^{-2λh}) Z`.
pub fn sample_ou_path<R: Rng>(p: &OuParams, rng: &mut R) -> Vec<f64> {
    let n = p.len();
    let decay = (-p.mean_reversion * p.step).exp();
    let noise = p.std * (1.0 - decay * decay).sqrt();
    let mut w = Vec::with_capacity(n);
    let mut cur = p.std * rng.sample::<f64, _>(StandardNormal);
    w.push(cur);
    for _ in 1..n {
        cur = cur * decay + noise * rng.sample::<f64, _>(StandardNormal);
        w.push(cur);
    }
    w
}

/// `G(w, u) = |u|^κ w(ln|u|)` for a sample of stationary paths `w`.
pub struct PathKernel {
    paths: Vec<Vec<f64>>,
    span: f64,
    step: f64,
    kappa: f64,
    alpha: f64,
}

impl PathKernel {
    #[inline]
    fn path_value(&self, i: usize, s: f64) -> f64 {
        let w = &self.paths[i];
        let pos = ((s + self.span) / self.step).clamp(0.0, (w.len() - 1) as f64);
        let j = (pos as usize).min(w.len() - 2);
        let f = pos - j as f64;
        w[j] + f * (w[j + 1] - w[j])
    }

    fn len_minus_one(&self) -> f64 {
        (self.paths[0].len() - 1) as f64
    }

    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }
}

impl KernelFn for PathKernel {
    #[inline]
    fn eval(&self, x: f64, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let i = (x.round().max(0.0) as usize).min(self.paths.len() - 1);
        let l = u.abs().ln();
        (self.kappa * l).exp() * self.path_value(i, l)
    }

    /// Kinks at `u = ±e^s` for the path's log-time nodes `s`.
    fn breakpoints(&self, _x: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let mut push_side = |a: f64, b: f64, sign: f64| {
            let a = a.max(BREAK_FLOOR);
            if b <= a {
                return;
            }
            let j0 = ((a.ln() + self.span) / self.step).floor().max(0.0) as usize;
            let j1 = ((b.ln() + self.span) / self.step)
                .ceil()
                .min(self.len_minus_one()) as usize;
            for j in j0..=j1 {
                let p = (-self.span + j as f64 * self.step).exp();
                if p > a && p < b {
                    out.push(sign * p);
                }
            }
        };
        if hi > 0.0 {
            push_side(lo.max(0.0), hi, 1.0);
        }
        if lo < 0.0 {
            push_side((-hi).max(0.0), -lo, -1.0);
        }
    }

    fn has_jumps(&self) -> bool {
        false
    }

    /// Paths are piecewise linear in log-time, so far from the origin `G_t` decays like an LFSM increment.
    fn tail(&self, _x: f64) -> TailDecay {
        TailDecay::algebraic(
            self.alpha * (1.0 - self.kappa) - 1.0,
            std::f64::consts::LN_2,
        )
    }
}

/// Kernel of the fourth kind over `n_paths` stationary OU paths, needs `H < min(α/4, 1)`.
///
/// The power of `|u|` is `κ = H - 1/α` rather than `H`; with this exponent the process is
/// `H`-self-similar in law. No flow is attached: a finite path sample is not invariant under
/// log-time shifts.
pub fn fourth_kind(
    alpha: f64,
    hurst: f64,
    n_paths: usize,
    ou: OuParams,
    seed: u64,
) -> Result<KernelSpec> {
    check_alpha_hurst(alpha, hurst)?;
    ou.validate()?;
    let p = alpha / 4.0;
    if hurst >= p.min(1.0) {
        return invalid(format!(
            "fourth-kind needs hurst < min(alpha/4, 1) = {}, got {hurst}",
            p.min(1.0)
        ));
    }
    if n_paths == 0 {
        return invalid("fourth-kind needs at least one path");
    }
    let paths = (0..n_paths)
        .map(|i| sample_ou_path(&ou, &mut derived_rng(seed, "fourth-kind", i as u64)))
        .collect();
    path_kernel(alpha, hurst, paths, ou.span, ou.step)
}

/// `|u|^κ w(ln|u|)` over given paths sampled on `[-span, span]` with spacing `step`.
pub fn path_kernel(
    alpha: f64,
    hurst: f64,
    paths: Vec<Vec<f64>>,
    span: f64,
    step: f64,
) -> Result<KernelSpec> {
    check_alpha_hurst(alpha, hurst)?;
    let n = (2.0 * span / step).round() as usize + 1;
    if paths.is_empty()
        || paths
            .iter()
            .any(|w| w.len() != n || w.iter().any(|v| !v.is_finite()))
    {
        return invalid(format!(
            "paths must be nonempty with {n} finite values each"
        ));
    }
    let n_paths = paths.len();
    let g = Arc::new(PathKernel {
        paths,
        span,
        step,
        kappa: hurst - 1.0 / alpha,
        alpha,
    });
    KernelSpec::new(
        "fourth-kind",
        Space::PathSample { n_paths },
        alpha,
        hurst,
        g,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Integrand;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ou_moments_match_stationary_law() {
        let p = OuParams {
            mean_reversion: 1.0,
            std: 2.0,
            span: 5000.0,
            step: 0.1,
        };
        let w = sample_ou_path(&p, &mut ChaCha8Rng::seed_from_u64(1));
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.15, "{mean}");
        assert!((var - 4.0).abs() < 0.4, "{var}");
        let lag = 10;
        let cov = w
            .windows(lag + 1)
            .map(|s| (s[0] - mean) * (s[lag] - mean))
            .sum::<f64>()
            / (n - lag as f64);
        assert!((cov / var - (-1.0f64).exp()).abs() < 0.06, "{}", cov / var);
    }

    #[test]
    fn rejects_zero_std_and_large_hurst() {
        let bad = OuParams {
            std: 0.0,
            ..OuParams::default()
        };
        assert!(fourth_kind(1.5, 0.3, 4, bad, 0).is_err());
        assert!(fourth_kind(1.5, 0.4, 4, OuParams::default(), 0).is_err());
        assert!(fourth_kind(1.5, 0.3, 0, OuParams::default(), 0).is_err());
    }

    #[test]
    fn kernel_interpolates_path() {
        let k = fourth_kind(1.5, 0.3, 3, OuParams::default(), 5).unwrap();
        let a = k.eval(1.0, 2.0);
        let b = k.eval(1.0, -2.0);
        assert_eq!(a, b);
        assert!(a.is_finite());
        assert_eq!(k.eval(1.0, 0.0), 0.0);
        assert_ne!(k.eval(0.0, 2.0), k.eval(2.0, 2.0));
    }

    #[test]
    fn constant_path_gives_power_increment() {
        let k = path_kernel(1.5, 0.3, vec![vec![2.5; 81]], 4.0, 0.1).unwrap();
        let inc = k.increment(1.7);
        for u in [-3.0, -0.4, 0.2, 5.0] {
            let want = 2.5 * ((1.7f64 + u).abs().powf(k.kappa) - u.abs().powf(k.kappa));
            assert!((inc.eval(0.0, u) - want).abs() < 1e-12);
        }
        assert!(path_kernel(1.5, 0.3, vec![vec![1.0; 80]], 4.0, 0.1).is_err());
    }

    #[test]
    fn breakpoints_are_path_nodes() {
        let k = path_kernel(1.5, 0.3, vec![vec![0.0; 81]], 4.0, 0.1).unwrap();
        let mut b = Vec::new();
        k.kernel_fn().breakpoints(0.0, -2.0, 3.0, &mut b);
        assert!(b.iter().all(|p| *p > -2.0 && *p < 3.0 && *p != 0.0));
        let pos = b.iter().filter(|p| **p > 0.0).count();
        assert_eq!(pos, 40 + 11);
        let neg = b.iter().filter(|p| **p < 0.0).count();
        assert_eq!(neg, 40 + 7);
    }

    #[test]
    fn paths_are_reproducible() {
        let a = fourth_kind(1.5, 0.3, 2, OuParams::default(), 9).unwrap();
        let b = fourth_kind(1.5, 0.3, 2, OuParams::default(), 9).unwrap();
        assert_eq!(a.eval(1.0, 3.3), b.eval(1.0, 3.3));
    }
}
