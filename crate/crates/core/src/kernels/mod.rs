//! Kernels `G(x, u)`, their increments `G_t(x, u) = G(x, t + u) - G(x, u)` and the registry
//! of built-in examples.

mod flow;
mod fourth;
mod lfsm;
mod periodic;
mod synthetic;
mod table;

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

pub use flow::{FlowMap, FlowSpec};
pub use fourth::{fourth_kind, path_kernel, sample_ou_path, OuParams, PathKernel};
pub use lfsm::{mixed_lfsm, mixed_lfsm_const, MixedLfsm};
pub use periodic::{periodic_example, PeriodicExample};
pub use synthetic::{dissipative_synthetic, zero_kernel};
pub use table::{parse_table, table_kernel, Interpolation, TableKernel};

use crate::error::{invalid, FsmError, Result};
use crate::grid::GridSpec;
use crate::quadrature::TailDecay;
use crate::stable::LinearCombination;

/// `κ` is treated as zero below this magnitude.
pub const KAPPA_ZERO_TOL: f64 = 1e-12;

/// Breakpoints closer to the origin than this are not reported.
pub(crate) const BREAK_FLOOR: f64 = 1e-13;

/// Pointwise description of a kernel.
pub trait KernelFn: Send + Sync {
    fn eval(&self, x: f64, u: f64) -> f64;

    /// Points of `u ↦ G(x, u)` where the kernel may be singular.
    fn anchors(&self, _x: f64, out: &mut Vec<f64>) {
        out.push(0.0);
    }

    /// Discontinuities or kinks of `u ↦ G(x, u)` in `(lo, hi)`.
    fn breakpoints(&self, _x: f64, _lo: f64, _hi: f64, _out: &mut Vec<f64>) {}

    /// Whether some breakpoints are jumps rather than kinks.
    fn has_jumps(&self) -> bool {
        true
    }

    /// Decay of `u ↦ |G_t(x, u)|^α` at infinity.
    fn tail(&self, x: f64) -> TailDecay;
}

/// Something that can be integrated as `∫∫ |f(x, u)|^α density(x) w(dx) du`.
pub trait Integrand: Sync {
    fn eval(&self, x: f64, u: f64) -> f64;
    fn anchors(&self, _x: f64, _out: &mut Vec<f64>) {}
    fn breakpoints(&self, _x: f64, _lo: f64, _hi: f64, _out: &mut Vec<f64>) {}
    fn tail(&self, _x: f64) -> TailDecay {
        TailDecay::UNKNOWN
    }
    fn density(&self, _x: f64) -> f64 {
        1.0
    }
}

/// State space of the flow.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    /// `[lo, hi)` with Lebesgue base measure; `circle` marks periodic identification.
    Interval {
        lo: f64,
        hi: f64,
        circle: bool,
    },
    FiniteSet {
        points: Vec<f64>,
        weights: Vec<f64>,
    },
    /// `n_paths` sampled paths, each of mass `1 / n_paths`; node `i` sits at `x = i`.
    PathSample {
        n_paths: usize,
    },
}

impl Space {
    /// Quadrature nodes: midpoints for intervals, the points themselves otherwise.
    pub fn nodes(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            Space::Interval { lo, hi, .. } => {
                let h = (hi - lo) / n as f64;
                (0..n).map(|i| (lo + (i as f64 + 0.5) * h, h)).collect()
            }
            Space::FiniteSet { points, weights } => points
                .iter()
                .copied()
                .zip(weights.iter().copied())
                .collect(),
            Space::PathSample { n_paths } => (0..*n_paths)
                .map(|i| (i as f64, 1.0 / *n_paths as f64))
                .collect(),
        }
    }
}

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct KernelSpec {
    pub label: String,
    pub space: Space,
    pub alpha: f64,
    pub hurst: f64,
    pub kappa: f64,
    g: Arc<dyn KernelFn>,
    density: Density,
    flow: Option<FlowSpec>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("label", &self.label)
            .field("space", &self.space)
            .field("alpha", &self.alpha)
            .field("hurst", &self.hurst)
            .field("kappa", &self.kappa)
            .field("flow", &self.flow)
            .finish()
    }
}

pub(crate) fn check_alpha_hurst(alpha: f64, hurst: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return invalid(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return invalid(format!("hurst must lie in (0, 1), got {hurst}"));
    }
    Ok(())
}

impl KernelSpec {
    pub fn new(
        label: impl Into<String>,
        space: Space,
        alpha: f64,
        hurst: f64,
        g: Arc<dyn KernelFn>,
    ) -> Result<Self> {
        check_alpha_hurst(alpha, hurst)?;
        Ok(KernelSpec {
            label: label.into(),
            space,
            alpha,
            hurst,
            kappa: hurst - 1.0 / alpha,
            g,
            density: Arc::new(|_| 1.0),
            flow: None,
        })
    }

    pub fn with_flow(mut self, flow: FlowSpec) -> Self {
        self.flow = Some(flow);
        self
    }

    pub fn with_density(mut self, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.density = Arc::new(density);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, x: f64, u: f64) -> f64 {
        self.g.eval(x, u)
    }

    pub fn kernel_fn(&self) -> &Arc<dyn KernelFn> {
        &self.g
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    pub fn flow(&self) -> Option<&FlowSpec> {
        self.flow.as_ref()
    }

    /// Default grid: `n_x` nodes of the state space (ignored for finite sets and path samples).
    pub fn grid(&self, n_x: usize, u_window: f64, u_step: f64) -> Result<GridSpec> {
        if n_x == 0 {
            return invalid("need at least one x-node");
        }
        GridSpec::new(self.space.nodes(n_x), u_window, u_step)
    }

    /// The increment kernel `G_t`.
    pub fn increment(&self, t: f64) -> Combination<'_> {
        Combination::new(self, &[1.0], &[t])
    }

    /// `Σ θ_k G_{t_k}`.
    pub fn combination(&self, comb: &LinearCombination) -> Combination<'_> {
        Combination::new(self, &comb.theta, &comb.times)
    }

    /// The same kernel with base measure multiplied by the indicator of `keep`.
    pub fn restrict(
        &self,
        label: impl Into<String>,
        keep: impl Fn(f64) -> bool + Send + Sync + 'static,
    ) -> KernelSpec {
        let d = self.density.clone();
        let mut k = self.clone();
        k.label = label.into();
        k.density = Arc::new(move |x| if keep(x) { d(x) } else { 0.0 });
        k
    }

    /// Restriction to an explicit set of x-nodes, matched bit-for-bit.
    pub fn restrict_to_nodes(&self, label: impl Into<String>, nodes: &[f64]) -> KernelSpec {
        let set: HashSet<u64> = nodes.iter().map(|x| x.to_bits()).collect();
        self.restrict(label, move |x| set.contains(&x.to_bits()))
    }
}

/// `u ↦ Σ θ_k G(x, t_k + u) - (Σ θ_k) G(x, u)`.
pub struct Combination<'a> {
    kernel: &'a KernelSpec,
    theta: Vec<f64>,
    times: Vec<f64>,
    theta_sum: f64,
}

impl<'a> Combination<'a> {
    pub fn new(kernel: &'a KernelSpec, theta: &[f64], times: &[f64]) -> Self {
        Combination {
            kernel,
            theta: theta.to_vec(),
            times: times.to_vec(),
            theta_sum: theta.iter().sum(),
        }
    }

    pub fn kernel(&self) -> &KernelSpec {
        self.kernel
    }
}

impl Integrand for Combination<'_> {
    #[inline]
    fn eval(&self, x: f64, u: f64) -> f64 {
        let mut s = 0.0;
        for (th, t) in self.theta.iter().zip(&self.times) {
            s += th * self.kernel.g.eval(x, t + u);
        }
        s - self.theta_sum * self.kernel.g.eval(x, u)
    }

    fn anchors(&self, x: f64, out: &mut Vec<f64>) {
        let mut base = Vec::new();
        self.kernel.g.anchors(x, &mut base);
        for &a in &base {
            out.push(a);
            for t in &self.times {
                out.push(a - t);
            }
        }
    }

    fn breakpoints(&self, x: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        self.kernel.g.breakpoints(x, lo, hi, out);
        let mut tmp = Vec::new();
        for t in &self.times {
            tmp.clear();
            self.kernel.g.breakpoints(x, lo + t, hi + t, &mut tmp);
            out.extend(tmp.iter().map(|b| b - t));
        }
    }

    fn tail(&self, x: f64) -> TailDecay {
        self.kernel.g.tail(x)
    }

    fn density(&self, x: f64) -> f64 {
        self.kernel.density(x)
    }
}

/// Glue two kernels on `[0, 1)` side by side on `[0, 2)`; the second is shifted by one.
pub fn concatenate(label: impl Into<String>, a: &KernelSpec, b: &KernelSpec) -> Result<KernelSpec> {
    let unit = |s: &Space| matches!(s, Space::Interval { lo, hi, .. } if *lo == 0.0 && *hi == 1.0);
    if !unit(&a.space) || !unit(&b.space) {
        return invalid("concatenation needs two kernels on [0, 1)");
    }
    if (a.alpha - b.alpha).abs() > 0.0 || (a.hurst - b.hurst).abs() > 0.0 {
        return invalid("concatenated kernels must share alpha and hurst");
    }
    let g = Arc::new(Concat {
        a: a.g.clone(),
        b: b.g.clone(),
    });
    let (da, db) = (a.density.clone(), b.density.clone());
    let mut k = KernelSpec::new(
        label,
        Space::Interval {
            lo: 0.0,
            hi: 2.0,
            circle: false,
        },
        a.alpha,
        a.hurst,
        g,
    )?
    .with_density(move |x| if x < 1.0 { da(x) } else { db(x - 1.0) });
    if let (Some(fa), Some(fb)) = (a.flow.clone(), b.flow.clone()) {
        let name = format!("{}+{}", fa.name, fb.name);
        let (fa1, fb1) = (fa.clone(), fb.clone());
        let (fa2, fb2) = (fa.clone(), fb.clone());
        let (fa3, fb3) = (fa.clone(), fb.clone());
        let (fa4, fb4) = (fa.clone(), fb.clone());
        let pick = |x: f64| x < 1.0;
        let mut flow = FlowSpec::new(name, move |c, x| {
            if pick(x) {
                fa.psi(c, x)
            } else {
                1.0 + fb.psi(c, x - 1.0)
            }
        })
        .with_cocycle(move |c, x| {
            if pick(x) {
                fa1.cocycle(c, x)
            } else {
                fb1.cocycle(c, x - 1.0)
            }
        })
        .with_semiadditive(move |c, x| {
            if pick(x) {
                fa2.semiadd(c, x)
            } else {
                fb2.semiadd(c, x - 1.0)
            }
        })
        .with_remainder(move |c, x| {
            if pick(x) {
                fa3.remainder(c, x)
            } else {
                fb3.remainder(c, x - 1.0)
            }
        })
        .with_radon_nikodym(move |c, x| {
            if pick(x) {
                fa4.radon_nikodym(c, x)
            } else {
                fb4.radon_nikodym(c, x - 1.0)
            }
        });
        if a.flow.as_ref().and_then(|f| f.circle).is_some()
            || b.flow.as_ref().and_then(|f| f.circle).is_some()
        {
            flow = flow.on_circle(1.0);
        }
        k = k.with_flow(flow);
    }
    Ok(k)
}

struct Concat {
    a: Arc<dyn KernelFn>,
    b: Arc<dyn KernelFn>,
}

impl Concat {
    fn side(&self, x: f64) -> (&dyn KernelFn, f64) {
        if x < 1.0 {
            (self.a.as_ref(), x)
        } else {
            (self.b.as_ref(), x - 1.0)
        }
    }
}

impl KernelFn for Concat {
    fn eval(&self, x: f64, u: f64) -> f64 {
        let (k, y) = self.side(x);
        k.eval(y, u)
    }
    fn anchors(&self, x: f64, out: &mut Vec<f64>) {
        let (k, y) = self.side(x);
        k.anchors(y, out)
    }
    fn breakpoints(&self, x: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let (k, y) = self.side(x);
        k.breakpoints(y, lo, hi, out)
    }
    fn has_jumps(&self) -> bool {
        self.a.has_jumps() || self.b.has_jumps()
    }
    fn tail(&self, x: f64) -> TailDecay {
        let (k, y) = self.side(x);
        k.tail(y)
    }
}

/// Parameters understood by [`build`].
#[derive(Clone, Debug)]
pub struct KernelParams {
    pub alpha: f64,
    pub hurst: f64,
    pub f1: f64,
    pub f2: f64,
    pub force_log: bool,
    pub seed: u64,
    pub w_paths: usize,
    pub ou: OuParams,
    pub table: Option<PathBuf>,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            alpha: 1.5,
            hurst: 0.5,
            f1: 1.0,
            f2: 2.0,
            force_log: false,
            seed: 0,
            w_paths: 200,
            ou: OuParams::default(),
            table: None,
        }
    }
}

pub const REGISTRY: &[&str] = &[
    "mixed-lfsm",
    "periodic-example",
    "fourth-kind",
    "dissipative-synthetic",
    "lfsm-periodic-concat",
    "table",
];

/// Build a registered kernel by name.
pub fn build(name: &str, p: &KernelParams) -> Result<KernelSpec> {
    match name {
        "mixed-lfsm" => mixed_lfsm_const(p.alpha, p.hurst, p.f1, p.f2, p.force_log),
        "periodic-example" => periodic_example(p.alpha, p.hurst),
        "fourth-kind" => fourth_kind(p.alpha, p.hurst, p.w_paths, p.ou, p.seed),
        "dissipative-synthetic" => dissipative_synthetic(p.alpha, p.hurst),
        "lfsm-periodic-concat" => {
            let a = mixed_lfsm_const(p.alpha, p.hurst, p.f1, p.f2, p.force_log)?;
            let b = periodic_example(p.alpha, p.hurst)?;
            concatenate("lfsm-periodic-concat", &a, &b)
        }
        "table" => match &p.table {
            Some(path) => table_kernel(path, p.alpha, p.hurst),
            None => invalid("kernel 'table' needs a kernel file"),
        },
        _ => Err(FsmError::UnknownKernel {
            name: name.to_string(),
            available: REGISTRY.join(", "),
        }),
    }
}
