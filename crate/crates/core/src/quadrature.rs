//! Adaptive Gauss-Kronrod integration over the real line.
//!
//! A line integral is split into a core window `[-W, W]` and two tails. The core is cut at
//! declared breakpoints, graded geometrically towards declared singular anchors and then
//! refined globally by bisecting the panel with the largest error estimate. Tails are
//! integrated in blocks of fixed logarithmic length; when the integrand declares an algebraic
//! mass exponent the unresolved remainder is extrapolated geometrically and the disagreement
//! between successive extrapolations is reported as `tail_bound`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::numeric::pairwise_sum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Decay of the integrand's mass `∫_{|u|>V} |f|` as `V → ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailDecay {
    /// Mass beyond `V` behaves like `V^{-exponent}`; `INFINITY` for faster-than-algebraic decay,
    /// `None` when nothing is known.
    pub exponent: Option<f64>,
    /// Logarithmic length of one tail block; log-periodic integrands should use their period.
    pub log_period: f64,
}

impl TailDecay {
    pub const UNKNOWN: TailDecay = TailDecay {
        exponent: None,
        log_period: std::f64::consts::LN_2,
    };
    pub const FAST: TailDecay = TailDecay {
        exponent: Some(f64::INFINITY),
        log_period: std::f64::consts::LN_2,
    };

    pub fn algebraic(exponent: f64, log_period: f64) -> Self {
        TailDecay {
            exponent: Some(exponent),
            log_period,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections in the core window.
    pub max_refinements: usize,
    /// Tails stop once `|u|` exceeds `tail_reach * max(W, 1)`.
    pub tail_reach: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_refinements: 4000,
            tail_reach: 1e10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LineEstimate {
    pub value: f64,
    /// Sum of panel error estimates.
    pub error: f64,
    /// Uncertainty of the extrapolated tail remainder.
    pub tail_bound: f64,
    pub refinements: usize,
    pub converged: bool,
    /// False when the tail blocks reached `tail_reach` before the stopping rule was met.
    pub tail_resolved: bool,
    /// True when the tail decay was unknown, so no remainder was added.
    pub tail_unbounded: bool,
}

/// What the line integrator needs to know about `u ↦ f(u)` besides its values.
pub struct LineShape<'a> {
    /// Points where `f` may be singular; the mesh is graded geometrically towards them.
    pub anchors: &'a [f64],
    /// Pushes every discontinuity of `f` inside `(lo, hi)` into the vector.
    pub breakpoints: &'a (dyn Fn(f64, f64, &mut Vec<f64>) + 'a),
    pub window: f64,
    pub tail: TailDecay,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 15-point Kronrod panel with the QUADPACK error rescaling.
pub fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return (value, f64::INFINITY);
    }
    (value, err)
}

struct Adaptive {
    value: f64,
    error: f64,
    refinements: usize,
    converged: bool,
}

/// Global adaptive integration over the panels delimited by the sorted `edges`.
fn adapt<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    edges: &[f64],
    tol_of: &dyn Fn(f64) -> f64,
    max_refinements: usize,
) -> Adaptive {
    let mut heap = BinaryHeap::with_capacity(edges.len() + max_refinements + 1);
    let mut done = Vec::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in edges.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut refinements = 0;
    let mut since_resum = 0;
    while total_err > tol_of(total) && refinements < max_refinements {
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            done.push(p);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(f, p.a, mid);
        let (v2, e2) = gk15(f, mid, p.b);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
        });
        refinements += 1;
        since_resum += 1;
        if since_resum == 256 {
            since_resum = 0;
            total_err = heap.iter().chain(done.iter()).map(|p| p.error).sum();
            total = heap.iter().chain(done.iter()).map(|p| p.value).sum();
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    let value = pairwise_sum(&values);
    let error = pairwise_sum(&errors);
    Adaptive {
        value,
        error,
        refinements,
        converged: error <= tol_of(value),
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.retain(|x| x.is_finite());
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|b, a| (*b - *a).abs() <= 1e-15 * a.abs().max(1e-300));
}

/// Integrate `f` over the whole real line.
pub fn integrate_line<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    shape: &LineShape,
    opts: &QuadOptions,
) -> LineEstimate {
    let amax = shape.anchors.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let w = shape.window.max(2.0 * amax).max(1e-9);

    let mut edges = vec![-w, w];
    edges.extend(shape.anchors.iter().copied().filter(|a| a.abs() < w));
    (shape.breakpoints)(-w, w, &mut edges);
    edges.retain(|e| *e >= -w && *e <= w);
    sort_dedup(&mut edges);

    let mut graded = Vec::new();
    for &a in shape.anchors.iter().filter(|a| a.abs() < w) {
        let i = edges.partition_point(|e| *e < a);
        let eps = 1e-12 * a.abs().max(1.0);
        if i > 0 {
            let gap = a - edges[i - 1];
            let mut s = eps;
            while s < 0.5 * gap {
                graded.push(a - s);
                s *= 2.0;
            }
        }
        let j = edges.partition_point(|e| *e <= a);
        if j < edges.len() {
            let gap = edges[j] - a;
            let mut s = eps;
            while s < 0.5 * gap {
                graded.push(a + s);
                s *= 2.0;
            }
        }
    }
    edges.extend(graded);
    sort_dedup(&mut edges);

    let rel = opts.rel_tol;
    let abs = opts.abs_tol;
    let core = adapt(f, &edges, &|v| abs.max(rel * v.abs()), opts.max_refinements);

    let mut out = LineEstimate {
        value: core.value,
        error: core.error,
        tail_bound: 0.0,
        refinements: core.refinements,
        converged: core.converged,
        tail_resolved: true,
        tail_unbounded: shape.tail.exponent.is_none(),
    };

    let mut parts = vec![core.value];
    for side in [1.0, -1.0] {
        let t = integrate_tail(f, shape, w, side, core.value, opts);
        parts.push(t.mass);
        parts.push(t.correction);
        out.error += t.error;
        out.tail_bound += t.bound;
        out.refinements += t.refinements;
        out.converged &= t.converged;
        out.tail_resolved &= t.resolved;
    }
    out.value = pairwise_sum(&parts);
    out
}

struct Tail {
    mass: f64,
    correction: f64,
    error: f64,
    bound: f64,
    refinements: usize,
    converged: bool,
    resolved: bool,
}

fn integrate_tail<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    shape: &LineShape,
    w: f64,
    side: f64,
    core: f64,
    opts: &QuadOptions,
) -> Tail {
    let beta = if shape.tail.log_period > 0.0 {
        shape.tail.log_period
    } else {
        std::f64::consts::LN_2
    };
    let ratio = match shape.tail.exponent {
        Some(tau) if tau.is_infinite() && tau > 0.0 => Some(0.0),
        Some(tau) if tau > 0.0 => Some((-tau * beta).exp()),
        _ => None,
    };
    let reach = opts.tail_reach * w.max(1.0);
    let tol_block = |running: f64| opts.abs_tol.max(opts.rel_tol * running.abs()) * 0.05;
    let budget = (opts.max_refinements / 4).max(64);

    let mut masses: Vec<f64> = Vec::new();
    let mut out = Tail {
        mass: 0.0,
        correction: 0.0,
        error: 0.0,
        bound: 0.0,
        refinements: 0,
        converged: true,
        resolved: false,
    };
    let mut k = 0;
    loop {
        let lo = w * (beta * k as f64).exp();
        let hi = w * (beta * (k + 1) as f64).exp();
        if lo > reach {
            break;
        }
        let (a, b) = if side > 0.0 { (lo, hi) } else { (-hi, -lo) };
        let mut edges = vec![a, b];
        (shape.breakpoints)(a, b, &mut edges);
        edges.retain(|e| *e >= a && *e <= b);
        sort_dedup(&mut edges);
        let running = core + masses.iter().sum::<f64>();
        let tb = tol_block(running);
        let blk = adapt(f, &edges, &|_| tb, budget);
        out.error += blk.error;
        out.refinements += blk.refinements;
        out.converged &= blk.converged;
        masses.push(blk.value);

        let tol_tail = 0.05 * opts.abs_tol.max(opts.rel_tol * running.abs());
        let m = blk.value;
        if k >= 1 {
            let prev = masses[k - 1];
            match ratio {
                Some(r) if r > 0.0 => {
                    let rk = m * r / (1.0 - r);
                    let rp = prev * r * r / (1.0 - r);
                    out.correction = rk;
                    out.bound = (rk - rp).abs();
                    if out.bound <= tol_tail {
                        out.resolved = true;
                        break;
                    }
                }
                _ => {
                    out.correction = 0.0;
                    out.bound = m.abs();
                    if m.abs() <= tol_tail && prev.abs() <= 4.0 * tol_tail {
                        out.resolved = true;
                        break;
                    }
                }
            }
        }
        k += 1;
    }
    if !out.resolved {
        out.bound = out.bound.max(out.correction.abs());
    }
    out.mass = pairwise_sum(&masses);
    out
}
