//! Monte-Carlo paths of `X(t) = ∫∫ G_t(x, u) M(dx, du)` from a cell discretization of the
//! random measure, plus the stationary path sampler behind the fourth-kind kernel.
//!
//! Each cell carries an independent `SαS` variable drawn from a counter-addressed stream keyed by
//! `(seed, path)` and the cell's position, so an ensemble is reproducible for any thread count.

mod ensemble;

use rayon::prelude::*;

pub use ensemble::{parse_time_grid, write_targets_csv, CfTarget, PathEnsemble};

use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::kernels::{sample_ou_path, KernelSpec, OuParams};
use crate::rng::{derive_seed, derived_rng, mix64, CounterStream};
use crate::stable::sas_from_uniforms;

/// Points per cell in the averaged `|G_t|^α`.
const SUB_POINTS: usize = 4;
/// Cells next to a singular point are halved this many times towards it.
const ANCHOR_GRADING: usize = 12;

/// One cell of the uniform u-grid at an x-node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureCell {
    pub x_index: usize,
    pub lo: f64,
    pub hi: f64,
    /// `(weight · Δ)^{1/α}`.
    pub scale: f64,
}

/// Cells of the uniform grid with the scale of `M` on each.
pub fn discretize_measure(grid: &GridSpec, alpha: f64) -> Result<Vec<MeasureCell>> {
    grid.validate()?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return invalid(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    let n = grid.u_count();
    let mut cells = Vec::with_capacity(n * grid.x_nodes.len());
    for (i, &(_, w)) in grid.x_nodes.iter().enumerate() {
        let scale = (w * grid.u_step).powf(1.0 / alpha);
        for j in 0..n {
            let lo = -grid.u_window + j as f64 * grid.u_step;
            cells.push(MeasureCell {
                x_index: i,
                lo,
                hi: lo + grid.u_step,
                scale,
            });
        }
    }
    Ok(cells)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    /// Cells grow geometrically from the u-window out to `±far_window`.
    pub far_window: f64,
    /// Ratio between successive outer cell edges.
    pub growth: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            far_window: 1e12,
            growth: 1.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimCell {
    pub x_index: usize,
    pub lo: f64,
    pub hi: f64,
    key: u64,
}

/// Cells with per-time weights `sign · (∫_cell |G_t|^α μ(dx) du)^{1/α}`, the integral
/// taken as a 4-point midpoint average.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub cells: Vec<SimCell>,
    weights: Vec<f64>,
}

fn cell_edges(
    kernel: &KernelSpec,
    x: f64,
    times: &[f64],
    grid: &GridSpec,
    opts: &SimOptions,
) -> Vec<f64> {
    let u = grid.u_window;
    let n = grid.u_count();
    let step = 2.0 * u / n as f64;
    let far = opts.far_window.max(u);
    let mut e: Vec<f64> = (0..=n).map(|j| -u + j as f64 * step).collect();
    let mut b = u;
    while b < far {
        b = (b * opts.growth).min(far);
        e.push(b);
        e.push(-b);
    }
    let g = kernel.kernel_fn();
    let mut tmp = Vec::new();
    for s in std::iter::once(0.0).chain(times.iter().copied()) {
        tmp.clear();
        g.anchors(x, &mut tmp);
        for a in tmp.clone() {
            for k in 1..=ANCHOR_GRADING {
                let d = step * 0.5f64.powi(k as i32);
                tmp.push(a - d);
                tmp.push(a + d);
            }
        }
        if g.has_jumps() {
            g.breakpoints(x, -far + s, far + s, &mut tmp);
        }
        e.extend(tmp.iter().map(|p| p - s).filter(|p| p.abs() < far));
    }
    e.sort_by(|a, b| a.total_cmp(b));
    e.dedup_by(|b, a| (*b - *a).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
    e
}

impl Discretization {
    pub fn build(
        kernel: &KernelSpec,
        times: &[f64],
        grid: &GridSpec,
        opts: &SimOptions,
    ) -> Result<Self> {
        grid.validate()?;
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
            return invalid("times must be a nonempty list of finite values");
        }
        let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if grid.u_window < 2.0 * t_max {
            return invalid(format!(
                "u-window {} is too narrow for times up to {t_max}: need at least {}",
                grid.u_window,
                2.0 * t_max
            ));
        }
        if !(opts.growth > 1.0 && opts.far_window.is_finite()) {
            return invalid("tail cells need growth > 1 and a finite far window");
        }
        let alpha = kernel.alpha;
        let nt = times.len();
        let per_node: Vec<(Vec<SimCell>, Vec<f64>)> = grid
            .x_nodes
            .par_iter()
            .enumerate()
            .map(|(i, &(x, w))| {
                let mass = w * kernel.density(x);
                let mut cells = Vec::new();
                let mut weights = Vec::new();
                if mass == 0.0 {
                    return (cells, weights);
                }
                let node_key = mix64(i as u64 ^ 0xA5A5_5A5A_0F0F_F0F0);
                let edges = cell_edges(kernel, x, times, grid, opts);
                let mut base = [0.0; SUB_POINTS];
                let mut sub = [0.0; SUB_POINTS];
                for pair in edges.windows(2) {
                    let (lo, hi) = (pair[0], pair[1]);
                    let h = (hi - lo) / SUB_POINTS as f64;
                    for j in 0..SUB_POINTS {
                        sub[j] = lo + (j as f64 + 0.5) * h;
                        base[j] = kernel.eval(x, sub[j]);
                    }
                    let m = (hi - lo) * mass;
                    for &t in times {
                        let (mut abs_sum, mut signed) = (0.0, 0.0);
                        for j in 0..SUB_POINTS {
                            let v = kernel.eval(x, t + sub[j]) - base[j];
                            abs_sum += v.abs().powf(alpha);
                            signed += v;
                        }
                        let mag = (abs_sum / SUB_POINTS as f64 * m).powf(1.0 / alpha);
                        weights.push(if signed < 0.0 { -mag } else { mag });
                    }
                    cells.push(SimCell {
                        x_index: i,
                        lo,
                        hi,
                        key: mix64(node_key ^ lo.to_bits()),
                    });
                }
                (cells, weights)
            })
            .collect();
        let mut cells = Vec::new();
        let mut weights = Vec::new();
        for (c, w) in per_node {
            cells.extend(c);
            weights.extend(w);
        }
        debug_assert_eq!(weights.len(), cells.len() * nt);
        Ok(Discretization {
            alpha,
            times: times.to_vec(),
            cells,
            weights,
        })
    }

    pub fn weights(&self, cell: usize) -> &[f64] {
        let nt = self.times.len();
        &self.weights[cell * nt..(cell + 1) * nt]
    }

    /// `Σ_cells |Σ_k θ_k w_k|^α`, the CF exponent of `Σ_k θ_k X(t_k)` for the discretized process.
    pub fn exponent(&self, theta: &[f64]) -> f64 {
        assert_eq!(theta.len(), self.times.len());
        let vals: Vec<f64> = (0..self.cells.len())
            .map(|c| {
                self.weights(c)
                    .iter()
                    .zip(theta)
                    .map(|(w, t)| w * t)
                    .sum::<f64>()
                    .abs()
                    .powf(self.alpha)
            })
            .collect();
        crate::numeric::pairwise_sum(&vals)
    }

    /// Per-time exponents with unit coefficient.
    pub fn marginal_exponents(&self) -> Vec<f64> {
        let nt = self.times.len();
        (0..nt)
            .map(|k| {
                let vals: Vec<f64> = (0..self.cells.len())
                    .map(|c| self.weights[c * nt + k].abs().powf(self.alpha))
                    .collect();
                crate::numeric::pairwise_sum(&vals)
            })
            .collect()
    }

    /// One path: `X(t_k) = Σ_cells w_k Z_cell`.
    pub fn path(&self, seed: u64, path: u64) -> Vec<f64> {
        let nt = self.times.len();
        let stream = CounterStream::new(derive_seed(seed, "random-measure", path));
        let mut acc = vec![0.0; nt];
        for (c, cell) in self.cells.iter().enumerate() {
            let w = &self.weights[c * nt..(c + 1) * nt];
            let (a, b) = stream.uniform_pair(cell.key);
            let z = sas_from_uniforms(self.alpha, a, b);
            for (s, wk) in acc.iter_mut().zip(w) {
                *s += wk * z;
            }
        }
        acc
    }
}

pub fn sample_paths(
    kernel: &KernelSpec,
    times: &[f64],
    n_paths: usize,
    grid: &GridSpec,
    seed: u64,
) -> Result<PathEnsemble> {
    sample_paths_with(kernel, times, n_paths, grid, seed, &SimOptions::default())
}

pub fn sample_paths_with(
    kernel: &KernelSpec,
    times: &[f64],
    n_paths: usize,
    grid: &GridSpec,
    seed: u64,
    opts: &SimOptions,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return invalid("need at least one path");
    }
    let disc = Discretization::build(kernel, times, grid, opts)?;
    let rows: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| disc.path(seed, p))
        .collect();
    Ok(PathEnsemble {
        kernel: kernel.label.clone(),
        times: times.to_vec(),
        n_paths,
        values: rows.concat(),
        seed,
        grid: Some(grid.clone()),
        discretized_exponents: disc.marginal_exponents(),
        cells: disc.cells.len(),
    })
}

/// Stationary OU paths on the log-time grid of `ou`; path `i` matches the fourth-kind kernel's.
pub fn sample_w_paths(ou: &OuParams, n_paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    ou.validate()?;
    Ok((0..n_paths)
        .map(|i| sample_ou_path(ou, &mut derived_rng(seed, "fourth-kind", i as u64)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{mixed_lfsm_const, periodic_example, zero_kernel};
    use crate::stable::{cf_exponent, LinearCombination};

    #[test]
    fn measure_scales_follow_formula() {
        let nodes: Vec<(f64, f64)> = (0..64)
            .map(|i| ((i as f64 + 0.5) / 64.0, 1.0 / 64.0))
            .collect();
        let g = GridSpec::new(nodes, 10.0, 0.01).unwrap();
        let cells = discretize_measure(&g, 1.5).unwrap();
        assert_eq!(cells.len(), 64 * 2000);
        let want = (0.01f64 / 64.0).powf(1.0 / 1.5);
        assert!(cells.iter().all(|c| (c.scale - want).abs() < 1e-15));
        let total: f64 = crate::numeric::pairwise_sum(
            &cells.iter().map(|c| c.scale.powf(1.5)).collect::<Vec<_>>(),
        );
        assert!((total - 20.0).abs() < 1e-10, "{total}");
        let g2 = GridSpec::new(g.x_nodes.clone(), 10.0, 0.02).unwrap();
        let c2 = discretize_measure(&g2, 1.5).unwrap();
        assert!((c2[0].scale.powf(1.5) / cells[0].scale.powf(1.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_gives_zero_paths() {
        let k = zero_kernel(1.5, 0.5).unwrap();
        let g = k.grid(2, 5.0, 0.1).unwrap();
        let e = sample_paths(&k, &[0.0, 1.0, 2.0], 5, &g, 1).unwrap();
        assert!(e.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn time_zero_is_exactly_zero_and_seed_determines_output() {
        let k = mixed_lfsm_const(1.5, 0.5, 1.0, 2.0, false).unwrap();
        let g = k.grid(1, 5.0, 0.1).unwrap();
        let opts = SimOptions {
            far_window: 50.0,
            growth: 1.2,
        };
        let a = sample_paths_with(&k, &[0.0, 0.5, 1.0], 20, &g, 3, &opts).unwrap();
        let b = sample_paths_with(&k, &[0.0, 0.5, 1.0], 20, &g, 3, &opts).unwrap();
        let c = sample_paths_with(&k, &[0.0, 0.5, 1.0], 20, &g, 4, &opts).unwrap();
        assert!(a.column(0).iter().all(|v| *v == 0.0));
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        assert!(a.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn narrow_window_is_rejected() {
        let k = mixed_lfsm_const(1.5, 0.5, 1.0, 2.0, false).unwrap();
        let g = k.grid(1, 3.0, 0.1).unwrap();
        let err = sample_paths(&k, &[0.0, 2.0], 2, &g, 0)
            .unwrap_err()
            .to_string();
        assert!(err.contains("at least 4"), "{err}");
        assert!(sample_paths(&k, &[1.0], 0, &g, 0).is_err());
    }

    #[test]
    fn discretized_exponent_tracks_quadrature() {
        for k in [
            mixed_lfsm_const(1.5, 0.5, 1.0, 2.0, false).unwrap(),
            periodic_example(1.5, 0.5).unwrap(),
        ] {
            let g = k.grid(8, 20.0, 0.05).unwrap();
            let d = Discretization::build(&k, &[1.0, 2.0], &g, &SimOptions::default()).unwrap();
            for (k_t, theta) in [(0usize, [1.0, 0.0]), (1, [0.0, 1.0])] {
                let t = d.times[k_t];
                let q = cf_exponent(&k, &LinearCombination::single(1.0, t), &g)
                    .unwrap()
                    .value;
                let e = d.exponent(&theta);
                assert!((e - q).abs() / q < 2e-3, "{} t={t}: {e} vs {q}", k.label);
            }
        }
    }

    #[test]
    fn cell_keys_do_not_depend_on_other_times() {
        let k = periodic_example(1.5, 0.5).unwrap();
        let g = k.grid(2, 10.0, 0.1).unwrap();
        let opts = SimOptions {
            far_window: 100.0,
            growth: 1.1,
        };
        let a = Discretization::build(&k, &[1.0], &g, &opts).unwrap();
        let b = Discretization::build(&k, &[1.0, 3.0], &g, &opts).unwrap();
        let first = a.cells.iter().find(|c| c.lo > 0.0).unwrap();
        assert!(b
            .cells
            .iter()
            .any(|c| c.lo == first.lo && c.key == first.key));
    }

    #[test]
    fn w_paths_match_kernel_paths() {
        let ou = OuParams {
            span: 2.0,
            step: 0.5,
            ..OuParams::default()
        };
        let p = sample_w_paths(&ou, 3, 11).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].len(), 9);
        assert!(sample_w_paths(&OuParams { std: 0.0, ..ou }, 1, 0).is_err());
    }
}
