//! Search for a periodicity witness `G(x, cu + g) = b G(x, u + g) + d` with `c ≠ 1`.

use crate::grid::GridSpec;
use crate::kernels::KernelSpec;
use crate::numeric::{golden_min, logspace};

/// Residuals at or below this level are treated as exact when breaking ties.
pub const EXACT_RESIDUAL: f64 = 1e-12;

const MIN_SLOPE: f64 = 1e-10;
const SCREEN_NODES: usize = 128;
const SCREEN_KEEP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodCandidate {
    pub c: f64,
    pub g: f64,
    pub b: f64,
    pub d: f64,
    /// `‖y - b z - d‖ / ‖y - ȳ‖` with `y_j = G(x, c u_j + g)` and `z_j = G(x, u_j + g)`.
    pub residual: f64,
}

impl PeriodCandidate {
    fn worse_than(&self, other: &PeriodCandidate) -> bool {
        let (a_exact, b_exact) = (
            self.residual <= EXACT_RESIDUAL,
            other.residual <= EXACT_RESIDUAL,
        );
        if a_exact && b_exact {
            let key = |p: &PeriodCandidate| (p.c < 1.0, p.c.ln().abs());
            let (ka, kb) = (key(self), key(other));
            return ka.0 > kb.0 || (ka.0 == kb.0 && ka.1 > kb.1);
        }
        if a_exact != b_exact {
            return b_exact;
        }
        self.residual > other.residual
    }
}

/// Candidate grids for `ln c` and `g`.
#[derive(Clone, Debug)]
pub struct SearchGrid {
    pub ln_c: Vec<f64>,
    pub g: Vec<f64>,
}

impl SearchGrid {
    /// `±` 64 log-spaced values of `|ln c|` in `[0.05, 4]` plus `±1`, `±ln 2`, minus `|ln c| < exclusion`;
    /// `g ∈ {0} ∪ ±{Δ, 2Δ, …, U/4}`.
    pub fn standard(grid: &GridSpec, exclusion: f64) -> Self {
        let mut mags = logspace(0.05, 4.0, 64);
        mags.push(1.0);
        mags.push(std::f64::consts::LN_2);
        mags.retain(|m| *m >= exclusion);
        mags.sort_by(|a, b| a.total_cmp(b));
        mags.dedup();
        let mut ln_c: Vec<f64> = mags.iter().map(|m| -m).rev().collect();
        ln_c.extend(mags.iter().copied());
        SearchGrid {
            ln_c,
            g: g_grid(grid),
        }
    }

    pub fn with_ln_c(grid: &GridSpec, ln_c: Vec<f64>) -> Self {
        SearchGrid {
            ln_c,
            g: g_grid(grid),
        }
    }
}

fn g_grid(grid: &GridSpec) -> Vec<f64> {
    let n = (grid.u_window / 4.0 / grid.u_step).floor() as usize;
    let mut g = vec![0.0];
    for k in 1..=n {
        let v = k as f64 * grid.u_step;
        g.push(v);
        g.push(-v);
    }
    g
}

/// Regress `y` on `z` (slope and intercept) and return `(b, d, residual)`.
fn regress(y: &[f64], z: &[f64]) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let ym = y.iter().sum::<f64>() / n;
    let zm = z.iter().sum::<f64>() / n;
    let (mut szz, mut szy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(z) {
        let (dy, dz) = (a - ym, b - zm);
        szz += dz * dz;
        szy += dz * dy;
        syy += dy * dy;
    }
    if !(syy.is_finite() && szz.is_finite()) {
        return (1.0, 0.0, f64::INFINITY);
    }
    if szz == 0.0 {
        // z constant: only a shift can be fitted
        let res = if syy == 0.0 { 0.0 } else { 1.0 };
        return (1.0, ym - zm, res);
    }
    let b = szy / szz;
    let d = ym - b * zm;
    if syy == 0.0 {
        return (
            b,
            d,
            if b.abs() < MIN_SLOPE {
                f64::INFINITY
            } else {
                0.0
            },
        );
    }
    let mut ss = 0.0;
    for (a, c) in y.iter().zip(z) {
        let e = a - b * c - d;
        ss += e * e;
    }
    let res = (ss / syy).sqrt();
    if b.abs() < MIN_SLOPE {
        return (b, d, f64::INFINITY);
    }
    (b, d, res)
}

struct Evaluator<'a> {
    kernel: &'a KernelSpec,
    x: f64,
    us: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(kernel: &'a KernelSpec, x: f64, us: Vec<f64>) -> Self {
        let n = us.len();
        Evaluator {
            kernel,
            x,
            us,
            y: vec![0.0; n],
            z: vec![0.0; n],
        }
    }

    fn fill_z(&mut self, g: f64) {
        for (z, u) in self.z.iter_mut().zip(&self.us) {
            *z = self.kernel.eval(self.x, u + g);
        }
    }

    fn candidate(&mut self, c: f64, g: f64) -> PeriodCandidate {
        for (y, u) in self.y.iter_mut().zip(&self.us) {
            *y = self.kernel.eval(self.x, c * u + g);
        }
        let (b, d, residual) = regress(&self.y, &self.z);
        PeriodCandidate {
            c,
            g,
            b,
            d,
            residual,
        }
    }

    fn full(&mut self, c: f64, g: f64) -> PeriodCandidate {
        self.fill_z(g);
        self.candidate(c, g)
    }
}

fn better(best: &mut Option<PeriodCandidate>, cand: PeriodCandidate) {
    if !cand.residual.is_finite() {
        return;
    }
    match best {
        Some(b) if !b.worse_than(&cand) => {}
        _ => *best = Some(cand),
    }
}

/// Best candidate over the search grid; a witness when its residual is below the caller's tolerance.
///
/// All `c` are first tried at `g = 0` on the full u-grid. If none is exact, every `(c, g)` pair
/// is screened on a subsample of the u-grid, the best few are re-evaluated on the full grid and
/// `g` is refined by golden-section search around the winner.
pub fn periodic_search(
    kernel: &KernelSpec,
    x: f64,
    grid: &GridSpec,
    search: &SearchGrid,
) -> Option<PeriodCandidate> {
    let us = grid.u_nodes();
    let mut full = Evaluator::new(kernel, x, us.clone());
    let mut best: Option<PeriodCandidate> = None;
    full.fill_z(0.0);
    for &lc in &search.ln_c {
        let cand = full.candidate(lc.exp(), 0.0);
        better(&mut best, cand);
    }
    if matches!(best, Some(b) if b.residual <= EXACT_RESIDUAL) {
        return best;
    }

    let stride = (us.len() / SCREEN_NODES).max(1);
    let sub: Vec<f64> = us.iter().step_by(stride).copied().collect();
    let mut screen = Evaluator::new(kernel, x, sub);
    let mut ranked: Vec<(f64, f64, f64)> = Vec::new();
    for &g in search.g.iter().filter(|g| **g != 0.0) {
        screen.fill_z(g);
        for &lc in &search.ln_c {
            let c = lc.exp();
            let r = screen.candidate(c, g).residual;
            if r.is_finite() {
                ranked.push((r, c, g));
            }
        }
    }
    ranked.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    for &(_, c, g) in ranked.iter().take(SCREEN_KEEP) {
        let cand = full.full(c, g);
        better(&mut best, cand);
    }

    if let Some(b) = best {
        if b.residual > EXACT_RESIDUAL {
            let step = grid.u_step;
            let c = b.c;
            let (g, r) = golden_min(|g| full.full(c, g).residual, b.g - step, b.g + step, 40);
            if r < b.residual {
                better(&mut best, full.full(c, g));
            }
        }
    }
    best
}

/// Whether a witness below `tol` exists in every band `|ln c| = 2^{-m}`, `m = 1..=bands`.
pub fn limit_fixed(kernel: &KernelSpec, x: f64, grid: &GridSpec, bands: usize, tol: f64) -> bool {
    for m in 1..=bands {
        let l = 0.5f64.powi(m as i32);
        let search = SearchGrid::with_ln_c(grid, vec![-l, l]);
        match periodic_search(kernel, x, grid, &search) {
            Some(c) if c.residual < tol => {}
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dissipative_synthetic, mixed_lfsm_const, periodic_example};
    use std::f64::consts::E;

    fn grid() -> GridSpec {
        GridSpec::new(vec![(0.5, 1.0)], 20.0, 0.05).unwrap()
    }

    #[test]
    fn periodic_witness_is_e() {
        let k = periodic_example(1.5, 0.5).unwrap();
        let g = grid();
        let w = periodic_search(&k, 0.3, &g, &SearchGrid::standard(&g, 0.05)).unwrap();
        assert!(w.residual < 1e-12, "{w:?}");
        assert!((w.c - E).abs() < 1e-6, "{w:?}");
        assert!((w.b - E.powf(k.kappa)).abs() < 1e-6, "{w:?}");
        assert!(!limit_fixed(&k, 0.3, &g, 6, 1e-6));
    }

    #[test]
    fn lfsm_has_witnesses_everywhere() {
        let k = mixed_lfsm_const(1.5, 0.5, 1.0, 2.0, false).unwrap();
        let g = grid();
        let w = periodic_search(&k, 0.5, &g, &SearchGrid::standard(&g, 0.05)).unwrap();
        assert!(w.residual < 1e-12 && w.c > 1.0);
        assert!((w.b - w.c.powf(k.kappa)).abs() < 1e-9);
        assert!(limit_fixed(&k, 0.5, &g, 6, 1e-6));
    }

    #[test]
    fn exponential_has_no_witness() {
        let k = dissipative_synthetic(1.5, 0.5).unwrap();
        let g = grid();
        let w = periodic_search(&k, 0.5, &g, &SearchGrid::standard(&g, 0.05)).unwrap();
        assert!(w.residual > 1e-3, "{w:?}");
    }

    #[test]
    fn exclusion_removes_small_dilations() {
        let g = grid();
        let s = SearchGrid::standard(&g, 0.5);
        assert!(s.ln_c.iter().all(|l| l.abs() >= 0.5));
        assert!(s.ln_c.contains(&1.0) && s.ln_c.contains(&-1.0));
        assert_eq!(s.g.len(), 2 * 100 + 1);
    }

    #[test]
    fn regression_recovers_affine_map() {
        let z: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = z.iter().map(|v| 2.0 * v - 0.5).collect();
        let (b, d, r) = regress(&y, &z);
        assert!((b - 2.0).abs() < 1e-12 && (d + 0.5).abs() < 1e-12 && r < 1e-12);
        let zero = vec![0.0; 50];
        assert_eq!(regress(&zero, &zero), (1.0, 0.0, 0.0));
    }
}
