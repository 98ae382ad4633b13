//! Least-squares fit of `u ↦ G(x, u)` to the fixed-point family
//! `d (u+f)₊^κ + h (u+f)₋^κ + g` (or `d ln|u+f| + h 1_{u+f>0} + g` when `κ = 0`).

use crate::grid::GridSpec;
use crate::kernels::{KernelSpec, KAPPA_ZERO_TOL};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FixedFit {
    pub d: f64,
    pub h: f64,
    pub g: f64,
    pub shift: f64,
    /// `‖y - fit‖ / ‖y‖` on the u-grid, zero when `y ≡ 0`.
    pub residual: f64,
}

/// Basis pair evaluated at `v = u + f`.
#[inline]
fn basis(v: f64, kappa: f64, log_branch: bool) -> (f64, f64) {
    if log_branch {
        (v.abs().ln(), if v > 0.0 { 1.0 } else { 0.0 })
    } else if v > 0.0 {
        (v.powf(kappa), 0.0)
    } else {
        (0.0, (-v).powf(kappa))
    }
}

/// Solve the symmetric 3x3 system `m β = r`, dropping directions with negligible pivots.
fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> [f64; 3] {
    let scale = m[0][0]
        .abs()
        .max(m[1][1].abs())
        .max(m[2][2].abs())
        .max(f64::MIN_POSITIVE);
    let mut a = m;
    let mut b = r;
    let mut active = [true; 3];
    for k in 0..3 {
        if a[k][k].abs() <= 1e-13 * scale {
            active[k] = false;
            continue;
        }
        for i in (k + 1)..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        if !active[k] {
            continue;
        }
        let mut s = b[k];
        for j in (k + 1)..3 {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    x
}

struct Design<'a> {
    a: &'a [f64],
    b: &'a [f64],
}

fn direct_fit(y: &[f64], d: &Design, ynorm: f64) -> ([f64; 3], f64) {
    let n = y.len();
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for j in 0..n {
        let row = [d.a[j], d.b[j], 1.0];
        for p in 0..3 {
            r[p] += row[p] * y[j];
            for q in 0..3 {
                m[p][q] += row[p] * row[q];
            }
        }
    }
    let mut beta = solve3(m, r);
    // one step of iterative refinement
    let mut rr = [0.0; 3];
    for j in 0..n {
        let e = y[j] - beta[0] * d.a[j] - beta[1] * d.b[j] - beta[2];
        rr[0] += d.a[j] * e;
        rr[1] += d.b[j] * e;
        rr[2] += e;
    }
    let delta = solve3(m, rr);
    for p in 0..3 {
        beta[p] += delta[p];
    }
    let mut ss = 0.0;
    for j in 0..n {
        let e = y[j] - beta[0] * d.a[j] - beta[1] * d.b[j] - beta[2];
        ss += e * e;
    }
    (beta, ss.sqrt() / ynorm)
}

/// Scan shifts `f = -U + kΔ` and return the best fit.
pub fn fixed_fit(kernel: &KernelSpec, x: f64, grid: &GridSpec) -> FixedFit {
    let us = grid.u_nodes();
    let y: Vec<f64> = us.iter().map(|&u| kernel.eval(x, u)).collect();
    fixed_fit_values(&y, grid, kernel.kappa)
}

/// Same as [`fixed_fit`] for precomputed values `y_j = G(x, u_j)` on the grid's u-nodes.
pub fn fixed_fit_values(y: &[f64], grid: &GridSpec, kappa: f64) -> FixedFit {
    let n = y.len();
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ynorm == 0.0 {
        return FixedFit::default();
    }
    if !ynorm.is_finite() {
        return FixedFit {
            residual: f64::INFINITY,
            ..Default::default()
        };
    }
    let log_branch = kappa.abs() < KAPPA_ZERO_TOL;
    let (u0, du) = (grid.u_window, grid.u_step);
    // v(j, k) = u_j + f_k = (j + k + 1/2)Δ - 2U depends on m = j + k only.
    let n_shift = n + 1;
    let n_m = n + n_shift;
    let mut ta = vec![0.0; n_m];
    let mut tb = vec![0.0; n_m];
    for m in 0..n_m {
        let v = (m as f64 + 0.5) * du - 2.0 * u0;
        let (a, b) = basis(v, kappa, log_branch);
        ta[m] = a;
        tb[m] = b;
    }
    let prefix = |f: &dyn Fn(usize) -> f64| {
        let mut p = vec![0.0; n_m + 1];
        for m in 0..n_m {
            p[m + 1] = p[m] + f(m);
        }
        p
    };
    let pa = prefix(&|m| ta[m]);
    let pb = prefix(&|m| tb[m]);
    let paa = prefix(&|m| ta[m] * ta[m]);
    let pbb = prefix(&|m| tb[m] * tb[m]);
    let pab = prefix(&|m| ta[m] * tb[m]);
    let sy: f64 = y.iter().sum();
    let yy = ynorm * ynorm;

    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(n_shift);
    for k in 0..n_shift {
        let seg = |p: &[f64]| p[k + n] - p[k];
        let m = [
            [seg(&paa), seg(&pab), seg(&pa)],
            [seg(&pab), seg(&pbb), seg(&pb)],
            [seg(&pa), seg(&pb), n as f64],
        ];
        let mut ya = 0.0;
        let mut yb = 0.0;
        let (sa, sb) = (&ta[k..k + n], &tb[k..k + n]);
        for j in 0..n {
            ya += y[j] * sa[j];
            yb += y[j] * sb[j];
        }
        let r = [ya, yb, sy];
        let beta = solve3(m, r);
        let explained = beta[0] * r[0] + beta[1] * r[1] + beta[2] * r[2];
        let ss = (yy - explained).max(0.0);
        scored.push((ss, k));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best = FixedFit {
        residual: f64::INFINITY,
        ..Default::default()
    };
    for &(_, k) in scored.iter().take(6) {
        let d = Design {
            a: &ta[k..k + n],
            b: &tb[k..k + n],
        };
        let (beta, res) = direct_fit(y, &d, ynorm);
        if res < best.residual {
            best = FixedFit {
                d: beta[0],
                h: beta[1],
                g: beta[2],
                shift: -u0 + k as f64 * du,
                residual: res,
            };
        }
    }
    best
}
