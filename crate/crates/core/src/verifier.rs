//! Exact and statistical checks of the structural identities: flow axioms, the generation
//! identity `c^{-κ} G(x, cu) = b_c(x) (dμ∘ψ_c/dμ)^{1/α} G(ψ_c(x), u + g_c(x)) + j_c(x)`,
//! self-similarity of CF exponents, full support, and their Monte-Carlo counterparts.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::kernels::{FlowSpec, KernelSpec};
use crate::simulator::{sample_paths_with, SimOptions};
use crate::stable::{cf_exponent, ecf_distance, LinearCombination};

/// Tolerance of the pointwise identities.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance of the quadrature-level self-similarity identity.
pub const SELF_SIMILARITY_TOL: f64 = 1e-4;
/// Tolerance of the empirical characteristic-function comparisons.
pub const ECF_TOL: f64 = 0.03;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub samples: usize,
    /// Where the largest deviation occurred.
    pub worst: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }
}

#[derive(Default)]
struct Worst {
    dev: f64,
    at: String,
    n: usize,
}

impl Worst {
    fn see(&mut self, dev: f64, at: impl FnOnce() -> String) {
        self.n += 1;
        if !(dev <= self.dev) {
            self.dev = if dev.is_nan() { f64::INFINITY } else { dev };
            self.at = at();
        }
    }

    fn merge(mut self, o: Worst) -> Worst {
        self.n += o.n;
        if o.dev > self.dev {
            self.dev = o.dev;
            self.at = o.at;
        }
        self
    }

    fn finish(self, name: &str, tolerance: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            max_deviation: self.dev,
            tolerance,
            samples: self.n,
            worst: self.at,
        }
    }
}

/// Dilations used by default: both sides of 1, lattice and off-lattice values.
pub fn default_c_samples() -> Vec<f64> {
    vec![0.2, 0.5, 0.3f64.exp(), 2.0, std::f64::consts::E, 5.5]
}

/// Group law, identity, cocycle and semi-additivity over all `(c₁, c₂, x)`.
pub fn flow_axioms_check(
    flow: &FlowSpec,
    c_samples: &[f64],
    x_samples: &[f64],
) -> Result<Vec<CheckResult>> {
    if c_samples.is_empty() || x_samples.is_empty() {
        return invalid("flow check needs nonempty c and x samples");
    }
    let (mut group, mut ident, mut cocycle, mut semi) = (
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    );
    for &x in x_samples {
        ident.see(flow.state_dist(flow.psi(1.0, x), x), || format!("x={x}"));
        for &c1 in c_samples {
            for &c2 in c_samples {
                let at = || format!("c1={c1} c2={c2} x={x}");
                let y = flow.psi(c1, x);
                group.see(
                    flow.state_dist(flow.psi(c1 * c2, x), flow.psi(c1, flow.psi(c2, x))),
                    at,
                );
                cocycle.see(
                    (flow.cocycle(c1 * c2, x) - flow.cocycle(c1, x) * flow.cocycle(c2, y)).abs(),
                    at,
                );
                semi.see(
                    (flow.semiadd(c1 * c2, x) - flow.semiadd(c1, x) / c2 - flow.semiadd(c2, y))
                        .abs(),
                    at,
                );
            }
        }
    }
    Ok(vec![
        group.finish("flow group law", EXACT_TOL),
        ident.finish("flow identity", EXACT_TOL),
        cocycle.finish("cocycle", EXACT_TOL),
        semi.finish("semi-additive functional", EXACT_TOL),
    ])
}

/// Largest `|c^{-κ} G(x, cu) - b (RN)^{1/α} G(ψ_c x, u + g) - j|` over x-nodes, u-nodes and `c_samples`.
pub fn generation_identity_check(
    kernel: &KernelSpec,
    flow: &FlowSpec,
    c_samples: &[f64],
    grid: &GridSpec,
) -> Result<CheckResult> {
    if c_samples.is_empty() {
        return invalid("generation check needs at least one c");
    }
    let us = grid.u_nodes();
    let (a, k) = (kernel.alpha, kernel.kappa);
    let w = grid
        .x_nodes
        .par_iter()
        .map(|&(x, _)| {
            let mut w = Worst::default();
            for &c in c_samples {
                let (y, b, g, j) = (
                    flow.psi(c, x),
                    flow.cocycle(c, x),
                    flow.semiadd(c, x),
                    flow.remainder(c, x),
                );
                let rn = flow.radon_nikodym(c, x).powf(1.0 / a);
                let scale = c.powf(-k);
                for &u in &us {
                    let lhs = scale * kernel.eval(x, c * u);
                    let rhs = b * rn * kernel.eval(y, u + g) + j;
                    w.see((lhs - rhs).abs(), || format!("x={x} u={u} c={c}"));
                }
            }
            w
        })
        .reduce(Worst::default, Worst::merge);
    Ok(w.finish(&format!("generation identity ({})", flow.name), EXACT_TOL))
}

/// Largest `|I(G_{c t}) - c^{Hα} I(G_t)| / (c^{Hα} I(G_t))` over `c_samples × combs`.
pub fn self_similarity_check(
    kernel: &KernelSpec,
    c_samples: &[f64],
    combs: &[LinearCombination],
    grid: &GridSpec,
) -> Result<CheckResult> {
    if c_samples.is_empty() || combs.is_empty() {
        return invalid("self-similarity check needs c samples and combinations");
    }
    let mut w = Worst::default();
    for comb in combs {
        let base = cf_exponent(kernel, comb, grid)?.value;
        for &c in c_samples {
            let scaled = if c == 1.0 {
                base
            } else {
                cf_exponent(kernel, &comb.time_scaled(c), grid)?.value
            };
            let want = c.powf(kernel.hurst * kernel.alpha) * base;
            let dev = if want == 0.0 && scaled == 0.0 {
                0.0
            } else {
                (scaled - want).abs() / want.abs()
            };
            w.see(dev, || {
                format!("c={c} theta={:?} t={:?}", comb.theta, comb.times)
            });
        }
    }
    Ok(w.finish("self-similarity", SELF_SIMILARITY_TOL))
}

/// x-nodes where `G_t(x, u) = 0` for every `t` in `t_battery` and every u-node.
pub fn support_check(kernel: &KernelSpec, grid: &GridSpec, t_battery: &[f64]) -> Result<Vec<f64>> {
    if t_battery.is_empty() {
        return invalid("support check needs a nonempty t battery");
    }
    let us = grid.u_nodes();
    Ok(grid
        .x_nodes
        .par_iter()
        .filter(|&&(x, _)| {
            t_battery.iter().all(|&t| {
                us.iter()
                    .all(|&u| kernel.eval(x, t + u) - kernel.eval(x, u) == 0.0)
            })
        })
        .map(|&(x, _)| x)
        .collect())
}

pub const DEFAULT_T_BATTERY: [f64; 5] = [-2.0, -0.5, 0.25, 1.0, 3.0];

/// Settings of the Monte-Carlo checks.
#[derive(Clone, Debug)]
pub struct EmpiricalConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub t: f64,
    pub dilations: Vec<f64>,
    pub shifts: Vec<f64>,
    pub thetas: Vec<f64>,
    pub sim: SimOptions,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        EmpiricalConfig {
            n_paths: 10_000,
            seed: 0,
            t: 1.0,
            dilations: vec![2.0, std::f64::consts::E],
            shifts: vec![0.5, 1.0],
            thetas: vec![0.5, 1.0, 2.0],
            sim: SimOptions::default(),
        }
    }
}

/// Empirical-CF distances between `c^{-H} X(ct)` and `X(t)`, and between `X(t+h) - X(h)` and `X(t)`.
pub fn empirical_checks(
    kernel: &KernelSpec,
    grid: &GridSpec,
    cfg: &EmpiricalConfig,
) -> Result<Vec<CheckResult>> {
    let mut times = vec![0.0, cfg.t];
    times.extend(cfg.dilations.iter().map(|c| c * cfg.t));
    for h in &cfg.shifts {
        times.push(*h);
        times.push(cfg.t + h);
    }
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    let ens = sample_paths_with(kernel, &times, cfg.n_paths, grid, cfg.seed, &cfg.sim)?;
    let idx = |t: f64| ens.time_index(t).expect("time on grid");
    let base = ens.column(idx(cfg.t));
    let mut out = Vec::new();
    for &c in &cfg.dilations {
        let s = c.powf(-kernel.hurst);
        let scaled: Vec<f64> = ens.column(idx(c * cfg.t)).iter().map(|v| v * s).collect();
        let d = ecf_distance(&scaled, &base, &cfg.thetas);
        out.push(CheckResult {
            name: format!("empirical self-similarity c={c:.4}"),
            max_deviation: d,
            tolerance: ECF_TOL,
            samples: cfg.n_paths,
            worst: format!("thetas {:?}", cfg.thetas),
        });
    }
    for &h in &cfg.shifts {
        let (a, b) = (idx(cfg.t + h), idx(h));
        let inc: Vec<f64> = (0..ens.n_paths)
            .map(|p| ens.value(p, a) - ens.value(p, b))
            .collect();
        let d = ecf_distance(&inc, &base, &cfg.thetas);
        out.push(CheckResult {
            name: format!("stationary increments h={h}"),
            max_deviation: d,
            tolerance: ECF_TOL,
            samples: cfg.n_paths,
            worst: format!("thetas {:?}", cfg.thetas),
        });
    }
    Ok(out)
}

/// Named flows for swapping into the generation check.
pub const FLOW_NAMES: [&str; 3] = ["identity", "rotation", "broken-demo"];

pub fn flow_by_name(name: &str) -> Option<FlowSpec> {
    match name {
        "identity" => Some(FlowSpec::identity()),
        "rotation" => Some(FlowSpec::rotation()),
        "broken-demo" => Some(FlowSpec::broken_demo()),
        _ => None,
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub kernel: String,
    pub checks: Vec<CheckResult>,
    pub dead_nodes: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
            && self.dead_nodes.as_ref().map_or(true, |d| d.is_empty())
    }

    pub fn write_text<W: Write>(&self, mut out: W, config: &[(String, String)]) -> Result<()> {
        for (k, v) in config {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "kernel: {}", self.kernel)?;
        for c in &self.checks {
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{verdict} {}: max deviation {:.3e} (tolerance {:.0e}, {} samples) at {}",
                c.name, c.max_deviation, c.tolerance, c.samples, c.worst
            )?;
        }
        if let Some(dead) = &self.dead_nodes {
            let verdict = if dead.is_empty() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{verdict} support: {} dead node(s) {:?}",
                dead.len(),
                dead
            )?;
        }
        for n in &self.notes {
            writeln!(out, "note: {n}")?;
        }
        writeln!(
            out,
            "overall: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        Ok(())
    }

    /// One row per check: `check,max_deviation,tolerance,samples,passed,worst`.
    pub fn write_csv<W: Write>(&self, mut out: W, config: &[(String, String)]) -> Result<()> {
        for (k, v) in config {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "check",
            "max_deviation",
            "tolerance",
            "samples",
            "passed",
            "worst",
        ])?;
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                format!("{:e}", c.max_deviation),
                format!("{:e}", c.tolerance),
                c.samples.to_string(),
                c.passed().to_string(),
                c.worst.clone(),
            ])?;
        }
        if let Some(dead) = &self.dead_nodes {
            let list: Vec<String> = dead.iter().map(|x| x.to_string()).collect();
            w.write_record([
                "support".into(),
                dead.len().to_string(),
                "1".into(),
                String::new(),
                dead.is_empty().to_string(),
                list.join(" "),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        concatenate, mixed_lfsm, mixed_lfsm_const, periodic_example, zero_kernel,
    };

    fn xs() -> Vec<f64> {
        (0..16).map(|i| (i as f64 + 0.5) / 16.0).collect()
    }

    #[test]
    fn identity_and_rotation_satisfy_axioms() {
        for f in [FlowSpec::identity(), FlowSpec::rotation()] {
            let r = flow_axioms_check(&f, &default_c_samples(), &xs()).unwrap();
            assert!(r.iter().all(|c| c.passed()), "{r:?}");
        }
    }

    #[test]
    fn broken_flow_fails_group_law() {
        let r = flow_axioms_check(&FlowSpec::broken_demo(), &default_c_samples(), &xs()).unwrap();
        assert!(r[0].max_deviation > 1e-2, "{r:?}");
        assert!(r[1].passed());
    }

    #[test]
    fn built_in_flows_generate_their_kernels() {
        let p = periodic_example(1.5, 0.5).unwrap();
        let g = p.grid(16, 10.0, 0.1).unwrap();
        let r = generation_identity_check(&p, p.flow().unwrap(), &default_c_samples(), &g).unwrap();
        assert!(r.passed() && r.samples == 16 * 200 * 6, "{r:?}");
        for h in [0.5, 2.0 / 3.0] {
            let l = mixed_lfsm_const(1.5, h, 1.0, 2.0, false).unwrap();
            let r =
                generation_identity_check(&l, l.flow().unwrap(), &default_c_samples(), &g).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn mismatched_flows_are_detected() {
        let l = mixed_lfsm(1.5, 0.5, |x| 1.0 + x, |x| 2.0 - x, false).unwrap();
        let g = l.grid(16, 10.0, 0.1).unwrap();
        let r =
            generation_identity_check(&l, &FlowSpec::rotation(), &default_c_samples(), &g).unwrap();
        assert!(r.max_deviation > 1e-2, "{r:?}");
        let p = periodic_example(1.5, 0.5).unwrap();
        let r = generation_identity_check(&p, &FlowSpec::broken_demo(), &default_c_samples(), &g)
            .unwrap();
        assert!(r.max_deviation > 1e-2, "{r:?}");
    }

    #[test]
    fn self_similarity_of_lfsm() {
        let l = mixed_lfsm_const(1.5, 0.5, 1.0, 2.0, false).unwrap();
        let g = l.grid(1, 20.0, 0.05).unwrap();
        let r = self_similarity_check(&l, &[1.0, 2.0], &[LinearCombination::single(1.0, 1.0)], &g)
            .unwrap();
        assert!(r.passed(), "{r:?}");
        let one =
            self_similarity_check(&l, &[1.0], &[LinearCombination::single(1.0, 1.0)], &g).unwrap();
        assert_eq!(one.max_deviation, 0.0);
    }

    #[test]
    fn support_flags_exactly_the_dead_half() {
        let p = periodic_example(1.5, 0.5).unwrap();
        let g = p.grid(16, 10.0, 0.1).unwrap();
        assert!(support_check(&p, &g, &DEFAULT_T_BATTERY)
            .unwrap()
            .is_empty());
        let z = zero_kernel(1.5, 0.5).unwrap();
        let padded = concatenate("padded", &p, &z).unwrap();
        let gp = padded.grid(16, 10.0, 0.1).unwrap();
        let dead = support_check(&padded, &gp, &DEFAULT_T_BATTERY).unwrap();
        let want: Vec<f64> = gp
            .x_nodes
            .iter()
            .map(|n| n.0)
            .filter(|x| *x >= 1.0)
            .collect();
        assert_eq!(dead, want);
        assert_eq!(support_check(&z, &g, &DEFAULT_T_BATTERY).unwrap().len(), 16);
    }

    #[test]
    fn report_formats() {
        let mut rep = VerifyReport {
            kernel: "k".into(),
            ..Default::default()
        };
        rep.checks =
            flow_axioms_check(&FlowSpec::broken_demo(), &default_c_samples(), &xs()).unwrap();
        rep.dead_nodes = Some(vec![]);
        let mut text = Vec::new();
        rep.write_text(&mut text, &[]).unwrap();
        let text = String::from_utf8(text).unwrap();
        assert!(text.contains("FAIL flow group law") && text.contains("overall: FAIL"));
        let mut csv = Vec::new();
        rep.write_csv(&mut csv, &[]).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 4 + 1);
    }
}
