//! Four-part decomposition of a kernel along per-node labels, with α-norm additivity checks.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::classifier::{ClassificationReport, Label};
use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::kernels::KernelSpec;
use crate::rng::derived_rng;
use crate::stable::{alpha_norm, cf_exponent, LinearCombination};

#[derive(Clone)]
pub struct Component {
    pub label: Label,
    /// Nodes carrying this label and positive base measure.
    pub nodes: Vec<f64>,
    pub kernel: KernelSpec,
}

impl Component {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone)]
pub struct Decomposition {
    pub source: KernelSpec,
    pub components: BTreeMap<Label, Component>,
}

/// Split `kernel` by the per-node `labels`, which must list the x-nodes of `grid` in order.
pub fn decompose(
    kernel: &KernelSpec,
    grid: &GridSpec,
    labels: &[(f64, Label)],
) -> Result<Decomposition> {
    if labels.len() != grid.x_nodes.len() {
        return invalid(format!(
            "report has {} nodes, grid has {}",
            labels.len(),
            grid.x_nodes.len()
        ));
    }
    for (i, ((x, _), (gx, _))) in labels.iter().zip(&grid.x_nodes).enumerate() {
        if (x - gx).abs() > 1e-12 * gx.abs().max(1.0) {
            return invalid(format!("report node {i} is x = {x}, grid node is {gx}"));
        }
    }
    let mut components = BTreeMap::new();
    for label in Label::ALL {
        let nodes: Vec<f64> = labels
            .iter()
            .zip(&grid.x_nodes)
            .filter(|((_, l), (gx, w))| *l == label && *w * kernel.density(*gx) > 0.0)
            .map(|(_, (gx, _))| *gx)
            .collect();
        let name = format!("{}[{}]", kernel.label, label.as_str());
        let restricted = kernel.restrict_to_nodes(name, &nodes);
        components.insert(
            label,
            Component {
                label,
                nodes,
                kernel: restricted,
            },
        );
    }
    Ok(Decomposition {
        source: kernel.clone(),
        components,
    })
}

pub fn decompose_report(
    kernel: &KernelSpec,
    grid: &GridSpec,
    report: &ClassificationReport,
) -> Result<Decomposition> {
    decompose(kernel, grid, &report.labels())
}

/// `σ^α` of each component for one combination; empty components contribute zero.
pub fn component_scales(
    dec: &Decomposition,
    comb: &LinearCombination,
    grid: &GridSpec,
) -> Result<BTreeMap<Label, f64>> {
    let mut out = BTreeMap::new();
    for (label, c) in &dec.components {
        let v = if c.is_empty() {
            0.0
        } else {
            cf_exponent(&c.kernel, comb, grid)?.value
        };
        out.insert(*label, v);
    }
    Ok(out)
}

/// `Σ_i θ_i X(t_i)` with 1 to 3 terms, `θ ∈ [-2, 2]` and `t ∈ [-3, 3] ∖ {0}`.
pub fn random_combinations(n: usize, seed: u64) -> Vec<LinearCombination> {
    let mut rng = derived_rng(seed, "additivity", 0);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let theta = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let times = (0..k)
                .map(|_| {
                    let t: f64 = rng.gen_range(0.1..3.0);
                    if rng.gen::<bool>() {
                        -t
                    } else {
                        t
                    }
                })
                .collect();
            LinearCombination { theta, times }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct AdditivityRow {
    pub comb: LinearCombination,
    pub total: f64,
    pub components: BTreeMap<Label, f64>,
    /// `|Σ components - total| / total`, zero when everything vanishes.
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub rows: Vec<AdditivityRow>,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl AdditivityReport {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }

    pub fn failures(&self) -> Vec<&AdditivityRow> {
        self.rows
            .iter()
            .filter(|r| !(r.deviation < self.tolerance))
            .collect()
    }
}

pub fn additivity_check(
    dec: &Decomposition,
    combs: &[LinearCombination],
    grid: &GridSpec,
    tolerance: f64,
) -> Result<AdditivityReport> {
    if combs.is_empty() {
        return invalid("additivity check needs at least one combination");
    }
    let rows: Vec<AdditivityRow> = combs
        .par_iter()
        .map(|comb| {
            let total = cf_exponent(&dec.source, comb, grid)?.value;
            let components = component_scales(dec, comb, grid)?;
            let sum: f64 = components.values().sum();
            let deviation = if total == 0.0 && sum == 0.0 {
                0.0
            } else {
                (sum - total).abs() / total.abs()
            };
            Ok(AdditivityRow {
                comb: comb.clone(),
                total,
                components,
                deviation,
            })
        })
        .collect::<Result<_>>()?;
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(AdditivityReport {
        rows,
        max_deviation,
        tolerance,
    })
}

/// CSV with columns `label,node_count,alpha_norm,sigma_alpha_1,…`; `alpha_norm` is that of `G_1`.
pub fn write_summary_csv<W: Write>(
    dec: &Decomposition,
    combs: &[LinearCombination],
    grid: &GridSpec,
    config: &[(String, String)],
    mut out: W,
) -> Result<()> {
    for (k, v) in config {
        writeln!(out, "# {k} = {v}")?;
    }
    for (i, c) in combs.iter().enumerate() {
        writeln!(
            out,
            "# combination {} = theta {:?} times {:?}",
            i + 1,
            c.theta,
            c.times
        )?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "label".to_string(),
        "node_count".into(),
        "alpha_norm".into(),
    ];
    header.extend((1..=combs.len()).map(|i| format!("sigma_alpha_{i}")));
    w.write_record(&header)?;
    for (label, c) in &dec.components {
        let norm = if c.is_empty() {
            0.0
        } else {
            alpha_norm(&c.kernel.increment(1.0), c.kernel.alpha, grid)?.value
        };
        let mut rec = vec![
            label.as_str().to_string(),
            c.nodes.len().to_string(),
            format!("{norm:e}"),
        ];
        for comb in combs {
            let v = if c.is_empty() {
                0.0
            } else {
                cf_exponent(&c.kernel, comb, grid)?.value
            };
            rec.push(format!("{v:e}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
