use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use fsm_core::classifier::{classify_kernel, ClassificationReport, Label};
use fsm_core::decomposer::{additivity_check, decompose, random_combinations, write_summary_csv};
use fsm_core::kernels::{build, KernelSpec};
use fsm_core::simulator::{parse_time_grid, sample_paths_with, write_targets_csv, SimOptions};
use fsm_core::verifier::{
    default_c_samples, empirical_checks, flow_axioms_check, flow_by_name,
    generation_identity_check, self_similarity_check, support_check, EmpiricalConfig, VerifyReport,
    DEFAULT_T_BATTERY, FLOW_NAMES,
};
use fsm_core::{FsmError, GridSpec, LinearCombination, Result};

use crate::args::{ClassifyArgs, DecomposeArgs, GridArgs, KernelArgs, SimulateArgs, VerifyArgs};

pub const OK: u8 = 0;
pub const WARN: u8 = 2;

type Config = [(String, String)];

fn setup(
    kernel: &KernelArgs,
    grid: &GridArgs,
    seed: u64,
    default_nodes: usize,
) -> Result<(KernelSpec, GridSpec)> {
    let k = build(kernel.name(), &kernel.params(seed))?;
    let g = grid.grid(&k, default_nodes)?;
    Ok((k, g))
}

/// The echoed configuration with the resolved node count filled in.
fn resolved(config: &Config, g: &GridSpec) -> Vec<(String, String)> {
    let mut out = config.to_vec();
    if !out.iter().any(|(k, _)| k == "x-nodes") {
        out.push(("x-nodes".into(), g.x_nodes.len().to_string()));
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

pub fn classify(a: &ClassifyArgs, config: &Config) -> Result<u8> {
    let (k, g) = setup(&a.kernel, &a.grid, a.common.seed, 64)?;
    let config = &resolved(config, &g);
    let mut report = classify_kernel(&k, &g, &a.thresholds.thresholds())?;
    report.config = config.to_vec();
    report.write_files(&a.out)?;
    println!("kernel {}: {} nodes", report.kernel, report.points.len());
    for l in Label::ALL {
        println!("  {:<25} {:6.2}%", l.as_str(), 100.0 * report.fraction(l));
    }
    let c = report.containment();
    println!(
        "containment: {} fixed without witness, {} witness not divergent, {} contradictions",
        c.fixed_without_witness, c.witness_not_divergent, c.contradictions
    );
    let warned = report
        .points
        .iter()
        .filter(|p| !p.warnings.is_empty())
        .count();
    println!(
        "wrote {} and {}",
        a.out.display(),
        fsm_core::classifier::summary_path(&a.out).display()
    );
    if warned > 0 {
        eprintln!("warning: {warned} node(s) carry warnings; see the report");
        return Ok(WARN);
    }
    Ok(OK)
}

pub fn decompose_cmd(a: &DecomposeArgs, config: &Config) -> Result<u8> {
    if !a.report.is_file() {
        return Err(FsmError::InvalidArgument(format!(
            "report file {} not found",
            a.report.display()
        )));
    }
    let (_, rows) = ClassificationReport::read_csv(&a.report)?;
    let labels = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Label::parse(&r.label)
                .map(|l| (r.x, l))
                .ok_or_else(|| FsmError::Parse {
                    line: i + 1,
                    message: format!("unknown label '{}'", r.label),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let (k, g) = setup(&a.kernel, &a.grid, a.common.seed, labels.len())?;
    let config = &resolved(config, &g);
    let dec = decompose(&k, &g, &labels)?;
    let combs = if a.check_additivity > 0 {
        random_combinations(a.check_additivity, a.common.seed)
    } else {
        vec![LinearCombination::single(1.0, 1.0)]
    };
    write_summary_csv(&dec, &combs, &g, config, create(&a.out)?)?;
    for (label, c) in &dec.components {
        if c.is_empty() {
            println!("component {}: empty", label.as_str());
        } else {
            println!("component {}: {} nodes", label.as_str(), c.nodes.len());
        }
    }
    let mut code = OK;
    if a.check_additivity > 0 {
        let rep = additivity_check(&dec, &combs, &g, a.additivity_tol)?;
        println!(
            "additivity: max deviation {:.3e} over {} combinations (tolerance {:.0e})",
            rep.max_deviation,
            rep.rows.len(),
            rep.tolerance
        );
        if !rep.passed() {
            eprintln!(
                "additivity failed on {} combination(s)",
                rep.failures().len()
            );
            code = WARN;
        }
    }
    println!("wrote {}", a.out.display());
    Ok(code)
}

pub fn simulate(a: &SimulateArgs, config: &Config) -> Result<u8> {
    if a.paths == 0 {
        return Err(FsmError::InvalidArgument(
            "--paths must be at least 1".into(),
        ));
    }
    let times = parse_time_grid(&a.times)?;
    let (k, g) = setup(&a.kernel, &a.grid, a.common.seed, 8)?;
    let config = &resolved(config, &g);
    let opts = SimOptions {
        far_window: a.far_window,
        growth: a.growth,
    };
    let ens = sample_paths_with(&k, &times, a.paths, &g, a.common.seed, &opts)?;
    ens.write_csv(create(&a.out)?, config)?;
    let targets = ens.cf_targets(&k)?;
    let cf = sidecar(&a.out, "cf.csv");
    write_targets_csv(&targets, create(&cf)?, config)?;
    if let Some(bin) = &a.binary {
        ens.write_binary(create(bin)?)?;
    }
    println!(
        "{} paths at {} times over {} cells",
        ens.n_paths,
        ens.n_times(),
        ens.cells
    );
    println!("wrote {} and {}", a.out.display(), cf.display());
    Ok(OK)
}

pub fn verify(a: &VerifyArgs, config: &Config) -> Result<u8> {
    let (k, g) = setup(&a.kernel, &a.grid, a.common.seed, 64)?;
    let config = &resolved(config, &g);
    let any = a.flow_axioms || a.generation || a.self_similarity || a.support;
    let all = a.all || !any;
    let flow = match &a.flow {
        Some(name) => Some(flow_by_name(name).ok_or_else(|| {
            FsmError::InvalidArgument(format!(
                "unknown flow '{name}'; available: {}",
                FLOW_NAMES.join(", ")
            ))
        })?),
        None => k.flow().cloned(),
    };
    let cs = default_c_samples();
    let mut report = VerifyReport {
        kernel: k.label.clone(),
        ..VerifyReport::default()
    };
    if all || a.flow_axioms || a.generation {
        match &flow {
            Some(f) => {
                if all || a.flow_axioms {
                    let xs: Vec<f64> = g.x_nodes.iter().map(|(x, _)| *x).collect();
                    report.checks.extend(flow_axioms_check(f, &cs, &xs)?);
                }
                if all || a.generation {
                    report
                        .checks
                        .push(generation_identity_check(&k, f, &cs, &g)?);
                }
            }
            None => report.notes.push(format!(
                "kernel {} carries no flow; flow checks skipped",
                k.label
            )),
        }
    }
    if all || a.self_similarity {
        let mut combs = vec![LinearCombination::single(1.0, 1.0)];
        combs.extend(random_combinations(3, a.common.seed));
        let dilations = [2.0, std::f64::consts::E, 0.5];
        report
            .checks
            .push(self_similarity_check(&k, &dilations, &combs, &g)?);
    }
    if all || a.support {
        report.dead_nodes = Some(support_check(&k, &g, &DEFAULT_T_BATTERY)?);
    }
    if a.monte_carlo > 0 {
        let cfg = EmpiricalConfig {
            n_paths: a.monte_carlo,
            seed: a.common.seed,
            ..EmpiricalConfig::default()
        };
        let mc_grid = if a.grid.x_nodes.is_some() {
            g.clone()
        } else {
            a.grid.grid(&k, 8)?
        };
        report.checks.extend(empirical_checks(&k, &mc_grid, &cfg)?);
    }
    report.write_text(create(&a.out)?, config)?;
    let csv = sidecar(&a.out, "csv");
    report.write_csv(create(&csv)?, config)?;
    report.write_text(std::io::stdout().lock(), &[])?;
    let failed: BTreeSet<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    if !report.passed() {
        eprintln!(
            "failed: {}",
            failed.into_iter().collect::<Vec<_>>().join(", ")
        );
        return Ok(WARN);
    }
    Ok(OK)
}
