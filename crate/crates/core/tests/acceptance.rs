//! Acceptance suite: one PASS/FAIL line per criterion, with its measured quantities and wall time.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use fsm_core::classifier::{classify_kernel, ClassificationReport, HopfVerdict, Label, Thresholds};
use fsm_core::decomposer::{additivity_check, decompose_report, random_combinations};
use fsm_core::kernels::{
    concatenate, dissipative_synthetic, fourth_kind, mixed_lfsm, mixed_lfsm_const,
    periodic_example, OuParams,
};
use fsm_core::simulator::sample_paths;
use fsm_core::stable::{ecf_sup_error, sample_sas};
use fsm_core::verifier::{
    default_c_samples, empirical_checks, flow_axioms_check, generation_identity_check,
    self_similarity_check, EmpiricalConfig, ECF_TOL, EXACT_TOL, SELF_SIMILARITY_TOL,
};
use fsm_core::{FlowSpec, GridSpec, KernelSpec, LinearCombination, StableParams};

const ALPHA: f64 = 1.5;
const HURST: f64 = 0.5;
const X_NODES: usize = 64;
const U_WINDOW: f64 = 50.0;
const U_STEP: f64 = 0.05;

const LABEL_SHARE: f64 = 0.99;
const WITNESS_TOL: f64 = 1e-6;
const CLASSIFY_BUDGET: Duration = Duration::from_secs(120);

const FOURTH_HURST: f64 = 0.3;
const FOURTH_PATHS: usize = 200;
const FOURTH_SHARE: f64 = 0.95;
const FOURTH_BUDGET: Duration = Duration::from_secs(600);

const GROWTH_BAND: (f64, f64) = (0.95, 1.05);
const HOPF_BUDGET: Duration = Duration::from_secs(60);

const ADDITIVITY_COMBINATIONS: usize = 10;
const ADDITIVITY_TOL: f64 = 1e-6;

const EXACT_SAMPLES: usize = 10_000;
const NEGATIVE_CONTROL_MIN: f64 = 1e-2;

const MC_PATHS: usize = 10_000;
const MC_WINDOW: f64 = 20.0;
const MC_BUDGET: Duration = Duration::from_secs(600);

const SAS_DRAWS: usize = 100_000;
const SAS_THETAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const SAS_TOL: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(n: usize, title: &str, elapsed: Duration, o: &Outcome) -> bool {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!(
        "{verdict} criterion {n} ({title}) [{:.1}s]: {}",
        elapsed.as_secs_f64(),
        o.detail
    );
    o.pass
}

fn grid(k: &KernelSpec) -> GridSpec {
    k.grid(X_NODES, U_WINDOW, U_STEP).expect("grid")
}

fn classify(k: &KernelSpec) -> (ClassificationReport, Duration) {
    let start = Instant::now();
    let rep = classify_kernel(k, &grid(k), &Thresholds::default()).expect("classify");
    (rep, start.elapsed())
}

fn share(
    rep: &ClassificationReport,
    keep: impl Fn(&fsm_core::classifier::PointReport) -> bool,
) -> f64 {
    rep.points.iter().filter(|p| keep(p)).count() as f64 / rep.points.len() as f64
}

struct Reports {
    lfsm: (ClassificationReport, Duration),
    periodic: (ClassificationReport, Duration),
    fourth: Option<(ClassificationReport, Duration)>,
    dissipative: Option<(ClassificationReport, Duration)>,
    concat: Option<(ClassificationReport, Duration)>,
}

fn criterion_1(r: &Reports) -> Outcome {
    let (lf, lt) = &r.lfsm;
    let (pe, pt) = &r.periodic;
    let fixed = lf.fraction(Label::Fixed);
    let cyclic = pe.fraction(Label::Cyclic);
    let kappa = HURST - 1.0 / ALPHA;
    let witness_ok = |p: &&fsm_core::classifier::PointReport| {
        p.witness.map_or(false, |w| {
            (w.c - E).abs() < WITNESS_TOL && (w.b - kappa.exp()).abs() < WITNESS_TOL
        })
    };
    let on_e = pe
        .points
        .iter()
        .filter(|p| p.label == Label::Cyclic)
        .filter(witness_ok)
        .count() as f64
        / pe.points.len() as f64;
    let pass = fixed >= LABEL_SHARE
        && cyclic >= LABEL_SHARE
        && on_e >= LABEL_SHARE
        && *lt <= CLASSIFY_BUDGET
        && *pt <= CLASSIFY_BUDGET;
    Outcome {
        pass,
        detail: format!(
            "mixed-lfsm fixed {:.1}% in {:.1}s; periodic-example cyclic {:.1}% in {:.1}s, witness (c = e, b = e^kappa) on {:.1}%",
            100.0 * fixed,
            lt.as_secs_f64(),
            100.0 * cyclic,
            pt.as_secs_f64(),
            100.0 * on_e
        ),
    }
}

fn criterion_2(r: &Reports) -> Outcome {
    let Some((rep, t)) = &r.fourth else {
        return Outcome {
            pass: false,
            detail: "no report".into(),
        };
    };
    let conservative = share(rep, |p| {
        p.witness.is_none() && p.label == Label::ConservativeNonperiodic
    });
    let not_finite = share(rep, |p| p.hopf.verdict != HopfVerdict::Finite);
    let divergent = share(rep, |p| p.hopf.verdict == HopfVerdict::Divergent);
    Outcome {
        pass: conservative >= FOURTH_SHARE && not_finite >= FOURTH_SHARE && *t <= FOURTH_BUDGET,
        detail: format!(
            "{} paths: no witness and conservative_nonperiodic {:.1}%, Hopf not finite {:.1}% ({:.1}% divergent)",
            rep.points.len(),
            100.0 * conservative,
            100.0 * not_finite,
            100.0 * divergent
        ),
    }
}

fn criterion_3(r: &Reports) -> Outcome {
    let Some((dis, dt)) = &r.dissipative else {
        return Outcome {
            pass: false,
            detail: "no report".into(),
        };
    };
    let finite = share(dis, |p| p.hopf.verdict == HopfVerdict::Finite);
    let (pe, _) = &r.periodic;
    let in_band = |p: &fsm_core::classifier::PointReport| {
        p.hopf.verdict == HopfVerdict::Divergent
            && p.hopf.ratio >= GROWTH_BAND.0
            && p.hopf.ratio <= GROWTH_BAND.1
    };
    let divergent = share(pe, in_band);
    let (lo, hi) = pe
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.hopf.ratio), hi.max(p.hopf.ratio))
        });
    let hopf_time = *dt;
    Outcome {
        pass: finite == 1.0 && divergent == 1.0 && hopf_time <= HOPF_BUDGET,
        detail: format!(
            "dissipative-synthetic finite {:.1}% in {:.1}s; periodic-example divergent in band {:.1}%, growth ratio in [{lo:.4}, {hi:.4}]",
            100.0 * finite,
            dt.as_secs_f64(),
            100.0 * divergent
        ),
    }
}

fn criterion_4(r: &Reports) -> Outcome {
    let Some((rep, _)) = &r.concat else {
        return Outcome {
            pass: false,
            detail: "no report".into(),
        };
    };
    let k = concat_kernel();
    let g = grid(&k);
    let run = || -> fsm_core::Result<Outcome> {
        let dec = decompose_report(&k, &g, rep)?;
        let combs = random_combinations(ADDITIVITY_COMBINATIONS, 0);
        let add = additivity_check(&dec, &combs, &g, ADDITIVITY_TOL)?;
        let split = (
            dec.components[&Label::Fixed].nodes.len(),
            dec.components[&Label::Cyclic].nodes.len(),
        );
        Ok(Outcome {
            pass: add.passed() && add.rows.len() == ADDITIVITY_COMBINATIONS,
            detail: format!(
                "{} combinations, max relative deviation {:.2e}; fixed/cyclic nodes {}/{}",
                add.rows.len(),
                add.max_deviation,
                split.0,
                split.1
            ),
        })
    };
    run().unwrap_or_else(|e| Outcome {
        pass: false,
        detail: e.to_string(),
    })
}

fn criterion_5() -> Outcome {
    let cs = default_c_samples();
    let periodic = periodic_example(ALPHA, HURST).unwrap();
    let lfsm = mixed_lfsm_const(ALPHA, HURST, 1.0, 2.0, false).unwrap();
    let gp = grid(&periodic);
    let gl = grid(&lfsm);
    let xs: Vec<f64> = gp.x_nodes.iter().map(|n| n.0).collect();
    let rot = generation_identity_check(&periodic, &FlowSpec::rotation(), &cs, &gp).unwrap();
    let ident = generation_identity_check(&lfsm, &FlowSpec::identity(), &cs, &gl).unwrap();
    let axioms = flow_axioms_check(&FlowSpec::rotation(), &cs, &xs).unwrap();
    let axiom_dev = axioms.iter().map(|c| c.max_deviation).fold(0.0, f64::max);

    let broken = generation_identity_check(&periodic, &FlowSpec::broken_demo(), &cs, &gp).unwrap();
    let varying = mixed_lfsm(ALPHA, HURST, |x| 1.0 + x, |x| 2.0 - x, false).unwrap();
    let wrong =
        generation_identity_check(&varying, &FlowSpec::rotation(), &cs, &grid(&varying)).unwrap();
    let broken_axioms = flow_axioms_check(&FlowSpec::broken_demo(), &cs, &xs).unwrap();
    let broken_axiom_dev = broken_axioms
        .iter()
        .map(|c| c.max_deviation)
        .fold(0.0, f64::max);

    let exact = rot.max_deviation < EXACT_TOL
        && ident.max_deviation < EXACT_TOL
        && rot.samples >= EXACT_SAMPLES
        && ident.samples >= EXACT_SAMPLES
        && axiom_dev < EXACT_TOL;
    let controls = broken.max_deviation > NEGATIVE_CONTROL_MIN
        && wrong.max_deviation > NEGATIVE_CONTROL_MIN
        && broken_axiom_dev > NEGATIVE_CONTROL_MIN;
    Outcome {
        pass: exact && controls,
        detail: format!(
            "periodic+rotation {:.1e} ({} samples), lfsm+identity {:.1e} ({} samples), rotation axioms {:.1e}; controls: broken-demo {:.2}, x-dependent lfsm vs rotation {:.2}, broken-demo axioms {:.2}",
            rot.max_deviation,
            rot.samples,
            ident.max_deviation,
            ident.samples,
            axiom_dev,
            broken.max_deviation,
            wrong.max_deviation,
            broken_axiom_dev
        ),
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let combs = vec![
        LinearCombination::single(1.0, 1.0),
        LinearCombination::new(vec![1.0, -0.5], vec![0.7, 2.3]).unwrap(),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let kernels = [
        (mixed_lfsm_const(ALPHA, HURST, 1.0, 2.0, false).unwrap(), 4),
        (periodic_example(ALPHA, HURST).unwrap(), 16),
    ];
    for (k, mc_nodes) in &kernels {
        let ss = self_similarity_check(k, &[2.0, E], &combs, &grid(k)).unwrap();
        pass &= ss.max_deviation < SELF_SIMILARITY_TOL;
        let mc_grid = k.grid(*mc_nodes, MC_WINDOW, U_STEP).unwrap();
        let cfg = EmpiricalConfig {
            n_paths: MC_PATHS,
            seed: 7,
            ..EmpiricalConfig::default()
        };
        let mc = empirical_checks(k, &mc_grid, &cfg).unwrap();
        let worst = mc.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
        pass &= mc.iter().all(|c| c.max_deviation < ECF_TOL);
        parts.push(format!(
            "{}: quadrature {:.1e}, empirical worst {:.4} over {} checks",
            k.label,
            ss.max_deviation,
            worst,
            mc.len()
        ));
    }
    pass &= start.elapsed() <= MC_BUDGET;
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_7() -> Outcome {
    let p = StableParams::new(ALPHA, 1.0).unwrap();
    let draws = sample_sas(p, SAS_DRAWS, 7);
    let err = ecf_sup_error(&draws, &SAS_THETAS, |t| p.cf(t));
    let bytes = |v: &[f64]| v.iter().flat_map(|x| x.to_le_bytes()).collect::<Vec<u8>>();
    let same_draws = bytes(&draws) == bytes(&sample_sas(p, SAS_DRAWS, 7));

    let k = mixed_lfsm_const(ALPHA, HURST, 1.0, 2.0, false).unwrap();
    let g = k.grid(2, 10.0, 0.1).unwrap();
    let dump = |seed: u64| {
        let mut out = Vec::new();
        sample_paths(&k, &[0.0, 0.5, 1.0], 500, &g, seed)
            .unwrap()
            .write_binary(&mut out)
            .unwrap();
        out
    };
    let a = dump(11);
    let same_paths = a == dump(11) && a != dump(12);
    Outcome {
        pass: err < SAS_TOL && same_draws && same_paths,
        detail: format!(
            "{SAS_DRAWS} draws, sup CF error {err:.4}; identical bytes for one seed: draws {same_draws}, paths {same_paths}"
        ),
    }
}

fn criterion_8(r: &Reports) -> Outcome {
    let all = [
        Some(&r.lfsm),
        Some(&r.periodic),
        r.fourth.as_ref(),
        r.dissipative.as_ref(),
        r.concat.as_ref(),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for rep in all {
        let Some((rep, _)) = rep else {
            pass = false;
            continue;
        };
        let c = rep.containment();
        pass &= c.contradictions == 0;
        parts.push(format!(
            "{} {}/{}",
            rep.kernel, c.fixed_without_witness, c.witness_not_divergent
        ));
    }
    Outcome {
        pass,
        detail: format!(
            "fixed without witness / witness not divergent: {}",
            parts.join(", ")
        ),
    }
}

fn concat_kernel() -> KernelSpec {
    let a = mixed_lfsm_const(ALPHA, HURST, 1.0, 2.0, false).unwrap();
    let b = periodic_example(ALPHA, HURST).unwrap();
    concatenate("lfsm-periodic-concat", &a, &b).unwrap()
}

fn main() {
    let mut results = Vec::new();
    let reports = Reports {
        lfsm: classify(&mixed_lfsm_const(ALPHA, HURST, 1.0, 2.0, false).unwrap()),
        periodic: classify(&periodic_example(ALPHA, HURST).unwrap()),
        fourth: fourth_kind(ALPHA, FOURTH_HURST, FOURTH_PATHS, OuParams::default(), 0)
            .ok()
            .map(|k| classify(&k)),
        dissipative: dissipative_synthetic(ALPHA, HURST)
            .ok()
            .map(|k| classify(&k)),
        concat: Some(classify(&concat_kernel())),
    };
    let timed = |n: usize, title: &str, f: &dyn Fn() -> Outcome, extra: Duration| {
        let start = Instant::now();
        let o = f();
        line(n, title, start.elapsed() + extra, &o)
    };
    results.push(timed(
        1,
        "classifier on mixed-lfsm and periodic-example",
        &|| criterion_1(&reports),
        reports.lfsm.1 + reports.periodic.1,
    ));
    let fourth_time = reports.fourth.as_ref().map_or(Duration::ZERO, |r| r.1);
    results.push(timed(
        2,
        "fourth-kind has no periodic part",
        &|| criterion_2(&reports),
        fourth_time,
    ));
    let dis_time = reports.dissipative.as_ref().map_or(Duration::ZERO, |r| r.1);
    results.push(timed(
        3,
        "Hopf discrimination",
        &|| criterion_3(&reports),
        dis_time,
    ));
    let concat_time = reports.concat.as_ref().map_or(Duration::ZERO, |r| r.1);
    results.push(timed(
        4,
        "decomposition additivity",
        &|| criterion_4(&reports),
        concat_time,
    ));
    results.push(timed(
        5,
        "exact identities and negative controls",
        &criterion_5,
        Duration::ZERO,
    ));
    results.push(timed(
        6,
        "self-similarity and stationary increments",
        &criterion_6,
        Duration::ZERO,
    ));
    results.push(timed(
        7,
        "stable sampler fidelity and determinism",
        &criterion_7,
        Duration::ZERO,
    ));
    results.push(timed(
        8,
        "containment across built-in kernels",
        &|| criterion_8(&reports),
        Duration::ZERO,
    ));
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
