use proptest::prelude::*;

use fsm_core::classifier::{classify_point, Label, Thresholds};
use fsm_core::kernels::{mixed_lfsm_const, periodic_example, Integrand};
use fsm_core::rng::derive_seed;
use fsm_core::simulator::{parse_time_grid, PathEnsemble};
use fsm_core::stable::{cf_exponent, sas_from_uniforms};
use fsm_core::{FlowSpec, LinearCombination};

fn lfsm() -> fsm_core::KernelSpec {
    mixed_lfsm_const(1.5, 0.5, 1.0, 2.0, false).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cf_exponent_is_alpha_homogeneous(theta in 0.2f64..2.0, t in 0.2f64..2.5, lambda in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let k = lfsm();
        let g = k.grid(1, 20.0, 0.05).unwrap();
        let c = LinearCombination::single(theta, t);
        let base = cf_exponent(&k, &c, &g).unwrap().value;
        let scaled = cf_exponent(&k, &c.scaled(lambda), &g).unwrap().value;
        let want = lambda.abs().powf(1.5) * base;
        prop_assert!((scaled - want).abs() <= 1e-6 * want, "{scaled} vs {want}");
    }

    #[test]
    fn alpha_norm_obeys_triangle_bound(t1 in 0.1f64..3.0, t2 in -3.0f64..-0.1, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let k = periodic_example(1.5, 0.5).unwrap();
        let g = k.grid(8, 20.0, 0.05).unwrap();
        let norm = |c: LinearCombination| cf_exponent(&k, &c, &g).unwrap().value.powf(1.0 / 1.5);
        let both = norm(LinearCombination::new(vec![a, b], vec![t1, t2]).unwrap());
        let sum = norm(LinearCombination::single(a, t1)) + norm(LinearCombination::single(b, t2));
        prop_assert!(both <= sum * (1.0 + 1e-6), "{both} > {sum}");
    }

    #[test]
    fn increments_are_stationary(t in 0.1f64..2.0, h in -2.0f64..2.0) {
        let k = lfsm();
        let g = k.grid(1, 20.0, 0.05).unwrap();
        let inc = cf_exponent(&k, &LinearCombination::new(vec![1.0, -1.0], vec![t + h, h]).unwrap(), &g).unwrap().value;
        let base = cf_exponent(&k, &LinearCombination::single(1.0, t), &g).unwrap().value;
        prop_assert!((inc - base).abs() <= 1e-4 * base, "{inc} vs {base}");
    }

    #[test]
    fn increments_telescope(x in 0.0f64..1.0, u in -30.0f64..30.0, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let k = periodic_example(1.5, 0.5).unwrap();
        let lhs = k.increment(s + t).eval(x, u);
        let rhs = k.increment(s).eval(x, u + t) + k.increment(t).eval(x, u);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn rotation_flow_is_a_group_with_cocycle(x in 0.0f64..1.0, c1 in 0.05f64..20.0, c2 in 0.05f64..20.0) {
        let f = FlowSpec::rotation();
        prop_assert!(f.state_dist(f.psi(c1 * c2, x), f.psi(c1, f.psi(c2, x))) < 1e-10);
        let y = f.psi(c2, x);
        prop_assert!((f.cocycle(c1 * c2, x) - f.cocycle(c2, x) * f.cocycle(c1, y)).abs() < 1e-10);
    }

    #[test]
    fn periodic_kernel_is_generated_by_rotation(x in 0.0f64..1.0, u in -40.0f64..40.0, c in 0.05f64..20.0) {
        let k = periodic_example(1.5, 0.5).unwrap();
        let f = k.flow().unwrap();
        let lhs = c.powf(-k.kappa) * k.eval(x, c * u);
        let rhs = f.cocycle(c, x) * f.radon_nikodym(c, x).powf(1.0 / k.alpha) * k.eval(f.psi(c, x), u + f.semiadd(c, x)) + f.remainder(c, x);
        prop_assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn sas_map_is_odd_in_the_angle(alpha in 0.3f64..2.0, u in 0.001f64..0.999, w in 0.001f64..0.999) {
        let a = sas_from_uniforms(alpha, u, w);
        let b = sas_from_uniforms(alpha, 1.0 - u, w);
        prop_assert!((a + b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn derived_seeds_separate_purposes(seed in any::<u64>(), i in 0u64..1000) {
        prop_assert_eq!(derive_seed(seed, "simulate", i), derive_seed(seed, "simulate", i));
        prop_assert_ne!(derive_seed(seed, "simulate", i), derive_seed(seed, "classify", i));
        prop_assert_ne!(derive_seed(seed, "simulate", i), derive_seed(seed, "simulate", i + 1));
    }

    #[test]
    fn time_grid_includes_both_ends(a in -5.0f64..5.0, n in 1usize..60, h in 0.01f64..1.0) {
        let b = a + n as f64 * h;
        let times = parse_time_grid(&format!("{a}:{h}:{b}")).unwrap();
        prop_assert_eq!(times.len(), n + 1);
        prop_assert!((times[0] - a).abs() < 1e-9);
        prop_assert_eq!(*times.last().unwrap(), b);
        prop_assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ensemble_binary_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..40), seed in any::<u64>()) {
        let ens = PathEnsemble {
            kernel: String::new(),
            times: vec![1.0],
            n_paths: values.len(),
            values: values.clone(),
            seed,
            grid: None,
            discretized_exponents: vec![],
            cells: 0,
        };
        let mut buf = Vec::new();
        ens.write_binary(&mut buf).unwrap();
        let back = PathEnsemble::read_binary(&buf[..]).unwrap();
        prop_assert_eq!(back.values, values);
        prop_assert_eq!(back.seed, seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn loosening_pfsm_tol_never_shrinks_fixed_or_cyclic(x in 0.0f64..1.0, tight in 1e-14f64..1e-8, factor in 1.0f64..1e6) {
        let k = periodic_example(1.5, 0.5).unwrap();
        let g = k.grid(1, 10.0, 0.1).unwrap();
        let periodic = |l: Label| l == Label::Fixed || l == Label::Cyclic;
        let strict = Thresholds { pfsm_tol: tight, ..Thresholds::default() };
        let loose = Thresholds { pfsm_tol: tight * factor, ..Thresholds::default() };
        let a = classify_point(&k, x, &g, &strict).label;
        let b = classify_point(&k, x, &g, &loose).label;
        prop_assert!(!periodic(a) || periodic(b), "{a:?} then {b:?}");
    }
}
