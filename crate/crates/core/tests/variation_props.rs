//! Invariants of the Monte Carlo machinery and the device models it perturbs.

use mramsim::devices::{mtj_resistance, MtjParams, MtjState};
use mramsim::netlist::{flatten_hierarchy, FlatCircuit};
use mramsim::senseamps::{
    build_design, default_timing, neutralization_balance, DesignId, SenseAmpParams,
};
use mramsim::solver::SolverConfig;
use mramsim::variation::*;
use proptest::prelude::*;

fn design(id: &str, state: MtjState) -> FlatCircuit {
    let id: DesignId = id.parse().unwrap();
    let n = build_design(
        id.kind,
        id.reference,
        &SenseAmpParams::default(),
        state,
        &default_timing(),
    )
    .unwrap();
    flatten_hierarchy(&n).unwrap()
}

fn bench(id: &str, state: MtjState) -> ReadBench {
    ReadBench::new(
        id.parse().unwrap(),
        state,
        &SenseAmpParams::default(),
        &default_timing(),
        &SolverConfig::default(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn draws_are_pure_functions_of_their_key(seed in any::<u64>(), index in 0usize..10_000) {
        let c = design("nvsa-3s", MtjState::P);
        let spec = VariationSpec::standard(seed, 10_000);
        prop_assert_eq!(draw_sample(&spec, index, &c).unwrap(), draw_sample(&spec, index, &c).unwrap());
    }

    #[test]
    fn extra_linear_elements_do_not_shift_draws(seed in any::<u64>(), index in 0usize..1000) {
        // the neutralized design only adds two capacitors
        let spec = VariationSpec::standard(seed, 1000);
        let a = draw_sample(&spec, index, &design("vsa-1ref", MtjState::P)).unwrap();
        let b = draw_sample(&spec, index, &design("nvsa-1ref", MtjState::P)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn zero_sigma_draws_are_nominal(seed in any::<u64>(), index in 0usize..100) {
        let c = design("csa-1ref", MtjState::Ap);
        let d = draw_sample(&VariationSpec::nominal(seed, 100), index, &c).unwrap();
        prop_assert!(d.vth_deltas.iter().all(|&v| v == 0.0));
        prop_assert_eq!(apply_draw(&c, &d), c);
    }

    #[test]
    fn calibration_is_identity_when_spreads_agree(x in 1e-4f64..0.9, tox0 in 0.1e-9f64..5e-9) {
        let beta = calibrate_beta(x, x, tox0).unwrap();
        prop_assert!((beta * tox0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resistance_grows_with_barrier(dt in 1e-13f64..1e-10, state in prop_oneof![Just(MtjState::P), Just(MtjState::Ap)]) {
        let p = MtjParams::default();
        let r0 = mtj_resistance(&p, state, p.tox0);
        let r1 = mtj_resistance(&p, state, p.tox0 + dt);
        prop_assert!(r1 > r0);
        prop_assert!((r1 / r0 - (p.beta * dt).exp()).abs() < 1e-9);
    }

    #[test]
    fn ap_over_p_ratio_is_thickness_independent(dt in -1e-10f64..1e-10) {
        let p = MtjParams::default();
        let t = p.tox0 + dt;
        let ratio = mtj_resistance(&p, MtjState::Ap, t) / mtj_resistance(&p, MtjState::P, t);
        prop_assert!((ratio - 1970.0 / 742.0).abs() < 1e-9);
    }

    #[test]
    fn balance_lhs_terms_sum_to_offset_identity(
        a in 0.0f64..1.0, b in 0.0f64..1.0, vc in 0.5f64..1.0, vr in 0.5f64..1.0,
        cg in 1e-16f64..1e-14, c in 0.0f64..1e-14,
    ) {
        prop_assume!((a - b).abs() > 1e-3);
        let bal = neutralization_balance(a, b, vc, vr, cg, cg, c, c).unwrap();
        let expected = 1.0 - (vc - vr) / (a - b);
        prop_assert!((bal.lhs1 + bal.lhs2 - expected).abs() < 1e-9 * expected.abs().max(1.0));
        prop_assert!(bal.residual() >= 0.0);
    }
}

#[test]
fn resistance_spread_matches_calibration() {
    let spec = VariationSpec::standard(7, 20_000);
    let p = MtjParams::default();
    let stats = |state| {
        let r = resistance_samples(&spec, &p, state);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64;
        (mean, var.sqrt() / mean)
    };
    let (mp, sp) = stats(MtjState::P);
    let (ma, sa) = stats(MtjState::Ap);
    assert!((mp / 742.0 - 1.0).abs() < 0.01, "{mp}");
    assert!((ma / 1970.0 - 1.0).abs() < 0.01, "{ma}");
    assert!((sa / sp - 1.0).abs() < 0.10, "{sa} vs {sp}");
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = VariationSpec::standard(1, 10);
    s.sigma_vth = -0.01;
    assert!(matches!(
        s.validate(),
        Err(VariationError::NegativeSigma("sigma_vth", _))
    ));
    assert_eq!(
        VariationSpec::standard(1, 0).validate(),
        Err(VariationError::NoSamples)
    );
    assert!(draw_sample(
        &VariationSpec::standard(1, 10),
        10,
        &design("csa-1ref", MtjState::P)
    )
    .is_err());
    assert!(calibrate_beta(0.0, 0.13, 1e-9).is_err());
}

#[test]
fn split_runs_merge_bit_exactly() {
    let b = bench("vsa-1ref", MtjState::Ap);
    let spec = VariationSpec::standard(11, 24);
    let whole = run_ensemble(&b, &spec).unwrap();
    let merged = run_ensemble_range(&b, &spec, 0..10)
        .unwrap()
        .merge(run_ensemble_range(&b, &spec, 10..24).unwrap())
        .unwrap();
    assert_eq!(merged, whole);
    assert_eq!(
        whole.per_sample.iter().map(|s| s.index).collect::<Vec<_>>(),
        (0..24).collect::<Vec<_>>()
    );
}

#[test]
fn merge_rejects_gaps_and_mismatches() {
    let b = bench("vsa-1ref", MtjState::Ap);
    let spec = VariationSpec::standard(11, 6);
    let head = run_ensemble_range(&b, &spec, 0..2).unwrap();
    assert!(head
        .clone()
        .merge(run_ensemble_range(&b, &spec, 3..6).unwrap())
        .is_err());
    let other = run_ensemble_range(&b, &VariationSpec::standard(12, 6), 2..4).unwrap();
    assert!(head.merge(other).is_err());
}

#[test]
fn zero_variance_samples_equal_nominal() {
    let b = bench("nvsa-1ref", MtjState::P);
    let nominal = b.read_nominal().unwrap();
    let r = run_ensemble(&b, &VariationSpec::nominal(3, 4)).unwrap();
    assert_eq!(r.error_count, 0);
    for s in &r.per_sample {
        assert_eq!(s.decision, nominal.decision);
        assert_eq!(s.delay, nominal.delay);
        assert_eq!(s.power, Some(nominal.power_avg));
    }
}

/// Error counts of the current-mode design, the one with the most errors.
fn csa_errors(scale: f64, seed: u64, n: usize) -> usize {
    let b = bench("csa-1ref", MtjState::P);
    let mut spec = VariationSpec::standard(seed, n);
    spec.sigma_tox_rel *= scale;
    spec.sigma_vth *= scale;
    run_ensemble(&b, &spec).unwrap().error_count
}

#[test]
fn errors_grow_with_variation() {
    let n = 300;
    let counts: Vec<usize> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&s| csa_errors(s, 5, n))
        .collect();
    assert!(
        counts[0] <= counts[1] && counts[1] <= counts[2],
        "{counts:?}"
    );
    assert!(counts[2] > counts[0], "{counts:?}");
}

#[test]
fn error_rate_is_seed_independent() {
    let n = 300;
    let a = csa_errors(1.0, 21, n) as f64;
    let b = csa_errors(1.0, 22, n) as f64;
    // difference of two binomial counts, three standard deviations
    let p = (a + b) / (2.0 * n as f64);
    let sd = (2.0 * n as f64 * p * (1.0 - p)).sqrt();
    assert!((a - b).abs() <= 3.0 * sd.max(1.0), "{a} vs {b}");
}
