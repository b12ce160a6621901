use super::*;
use crate::cyclo_group::SubgroupDescriptor;
use crate::residue::ResidueContext;
use crate::rlwe::{generate_dual_observations, generate_uniform_samples, FieldGeometry, InstanceParams, RlweInstance};
use crate::rng::stream;
use crate::stats::BinSpec;
use rand::Rng;
use std::sync::OnceLock;

fn geom7() -> &'static FieldGeometry {
    static G: OnceLock<FieldGeometry> = OnceLock::new();
    G.get_or_init(|| FieldGeometry::build(&SubgroupDescriptor::new(7, &[1]).unwrap()).unwrap())
}

fn inst7(q: u64, sigma0: f64, seed: u64) -> RlweInstance {
    RlweInstance::with_geometry(InstanceParams::subgroup(7, &[1], q, sigma0, seed), geom7().clone()).unwrap()
}

fn truth(ctx: &ResidueContext, inst: &RlweInstance, twist: u64) -> Vec<u64> {
    let s: Vec<i64> = inst.secret.iter().map(|&x| x as i64).collect();
    ctx.subfield.coords(ctx.reduce_to_sub(&s, &ctx.twisted_sub_vector(twist).unwrap()))
}

#[test]
fn verdict_follows_rejection_count() {
    let mk = |r: Vec<usize>| GuessLoop { chi2: vec![], threshold: 0.0, dof: 1, rejected: r };
    assert_eq!(mk(vec![]).verdict(), Verdict::NotRlwe);
    assert_eq!(mk(vec![4]).verdict(), Verdict::Guess);
    assert_eq!(mk(vec![4, 9]).verdict(), Verdict::InsufficientSamples);
    assert_eq!(Verdict::NotRlwe.to_string(), "NOT-RLWE");
    assert!((default_alpha(169) - (1.0 - 1.0 / 1690.0)).abs() < 1e-15);
}

#[test]
fn attack_recovers_residue_on_weak_instance() {
    let inst = inst7(13, 0.5, 21);
    let ctx = ResidueContext::build(&inst.geometry.h, 13).unwrap();
    let samples = inst.generate_samples(1500);
    for bins in [BinChoice::PerElement, BinChoice::SubfieldTwoBin] {
        let r = chi_square_attack(&ctx, &samples, 1, default_alpha(169), &bins.build(&ctx), false).unwrap();
        assert_eq!(r.verdict, Some(Verdict::Guess), "{bins:?}");
        assert_eq!(r.guess.unwrap(), truth(&ctx, &inst, 1));
    }
    let early = chi_square_attack(&ctx, &samples, 1, default_alpha(169), &BinSpec::per_element(169), true).unwrap();
    assert_eq!(early.guess.unwrap(), truth(&ctx, &inst, 1));
}

#[test]
fn uniform_input_is_not_rlwe() {
    let ctx = ResidueContext::build(&geom7().h, 13).unwrap();
    let mut not = 0;
    for seed in 0..10 {
        let u = generate_uniform_samples(6, 13, 900, seed);
        let r = chi_square_attack(&ctx, &u, 1, 1.0 - 1.0 / (100.0 * 169.0), &BinSpec::per_element(169), false).unwrap();
        not += (r.verdict == Some(Verdict::NotRlwe)) as u32;
    }
    assert!(not >= 9);
}

#[test]
fn gate_rejects_too_few_samples() {
    let ctx = ResidueContext::build(&geom7().h, 13).unwrap();
    let u = generate_uniform_samples(6, 13, 100, 0);
    let e = chi_square_attack(&ctx, &u, 1, 0.99, &BinSpec::per_element(169), false).unwrap_err();
    assert!(matches!(e, crate::Error::InsufficientSamples { .. }));
}

#[test]
fn wrong_guess_rejection_rate_matches_alpha() {
    let ctx = ResidueContext::build(&geom7().h, 13).unwrap();
    let u = generate_uniform_samples(6, 13, 2000, 5);
    let red = reduce_samples(&ctx, &u, 1).unwrap();
    let lp = chi_square_attack_reduced(&ctx.subfield, &red, 0.9, &BinSpec::per_element(169), false).unwrap();
    let rate = lp.rejected.len() as f64 / 169.0;
    // binomial(169, 0.1): sd about 0.023
    assert!((rate - 0.1).abs() < 0.08, "rate {rate}");
}

#[test]
fn correct_guess_separates_from_wrong_ones() {
    let ctx = ResidueContext::build(&geom7().h, 13).unwrap();
    let mut wins = 0;
    for seed in 0..10 {
        let inst = inst7(13, 0.5, 100 + seed);
        let red = reduce_samples(&ctx, &inst.generate_samples(900), 1).unwrap();
        let lp = chi_square_attack_reduced(&ctx.subfield, &red, 0.99, &BinSpec::per_element(169), false).unwrap();
        let t = ctx.subfield.index(&truth(&ctx, &inst, 1));
        let mut rng = stream(seed, "wrong", 0);
        let wrong_max = (0..100)
            .map(|_| loop {
                let g = rng.gen_range(0..169);
                if g != t {
                    break lp.chi2[g];
                }
            })
            .fold(0.0, f64::max);
        wins += (lp.chi2[t] > wrong_max) as u32;
    }
    assert!(wins >= 9);
}

#[test]
fn guess_loop_is_thread_count_independent() {
    let inst = inst7(13, 0.5, 8);
    let ctx = ResidueContext::build(&inst.geometry.h, 13).unwrap();
    let samples = inst.generate_samples(900);
    let run = |k: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap().install(|| {
            let red = reduce_samples(&ctx, &samples, 3).unwrap();
            chi_square_attack_reduced(&ctx.subfield, &red, 0.999, &BinSpec::per_element(169), false).unwrap().chi2
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn search_recovers_full_secret() {
    let inst = inst7(13, 0.5, 31);
    let ctx = ResidueContext::build(&inst.geometry.h, 13).unwrap();
    let samples = inst.generate_samples(1500);
    let out = search_attack(&ctx, &samples, 1.0 - 1.0 / (100.0 * 169.0 * 3.0), &BinSpec::per_element(169), false).unwrap();
    assert_eq!(out.twists.len(), 3);
    assert_eq!(out.secret, inst.secret);
    assert_eq!(out.report.secret.as_ref(), Some(&inst.secret));
}

#[test]
fn search_with_a_single_prime() {
    // 3 has order 6 mod 7: one prime, residue field F_{3^6}
    let inst = inst7(3, 0.5, 2);
    let ctx = ResidueContext::build(&inst.geometry.h, 3).unwrap();
    assert_eq!(inst.geometry.h.prime_twists(3).unwrap(), vec![1]);
    let samples = inst.generate_samples(5 * 729);
    let out = search_attack(&ctx, &samples, 1.0 - 1.0 / (100.0 * 729.0), &BinSpec::per_element(729), false).unwrap();
    assert_eq!(out.secret, inst.secret);
}

#[test]
fn search_reports_failed_twists() {
    let ctx = ResidueContext::build(&geom7().h, 13).unwrap();
    let u = generate_uniform_samples(6, 13, 900, 1);
    match search_attack(&ctx, &u, 1.0 - 1e-6, &BinSpec::per_element(169), false) {
        Err(crate::Error::PartialFailure { failures }) => assert!(!failures.is_empty()),
        other => panic!("unexpected {:?}", other.map(|o| o.secret)),
    }
}

#[test]
fn ramified_attack_small_prime() {
    let g = FieldGeometry::build(&SubgroupDescriptor::new(31, &[1]).unwrap()).unwrap();
    let alpha = 1.0 - 1.0 / (100.0 * 31.0);
    let inst = RlweInstance::with_geometry(InstanceParams::ramified(31, 0.3, 4), g).unwrap();
    let r = ramified_decision_attack(31, &inst.generate_samples(300), alpha, RamifiedBinning::PerElement).unwrap();
    assert_eq!(r.verdict, Some(Verdict::NonUniform));
    let s_bar = inst.secret.iter().sum::<u64>() % 31;
    assert_eq!(r.guess, Some(vec![s_bar]));
    let u = generate_uniform_samples(30, 31, 300, 4);
    let r = ramified_decision_attack(31, &u, alpha, RamifiedBinning::Coarse).unwrap();
    assert_eq!(r.verdict, Some(Verdict::Uniform));
    assert!(r.extra["secondary"]["binning"] == "per-element");
}

#[test]
fn dual_attack_null_and_signal() {
    let obs = generate_dual_observations(101, 0.3 / 101f64.sqrt(), 1000, 1).unwrap();
    assert_eq!(dual_decision_attack(101, &obs, 50, 0.998).unwrap().verdict, Some(Verdict::NonUniform));
    let obs = generate_dual_observations(101, 10.0 / 101f64.sqrt(), 1000, 1).unwrap();
    assert_eq!(dual_decision_attack(101, &obs, 50, 0.998).unwrap().verdict, Some(Verdict::Uniform));
    assert!(dual_decision_attack(101, &obs[..100], 50, 0.998).is_err());
}

#[test]
fn minimal_samples_is_tight() {
    let a = default_alpha(169);
    let m = minimal_samples_for(169, 0.1, a, 0.5, 1 << 30).unwrap().unwrap();
    assert!(crate::stats::success_lower_bound(169, m, 0.1, a).unwrap() >= 0.5);
    assert!(crate::stats::success_lower_bound(169, m - 1, 0.1, a).unwrap() < 0.5);
    // alpha^(N-1) caps the bound
    assert_eq!(minimal_samples_for(169, 0.1, a, 0.95, 1 << 30).unwrap(), None);
}

#[test]
fn scan_separates_weak_and_safe() {
    let budget = ScanBudget { error_samples: 20_000, max_attack_samples: 5_000, ..Default::default() };
    let cands = vec![(7u64, vec![1i64])];
    let weak = vulnerability_search(&cands, 12, 14, 2, 0.5, None, &budget, 1);
    assert_eq!(weak.len(), 1);
    assert_eq!(weak[0].q, 13);
    assert_eq!(weak[0].status, ScanStatus::Attacked, "{:?}", weak[0]);
    let safe = vulnerability_search(&cands, 12, 14, 2, 3.0, None, &budget, 1);
    assert_eq!(safe[0].status, ScanStatus::Safe, "{:?}", safe[0]);
    assert!(vulnerability_search(&[], 2, 100, 2, 1.0, None, &budget, 1).is_empty());
    let bad = vulnerability_search(&[(9, vec![3])], 2, 100, 2, 1.0, None, &budget, 1);
    assert_eq!(bad[0].status, ScanStatus::Error);
}

#[test]
fn modswitch_experiment_outcome() {
    let inst = inst7(1013, 0.5, 3);
    let out = modulus_switch_experiment(&inst, 13, 0.05, 1500, 1.0 - 1.0 / 16900.0, BinChoice::PerElement).unwrap();
    assert_eq!(out.attack.verdict, Some(Verdict::NotRlwe));
    assert!(out.a_err_test.p_value > 1e-3);
    assert!(out.correlation.abs() < 0.1);
    assert!(modulus_switch_experiment(&inst, 2000, 0.05, 10, 0.99, BinChoice::PerElement).is_err());
}
