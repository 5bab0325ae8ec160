mod common;

use ris::exact::ExactInference;
use ris::metrics::{post_kld, post_kld_with_joint, posterior_kl_with_joint};
use ris::netgen;
use ris::network::Evidence;
use ris::refractor::{refractor, RefractorScope};
use ris::DEFAULT_ENUM_CAP;

const TOL: f64 = 1e-9;

#[test]
fn bound_equals_kl_of_the_structure_preserving_plug_in() {
    for seed in 0..150 {
        let (bn, e) = common::random_case(seed, 10, 4);
        let joint = ExactInference::new(&bn).posterior_joint(&e).unwrap();
        let direct = common::direct_kl(&joint, &common::structure_preserving_plug_in(&bn, &e, &joint));
        let bound = post_kld_with_joint(&bn, &joint).unwrap().total();
        assert!((direct - bound).abs() < TOL, "seed {seed}: direct {direct} vs bound {bound}");
    }
}

#[test]
fn no_structure_preserving_function_beats_the_bound() {
    for seed in 0..40 {
        let (bn, e) = common::random_case(seed, 9, 3);
        let joint = ExactInference::new(&bn).posterior_joint(&e).unwrap();
        let bound = post_kld_with_joint(&bn, &joint).unwrap().total();
        let mut rng = common::rng(seed);
        for _ in 0..25 {
            let f = netgen::random_structure_preserving(&bn, &e, 0.3, &mut rng);
            let kl = posterior_kl_with_joint(&joint, &f);
            assert!(kl >= bound - TOL, "seed {seed}: {kl} < {bound}");
            assert!((kl - common::direct_kl(&joint, &f)).abs() < 1e-9);
        }
    }
}

#[test]
fn root_evidence_leaves_nothing_to_learn() {
    for seed in 0..50 {
        let (bn, e) = common::root_evidence_case(seed);
        assert!(post_kld(&bn, &e, DEFAULT_ENUM_CAP).unwrap() <= 1e-12, "seed {seed}");
        let joint = ExactInference::new(&bn).posterior_joint(&e).unwrap();
        let f = common::structure_preserving_plug_in(&bn, &e, &joint);
        assert!(common::direct_kl(&joint, &f) <= TOL);
    }
}

#[test]
fn non_ancestors_keep_their_prior_conditionals() {
    for seed in 0..100 {
        let (bn, e) = common::random_case(seed, 10, 3);
        if let Err(msg) = common::check_non_ancestor_conditionals(&bn, &e, TOL) {
            panic!("seed {seed}: {msg}");
        }
    }
}

#[test]
fn ancestor_conditionals_reweight_the_prior() {
    let mut checked = 0;
    for seed in 0..100 {
        let (bn, e) = common::random_case(seed, 9, 1);
        checked += common::check_ancestor_reweighting(&bn, &e, TOL).unwrap_or_else(|msg| panic!("seed {seed}: {msg}"));
    }
    assert!(checked > 1000);
}

#[test]
fn refractored_oracle_entries_reach_the_posterior() {
    let mut broken = 0;
    for seed in 0..100 {
        let (bn, e) = common::random_case(seed, 10, 3);
        let joint = ExactInference::new(&bn).posterior_joint(&e).unwrap();
        let bound = post_kld_with_joint(&bn, &joint).unwrap().total();
        let r = refractor(&bn, &e, &RefractorScope::FullAncestors).unwrap().absorb_evidence().unwrap();
        let f = r.with_oracle_entries(&joint).unwrap().importance_function();
        let kl = posterior_kl_with_joint(&joint, &f);
        assert!(kl <= bound + TOL, "seed {seed}: {kl} > {bound}");
        if e.len() == 1 {
            assert!(kl <= TOL, "seed {seed}: single evidence leaves {kl}");
        }
        if bound > 0.05 {
            assert!(kl < bound);
            broken += 1;
        }
    }
    assert!(broken > 0);
}

#[test]
fn parents_of_evidence_scope_is_coarser() {
    let bn = ris::fixtures::xor_collider(0.9);
    let e = Evidence::from_labels(&bn, [("E", "1")]).unwrap();
    let joint = ExactInference::new(&bn).posterior_joint(&e).unwrap();
    let r = refractor(&bn, &e, &RefractorScope::ParentsOfEvidence).unwrap().absorb_evidence().unwrap();
    let f = r.with_oracle_entries(&joint).unwrap().importance_function();
    assert!(posterior_kl_with_joint(&joint, &f) < 1e-12);
}
