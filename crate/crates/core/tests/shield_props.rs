mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use ris::dsep::d_separated;
use ris::graph::{Dag, VertexId};
use ris::netgen;
use ris::network::Evidence;
use ris::refractor::{refractor, RefractorScope};
use ris::shield::{compute_shield, compute_shield_as_published, refractor_parent_set, shield_with_work, verify_shield};

fn ancestor_pairs(dag: &Dag) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::new();
    for e in dag.vertices() {
        for x in dag.ancestors(e).unwrap() {
            out.push((x, e));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shields_separate(n in 2usize..16, density in 0.05f64..0.6, seed: u64) {
        let dag = common::random_dag(n, density, seed);
        for (x, e) in ancestor_pairs(&dag) {
            let s = compute_shield(&dag, x, e).unwrap();
            prop_assert!(s.members.contains(&x));
            let mut scope = dag.ahead_set(x).unwrap();
            scope.insert(x);
            prop_assert!(s.members.is_subset(&scope));
            prop_assert!(verify_shield(&dag, &s).unwrap(), "x={} e={} members={:?}", x, e, s.members);
        }
    }

    #[test]
    fn memoized_scan_equals_per_candidate_walks(n in 2usize..14, density in 0.05f64..0.6, seed: u64) {
        let dag = common::random_dag(n, density, seed);
        for (x, e) in ancestor_pairs(&dag) {
            prop_assert_eq!(compute_shield(&dag, x, e).unwrap().members, common::shield_by_walks(&dag, x, e));
            let published = compute_shield_as_published(&dag, x, e).unwrap().members;
            prop_assert!(published.is_subset(&common::shield_by_walks(&dag, x, e)));
        }
    }

    #[test]
    fn widened_parents_separate_evidence_from_the_ahead_set(n in 2usize..16, density in 0.05f64..0.6, seed: u64) {
        let dag = common::random_dag(n, density, seed);
        for (x, e) in ancestor_pairs(&dag) {
            let parents = refractor_parent_set(&dag, x, e).unwrap();
            let rest: Vec<VertexId> = dag
                .ahead_set(x)
                .unwrap()
                .into_iter()
                .filter(|v| !parents.contains(v))
                .collect();
            prop_assert!(d_separated(&dag, &[e], &rest, &parents).unwrap());
            prop_assert!(parents.iter().all(|p| dag.position(*p) < dag.position(x)));
        }
    }

    #[test]
    fn refractor_work_stays_within_vertex_arc_budget(n in 2usize..20, density in 0.05f64..0.5, seed: u64) {
        let dag = common::random_dag(n, density, seed);
        let budget = |dag: &Dag| 2 * (dag.len() + dag.arc_count());
        let mut total = 0;
        for (x, e) in ancestor_pairs(&dag) {
            let mut work = 0;
            shield_with_work(&dag, x, e, &mut work).unwrap();
            prop_assert!(work <= budget(&dag));
            total += work;
        }
        // one evidence vertex: at most |V| targets, each linear in |V| + |A|
        prop_assert!(total <= dag.len() * dag.len() * budget(&dag));
    }
}

#[test]
fn refractor_work_is_bounded_per_evidence_vertex() {
    for seed in 0..50 {
        let bn = netgen::random_network(20, 30, &[2, 3], seed).unwrap();
        let e = netgen::random_evidence(&bn, 3, seed, false).unwrap();
        let r = refractor(&bn, &e, &RefractorScope::FullAncestors).unwrap();
        let (v, a) = (bn.len(), bn.dag().arc_count());
        assert!(r.work() <= e.len() * v * 2 * (v + a), "work {} on seed {seed}", r.work());
    }
}

#[test]
fn refractored_parents_exclude_evidence_and_stay_acyclic() {
    for seed in 0..100 {
        let (bn, e) = common::random_case(seed, 10, 3);
        let r = refractor(&bn, &e, &RefractorScope::FullAncestors).unwrap().absorb_evidence().unwrap();
        let dag = bn.dag();
        for x in dag.vertices().filter(|x| !e.contains(*x)) {
            let parents = r.expanded_parents(x).unwrap();
            assert!(parents.iter().all(|p| !e.contains(*p)));
            assert!(parents.iter().all(|p| dag.position(*p) < dag.position(x)));
            let original: BTreeSet<VertexId> = dag.parents(x).iter().copied().filter(|p| !e.contains(*p)).collect();
            assert!(original.iter().all(|p| parents.contains(p)));
        }
        // everything but evidence ancestors keeps its parents
        let ancestors = dag.combined_ancestors(&e.vertices()).unwrap();
        for x in dag.vertices().filter(|x| !e.contains(*x) && !ancestors.contains(x)) {
            assert_eq!(r.expanded_parents(x).unwrap().len(), dag.parents(x).iter().filter(|p| !e.contains(**p)).count());
        }
    }
}

#[test]
fn root_evidence_changes_nothing() {
    let bn = ris::fixtures::rooted();
    let e = Evidence::from_labels(&bn, [("R1", "1"), ("R2", "0")]).unwrap();
    let r = refractor(&bn, &e, &RefractorScope::FullAncestors).unwrap();
    assert!(r.expanded_vertices().is_empty());
    for x in bn.dag().vertices().filter(|x| !e.contains(*x)) {
        assert_eq!(r.factor(x).unwrap().parents(), bn.dag().parents(x));
    }
}
