mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use ris::dsep::d_separated;
use ris::graph::{Dag, VertexId};

fn subset(mask: u32, n: usize) -> Vec<VertexId> {
    (0..n).filter(|i| mask & (1 << i) != 0).map(VertexId).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn order_respects_every_arc(n in 1usize..16, density in 0.0f64..0.8, seed: u64) {
        let dag = common::random_dag(n, density, seed);
        for v in dag.vertices() {
            for &p in dag.parents(v) {
                prop_assert!(dag.position(p) < dag.position(v));
            }
        }
        let order: BTreeSet<VertexId> = dag.topological_order().iter().copied().collect();
        prop_assert_eq!(order.len(), n);
    }

    #[test]
    fn ancestors_lie_ahead(n in 1usize..16, density in 0.0f64..0.8, seed: u64) {
        let dag = common::random_dag(n, density, seed);
        for v in dag.vertices() {
            let ancestors = dag.ancestors(v).unwrap();
            prop_assert!(ancestors.is_subset(&dag.ahead_set(v).unwrap()));
            prop_assert!(!ancestors.contains(&v));
            for &p in dag.parents(v) {
                prop_assert!(ancestors.contains(&p));
            }
        }
    }

    #[test]
    fn bayes_ball_matches_path_enumeration(
        n in 2usize..9,
        density in 0.0f64..0.7,
        seed: u64,
        masks in proptest::collection::vec((any::<u32>(), any::<u32>(), any::<u32>()), 5),
    ) {
        let dag = common::random_dag(n, density, seed);
        for (mx, my, mz) in masks {
            let z = subset(mz, n);
            let x: Vec<VertexId> = subset(mx, n).into_iter().filter(|v| !z.contains(v)).collect();
            let y: Vec<VertexId> = subset(my, n)
                .into_iter()
                .filter(|v| !z.contains(v) && !x.contains(v))
                .collect();
            prop_assert_eq!(
                d_separated(&dag, &x, &y, &z).unwrap(),
                common::d_separated_by_paths(&dag, &x, &y, &z),
                "x={:?} y={:?} z={:?}", x, y, z
            );
        }
    }
}

#[test]
fn unknown_vertices_are_rejected() {
    let dag = Dag::new(vec![vec![], vec![VertexId(0)]]).unwrap();
    assert!(d_separated(&dag, &[VertexId(5)], &[VertexId(0)], &[]).is_err());
    assert!(dag.ahead_set(VertexId(2)).is_err());
}

#[test]
fn path_oracle_on_known_graphs() {
    let v = VertexId;
    // 0 -> 2 <- 1, 2 -> 3
    let dag = Dag::new(vec![vec![], vec![], vec![v(0), v(1)], vec![v(2)]]).unwrap();
    assert!(common::d_separated_by_paths(&dag, &[v(0)], &[v(1)], &[]));
    assert!(!common::d_separated_by_paths(&dag, &[v(0)], &[v(1)], &[v(2)]));
    assert!(!common::d_separated_by_paths(&dag, &[v(0)], &[v(1)], &[v(3)]));
    assert!(!common::d_separated_by_paths(&dag, &[v(0)], &[v(3)], &[]));
    assert!(common::d_separated_by_paths(&dag, &[v(0)], &[v(3)], &[v(2)]));
    for (x, y, z) in [(0, 1, vec![]), (0, 1, vec![2]), (0, 1, vec![3]), (0, 3, vec![]), (0, 3, vec![2])] {
        let z: Vec<VertexId> = z.into_iter().map(v).collect();
        assert_eq!(
            d_separated(&dag, &[v(x)], &[v(y)], &z).unwrap(),
            common::d_separated_by_paths(&dag, &[v(x)], &[v(y)], &z)
        );
    }
}
