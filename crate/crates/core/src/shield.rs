//! Evidence shields.
//!
//! The shield of a target `X` with respect to an evidence vertex `E` is a
//! subset of `{X} ∪ Ah(X)` that d-separates `E` from the rest of
//! `{X} ∪ Ah(X)`. Given the shield, `Pr(e | X, Ah(X))` depends on the
//! shield members only, so conditioning `X` on the shield (minus `X`) plus
//! its own parents recovers `Pr(X | Ah(X), e)`.
//!
//! The scan visits `Ah(X)` in reverse topological order and keeps a
//! candidate when a walk down from it reaches `E` through evidence ancestors
//! that are not yet in the shield. Walks only move forward in the order and
//! later shield members precede every vertex already walked, so whether a
//! vertex can still reach `E` never changes once known. [`compute_shield`]
//! memoizes it, making one call `O(|V| + |A|)`. Put differently, a candidate
//! joins the shield iff it has a directed path to `E` whose inner vertices
//! all come after `X`. The result always satisfies [`verify_shield`]; it is
//! not guaranteed to be minimal.
//!
//! [`compute_shield_as_published`] runs a fresh walk per candidate and also
//! refuses to walk through descendants of `X`. That pruning misses
//! co-parents of `X`'s descendants (`A → D ← X`, `D → E` leaves `A` out even
//! though `Pr(e | X, A)` depends on `A`), so it is kept only for comparison.

use std::collections::{BTreeSet, VecDeque};

use crate::dsep::d_separated;
use crate::error::{Error, Result};
use crate::graph::{Dag, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shield {
    pub target: VertexId,
    pub evidence: VertexId,
    /// Always contains `target`.
    pub members: BTreeSet<VertexId>,
}

pub fn compute_shield(dag: &Dag, x: VertexId, e: VertexId) -> Result<Shield> {
    shield_with_work(dag, x, e, &mut 0)
}

fn check_pair(dag: &Dag, x: VertexId, e: VertexId) -> Result<()> {
    dag.check(x)?;
    dag.check(e)?;
    if !dag.is_ancestor(x, e) {
        return Err(Error::NotAncestor {
            vertex: x,
            evidence: e,
        });
    }
    Ok(())
}

/// [`compute_shield`] that also adds the number of vertex and arc visits to `work`.
pub fn shield_with_work(dag: &Dag, x: VertexId, e: VertexId, work: &mut usize) -> Result<Shield> {
    check_pair(dag, x, e)?;
    let n = dag.len();
    let order = dag.topological_order();
    let split = dag.position(x);

    // reaches[v]: v can reach e through vertices after x only
    let mut reaches = vec![false; n];
    let reaches_via_child = |v: VertexId, reaches: &[bool], work: &mut usize| {
        dag.is_ancestor(v, e)
            && dag.children(v).iter().any(|c| {
                *work += 1;
                reaches[c.index()]
            })
    };
    for &v in order[split + 1..].iter().rev() {
        *work += 1;
        reaches[v.index()] = v == e || reaches_via_child(v, &reaches, work);
    }

    let mut members = BTreeSet::from([x]);
    for &candidate in order[..split].iter().rev() {
        *work += 1;
        if reaches_via_child(candidate, &reaches, work) {
            members.insert(candidate);
        }
    }
    Ok(Shield {
        target: x,
        evidence: e,
        members,
    })
}

/// The traversal exactly as originally stated: one breadth-first walk per
/// candidate, pruned at descendants of the target. Can return sets that
/// fail [`verify_shield`].
pub fn compute_shield_as_published(dag: &Dag, x: VertexId, e: VertexId) -> Result<Shield> {
    check_pair(dag, x, e)?;
    let n = dag.len();
    let mut in_shield = vec![false; n];
    in_shield[x.index()] = true;
    let mut visited = vec![usize::MAX; n];
    let ahead = &dag.topological_order()[..dag.position(x)];
    let mut queue = VecDeque::new();

    for (i, &candidate) in ahead.iter().enumerate().rev() {
        queue.clear();
        queue.push_back(candidate);
        visited[candidate.index()] = i;
        while let Some(v) = queue.pop_front() {
            if v == e {
                in_shield[candidate.index()] = true;
                break;
            }
            if !in_shield[v.index()] && dag.is_ancestor(v, e) && !dag.is_ancestor(x, v) {
                for &c in dag.children(v) {
                    if visited[c.index()] != i {
                        visited[c.index()] = i;
                        queue.push_back(c);
                    }
                }
            }
        }
    }

    Ok(Shield {
        target: x,
        evidence: e,
        members: (0..n).filter(|&v| in_shield[v]).map(VertexId).collect(),
    })
}

/// True iff the members d-separate the evidence vertex from the rest of
/// `{target} ∪ Ah(target)`.
pub fn verify_shield(dag: &Dag, shield: &Shield) -> Result<bool> {
    let mut scope = dag.ahead_set(shield.target)?;
    scope.insert(shield.target);
    let rest: Vec<VertexId> = scope.difference(&shield.members).copied().collect();
    let members: Vec<VertexId> = shield.members.iter().copied().collect();
    d_separated(dag, &[shield.evidence], &rest, &members)
}

/// `(shield \ {x}) ∪ π(x)`, ordered by position in δ.
pub fn refractor_parent_set(dag: &Dag, x: VertexId, e: VertexId) -> Result<Vec<VertexId>> {
    let shield = compute_shield(dag, x, e)?;
    Ok(parent_set_from(dag, &shield))
}

pub(crate) fn parent_set_from(dag: &Dag, shield: &Shield) -> Vec<VertexId> {
    let mut set: BTreeSet<VertexId> = shield.members.clone();
    set.remove(&shield.target);
    set.extend(dag.parents(shield.target).iter().copied());
    let mut out: Vec<VertexId> = set.into_iter().collect();
    dag.sort_by_order(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    fn set(ids: &[usize]) -> BTreeSet<VertexId> {
        ids.iter().map(|&i| v(i)).collect()
    }

    // A=0, B=1, E=2
    fn collider() -> Dag {
        Dag::new(vec![vec![], vec![], vec![v(0), v(1)]]).unwrap()
    }

    #[test]
    fn collider_shield_pulls_in_the_other_cause() {
        let dag = collider();
        let s = compute_shield(&dag, v(1), v(2)).unwrap();
        assert_eq!(s.members, set(&[0, 1]));
        assert!(verify_shield(&dag, &s).unwrap());
        assert_eq!(refractor_parent_set(&dag, v(1), v(2)).unwrap(), vec![v(0)]);

        let empty = Shield {
            target: v(1),
            evidence: v(2),
            members: BTreeSet::new(),
        };
        assert!(!verify_shield(&dag, &empty).unwrap());
    }

    #[test]
    fn chain_shields() {
        // A -> B -> E
        let dag = Dag::new(vec![vec![], vec![v(0)], vec![v(1)]]).unwrap();
        assert_eq!(compute_shield(&dag, v(0), v(2)).unwrap().members, set(&[0]));
        assert!(refractor_parent_set(&dag, v(0), v(2)).unwrap().is_empty());
        // B's only ahead vertex reaches E solely through B itself
        assert_eq!(compute_shield(&dag, v(1), v(2)).unwrap().members, set(&[1]));
        assert_eq!(refractor_parent_set(&dag, v(1), v(2)).unwrap(), vec![v(0)]);
    }

    #[test]
    fn non_ancestor_is_rejected() {
        let dag = collider();
        assert!(matches!(
            compute_shield(&dag, v(2), v(0)),
            Err(Error::NotAncestor { .. })
        ));
        assert!(matches!(
            compute_shield(&dag, v(2), v(2)),
            Err(Error::NotAncestor { .. })
        ));
    }

    #[test]
    fn published_traversal_misses_co_parents_of_descendants() {
        // A=0, X=1, D=2 with A -> D <- X, E=3 with D -> E
        let dag = Dag::new(vec![vec![], vec![], vec![v(0), v(1)], vec![v(2)]]).unwrap();
        let published = compute_shield_as_published(&dag, v(1), v(3)).unwrap();
        assert_eq!(published.members, set(&[1]));
        assert!(!verify_shield(&dag, &published).unwrap());

        let sound = compute_shield(&dag, v(1), v(3)).unwrap();
        assert_eq!(sound.members, set(&[0, 1]));
        assert!(verify_shield(&dag, &sound).unwrap());
    }

    #[test]
    fn parents_already_covering_the_shield_are_unchanged() {
        // A -> X, A -> E, X -> E
        let dag = Dag::new(vec![vec![], vec![v(0)], vec![v(0), v(1)]]).unwrap();
        let s = compute_shield(&dag, v(1), v(2)).unwrap();
        assert_eq!(s.members, set(&[0, 1]));
        assert_eq!(refractor_parent_set(&dag, v(1), v(2)).unwrap(), dag.parents(v(1)).to_vec());
    }
}
