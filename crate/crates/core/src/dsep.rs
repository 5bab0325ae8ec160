//! d-separation by active-trail reachability (the "Bayes ball" pass).

use std::collections::VecDeque;

use crate::error::Result;
use crate::graph::{Dag, VertexId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// Ball arrived from a child.
    Up,
    /// Ball arrived from a parent.
    Down,
}

/// Vertices reachable from `sources` along trails that are active given `observed`.
///
/// Observed sources are dropped. Runs in O(|V| + |A|).
pub fn reachable(dag: &Dag, sources: &[VertexId], observed: &[VertexId]) -> Result<Vec<bool>> {
    let n = dag.len();
    let mut in_z = vec![false; n];
    for &z in observed {
        dag.check(z)?;
        in_z[z.index()] = true;
    }
    for &s in sources {
        dag.check(s)?;
    }

    // Vertices that are observed or have an observed descendant.
    let mut opens_collider = in_z.clone();
    let mut stack: Vec<VertexId> = observed.to_vec();
    while let Some(v) = stack.pop() {
        for &p in dag.parents(v) {
            if !opens_collider[p.index()] {
                opens_collider[p.index()] = true;
                stack.push(p);
            }
        }
    }

    let mut visited_up = vec![false; n];
    let mut visited_down = vec![false; n];
    let mut reached = vec![false; n];
    let mut queue: VecDeque<(VertexId, Direction)> = sources
        .iter()
        .filter(|s| !in_z[s.index()])
        .map(|&s| (s, Direction::Up))
        .collect();

    while let Some((v, dir)) = queue.pop_front() {
        let seen = match dir {
            Direction::Up => &mut visited_up[v.index()],
            Direction::Down => &mut visited_down[v.index()],
        };
        if *seen {
            continue;
        }
        *seen = true;

        let observed_v = in_z[v.index()];
        if !observed_v {
            reached[v.index()] = true;
        }
        match dir {
            Direction::Up if !observed_v => {
                queue.extend(dag.parents(v).iter().map(|&p| (p, Direction::Up)));
                queue.extend(dag.children(v).iter().map(|&c| (c, Direction::Down)));
            }
            Direction::Up => {}
            Direction::Down => {
                if !observed_v {
                    queue.extend(dag.children(v).iter().map(|&c| (c, Direction::Down)));
                }
                if opens_collider[v.index()] {
                    queue.extend(dag.parents(v).iter().map(|&p| (p, Direction::Up)));
                }
            }
        }
    }
    Ok(reached)
}

/// True iff every trail between `x` and `y` is blocked given `z`.
///
/// Members of `x` or `y` that are also in `z` count as separated.
pub fn d_separated(dag: &Dag, x: &[VertexId], y: &[VertexId], z: &[VertexId]) -> Result<bool> {
    for &v in y {
        dag.check(v)?;
    }
    let reached = reachable(dag, x, z)?;
    let observed = |v: &VertexId| z.contains(v);
    Ok(!y.iter().any(|v| !observed(v) && reached[v.index()]))
}
