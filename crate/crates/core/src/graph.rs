//! Directed acyclic graph substrate.
//!
//! A [`Dag`] owns parent and child lists, the canonical topological order
//! (Kahn's algorithm, ties broken by ascending [`VertexId`]) and a
//! precomputed ancestor table so that ancestor membership is a constant-time
//! bit lookup.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Dense vertex index, stable within one network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<usize> for VertexId {
    fn from(value: usize) -> Self {
        VertexId(value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<VertexId>>,
    children: Vec<Vec<VertexId>>,
    order: Vec<VertexId>,
    position: Vec<usize>,
    /// `ancestors[x]` has bit `y` set iff `y` is a proper ancestor of `x`.
    ancestors: Vec<FixedBitSet>,
}

impl Dag {
    /// Builds a DAG from per-vertex parent lists. Parent order is kept as given.
    pub fn new(parents: Vec<Vec<VertexId>>) -> Result<Self> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &p in ps {
                if p.index() >= n {
                    return Err(Error::UnknownVertex(p));
                }
                if p.index() == child {
                    return Err(Error::Structure(format!("vertex {p} lists itself as a parent")));
                }
                if !seen.insert(p) {
                    return Err(Error::Structure(format!(
                        "vertex #{child} lists parent {p} twice"
                    )));
                }
                children[p.index()].push(VertexId(child));
            }
        }

        let order = topological_sort(&parents, &children)?;
        let mut position = vec![0; n];
        for (i, v) in order.iter().enumerate() {
            position[v.index()] = i;
        }

        let mut ancestors = vec![FixedBitSet::with_capacity(n); n];
        for &v in &order {
            let mut set = FixedBitSet::with_capacity(n);
            for &p in &parents[v.index()] {
                set.insert(p.index());
                set.union_with(&ancestors[p.index()]);
            }
            ancestors[v.index()] = set;
        }

        Ok(Dag {
            parents,
            children,
            order,
            position,
            ancestors,
        })
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).map(VertexId)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.len()
    }

    pub fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn parents(&self, v: VertexId) -> &[VertexId] {
        &self.parents[v.index()]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.index()]
    }

    /// Canonical topological order δ.
    pub fn topological_order(&self) -> &[VertexId] {
        &self.order
    }

    /// Position of `v` in the canonical order.
    pub fn position(&self, v: VertexId) -> usize {
        self.position[v.index()]
    }

    /// Constant-time test for `a ∈ An(x)`.
    #[inline]
    pub fn is_ancestor(&self, a: VertexId, x: VertexId) -> bool {
        self.ancestors[x.index()].contains(a.index())
    }

    pub fn ancestors(&self, x: VertexId) -> Result<BTreeSet<VertexId>> {
        self.check(x)?;
        Ok(self.ancestors[x.index()].ones().map(VertexId).collect())
    }

    /// Combined ancestor set: union of the members' ancestors minus the members.
    pub fn combined_ancestors(&self, set: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
        let mut out = BTreeSet::new();
        for &x in set {
            out.extend(self.ancestors(x)?);
        }
        Ok(out.difference(set).copied().collect())
    }

    /// Ah(x): every vertex strictly before `x` in δ.
    pub fn ahead_set(&self, x: VertexId) -> Result<BTreeSet<VertexId>> {
        self.check(x)?;
        Ok(self.order[..self.position(x)].iter().copied().collect())
    }

    /// Union of the members' parent sets minus the members.
    pub fn combined_parents(&self, set: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
        let mut out = BTreeSet::new();
        for &x in set {
            self.check(x)?;
            out.extend(self.parents(x).iter().copied());
        }
        Ok(out.difference(set).copied().collect())
    }

    /// Sorts vertices by their position in δ.
    pub fn sort_by_order(&self, vertices: &mut [VertexId]) {
        vertices.sort_by_key(|v| self.position(*v));
    }
}

fn topological_sort(parents: &[Vec<VertexId>], children: &[Vec<VertexId>]) -> Result<Vec<VertexId>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&v| indegree[v] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(VertexId(v));
        for c in &children[v] {
            indegree[c.index()] -= 1;
            if indegree[c.index()] == 0 {
                ready.push(Reverse(c.index()));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every leftover vertex has a leftover parent; walking parents must revisit one.
    let start = (0..n).find(|&v| indegree[v] > 0).expect("leftover vertex");
    let mut visited = vec![false; n];
    let mut v = start;
    while !visited[v] {
        visited[v] = true;
        v = parents[v]
            .iter()
            .map(|p| p.index())
            .find(|&p| indegree[p] > 0)
            .expect("leftover parent");
    }
    Err(Error::Cycle(VertexId(v)))
}

/// Free-function form of [`Dag::topological_order`].
pub fn topological_order(dag: &Dag) -> Vec<VertexId> {
    dag.topological_order().to_vec()
}
