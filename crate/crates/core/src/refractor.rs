//! Evidence-driven structural rewrite of the sampling distribution.
//!
//! For every evidence vertex `E` and every in-scope ancestor `X` of `E`, the
//! parent set of `X` in the importance function is widened to
//! `(shield(X, E) \ {X}) ∪ π(X)`, minus observed vertices. All other
//! unobserved vertices keep their original parents; their prior CPT with
//! evidence parents clamped is already the correct posterior conditional.
//!
//! Tables start as FALLBACK copies of the prior rows and are replaced by
//! learned or oracle values later. Every added parent precedes its child in
//! the canonical order, so the rewritten structure stays acyclic.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::config::decode_index;
use crate::error::{Error, Result};
use crate::exact::PosteriorJoint;
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Evidence};
use crate::sampling::{Factor, ImportanceFunction, WeightedCounts, WeightedSample};
use crate::shield::{parent_set_from, shield_with_work};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefractorScope {
    /// Every unobserved ancestor of the evidence.
    FullAncestors,
    /// Only the combined parent set π(E).
    ParentsOfEvidence,
    Explicit(BTreeSet<VertexId>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryState {
    Learned,
    Fallback,
}

#[derive(Clone, Debug)]
pub struct RefractoredNetwork<'a> {
    base: &'a BayesianNetwork,
    evidence: Evidence,
    scope: BTreeSet<VertexId>,
    factors: Vec<Option<Factor>>,
    states: Vec<Vec<EntryState>>,
    absorbed: bool,
    work: usize,
}

/// Vertices selected by `scope`, validated against the evidence ancestors.
pub fn scope_vertices(bn: &BayesianNetwork, e: &Evidence, scope: &RefractorScope) -> Result<BTreeSet<VertexId>> {
    let dag = bn.dag();
    let observed = e.vertices();
    let ancestors: BTreeSet<VertexId> = dag
        .combined_ancestors(&observed)?
        .difference(&observed)
        .copied()
        .collect();
    Ok(match scope {
        RefractorScope::FullAncestors => ancestors,
        RefractorScope::ParentsOfEvidence => dag.combined_parents(&observed)?,
        RefractorScope::Explicit(set) => {
            for &v in set {
                dag.check(v)?;
                if !ancestors.contains(&v) {
                    let evidence = observed.iter().next().copied().unwrap_or(v);
                    return Err(Error::NotAncestor { vertex: v, evidence });
                }
            }
            set.clone()
        }
    })
}

pub fn refractor<'a>(
    bn: &'a BayesianNetwork,
    e: &Evidence,
    scope: &RefractorScope,
) -> Result<RefractoredNetwork<'a>> {
    let dag = bn.dag();
    let scope = scope_vertices(bn, e, scope)?;
    let mut work = 0;

    let mut expansions: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for (ev, _) in e.iter() {
        for &x in scope.iter().filter(|&&x| dag.is_ancestor(x, ev)) {
            let shield = shield_with_work(dag, x, ev, &mut work)?;
            expansions
                .entry(x)
                .or_default()
                .extend(parent_set_from(dag, &shield).into_iter().filter(|p| !e.contains(*p)));
        }
    }

    let mut factors = Vec::with_capacity(bn.len());
    let mut states = Vec::with_capacity(bn.len());
    for x in dag.vertices() {
        if e.contains(x) {
            factors.push(None);
            states.push(Vec::new());
            continue;
        }
        let mut parents: BTreeSet<VertexId> = dag.parents(x).iter().copied().collect();
        if let Some(extra) = expansions.get(&x) {
            parents.extend(extra.iter().copied());
        }
        let mut parents: Vec<VertexId> = parents.into_iter().collect();
        dag.sort_by_order(&mut parents);
        debug_assert!(parents.iter().all(|p| dag.position(*p) < dag.position(x)));
        let factor = fallback_factor(bn, e, x, parents)?;
        states.push(vec![EntryState::Fallback; factor.row_count()]);
        factors.push(Some(factor));
    }

    Ok(RefractoredNetwork {
        base: bn,
        evidence: e.clone(),
        scope,
        factors,
        states,
        absorbed: false,
        work,
    })
}

fn fallback_factor(bn: &BayesianNetwork, e: &Evidence, x: VertexId, parents: Vec<VertexId>) -> Result<Factor> {
    let arities: Vec<usize> = parents.iter().map(|&p| bn.arity(p)).collect();
    let rows: usize = arities.iter().product();
    let mut probs = Vec::with_capacity(rows * bn.arity(x));
    for r in 0..rows {
        probs.extend_from_slice(prior_row(bn, e, x, &parents, &decode_index(&arities, r)));
    }
    Factor::new(x, parents, arities, bn.arity(x), probs)
}

/// Prior CPT row of `x` with `parents` in `states`; base parents missing
/// from `parents` must be observed.
fn prior_row<'b>(bn: &'b BayesianNetwork, e: &Evidence, x: VertexId, parents: &[VertexId], states: &[usize]) -> &'b [f64] {
    let mut assignment = e.seed_assignment(bn.len());
    for (p, &s) in parents.iter().zip(states) {
        assignment[p.index()] = s;
    }
    debug_assert!(bn.dag().parents(x).iter().all(|p| parents.contains(p) || e.contains(*p)));
    let cpt = bn.cpt(x);
    cpt.row(cpt.row_index(&assignment))
}

impl<'a> RefractoredNetwork<'a> {
    pub fn base(&self) -> &'a BayesianNetwork {
        self.base
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    /// The in-scope ancestors whose parent sets were (possibly) widened.
    pub fn expanded_vertices(&self) -> &BTreeSet<VertexId> {
        &self.scope
    }

    pub fn is_absorbed(&self) -> bool {
        self.absorbed
    }

    /// Queue operations spent in shield traversals.
    pub fn work(&self) -> usize {
        self.work
    }

    pub fn factor(&self, x: VertexId) -> Option<&Factor> {
        self.factors.get(x.index()).and_then(Option::as_ref)
    }

    /// π_e(x): the sampled (unobserved) parents of `x`, in canonical order.
    pub fn expanded_parents(&self, x: VertexId) -> Option<Vec<VertexId>> {
        self.factor(x).map(|f| {
            f.parents()
                .iter()
                .copied()
                .filter(|p| !self.evidence.contains(*p))
                .collect()
        })
    }

    pub fn entry_states(&self, x: VertexId) -> &[EntryState] {
        &self.states[x.index()]
    }

    /// The prior row a FALLBACK entry of `x` at row `r` holds.
    pub fn fallback_row(&self, x: VertexId, r: usize) -> Option<&'a [f64]> {
        let base = self.base;
        self.factor(x)
            .map(|f| prior_row(base, &self.evidence, x, f.parents(), &f.decode_row(r)))
    }

    /// Drops arcs out of observed vertices, slicing child tables at the
    /// observed states. Idempotent.
    pub fn absorb_evidence(&self) -> Result<RefractoredNetwork<'a>> {
        let mut out = self.clone();
        out.absorbed = true;
        for x in self.base.dag().vertices() {
            let Some(factor) = self.factor(x) else { continue };
            if !factor.parents().iter().any(|p| self.evidence.contains(*p)) {
                continue;
            }
            let keep: Vec<usize> = (0..factor.parents().len())
                .filter(|&i| !self.evidence.contains(factor.parents()[i]))
                .collect();
            let parents: Vec<VertexId> = keep.iter().map(|&i| factor.parents()[i]).collect();
            let arities: Vec<usize> = keep.iter().map(|&i| factor.parent_arities()[i]).collect();
            let rows: usize = arities.iter().product();

            let mut assignment = self.evidence.seed_assignment(self.base.len());
            let mut probs = Vec::with_capacity(rows * factor.arity());
            let mut states = Vec::with_capacity(rows);
            for r in 0..rows {
                for (p, s) in parents.iter().zip(decode_index(&arities, r)) {
                    assignment[p.index()] = s;
                }
                let src = factor.row_index(&assignment);
                probs.extend_from_slice(factor.row(src));
                states.push(self.states[x.index()][src]);
            }
            out.factors[x.index()] = Some(Factor::new(x, parents, arities, factor.arity(), probs)?);
            out.states[x.index()] = states;
        }
        Ok(out)
    }

    /// Weighted maximum-likelihood re-estimation of the expanded tables with
    /// a per-state pseudocount. Rows that receive no weight keep their
    /// current values and tags.
    pub fn learn_cpt(&self, samples: &[WeightedSample], pseudocount: f64) -> Result<RefractoredNetwork<'a>> {
        let f = self.importance_function();
        let vertices: Vec<VertexId> = self.scope.iter().copied().collect();
        let mut counts = WeightedCounts::new(&f, &vertices);
        for s in samples {
            counts.add(&f, s)?;
        }
        self.apply_counts(&counts, pseudocount)
    }

    pub fn apply_counts(&self, counts: &WeightedCounts, pseudocount: f64) -> Result<RefractoredNetwork<'a>> {
        let mut out = self.clone();
        if counts.count() > 0 && !counts.has_mass() {
            warn!("all learning weights are zero; tables left at their current values");
        }
        for (i, &x) in counts.vertices().iter().enumerate() {
            let factor = out.factors[x.index()].as_mut().ok_or(Error::ObservedVertex(x))?;
            for r in 0..factor.row_count() {
                if let Some(row) = counts.row_estimate(i, r, pseudocount) {
                    factor.set_row(r, &row)?;
                    out.states[x.index()][r] = EntryState::Learned;
                }
            }
        }
        Ok(out)
    }

    /// Replaces every table row with the exact posterior conditional
    /// Pr(x | parents, e). Rows whose parent configuration has zero
    /// posterior mass keep their current values.
    pub fn with_oracle_entries(&self, joint: &PosteriorJoint) -> Result<RefractoredNetwork<'a>> {
        if joint.evidence() != &self.evidence {
            return Err(Error::ShapeMismatch("oracle computed for different evidence".into()));
        }
        let mut out = self.clone();
        for x in self.base.dag().vertices() {
            let Some(factor) = out.factors[x.index()].as_mut() else { continue };
            let mut vars = vec![x];
            vars.extend_from_slice(factor.parents());
            let table = joint.marginal_table(&vars)?;
            for (r, row) in table.conditional_of_first().into_iter().enumerate() {
                if let Some(row) = row {
                    factor.set_row(r, &row)?;
                    out.states[x.index()][r] = EntryState::Learned;
                }
            }
        }
        Ok(out)
    }

    pub fn importance_function(&self) -> ImportanceFunction {
        ImportanceFunction::new(
            self.base.len(),
            self.evidence.free_vertices(self.base),
            self.factors.clone(),
            self.evidence.clone(),
        )
        .expect("refractored parents precede their children")
    }
}
