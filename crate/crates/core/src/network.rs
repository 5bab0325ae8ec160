//! Discrete Bayesian networks: variables, conditional probability tables and evidence.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::config::{strides, Configuration};
use crate::error::{Error, Result};
use crate::graph::{Dag, VertexId};

/// Row sums within this distance of 1 are accepted unchanged.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Row sums within this distance of 1 are renormalized with a warning.
pub const RENORMALIZE_BAND: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    id: VertexId,
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new(id: VertexId, name: impl Into<String>, states: Vec<String>) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: &str| Error::InvalidVariable {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if name.is_empty() {
            return Err(invalid("empty name"));
        }
        if states.len() < 2 {
            return Err(invalid("needs at least two states"));
        }
        let unique: BTreeSet<&String> = states.iter().collect();
        if unique.len() != states.len() {
            return Err(invalid("duplicate state label"));
        }
        Ok(Variable { id, name, states })
    }

    pub fn id(&self) -> VertexId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn arity(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Conditional probability table of one vertex.
///
/// Rows follow the configuration order of `parents` (last parent fastest);
/// each row holds `arity` probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    owner: VertexId,
    parents: Vec<VertexId>,
    parent_arities: Vec<usize>,
    strides: Vec<usize>,
    arity: usize,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl Cpt {
    /// Validates and, inside the renormalization band, repairs the table.
    pub fn new(
        owner: VertexId,
        parents: Vec<VertexId>,
        parent_arities: Vec<usize>,
        arity: usize,
        mut probs: Vec<f64>,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidCpt {
            vertex: owner,
            reason,
        };
        if parents.len() != parent_arities.len() {
            return Err(invalid("parent arity list does not match parents".into()));
        }
        let rows: usize = parent_arities.iter().product();
        if probs.len() != rows * arity {
            return Err(invalid(format!(
                "expected {rows} rows of {arity} entries, got {} values",
                probs.len()
            )));
        }
        for (r, row) in probs.chunks_mut(arity).enumerate() {
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
                return Err(invalid(format!("row {r} has entry {p} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            let err = (sum - 1.0).abs();
            if err > RENORMALIZE_BAND {
                return Err(invalid(format!("row {r} sums to {sum}")));
            }
            if err > ROW_SUM_TOLERANCE {
                warn!("vertex {owner}: row {r} sums to {sum}; renormalizing");
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        let strides = strides(&parent_arities);
        Ok(Cpt {
            owner,
            parents,
            parent_arities,
            strides,
            arity,
            probs,
            log_probs,
        })
    }

    pub fn owner(&self) -> VertexId {
        self.owner
    }

    pub fn parents(&self) -> &[VertexId] {
        &self.parents
    }

    pub fn parent_arities(&self) -> &[usize] {
        &self.parent_arities
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn row_count(&self) -> usize {
        self.probs.len() / self.arity
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.probs[index * self.arity..(index + 1) * self.arity]
    }

    /// Row index for a full assignment indexed by vertex.
    #[inline]
    pub fn row_index(&self, assignment: &[usize]) -> usize {
        self.parents
            .iter()
            .zip(&self.strides)
            .map(|(p, k)| assignment[p.index()] * k)
            .sum()
    }

    #[inline]
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.probs[self.row_index(assignment) * self.arity + assignment[self.owner.index()]]
    }

    #[inline]
    pub fn log_prob(&self, assignment: &[usize]) -> f64 {
        self.log_probs[self.row_index(assignment) * self.arity + assignment[self.owner.index()]]
    }
}

/// A DAG over discrete variables with one CPT per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesianNetwork {
    name: String,
    variables: Vec<Variable>,
    dag: Dag,
    cpts: Vec<Cpt>,
}

impl BayesianNetwork {
    /// `tables[v]` is the flat CPT of vertex `v` laid out over `parents[v]`.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        parents: Vec<Vec<VertexId>>,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = variables.len();
        if parents.len() != n || tables.len() != n {
            return Err(Error::Structure(format!(
                "{n} variables, {} parent lists, {} tables",
                parents.len(),
                tables.len()
            )));
        }
        let mut names = BTreeSet::new();
        for (i, var) in variables.iter().enumerate() {
            if var.id() != VertexId(i) {
                return Err(Error::Structure(format!(
                    "variable `{}` has id {} at position {i}",
                    var.name(),
                    var.id()
                )));
            }
            if !names.insert(var.name()) {
                return Err(Error::Structure(format!("duplicate variable `{}`", var.name())));
            }
        }
        let dag = Dag::new(parents)?;
        let cpts = tables
            .into_iter()
            .enumerate()
            .map(|(i, probs)| {
                let owner = VertexId(i);
                let ps = dag.parents(owner).to_vec();
                let arities = ps.iter().map(|p| variables[p.index()].arity()).collect();
                Cpt::new(owner, ps, arities, variables[i].arity(), probs)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BayesianNetwork {
            name: name.into(),
            variables,
            dag,
            cpts,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VertexId) -> &Variable {
        &self.variables[v.index()]
    }

    pub fn arity(&self, v: VertexId) -> usize {
        self.variables[v.index()].arity()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::arity).collect()
    }

    pub fn cpt(&self, v: VertexId) -> &Cpt {
        &self.cpts[v.index()]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.variables.iter().find(|v| v.name() == name).map(Variable::id)
    }

    pub fn vertex_or_err(&self, name: &str) -> Result<VertexId> {
        self.vertex(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// The stored CPT row of `x` at a parent configuration.
    pub fn cpt_row(&self, x: VertexId, parent_config: &Configuration) -> Result<&[f64]> {
        self.dag.check(x)?;
        let cpt = self.cpt(x);
        let mut index = 0;
        for (&p, &k) in cpt.parents.iter().zip(&cpt.strides) {
            let s = parent_config.get(p).ok_or(Error::MissingAssignment(p))?;
            if s >= self.arity(p) {
                return Err(Error::StateOutOfRange {
                    vertex: p,
                    state: s,
                    arity: self.arity(p),
                });
            }
            index += s * k;
        }
        Ok(cpt.row(index))
    }

    /// ln Pr(assignment) for a full assignment indexed by vertex.
    pub fn log_joint(&self, assignment: &[usize]) -> f64 {
        self.cpts.iter().map(|c| c.log_prob(assignment)).sum()
    }

    /// True if any CPT holds an exact zero.
    pub fn has_zero_entries(&self) -> bool {
        self.cpts.iter().any(|c| c.probs.contains(&0.0))
    }
}

/// Observed states for a subset of vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Evidence {
    assignments: BTreeMap<VertexId, usize>,
}

impl Evidence {
    pub fn empty() -> Self {
        Evidence::default()
    }

    pub fn new(bn: &BayesianNetwork, pairs: impl IntoIterator<Item = (VertexId, usize)>) -> Result<Self> {
        let mut e = Evidence::empty();
        for (v, s) in pairs {
            e.insert(bn, v, s)?;
        }
        Ok(e)
    }

    /// Builds evidence from `(variable name, state label)` pairs.
    pub fn from_labels<'a>(
        bn: &BayesianNetwork,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut e = Evidence::empty();
        for (name, label) in pairs {
            let v = bn.vertex_or_err(name)?;
            let s = bn.variable(v).state_index(label).ok_or_else(|| Error::UnknownState {
                variable: name.to_string(),
                state: label.to_string(),
            })?;
            e.insert(bn, v, s)?;
        }
        Ok(e)
    }

    pub fn insert(&mut self, bn: &BayesianNetwork, v: VertexId, state: usize) -> Result<()> {
        bn.dag().check(v)?;
        if state >= bn.arity(v) {
            return Err(Error::StateOutOfRange {
                vertex: v,
                state,
                arity: bn.arity(v),
            });
        }
        if self.assignments.insert(v, state).is_some() {
            return Err(Error::Structure(format!("evidence on {v} given twice")));
        }
        Ok(())
    }

    pub fn get(&self, v: VertexId) -> Option<usize> {
        self.assignments.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.assignments.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.assignments.keys().copied().collect()
    }

    /// Unobserved vertices in canonical topological order.
    pub fn free_vertices(&self, bn: &BayesianNetwork) -> Vec<VertexId> {
        bn.dag()
            .topological_order()
            .iter()
            .copied()
            .filter(|v| !self.contains(*v))
            .collect()
    }

    /// A full assignment vector with evidence states filled in and zeros elsewhere.
    pub fn seed_assignment(&self, n: usize) -> Vec<usize> {
        let mut a = vec![0; n];
        for (v, s) in self.iter() {
            a[v.index()] = s;
        }
        a
    }
}

/// Incremental construction of networks by variable name, used for fixtures.
#[derive(Default)]
pub struct NetworkBuilder {
    name: String,
    variables: Vec<(String, Vec<String>)>,
    parents: BTreeMap<String, Vec<String>>,
    tables: BTreeMap<String, Vec<f64>>,
}

impl NetworkBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetworkBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn variable(mut self, name: &str, states: &[&str]) -> Self {
        self.variables
            .push((name.to_string(), states.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn binary(self, name: &str) -> Self {
        self.variable(name, &["0", "1"])
    }

    pub fn parents(mut self, name: &str, parents: &[&str]) -> Self {
        self.parents
            .insert(name.to_string(), parents.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn cpt(mut self, name: &str, probs: &[f64]) -> Self {
        self.tables.insert(name.to_string(), probs.to_vec());
        self
    }

    pub fn build(self) -> Result<BayesianNetwork> {
        let index: BTreeMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i))
            .collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .map(|&i| VertexId(i))
                .ok_or_else(|| Error::UnknownVariable(n.to_string()))
        };
        let mut variables = Vec::new();
        let mut parents = Vec::new();
        let mut tables = Vec::new();
        for (i, (name, states)) in self.variables.iter().enumerate() {
            variables.push(Variable::new(VertexId(i), name.clone(), states.clone())?);
            let ps = match self.parents.get(name) {
                Some(ps) => ps.iter().map(|p| lookup(p)).collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            parents.push(ps);
            tables.push(
                self.tables
                    .get(name)
                    .cloned()
                    .ok_or_else(|| Error::Structure(format!("no CPT for `{name}`")))?,
            );
        }
        BayesianNetwork::new(self.name, variables, parents, tables)
    }
}
