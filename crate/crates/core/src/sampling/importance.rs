//! Factored importance functions and forward sampling.

use rand::Rng;

use crate::config::strides;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Cpt, Evidence, ROW_SUM_TOLERANCE};

/// One conditional table of an importance function.
///
/// Parents may include observed vertices; their state is read from the
/// evidence during sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    vertex: VertexId,
    parents: Vec<VertexId>,
    parent_arities: Vec<usize>,
    strides: Vec<usize>,
    arity: usize,
    probs: Vec<f64>,
}

impl Factor {
    pub fn new(
        vertex: VertexId,
        parents: Vec<VertexId>,
        parent_arities: Vec<usize>,
        arity: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let rows: usize = parent_arities.iter().product();
        if parents.len() != parent_arities.len() || probs.len() != rows * arity {
            return Err(Error::ShapeMismatch(format!(
                "factor for {vertex}: {} parents, {} arities, {} entries",
                parents.len(),
                parent_arities.len(),
                probs.len()
            )));
        }
        let factor = Factor {
            vertex,
            strides: strides(&parent_arities),
            parents,
            parent_arities,
            arity,
            probs,
        };
        for r in 0..factor.row_count() {
            check_row(vertex, factor.row(r))?;
        }
        Ok(factor)
    }

    pub fn from_cpt(cpt: &Cpt) -> Self {
        Factor {
            vertex: cpt.owner(),
            parents: cpt.parents().to_vec(),
            parent_arities: cpt.parent_arities().to_vec(),
            strides: strides(cpt.parent_arities()),
            arity: cpt.arity(),
            probs: cpt.probs().to_vec(),
        }
    }

    pub fn vertex(&self) -> VertexId {
        self.vertex
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

    pub fn row(&self, r: usize) -> &[f64] {
        &self.probs[r * self.arity..(r + 1) * self.arity]
    }

    pub fn set_row(&mut self, r: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.arity {
            return Err(Error::ShapeMismatch(format!(
                "row of length {} for arity {}",
                row.len(),
                self.arity
            )));
        }
        check_row(self.vertex, row)?;
        self.probs[r * self.arity..(r + 1) * self.arity].copy_from_slice(row);
        Ok(())
    }

    /// Parent states of row `r`, in parent order.
    pub fn decode_row(&self, r: usize) -> Vec<usize> {
        crate::config::decode_index(&self.parent_arities, r)
    }

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
        self.probs[self.row_index(assignment) * self.arity + assignment[self.vertex.index()]]
    }
}

fn check_row(vertex: VertexId, row: &[f64]) -> Result<()> {
    let sum: f64 = row.iter().sum();
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::InvalidCpt {
            vertex,
            reason: format!("importance row {row:?} is not a distribution"),
        });
    }
    Ok(())
}

/// A factored sampling distribution over the unobserved vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceFunction {
    n_vertices: usize,
    order: Vec<VertexId>,
    factors: Vec<Option<Factor>>,
    evidence: Evidence,
}

impl ImportanceFunction {
    /// `factors` is indexed by vertex; observed vertices must map to `None`.
    pub fn new(
        n_vertices: usize,
        order: Vec<VertexId>,
        factors: Vec<Option<Factor>>,
        evidence: Evidence,
    ) -> Result<Self> {
        if factors.len() != n_vertices {
            return Err(Error::ShapeMismatch("one factor slot per vertex".into()));
        }
        let mut placed = vec![false; n_vertices];
        for (v, _) in evidence.iter() {
            placed[v.index()] = true;
        }
        for &v in &order {
            let f = factors[v.index()].as_ref().ok_or(Error::MissingAssignment(v))?;
            if let Some(p) = f.parents().iter().find(|p| !placed[p.index()]) {
                return Err(Error::Structure(format!(
                    "factor of {v} conditions on {p}, which is sampled later"
                )));
            }
            placed[v.index()] = true;
        }
        if let Some(missing) = placed.iter().position(|p| !p) {
            return Err(Error::MissingAssignment(VertexId(missing)));
        }
        Ok(ImportanceFunction {
            n_vertices,
            order,
            factors,
            evidence,
        })
    }

    /// The prior CPTs with evidence clamped: plain likelihood weighting.
    pub fn likelihood_weighting(bn: &BayesianNetwork, e: &Evidence) -> Self {
        let order = e.free_vertices(bn);
        let factors = bn
            .dag()
            .vertices()
            .map(|v| (!e.contains(v)).then(|| Factor::from_cpt(bn.cpt(v))))
            .collect();
        ImportanceFunction::new(bn.len(), order, factors, e.clone()).expect("prior order is valid")
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn factor(&self, v: VertexId) -> Option<&Factor> {
        self.factors.get(v.index()).and_then(Option::as_ref)
    }

    pub fn factor_mut(&mut self, v: VertexId) -> Option<&mut Factor> {
        self.factors.get_mut(v.index()).and_then(Option::as_mut)
    }

    pub fn factors(&self) -> impl Iterator<Item = &Factor> {
        self.order.iter().filter_map(|v| self.factors[v.index()].as_ref())
    }

    /// ln f(x) for a full assignment (evidence positions ignored).
    pub fn log_density(&self, assignment: &[usize]) -> f64 {
        self.order
            .iter()
            .map(|v| self.factors[v.index()].as_ref().expect("factor").prob(assignment).ln())
            .sum()
    }

    pub fn density(&self, assignment: &[usize]) -> f64 {
        self.log_density(assignment).exp()
    }
}

/// One draw over the unobserved vertices with its importance weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    /// Full assignment indexed by vertex; observed vertices hold their evidence state.
    pub assignment: Vec<usize>,
    /// ln Pr(x, e) − ln f(x).
    pub log_weight: f64,
}

impl WeightedSample {
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// Categorical draw; rounding slack at the top falls to the last positive entry.
pub(crate) fn sample_index<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

pub fn draw_sample<R: Rng + ?Sized>(
    f: &ImportanceFunction,
    bn: &BayesianNetwork,
    rng: &mut R,
) -> Result<WeightedSample> {
    let mut assignment = f.evidence.seed_assignment(f.n_vertices);
    let mut log_f = 0.0;
    for &v in &f.order {
        let factor = f.factors[v.index()].as_ref().expect("factor");
        let row = factor.row(factor.row_index(&assignment));
        let s = sample_index(row, rng);
        assignment[v.index()] = s;
        log_f += row[s].ln();
    }
    if log_f == f64::NEG_INFINITY {
        return Err(Error::SupportViolation);
    }
    let log_weight = bn.log_joint(&assignment) - log_f;
    if log_weight.is_nan() || log_weight == f64::INFINITY {
        return Err(Error::NonFiniteWeight);
    }
    Ok(WeightedSample {
        assignment,
        log_weight,
    })
}
