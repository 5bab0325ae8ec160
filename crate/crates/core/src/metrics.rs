//! Error and divergence measures. All logarithms are natural.
//!
//! A divergence that comes out slightly negative from rounding (down to
//! `-1e-12`) is reported as 0; anything below that is a bug and panics.
//! Posterior mass over zero sampling density is reported as `+∞`.

use std::collections::BTreeMap;

use crate::config::Table;
use crate::error::{Error, Result};
use crate::exact::{ExactInference, PosteriorJoint};
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Evidence};
use crate::sampling::{ImportanceFunction, PosteriorEstimate};

pub const DEFAULT_BOUND_THRESHOLD: f64 = 0.1;
const NEGATIVE_SLACK: f64 = 1e-12;

fn clamp_divergence(value: f64) -> f64 {
    assert!(
        value >= -NEGATIVE_SLACK || value.is_nan(),
        "divergence {value} is negative beyond rounding"
    );
    value.max(0.0)
}

/// Root-mean-square error over every marginal entry:
/// `sqrt(Σ_i Σ_j (est_ij − exact_ij)² / Σ_i n_i)`.
pub fn mse(estimate: &PosteriorEstimate, oracle: &BTreeMap<VertexId, Vec<f64>>) -> Result<f64> {
    if estimate.marginals.len() != oracle.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} estimated variables against {} exact ones",
            estimate.marginals.len(),
            oracle.len()
        )));
    }
    let mut squares = 0.0;
    let mut entries = 0;
    for (v, exact) in oracle {
        let est = estimate
            .marginals
            .get(v)
            .ok_or_else(|| Error::ShapeMismatch(format!("no estimate for {v}")))?;
        if est.len() != exact.len() {
            return Err(Error::ShapeMismatch(format!("state count of {v} differs")));
        }
        squares += est.iter().zip(exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        entries += exact.len();
    }
    if entries == 0 {
        return Ok(0.0);
    }
    Ok((squares / entries as f64).sqrt())
}

/// Exact posterior marginals of every unobserved vertex.
pub fn exact_marginals(joint: &PosteriorJoint) -> Result<BTreeMap<VertexId, Vec<f64>>> {
    joint.free().iter().map(|&v| Ok((v, joint.marginal(v)?))).collect()
}

/// KL(Pr_e ‖ f) by enumerating the posterior.
pub fn posterior_kl(bn: &BayesianNetwork, e: &Evidence, f: &ImportanceFunction, cap: u64) -> Result<f64> {
    let joint = ExactInference::new(bn).with_cap(cap).posterior_joint(e)?;
    Ok(posterior_kl_with_joint(&joint, f))
}

pub fn posterior_kl_with_joint(joint: &PosteriorJoint, f: &ImportanceFunction) -> f64 {
    let mut kl = 0.0;
    joint.for_each(|assignment, p| {
        if p > 0.0 {
            kl += p * (p.ln() - f.log_density(assignment));
        }
    });
    clamp_divergence(kl)
}

/// The four summands of the structure-preserving bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PostKld {
    /// Σ_X Σ Pr(x, π(x) | e) ln Pr(x | π(x))
    pub prior_cross: f64,
    /// Σ_X Σ Pr(x, π(x) | e) ln 1/Pr(x | π(x), e)
    pub posterior_entropy: f64,
    /// Σ Pr(π(e) | e) ln Π_i Pr(e_i | π(e_i))
    pub evidence_likelihood: f64,
    /// −ln Pr(e)
    pub log_normalizer: f64,
}

impl PostKld {
    pub fn total(&self) -> f64 {
        clamp_divergence(self.prior_cross + self.posterior_entropy + self.evidence_likelihood + self.log_normalizer)
    }
}

/// Smallest KL(Pr_e ‖ f) attainable by an importance function that keeps
/// the original parent sets. Computed family by family.
pub fn post_kld(bn: &BayesianNetwork, e: &Evidence, cap: u64) -> Result<f64> {
    Ok(post_kld_terms(bn, e, cap)?.total())
}

pub fn post_kld_terms(bn: &BayesianNetwork, e: &Evidence, cap: u64) -> Result<PostKld> {
    let joint = ExactInference::new(bn).with_cap(cap).posterior_joint(e)?;
    post_kld_with_joint(bn, &joint)
}

/// `x ln y` with `0 ln 0 = 0`; positive mass on a zero factor gives `−∞`.
fn mass_log(mass: f64, prob: f64) -> f64 {
    if mass == 0.0 {
        0.0
    } else {
        mass * prob.ln()
    }
}

pub fn post_kld_with_joint(bn: &BayesianNetwork, joint: &PosteriorJoint) -> Result<PostKld> {
    let e = joint.evidence();
    let dag = bn.dag();
    let mut prior_cross = 0.0;
    let mut posterior_entropy = 0.0;

    for &x in joint.free() {
        let mut family = vec![x];
        family.extend_from_slice(dag.parents(x));
        let table = joint.marginal_table(&family)?;
        let arity = bn.arity(x);
        let rows = table.values().len() / arity;
        let cpt = bn.cpt(x);
        let conditional = family_conditional(&table, arity);
        for (r, row) in conditional.iter().enumerate().take(rows) {
            for s in 0..arity {
                // the family table is laid out with x as the slowest digit
                let mass = table.values()[s * rows + r];
                prior_cross += mass_log(mass, cpt.probs()[r * arity + s]);
                if let Some(row) = row {
                    posterior_entropy -= mass_log(mass, row[s]);
                }
            }
        }
    }

    let observed = e.vertices();
    let parents: Vec<VertexId> = {
        let mut p: Vec<VertexId> = dag.combined_parents(&observed)?.into_iter().collect();
        dag.sort_by_order(&mut p);
        p
    };
    let table = joint.marginal_table(&parents)?;
    let mut assignment = e.seed_assignment(bn.len());
    let mut evidence_likelihood = 0.0;
    for (r, &mass) in table.values().iter().enumerate() {
        for (p, s) in parents.iter().zip(crate::config::decode_index(table.arities(), r)) {
            assignment[p.index()] = s;
        }
        let log_lik: f64 = observed
            .iter()
            .map(|&ev| bn.cpt(ev).log_prob(&assignment))
            .sum();
        if mass > 0.0 {
            evidence_likelihood += mass * log_lik;
        }
    }

    Ok(PostKld {
        prior_cross,
        posterior_entropy,
        evidence_likelihood,
        log_normalizer: -joint.evidence_probability().ln(),
    })
}

/// Pr(x | parents, e) per parent row of a family table over `[x] ++ parents`;
/// `None` where the parent row has no posterior mass.
fn family_conditional(table: &Table, arity: usize) -> Vec<Option<Vec<f64>>> {
    let rows = table.values().len() / arity;
    (0..rows)
        .map(|r| {
            let row: Vec<f64> = (0..arity).map(|s| table.values()[s * rows + r]).collect();
            let total: f64 = row.iter().sum();
            (total > 0.0).then(|| row.iter().map(|p| p / total).collect())
        })
        .collect()
}

/// True when the structure-preserving bound exceeds `threshold`.
pub fn classify_bound_regime(bn: &BayesianNetwork, e: &Evidence, threshold: f64, cap: u64) -> Result<bool> {
    Ok(post_kld(bn, e, cap)? > threshold)
}

/// One row of an experiment table.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub network_id: String,
    pub evidence_id: String,
    /// `None` when the exact oracle was out of reach.
    pub mse: Option<f64>,
    pub posterior_kl: Option<f64>,
    pub post_kld: Option<f64>,
    pub evidence_prob_estimate: f64,
    pub sample_count: usize,
    pub samples_drawn: usize,
    pub seed: u64,
}
