//! Brute-force exact inference.
//!
//! Every quantity is obtained by enumerating the configurations of the
//! unobserved vertices with the evidence clamped, accumulating the joint in
//! log space. Summation runs in enumeration order, so results are
//! deterministic.

use crate::config::{checked_count, strides, Configuration, Odometer, Table, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Evidence};

#[derive(Clone, Copy, Debug)]
pub struct ExactInference<'a> {
    bn: &'a BayesianNetwork,
    cap: u64,
}

impl<'a> ExactInference<'a> {
    pub fn new(bn: &'a BayesianNetwork) -> Self {
        ExactInference {
            bn,
            cap: DEFAULT_ENUM_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn network(&self) -> &'a BayesianNetwork {
        self.bn
    }

    /// Pr(config) for a configuration covering every vertex.
    pub fn joint_probability(&self, config: &Configuration) -> Result<f64> {
        let n = self.bn.len();
        let mut assignment = vec![usize::MAX; n];
        for (v, s) in config.iter() {
            self.bn.dag().check(v)?;
            if s >= self.bn.arity(v) {
                return Err(Error::StateOutOfRange {
                    vertex: v,
                    state: s,
                    arity: self.bn.arity(v),
                });
            }
            assignment[v.index()] = s;
        }
        if let Some(missing) = assignment.iter().position(|&s| s == usize::MAX) {
            return Err(Error::MissingAssignment(VertexId(missing)));
        }
        Ok(self.bn.log_joint(&assignment).exp())
    }

    /// Number of configurations of the unobserved vertices, checked against the cap.
    pub fn free_config_count(&self, e: &Evidence) -> Result<usize> {
        let arities: Vec<usize> = e.free_vertices(self.bn).iter().map(|&v| self.bn.arity(v)).collect();
        checked_count(&arities, self.cap)
    }

    /// Unnormalized Pr(x, e) over Cfg(V \ E) together with Pr(e).
    fn unnormalized(&self, e: &Evidence) -> Result<(Vec<VertexId>, Vec<f64>, f64)> {
        let free = e.free_vertices(self.bn);
        let arities: Vec<usize> = free.iter().map(|&v| self.bn.arity(v)).collect();
        let count = checked_count(&arities, self.cap)?;
        let mut assignment = e.seed_assignment(self.bn.len());
        let mut odometer = Odometer::new(arities);
        let mut mass = Vec::with_capacity(count);
        let mut total = 0.0;
        loop {
            for (v, &s) in free.iter().zip(odometer.digits()) {
                assignment[v.index()] = s;
            }
            let p = self.bn.log_joint(&assignment).exp();
            total += p;
            mass.push(p);
            if !odometer.advance() {
                break;
            }
        }
        Ok((free, mass, total))
    }

    /// Pr(e) = Σ over Cfg(V \ E) of Pr(x, e).
    pub fn evidence_probability(&self, e: &Evidence) -> Result<f64> {
        let (_, _, total) = self.unnormalized(e)?;
        if total <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        Ok(total)
    }

    pub fn posterior_joint(&self, e: &Evidence) -> Result<PosteriorJoint> {
        let (free, mut probs, total) = self.unnormalized(e)?;
        if total <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        probs.iter_mut().for_each(|p| *p /= total);
        let arities = free.iter().map(|&v| self.bn.arity(v)).collect();
        Ok(PosteriorJoint {
            free,
            arities,
            probs,
            evidence: e.clone(),
            evidence_probability: total,
            n_vertices: self.bn.len(),
            all_arities: self.bn.arities(),
        })
    }

    pub fn posterior_marginal(&self, x: VertexId, e: &Evidence) -> Result<Vec<f64>> {
        self.bn.dag().check(x)?;
        if e.contains(x) {
            return Err(Error::ObservedVertex(x));
        }
        self.posterior_joint(e)?.marginal(x)
    }

    /// Pr(x, parents | e) as a table over `[x] ++ parents`.
    pub fn family_posterior(&self, x: VertexId, parents: &[VertexId], e: &Evidence) -> Result<Table> {
        for &v in std::iter::once(&x).chain(parents) {
            self.bn.dag().check(v)?;
            if e.contains(v) {
                return Err(Error::ObservedVertex(v));
            }
        }
        let mut vars = vec![x];
        vars.extend_from_slice(parents);
        self.posterior_joint(e)?.marginal_table(&vars)
    }
}

/// The normalized posterior Pr(· | e) over Cfg(V \ E).
#[derive(Clone, Debug)]
pub struct PosteriorJoint {
    free: Vec<VertexId>,
    arities: Vec<usize>,
    probs: Vec<f64>,
    evidence: Evidence,
    evidence_probability: f64,
    n_vertices: usize,
    all_arities: Vec<usize>,
}

impl PosteriorJoint {
    /// Unobserved vertices in canonical order; also the table's variable order.
    pub fn free(&self) -> &[VertexId] {
        &self.free
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn evidence_probability(&self) -> f64 {
        self.evidence_probability
    }

    pub fn as_table(&self) -> Table {
        let mut t = Table::zeros(self.free.clone(), self.arities.clone());
        t.values_mut().copy_from_slice(&self.probs);
        t
    }

    /// Visits each configuration as a full assignment (evidence included) with its probability.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], f64)) {
        let mut assignment = self.evidence.seed_assignment(self.n_vertices);
        let mut odometer = Odometer::new(self.arities.clone());
        for &p in &self.probs {
            for (v, &s) in self.free.iter().zip(odometer.digits()) {
                assignment[v.index()] = s;
            }
            f(&assignment, p);
            odometer.advance();
        }
    }

    pub fn marginal(&self, x: VertexId) -> Result<Vec<f64>> {
        Ok(self.marginal_table(&[x])?.values().to_vec())
    }

    /// Marginal over `vars`, which may include observed vertices (their
    /// mass sits entirely on the observed state).
    pub fn marginal_table(&self, vars: &[VertexId]) -> Result<Table> {
        let arities: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.all_arities
                    .get(v.index())
                    .copied()
                    .ok_or(Error::UnknownVertex(*v))
            })
            .collect::<Result<_>>()?;
        let out_strides = strides(&arities);
        let mut out = Table::zeros(vars.to_vec(), arities);
        let values = out.values_mut();
        self.for_each(|assignment, p| {
            let idx: usize = vars
                .iter()
                .zip(&out_strides)
                .map(|(v, k)| assignment[v.index()] * k)
                .sum();
            values[idx] += p;
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn chain3_evidence(bn: &BayesianNetwork) -> Evidence {
        Evidence::from_labels(bn, [("C", "1")]).unwrap()
    }

    #[test]
    fn chain3_joint() {
        let bn = fixtures::chain3();
        let cfg = Configuration::new(
            vec![VertexId(0), VertexId(1), VertexId(2)],
            vec![1, 1, 1],
        )
        .unwrap();
        let p = ExactInference::new(&bn).joint_probability(&cfg).unwrap();
        assert!((p - 0.189).abs() < 1e-12);
        let partial = Configuration::new(vec![VertexId(0)], vec![1]).unwrap();
        assert!(ExactInference::new(&bn).joint_probability(&partial).is_err());
    }

    #[test]
    fn chain3_evidence_and_posterior() {
        let bn = fixtures::chain3();
        let e = chain3_evidence(&bn);
        let exact = ExactInference::new(&bn);
        assert!((exact.evidence_probability(&e).unwrap() - 0.575).abs() < 1e-12);
        assert!((exact.evidence_probability(&Evidence::empty()).unwrap() - 1.0).abs() < 1e-12);
        let b = exact.posterior_marginal(VertexId(1), &e).unwrap();
        assert!((b[1] - 0.9 * 0.35 / 0.575).abs() < 1e-9);
        assert!(matches!(
            exact.posterior_marginal(VertexId(2), &e),
            Err(Error::ObservedVertex(_))
        ));
        let joint = exact.posterior_joint(&e).unwrap();
        assert_eq!(joint.probs().len(), 4);
        assert!((joint.as_table().get(&[1, 1]) - 0.189 / 0.575).abs() < 1e-12);
    }

    #[test]
    fn impossible_evidence() {
        let bn = crate::network::NetworkBuilder::new("det")
            .binary("A")
            .binary("B")
            .parents("B", &["A"])
            .cpt("A", &[1.0, 0.0])
            .cpt("B", &[1.0, 0.0, 0.0, 1.0])
            .build()
            .unwrap();
        let e = Evidence::from_labels(&bn, [("B", "1")]).unwrap();
        assert_eq!(
            ExactInference::new(&bn).evidence_probability(&e),
            Err(Error::ImpossibleEvidence)
        );
    }

    #[test]
    fn family_posterior_reduces_to_marginal() {
        let bn = fixtures::chain3();
        let e = chain3_evidence(&bn);
        let exact = ExactInference::new(&bn);
        let fam = exact.family_posterior(VertexId(1), &[VertexId(0)], &e).unwrap();
        assert_eq!(fam.values().len(), 4);
        assert!((fam.sum() - 1.0).abs() < 1e-12);
        let alone = exact.family_posterior(VertexId(1), &[], &e).unwrap();
        let marginal = exact.posterior_marginal(VertexId(1), &e).unwrap();
        assert_eq!(alone.values(), marginal.as_slice());
        let prefix = fam.marginal_prefix(1);
        for (a, b) in prefix.values().iter().zip(&marginal) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity() {
        let bn = fixtures::chain3();
        let exact = ExactInference::new(&bn).with_cap(4);
        assert!(matches!(
            exact.evidence_probability(&Evidence::empty()),
            Err(Error::Capacity { .. })
        ));
        assert!(exact.evidence_probability(&chain3_evidence(&bn)).is_ok());
    }
}
