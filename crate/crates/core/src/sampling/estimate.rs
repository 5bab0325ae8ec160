//! Self-normalized posterior estimation from weighted samples.
//!
//! Sums are kept relative to the largest log weight seen so far, so weights
//! far below machine range neither underflow nor overflow. Accumulators merge
//! associatively, which lets shards be reduced in any grouping.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Evidence};
use crate::sampling::importance::WeightedSample;

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorEstimate {
    pub marginals: BTreeMap<VertexId, Vec<f64>>,
    /// Arithmetic mean of the importance weights, an unbiased estimate of Pr(e).
    pub evidence_prob_estimate: f64,
    pub sample_count: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct PosteriorAccumulator {
    vertices: Vec<VertexId>,
    offsets: Vec<usize>,
    arities: Vec<usize>,
    sums: Vec<f64>,
    total: f64,
    log_scale: f64,
    count: usize,
}

impl PosteriorAccumulator {
    pub fn new(bn: &BayesianNetwork, e: &Evidence) -> Self {
        let vertices: Vec<VertexId> = bn.dag().vertices().filter(|v| !e.contains(*v)).collect();
        let arities: Vec<usize> = vertices.iter().map(|&v| bn.arity(v)).collect();
        let mut offsets = Vec::with_capacity(vertices.len());
        let mut size = 0;
        for a in &arities {
            offsets.push(size);
            size += a;
        }
        PosteriorAccumulator {
            vertices,
            offsets,
            arities,
            sums: vec![0.0; size],
            total: 0.0,
            log_scale: f64::NEG_INFINITY,
            count: 0,
        }
    }

    fn rescale(&mut self, log_scale: f64) {
        if log_scale > self.log_scale {
            let factor = (self.log_scale - log_scale).exp();
            self.sums.iter_mut().for_each(|s| *s *= factor);
            self.total *= factor;
            self.log_scale = log_scale;
        }
    }

    pub fn add(&mut self, sample: &WeightedSample) -> Result<()> {
        if sample.log_weight.is_nan() || sample.log_weight == f64::INFINITY {
            return Err(Error::NonFiniteWeight);
        }
        self.count += 1;
        if sample.log_weight == f64::NEG_INFINITY {
            return Ok(());
        }
        self.rescale(sample.log_weight);
        let w = (sample.log_weight - self.log_scale).exp();
        self.total += w;
        for (i, v) in self.vertices.iter().enumerate() {
            self.sums[self.offsets[i] + sample.assignment[v.index()]] += w;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &PosteriorAccumulator) {
        assert_eq!(self.vertices, other.vertices, "accumulators over different vertices");
        self.count += other.count;
        if other.log_scale == f64::NEG_INFINITY {
            return;
        }
        self.rescale(other.log_scale);
        let factor = (other.log_scale - self.log_scale).exp();
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b * factor;
        }
        self.total += other.total * factor;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self, seed: Option<u64>) -> Result<PosteriorEstimate> {
        if self.total <= 0.0 {
            return Err(Error::DegenerateEstimate);
        }
        let marginals = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let slot = &self.sums[self.offsets[i]..self.offsets[i] + self.arities[i]];
                let mass: f64 = slot.iter().sum();
                (v, slot.iter().map(|s| s / mass).collect())
            })
            .collect();
        let mean = (self.log_scale + (self.total / self.count as f64).ln()).exp();
        Ok(PosteriorEstimate {
            marginals,
            evidence_prob_estimate: mean,
            sample_count: self.count,
            seed,
        })
    }
}

pub fn estimate(bn: &BayesianNetwork, e: &Evidence, samples: &[WeightedSample]) -> Result<PosteriorEstimate> {
    let mut acc = PosteriorAccumulator::new(bn, e);
    for s in samples {
        acc.add(s)?;
    }
    acc.finish(None)
}
