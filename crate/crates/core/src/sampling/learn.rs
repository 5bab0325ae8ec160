//! Weighted sufficient statistics for re-estimating importance tables.
//!
//! Weights enter normalized so that the mean weight of the accumulated
//! samples is one: the counts then read as effective sample counts and a
//! pseudocount is measured in the same unit regardless of how small Pr(e)
//! is. Like the posterior accumulator, sums are stored relative to the
//! running maximum log weight and merge associatively.

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::sampling::importance::{ImportanceFunction, WeightedSample};

#[derive(Clone, Debug)]
pub struct WeightedCounts {
    vertices: Vec<VertexId>,
    offsets: Vec<usize>,
    arities: Vec<usize>,
    sums: Vec<f64>,
    total: f64,
    log_scale: f64,
    count: usize,
}

impl WeightedCounts {
    /// Counts laid out over the current parent sets of `vertices` in `f`.
    pub fn new(f: &ImportanceFunction, vertices: &[VertexId]) -> Self {
        let mut offsets = Vec::with_capacity(vertices.len());
        let mut arities = Vec::with_capacity(vertices.len());
        let mut size = 0;
        for &v in vertices {
            let factor = f.factor(v).expect("learnable vertex must be sampled");
            offsets.push(size);
            arities.push(factor.arity());
            size += factor.probs().len();
        }
        WeightedCounts {
            vertices: vertices.to_vec(),
            offsets,
            arities,
            sums: vec![0.0; size],
            total: 0.0,
            log_scale: f64::NEG_INFINITY,
            count: 0,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn has_mass(&self) -> bool {
        self.total > 0.0
    }

    fn rescale(&mut self, log_scale: f64) {
        if log_scale > self.log_scale {
            let factor = (self.log_scale - log_scale).exp();
            self.sums.iter_mut().for_each(|s| *s *= factor);
            self.total *= factor;
            self.log_scale = log_scale;
        }
    }

    pub fn add(&mut self, f: &ImportanceFunction, sample: &WeightedSample) -> Result<()> {
        let lw = sample.log_weight;
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::NonFiniteWeight);
        }
        self.count += 1;
        if lw == f64::NEG_INFINITY {
            return Ok(());
        }
        self.rescale(lw);
        let w = (lw - self.log_scale).exp();
        self.total += w;
        for (i, &v) in self.vertices.iter().enumerate() {
            let factor = f.factor(v).expect("learnable vertex must be sampled");
            let r = factor.row_index(&sample.assignment);
            self.sums[self.offsets[i] + r * self.arities[i] + sample.assignment[v.index()]] += w;
        }
        Ok(())
    }

    /// Adds a sample given by its linear weight.
    pub fn add_weighted(&mut self, f: &ImportanceFunction, assignment: &[usize], weight: f64) -> Result<()> {
        if weight < 0.0 {
            return Err(Error::NegativeWeight(weight));
        }
        if !weight.is_finite() {
            return Err(Error::NonFiniteWeight);
        }
        let sample = WeightedSample {
            assignment: assignment.to_vec(),
            log_weight: weight.ln(),
        };
        self.add(f, &sample)
    }

    pub fn merge(&mut self, other: &WeightedCounts) {
        assert_eq!(self.vertices, other.vertices, "counts over different vertices");
        assert_eq!(self.sums.len(), other.sums.len(), "counts over different layouts");
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

    /// Normalized weighted counts of row `r` of the `i`-th learnable vertex.
    pub fn row_counts(&self, i: usize, r: usize) -> Vec<f64> {
        let arity = self.arities[i];
        let start = self.offsets[i] + r * arity;
        let norm = if self.total > 0.0 {
            self.count as f64 / self.total
        } else {
            0.0
        };
        self.sums[start..start + arity].iter().map(|s| s * norm).collect()
    }

    /// Smoothed estimate `(n(x, c) + α) / (n(c) + α·arity)`, or `None` when
    /// row `r` has received no weight.
    pub fn row_estimate(&self, i: usize, r: usize, pseudocount: f64) -> Option<Vec<f64>> {
        let counts = self.row_counts(i, r);
        let mass: f64 = counts.iter().sum();
        if mass <= 0.0 {
            return None;
        }
        let denom = mass + pseudocount * counts.len() as f64;
        let mut row: Vec<f64> = counts.iter().map(|c| (c + pseudocount) / denom).collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= sum);
        Some(row)
    }
}
