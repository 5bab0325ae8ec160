//! Configurations and their enumeration.
//!
//! Enumeration is lexicographic in state index with the last variable varying
//! fastest. CPT rows, probability tables and the network file format all
//! share this layout.

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::network::Variable;

/// Default upper bound on the number of configurations any enumeration may visit.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 26;

/// An assignment of states to an explicit, ordered list of vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    vars: Vec<VertexId>,
    states: Vec<usize>,
}

impl Configuration {
    pub fn new(vars: Vec<VertexId>, states: Vec<usize>) -> Result<Self> {
        if vars.len() != states.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} vertices but {} states",
                vars.len(),
                states.len()
            )));
        }
        Ok(Configuration { vars, states })
    }

    pub fn empty() -> Self {
        Configuration {
            vars: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn vars(&self) -> &[VertexId] {
        &self.vars
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn get(&self, v: VertexId) -> Option<usize> {
        self.vars.iter().position(|&x| x == v).map(|i| self.states[i])
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.vars.iter().copied().zip(self.states.iter().copied())
    }
}

/// Product of arities, checked against `cap`.
pub fn checked_count(arities: &[usize], cap: u64) -> Result<usize> {
    let count = arities.iter().fold(1u128, |acc, &a| acc.saturating_mul(a as u128));
    if count > cap as u128 {
        return Err(Error::Capacity { count, cap });
    }
    Ok(count as usize)
}

/// Mixed-radix counter over a list of arities, last digit fastest.
#[derive(Clone, Debug)]
pub struct Odometer {
    radices: Vec<usize>,
    digits: Vec<usize>,
}

impl Odometer {
    pub fn new(radices: Vec<usize>) -> Self {
        let digits = vec![0; radices.len()];
        Odometer { radices, digits }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// Advances to the next configuration; false once all have been visited.
    pub fn advance(&mut self) -> bool {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.radices[i] {
                return true;
            }
            self.digits[i] = 0;
        }
        false
    }
}

/// Row-major strides for a mixed-radix layout (last dimension stride 1).
pub fn strides(arities: &[usize]) -> Vec<usize> {
    let mut out = vec![1; arities.len()];
    for i in (0..arities.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * arities[i + 1];
    }
    out
}

/// Digits of index `r` in the mixed-radix layout of [`strides`].
pub fn decode_index(arities: &[usize], mut r: usize) -> Vec<usize> {
    let mut out = vec![0; arities.len()];
    for i in (0..arities.len()).rev() {
        out[i] = r % arities[i];
        r /= arities[i];
    }
    out
}

/// Iterator over every configuration of an ordered variable list.
pub struct ConfigIter {
    vars: Vec<VertexId>,
    odometer: Odometer,
    done: bool,
}

impl Iterator for ConfigIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.done {
            return None;
        }
        let item = Configuration {
            vars: self.vars.clone(),
            states: self.odometer.digits().to_vec(),
        };
        self.done = !self.odometer.advance();
        Some(item)
    }
}

pub fn enumerate_configs(vars: &[&Variable], cap: u64) -> Result<ConfigIter> {
    if vars.is_empty() {
        return Err(Error::ShapeMismatch("cannot enumerate an empty variable list".into()));
    }
    let arities: Vec<usize> = vars.iter().map(|v| v.arity()).collect();
    checked_count(&arities, cap)?;
    Ok(ConfigIter {
        vars: vars.iter().map(|v| v.id()).collect(),
        odometer: Odometer::new(arities),
        done: false,
    })
}

/// A dense nonnegative table over the configurations of an ordered vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    vars: Vec<VertexId>,
    arities: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl Table {
    pub fn zeros(vars: Vec<VertexId>, arities: Vec<usize>) -> Self {
        let size = arities.iter().product();
        let strides = strides(&arities);
        Table {
            vars,
            arities,
            strides,
            values: vec![0.0; size],
        }
    }

    pub fn vars(&self) -> &[VertexId] {
        &self.vars
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn index_of(&self, states: &[usize]) -> usize {
        states.iter().zip(&self.strides).map(|(s, k)| s * k).sum()
    }

    pub fn get(&self, states: &[usize]) -> f64 {
        self.values[self.index_of(states)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Marginalizes onto the leading `keep` variables.
    pub fn marginal_prefix(&self, keep: usize) -> Table {
        let inner: usize = self.arities[keep..].iter().product();
        let mut out = Table::zeros(self.vars[..keep].to_vec(), self.arities[..keep].to_vec());
        for (i, chunk) in self.values.chunks(inner).enumerate() {
            out.values[i] = chunk.iter().sum();
        }
        out
    }

    /// Conditional of the first variable given the rest, laid out as rows
    /// indexed by the remaining variables' configuration. Rows with zero
    /// mass are `None`.
    pub fn conditional_of_first(&self) -> Vec<Option<Vec<f64>>> {
        let arity = self.arities[0];
        let rows: usize = self.arities[1..].iter().product();
        (0..rows)
            .map(|r| {
                let row: Vec<f64> = (0..arity).map(|x| self.values[x * rows + r]).collect();
                let mass: f64 = row.iter().sum();
                (mass > 0.0).then(|| row.iter().map(|p| p / mass).collect())
            })
            .collect()
    }
}
