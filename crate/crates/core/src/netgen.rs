//! Random networks, CPT rows and evidence for experiments and property tests.
//!
//! DAGs are drawn by fixing a random vertex permutation as the ordering and
//! then choosing exactly the requested number of arcs uniformly among the
//! pairs that respect it. Every draw is a pure function of its seed.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::DEFAULT_ENUM_CAP;
use crate::error::{Error, Result};
use crate::exact::ExactInference;
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Evidence, Variable};
use crate::sampling::{Factor, ImportanceFunction};

pub const DEFAULT_EXTREME_BIAS: f64 = 0.2;
/// Smallest entry a generated extreme row can hold.
pub const ROW_FLOOR: f64 = 1e-4;
pub const EVIDENCE_RETRIES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkShape {
    pub vertices: usize,
    pub arcs: usize,
    /// Arities to draw from uniformly.
    pub state_choices: Vec<usize>,
    pub extreme_bias: f64,
}

impl NetworkShape {
    pub fn new(vertices: usize, arcs: usize, state_choices: &[usize]) -> Self {
        NetworkShape {
            vertices,
            arcs,
            state_choices: state_choices.to_vec(),
            extreme_bias: DEFAULT_EXTREME_BIAS,
        }
    }

    pub fn max_arcs(&self) -> usize {
        self.vertices * self.vertices.saturating_sub(1) / 2
    }
}

pub fn random_network(vertices: usize, arcs: usize, state_choices: &[usize], seed: u64) -> Result<BayesianNetwork> {
    generate(&NetworkShape::new(vertices, arcs, state_choices), &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn generate<R: Rng + ?Sized>(shape: &NetworkShape, rng: &mut R) -> Result<BayesianNetwork> {
    let n = shape.vertices;
    if shape.arcs > shape.max_arcs() {
        return Err(Error::InfeasibleArcs {
            vertices: n,
            arcs: shape.arcs,
        });
    }
    if shape.state_choices.is_empty() || shape.state_choices.iter().any(|&k| k < 2) {
        return Err(Error::Config("state choices must all be at least 2".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parents = vec![Vec::new(); n];
    for pair in index::sample(rng, shape.max_arcs(), shape.arcs) {
        let (i, j) = forward_pair(pair);
        parents[order[j]].push(VertexId(order[i]));
    }
    parents.iter_mut().for_each(|ps| ps.sort());

    let arities: Vec<usize> = (0..n)
        .map(|_| *shape.state_choices.choose(rng).expect("nonempty"))
        .collect();
    let variables = (0..n)
        .map(|v| {
            let states = (0..arities[v]).map(|s| format!("s{s}")).collect();
            Variable::new(VertexId(v), format!("V{v}"), states)
        })
        .collect::<Result<Vec<_>>>()?;
    let tables = (0..n)
        .map(|v| {
            let rows: usize = parents[v].iter().map(|p: &VertexId| arities[p.index()]).product();
            (0..rows)
                .flat_map(|_| random_cpt_row(arities[v], shape.extreme_bias, rng))
                .collect()
        })
        .collect();
    BayesianNetwork::new(format!("random_{n}_{}", shape.arcs), variables, parents, tables)
}

/// The `k`-th pair `(i, j)`, `i < j`, in the order (0,1), (0,2), (1,2), (0,3), ...
fn forward_pair(k: usize) -> (usize, usize) {
    let mut j = ((((8 * k + 1) as f64).sqrt() - 1.0) / 2.0) as usize + 1;
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    (k - j * (j - 1) / 2, j)
}

/// A probability row. With probability `1 − extreme_bias` the entries are
/// uniform on [0.1, 0.9] before normalizing; otherwise one entry lies in
/// (0.9, 1) and the others split the remainder, each at least [`ROW_FLOOR`].
pub fn random_cpt_row<R: Rng + ?Sized>(arity: usize, extreme_bias: f64, rng: &mut R) -> Vec<f64> {
    assert!(arity >= 2, "rows need at least two states");
    if !rng.gen_bool(extreme_bias.clamp(0.0, 1.0)) {
        let raw: Vec<f64> = (0..arity).map(|_| rng.gen_range(0.1..=0.9)).collect();
        let total: f64 = raw.iter().sum();
        return raw.iter().map(|p| p / total).collect();
    }
    let rest = arity - 1;
    let top = rng.gen_range(0.9..(1.0 - ROW_FLOOR * rest as f64));
    let spare = 1.0 - top - ROW_FLOOR * rest as f64;
    let raw: Vec<f64> = (0..rest).map(|_| rng.gen::<f64>() + f64::EPSILON).collect();
    let total: f64 = raw.iter().sum();
    let mut row: Vec<f64> = raw.iter().map(|w| ROW_FLOOR + spare * w / total).collect();
    row.insert(rng.gen_range(0..arity), top);
    row
}

/// `count` distinct observed vertices with uniform states, redrawn until
/// Pr(e) > 0. With `prefer_leaves` a vertex is picked with weight
/// `1 / (1 + #children)`, so sinks are the most likely.
pub fn random_evidence(bn: &BayesianNetwork, count: usize, seed: u64, prefer_leaves: bool) -> Result<Evidence> {
    random_evidence_with(bn, count, prefer_leaves, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_evidence_with<R: Rng + ?Sized>(
    bn: &BayesianNetwork,
    count: usize,
    prefer_leaves: bool,
    rng: &mut R,
) -> Result<Evidence> {
    if count > bn.len() {
        return Err(Error::Config(format!(
            "{count} evidence vertices requested from {} vertices",
            bn.len()
        )));
    }
    let vertices: Vec<VertexId> = bn.dag().vertices().collect();
    for _ in 0..EVIDENCE_RETRIES {
        let chosen: Vec<VertexId> = if prefer_leaves {
            vertices
                .choose_multiple_weighted(rng, count, |v| 1.0 / (1 + bn.dag().children(*v).len()) as f64)
                .expect("positive weights")
                .copied()
                .collect()
        } else {
            vertices.choose_multiple(rng, count).copied().collect()
        };
        let mut e = Evidence::empty();
        for v in chosen {
            e.insert(bn, v, rng.gen_range(0..bn.arity(v)))?;
        }
        match ExactInference::new(bn).with_cap(DEFAULT_ENUM_CAP).evidence_probability(&e) {
            Ok(_) | Err(Error::Capacity { .. }) => return Ok(e),
            Err(Error::ImpossibleEvidence) => continue,
            Err(err) => return Err(err),
        }
    }
    Err(Error::RetryBudget(EVIDENCE_RETRIES))
}

/// An importance function on the original parent sets with random rows.
pub fn random_structure_preserving<R: Rng + ?Sized>(
    bn: &BayesianNetwork,
    e: &Evidence,
    extreme_bias: f64,
    rng: &mut R,
) -> ImportanceFunction {
    let factors = bn
        .dag()
        .vertices()
        .map(|v| {
            if e.contains(v) {
                return None;
            }
            let cpt = bn.cpt(v);
            let probs = (0..cpt.row_count())
                .flat_map(|_| random_cpt_row(cpt.arity(), extreme_bias, rng))
                .collect();
            Some(
                Factor::new(v, cpt.parents().to_vec(), cpt.parent_arities().to_vec(), cpt.arity(), probs)
                    .expect("generated rows are normalized"),
            )
        })
        .collect();
    ImportanceFunction::new(bn.len(), e.free_vertices(bn), factors, e.clone()).expect("original order is valid")
}
