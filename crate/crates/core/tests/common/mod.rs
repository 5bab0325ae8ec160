//! Reference implementations used as oracles by the integration and
//! acceptance tests. Each one is written independently of the library code
//! it checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris::config::decode_index;
use ris::exact::{ExactInference, PosteriorJoint};
use ris::graph::{Dag, VertexId};
use ris::netgen;
use ris::network::{BayesianNetwork, Evidence};
use ris::sampling::{Factor, ImportanceFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random DAG with arcs only from lower to higher index, each present with
/// probability `density`.
pub fn random_dag(n: usize, density: f64, seed: u64) -> Dag {
    let mut rng = rng(seed);
    let parents = (0..n)
        .map(|j| (0..j).filter(|_| rng.gen_bool(density)).map(VertexId).collect())
        .collect();
    Dag::new(parents).unwrap()
}

/// A random binary network of `2..=max_vertices` vertices with evidence on
/// `1..=max_evidence` of them.
pub fn random_case(seed: u64, max_vertices: usize, max_evidence: usize) -> (BayesianNetwork, Evidence) {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=max_vertices);
    let max_arcs = n * (n - 1) / 2;
    let arcs = rng.gen_range(0..=max_arcs.min(2 * n));
    let bn = netgen::random_network(n, arcs, &[2], seed).unwrap();
    let count = rng.gen_range(1..=max_evidence.min(n - 1).max(1));
    let e = netgen::random_evidence(&bn, count, seed ^ 0x5eed, rng.gen_bool(0.5)).unwrap();
    (bn, e)
}

// ----- d-separation by path enumeration -----

fn descendants(dag: &Dag, v: VertexId) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for &c in dag.children(u) {
            if out.insert(c) {
                stack.push(c);
            }
        }
    }
    out
}

fn neighbours(dag: &Dag, v: VertexId) -> Vec<VertexId> {
    dag.parents(v).iter().chain(dag.children(v)).copied().collect()
}

fn has_arc(dag: &Dag, from: VertexId, to: VertexId) -> bool {
    dag.parents(to).contains(&from)
}

fn path_active(dag: &Dag, path: &[VertexId], z: &BTreeSet<VertexId>) -> bool {
    for w in path.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let collider = has_arc(dag, a, b) && has_arc(dag, c, b);
        if collider {
            if !z.contains(&b) && descendants(dag, b).is_disjoint(z) {
                return false;
            }
        } else if z.contains(&b) {
            return false;
        }
    }
    true
}

fn active_path_exists(
    dag: &Dag,
    path: &mut Vec<VertexId>,
    target: VertexId,
    z: &BTreeSet<VertexId>,
) -> bool {
    let last = *path.last().unwrap();
    if last == target {
        return path_active(dag, path, z);
    }
    for next in neighbours(dag, last) {
        if path.contains(&next) {
            continue;
        }
        path.push(next);
        // prune as soon as the prefix is already blocked
        let ok = path.len() < 3 || path_active(dag, &path[path.len() - 3..], z);
        if ok && active_path_exists(dag, path, target, z) {
            path.pop();
            return true;
        }
        path.pop();
    }
    false
}

/// True iff no simple path between any x and any y is active given z.
pub fn d_separated_by_paths(dag: &Dag, x: &[VertexId], y: &[VertexId], z: &[VertexId]) -> bool {
    let z: BTreeSet<VertexId> = z.iter().copied().collect();
    for &a in x {
        for &b in y {
            if z.contains(&a) || z.contains(&b) {
                continue;
            }
            if a == b || active_path_exists(dag, &mut vec![a], b, &z) {
                return false;
            }
        }
    }
    true
}

// ----- shields -----

/// Sound shield scan with a fresh breadth-first walk per candidate.
pub fn shield_by_walks(dag: &Dag, x: VertexId, e: VertexId) -> BTreeSet<VertexId> {
    let order = dag.topological_order();
    let pos = dag.position(x);
    let mut shield = BTreeSet::from([x]);
    for &candidate in order[..pos].iter().rev() {
        let mut seen = BTreeSet::from([candidate]);
        let mut queue = std::collections::VecDeque::from([candidate]);
        while let Some(v) = queue.pop_front() {
            if v == e {
                shield.insert(candidate);
                break;
            }
            if shield.contains(&v) || !dag.is_ancestor(v, e) {
                continue;
            }
            for &c in dag.children(v) {
                if seen.insert(c) {
                    queue.push_back(c);
                }
            }
        }
    }
    shield
}

// ----- plug-in importance functions -----

/// Factors on the given parent sets whose rows are the exact posterior
/// conditionals Pr(x | parents, e); rows with no posterior mass fall back to
/// uniform. `parents(x)` may include observed vertices.
pub fn plug_in(
    bn: &BayesianNetwork,
    e: &Evidence,
    joint: &PosteriorJoint,
    parents: impl Fn(VertexId) -> Vec<VertexId>,
) -> ImportanceFunction {
    let n = bn.len();
    let probs = joint.probs();
    let mut configs: Vec<Vec<usize>> = Vec::with_capacity(probs.len());
    joint.for_each(|a, _| configs.push(a.to_vec()));

    let factors = bn
        .dag()
        .vertices()
        .map(|x| {
            if e.contains(x) {
                return None;
            }
            let ps = parents(x);
            let arities: Vec<usize> = ps.iter().map(|&p| bn.arity(p)).collect();
            let rows: usize = arities.iter().product();
            let k = bn.arity(x);
            let mut mass = vec![0.0; rows * k];
            for (a, &p) in configs.iter().zip(probs) {
                let mut r = 0;
                for (q, &ar) in ps.iter().zip(&arities) {
                    r = r * ar + a[q.index()];
                }
                mass[r * k + a[x.index()]] += p;
            }
            for row in mass.chunks_mut(k) {
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    row.iter_mut().for_each(|v| *v /= total);
                } else {
                    row.iter_mut().for_each(|v| *v = 1.0 / k as f64);
                }
            }
            Some(Factor::new(x, ps, arities, k, mass).unwrap())
        })
        .collect();
    ImportanceFunction::new(n, e.free_vertices(bn), factors, e.clone()).unwrap()
}

/// Pr(x | π(x), e) on the original parent sets.
pub fn structure_preserving_plug_in(bn: &BayesianNetwork, e: &Evidence, joint: &PosteriorJoint) -> ImportanceFunction {
    plug_in(bn, e, joint, |x| bn.dag().parents(x).to_vec())
}

/// KL(Pr_e ‖ f) from the joint, written out directly.
pub fn direct_kl(joint: &PosteriorJoint, f: &ImportanceFunction) -> f64 {
    let mut kl = 0.0;
    joint.for_each(|a, p| {
        if p > 0.0 {
            let q: f64 = f.order().iter().map(|v| f.factor(*v).unwrap().prob(a)).product();
            kl += p * (p / q).ln();
        }
    });
    kl
}

/// Sum of the prior joint over all configurations consistent with `fixed`
/// (pairs of vertex and state), by brute force.
pub fn prior_mass(bn: &BayesianNetwork, fixed: &[(VertexId, usize)]) -> f64 {
    let n = bn.len();
    let arities = bn.arities();
    let mut a = vec![0usize; n];
    for &(v, s) in fixed {
        a[v.index()] = s;
    }
    let free: Vec<usize> = (0..n).filter(|i| !fixed.iter().any(|(v, _)| v.index() == *i)).collect();
    let mut total = 0.0;
    loop {
        total += (0..n).map(|i| bn.cpt(VertexId(i)).prob(&a)).product::<f64>();
        let mut k = free.len();
        loop {
            if k == 0 {
                return total;
            }
            k -= 1;
            let i = free[k];
            a[i] += 1;
            if a[i] < arities[i] {
                break;
            }
            a[i] = 0;
        }
    }
}

pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

// ----- numeric identities via the exact oracle -----

/// A network whose observed vertices are all roots.
pub fn root_evidence_case(seed: u64) -> (BayesianNetwork, Evidence) {
    use rand::seq::SliceRandom;
    let mut rng = rng(seed);
    let n = rng.gen_range(3..=10);
    let arcs = rng.gen_range(1..=(2 * n).min(n * (n - 1) / 2));
    let bn = netgen::random_network(n, arcs, &[2, 3], seed).unwrap();
    let roots: Vec<VertexId> = bn.dag().vertices().filter(|v| bn.dag().parents(*v).is_empty()).collect();
    let count = rng.gen_range(1..=roots.len());
    let mut e = Evidence::empty();
    for &v in roots.choose_multiple(&mut rng, count) {
        e.insert(&bn, v, rng.gen_range(0..bn.arity(v))).unwrap();
    }
    (bn, e)
}

/// Pr(x | Ah(x) \ E, e) against the prior row with observed parents fixed,
/// for every unobserved x that is not an evidence ancestor. Returns the
/// number of entries compared or the first mismatch.
pub fn check_non_ancestor_conditionals(bn: &BayesianNetwork, e: &Evidence, tol: f64) -> Result<usize, String> {
    let dag = bn.dag();
    let joint = ExactInference::new(bn).posterior_joint(e).unwrap();
    let ancestors = dag.combined_ancestors(&e.vertices()).unwrap();
    let mut checked = 0;
    for x in dag.vertices().filter(|x| !e.contains(*x) && !ancestors.contains(x)) {
        let ahead: Vec<VertexId> = dag.ahead_set(x).unwrap().into_iter().filter(|v| !e.contains(*v)).collect();
        let mut vars = vec![x];
        vars.extend(&ahead);
        let table = joint.marginal_table(&vars).unwrap();
        let arities: Vec<usize> = ahead.iter().map(|v| bn.arity(*v)).collect();
        for (r, row) in table.conditional_of_first().into_iter().enumerate() {
            let Some(row) = row else { continue };
            let mut a = e.seed_assignment(bn.len());
            for (v, s) in ahead.iter().zip(decode_index(&arities, r)) {
                a[v.index()] = s;
            }
            for (s, p) in row.iter().enumerate() {
                a[x.index()] = s;
                let prior = bn.cpt(x).prob(&a);
                if (p - prior).abs() >= tol {
                    return Err(format!("vertex {x}: {p} vs prior {prior}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Pr_e(x | Ah(x)) = Pr(e | x, Ah(x)) / Pr(e | Ah(x)) · Pr(x | π(x)) for
/// each ancestor of the single observed vertex.
pub fn check_ancestor_reweighting(bn: &BayesianNetwork, e: &Evidence, tol: f64) -> Result<usize, String> {
    assert_eq!(e.len(), 1);
    let dag = bn.dag();
    let (ev, state) = e.iter().next().unwrap();
    let exact = ExactInference::new(bn);
    let posterior = exact.posterior_joint(e).unwrap();
    let prior = exact.posterior_joint(&Evidence::empty()).unwrap();
    let mut checked = 0;
    for x in dag.ancestors(ev).unwrap() {
        let ahead: Vec<VertexId> = dag.ahead_set(x).unwrap().into_iter().collect();
        let arities: Vec<usize> = ahead.iter().map(|v| bn.arity(*v)).collect();
        let mut vars = vec![x];
        vars.extend(&ahead);
        let lhs = posterior.marginal_table(&vars).unwrap();
        let mut with_e = vec![ev, x];
        with_e.extend(&ahead);
        let joint_e = prior.marginal_table(&with_e).unwrap();
        let joint = prior.marginal_table(&vars).unwrap();
        let mut ahead_e = vec![ev];
        ahead_e.extend(&ahead);
        let ah_e = prior.marginal_table(&ahead_e).unwrap();
        let ah = prior.marginal_table(&ahead).unwrap();

        let rows: usize = arities.iter().product();
        for r in 0..rows {
            let h = decode_index(&arities, r);
            if ah_e.get(&[&[state][..], &h].concat()) <= 0.0 {
                continue;
            }
            let lhs_total: f64 = (0..bn.arity(x)).map(|s| lhs.get(&[&[s][..], &h].concat())).sum();
            let mut a = vec![0; bn.len()];
            for (v, &s) in ahead.iter().zip(&h) {
                a[v.index()] = s;
            }
            for s in 0..bn.arity(x) {
                let xh = [&[s][..], &h].concat();
                let left = lhs.get(&xh) / lhs_total;
                let p_e_given_xh = joint_e.get(&[&[state][..], &xh].concat()) / joint.get(&xh);
                let p_e_given_h = ah_e.get(&[&[state][..], &h].concat()) / ah.get(&h);
                a[x.index()] = s;
                let right = p_e_given_xh / p_e_given_h * bn.cpt(x).prob(&a);
                if (left - right).abs() >= tol {
                    return Err(format!("x {x}: {left} vs {right}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
