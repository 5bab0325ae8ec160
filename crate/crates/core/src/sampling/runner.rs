//! Sampler drivers: likelihood weighting, SIS, AIS-BN and their refractored forms.
//!
//! Random streams: every run seeds a ChaCha8 generator from the master seed;
//! learning stage `k` uses stream `k + 1` and the final result pass uses
//! stream 0, so stages are independent and any single stage can be replayed.
//!
//! Sample accounting for `N = total_samples`, `K = learning_stages` and
//! `m = samples_per_stage`:
//!
//! * SIS spends part of its budget on learning. `K` stages of `m` samples
//!   (default `m = N / 2K`) update the importance function; the remaining
//!   `N − K·m` draws use the final function and form the estimate.
//!   Total drawn: `N`.
//! * AIS-BN separates the two. `K` stages of `m` samples (default
//!   `m = N / K`) only learn, then `N` fresh draws form the estimate.
//!   Total drawn: `N + K·m`, twice the reported count by default.
//!
//! After each stage the learnable tables move towards that stage's weighted
//! estimate: `row ← (1 − η_k)·row + η_k·estimate`.
//! Only tables of unobserved evidence ancestors are learned; every other
//! vertex already samples from its exact posterior conditional.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::ExactInference;
use crate::graph::VertexId;
use crate::network::{BayesianNetwork, Evidence};
use crate::refractor::{refractor, scope_vertices, RefractorScope};
use crate::sampling::estimate::{PosteriorAccumulator, PosteriorEstimate};
use crate::sampling::importance::{draw_sample, ImportanceFunction};
use crate::sampling::learn::WeightedCounts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Lw,
    Sis,
    Ais,
    RisSis,
    RisAis,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Lw, Variant::Sis, Variant::Ais, Variant::RisSis, Variant::RisAis];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Lw => "LW",
            Variant::Sis => "SIS",
            Variant::Ais => "AIS",
            Variant::RisSis => "RIS_SIS",
            Variant::RisAis => "RIS_AIS",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s))
    }

    fn separate_learning(self) -> bool {
        matches!(self, Variant::Ais | Variant::RisAis)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What to do when the importance function misses posterior mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportMode {
    /// Abort the run.
    Strict,
    /// Log a warning and continue.
    Permissive,
    /// Skip the check.
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub variant: Variant,
    pub total_samples: usize,
    pub seed: u64,
    pub learning_stages: usize,
    /// `None` picks the variant's default stage size.
    pub samples_per_stage: Option<usize>,
    /// One learning rate per stage.
    pub learning_rates: Vec<f64>,
    /// Pseudocount per state, in units of normalized sample weight.
    pub smoothing: f64,
    /// AIS-BN: learned entries below this are raised to it.
    pub flatten_threshold: f64,
    /// AIS-BN: start parents of evidence vertices from uniform rows.
    pub uniform_evidence_parents: bool,
    pub support: SupportMode,
    pub enum_cap: u64,
}

/// `stages` rates decaying geometrically from `start` to `end`.
pub fn geometric_schedule(stages: usize, start: f64, end: f64) -> Vec<f64> {
    match stages {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..stages)
            .map(|k| start * (end / start).powf(k as f64 / (stages - 1) as f64))
            .collect(),
    }
}

impl SamplerConfig {
    pub const DEFAULT_STAGES: usize = 10;

    pub fn new(variant: Variant, total_samples: usize, seed: u64) -> Self {
        let stages = if variant == Variant::Lw { 0 } else { Self::DEFAULT_STAGES };
        SamplerConfig {
            variant,
            total_samples,
            seed,
            learning_stages: stages,
            samples_per_stage: None,
            learning_rates: geometric_schedule(stages, 0.4, 0.1),
            smoothing: 1.0,
            flatten_threshold: if variant.separate_learning() { 0.04 } else { 0.0 },
            uniform_evidence_parents: variant.separate_learning(),
            support: SupportMode::Off,
            enum_cap: crate::config::DEFAULT_ENUM_CAP,
        }
    }

    pub fn with_stages(mut self, stages: usize, samples_per_stage: Option<usize>) -> Self {
        self.learning_stages = stages;
        self.samples_per_stage = samples_per_stage;
        self.learning_rates = geometric_schedule(stages, 0.4, 0.1);
        self
    }

    pub fn stage_size(&self) -> usize {
        if self.learning_stages == 0 {
            return 0;
        }
        self.samples_per_stage.unwrap_or_else(|| {
            if self.variant.separate_learning() {
                self.total_samples / self.learning_stages
            } else {
                self.total_samples / (2 * self.learning_stages)
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.total_samples == 0 {
            return bad("total_samples must be at least 1".into());
        }
        if self.learning_rates.len() != self.learning_stages {
            return bad(format!(
                "{} learning rates for {} stages",
                self.learning_rates.len(),
                self.learning_stages
            ));
        }
        if self.learning_rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("learning rates must lie in [0, 1]".into());
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return bad("smoothing must be a finite nonnegative pseudocount".into());
        }
        if !(0.0..1.0).contains(&self.flatten_threshold) {
            return bad("flatten threshold must lie in [0, 1)".into());
        }
        if !self.variant.separate_learning() && self.learning_stages * self.stage_size() > self.total_samples {
            return bad("learning stages exceed the sample budget".into());
        }
        Ok(())
    }
}

/// Independent, reproducible stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Outcome of one sampler run.
#[derive(Clone, Debug)]
pub struct SamplingRun {
    pub estimate: PosteriorEstimate,
    /// Importance function in force at the end of learning.
    pub importance: ImportanceFunction,
    pub learning_samples: usize,
    pub result_samples: usize,
}

impl SamplingRun {
    pub fn samples_drawn(&self) -> usize {
        self.learning_samples + self.result_samples
    }
}

/// Runs the variant named in `cfg`; RIS variants use `scope`.
pub fn run(bn: &BayesianNetwork, e: &Evidence, cfg: &SamplerConfig, scope: &RefractorScope) -> Result<SamplingRun> {
    match cfg.variant {
        Variant::Lw => run_lw(bn, e, cfg),
        Variant::Sis => run_sis(bn, e, cfg),
        Variant::Ais => run_ais(bn, e, cfg),
        Variant::RisSis | Variant::RisAis => run_ris(bn, e, cfg, scope),
    }
}

pub fn run_lw(bn: &BayesianNetwork, e: &Evidence, cfg: &SamplerConfig) -> Result<SamplingRun> {
    cfg.validate()?;
    let f = ImportanceFunction::likelihood_weighting(bn, e);
    check_support_mode(bn, e, &f, cfg)?;
    let mut acc = PosteriorAccumulator::new(bn, e);
    let mut rng = stream_rng(cfg.seed, 0);
    for _ in 0..cfg.total_samples {
        acc.add(&draw_sample(&f, bn, &mut rng)?)?;
    }
    Ok(SamplingRun {
        estimate: acc.finish(Some(cfg.seed))?,
        importance: f,
        learning_samples: 0,
        result_samples: cfg.total_samples,
    })
}

pub fn run_sis(bn: &BayesianNetwork, e: &Evidence, cfg: &SamplerConfig) -> Result<SamplingRun> {
    expect_variant(cfg, &[Variant::Sis])?;
    let f = ImportanceFunction::likelihood_weighting(bn, e);
    let learnable = learnable_vertices(bn, e)?;
    drive(bn, e, cfg, f, &learnable)
}

pub fn run_ais(bn: &BayesianNetwork, e: &Evidence, cfg: &SamplerConfig) -> Result<SamplingRun> {
    expect_variant(cfg, &[Variant::Ais])?;
    let mut f = ImportanceFunction::likelihood_weighting(bn, e);
    if cfg.uniform_evidence_parents {
        uniform_evidence_parents(bn, e, &mut f)?;
    }
    let learnable = learnable_vertices(bn, e)?;
    drive(bn, e, cfg, f, &learnable)
}

/// Refractor, absorb the evidence, then learn and sample with the wrapped
/// SIS or AIS-BN driver on the widened factorization.
pub fn run_ris(bn: &BayesianNetwork, e: &Evidence, cfg: &SamplerConfig, scope: &RefractorScope) -> Result<SamplingRun> {
    expect_variant(cfg, &[Variant::RisSis, Variant::RisAis])?;
    scope_vertices(bn, e, scope)?;
    let refracted = refractor(bn, e, scope)?.absorb_evidence()?;
    let mut f = refracted.importance_function();
    if cfg.variant == Variant::RisAis && cfg.uniform_evidence_parents {
        uniform_evidence_parents(bn, e, &mut f)?;
    }
    let learnable = learnable_vertices(bn, e)?;
    drive(bn, e, cfg, f, &learnable)
}

fn expect_variant(cfg: &SamplerConfig, allowed: &[Variant]) -> Result<()> {
    if allowed.contains(&cfg.variant) {
        Ok(())
    } else {
        Err(Error::Config(format!("variant {} not valid here", cfg.variant)))
    }
}

/// Unobserved ancestors of the evidence, in canonical order.
fn learnable_vertices(bn: &BayesianNetwork, e: &Evidence) -> Result<Vec<VertexId>> {
    let ancestors = bn.dag().combined_ancestors(&e.vertices())?;
    Ok(e.free_vertices(bn).into_iter().filter(|v| ancestors.contains(v)).collect())
}

fn uniform_evidence_parents(bn: &BayesianNetwork, e: &Evidence, f: &mut ImportanceFunction) -> Result<()> {
    for v in bn.dag().combined_parents(&e.vertices())? {
        let factor = f.factor_mut(v).expect("unobserved parent is sampled");
        let uniform = vec![1.0 / factor.arity() as f64; factor.arity()];
        for r in 0..factor.row_count() {
            factor.set_row(r, &uniform)?;
        }
    }
    Ok(())
}

fn flatten(row: &mut [f64], threshold: f64) {
    if threshold <= 0.0 {
        return;
    }
    row.iter_mut().for_each(|p| *p = p.max(threshold));
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
}

fn drive(
    bn: &BayesianNetwork,
    e: &Evidence,
    cfg: &SamplerConfig,
    mut f: ImportanceFunction,
    learnable: &[VertexId],
) -> Result<SamplingRun> {
    cfg.validate()?;
    let separate = cfg.variant.separate_learning();
    let stage_size = cfg.stage_size();
    let mut learning_samples = 0;

    for (k, &rate) in cfg.learning_rates.iter().enumerate() {
        let mut rng = stream_rng(cfg.seed, k as u64 + 1);
        let mut stage = WeightedCounts::new(&f, learnable);
        for _ in 0..stage_size {
            stage.add(&f, &draw_sample(&f, bn, &mut rng)?)?;
        }
        learning_samples += stage_size;
        if !stage.has_mass() {
            warn!("learning stage {k} drew no positive weight; skipped");
            continue;
        }
        for (i, &v) in learnable.iter().enumerate() {
            let factor = f.factor_mut(v).expect("learnable vertex is sampled");
            for r in 0..factor.row_count() {
                let Some(target) = stage.row_estimate(i, r, cfg.smoothing) else { continue };
                let mut row: Vec<f64> = factor
                    .row(r)
                    .iter()
                    .zip(&target)
                    .map(|(old, new)| (1.0 - rate) * old + rate * new)
                    .collect();
                flatten(&mut row, cfg.flatten_threshold);
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= sum);
                factor.set_row(r, &row)?;
            }
        }
    }

    check_support_mode(bn, e, &f, cfg)?;
    let result_samples = if separate {
        cfg.total_samples
    } else {
        cfg.total_samples - learning_samples
    };
    let mut acc = PosteriorAccumulator::new(bn, e);
    let mut rng = stream_rng(cfg.seed, 0);
    for _ in 0..result_samples {
        acc.add(&draw_sample(&f, bn, &mut rng)?)?;
    }
    Ok(SamplingRun {
        estimate: acc.finish(Some(cfg.seed))?,
        importance: f,
        learning_samples,
        result_samples,
    })
}

fn check_support_mode(bn: &BayesianNetwork, e: &Evidence, f: &ImportanceFunction, cfg: &SamplerConfig) -> Result<()> {
    if cfg.support == SupportMode::Off {
        return Ok(());
    }
    match check_support(bn, e, f, cfg.enum_cap) {
        Ok(()) => Ok(()),
        Err(Error::SupportViolation) if cfg.support == SupportMode::Permissive => {
            warn!("importance function misses part of the posterior support");
            Ok(())
        }
        Err(Error::Capacity { .. }) => Ok(()),
        Err(err) => Err(err),
    }
}

/// Errors with [`Error::SupportViolation`] if some configuration with
/// positive posterior mass has zero density under `f`.
pub fn check_support(bn: &BayesianNetwork, e: &Evidence, f: &ImportanceFunction, cap: u64) -> Result<()> {
    let joint = ExactInference::new(bn).with_cap(cap).posterior_joint(e)?;
    let mut ok = true;
    joint.for_each(|assignment, p| {
        if p > 0.0 && f.density(assignment) <= 0.0 {
            ok = false;
        }
    });
    if ok {
        Ok(())
    } else {
        Err(Error::SupportViolation)
    }
}
