//! Experiment specs, parallel execution and CSV output.
//!
//! A spec is `key = value` lines; `#` starts a comment.
//!
//! ```text
//! case = nets/a.net evidence/a1.ev      # repeatable; paths relative to the spec
//! variants = SIS RIS_SIS
//! samples = 1000..19000 step 1000       # or an explicit list
//! seeds = 0..5                          # half-open range or list
//! scope = full                          # or `parents`
//! stages = 10
//! rates = 0.4 0.1                       # geometric schedule endpoints
//! flatten = 0.04                        # AIS-BN only
//! smoothing = 1
//! enum_cap = 67108864
//! strict_support = false
//! ```
//!
//! One row is written per (case, variant, N, seed), sorted by that key, so
//! the output depends only on the spec bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;
use ris::exact::{ExactInference, PosteriorJoint};
use ris::graph::VertexId;
use ris::metrics::{self, post_kld_with_joint, posterior_kl_with_joint};
use ris::network::{BayesianNetwork, Evidence};
use ris::refractor::RefractorScope;
use ris::sampling::{geometric_schedule, run, SamplerConfig, SupportMode, Variant};
use ris::DEFAULT_ENUM_CAP;

use crate::format::{parse_evidence, parse_network};

pub const RNG_HEADER: &str = "# rng: ChaCha8 (rand_chacha 0.3) seeded by seed_from_u64(seed); \
stream 0 = result pass, stream k+1 = learning stage k";

pub const COLUMNS: &str = "networkId,evidenceId,variant,scope,N,seed,mse,posteriorKl,postKld,evidenceProbEstimate,wallSamplesDrawn";

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub network: PathBuf,
    pub evidence: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub cases: Vec<Case>,
    pub variants: Vec<Variant>,
    pub samples: Vec<usize>,
    pub seeds: Vec<u64>,
    pub scope: ScopeMode,
    pub stages: usize,
    pub rates: (f64, f64),
    pub flatten: f64,
    pub smoothing: f64,
    pub enum_cap: u64,
    pub strict_support: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeMode {
    Full,
    Parents,
}

impl ScopeMode {
    pub fn parse(s: &str) -> Option<ScopeMode> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "full_ancestors" => Some(ScopeMode::Full),
            "parents" | "parents_of_evidence" => Some(ScopeMode::Parents),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScopeMode::Full => "FULL_ANCESTORS",
            ScopeMode::Parents => "PARENTS_OF_EVIDENCE",
        }
    }

    pub fn scope(self) -> RefractorScope {
        match self {
            ScopeMode::Full => RefractorScope::FullAncestors,
            ScopeMode::Parents => RefractorScope::ParentsOfEvidence,
        }
    }
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            cases: Vec::new(),
            variants: Vec::new(),
            samples: Vec::new(),
            seeds: vec![0],
            scope: ScopeMode::Full,
            stages: SamplerConfig::DEFAULT_STAGES,
            rates: (0.4, 0.1),
            flatten: 0.04,
            smoothing: 1.0,
            enum_cap: DEFAULT_ENUM_CAP,
            strict_support: false,
        }
    }
}

/// `a..b step s`, `a..b` (step 1) or a whitespace list.
fn parse_grid<T>(value: &str) -> anyhow::Result<Vec<T>>
where
    T: std::str::FromStr + Copy + Into<u64> + TryFrom<u64>,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    if let Some((lo, rest)) = value.split_once("..") {
        let (hi, step) = match rest.split_once("step") {
            Some((hi, step)) => (hi.trim(), step.trim().parse::<u64>()?),
            None => (rest.trim(), 1),
        };
        if step == 0 {
            bail!("step must be positive");
        }
        let lo: u64 = lo.trim().parse::<T>()?.into();
        let hi: u64 = hi.parse::<T>()?.into();
        // sample grids are inclusive of their upper end when a step is given
        let end = if rest.contains("step") { hi + 1 } else { hi };
        return (lo..end)
            .step_by(step as usize)
            .map(|x| T::try_from(x).map_err(|_| anyhow::anyhow!("{x} out of range")))
            .collect();
    }
    value
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(Into::into))
        .collect()
}

#[derive(Clone, Copy)]
struct Count(usize);

impl std::str::FromStr for Count {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Count)
    }
}

impl From<Count> for u64 {
    fn from(c: Count) -> u64 {
        c.0 as u64
    }
}

impl TryFrom<u64> for Count {
    type Error = std::num::TryFromIntError;
    fn try_from(x: u64) -> Result<Self, Self::Error> {
        usize::try_from(x).map(Count)
    }
}

impl ExperimentSpec {
    /// Parses spec text; relative case paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut spec = ExperimentSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ctx = || format!("line {}: `{}`", i + 1, raw.trim());
            let (key, value) = line.split_once('=').with_context(|| format!("{}: expected key = value", ctx()))?;
            let value = value.trim();
            match key.trim() {
                "case" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 2 {
                        bail!("{}: expected `case = <network> <evidence>`", ctx());
                    }
                    spec.cases.push(Case {
                        network: base.join(parts[0]),
                        evidence: base.join(parts[1]),
                    });
                }
                "variants" => {
                    spec.variants = value
                        .split_whitespace()
                        .map(|v| Variant::parse(v).with_context(|| format!("{}: unknown variant `{v}`", ctx())))
                        .collect::<anyhow::Result<_>>()?;
                }
                "samples" => {
                    spec.samples = parse_grid::<Count>(value).with_context(ctx)?.into_iter().map(|c| c.0).collect()
                }
                "seeds" => spec.seeds = parse_grid::<u64>(value).with_context(ctx)?,
                "scope" => spec.scope = ScopeMode::parse(value).with_context(|| format!("{}: unknown scope", ctx()))?,
                "stages" => spec.stages = value.parse().with_context(ctx)?,
                "rates" => {
                    let r: Vec<f64> = value.split_whitespace().map(str::parse).collect::<Result<_, _>>().with_context(ctx)?;
                    match r[..] {
                        [a, b] => spec.rates = (a, b),
                        _ => bail!("{}: expected two rates", ctx()),
                    }
                }
                "flatten" => spec.flatten = value.parse().with_context(ctx)?,
                "smoothing" => spec.smoothing = value.parse().with_context(ctx)?,
                "enum_cap" => spec.enum_cap = value.parse().with_context(ctx)?,
                "strict_support" => spec.strict_support = value.parse().with_context(ctx)?,
                other => bail!("{}: unknown key `{other}`", ctx()),
            }
        }
        if spec.samples.contains(&0) {
            bail!("sample counts must be positive");
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn sampler_config(&self, variant: Variant, n: usize, seed: u64) -> SamplerConfig {
        let stages = if variant == Variant::Lw { 0 } else { self.stages };
        let mut cfg = SamplerConfig::new(variant, n, seed).with_stages(stages, None);
        cfg.learning_rates = geometric_schedule(stages, self.rates.0, self.rates.1);
        cfg.smoothing = self.smoothing;
        if matches!(variant, Variant::Ais | Variant::RisAis) {
            cfg.flatten_threshold = self.flatten;
        }
        cfg.enum_cap = self.enum_cap;
        cfg.support = if self.strict_support {
            SupportMode::Strict
        } else {
            SupportMode::Permissive
        };
        cfg
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub network_id: String,
    pub evidence_id: String,
    pub variant: Variant,
    pub scope: ScopeMode,
    pub n: usize,
    pub seed: u64,
    pub mse: Option<f64>,
    pub posterior_kl: Option<f64>,
    pub post_kld: Option<f64>,
    pub evidence_prob_estimate: f64,
    pub samples_drawn: usize,
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// A loaded case with its oracle quantities, when within reach.
pub struct PreparedCase {
    pub network_id: String,
    pub evidence_id: String,
    pub bn: BayesianNetwork,
    pub evidence: Evidence,
    pub oracle: Option<Oracle>,
}

pub struct Oracle {
    pub joint: PosteriorJoint,
    pub marginals: BTreeMap<VertexId, Vec<f64>>,
    pub post_kld: f64,
}

impl PreparedCase {
    pub fn new(network_id: String, evidence_id: String, bn: BayesianNetwork, evidence: Evidence, cap: u64) -> anyhow::Result<Self> {
        let oracle = match ExactInference::new(&bn).with_cap(cap).posterior_joint(&evidence) {
            Ok(joint) => Some(Oracle {
                marginals: metrics::exact_marginals(&joint)?,
                post_kld: post_kld_with_joint(&bn, &joint)?.total(),
                joint,
            }),
            Err(ris::Error::Capacity { .. }) => {
                log::warn!("{network_id}/{evidence_id}: exact oracle over capacity, metrics left blank");
                None
            }
            Err(e) => return Err(e.into()),
        };
        Ok(PreparedCase {
            network_id,
            evidence_id,
            bn,
            evidence,
            oracle,
        })
    }

    fn load(case: &Case, cap: u64) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(&case.network).with_context(|| format!("reading {}", case.network.display()))?;
        let bn = parse_network(&text).with_context(|| format!("parsing {}", case.network.display()))?;
        let text = std::fs::read_to_string(&case.evidence).with_context(|| format!("reading {}", case.evidence.display()))?;
        let evidence = parse_evidence(&bn, &text).with_context(|| format!("parsing {}", case.evidence.display()))?;
        Self::new(stem(&case.network), stem(&case.evidence), bn, evidence, cap)
    }
}

pub fn run_cell(spec: &ExperimentSpec, case: &PreparedCase, variant: Variant, n: usize, seed: u64) -> anyhow::Result<Row> {
    let mut cfg = spec.sampler_config(variant, n, seed);
    if case.oracle.is_none() {
        cfg.support = SupportMode::Off;
    }
    let result = run(&case.bn, &case.evidence, &cfg, &spec.scope.scope())
        .with_context(|| format!("{}/{} {variant} N={n} seed={seed}", case.network_id, case.evidence_id))?;
    let (mse, posterior_kl, post_kld) = match &case.oracle {
        Some(o) => (
            Some(metrics::mse(&result.estimate, &o.marginals)?),
            Some(posterior_kl_with_joint(&o.joint, &result.importance)),
            Some(o.post_kld),
        ),
        None => (None, None, None),
    };
    Ok(Row {
        network_id: case.network_id.clone(),
        evidence_id: case.evidence_id.clone(),
        variant,
        scope: spec.scope,
        n,
        seed,
        mse,
        posterior_kl,
        post_kld,
        evidence_prob_estimate: result.estimate.evidence_prob_estimate,
        samples_drawn: result.samples_drawn(),
    })
}

/// Runs every cell of the spec in parallel and returns the rows in key order.
pub fn run_experiment(spec: &ExperimentSpec) -> anyhow::Result<Vec<Row>> {
    let cases = spec
        .cases
        .iter()
        .map(|c| PreparedCase::load(c, spec.enum_cap))
        .collect::<anyhow::Result<Vec<_>>>()?;
    run_prepared(spec, &cases)
}

pub fn run_prepared(spec: &ExperimentSpec, cases: &[PreparedCase]) -> anyhow::Result<Vec<Row>> {
    let mut cells = Vec::new();
    for (ci, _) in cases.iter().enumerate() {
        for &variant in &spec.variants {
            for &n in &spec.samples {
                for &seed in &spec.seeds {
                    cells.push((ci, variant, n, seed));
                }
            }
        }
    }
    let mut rows = cells
        .into_par_iter()
        .map(|(ci, variant, n, seed)| run_cell(spec, &cases[ci], variant, n, seed))
        .collect::<anyhow::Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (&a.network_id, &a.evidence_id, a.variant, a.n, a.seed).cmp(&(&b.network_id, &b.evidence_id, b.variant, b.n, b.seed))
    });
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = format!("{RNG_HEADER}\n{COLUMNS}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.network_id,
            r.evidence_id,
            r.variant,
            r.scope.name(),
            r.n,
            r.seed,
            opt(r.mse),
            opt(r.posterior_kl),
            opt(r.post_kld),
            r.evidence_prob_estimate,
            r.samples_drawn
        )
        .unwrap();
    }
    out
}

/// Over (network, evidence, N) cells with `N ≥ min_n`, counts those where
/// the median MSE over seeds of `challenger` is below that of `base`.
/// Returns `(wins, cells)`.
pub fn win_ratio(rows: &[Row], base: Variant, challenger: Variant, min_n: usize) -> (usize, usize) {
    // (network, evidence, N) -> (base MSEs, challenger MSEs)
    type Cell<'a> = (&'a str, &'a str, usize);
    let mut groups: BTreeMap<Cell, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.n >= min_n) {
        let Some(mse) = r.mse else { continue };
        let g = groups.entry((&r.network_id, &r.evidence_id, r.n)).or_default();
        if r.variant == base {
            g.0.push(mse);
        } else if r.variant == challenger {
            g.1.push(mse);
        }
    }
    let mut wins = 0;
    let mut cells = 0;
    for (b, c) in groups.into_values() {
        if b.is_empty() || c.is_empty() {
            continue;
        }
        cells += 1;
        if median(c) < median(b) {
            wins += 1;
        }
    }
    (wins, cells)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let spec = ExperimentSpec::parse(
            "samples = 1000..19000 step 1000\nseeds = 0..5\nvariants = sis RIS_SIS\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(spec.samples.len(), 19);
        assert_eq!(spec.samples[18], 19_000);
        assert_eq!(spec.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!(spec.variants, vec![Variant::Sis, Variant::RisSis]);
        let list = ExperimentSpec::parse("samples = 10 20\nseeds = 7 3", Path::new(".")).unwrap();
        assert_eq!(list.samples, vec![10, 20]);
        assert_eq!(list.seeds, vec![7, 3]);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentSpec::parse("colour = blue", Path::new(".")).is_err());
        assert!(ExperimentSpec::parse("variants = XYZ", Path::new(".")).is_err());
        assert!(ExperimentSpec::parse("samples = 0", Path::new(".")).is_err());
    }

    #[test]
    fn empty_variant_list_gives_a_header_only_table() {
        let spec = ExperimentSpec::parse("samples = 100", Path::new(".")).unwrap();
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(to_csv(&rows), format!("{RNG_HEADER}\n{COLUMNS}\n"));
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
