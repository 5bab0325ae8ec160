use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ris::exact::ExactInference;
use ris::metrics::{self, post_kld_with_joint, posterior_kl_with_joint};
use ris::netgen::{self, NetworkShape};
use ris::network::{BayesianNetwork, Evidence};
use ris::refractor::refractor;
use ris::sampling::{run, SupportMode, Variant};
use ris::shield::compute_shield;
use ris::DEFAULT_ENUM_CAP;
use ris_cli::experiment::{run_experiment, to_csv, win_ratio, ExperimentSpec, ScopeMode};
use ris_cli::format::{parse_evidence, parse_network, serialize_evidence, serialize_network};

#[derive(Parser)]
#[command(name = "ris", version, about = "Importance sampling with refractored importance functions")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Fail when a learned importance function loses posterior support.
    #[arg(long, global = true)]
    strict_support: bool,
    /// Largest joint table the exact oracle will enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    enum_cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network and, optionally, an evidence set for it.
    Gen {
        #[arg(long, default_value_t = 20)]
        vertices: usize,
        #[arg(long, default_value_t = 30)]
        arcs: usize,
        /// State counts to choose from, e.g. `2,3`.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        states: Vec<usize>,
        #[arg(long, default_value_t = netgen::DEFAULT_EXTREME_BIAS)]
        extreme_bias: f64,
        #[arg(short, long)]
        out: PathBuf,
        /// Number of vertices to observe.
        #[arg(long, default_value_t = 0)]
        evidence: usize,
        #[arg(long, requires = "evidence")]
        evidence_out: Option<PathBuf>,
        #[arg(long)]
        prefer_leaves: bool,
    },
    /// Exact posterior marginals and Pr(e).
    Exact {
        network: PathBuf,
        evidence: Option<PathBuf>,
    },
    /// Shield of a vertex with respect to an observed descendant.
    Shield {
        network: PathBuf,
        vertex: String,
        evidence_vertex: String,
    },
    /// Print the widened parent sets of the refractored network.
    Refractor {
        network: PathBuf,
        evidence: PathBuf,
        #[arg(long, default_value = "full", value_parser = parse_scope)]
        scope: ScopeMode,
    },
    /// Estimate posterior marginals by importance sampling.
    Sample {
        network: PathBuf,
        evidence: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample and score the estimate against the exact oracle.
    Metrics {
        network: PathBuf,
        evidence: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run an experiment spec and write CSV.
    Experiment {
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Report the fraction of cells where CHALLENGER beats BASE, e.g. `SIS:RIS_SIS`.
        #[arg(long)]
        win_ratio: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        min_n: usize,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, default_value = "RIS_SIS", value_parser = parse_variant)]
    variant: Variant,
    #[arg(short = 'n', long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value = "full", value_parser = parse_scope)]
    scope: ScopeMode,
    #[arg(long)]
    stages: Option<usize>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown variant `{s}`"))
}

fn parse_scope(s: &str) -> Result<ScopeMode, String> {
    ScopeMode::parse(s).ok_or_else(|| format!("unknown scope `{s}`"))
}

fn load_network(path: &Path) -> anyhow::Result<BayesianNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_network(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_evidence(bn: &BayesianNetwork, path: &Path) -> anyhow::Result<Evidence> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_evidence(bn, &text).with_context(|| format!("parsing {}", path.display()))
}

fn print_marginals(bn: &BayesianNetwork, marginals: &std::collections::BTreeMap<ris::VertexId, Vec<f64>>) {
    for (v, m) in marginals {
        let var = bn.variable(*v);
        let cells: Vec<String> = var.states().iter().zip(m).map(|(s, p)| format!("{s}={p:.6}")).collect();
        println!("{} {}", var.name(), cells.join(" "));
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let support = if cli.strict_support {
        SupportMode::Strict
    } else {
        SupportMode::Permissive
    };

    let scoring = matches!(cli.command, Command::Metrics { .. });
    match cli.command {
        Command::Gen {
            vertices,
            arcs,
            states,
            extreme_bias,
            out,
            evidence,
            evidence_out,
            prefer_leaves,
        } => {
            let mut shape = NetworkShape::new(vertices, arcs, &states);
            shape.extreme_bias = extreme_bias;
            let mut rng = ris::sampling::stream_rng(cli.seed, 0);
            let bn = netgen::generate(&shape, &mut rng)?;
            fs::write(&out, serialize_network(&bn))?;
            if evidence > 0 {
                let e = netgen::random_evidence(&bn, evidence, cli.seed, prefer_leaves)?;
                let text = serialize_evidence(&bn, &e);
                match evidence_out {
                    Some(path) => fs::write(path, text)?,
                    None => print!("{text}"),
                }
            }
        }
        Command::Exact { network, evidence } => {
            let bn = load_network(&network)?;
            let e = match evidence {
                Some(path) => load_evidence(&bn, &path)?,
                None => Evidence::empty(),
            };
            let joint = ExactInference::new(&bn).with_cap(cli.enum_cap).posterior_joint(&e)?;
            println!("Pr(e) = {:e}", joint.evidence_probability());
            print_marginals(&bn, &metrics::exact_marginals(&joint)?);
            println!("postKld = {}", post_kld_with_joint(&bn, &joint)?.total());
        }
        Command::Shield {
            network,
            vertex,
            evidence_vertex,
        } => {
            let bn = load_network(&network)?;
            let x = bn.vertex_or_err(&vertex)?;
            let e = bn.vertex_or_err(&evidence_vertex)?;
            let shield = compute_shield(bn.dag(), x, e)?;
            let names: Vec<&str> = shield.members.iter().map(|v| bn.variable(*v).name()).collect();
            println!("{}", names.join(" "));
        }
        Command::Refractor {
            network,
            evidence,
            scope,
        } => {
            let bn = load_network(&network)?;
            let e = load_evidence(&bn, &evidence)?;
            let r = refractor(&bn, &e, &scope.scope())?;
            for v in r.expanded_vertices() {
                let parents = r.expanded_parents(*v).unwrap_or_default();
                let names: Vec<&str> = parents.iter().map(|p| bn.variable(*p).name()).collect();
                println!("{} <- {}", bn.variable(*v).name(), names.join(" "));
            }
            log::info!("shield work: {}", r.work());
        }
        Command::Sample { network, evidence, run: args } | Command::Metrics { network, evidence, run: args } => {
            let bn = load_network(&network)?;
            let e = load_evidence(&bn, &evidence)?;
            let mut cfg = ris::sampling::SamplerConfig::new(args.variant, args.samples, cli.seed);
            if let Some(stages) = args.stages {
                cfg = cfg.with_stages(stages, None);
            }
            cfg.support = if scoring { support } else { SupportMode::Off };
            cfg.enum_cap = cli.enum_cap;
            let result = run(&bn, &e, &cfg, &args.scope.scope())?;
            if !scoring {
                println!("Pr(e) ~ {:e}", result.estimate.evidence_prob_estimate);
                print_marginals(&bn, &result.estimate.marginals);
                return Ok(());
            }
            let joint = ExactInference::new(&bn).with_cap(cli.enum_cap).posterior_joint(&e)?;
            let oracle = metrics::exact_marginals(&joint)?;
            println!("variant = {}", args.variant);
            println!("mse = {}", metrics::mse(&result.estimate, &oracle)?);
            println!("posteriorKl = {}", posterior_kl_with_joint(&joint, &result.importance));
            println!("postKld = {}", post_kld_with_joint(&bn, &joint)?.total());
            println!("Pr(e) = {:e}, estimate {:e}", joint.evidence_probability(), result.estimate.evidence_prob_estimate);
            println!("samplesDrawn = {}", result.samples_drawn());
        }
        Command::Experiment {
            spec,
            out,
            win_ratio: ratio,
            min_n,
        } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            spec.strict_support |= cli.strict_support;
            if cli.enum_cap != DEFAULT_ENUM_CAP {
                spec.enum_cap = cli.enum_cap;
            }
            let rows = run_experiment(&spec)?;
            let csv = to_csv(&rows);
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            if let Some(pair) = ratio {
                let Some((base, challenger)) = pair.split_once(':') else {
                    bail!("expected BASE:CHALLENGER, got `{pair}`");
                };
                let base = parse_variant(base).map_err(anyhow::Error::msg)?;
                let challenger = parse_variant(challenger).map_err(anyhow::Error::msg)?;
                let (wins, cells) = win_ratio(&rows, base, challenger, min_n);
                eprintln!(
                    "{challenger} beats {base} in {wins}/{cells} cells ({:.1}%)",
                    100.0 * wins as f64 / cells.max(1) as f64
                );
            }
        }
    }
    Ok(())
}
