//! `permatch`: simulate correlated network pairs, fit the matching model,
//! summarize posterior draws and inspect runs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use permatch_core::csbm::{
    read_graph, scenarios, simulate, write_graph, BlockProbabilities, GraphFormat, Graphs, ParentMatrix,
    PermutationSource, SimulationSpec,
};
use permatch_core::gibbs::{chain_rng, read_permutations, run_chains, run_seeded, DrawArchive, SamplerConfig};
use permatch_core::oracle;
use permatch_core::perm::cayley_distance;
use permatch_core::summarize::{
    auc_parent, expected_cayley, fast_persalso, frobenius_discrepancy, mapping_frequencies, nmi,
    partition_point_estimate, persalso, PosteriorPermSample, SummaryConfig,
};
use permatch_core::{Family, Permutation};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "permatch", version, about = "Bayesian graph matching with exchangeable random permutations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a pair of noisy networks and write them with the ground truth.
    Simulate(SimulateArgs),
    /// Run the Gibbs sampler on two observed networks.
    Fit(FitArgs),
    /// Point estimate and evaluation report from permutation draws.
    Summarize(SummarizeArgs),
    /// Trace series and mapping frequencies of a finished run.
    Diagnose(DiagnoseArgs),
    /// Exact reference tables for small sizes.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Dirichlet,
    NormalizedStable,
    PitmanYor,
    Gnedin,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "dirichlet")]
    family: FamilyName,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    discount: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family> {
        let f = match self.family {
            FamilyName::Dirichlet => Family::Dirichlet { theta: self.theta },
            FamilyName::NormalizedStable => Family::NormalizedStable { discount: self.discount },
            FamilyName::PitmanYor => Family::PitmanYor { theta: self.theta, discount: self.discount },
            FamilyName::Gnedin => Family::Gnedin { gamma: self.gamma },
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    /// Two equal cycles with planted blocks (p_in 0.6, p_out 0.1, α = β = 0.05).
    TwoCycle,
    /// Seven communities at n = 40, α = β = 0.01.
    SevenBlock,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, conflicts_with_all = ["blocks", "n"])]
    scenario: Option<Scenario>,
    #[arg(long)]
    n: Option<usize>,
    /// Planted equal-sized blocks; the true permutation is uniform given them.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value_t = 0.6)]
    p_in: f64,
    #[arg(long, default_value_t = 0.1)]
    p_out: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Beta(a, b) block probabilities when drawing π from a prior family.
    #[arg(long, default_value_t = 1.0)]
    xi_a: f64,
    #[arg(long, default_value_t = 1.0)]
    xi_b: f64,
    #[command(flatten)]
    prior: FamilyArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dense,
    EdgeList,
}

impl From<FormatArg> for GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Dense => GraphFormat::Dense,
            FormatArg::EdgeList => GraphFormat::EdgeList,
        }
    }
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph1: PathBuf,
    #[arg(long)]
    graph2: PathBuf,
    /// Input encoding; detected from the contents when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Node count for edge lists with isolated trailing nodes.
    #[arg(long)]
    nodes: Option<usize>,
}

impl GraphArgs {
    fn load(&self) -> Result<Graphs> {
        let fmt = self.format.map(GraphFormat::from);
        let y1 = read_graph(&self.graph1, fmt, self.nodes).with_context(|| format!("reading {}", self.graph1.display()))?;
        let y2 = read_graph(&self.graph2, fmt, self.nodes).with_context(|| format!("reading {}", self.graph2.display()))?;
        Ok(Graphs::new(y1, y2)?)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    graphs: GraphArgs,
    /// Sampler configuration (TOML); defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Independent chains, written to `chain_<c>/` with derived seeds.
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long)]
    store_parent: bool,
}

#[derive(Args)]
struct SummarizeArgs {
    /// `pi.draws` file of one-line permutations.
    #[arg(long)]
    draws: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// True permutation (one-line form) for the evaluation metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, requires = "graph2")]
    graph1: Option<PathBuf>,
    #[arg(long, requires = "graph1")]
    graph2: Option<PathBuf>,
    #[arg(long, requires = "parent_truth")]
    parent_draws: Option<PathBuf>,
    #[arg(long, requires = "parent_draws")]
    parent_truth: Option<PathBuf>,
    /// Restrict the search to a single cycle structure.
    #[arg(long)]
    fast: bool,
    /// Cycle structure for `--fast` (1-based labels, one line); estimated
    /// from the draws when omitted.
    #[arg(long, requires = "fast")]
    z_hat: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n_zeal: usize,
    #[arg(long, default_value_t = 8)]
    n_runs: usize,
    #[arg(long)]
    no_early_stopping: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Run directory written by `fit`.
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    table: OracleTable,
}

#[derive(Subcommand)]
enum OracleTable {
    /// Prior pmf over all of S_n.
    Prior {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        prior: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact posterior of π for tiny graphs, default hyperparameters.
    Posterior {
        #[command(flatten)]
        graphs: GraphArgs,
        #[command(flatten)]
        prior: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cayley distances between all pairs of S_n by breadth-first search.
    Cayley {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Summarize(a) => cmd_summarize(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Oracle(a) => cmd_oracle(&a),
    }
}

#[derive(Serialize)]
struct SimulationRecord<'a> {
    seed: u64,
    spec: &'a SimulationSpec,
    xi: &'a [Vec<f64>],
}

fn write_labels(path: &Path, z: &[usize]) -> Result<()> {
    let line: Vec<String> = z.iter().map(|l| (l + 1).to_string()).collect();
    fs::write(path, line.join(" ") + "\n")?;
    Ok(())
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split_whitespace()
        .map(|t| match t.parse::<usize>() {
            Ok(l) if l > 0 => Ok(l - 1),
            _ => bail!("bad label {t:?} in {}", path.display()),
        })
        .collect()
}

fn read_permutation(path: &Path) -> Result<Permutation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.trim().parse()?)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = match (a.scenario, a.blocks) {
        (Some(Scenario::TwoCycle), _) => scenarios::two_cycle(30)?,
        (Some(Scenario::SevenBlock), _) => scenarios::seven_block(),
        (None, Some(blocks)) => {
            let n = a.n.context("--n is required with --blocks")?;
            scenarios::planted_blocks(n, blocks, a.p_in, a.p_out, a.alpha, a.beta)?
        }
        (None, None) => SimulationSpec {
            n: a.n.context("--n is required")?,
            permutation: PermutationSource::Family(a.prior.family()?),
            xi: BlockProbabilities::Beta { a: a.xi_a, b: a.xi_b },
            alpha: a.alpha,
            beta: a.beta,
        },
    };
    let sim = simulate(&spec, &mut chain_rng(a.seed, 0))?;
    fs::create_dir_all(&a.out)?;
    write_graph(&a.out.join("y1.csv"), &sim.graphs.y1, GraphFormat::Dense)?;
    write_graph(&a.out.join("y2.csv"), &sim.graphs.y2, GraphFormat::Dense)?;
    write_graph(&a.out.join("parent.csv"), &sim.parent, GraphFormat::Dense)?;
    fs::write(a.out.join("pi_true.txt"), sim.pi.to_one_line_string() + "\n")?;
    write_labels(&a.out.join("z_true.txt"), &sim.pi.allocation())?;
    let record = SimulationRecord { seed: a.seed, spec: &spec, xi: &sim.xi };
    fs::write(a.out.join("params.toml"), toml::to_string(&record)?)?;
    println!("wrote simulation with n = {} to {}", spec.n, a.out.display());
    Ok(())
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let graphs = a.graphs.load()?;
    let mut config = match &a.config {
        Some(p) => SamplerConfig::from_toml(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => SamplerConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(v) = a.n_iter {
        config.n_iter = v;
    }
    if let Some(v) = a.burn_in {
        config.burn_in = v;
    }
    if let Some(v) = a.thin {
        config.thin = v;
    }
    config.store_parent |= a.store_parent;
    config.validate()?;
    if a.chains == 0 {
        bail!("--chains must be at least 1");
    }
    if a.chains == 1 {
        let archive = run_seeded(&graphs, &config)?;
        write_run(&a.out, &archive)?;
        println!("{} draws written to {}", archive.draws.len(), a.out.display());
    } else {
        let archives = run_chains(&graphs, &config, a.chains)?;
        for (c, archive) in archives.iter().enumerate() {
            write_run(&a.out.join(format!("chain_{c}")), archive)?;
        }
        println!("{} chains written to {}", archives.len(), a.out.display());
    }
    Ok(())
}

fn write_run(dir: &Path, archive: &DrawArchive) -> Result<()> {
    archive.write(dir)?;
    fs::write(dir.join("config.toml"), archive.config.to_toml())?;
    Ok(())
}

#[derive(Default)]
struct Report {
    f_c: f64,
    cayley_to_truth: Option<usize>,
    expected_cayley_to_truth: Option<f64>,
    frobenius_estimate: Option<f64>,
    frobenius_truth: Option<f64>,
    nmi: Option<f64>,
    auc: Option<f64>,
}

impl Report {
    fn to_csv(&self) -> String {
        fn cell<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map_or_else(|| "NA".to_string(), ToString::to_string)
        }
        format!(
            "f_c,cayley_to_truth,expected_cayley_to_truth,frobenius_estimate,frobenius_truth,nmi,auc\n{},{},{},{},{},{},{}\n",
            self.f_c,
            cell(&self.cayley_to_truth),
            cell(&self.expected_cayley_to_truth),
            cell(&self.frobenius_estimate),
            cell(&self.frobenius_truth),
            cell(&self.nmi),
            cell(&self.auc),
        )
    }
}

fn read_parent_draws(path: &Path, n: usize) -> Result<Vec<ParentMatrix>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(ParentMatrix::from_upper_triangle_string(n, l.trim())?))
        .collect()
}

fn cmd_summarize(a: &SummarizeArgs) -> Result<()> {
    let draws = read_permutations(&a.draws).with_context(|| format!("reading {}", a.draws.display()))?;
    let sample = PosteriorPermSample::new(draws)?;
    let config = SummaryConfig {
        n_zeal: a.n_zeal,
        n_runs: a.n_runs,
        seed: a.seed,
        fast_mode: a.fast,
        early_stopping: !a.no_early_stopping,
    };
    let mut rng = chain_rng(config.seed, 0);
    let (estimate, f_c) = if config.fast_mode {
        let z_hat = match &a.z_hat {
            Some(p) => read_labels(p)?,
            None => {
                let z: Vec<Vec<usize>> = sample.draws().iter().map(Permutation::allocation).collect();
                partition_point_estimate(&z, &mut rng)?
            }
        };
        fast_persalso(&sample, &z_hat, &config, &mut rng)?
    } else {
        persalso(&sample, &config, &mut rng)?
    };
    fs::write(&a.out, estimate.to_one_line_string() + "\n")?;

    let mut report = Report { f_c, ..Default::default() };
    let truth = a.truth.as_deref().map(read_permutation).transpose()?;
    if let Some(t) = &truth {
        report.cayley_to_truth = Some(cayley_distance(&estimate, t)?);
        report.expected_cayley_to_truth = expected_cayley(&sample, t, None)?;
        report.nmi = Some(nmi(&estimate.allocation(), &t.allocation())?);
    }
    if let (Some(g1), Some(g2)) = (&a.graph1, &a.graph2) {
        let graphs = Graphs::new(read_graph(g1, None, None)?, read_graph(g2, None, None)?)?;
        report.frobenius_estimate = Some(frobenius_discrepancy(&graphs, &estimate)?);
        if let Some(t) = &truth {
            report.frobenius_truth = Some(frobenius_discrepancy(&graphs, t)?);
        }
    }
    if let (Some(pd), Some(pt)) = (&a.parent_draws, &a.parent_truth) {
        let truth = read_graph(pt, None, None)?;
        let parents = read_parent_draws(pd, truth.n())?;
        report.auc = auc_parent(&parents, &truth)?;
        if report.auc.is_none() {
            log::warn!("AUC undefined: the true parent network has no edges or is complete");
        }
    }
    if let Some(path) = &a.report {
        fs::write(path, report.to_csv())?;
    }
    println!("point estimate written to {} (f_C = {f_c})", a.out.display());
    Ok(())
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let archive = DrawArchive::read(&a.run).with_context(|| format!("reading run {}", a.run.display()))?;
    fs::create_dir_all(&a.out)?;
    let mut trace = String::from("iter,log_joint\n");
    let mut cycles = String::from("iter,k\n");
    for r in &archive.trace {
        trace.push_str(&format!("{},{}\n", r.iter, r.log_joint));
        cycles.push_str(&format!("{},{}\n", r.iter, r.k));
    }
    fs::write(a.out.join("trace.csv"), trace)?;
    fs::write(a.out.join("cycle_count.csv"), cycles)?;
    if archive.draws.is_empty() {
        log::warn!("run has no retained draws; mapping frequencies skipped");
        return Ok(());
    }
    let freq = mapping_frequencies(&archive.permutations())?;
    let mut out = String::new();
    for row in &freq {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(a.out.join("mapping_frequency.csv"), out)?;
    println!("diagnostics written to {}", a.out.display());
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    match &a.table {
        OracleTable::Prior { n, prior, out } => {
            let table = oracle::exact_prior_table(&prior.family()?, *n)?;
            fs::write(out, table.to_csv())?;
        }
        OracleTable::Posterior { graphs, prior, out } => {
            let table = oracle::exact_posterior_table(&graphs.load()?, &prior.family()?, &Default::default())?;
            fs::write(out, table.to_csv())?;
        }
        OracleTable::Cayley { n, out } => {
            let perms = oracle::enumerate_permutations(*n)?;
            let mut text = String::from("pi,sigma,distance\n");
            for p in &perms {
                for s in &perms {
                    let d = oracle::cayley_bfs(p, s)?;
                    text.push_str(&format!("{},{},{d}\n", p.to_one_line_string(), s.to_one_line_string()));
                }
            }
            fs::write(out, text)?;
        }
    }
    Ok(())
}
