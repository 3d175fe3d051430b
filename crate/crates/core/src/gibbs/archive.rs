//! Running chains and storing their output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csbm::{Graphs, ParentMatrix};
use crate::error::{Error, Result};
use crate::perm::Permutation;

use super::chain::init_state;
use super::config::SamplerConfig;

/// One retained posterior draw.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    /// Sweep index (1-based).
    pub iter: usize,
    pub pi: Permutation,
    pub alpha: f64,
    pub beta: f64,
    /// Dirichlet concentration; `None` for other families.
    pub theta: Option<f64>,
    pub log_joint: f64,
    pub k: usize,
    pub parent: Option<ParentMatrix>,
}

impl Draw {
    /// Cycle allocation of π.
    pub fn z(&self) -> Vec<usize> {
        self.pi.allocation()
    }
}

/// Per-sweep scalar trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub alpha: f64,
    pub beta: f64,
    pub theta: Option<f64>,
    pub log_joint: f64,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Meta {
    seed: u64,
    config_hash: String,
    wall_time_secs: f64,
    config: SamplerConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrawArchive {
    pub draws: Vec<Draw>,
    pub trace: Vec<TraceRow>,
    pub seed: u64,
    pub config_hash: String,
    pub config: SamplerConfig,
    pub wall_time_secs: f64,
}

impl DrawArchive {
    pub fn permutations(&self) -> Vec<Permutation> {
        self.draws.iter().map(|d| d.pi.clone()).collect()
    }

    /// Writes `pi.draws`, `scalars.csv`, `meta.toml` and, when parents were
    /// stored, `parent.draws` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut pi = String::new();
        for d in &self.draws {
            pi.push_str(&d.pi.to_one_line_string());
            pi.push('\n');
        }
        fs::write(dir.join("pi.draws"), pi)?;

        let mut csv = csv::Writer::from_path(dir.join("scalars.csv"))?;
        csv.write_record(["iter", "alpha", "beta", "theta", "log_joint", "k"])?;
        for r in &self.trace {
            let theta = r.theta.map_or_else(|| "NA".to_string(), |t| t.to_string());
            csv.write_record([
                r.iter.to_string(),
                r.alpha.to_string(),
                r.beta.to_string(),
                theta,
                r.log_joint.to_string(),
                r.k.to_string(),
            ])?;
        }
        csv.flush()?;

        if self.draws.iter().any(|d| d.parent.is_some()) {
            let mut out = String::new();
            for d in &self.draws {
                if let Some(p) = &d.parent {
                    out.push_str(&p.upper_triangle_string());
                }
                out.push('\n');
            }
            fs::write(dir.join("parent.draws"), out)?;
        }

        let meta = Meta {
            seed: self.seed,
            config_hash: self.config_hash.clone(),
            wall_time_secs: self.wall_time_secs,
            config: self.config.clone(),
        };
        let text = toml::to_string(&meta).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(dir.join("meta.toml"), text)?;
        Ok(())
    }

    /// Reads an archive written by [`write`](Self::write).
    pub fn read(dir: &Path) -> Result<Self> {
        let meta: Meta = toml::from_str(&fs::read_to_string(dir.join("meta.toml"))?)
            .map_err(|e| Error::Parse(format!("meta.toml: {e}")))?;
        let mut trace = Vec::new();
        let mut rdr = csv::Reader::from_path(dir.join("scalars.csv"))?;
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse("short scalars.csv row".into()));
            let num = |i: usize| -> Result<f64> {
                field(i)?.parse::<f64>().map_err(|e| Error::Parse(format!("scalars.csv: {e}")))
            };
            let theta = match field(3)? {
                "NA" => None,
                _ => Some(num(3)?),
            };
            trace.push(TraceRow {
                iter: field(0)?.parse().map_err(|e| Error::Parse(format!("scalars.csv: {e}")))?,
                alpha: num(1)?,
                beta: num(2)?,
                theta,
                log_joint: num(4)?,
                k: field(5)?.parse().map_err(|e| Error::Parse(format!("scalars.csv: {e}")))?,
            });
        }
        let pis = read_permutations(&dir.join("pi.draws"))?;
        let parents: Option<Vec<String>> = match fs::read_to_string(dir.join("parent.draws")) {
            Ok(text) => Some(text.lines().map(str::to_string).collect()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e.into()),
        };
        let cfg = &meta.config;
        let mut draws = Vec::with_capacity(pis.len());
        for (i, pi) in pis.into_iter().enumerate() {
            let iter = cfg.burn_in + cfg.thin * (i + 1);
            let row = iter
                .checked_sub(1)
                .and_then(|i| trace.get(i))
                .filter(|r| r.iter == iter)
                .or_else(|| trace.iter().find(|r| r.iter == iter))
                .ok_or_else(|| Error::Inconsistent(format!("no scalars row for sweep {iter}")))?;
            let parent = match &parents {
                Some(lines) => {
                    let line = lines
                        .get(i)
                        .ok_or_else(|| Error::Inconsistent("parent.draws shorter than pi.draws".into()))?;
                    Some(ParentMatrix::from_upper_triangle_string(pi.n(), line)?)
                }
                None => None,
            };
            draws.push(Draw {
                iter,
                pi,
                alpha: row.alpha,
                beta: row.beta,
                theta: row.theta,
                log_joint: row.log_joint,
                k: row.k,
                parent,
            });
        }
        Ok(Self {
            draws,
            trace,
            seed: meta.seed,
            config_hash: meta.config_hash,
            config: meta.config,
            wall_time_secs: meta.wall_time_secs,
        })
    }
}

/// Reads a file of one-line permutations, one per non-empty line.
pub fn read_permutations(path: &Path) -> Result<Vec<Permutation>> {
    let text = fs::read_to_string(path)?;
    let perms = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Permutation>>>()?;
    if let Some(first) = perms.first() {
        if let Some(bad) = perms.iter().find(|p| p.n() != first.n()) {
            return Err(Error::SizeMismatch { expected: first.n(), found: bad.n() });
        }
    }
    Ok(perms)
}

/// Writes permutations in one-line form, one per line.
pub fn write_permutations(path: &Path, perms: &[Permutation]) -> Result<()> {
    let mut out = String::new();
    for p in perms {
        writeln!(out, "{}", p.to_one_line_string()).expect("writing to a string");
    }
    fs::write(path, out)?;
    Ok(())
}

/// RNG for chain `stream` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs one chain: initialization, then `n_iter` sweeps.
pub fn run<R: Rng + ?Sized>(graphs: &Graphs, config: &SamplerConfig, rng: &mut R) -> Result<DrawArchive> {
    config.validate()?;
    let start = Instant::now();
    let mut state = init_state(graphs, config, rng)?;
    let n = graphs.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut draws = Vec::with_capacity(config.draw_count());
    let mut trace = Vec::with_capacity(config.n_iter);
    let mut update_theta = config.update_theta;
    for s in 1..=config.n_iter {
        order.shuffle(rng);
        for &v in &order {
            state.node_move(v, graphs, rng)?;
            state.parent_row_update(v, graphs, rng);
        }
        state.noise_update(rng)?;
        if update_theta {
            update_theta = state.theta_update(&config.theta_prior, rng)?;
        }
        if s % config.check_period == 0 {
            state.check_consistency(graphs)?;
        }
        let log_joint = state.log_joint()?;
        if !log_joint.is_finite() {
            log::warn!("non-finite log joint at sweep {s}");
        }
        let noise = state.noise();
        let theta = match state.family() {
            crate::eperpf::EperpfFamily::Dirichlet { theta } => Some(*theta),
            _ => None,
        };
        let row = TraceRow { iter: s, alpha: noise.alpha, beta: noise.beta, theta, log_joint, k: state.k() };
        trace.push(row);
        if config.keeps(s) {
            draws.push(Draw {
                iter: s,
                pi: state.pi(),
                alpha: row.alpha,
                beta: row.beta,
                theta,
                log_joint,
                k: row.k,
                parent: config.store_parent.then(|| state.parent().clone()),
            });
        }
        if s % 1000 == 0 {
            log::debug!("sweep {s}: log joint {log_joint:.3}, k = {}", row.k);
        }
    }
    Ok(DrawArchive {
        draws,
        trace,
        seed: config.seed,
        config_hash: config.hash(),
        config: config.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Runs one chain seeded from `config.seed`.
pub fn run_seeded(graphs: &Graphs, config: &SamplerConfig) -> Result<DrawArchive> {
    run(graphs, config, &mut chain_rng(config.seed, 0))
}

/// Seed of chain `index` derived from a master seed. Kept below 2⁶³ so it
/// round-trips through TOML integers.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    chain_rng(master, index.wrapping_add(1)).random::<u64>() >> 1
}

/// Runs `chains` independent chains in parallel. Chain `c` runs
/// [`run_seeded`] with seed `derive_seed(config.seed, c)`, recorded in its
/// archive.
pub fn run_chains(graphs: &Graphs, config: &SamplerConfig, chains: usize) -> Result<Vec<DrawArchive>> {
    (0..chains as u64)
        .into_par_iter()
        .map(|c| {
            let cfg = SamplerConfig { seed: derive_seed(config.seed, c), ..config.clone() };
            run_seeded(graphs, &cfg)
        })
        .collect()
}
