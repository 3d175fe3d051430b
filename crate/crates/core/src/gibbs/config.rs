//! Sampler configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csbm::Hyperparameters;
use crate::eperpf::EperpfFamily;
use crate::error::{Error, Result};

/// Gamma(shape, rate) hyperprior on the Dirichlet concentration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl Default for GammaPrior {
    fn default() -> Self {
        Self { shape: 1.0, rate: 1.0 }
    }
}

/// How the chain is started.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Cycle structure from a collapsed-Gibbs SBM fit to the first graph.
    #[default]
    Sbm,
    /// Forward draw from the prior.
    Random,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub prior: EperpfFamily<f64>,
    pub hyper: Hyperparameters<f64>,
    /// Resample θ (Dirichlet prior only).
    pub update_theta: bool,
    pub theta_prior: GammaPrior,
    /// Sweeps between full recomputations of the cached statistics.
    pub check_period: usize,
    pub init: InitMode,
    /// Sweeps of the SBM partition sampler used by [`InitMode::Sbm`].
    pub init_sweeps: usize,
    /// Keep the parent network with every retained draw.
    pub store_parent: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            burn_in: 2_000,
            thin: 10,
            seed: 0,
            prior: EperpfFamily::Dirichlet { theta: 1.0 },
            hyper: Hyperparameters::default(),
            update_theta: true,
            theta_prior: GammaPrior::default(),
            check_period: 50,
            init: InitMode::Sbm,
            init_sweeps: 200,
            store_parent: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.n_iter == 0 {
            return bad("n_iter must be positive");
        }
        if self.thin == 0 {
            return bad("thin must be at least 1");
        }
        if self.burn_in > self.n_iter {
            return bad("burn_in cannot exceed n_iter");
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed must be below 2^63");
        }
        if self.check_period == 0 {
            return bad("check_period must be positive");
        }
        if !(self.theta_prior.shape > 0.0 && self.theta_prior.rate > 0.0) {
            return bad("theta_prior shape and rate must be positive");
        }
        self.prior.validate()?;
        self.hyper.validate()
    }

    /// Number of retained draws, `⌊(n_iter − burn_in)/thin⌋`.
    pub fn draw_count(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    /// Whether sweep `s` (1-based) is retained.
    pub fn keeps(&self, s: usize) -> bool {
        s > self.burn_in && (s - self.burn_in).is_multiple_of(self.thin)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sampler config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = SamplerConfig::from_toml(
            "n_iter = 50\nburn_in = 10\nthin = 4\nprior = { family = \"pitman_yor\", theta = 1.0, discount = 0.3 }\n",
        )
        .unwrap();
        assert_eq!(cfg.prior, EperpfFamily::PitmanYor { theta: 1.0, discount: 0.3 });
        assert_eq!(cfg.check_period, 50);
        assert_eq!(cfg.draw_count(), 10);
        let back = SamplerConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert!(SamplerConfig::from_toml("thin = 0").is_err());
        assert!(SamplerConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn kept_sweeps() {
        let cfg = SamplerConfig { n_iter: 25, burn_in: 5, thin: 3, ..Default::default() };
        let kept: Vec<usize> = (1..=25).filter(|&s| cfg.keeps(s)).collect();
        assert_eq!(kept, vec![8, 11, 14, 17, 20, 23]);
        assert_eq!(kept.len(), cfg.draw_count());
    }
}
