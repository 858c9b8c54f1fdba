//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! n = 30
//! topology.radius = 0.3        # random geometric graph radius
//! topology.edges = graph.txt   # or: load an edge list instead
//! trials = 100
//! rounds = 200000
//! noise.base = 0.1
//! noise.outlier_prob = 0.1
//! noise.outlier_scale = 1.0
//! huber.delta = 0.3
//! admm.rhos = 0.1, 0.316, 1.0, 3.16, 10
//! init.policy = zeros          # or constant:<c>
//! seed = 1
//! seed.instance = 7            # optional, derived from `seed` otherwise
//! seed.trials = 8              # optional, derived from `seed` otherwise
//! trace.stride = 100           # per-round CSV rows every k rounds
//! trace.trials = 1             # trials whose per-round traces are written
//! ```
//!
//! Unknown keys and repeated keys are errors.

use std::path::{Path, PathBuf};

use crate::djam::InitPolicy;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

pub const KEYS: &[&str] = &[
    "n",
    "topology.radius",
    "topology.edges",
    "trials",
    "rounds",
    "noise.base",
    "noise.outlier_prob",
    "noise.outlier_scale",
    "huber.delta",
    "admm.rhos",
    "init.policy",
    "seed",
    "seed.instance",
    "seed.trials",
    "trace.stride",
    "trace.trials",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    /// Points uniform in the unit square, linked within `radius`.
    Geometric { radius: f64 },
    /// 1-based edge-list file; its weights are the couplings `W_ij`.
    EdgeList(PathBuf),
}

/// Measurement noise: `N(0, base²)` with probability `1 − outlier_prob`,
/// otherwise `N(0, outlier_scale²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub base: f64,
    pub outlier_prob: f64,
    pub outlier_scale: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            base: 0.1,
            outlier_prob: 0.1,
            outlier_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub topology: Topology,
    pub trials: usize,
    pub rounds: u64,
    pub noise: NoiseConfig,
    pub delta: f64,
    pub rhos: Vec<f64>,
    pub init: InitPolicy,
    pub seed: u64,
    pub instance_seed: Option<u64>,
    pub trial_seed: Option<u64>,
    pub trace_stride: u64,
    pub trace_trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 30,
            topology: Topology::Geometric { radius: 0.3 },
            trials: 100,
            rounds: 200_000,
            noise: NoiseConfig::default(),
            delta: 0.3,
            rhos: vec![0.1, 0.316, 1.0, 3.16, 10.0],
            init: InitPolicy::Zeros,
            seed: 1,
            instance_seed: None,
            trial_seed: None,
            trace_stride: 100,
            trace_trials: 1,
        }
    }
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults. Relative `topology.edges`
    /// paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: lineno + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| err(format!("unknown key {key:?}")))?;
            if seen.contains(known) {
                return Err(err(format!("duplicate key {key:?}")));
            }
            seen.push(known);

            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("{key}: expected a number, got {v:?}")))
            };
            let int = |v: &str| -> Result<u64> {
                v.parse::<u64>()
                    .map_err(|_| err(format!("{key}: expected a nonnegative integer, got {v:?}")))
            };
            match key {
                "n" => cfg.n = int(value)? as usize,
                "topology.radius" => {
                    if matches!(cfg.topology, Topology::EdgeList(_)) {
                        return Err(err("topology.radius conflicts with topology.edges".into()));
                    }
                    cfg.topology = Topology::Geometric { radius: num(value)? }
                }
                "topology.edges" => {
                    if seen.contains(&"topology.radius") {
                        return Err(err("topology.edges conflicts with topology.radius".into()));
                    }
                    let p = PathBuf::from(value);
                    cfg.topology = Topology::EdgeList(match base_dir {
                        Some(d) if p.is_relative() => d.join(p),
                        _ => p,
                    });
                }
                "trials" => cfg.trials = int(value)? as usize,
                "rounds" => cfg.rounds = int(value)?,
                "noise.base" => cfg.noise.base = num(value)?,
                "noise.outlier_prob" => cfg.noise.outlier_prob = num(value)?,
                "noise.outlier_scale" => cfg.noise.outlier_scale = num(value)?,
                "huber.delta" => cfg.delta = num(value)?,
                "admm.rhos" => {
                    cfg.rhos = value
                        .split(',')
                        .map(|s| num(s.trim()))
                        .collect::<Result<_>>()?
                }
                "init.policy" => cfg.init = parse_init(value).map_err(err)?,
                "seed" => cfg.seed = int(value)?,
                "seed.instance" => cfg.instance_seed = Some(int(value)?),
                "seed.trials" => cfg.trial_seed = Some(int(value)?),
                "trace.stride" => cfg.trace_stride = int(value)?,
                "trace.trials" => cfg.trace_trials = int(value)? as usize,
                _ => unreachable!("key list and match arms agree"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(Error::Config { line: 0, message });
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Topology::Geometric { radius } = self.topology {
            if !(radius > 0.0) {
                return bad(format!("topology.radius must be positive, got {radius}"));
            }
        }
        let n = &self.noise;
        if !(n.base >= 0.0 && n.outlier_scale >= 0.0) {
            return bad("noise scales must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&n.outlier_prob) {
            return bad(format!("noise.outlier_prob must lie in [0, 1], got {}", n.outlier_prob));
        }
        if !(self.delta > 0.0) {
            return bad(format!("huber.delta must be positive, got {}", self.delta));
        }
        if let Some(r) = self.rhos.iter().find(|r| !(**r > 0.0)) {
            return bad(format!("admm.rhos must be positive, got {r}"));
        }
        if self.trace_stride == 0 {
            return bad("trace.stride must be at least 1".into());
        }
        Ok(())
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance_seed
            .unwrap_or_else(|| derive_seed(self.seed, stream::INSTANCE))
    }

    pub fn trial_master_seed(&self) -> u64 {
        self.trial_seed
            .unwrap_or_else(|| derive_seed(self.seed, stream::TRIALS))
    }

    /// Edge-draw seed of trial `k`.
    pub fn trial_seed(&self, k: usize) -> u64 {
        derive_seed(self.trial_master_seed(), k as u64)
    }
}

fn parse_init(value: &str) -> std::result::Result<InitPolicy, String> {
    if value == "zeros" {
        return Ok(InitPolicy::Zeros);
    }
    if let Some(c) = value.strip_prefix("constant:") {
        let c: f64 = c
            .trim()
            .parse()
            .ok()
            .filter(|c: &f64| c.is_finite())
            .ok_or_else(|| format!("bad constant in init.policy {value:?}"))?;
        return Ok(InitPolicy::Constant(c));
    }
    Err(format!("init.policy must be `zeros` or `constant:<c>`, got {value:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty() {
        assert_eq!(ExperimentConfig::parse("", None).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn full_config() {
        let text = "n = 12\ntopology.radius=0.5\ntrials = 3 # few\nrounds = 1000\n\
                    noise.base = 0.2\nnoise.outlier_prob = 0\nnoise.outlier_scale = 2\n\
                    huber.delta = 1\nadmm.rhos = 1, 2.5\ninit.policy = constant:0.5\n\
                    seed = 9\nseed.trials = 4\ntrace.stride = 7\ntrace.trials = 2\n";
        let cfg = ExperimentConfig::parse(text, None).unwrap();
        assert_eq!(cfg.n, 12);
        assert_eq!(cfg.topology, Topology::Geometric { radius: 0.5 });
        assert_eq!(cfg.rhos, vec![1.0, 2.5]);
        assert_eq!(cfg.init, InitPolicy::Constant(0.5));
        assert_eq!(cfg.trial_master_seed(), 4);
        assert_eq!(cfg.instance_seed(), derive_seed(9, stream::INSTANCE));
        assert_eq!(cfg.trace_trials, 2);
    }

    #[test]
    fn edge_list_path_is_relative_to_config() {
        let cfg = ExperimentConfig::parse("topology.edges = g.txt", Some(Path::new("/tmp/x"))).unwrap();
        assert_eq!(cfg.topology, Topology::EdgeList(PathBuf::from("/tmp/x/g.txt")));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bogus = 1",
            "n = 3\nn = 4",
            "n",
            "n = -1",
            "trials = 0",
            "huber.delta = 0",
            "admm.rhos = 1, 0",
            "init.policy = random",
            "noise.outlier_prob = 1.5",
            "topology.radius = 0.2\ntopology.edges = a.txt",
            "rounds = 1e5",
        ] {
            assert!(
                matches!(ExperimentConfig::parse(text, None), Err(Error::Config { .. })),
                "accepted {text:?}"
            );
        }
    }
}
