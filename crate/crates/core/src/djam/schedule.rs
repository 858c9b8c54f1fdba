use rand::Rng;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng::{sim_rng, SimRng};

/// Edge-activation distribution: each round draws one edge independently,
/// edge `k` with probability `q_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    seed: u64,
}

impl Schedule {
    /// `probs` is aligned with `net.edges()`.
    pub fn new(net: &Network, probs: Vec<f64>, seed: u64) -> Result<Self> {
        if net.num_edges() == 0 {
            return Err(Error::InvalidSchedule("network has no edges".into()));
        }
        if probs.len() != net.num_edges() {
            return Err(Error::InvalidSchedule(format!(
                "{} probabilities for {} edges",
                probs.len(),
                net.num_edges()
            )));
        }
        if let Some((k, q)) = probs
            .iter()
            .enumerate()
            .find(|(_, q)| !(q.is_finite() && **q > 0.0))
        {
            let e = net.edge(k);
            return Err(Error::InvalidSchedule(format!(
                "edge ({}, {}) has probability {q}",
                e.lo(),
                e.hi()
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSchedule(format!(
                "probabilities sum to {total}"
            )));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|q| {
                acc += q;
                acc
            })
            .collect();
        Ok(Schedule {
            probs,
            cumulative,
            seed,
        })
    }

    pub fn uniform(net: &Network, seed: u64) -> Result<Self> {
        let e = net.num_edges();
        Self::new(net, vec![1.0 / e as f64; e], seed)
    }

    /// Distribution induced by waking a uniformly random agent, which then
    /// picks a uniformly random neighbor: `q_(i,j) = (1/deg i + 1/deg j) / n`.
    pub fn agent_wakeup(net: &Network, seed: u64) -> Result<Self> {
        let n = net.n() as f64;
        let mut probs: Vec<f64> = net
            .edges()
            .iter()
            .map(|e| {
                (1.0 / net.degree(e.lo()) as f64 + 1.0 / net.degree(e.hi()) as f64) / n
            })
            .collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|q| *q /= total);
        Self::new(net, probs, seed)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh generator positioned at the start of this schedule's stream.
    pub fn rng(&self) -> SimRng {
        sim_rng(self.seed)
    }

    /// Samples an edge index.
    pub fn draw_edge(&self, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.probs.len() - 1)
    }
}
