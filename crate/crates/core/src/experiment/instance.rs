//! Robust field-estimation instances.
//!
//! The prior precision is `L + D`: `L` the weighted Laplacian of the network
//! (couplings `W_ij` uniform in `[0.5, 1.5]`) and `D` a diagonal with
//! entries `σ_ii` uniform in `[0.5, 1.5]`. Then
//! `θᵀ(L + D)θ = Σ_{i~j} W_ij (θ_i − θ_j)² + Σ_i σ_ii θ_i²`, so the Huber
//! MAP objective is an instance of the network problem with
//! `f_i(θ) = φ_δ(y_i − θ) + ½ σ_ii θ²`.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{ExperimentConfig, NoiseConfig, Topology};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::losses::{huber, HuberFieldLoss, PersonalLoss};
use crate::network::Network;
use crate::rng::{sim_rng, SimRng};

const COUPLING_RANGE: (f64, f64) = (0.5, 1.5);
const PRIOR_DIAG_RANGE: (f64, f64) = (0.5, 1.5);
const MAX_GRAPH_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInstance {
    /// Network with `p = 1`; its edge weights are the prior couplings.
    pub net: Network,
    pub sigma_diag: Vec<f64>,
    pub theta_true: Vec<f64>,
    pub y: Vec<f64>,
    pub delta: f64,
    pub noise: NoiseConfig,
    /// Agent locations, for geometric topologies.
    pub positions: Option<Vec<[f64; 2]>>,
}

/// Random geometric graph on `n` uniform points in the unit square,
/// resampled until connected. Edges carry unit weight.
pub fn random_geometric_graph(n: usize, radius: f64, rng: &mut SimRng) -> Result<(Vec<[f64; 2]>, Vec<(usize, usize)>)> {
    for _ in 0..MAX_GRAPH_ATTEMPTS {
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
                if dx * dx + dy * dy <= radius * radius {
                    edges.push((i, j));
                }
            }
        }
        let unit: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        match Network::new(n, 1, &unit) {
            Ok(_) => return Ok((pts, edges)),
            Err(Error::DisconnectedGraph) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidTopology(format!(
        "no connected geometric graph with n = {n}, radius = {radius} after {MAX_GRAPH_ATTEMPTS} draws"
    )))
}

/// Builds the instance for `cfg` from an explicit seed.
pub fn generate_instance_with_seed(cfg: &ExperimentConfig, seed: u64) -> Result<FieldInstance> {
    cfg.validate()?;
    let mut rng = sim_rng(seed);
    let (net, positions) = match &cfg.topology {
        Topology::Geometric { radius } => {
            let (pts, edges) = random_geometric_graph(cfg.n, *radius, &mut rng)?;
            let weighted: Vec<_> = edges
                .iter()
                .map(|&(i, j)| (i, j, rng.random_range(COUPLING_RANGE.0..COUPLING_RANGE.1)))
                .collect();
            (Network::new(cfg.n, 1, &weighted)?, Some(pts))
        }
        Topology::EdgeList(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let net = Network::from_edge_list(&text, cfg.n, 1)
                .map_err(|e| Error::InvalidTopology(format!("{}: {e}", path.display())))?;
            (net, None)
        }
    };
    let sigma_diag: Vec<f64> = (0..cfg.n)
        .map(|_| rng.random_range(PRIOR_DIAG_RANGE.0..PRIOR_DIAG_RANGE.1))
        .collect();

    // θ ~ N(0, P⁻¹) with P = R Rᵀ: θ = R⁻ᵀ ξ.
    let precision = precision_matrix(&net, &sigma_diag);
    let chol = precision.cholesky().ok_or(Error::FactorizationFailure)?;
    let xi = DVector::from_iterator(cfg.n, (0..cfg.n).map(|_| StandardNormal.sample(&mut rng)));
    let theta = chol
        .l()
        .transpose()
        .solve_upper_triangular(&xi)
        .ok_or(Error::FactorizationFailure)?;
    let theta_true: Vec<f64> = theta.iter().copied().collect();

    let y = theta_true
        .iter()
        .map(|t| {
            let outlier = rng.random::<f64>() < cfg.noise.outlier_prob;
            let z: f64 = StandardNormal.sample(&mut rng);
            let scale = if outlier { cfg.noise.outlier_scale } else { cfg.noise.base };
            t + scale * z
        })
        .collect();

    Ok(FieldInstance {
        net,
        sigma_diag,
        theta_true,
        y,
        delta: cfg.delta,
        noise: cfg.noise,
        positions,
    })
}

/// Builds the instance for `cfg` from its instance seed.
pub fn generate_instance(cfg: &ExperimentConfig) -> Result<FieldInstance> {
    generate_instance_with_seed(cfg, cfg.instance_seed())
}

/// `L + diag(σ)` for the network's weighted Laplacian `L`.
pub fn precision_matrix(net: &Network, sigma_diag: &[f64]) -> DMatrix<f64> {
    let n = net.n();
    let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(sigma_diag));
    for (i, j, w) in net.weighted_edges() {
        m[(i, i)] += w;
        m[(j, j)] += w;
        m[(i, j)] -= w;
        m[(j, i)] -= w;
    }
    debug_assert_eq!(m.nrows(), n);
    m
}

impl FieldInstance {
    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn precision(&self) -> DMatrix<f64> {
        precision_matrix(&self.net, &self.sigma_diag)
    }

    /// Couplings `(i, j, W_ij)`, 0-based.
    pub fn coupling(&self) -> Vec<(usize, usize, f64)> {
        self.net.weighted_edges()
    }

    /// The robust MAP objective in prior form,
    /// `½(Σ_{i~j} W_ij (θ_i − θ_j)² + Σ_i σ_ii θ_i²) + Σ_i φ_δ(y_i − θ_i)`.
    pub fn map_objective(&self, theta: &[f64]) -> f64 {
        let pair: f64 = self
            .coupling()
            .iter()
            .map(|&(i, j, w)| w * (theta[i] - theta[j]).powi(2))
            .sum();
        let prior: f64 = self.sigma_diag.iter().zip(theta).map(|(s, t)| s * t * t).sum();
        let data: f64 = self.y.iter().zip(theta).map(|(y, t)| huber(y - t, self.delta)).sum();
        0.5 * (pair + prior) + data
    }

    /// Writes `edges.csv`, `network.txt`, `sigma_diag.csv`, `theta_true.csv`
    /// and `y.csv` into `dir`. Agents are 1-based.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| -> Result<()> {
            let path = dir.join(name);
            let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            f.write_all(body.as_bytes()).map_err(|e| Error::io(&path, e))
        };
        let mut edges = String::from("i,j,weight\n");
        for (i, j, w) in self.coupling() {
            edges.push_str(&format!("{},{},{}\n", i + 1, j + 1, fmt_f64(w)));
        }
        write("edges.csv", edges)?;
        write("network.txt", self.net.to_edge_list())?;
        let per_agent = |header: &str, vals: &[f64]| {
            let mut s = format!("agent,{header}\n");
            for (i, v) in vals.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
            }
            s
        };
        write("sigma_diag.csv", per_agent("sigma", &self.sigma_diag))?;
        write("theta_true.csv", per_agent("value", &self.theta_true))?;
        write("y.csv", per_agent("value", &self.y))?;
        if let Some(pts) = &self.positions {
            let mut s = String::from("agent,x,y\n");
            for (i, p) in pts.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", i + 1, fmt_f64(p[0]), fmt_f64(p[1])));
            }
            write("positions.csv", s)?;
        }
        Ok(())
    }
}

/// Personal losses `f_i(θ) = φ_δ(y_i − θ) + ½ σ_ii θ²`.
pub fn instance_losses(inst: &FieldInstance) -> Vec<HuberFieldLoss> {
    inst.y
        .iter()
        .zip(&inst.sigma_diag)
        .map(|(&y, &s)| HuberFieldLoss::new(y, s, inst.delta).expect("instance parameters are validated"))
        .collect()
}

/// The network objective `½ Σ_{i<j} W_ij ‖θ_i − θ_j‖² + Σ_i f_i(θ_i)`.
pub fn network_objective<L: PersonalLoss>(net: &Network, losses: &[L], theta: &[DVector<f64>]) -> f64 {
    let pair: f64 = net
        .weighted_edges()
        .iter()
        .map(|&(i, j, w)| w * (&theta[i] - &theta[j]).norm_squared())
        .sum();
    let personal: f64 = losses.iter().zip(theta).map(|(l, t)| l.value(t)).sum();
    0.5 * pair + personal
}
