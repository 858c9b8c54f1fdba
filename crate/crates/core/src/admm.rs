//! Edge-activated ADMM baseline.
//!
//! The network problem is split with one copy `z_ij` of `θ_i` per directed
//! edge:
//!
//! ```text
//! min Σ_i f_i(θ_i) + Σ_{(i,j)∈E} ½ W_ij ‖z_ij − z_ji‖²   s.t.  θ_i = z_ij
//! ```
//!
//! with augmented Lagrangian penalty `ρ` and unscaled duals `u_ij`. Drawing
//! edge `(i, j)` performs one Gauss–Seidel pass restricted to that edge:
//! primal updates of `θ_i` and `θ_j` (each against all incident copies),
//! the closed-form update of the pair `(z_ij, z_ji)`, then dual ascent on
//! the two constraints of the edge.

use nalgebra::DVector;

use crate::djam::{check_nonzero_components, mean_relative_error, EpochTracker, InitPolicy, RoundRecord, Schedule, Trace};
use crate::error::{Error, Result};
use crate::losses::{resolvent, PersonalLoss};
use crate::network::Network;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    theta: Vec<DVector<f64>>,
    // Per edge k = (lo, hi): [z_lo,hi, z_hi,lo] and likewise for duals.
    copies: Vec<[DVector<f64>; 2]>,
    duals: Vec<[DVector<f64>; 2]>,
    rho: f64,
    round: u64,
}

fn side(net: &Network, k: usize, agent: usize) -> usize {
    usize::from(net.edge(k).lo() != agent)
}

impl AdmmState {
    /// Primals from `policy`, copies equal to their primals, zero duals.
    pub fn new(net: &Network, rho: f64, policy: &InitPolicy) -> Result<Self> {
        let p = net.p();
        let theta = match policy {
            InitPolicy::Zeros => vec![DVector::zeros(p); net.n()],
            InitPolicy::Constant(c) => vec![DVector::from_element(p, *c); net.n()],
            InitPolicy::PerAgent(models) => models.clone(),
            InitPolicy::Explicit(_) => {
                return Err(Error::UnsupportedInit("ADMM primals are per agent, not per neighbor pair"))
            }
        };
        Self::from_primals(net, rho, theta)
    }

    pub fn from_primals(net: &Network, rho: f64, theta: Vec<DVector<f64>>) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::NonpositiveRho(rho));
        }
        if theta.len() != net.n() {
            return Err(Error::DimensionMismatch {
                expected: net.n(),
                got: theta.len(),
            });
        }
        for t in &theta {
            if t.len() != net.p() {
                return Err(Error::DimensionMismatch {
                    expected: net.p(),
                    got: t.len(),
                });
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput);
            }
        }
        let copies = net
            .edges()
            .iter()
            .map(|e| [theta[e.lo()].clone(), theta[e.hi()].clone()])
            .collect();
        let duals = vec![[DVector::zeros(net.p()), DVector::zeros(net.p())]; net.num_edges()];
        Ok(AdmmState {
            theta,
            copies,
            duals,
            rho,
            round: 0,
        })
    }

    /// The KKT point of a known solution: copies equal primals and
    /// `u_ij = W_ij (θ_i − θ_j)`.
    pub fn at_solution(net: &Network, rho: f64, theta_star: &[DVector<f64>]) -> Result<Self> {
        let mut st = Self::from_primals(net, rho, theta_star.to_vec())?;
        for (k, e) in net.edges().iter().enumerate() {
            let w = net.edge_weight(k);
            let diff = &theta_star[e.lo()] - &theta_star[e.hi()];
            st.duals[k] = [&diff * w, &diff * (-w)];
        }
        Ok(st)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn primals(&self) -> &[DVector<f64>] {
        &self.theta
    }

    /// `z_ij`, the copy of `θ_i` held for edge `(i, j)`.
    pub fn copy(&self, net: &Network, i: usize, j: usize) -> Option<&DVector<f64>> {
        let k = net.edge_index(i, j)?;
        Some(&self.copies[k][side(net, k, i)])
    }

    /// `u_ij`, the multiplier of `θ_i = z_ij`.
    pub fn dual(&self, net: &Network, i: usize, j: usize) -> Option<&DVector<f64>> {
        let k = net.edge_index(i, j)?;
        Some(&self.duals[k][side(net, k, i)])
    }

    /// `max ‖θ_i − z_ij‖` over directed edges.
    pub fn primal_feasibility(&self, net: &Network) -> f64 {
        net.edges()
            .iter()
            .enumerate()
            .flat_map(|(k, e)| {
                [
                    (&self.theta[e.lo()] - &self.copies[k][0]).norm(),
                    (&self.theta[e.hi()] - &self.copies[k][1]).norm(),
                ]
            })
            .fold(0.0, f64::max)
    }

    fn primal_update<L: PersonalLoss>(&self, net: &Network, loss: &L, i: usize) -> Result<DVector<f64>> {
        // argmin f_i(θ) + Σ_k u_ikᵀθ + ρ/2 ‖θ − z_ik‖²
        let mut s = DVector::zeros(net.p());
        for nb in net.neighbors(i) {
            let sd = side(net, nb.edge, i);
            s.axpy(self.rho, &self.copies[nb.edge][sd], 1.0);
            s -= &self.duals[nb.edge][sd];
        }
        resolvent(loss, self.rho * net.degree(i) as f64, &s)
    }

    /// Activates edge `(i, j)`.
    pub fn admm_round<L: PersonalLoss>(&mut self, net: &Network, losses: &[L], i: usize, j: usize) -> Result<()> {
        let k = net.edge_index(i, j).ok_or(Error::UnknownEdge(i, j))?;
        self.activate(net, losses, k)
    }

    /// Activates edge `k`.
    pub fn activate<L: PersonalLoss>(&mut self, net: &Network, losses: &[L], k: usize) -> Result<()> {
        let (lo, hi) = net.edge(k).endpoints();
        let theta_lo = self.primal_update(net, &losses[lo], lo)?;
        let theta_hi = self.primal_update(net, &losses[hi], hi)?;

        // argmin ½W‖z₁ − z₂‖² + ρ/2‖z₁ − a‖² + ρ/2‖z₂ − b‖²: the mean of
        // (a, b) is kept and the gap shrinks by ρ / (ρ + 2W).
        let rho = self.rho;
        let a = &theta_lo + &self.duals[k][0] / rho;
        let b = &theta_hi + &self.duals[k][1] / rho;
        let mid = (&a + &b) * 0.5;
        let half_gap = (&a - &b) * (0.5 * rho / (rho + 2.0 * net.edge_weight(k)));
        let z_lo = &mid + &half_gap;
        let z_hi = &mid - &half_gap;

        self.duals[k][0] += (&theta_lo - &z_lo) * rho;
        self.duals[k][1] += (&theta_hi - &z_hi) * rho;
        self.copies[k] = [z_lo, z_hi];
        self.theta[lo] = theta_lo;
        self.theta[hi] = theta_hi;
        self.round += 1;
        Ok(())
    }
}

/// Streaming run; reports the mean relative error of the primals `θ_i`.
#[allow(clippy::too_many_arguments)]
pub fn run_admm_with<L: PersonalLoss>(
    state: &mut AdmmState,
    net: &Network,
    losses: &[L],
    sched: &Schedule,
    rng: &mut SimRng,
    rounds: u64,
    theta_star: Option<&[DVector<f64>]>,
    mut observer: impl FnMut(&RoundRecord),
) -> Result<Option<f64>> {
    if losses.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: losses.len(),
        });
    }
    if sched.probs().len() != net.num_edges() {
        return Err(Error::InvalidSchedule("schedule built for another network".into()));
    }
    if let Some(ts) = theta_star {
        if ts.len() != net.n() {
            return Err(Error::DimensionMismatch {
                expected: net.n(),
                got: ts.len(),
            });
        }
        check_nonzero_components(ts)?;
    }
    let initial = theta_star.map(|ts| mean_relative_error(&state.theta, ts));
    let mut epochs = EpochTracker::new(net.num_edges());
    for _ in 0..rounds {
        let k = sched.draw_edge(rng);
        state.activate(net, losses, k)?;
        observer(&RoundRecord {
            round: state.round,
            edge: net.edge(k),
            v: None,
            mean_rel_error: theta_star.map(|ts| mean_relative_error(&state.theta, ts)),
            epoch: epochs.observe(k),
        });
    }
    Ok(initial)
}

pub fn run_admm<L: PersonalLoss>(
    state: &mut AdmmState,
    net: &Network,
    losses: &[L],
    sched: &Schedule,
    rng: &mut SimRng,
    rounds: u64,
    theta_star: Option<&[DVector<f64>]>,
) -> Result<Trace> {
    let mut trace = Trace::default();
    trace.initial_mean_rel_error = run_admm_with(state, net, losses, sched, rng, rounds, theta_star, |r| {
        trace.records.push(*r)
    })?;
    Ok(trace)
}
