//! The gossip engine.
//!
//! Agent `i` stores a copy `Θ_i^k` of every neighbor's model. When edge
//! `(i, j)` is drawn, agent `j` computes its own model from its table and
//! sends it to `i`, which overwrites `Θ_i^j`; symmetrically for `Θ_j^i`.
//! Own models `Θ_i^i` are never stored; [`SimState::own_model`] recomputes
//! them from the table on demand.

mod schedule;
mod trace;

use std::collections::BTreeMap;

use nalgebra::DVector;

pub use schedule::Schedule;
pub use trace::{epoch_boundaries, EpochTracker, RoundRecord, Trace, TRACE_HEADER};

use crate::error::{Error, Result};
use crate::losses::{local_solve_aligned, PersonalLoss};
use crate::network::Network;
use crate::rng::SimRng;

/// Initial contents of the neighbor-copy tables.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    Zeros,
    Constant(f64),
    /// `Θ_i^k(0) = models[k]`.
    PerAgent(Vec<DVector<f64>>),
    /// `Θ_i^k(0)` keyed by `(i, k)`; must list every neighbor pair exactly.
    Explicit(BTreeMap<(usize, usize), DVector<f64>>),
}

impl Default for InitPolicy {
    fn default() -> Self {
        InitPolicy::Zeros
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    // tables[i][s] = Θ_i^k for k = net.neighbors(i)[s].agent
    tables: Vec<Vec<DVector<f64>>>,
    round: u64,
}

impl SimState {
    pub fn new(net: &Network, policy: &InitPolicy) -> Result<Self> {
        let p = net.p();
        let check = |v: &DVector<f64>| -> Result<()> {
            if v.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput);
            }
            Ok(())
        };
        let tables = match policy {
            InitPolicy::Zeros => (0..net.n())
                .map(|i| vec![DVector::zeros(p); net.degree(i)])
                .collect(),
            InitPolicy::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                (0..net.n())
                    .map(|i| vec![DVector::from_element(p, *c); net.degree(i)])
                    .collect()
            }
            InitPolicy::PerAgent(models) => {
                if models.len() != net.n() {
                    return Err(Error::DimensionMismatch {
                        expected: net.n(),
                        got: models.len(),
                    });
                }
                models.iter().try_for_each(check)?;
                (0..net.n())
                    .map(|i| {
                        net.neighbors(i)
                            .iter()
                            .map(|nb| models[nb.agent].clone())
                            .collect()
                    })
                    .collect()
            }
            InitPolicy::Explicit(map) => {
                for &(i, k) in map.keys() {
                    if net.neighbor_slot(i, k).is_none() {
                        return Err(Error::UnexpectedNeighborModel {
                            agent: i,
                            neighbor: k,
                        });
                    }
                }
                let mut tables = Vec::with_capacity(net.n());
                for i in 0..net.n() {
                    let mut row = Vec::with_capacity(net.degree(i));
                    for nb in net.neighbors(i) {
                        let v = map.get(&(i, nb.agent)).ok_or(Error::MissingNeighborModel {
                            agent: i,
                            neighbor: nb.agent,
                        })?;
                        check(v)?;
                        row.push(v.clone());
                    }
                    tables.push(row);
                }
                tables
            }
        };
        Ok(SimState { tables, round: 0 })
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// `Θ_i^k`, agent `i`'s copy of neighbor `k`'s model.
    pub fn copy(&self, net: &Network, i: usize, k: usize) -> Option<&DVector<f64>> {
        net.neighbor_slot(i, k).map(|s| &self.tables[i][s])
    }

    /// Agent `i`'s table, aligned with `net.neighbors(i)`.
    pub fn table(&self, i: usize) -> &[DVector<f64>] {
        &self.tables[i]
    }

    /// Overwrites `Θ_i^k`.
    pub fn set_copy(&mut self, net: &Network, i: usize, k: usize, value: DVector<f64>) -> Result<()> {
        let s = net.neighbor_slot(i, k).ok_or(Error::UnknownEdge(i, k))?;
        if value.len() != net.p() {
            return Err(Error::DimensionMismatch {
                expected: net.p(),
                got: value.len(),
            });
        }
        self.tables[i][s] = value;
        Ok(())
    }

    /// `Θ_i^i`: agent `i`'s minimizer against its current table.
    pub fn own_model<L: PersonalLoss>(&self, net: &Network, losses: &[L], i: usize) -> Result<DVector<f64>> {
        if i >= net.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: net.n(),
            });
        }
        local_solve_aligned(net, &losses[i], i, &self.tables[i])
    }

    pub fn own_models<L: PersonalLoss>(&self, net: &Network, losses: &[L]) -> Result<Vec<DVector<f64>>> {
        (0..net.n()).map(|i| self.own_model(net, losses, i)).collect()
    }

    /// One round on edge `(i, j)`: `Θ_i^j ← Θ_j^j(t)` and `Θ_j^i ← Θ_i^i(t)`,
    /// both computed from the tables as they were before the round.
    pub fn gossip_round<L: PersonalLoss>(&mut self, net: &Network, losses: &[L], i: usize, j: usize) -> Result<()> {
        let k = net.edge_index(i, j).ok_or(Error::UnknownEdge(i, j))?;
        self.gossip_edge(net, losses, k).map(|_| ())
    }

    /// Like [`gossip_round`](Self::gossip_round) with an edge index. Returns
    /// the two freshly computed own models `(Θ_lo^lo, Θ_hi^hi)`.
    pub fn gossip_edge<L: PersonalLoss>(
        &mut self,
        net: &Network,
        losses: &[L],
        k: usize,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let (i, j) = net.edge(k).endpoints();
        let model_i = self.own_model(net, losses, i)?;
        let model_j = self.own_model(net, losses, j)?;
        let slot_ij = net.neighbor_slot(i, j).expect("edge endpoints are neighbors");
        let slot_ji = net.neighbor_slot(j, i).expect("edge endpoints are neighbors");
        self.tables[i][slot_ij] = model_j.clone();
        self.tables[j][slot_ji] = model_i.clone();
        self.round += 1;
        Ok((model_i, model_j))
    }

    /// `V = max_{l, k∈N_l} ‖Θ_l^k − Θ_k^*‖` over the stored copies.
    pub fn max_error(&self, net: &Network, theta_star: &[DVector<f64>]) -> Result<f64> {
        check_solution(net, theta_star)?;
        Ok(self.max_error_unchecked(net, theta_star))
    }

    fn max_error_unchecked(&self, net: &Network, theta_star: &[DVector<f64>]) -> f64 {
        let mut v = 0.0f64;
        for (l, row) in self.tables.iter().enumerate() {
            for (nb, copy) in net.neighbors(l).iter().zip(row) {
                v = v.max(distance(copy, &theta_star[nb.agent]));
            }
        }
        v
    }
}

fn distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_solution(net: &Network, theta_star: &[DVector<f64>]) -> Result<()> {
    if theta_star.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: theta_star.len(),
        });
    }
    for t in theta_star {
        if t.len() != net.p() {
            return Err(Error::DimensionMismatch {
                expected: net.p(),
                got: t.len(),
            });
        }
    }
    Ok(())
}

/// `mean_i ‖models_i − Θ_i^*‖ / ‖Θ_i^*‖`.
///
/// Callers must have rejected zero-norm solution components.
pub(crate) fn mean_relative_error(models: &[DVector<f64>], theta_star: &[DVector<f64>]) -> f64 {
    let total: f64 = models
        .iter()
        .zip(theta_star)
        .map(|(m, s)| distance(m, s) / s.norm())
        .sum();
    total / models.len() as f64
}

pub(crate) fn check_nonzero_components(theta_star: &[DVector<f64>]) -> Result<()> {
    match theta_star.iter().position(|t| t.norm() == 0.0) {
        Some(i) => Err(Error::ZeroNormSolutionComponent(i)),
        None => Ok(()),
    }
}

/// `β = max_i w_i / (m_i + w_i)`, the per-epoch contraction factor of `V`.
pub fn contraction_factor<L: PersonalLoss>(net: &Network, losses: &[L]) -> f64 {
    (0..net.n())
        .map(|i| {
            let w: f64 = net.neighbors(i).iter().map(|nb| nb.weight).sum();
            w / (losses[i].strong_convexity() + w)
        })
        .fold(0.0, f64::max)
}

/// Runs `rounds` rounds, passing each round's diagnostics to `observer`.
///
/// Without `theta_star` only the drawn edge and epoch markers are reported.
/// Returns `(V(0), mean relative error at round 0)` when `theta_star` is given.
#[allow(clippy::too_many_arguments)]
pub fn run_djam_with<L: PersonalLoss>(
    state: &mut SimState,
    net: &Network,
    losses: &[L],
    sched: &Schedule,
    rng: &mut SimRng,
    rounds: u64,
    theta_star: Option<&[DVector<f64>]>,
    mut observer: impl FnMut(&RoundRecord),
) -> Result<Option<(f64, f64)>> {
    if losses.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: losses.len(),
        });
    }
    if sched.probs().len() != net.num_edges() {
        return Err(Error::InvalidSchedule("schedule built for another network".into()));
    }
    // Own models of the current tables; a round on (i, j) only changes the
    // tables of i and j.
    let mut own = state.own_models(net, losses)?;
    let mut initial = None;
    if let Some(ts) = theta_star {
        check_solution(net, ts)?;
        check_nonzero_components(ts)?;
        initial = Some((state.max_error_unchecked(net, ts), mean_relative_error(&own, ts)));
    }

    let mut epochs = EpochTracker::new(net.num_edges());
    for _ in 0..rounds {
        let k = sched.draw_edge(rng);
        let edge = net.edge(k);
        let (i, j) = edge.endpoints();
        let slot_ij = net.neighbor_slot(i, j).expect("edge endpoints are neighbors");
        let slot_ji = net.neighbor_slot(j, i).expect("edge endpoints are neighbors");
        state.tables[i][slot_ij].copy_from(&own[j]);
        state.tables[j][slot_ji].copy_from(&own[i]);
        state.round += 1;
        own[i] = state.own_model(net, losses, i)?;
        own[j] = state.own_model(net, losses, j)?;
        let epoch = epochs.observe(k);
        let (v, rel) = match theta_star {
            Some(ts) => (
                Some(state.max_error_unchecked(net, ts)),
                Some(mean_relative_error(&own, ts)),
            ),
            None => (None, None),
        };
        observer(&RoundRecord {
            round: state.round,
            edge,
            v,
            mean_rel_error: rel,
            epoch,
        });
    }
    Ok(initial)
}

/// Runs `rounds` rounds and collects the full trace.
pub fn run_djam<L: PersonalLoss>(
    state: &mut SimState,
    net: &Network,
    losses: &[L],
    sched: &Schedule,
    rng: &mut SimRng,
    rounds: u64,
    theta_star: Option<&[DVector<f64>]>,
) -> Result<Trace> {
    let mut trace = Trace::default();
    let initial = run_djam_with(state, net, losses, sched, rng, rounds, theta_star, |r| {
        trace.records.push(*r)
    })?;
    if let Some((v0, rel0)) = initial {
        trace.initial_v = Some(v0);
        trace.initial_mean_rel_error = Some(rel0);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{local_solve, HuberFieldLoss, QuadraticLoss};

    fn v(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn pair() -> (Network, Vec<QuadraticLoss>) {
        let net = Network::new(2, 1, &[(0, 1, 1.0)]).unwrap();
        let losses = vec![
            QuadraticLoss::scalar(1.0, 0.0).unwrap(),
            QuadraticLoss::scalar(1.0, 2.0).unwrap(),
        ];
        (net, losses)
    }

    fn triangle() -> Network {
        Network::new(3, 1, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn init_policies() {
        let net = triangle();
        let z = SimState::new(&net, &InitPolicy::Zeros).unwrap();
        assert!(z.tables.iter().flatten().all(|x| x[0] == 0.0));
        let c = SimState::new(&net, &InitPolicy::Constant(5.0)).unwrap();
        assert!(c.tables.iter().flatten().all(|x| x[0] == 5.0));
        let per = SimState::new(&net, &InitPolicy::PerAgent(vec![v(1.0), v(2.0), v(3.0)])).unwrap();
        assert_eq!(per.copy(&net, 0, 2).unwrap()[0], 3.0);
        assert_eq!(per.copy(&net, 2, 1).unwrap()[0], 2.0);
        assert_eq!(per.round(), 0);
    }

    #[test]
    fn explicit_init_must_be_complete() {
        let net = triangle();
        let mut map: BTreeMap<(usize, usize), DVector<f64>> = BTreeMap::new();
        for i in 0..3 {
            for nb in net.neighbors(i) {
                map.insert((i, nb.agent), v((10 * i + nb.agent) as f64));
            }
        }
        let st = SimState::new(&net, &InitPolicy::Explicit(map.clone())).unwrap();
        assert_eq!(st.copy(&net, 2, 0).unwrap()[0], 20.0);
        map.remove(&(1, 2));
        assert!(matches!(
            SimState::new(&net, &InitPolicy::Explicit(map)),
            Err(Error::MissingNeighborModel { agent: 1, neighbor: 2 })
        ));
        assert!(matches!(
            SimState::new(&net, &InitPolicy::PerAgent(vec![v(0.0), DVector::zeros(2), v(0.0)])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_agent_first_round() {
        let (net, losses) = pair();
        let mut st = SimState::new(&net, &InitPolicy::Zeros).unwrap();
        assert_eq!(st.own_model(&net, &losses, 0).unwrap()[0], 0.0);
        st.gossip_round(&net, &losses, 0, 1).unwrap();
        assert!((st.copy(&net, 0, 1).unwrap()[0] - 1.0).abs() < 1e-15);
        assert_eq!(st.copy(&net, 1, 0).unwrap()[0], 0.0);
        assert_eq!(st.round(), 1);
        assert!(matches!(
            st.gossip_round(&net, &losses, 0, 0),
            Err(Error::UnknownEdge(0, 0))
        ));
        let path = Network::new(3, 1, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let mut st = SimState::new(&path, &InitPolicy::Zeros).unwrap();
        let l3 = vec![losses[0].clone(); 3];
        assert!(matches!(
            st.gossip_round(&path, &l3, 0, 2),
            Err(Error::UnknownEdge(0, 2))
        ));
    }

    #[test]
    fn fixed_point_is_absorbing() {
        let (net, losses) = pair();
        let star = vec![v(2.0 / 3.0), v(4.0 / 3.0)];
        let mut st = SimState::new(&net, &InitPolicy::PerAgent(star.clone())).unwrap();
        let before = st.clone();
        st.gossip_round(&net, &losses, 1, 0).unwrap();
        for i in 0..2 {
            assert!((&st.tables[i][0] - &before.tables[i][0]).amax() < 1e-15);
        }
    }

    #[test]
    fn single_agent_own_model() {
        let net = Network::new(1, 1, &[]).unwrap();
        let losses = vec![QuadraticLoss::scalar(1.0, 7.0).unwrap()];
        let st = SimState::new(&net, &InitPolicy::Zeros).unwrap();
        assert!((st.own_model(&net, &losses, 0).unwrap()[0] - 7.0).abs() < 1e-14);
    }

    #[test]
    fn converges_on_two_agents() {
        let (net, losses) = pair();
        let star = [v(2.0 / 3.0), v(4.0 / 3.0)];
        for seed in [0, 1, 99] {
            let mut st = SimState::new(&net, &InitPolicy::Zeros).unwrap();
            let sched = Schedule::uniform(&net, seed).unwrap();
            let mut rng = sched.rng();
            run_djam(&mut st, &net, &losses, &sched, &mut rng, 500, Some(&star)).unwrap();
            assert!((st.copy(&net, 0, 1).unwrap()[0] - 4.0 / 3.0).abs() < 1e-10);
            assert!((st.copy(&net, 1, 0).unwrap()[0] - 2.0 / 3.0).abs() < 1e-10);
            let own = st.own_models(&net, &losses).unwrap();
            assert!((own[0][0] - 2.0 / 3.0).abs() < 1e-10);
            assert!((own[1][0] - 4.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rounds_is_a_no_op() {
        let (net, losses) = pair();
        let mut st = SimState::new(&net, &InitPolicy::Constant(1.0)).unwrap();
        let before = st.clone();
        let sched = Schedule::uniform(&net, 0).unwrap();
        let trace = run_djam(&mut st, &net, &losses, &sched, &mut sched.rng(), 0, None).unwrap();
        assert!(trace.is_empty());
        assert_eq!(st, before);
    }

    #[test]
    fn max_error_examples() {
        let net = triangle();
        let star = vec![v(1.0), v(2.0), v(3.0)];
        let mut st = SimState::new(&net, &InitPolicy::PerAgent(star.clone())).unwrap();
        assert_eq!(st.max_error(&net, &star).unwrap(), 0.0);
        st.set_copy(&net, 2, 1, v(2.1)).unwrap();
        assert!((st.max_error(&net, &star).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(
            st.max_error(&net, &star[..2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn contraction_factor_examples() {
        let (net, losses) = pair();
        assert_eq!(contraction_factor(&net, &losses), 0.5);
        let single = Network::new(1, 1, &[]).unwrap();
        assert_eq!(contraction_factor(&single, &losses[..1]), 0.0);
        let star = Network::new(4, 1, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let h = vec![HuberFieldLoss::new(0.0, 1.0, 1.0).unwrap(); 4];
        assert_eq!(contraction_factor(&star, &h), 0.75);
    }

    #[test]
    fn writes_are_order_independent() {
        let net = triangle();
        let losses: Vec<HuberFieldLoss> = (0..3)
            .map(|i| HuberFieldLoss::new(i as f64 * 1.7 - 1.0, 0.8, 0.3).unwrap())
            .collect();
        let init = SimState::new(&net, &InitPolicy::PerAgent(vec![v(0.3), v(-2.0), v(1.1)])).unwrap();

        let mut a = init.clone();
        a.gossip_round(&net, &losses, 0, 2).unwrap();

        // Same round written j-first, computed from pre-round copies.
        let mut b = init.clone();
        let tbl = |st: &SimState, i: usize| -> BTreeMap<usize, DVector<f64>> {
            net.neighbors(i)
                .iter()
                .map(|nb| (nb.agent, st.copy(&net, i, nb.agent).unwrap().clone()))
                .collect()
        };
        let for_0 = local_solve(&net, &losses, 2, &tbl(&init, 2)).unwrap();
        let for_2 = local_solve(&net, &losses, 0, &tbl(&init, 0)).unwrap();
        b.set_copy(&net, 2, 0, for_2).unwrap();
        b.set_copy(&net, 0, 2, for_0).unwrap();
        b.round += 1;
        assert_eq!(a, b);
    }

    #[test]
    fn quadratic_update_is_affine_map() {
        let net = Network::new(3, 2, &[(0, 1, 0.7), (1, 2, 1.3), (0, 2, 0.4)]).unwrap();
        let a = 1.9;
        let ys: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_vec(vec![i as f64, 1.0 - i as f64]))
            .collect();
        let losses: Vec<QuadraticLoss> = ys
            .iter()
            .map(|y| QuadraticLoss::isotropic(a, y.clone()).unwrap())
            .collect();
        let init: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_vec(vec![0.5 * i as f64, -1.5]))
            .collect();
        let mut st = SimState::new(&net, &InitPolicy::PerAgent(init)).unwrap();
        let pre = st.clone();
        st.gossip_round(&net, &losses, 1, 2).unwrap();
        // Θ_1^2 ← (Σ_k W_2k Θ_2^k + a y_2) / (w_2 + a)
        let mut s = DVector::zeros(2);
        for nb in net.neighbors(2) {
            s += pre.copy(&net, 2, nb.agent).unwrap() * nb.weight;
        }
        let expect = (s + &ys[2] * a) / (net.agent_weight_sum(2).unwrap() + a);
        assert!((st.copy(&net, 1, 2).unwrap() - expect).amax() < 1e-14);
    }
}
