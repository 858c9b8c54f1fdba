//! Monte Carlo runs on a single field instance.
//!
//! Every trial shares the instance and the reference solution; trials differ
//! only in the edge-draw stream, seeded with `cfg.trial_seed(k)`. Trials run
//! one after another and are summed in trial order, so the aggregate is
//! bit-reproducible.

use std::io::Write;

use nalgebra::DVector;

use super::config::ExperimentConfig;
use super::instance::{generate_instance_with_seed, instance_losses, FieldInstance};
use crate::admm::{run_admm_with, AdmmState};
use crate::djam::{check_nonzero_components, mean_relative_error, run_djam_with, RoundRecord, Schedule, SimState, TRACE_HEADER};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::losses::HuberFieldLoss;
use crate::oracle::{solve_sync_jacobi, Solution, ORACLE_TOL};
use crate::rng::derive_seed;

const ORACLE_MAX_SWEEPS: usize = 1_000_000;
const MAX_INSTANCE_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Djam,
    Admm { rho: f64 },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Djam => "djam",
            Algorithm::Admm { .. } => "admm",
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            Algorithm::Djam => None,
            Algorithm::Admm { rho } => Some(*rho),
        }
    }

    fn rho_field(&self) -> String {
        self.rho().map(|r| r.to_string()).unwrap_or_default()
    }
}

/// Columns appended to [`TRACE_HEADER`] in per-trial trace files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceColumns {
    Plain,
    Rho,
    AlgorithmRho,
}

impl TraceColumns {
    pub fn header(&self) -> String {
        match self {
            TraceColumns::Plain => TRACE_HEADER.to_string(),
            TraceColumns::Rho => format!("{TRACE_HEADER},rho"),
            TraceColumns::AlgorithmRho => format!("{TRACE_HEADER},algorithm,rho"),
        }
    }

    fn row(&self, record: &RoundRecord, trial: usize, alg: &Algorithm) -> String {
        let base = record.csv_row(trial);
        match self {
            TraceColumns::Plain => base,
            TraceColumns::Rho => format!("{base},{}", alg.rho_field()),
            TraceColumns::AlgorithmRho => format!("{base},{},{}", alg.name(), alg.rho_field()),
        }
    }
}

/// An instance with its losses and reference solution.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub instance: FieldInstance,
    pub losses: Vec<HuberFieldLoss>,
    pub solution: Solution,
    /// Instance seed actually used.
    pub seed: u64,
    /// Regenerations and other events worth recording.
    pub notes: Vec<String>,
}

/// Generates the instance and solves it to [`ORACLE_TOL`].
///
/// The relative-error metric needs every `Θ_i^*` nonzero; otherwise the
/// instance is regenerated from a derived seed and the event noted.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let base = cfg.instance_seed();
    let mut notes = Vec::new();
    for attempt in 0..MAX_INSTANCE_ATTEMPTS {
        let seed = if attempt == 0 { base } else { derive_seed(base, attempt) };
        let instance = generate_instance_with_seed(cfg, seed)?;
        let losses = instance_losses(&instance);
        let solution = solve_sync_jacobi(&instance.net, &losses, ORACLE_TOL, ORACLE_MAX_SWEEPS)?;
        match check_nonzero_components(&solution.theta_star) {
            Ok(()) => {
                return Ok(Prepared {
                    instance,
                    losses,
                    solution,
                    seed,
                    notes,
                })
            }
            Err(Error::ZeroNormSolutionComponent(i)) => notes.push(format!(
                "instance seed {seed}: solution component of agent {} is zero; regenerating",
                i + 1
            )),
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidTopology(format!(
        "no instance with nonzero solution components after {MAX_INSTANCE_ATTEMPTS} attempts"
    )))
}

/// Per-round mean relative error averaged over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    pub algorithm: Algorithm,
    pub trials: usize,
    /// Entry `t` is the value after `t` rounds; entry 0 is the initial state.
    pub mean_rel_error: Vec<f64>,
}

impl AggregateTrace {
    pub const HEADER: &'static str = "algorithm,rho,round,mean_rel_error";

    pub fn rounds(&self) -> u64 {
        self.mean_rel_error.len() as u64 - 1
    }

    pub fn terminal(&self) -> f64 {
        *self.mean_rel_error.last().expect("aggregate has the initial entry")
    }

    /// First round at which the error is at most `threshold`.
    pub fn rounds_to(&self, threshold: f64) -> Option<u64> {
        self.mean_rel_error
            .iter()
            .position(|&e| e <= threshold)
            .map(|t| t as u64)
    }

    /// Rows for round 0, every `stride`-th round and the final round.
    pub fn write_csv<W: Write>(&self, out: &mut W, stride: u64, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "{}", Self::HEADER)?;
        }
        let last = self.rounds();
        for (t, e) in self.mean_rel_error.iter().enumerate() {
            let t = t as u64;
            if t % stride == 0 || t == last {
                writeln!(
                    out,
                    "{},{},{},{}",
                    self.algorithm.name(),
                    self.algorithm.rho_field(),
                    t,
                    fmt_f64(*e)
                )?;
            }
        }
        Ok(())
    }
}

/// Where per-trial round records go.
pub struct TraceSink<'a> {
    pub out: &'a mut dyn Write,
    pub columns: TraceColumns,
}

/// Runs `cfg.trials` independent trials of `algorithm`.
///
/// With a sink, trials `0..cfg.trace_trials` write rows for every
/// `cfg.trace_stride`-th round, every epoch boundary and the final round.
/// On a failing trial the sink is flushed and the error names the trial.
pub fn run_trials(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    algorithm: Algorithm,
    mut sink: Option<TraceSink<'_>>,
) -> Result<AggregateTrace> {
    let net = &prep.instance.net;
    let theta_star = prep.solution.theta_star.as_slice();
    let rounds = cfg.rounds;
    let mut sums = vec![0.0f64; rounds as usize + 1];
    let io_err = |e| Error::io("<trace>", e);

    for trial in 0..cfg.trials {
        let sched = Schedule::uniform(net, cfg.trial_seed(trial))?;
        let mut rng = sched.rng();
        let mut write_failure = None;
        let trace_this = trial < cfg.trace_trials;
        let mut observer = |r: &RoundRecord| {
            sums[r.round as usize] += r.mean_rel_error.expect("reference solution supplied");
            if !trace_this || write_failure.is_some() {
                return;
            }
            if let Some(s) = sink.as_mut() {
                if r.round % cfg.trace_stride == 0 || r.epoch.is_some() || r.round == rounds {
                    if let Err(e) = writeln!(s.out, "{}", s.columns.row(r, trial, &algorithm)) {
                        write_failure = Some(e);
                    }
                }
            }
        };
        let outcome = match algorithm {
            Algorithm::Djam => SimState::new(net, &cfg.init).and_then(|mut st| {
                run_djam_with(&mut st, net, &prep.losses, &sched, &mut rng, rounds, Some(theta_star), &mut observer)
                    .map(|init| init.expect("reference solution supplied").1)
            }),
            Algorithm::Admm { rho } => AdmmState::new(net, rho, &cfg.init).and_then(|mut st| {
                run_admm_with(&mut st, net, &prep.losses, &sched, &mut rng, rounds, Some(theta_star), &mut observer)
                    .map(|init| init.expect("reference solution supplied"))
            }),
        };
        if let Some(e) = write_failure {
            return Err(io_err(e));
        }
        match outcome {
            Ok(initial) => sums[0] += initial,
            Err(e) => {
                if let Some(s) = sink.as_mut() {
                    s.out.flush().map_err(io_err)?;
                }
                return Err(Error::TrialFailed {
                    trial,
                    source: Box::new(e),
                });
            }
        }
    }
    if let Some(s) = sink.as_mut() {
        s.out.flush().map_err(io_err)?;
    }
    let trials = cfg.trials as f64;
    Ok(AggregateTrace {
        algorithm,
        trials: cfg.trials,
        mean_rel_error: sums.into_iter().map(|s| s / trials).collect(),
    })
}

/// Prepares the instance and runs all trials without per-trial output.
pub fn monte_carlo(cfg: &ExperimentConfig, algorithm: Algorithm) -> Result<(Prepared, AggregateTrace)> {
    let prep = prepare(cfg)?;
    let agg = run_trials(cfg, &prep, algorithm, None)?;
    Ok((prep, agg))
}

/// Mean over agents of `‖Θ_i^i(t) − Θ_i^*‖ / ‖Θ_i^*‖`, for each round `t`.
pub fn relative_error_series(own_models: &[Vec<DVector<f64>>], theta_star: &[DVector<f64>]) -> Result<Vec<f64>> {
    check_nonzero_components(theta_star)?;
    own_models
        .iter()
        .map(|models| {
            if models.len() != theta_star.len() {
                return Err(Error::DimensionMismatch {
                    expected: theta_star.len(),
                    got: models.len(),
                });
            }
            Ok(mean_relative_error(models, theta_star))
        })
        .collect()
}

/// Averages of consecutive non-overlapping blocks of `window` entries.
pub fn block_averages(series: &[f64], window: usize) -> Vec<f64> {
    series
        .chunks_exact(window)
        .map(|c| c.iter().sum::<f64>() / window as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::Topology;

    fn v(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n: 8,
            topology: Topology::Geometric { radius: 0.6 },
            trials: 3,
            rounds: 400,
            trace_stride: 50,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn relative_error_examples() {
        let star = vec![v(2.0)];
        assert_eq!(relative_error_series(&[vec![v(2.0)]], &star).unwrap(), vec![0.0]);
        assert_eq!(relative_error_series(&[vec![v(1.0)]], &star).unwrap(), vec![0.5]);
        assert!(matches!(
            relative_error_series(&[vec![v(1.0)]], &[v(0.0)]),
            Err(Error::ZeroNormSolutionComponent(0))
        ));
    }

    #[test]
    fn relative_error_matches_direct_loop() {
        let star: Vec<DVector<f64>> = (0..5).map(|i| DVector::from_vec(vec![i as f64 - 2.5, 1.0])).collect();
        let rounds: Vec<Vec<DVector<f64>>> = (0..4)
            .map(|t| {
                (0..5)
                    .map(|i| DVector::from_vec(vec![(i * t) as f64 * 0.1, (t as f64).sin()]))
                    .collect()
            })
            .collect();
        let fast = relative_error_series(&rounds, &star).unwrap();
        for (t, models) in rounds.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..5 {
                let mut d = 0.0;
                let mut s = 0.0;
                for c in 0..2 {
                    d += (models[i][c] - star[i][c]).powi(2);
                    s += star[i][c].powi(2);
                }
                acc += d.sqrt() / s.sqrt();
            }
            assert!((fast[t] - acc / 5.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_trial_aggregate_equals_trial() {
        let cfg = ExperimentConfig {
            trials: 1,
            ..small_cfg()
        };
        let (prep, agg) = monte_carlo(&cfg, Algorithm::Djam).unwrap();
        let net = &prep.instance.net;
        let sched = Schedule::uniform(net, cfg.trial_seed(0)).unwrap();
        let mut st = SimState::new(net, &cfg.init).unwrap();
        let trace = crate::djam::run_djam(
            &mut st,
            net,
            &prep.losses,
            &sched,
            &mut sched.rng(),
            cfg.rounds,
            Some(&prep.solution.theta_star),
        )
        .unwrap();
        assert_eq!(agg.mean_rel_error, trace.mean_rel_error_series());
    }

    #[test]
    fn trace_sink_rows() {
        let cfg = small_cfg();
        let prep = prepare(&cfg).unwrap();
        let mut buf = Vec::new();
        let agg = run_trials(
            &cfg,
            &prep,
            Algorithm::Admm { rho: 1.0 },
            Some(TraceSink {
                out: &mut buf,
                columns: TraceColumns::Rho,
            }),
        )
        .unwrap();
        assert_eq!(agg.rounds(), 400);
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert!(rows.iter().all(|r| r.starts_with("0,") && r.ends_with(",1")));
        assert!(rows.iter().any(|r| r.starts_with("0,400,")));
        assert!(rows.iter().any(|r| r.starts_with("0,50,")));
    }

    #[test]
    fn block_average_windows() {
        assert_eq!(block_averages(&[1.0, 3.0, 5.0, 7.0, 9.0], 2), vec![2.0, 6.0]);
    }
}
