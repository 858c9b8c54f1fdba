//! Rounds needed by the ADMM baseline for each penalty, against DJAM, on a
//! reduced field-estimation experiment.

use djam::experiment::{prepare, run_trials, Algorithm, ExperimentConfig, Topology};

fn main() -> djam::Result<()> {
    let cfg = ExperimentConfig {
        n: 20,
        topology: Topology::Geometric { radius: 0.4 },
        trials: 5,
        rounds: 40_000,
        ..ExperimentConfig::default()
    };
    let prep = prepare(&cfg)?;
    let algorithms = std::iter::once(Algorithm::Djam).chain(cfg.rhos.iter().map(|&rho| Algorithm::Admm { rho }));
    for alg in algorithms {
        let agg = run_trials(&cfg, &prep, alg, None)?;
        let label = match alg.rho() {
            Some(r) => format!("admm rho={r}"),
            None => "djam".into(),
        };
        let reach = agg.rounds_to(1e-6).map_or("never".into(), |t| t.to_string());
        println!("{label:<14} rounds to 1e-6: {reach:>6}, terminal {:.2e}", agg.terminal());
    }
    Ok(())
}
