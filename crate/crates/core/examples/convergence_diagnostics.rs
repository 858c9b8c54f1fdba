//! Runs DJAM on a small random field instance and prints V at each epoch
//! boundary next to the guaranteed bound β·V(previous boundary).

use djam::djam::{contraction_factor, run_djam, InitPolicy, Schedule, SimState};
use djam::experiment::{prepare, ExperimentConfig, Topology};

fn main() -> djam::Result<()> {
    let cfg = ExperimentConfig {
        n: 12,
        topology: Topology::Geometric { radius: 0.5 },
        ..ExperimentConfig::default()
    };
    let prep = prepare(&cfg)?;
    let net = &prep.instance.net;
    let beta = contraction_factor(net, &prep.losses);
    println!("{} agents, {} edges, beta = {beta:.4}", net.n(), net.num_edges());

    let sched = Schedule::uniform(net, 7)?;
    let mut rng = sched.rng();
    let mut state = SimState::new(net, &InitPolicy::Zeros)?;
    let trace = run_djam(&mut state, net, &prep.losses, &sched, &mut rng, 4000, Some(&prep.solution.theta_star))?;
    let v = trace.v_series();

    let mut prev = 0;
    for (m, t) in trace.epochs().into_iter().enumerate().take(15) {
        let t = t as usize;
        println!("epoch {:>2} ends at round {:>4}: V = {:.3e} <= {:.3e}", m + 1, t, v[t], beta * v[prev]);
        prev = t;
    }
    Ok(())
}
