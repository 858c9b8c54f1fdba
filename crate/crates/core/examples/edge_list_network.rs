//! Builds a network from edge-list text and runs asynchronous rounds drawn
//! by agent wake-ups instead of uniform edge draws.

use djam::djam::{run_djam, InitPolicy, Schedule, SimState};
use djam::oracle::{solve_sync_jacobi, ORACLE_TOL};
use djam::{HuberFieldLoss, Network};

const GRAPH: &str = "\
# star with a tail
1 2 1.0
1 3 1.0
1 4 0.5
4 5 2.0
";

fn main() -> djam::Result<()> {
    let net = Network::from_edge_list(GRAPH, 5, 1)?;
    let losses: Vec<HuberFieldLoss> = [0.2, -1.0, 0.7, 3.0, 2.5]
        .iter()
        .map(|&y| HuberFieldLoss::new(y, 0.5, 0.3))
        .collect::<djam::Result<_>>()?;
    let star = solve_sync_jacobi(&net, &losses, ORACLE_TOL, 100_000)?.theta_star;

    let sched = Schedule::agent_wakeup(&net, 1)?;
    println!("edge probabilities: {:?}", sched.probs());
    let mut rng = sched.rng();
    let mut state = SimState::new(&net, &InitPolicy::Zeros)?;
    let trace = run_djam(&mut state, &net, &losses, &sched, &mut rng, 300, Some(&star))?;
    let v = trace.v_series();
    println!("V(0) = {:.3e}, V(100) = {:.3e}, V(300) = {:.3e}", v[0], v[100], v[300]);
    Ok(())
}
