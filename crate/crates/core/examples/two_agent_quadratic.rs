//! Two agents with scalar quadratic losses. With all-quadratic losses each
//! exchange is an affine map, and the models settle on the exact solution.

use djam::djam::{InitPolicy, SimState};
use djam::oracle::solve_exact_quadratic;
use djam::{Network, QuadraticLoss};

fn main() -> djam::Result<()> {
    let net = Network::new(2, 1, &[(0, 1, 1.0)])?;
    let losses = vec![QuadraticLoss::scalar(1.0, 0.0)?, QuadraticLoss::scalar(1.0, 3.0)?];
    let star = solve_exact_quadratic(&net, &losses)?.theta_star;

    let mut state = SimState::new(&net, &InitPolicy::Zeros)?;
    for t in 1..=8 {
        state.gossip_round(&net, &losses, 0, 1)?;
        let own = state.own_models(&net, &losses)?;
        println!(
            "round {t}: theta_1 = {:.10}, theta_2 = {:.10}, V = {:.3e}",
            own[0][0],
            own[1][0],
            state.max_error(&net, &star)?
        );
    }
    println!("exact: theta_1 = {}, theta_2 = {}", star[0][0], star[1][0]);
    Ok(())
}
