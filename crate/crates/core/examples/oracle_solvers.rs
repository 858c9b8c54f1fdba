//! Compares the direct solve with synchronous Jacobi on a quadratic problem
//! with 2-dimensional models.

use nalgebra::{dmatrix, dvector};

use djam::oracle::{solve_exact_quadratic, solve_sync_jacobi, ORACLE_TOL};
use djam::{Network, QuadraticLoss};

fn main() -> djam::Result<()> {
    let net = Network::new(4, 2, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 1.5), (3, 0, 1.0)])?;
    let a = dmatrix![2.0, 0.5; 0.5, 1.0];
    let losses = vec![
        QuadraticLoss::new(a.clone(), dvector![1.0, 0.0])?,
        QuadraticLoss::new(a.clone(), dvector![0.0, 1.0])?,
        QuadraticLoss::isotropic(0.3, dvector![-1.0, 2.0])?,
        QuadraticLoss::new(a, dvector![3.0, 3.0])?,
    ];
    let exact = solve_exact_quadratic(&net, &losses)?;
    let jacobi = solve_sync_jacobi(&net, &losses, ORACLE_TOL, 100_000)?;
    for (j, (x, y)) in exact.theta_star.iter().zip(&jacobi.theta_star).enumerate() {
        println!("agent {}: exact {:?}, jacobi gap {:.2e}", j + 1, x.as_slice(), (x - y).amax());
    }
    println!("residuals: exact {:.2e}, jacobi {:.2e}", exact.residual, jacobi.residual);
    Ok(())
}
