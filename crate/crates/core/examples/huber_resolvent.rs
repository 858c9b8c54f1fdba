//! Evaluates the resolvent of a Huber field loss across the kinks and checks
//! the first-order condition.

use nalgebra::DVector;

use djam::losses::resolvent;
use djam::{HuberFieldLoss, PersonalLoss};

fn main() -> djam::Result<()> {
    let loss = HuberFieldLoss::new(1.0, 0.5, 0.3)?;
    let w = 2.0;
    println!("{:>8} {:>14} {:>12}", "s", "x", "residual");
    for k in -6..=6 {
        let s = DVector::from_element(1, k as f64);
        let x = resolvent(&loss, w, &s)?;
        let residual = loss.gradient(&x)[0] + w * x[0] - s[0];
        println!("{:>8.2} {:>14.10} {:>12.2e}", s[0], x[0], residual);
    }
    Ok(())
}
