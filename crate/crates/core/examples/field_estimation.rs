//! Generates a field instance, solves the robust MAP problem and compares the
//! estimate with the true field and the raw measurements.

use djam::experiment::{prepare, ExperimentConfig};

fn main() -> djam::Result<()> {
    let cfg = ExperimentConfig::default();
    let prep = prepare(&cfg)?;
    let inst = &prep.instance;
    let rms = |v: &mut dyn Iterator<Item = f64>| {
        let (s, c) = v.fold((0.0, 0), |(s, c), x| (s + x * x, c + 1));
        (s / c as f64).sqrt()
    };
    let est = rms(&mut inst.theta_true.iter().zip(&prep.solution.theta_star).map(|(t, e)| t - e[0]));
    let raw = rms(&mut inst.theta_true.iter().zip(&inst.y).map(|(t, y)| t - y));
    println!("{} agents, {} edges", inst.n(), inst.net.num_edges());
    println!("rms error of measurements: {raw:.4}");
    println!("rms error of MAP estimate: {est:.4}");
    Ok(())
}
