//! Random instances shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use djam::rng::SimRng;
use djam::{HuberFieldLoss, Loss, Network, QuadraticLoss};

/// Connected graph: a random spanning tree plus each remaining pair with
/// probability `extra`. Weights uniform in `[0.5, 1.5]`.
pub fn random_network(n: usize, p: usize, extra: f64, rng: &mut SimRng) -> Network {
    let mut edges = Vec::new();
    for j in 1..n {
        let i = rng.random_range(0..j);
        edges.push((i, j, rng.random_range(0.5..1.5)));
    }
    for i in 0..n {
        for j in i + 1..n {
            let in_tree = edges.iter().any(|&(a, b, _)| (a, b) == (i, j));
            if !in_tree && rng.random_bool(extra) {
                edges.push((i, j, rng.random_range(0.5..1.5)));
            }
        }
    }
    Network::new(n, p, &edges).expect("spanning tree keeps the graph connected")
}

/// `BBᵀ + shift·I` with standard normal-ish entries in `B`.
pub fn random_spd(p: usize, shift: f64, rng: &mut SimRng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(p, p) * shift
}

pub fn random_vector(p: usize, scale: f64, rng: &mut SimRng) -> DVector<f64> {
    DVector::from_fn(p, |_, _| rng.random_range(-scale..scale))
}

pub fn random_quadratic(p: usize, rng: &mut SimRng) -> QuadraticLoss {
    let shift = rng.random_range(0.2..2.0);
    QuadraticLoss::new(random_spd(p, shift, rng), random_vector(p, 3.0, rng)).unwrap()
}

pub fn random_huber(rng: &mut SimRng) -> HuberFieldLoss {
    HuberFieldLoss::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(0.2..2.0),
        rng.random_range(0.1..1.0),
    )
    .unwrap()
}

/// Scalar losses, each agent quadratic or Huber with equal odds.
pub fn mixed_losses(n: usize, rng: &mut SimRng) -> Vec<Loss> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                random_quadratic(1, rng).into()
            } else {
                random_huber(rng).into()
            }
        })
        .collect()
}

pub fn max_abs_diff(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max)
}
