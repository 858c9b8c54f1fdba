//! Personal loss functions and the resolvent `(∇F)^{-1}` with
//! `F(x) = f(x) + ½ w ‖x‖²`.
//!
//! Every model update in the crate reduces to one resolvent evaluation:
//! find the unique `x` with `∇f(x) + w x = s`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::Network;

/// Relative gradient-residual tolerance of the resolvent solver.
pub const SOLVER_TOL: f64 = 1e-12;

/// Iteration cap of the resolvent solver.
pub const SOLVER_MAX_ITERS: usize = 200;

/// A strongly convex personal loss with Lipschitz gradient.
///
/// `value`, `gradient` and `hessian` assume a finite input of the right
/// dimension; `eval` and `grad` check both.
pub trait PersonalLoss: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: &DVector<f64>) -> f64;

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64>;

    /// Hessian, or a generalized Hessian where `∇f` is only piecewise smooth.
    fn hessian(&self, theta: &DVector<f64>) -> DMatrix<f64>;

    /// Strong convexity constant `m > 0`.
    fn strong_convexity(&self) -> f64;

    /// Gradient Lipschitz constant `M ≥ m`.
    fn grad_lipschitz(&self) -> f64;

    /// `(f'(x), f''(x))` for one-dimensional losses.
    fn derivatives_1d(&self, x: f64) -> (f64, f64) {
        let v = DVector::from_element(1, x);
        (self.gradient(&v)[0], self.hessian(&v)[(0, 0)])
    }

    fn as_quadratic(&self) -> Option<&QuadraticLoss> {
        None
    }

    fn eval(&self, theta: &DVector<f64>) -> Result<f64> {
        check_input(self.dim(), theta)?;
        Ok(self.value(theta))
    }

    fn grad(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        check_input(self.dim(), theta)?;
        Ok(self.gradient(theta))
    }
}

fn check_input(dim: usize, theta: &DVector<f64>) -> Result<()> {
    if theta.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: theta.len(),
        });
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// `f(θ) = ½ (θ − y)ᵀ A (θ − y)` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticLoss {
    a: DMatrix<f64>,
    y: DVector<f64>,
    m: f64,
    big_m: f64,
}

impl QuadraticLoss {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let p = y.len();
        if a.nrows() != p || a.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: a.nrows().max(a.ncols()),
            });
        }
        if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let scale = a.amax().max(1.0);
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidLoss("A is not symmetric".into()));
        }
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let m = eig.min();
        let big_m = eig.max();
        if m <= 0.0 {
            return Err(Error::InvalidLoss(format!(
                "A is not positive definite (smallest eigenvalue {m:e})"
            )));
        }
        Ok(QuadraticLoss { a, y, m, big_m })
    }

    /// `A = a·I` in dimension `y.len()`.
    pub fn isotropic(a: f64, y: DVector<f64>) -> Result<Self> {
        let p = y.len();
        Self::new(DMatrix::identity(p, p) * a, y)
    }

    pub fn scalar(a: f64, y: f64) -> Result<Self> {
        Self::isotropic(a, DVector::from_element(1, y))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.y
    }
}

impl PersonalLoss for QuadraticLoss {
    fn dim(&self) -> usize {
        self.y.len()
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let r = theta - &self.y;
        0.5 * r.dot(&(&self.a * &r))
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.a * (theta - &self.y)
    }

    fn hessian(&self, _theta: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }

    fn strong_convexity(&self) -> f64 {
        self.m
    }

    fn grad_lipschitz(&self) -> f64 {
        self.big_m
    }

    fn derivatives_1d(&self, x: f64) -> (f64, f64) {
        let a = self.a[(0, 0)];
        (a * (x - self.y[0]), a)
    }

    fn as_quadratic(&self) -> Option<&QuadraticLoss> {
        Some(self)
    }
}

/// Huber penalty `φ_δ(r)`: `½r²` for `|r| ≤ δ`, `δ(|r| − ½δ)` beyond.
pub fn huber(r: f64, delta: f64) -> f64 {
    let a = r.abs();
    if a <= delta {
        0.5 * r * r
    } else {
        delta * (a - 0.5 * delta)
    }
}

/// `φ_δ'(r)`, i.e. `r` clamped to `[−δ, δ]`.
pub fn huber_derivative(r: f64, delta: f64) -> f64 {
    r.clamp(-delta, delta)
}

/// Scalar field-estimation loss `f(θ) = φ_δ(y − θ) + ½ σ θ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberFieldLoss {
    y: f64,
    sigma: f64,
    delta: f64,
}

impl HuberFieldLoss {
    pub fn new(y: f64, sigma: f64, delta: f64) -> Result<Self> {
        if !(y.is_finite() && sigma.is_finite() && delta.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidLoss(format!("prior precision {sigma} ≤ 0")));
        }
        if delta <= 0.0 {
            return Err(Error::InvalidLoss(format!("Huber threshold {delta} ≤ 0")));
        }
        Ok(HuberFieldLoss { y, sigma, delta })
    }

    pub fn measurement(&self) -> f64 {
        self.y
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn scalar_value(&self, x: f64) -> f64 {
        huber(self.y - x, self.delta) + 0.5 * self.sigma * x * x
    }
}

impl PersonalLoss for HuberFieldLoss {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        self.scalar_value(theta[0])
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.derivatives_1d(theta[0]).0)
    }

    fn hessian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.derivatives_1d(theta[0]).1)
    }

    fn strong_convexity(&self) -> f64 {
        self.sigma
    }

    fn grad_lipschitz(&self) -> f64 {
        self.sigma + 1.0
    }

    // Curvature of φ is taken as 1 on the closed interval |r| ≤ δ.
    fn derivatives_1d(&self, x: f64) -> (f64, f64) {
        let r = self.y - x;
        let curv = if r.abs() <= self.delta { 1.0 } else { 0.0 };
        (
            -huber_derivative(r, self.delta) + self.sigma * x,
            curv + self.sigma,
        )
    }
}

/// Closed set of loss types, for networks mixing quadratic and Huber agents.
#[derive(Debug, Clone, PartialEq)]
pub enum Loss {
    Quadratic(QuadraticLoss),
    Huber(HuberFieldLoss),
}

impl From<QuadraticLoss> for Loss {
    fn from(l: QuadraticLoss) -> Self {
        Loss::Quadratic(l)
    }
}

impl From<HuberFieldLoss> for Loss {
    fn from(l: HuberFieldLoss) -> Self {
        Loss::Huber(l)
    }
}

macro_rules! delegate {
    ($self:ident, $l:ident => $e:expr) => {
        match $self {
            Loss::Quadratic($l) => $e,
            Loss::Huber($l) => $e,
        }
    };
}

impl PersonalLoss for Loss {
    fn dim(&self) -> usize {
        delegate!(self, l => l.dim())
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        delegate!(self, l => l.value(theta))
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        delegate!(self, l => l.gradient(theta))
    }

    fn hessian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        delegate!(self, l => l.hessian(theta))
    }

    fn strong_convexity(&self) -> f64 {
        delegate!(self, l => l.strong_convexity())
    }

    fn grad_lipschitz(&self) -> f64 {
        delegate!(self, l => l.grad_lipschitz())
    }

    fn derivatives_1d(&self, x: f64) -> (f64, f64) {
        delegate!(self, l => l.derivatives_1d(x))
    }

    fn as_quadratic(&self) -> Option<&QuadraticLoss> {
        match self {
            Loss::Quadratic(q) => Some(q),
            Loss::Huber(_) => None,
        }
    }
}

/// Solves `∇f(x) + w·x = s` for `x`.
///
/// Converges when `‖∇f(x) + w x − s‖ ≤ SOLVER_TOL · max(1, ‖s‖)`. In one
/// dimension this is Newton's method safeguarded by bisection on the bracket
/// `|x − x*| ≤ |G(x)| / (m + w)`; otherwise a damped Newton method with an
/// Armijo line search on `f(x) + ½w‖x‖² − sᵀx`.
pub fn resolvent<L: PersonalLoss + ?Sized>(loss: &L, w: f64, s: &DVector<f64>) -> Result<DVector<f64>> {
    if !(w.is_finite() && w >= 0.0) {
        return Err(Error::NonFiniteInput);
    }
    check_input(loss.dim(), s)?;
    if s.len() == 1 {
        resolvent_1d(loss, w, s[0]).map(|x| DVector::from_element(1, x))
    } else {
        resolvent_nd(loss, w, s)
    }
}

pub(crate) fn resolvent_1d<L: PersonalLoss + ?Sized>(loss: &L, w: f64, s: f64) -> Result<f64> {
    let tol = SOLVER_TOL * s.abs().max(1.0);
    let modulus = loss.strong_convexity() + w;
    let residual = |x: f64| {
        let (g, h) = loss.derivatives_1d(x);
        (g + w * x - s, h + w)
    };

    let mut x = s / modulus;
    let (mut g, mut dg) = residual(x);
    if !g.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    if g.abs() <= tol {
        return Ok(x);
    }
    // Bracket [lo, hi] with G(lo) < 0 < G(hi), from strong monotonicity.
    let reach = g.abs() / modulus * (1.0 + 1e-9) + f64::EPSILON * x.abs();
    let (mut lo, mut hi) = if g > 0.0 { (x - reach, x) } else { (x, x + reach) };

    for _ in 0..SOLVER_MAX_ITERS {
        let newton = x - g / dg;
        x = if dg > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        (g, dg) = residual(x);
        if g.abs() <= tol {
            return Ok(x);
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // Bracket exhausted at floating-point resolution.
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            let at_lo = residual(lo).0.abs();
            let at_hi = residual(hi).0.abs();
            let best = if at_lo <= at_hi { lo } else { hi };
            let best_res = at_lo.min(at_hi).min(g.abs());
            if best_res <= tol * 1e3 {
                return Ok(if best_res == g.abs() { x } else { best });
            }
            return Err(Error::SolverDidNotConverge {
                iterations: SOLVER_MAX_ITERS,
                residual: best_res,
            });
        }
    }
    Err(Error::SolverDidNotConverge {
        iterations: SOLVER_MAX_ITERS,
        residual: g.abs(),
    })
}

fn resolvent_nd<L: PersonalLoss + ?Sized>(loss: &L, w: f64, s: &DVector<f64>) -> Result<DVector<f64>> {
    let p = s.len();
    let tol = SOLVER_TOL * s.norm().max(1.0);
    let modulus = loss.strong_convexity() + w;
    let merit = |x: &DVector<f64>| loss.value(x) + 0.5 * w * x.norm_squared() - s.dot(x);
    let residual = |x: &DVector<f64>| loss.gradient(x) + x * w - s;

    let mut x = s / modulus;
    let mut g = residual(&x);
    let mut res = g.norm();
    for _ in 0..SOLVER_MAX_ITERS {
        if !res.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if res <= tol {
            return Ok(x);
        }
        let h = loss.hessian(&x) + DMatrix::identity(p, p) * w;
        let dir = match h.cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -&g / modulus,
        };
        let slope = g.dot(&dir);
        let phi0 = merit(&x);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &x + &dir * t;
            let cand_g = residual(&cand);
            let cand_res = cand_g.norm();
            if merit(&cand) <= phi0 + 1e-4 * t * slope || cand_res < res {
                accepted = Some((cand, cand_g, cand_res));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, cand_g, cand_res)) => {
                x = cand;
                g = cand_g;
                res = cand_res;
            }
            None => break,
        }
    }
    if res <= tol {
        return Ok(x);
    }
    Err(Error::SolverDidNotConverge {
        iterations: SOLVER_MAX_ITERS,
        residual: res,
    })
}

/// `Σ_k W_jk · models[k]` over the neighbors of `j`, with `models` aligned to
/// `net.neighbors(j)`.
pub(crate) fn weighted_neighbor_sum(net: &Network, j: usize, models: &[DVector<f64>]) -> DVector<f64> {
    let mut s = DVector::zeros(net.p());
    for (nb, m) in net.neighbors(j).iter().zip(models) {
        s.axpy(nb.weight, m, 1.0);
    }
    s
}

/// Local update with neighbor models already aligned to `net.neighbors(j)`.
pub(crate) fn local_solve_aligned<L: PersonalLoss>(
    net: &Network,
    loss: &L,
    j: usize,
    models: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let w = net.neighbors(j).iter().map(|nb| nb.weight).sum();
    resolvent(loss, w, &weighted_neighbor_sum(net, j, models))
}

/// `argmin_θ ½ Σ_{k∈N_j} W_jk ‖θ − Θ_j^k‖² + f_j(θ)`.
///
/// `neighbor_models` must hold exactly one vector per neighbor of `j`.
pub fn local_solve<L: PersonalLoss>(
    net: &Network,
    losses: &[L],
    j: usize,
    neighbor_models: &BTreeMap<usize, DVector<f64>>,
) -> Result<DVector<f64>> {
    if j >= net.n() || losses.len() != net.n() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: net.n().min(losses.len()),
        });
    }
    for &k in neighbor_models.keys() {
        if net.neighbor_slot(j, k).is_none() {
            return Err(Error::UnexpectedNeighborModel {
                agent: j,
                neighbor: k,
            });
        }
    }
    let mut aligned = Vec::with_capacity(net.degree(j));
    for nb in net.neighbors(j) {
        let m = neighbor_models
            .get(&nb.agent)
            .ok_or(Error::MissingNeighborModel {
                agent: j,
                neighbor: nb.agent,
            })?;
        check_input(net.p(), m)?;
        aligned.push(m.clone());
    }
    local_solve_aligned(net, &losses[j], j, &aligned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    /// Minimizes `½w x² − s x + f(x)` by a dense grid scan followed by
    /// golden-section refinement. Independent of the Newton path.
    fn grid_argmin(loss: &HuberFieldLoss, w: f64, s: f64, lo: f64, hi: f64) -> f64 {
        let phi = |x: f64| 0.5 * w * x * x - s * x + loss.value(&v(x));
        let steps = 200_000;
        let h = (hi - lo) / steps as f64;
        let best = (0..=steps)
            .map(|k| lo + k as f64 * h)
            .min_by(|a, b| phi(*a).partial_cmp(&phi(*b)).unwrap())
            .unwrap();
        let (mut a, mut b) = (best - h, best + h);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - gr * (b - a);
            let d = a + gr * (b - a);
            if phi(c) < phi(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn huber_values() {
        let l = HuberFieldLoss::new(0.0, 1.0, 1.0).unwrap();
        assert_eq!(l.eval(&v(0.0)).unwrap(), 0.0);
        assert!((l.eval(&v(0.5)).unwrap() - 0.25).abs() < 1e-15);
        assert!((l.eval(&v(3.0)).unwrap() - 7.0).abs() < 1e-15);
    }

    #[test]
    fn huber_gradients() {
        let l = HuberFieldLoss::new(0.0, 1.0, 1.0).unwrap();
        assert!((l.grad(&v(0.5)).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((l.grad(&v(3.0)).unwrap()[0] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_gradient_vanishes_at_target() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let y = DVector::from_vec(vec![1.0, -3.0]);
        let q = QuadraticLoss::new(a, y.clone()).unwrap();
        assert_eq!(q.grad(&y).unwrap(), DVector::zeros(2));
    }

    #[test]
    fn input_checks() {
        let l = HuberFieldLoss::new(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            l.eval(&DVector::zeros(2)),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(l.grad(&v(f64::NAN)), Err(Error::NonFiniteInput)));
        assert!(matches!(
            resolvent(&l, 1.0, &v(f64::INFINITY)),
            Err(Error::NonFiniteInput)
        ));
        assert!(matches!(
            resolvent(&l, -1.0, &v(0.0)),
            Err(Error::NonFiniteInput)
        ));
    }

    #[test]
    fn invalid_loss_parameters() {
        assert!(HuberFieldLoss::new(0.0, 0.0, 1.0).is_err());
        assert!(HuberFieldLoss::new(0.0, 1.0, -1.0).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(QuadraticLoss::new(indefinite, DVector::zeros(2)).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(QuadraticLoss::new(asym, DVector::zeros(2)).is_err());
    }

    #[test]
    fn quadratic_constants_are_eigenvalues() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let q = QuadraticLoss::new(a, DVector::zeros(2)).unwrap();
        assert!((q.strong_convexity() - 1.0).abs() < 1e-12);
        assert!((q.grad_lipschitz() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn resolvent_quadratic_closed_form() {
        let q = QuadraticLoss::scalar(1.0, 2.0).unwrap();
        let x = resolvent(&q, 1.0, &v(0.0)).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn resolvent_huber_linear_branch() {
        let l = HuberFieldLoss::new(10.0, 1.0, 1.0).unwrap();
        let x = resolvent(&l, 1.0, &v(0.0)).unwrap()[0];
        let oracle = grid_argmin(&l, 1.0, 0.0, -20.0, 20.0);
        assert!((oracle - 0.5).abs() < 1e-7, "oracle {oracle}");
        assert!((x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resolvent_huber_matches_grid_oracle() {
        let cases = [
            (0.3, 0.7, 0.3, 0.0, 1.2),
            (-2.0, 1.5, 0.3, 2.5, -0.4),
            (1.0, 0.5, 2.0, 10.0, 3.0),
            (5.0, 1.0, 0.1, 0.0, 0.0),
        ];
        for (y, sigma, delta, w, s) in cases {
            let l = HuberFieldLoss::new(y, sigma, delta).unwrap();
            let x = resolvent(&l, w, &v(s)).unwrap()[0];
            let oracle = grid_argmin(&l, w, s, -20.0, 20.0);
            assert!((x - oracle).abs() < 1e-6, "case {:?}: {x} vs {oracle}", (y, sigma, delta, w, s));
        }
    }

    #[test]
    fn resolvent_vector_quadratic() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let y = DVector::from_vec(vec![1.0, -1.0, 2.0]);
        let q = QuadraticLoss::new(a.clone(), y.clone()).unwrap();
        let s = DVector::from_vec(vec![0.3, 0.2, -0.1]);
        let w = 1.5;
        let x = resolvent(&q, w, &s).unwrap();
        let exact = (a.clone() + DMatrix::identity(3, 3) * w)
            .lu()
            .solve(&(s + &a * y))
            .unwrap();
        assert!((x - exact).amax() < 1e-12);
    }

    #[test]
    fn misdeclared_constants_fail_to_converge() {
        // Claims m = 1 but the true curvature is far smaller near the optimum,
        // so the strong-monotonicity bracket misses the root.
        struct Liar;
        impl PersonalLoss for Liar {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, t: &DVector<f64>) -> f64 {
                1e-6 * 0.5 * (t[0] - 100.0).powi(2)
            }
            fn gradient(&self, t: &DVector<f64>) -> DVector<f64> {
                v(1e-6 * (t[0] - 100.0))
            }
            fn hessian(&self, _t: &DVector<f64>) -> DMatrix<f64> {
                DMatrix::from_element(1, 1, 1e-6)
            }
            fn strong_convexity(&self) -> f64 {
                1.0
            }
            fn grad_lipschitz(&self) -> f64 {
                1.0
            }
        }
        assert!(matches!(
            resolvent(&Liar, 0.0, &v(0.0)),
            Err(Error::SolverDidNotConverge { .. })
        ));
    }

    fn triangle() -> Network {
        Network::new(3, 1, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn local_solve_examples() {
        let net = triangle();
        let q = vec![QuadraticLoss::scalar(1.0, 2.0).unwrap(); 3];
        let models = BTreeMap::from([(1, v(1.0)), (2, v(3.0))]);
        let x = local_solve(&net, &q, 0, &models).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);

        let at_target = BTreeMap::from([(1, v(2.0)), (2, v(2.0))]);
        assert!((local_solve(&net, &q, 0, &at_target).unwrap()[0] - 2.0).abs() < 1e-14);

        let pair = Network::new(2, 1, &[(0, 1, 1.0)]).unwrap();
        let h = vec![HuberFieldLoss::new(10.0, 1.0, 1.0).unwrap(); 2];
        let x = local_solve(&pair, &h, 0, &BTreeMap::from([(1, v(0.0))])).unwrap();
        let oracle = grid_argmin(&h[0], 1.0, 0.0, -20.0, 20.0);
        assert!((x[0] - oracle).abs() < 1e-7);
        assert!((x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn local_solve_neighbor_checks() {
        let net = triangle();
        let q = vec![QuadraticLoss::scalar(1.0, 0.0).unwrap(); 3];
        assert!(matches!(
            local_solve(&net, &q, 0, &BTreeMap::from([(1, v(1.0))])),
            Err(Error::MissingNeighborModel { agent: 0, neighbor: 2 })
        ));
        let path = Network::new(3, 1, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(
            local_solve(&path, &q, 0, &BTreeMap::from([(1, v(1.0)), (2, v(0.0))])),
            Err(Error::UnexpectedNeighborModel { agent: 0, neighbor: 2 })
        ));
    }

    fn huber_strategy() -> impl Strategy<Value = HuberFieldLoss> {
        (-5.0..5.0f64, 0.1..3.0f64, 0.05..2.0f64)
            .prop_map(|(y, s, d)| HuberFieldLoss::new(y, s, d).unwrap())
    }

    proptest! {
        #[test]
        fn resolvent_inverts_gradient_map(loss in huber_strategy(), x0 in -10.0..10.0f64, w in 0.0..10.0f64) {
            let s = loss.derivatives_1d(x0).0 + w * x0;
            let x = resolvent(&loss, w, &v(s)).unwrap()[0];
            prop_assert!((x - x0).abs() <= 1e-11 * x0.abs().max(1.0));
        }

        #[test]
        fn local_solve_first_order_condition(loss in huber_strategy(), a in -5.0..5.0f64, b in -5.0..5.0f64, wa in 0.1..3.0f64, wb in 0.1..3.0f64) {
            let net = Network::new(3, 1, &[(0, 1, wa), (0, 2, wb)]).unwrap();
            let losses = vec![loss; 3];
            let models = BTreeMap::from([(1, v(a)), (2, v(b))]);
            let th = local_solve(&net, &losses, 0, &models).unwrap()[0];
            let s = wa * a + wb * b;
            let foc = wa * (th - a) + wb * (th - b) + loss.derivatives_1d(th).0;
            prop_assert!(foc.abs() <= 1e-10 * s.abs().max(1.0));
        }
    }
}
