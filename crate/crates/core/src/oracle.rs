//! Reference solutions of the network problem.
//!
//! Two independent routes: a direct solve of the first-order conditions when
//! every loss is quadratic, and the synchronous Jacobi iteration
//! `θ_j ← (∇F_j)^{-1}(Σ_k W_jk θ_k)` for general losses, which contracts by
//! `β` per sweep in the max norm.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::djam::contraction_factor;
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::losses::{resolvent, PersonalLoss};
use crate::network::Network;

/// Residual target of the oracles in acceptance and experiment runs.
pub const ORACLE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub theta_star: Vec<DVector<f64>>,
    /// Block-wise first-order residual, see [`fixed_point_residual`].
    pub residual: f64,
}

impl Solution {
    /// Writes `agent,coord,value` rows, 1-based.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "agent,coord,value")?;
        for (i, t) in self.theta_star.iter().enumerate() {
            for (c, x) in t.iter().enumerate() {
                writeln!(out, "{},{},{}", i + 1, c + 1, fmt_f64(*x))?;
            }
        }
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv). The residual is
    /// not stored and must be recomputed against a network if needed.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<solution>", e))?;
            let line = line.trim();
            if lineno == 0 {
                if line != "agent,coord,value" {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: lineno + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(err("expected 3 fields"));
            }
            let a: usize = f[0].parse().map_err(|_| err("bad agent"))?;
            let c: usize = f[1].parse().map_err(|_| err("bad coord"))?;
            let x: f64 = f[2].parse().map_err(|_| err("bad value"))?;
            if a == 0 || c == 0 {
                return Err(err("agent and coord are 1-based"));
            }
            entries.push((a - 1, c - 1, x));
        }
        let n = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let p = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
        if entries.len() != n * p {
            return Err(Error::Parse {
                line: 0,
                message: format!("{} entries for {n} agents × {p} coords", entries.len()),
            });
        }
        let mut theta = vec![DVector::from_element(p, f64::NAN); n];
        for (a, c, x) in entries {
            theta[a][c] = x;
        }
        if theta.iter().flatten().any(|x| x.is_nan()) {
            return Err(Error::Parse {
                line: 0,
                message: "missing or duplicate entries".into(),
            });
        }
        Ok(Solution {
            theta_star: theta,
            residual: f64::NAN,
        })
    }
}

/// `max_j ‖Σ_k W_jk (θ_j − θ_k) + ∇f_j(θ_j)‖`.
pub fn fixed_point_residual<L: PersonalLoss>(theta: &[DVector<f64>], net: &Network, losses: &[L]) -> Result<f64> {
    if theta.len() != net.n() || losses.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: if theta.len() != net.n() { theta.len() } else { losses.len() },
        });
    }
    let mut worst = 0.0f64;
    for (j, tj) in theta.iter().enumerate() {
        let mut g = losses[j].grad(tj)?;
        for nb in net.neighbors(j) {
            g += (tj - &theta[nb.agent]) * nb.weight;
        }
        worst = worst.max(g.norm());
    }
    Ok(worst)
}

/// Assembles the `np × np` system `(L ⊗ I + diag(A_j)) θ = (A_j y_j)_j` from
/// the first-order conditions of an all-quadratic problem.
pub fn quadratic_system<L: PersonalLoss>(net: &Network, losses: &[L]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (n, p) = (net.n(), net.p());
    let mut h = DMatrix::zeros(n * p, n * p);
    let mut rhs = DVector::zeros(n * p);
    for j in 0..n {
        let q = losses[j].as_quadratic().ok_or(Error::NotQuadratic(j))?;
        if q.target().len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: q.target().len(),
            });
        }
        let w = net.agent_weight_sum(j)?;
        let mut block = h.view_mut((j * p, j * p), (p, p));
        block += q.matrix();
        for d in 0..p {
            block[(d, d)] += w;
        }
        rhs.rows_mut(j * p, p).copy_from(&(q.matrix() * q.target()));
        for nb in net.neighbors(j) {
            for d in 0..p {
                h[(j * p + d, nb.agent * p + d)] -= nb.weight;
            }
        }
    }
    Ok((h, rhs))
}

/// Exact solution for all-quadratic losses via Cholesky, with one step of
/// iterative refinement.
pub fn solve_exact_quadratic<L: PersonalLoss>(net: &Network, losses: &[L]) -> Result<Solution> {
    if losses.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: losses.len(),
        });
    }
    let (h, rhs) = quadratic_system(net, losses)?;
    let chol = h
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinearSolveFailure("system matrix is not positive definite".into()))?;
    let mut x = chol.solve(&rhs);
    let r = &rhs - &h * &x;
    x += chol.solve(&r);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolveFailure("non-finite solution".into()));
    }
    let p = net.p();
    let theta: Vec<DVector<f64>> = (0..net.n()).map(|j| x.rows(j * p, p).into_owned()).collect();
    let residual = fixed_point_residual(&theta, net, losses)?;
    Ok(Solution {
        theta_star: theta,
        residual,
    })
}

/// One synchronous sweep `θ_j ← (∇F_j)^{-1}(Σ_k W_jk θ_k)` for all `j`.
pub fn jacobi_sweep<L: PersonalLoss>(theta: &[DVector<f64>], net: &Network, losses: &[L]) -> Result<Vec<DVector<f64>>> {
    (0..net.n())
        .map(|j| {
            let mut s = DVector::zeros(net.p());
            let mut w = 0.0;
            for nb in net.neighbors(j) {
                s.axpy(nb.weight, &theta[nb.agent], 1.0);
                w += nb.weight;
            }
            resolvent(&losses[j], w, &s)
        })
        .collect()
}

/// Synchronous Jacobi from zeros.
///
/// Stops once the a-posteriori bound `Δ·β/(1−β)` on the max-norm distance to
/// the fixed point (`Δ` the last sweep's max-norm change) and the
/// first-order residual are both at most `tol`.
pub fn solve_sync_jacobi<L: PersonalLoss>(net: &Network, losses: &[L], tol: f64, max_sweeps: usize) -> Result<Solution> {
    if !(tol > 0.0) {
        return Err(Error::NonFiniteInput);
    }
    if losses.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            got: losses.len(),
        });
    }
    let beta = contraction_factor(net, losses);
    let mut theta = vec![DVector::zeros(net.p()); net.n()];
    for _ in 0..max_sweeps {
        let next = jacobi_sweep(&theta, net, losses)?;
        let delta = next
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        theta = next;
        if delta * beta / (1.0 - beta) <= tol {
            let residual = fixed_point_residual(&theta, net, losses)?;
            if residual <= tol {
                return Ok(Solution {
                    theta_star: theta,
                    residual,
                });
            }
        }
    }
    Err(Error::MaxSweepsExceeded(max_sweeps))
}
