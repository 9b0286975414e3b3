//! Gauss–Laguerre quadrature for `∫₀^∞ e^{−x} f(x) dx`.

use crate::{Error, Result};

/// Largest supported rule; beyond this the Laguerre recurrence overflows.
pub const MAX_NODES: usize = 200;

/// Nodes and natural-log weights of an `n`-point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    /// `ln w_k`. Weights at the largest nodes underflow as plain `f64`
    /// products with large integrands, so they are kept in log form.
    pub log_weights: Vec<f64>,
}

/// `(L_n(z), L_{n−1}(z))` by the three-term recurrence.
fn laguerre_pair(n: usize, z: f64) -> (f64, f64) {
    let (mut p1, mut p2) = (1.0, 0.0);
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, p2)
}

impl GaussLaguerre {
    /// Roots of `L_n` by Newton iteration from asymptotic starting guesses;
    /// weights `w = 1 / (z L_n'(z)² )`, evaluated as `−1/(n L_n'(z) L_{n−1}(z))`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::param("nodes", format!("{n} outside 1..={MAX_NODES}")));
        }
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut log_weights = Vec::with_capacity(n);
        let mut z = 0.0;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
                }
            };
            let mut converged = false;
            for _ in 0..100 {
                let (p1, p2) = laguerre_pair(n, z);
                let pp = nf * (p1 - p2) / z;
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-13 * z.abs() {
                    converged = true;
                    break;
                }
            }
            // One more step to land on the rounding floor.
            let (p1, p2) = laguerre_pair(n, z);
            z -= p1 / (nf * (p1 - p2) / z);
            if !converged {
                return Err(Error::Convergence { change: z });
            }
            let (p1, p2) = laguerre_pair(n, z);
            let pp = nf * (p1 - p2) / z;
            let prod = -(pp * nf * p2);
            log_weights.push(-(prod.ln()));
            nodes.push(z);
        }
        Ok(Self { nodes, log_weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k f(x_k)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&x, &lw)| lw.exp() * f(x))
            .sum()
    }
}
