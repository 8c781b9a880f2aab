//! One-dimensional quadrature rules and the nodal Lagrange basis on `[-1, 1]`.

use crate::error::{Error, Result};

/// Gauss–Lobatto rule with `n` points; the endpoints `±1` are nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLobattoRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule, used for over-integrated error norms.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomial `P_n(x)` and its derivative, by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (x.abs() - 1.0).abs() < 1e-15 {
        // P_n'(±1) = (±1)^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

pub fn gauss_lobatto_rule(n: usize) -> Result<GaussLobattoRule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Lobatto rule needs at least 2 points, got {n}"
        )));
    }
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    // interior nodes are the roots of P_m'; Newton from Chebyshev-Gauss-Lobatto guesses
    for i in 1..m {
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            // P_m'' from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
            let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    // enforce exact symmetry
    for i in 0..n / 2 {
        let s = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -s;
        nodes[n - 1 - i] = s;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let scale = 2.0 / (n * m) as f64;
    let weights = nodes
        .iter()
        .map(|&x| {
            let p = legendre(m, x).0;
            scale / (p * p)
        })
        .collect();
    Ok(GaussLobattoRule { nodes, weights })
}

pub fn gauss_rule(n: usize) -> Result<GaussRule> {
    if n < 1 {
        return Err(Error::InvalidArgument("Gauss rule needs at least 1 point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, x).1;
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok(GaussRule { nodes, weights })
}

/// Lagrange basis on a fixed set of distinct nodes.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[f64]) -> Self {
        let denom = (0..nodes.len())
            .map(|j| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != j)
                    .map(|(_, &xm)| nodes[j] - xm)
                    .product()
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            denom,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn product_except(&self, x: f64, skip: &[usize]) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(m, _)| !skip.contains(m))
            .map(|(_, &xm)| x - xm)
            .product()
    }

    /// Values of every basis function at `x`.
    pub fn values(&self, x: f64) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.product_except(x, &[j]) / self.denom[j])
            .collect()
    }

    /// First derivatives of every basis function at `x`.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let s: f64 = (0..n)
                    .filter(|&l| l != j)
                    .map(|l| self.product_except(x, &[j, l]))
                    .sum();
                s / self.denom[j]
            })
            .collect()
    }

    /// Second derivatives of every basis function at `x`.
    pub fn second_derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut s = 0.0;
                for l in (0..n).filter(|&l| l != j) {
                    for p in (0..n).filter(|&p| p != j && p != l) {
                        s += self.product_except(x, &[j, l, p]);
                    }
                }
                s / self.denom[j]
            })
            .collect()
    }
}
