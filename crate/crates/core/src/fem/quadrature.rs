//! Gauss-Legendre quadrature, Gauss-Lobatto nodes and Legendre polynomials.

use crate::error::{invalid, Result};

/// Largest supported number of Gauss points.
pub const MAX_GAUSS_POINTS: usize = 30;

/// Quadrature rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[-1, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Points and weights mapped to `[0, 1]` (weights sum to 1).
    pub fn unit_interval(&self) -> (Vec<f64>, Vec<f64>) {
        let pts = self.points.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let wts = self.weights.iter().map(|w| 0.5 * w).collect();
        (pts, wts)
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    // P_n' from P_n and P_{n-1}; at |x| = 1 use the closed form.
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let sign = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        sign * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p_prev - x * p) / (1.0 - x * x)
    };
    (p, dp)
}

/// Gauss-Legendre rule with `n` points, `1 <= n <= 30`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(invalid(format!(
            "Gauss rule needs 1..={MAX_GAUSS_POINTS} points, got {n}"
        )));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Newton converged to the i-th largest root.
        points[n - 1 - i] = x;
        points[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

/// Gauss-Lobatto nodes on `[-1, 1]`, increasing, endpoints included.
pub fn gauss_lobatto_nodes(n_points: usize) -> Vec<f64> {
    assert!(n_points >= 2, "Gauss-Lobatto needs at least two nodes");
    let deg = n_points - 1;
    let mut nodes = vec![0.0; n_points];
    nodes[0] = -1.0;
    nodes[deg] = 1.0;
    // Interior nodes are the roots of P'_deg; Newton on P'_deg using
    // P''_deg = (2x P'_deg - deg(deg+1) P_deg) / (1 - x^2).
    for i in 1..deg {
        let mut x = -(std::f64::consts::PI * i as f64 / deg as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(deg, x);
            let d2p = (2.0 * x * dp - (deg * (deg + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    for i in 1..deg {
        let sym = 0.5 * (nodes[i] - nodes[deg - i]);
        nodes[i] = sym;
        nodes[deg - i] = -sym;
    }
    nodes
}

/// Legendre polynomial of degree `m` shifted to `[0, 1]`.
pub fn shifted_legendre(m: usize, s: f64) -> f64 {
    legendre(m, 2.0 * s - 1.0).0
}
