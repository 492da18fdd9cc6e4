//! Lagrange interpolation bases on arbitrary nodes.

/// Lagrange basis `l_0..l_n` on a set of distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    // 1 / prod_{k != j} (x_j - x_k)
    inv_denominators: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: Vec<f64>) -> Self {
        let inv_denominators = (0..nodes.len())
            .map(|j| {
                let prod: f64 = (0..nodes.len())
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        Self {
            nodes,
            inv_denominators,
        }
    }

    /// Equispaced nodes on `[0, 1]`, `degree + 1` of them.
    pub fn equispaced(degree: usize) -> Self {
        let nodes = (0..=degree)
            .map(|i| {
                if degree == 0 {
                    0.0
                } else {
                    i as f64 / degree as f64
                }
            })
            .collect();
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn values(&self, x: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        for j in 0..n {
            let mut prod = self.inv_denominators[j];
            for k in 0..n {
                if k != j {
                    prod *= x - self.nodes[k];
                }
            }
            out[j] = prod;
        }
    }

    pub fn derivatives(&self, x: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        for j in 0..n {
            let mut sum = 0.0;
            for m in 0..n {
                if m == j {
                    continue;
                }
                let mut prod = 1.0;
                for k in 0..n {
                    if k != j && k != m {
                        prod *= x - self.nodes[k];
                    }
                }
                sum += prod;
            }
            out[j] = sum * self.inv_denominators[j];
        }
    }

    pub fn value_vec(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.values(x, &mut out);
        out
    }

    pub fn derivative_vec(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.derivatives(x, &mut out);
        out
    }
}
