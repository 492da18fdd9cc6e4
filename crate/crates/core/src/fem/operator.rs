//! First-order factorizations `L = L2* L1` of the spatial operators.
//!
//! The weak form pairs `(L1 u, L2 v)`. For the heat equation `L1 = L2 = d/dx`;
//! for the linearized shallow water system `L1 u = A(x) u_x` with
//! `A = [[0, 1], [g h(x), 0]]` and `L2 = I`.

/// Bottom profile `B(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Bathymetry {
    Constant(f64),
    /// Linear interpolation between `points`, constant outside their range.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// Parabolic obstruction on `[lo, hi]` rising from `base` to `crest` at the midpoint.
    Mound {
        lo: f64,
        hi: f64,
        base: f64,
        crest: f64,
    },
}

impl Bathymetry {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Bathymetry::Constant(b) => *b,
            Bathymetry::PiecewiseLinear(pts) => {
                let (first, last) = (pts[0], pts[pts.len() - 1]);
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let k = pts.partition_point(|p| p.0 <= x);
                let (a, b) = (pts[k - 1], pts[k]);
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            }
            Bathymetry::Mound { lo, hi, base, .. } => {
                if x <= *lo || x >= *hi {
                    *base
                } else {
                    base + self.mound_k() * (x - lo) * (x - hi)
                }
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Bathymetry::Constant(_) => 0.0,
            Bathymetry::PiecewiseLinear(pts) => {
                let (first, last) = (pts[0], pts[pts.len() - 1]);
                if x <= first.0 || x >= last.0 {
                    return 0.0;
                }
                let k = pts.partition_point(|p| p.0 <= x);
                let (a, b) = (pts[k - 1], pts[k]);
                (b.1 - a.1) / (b.0 - a.0)
            }
            Bathymetry::Mound { lo, hi, .. } => {
                if x <= *lo || x >= *hi {
                    0.0
                } else {
                    self.mound_k() * (2.0 * x - lo - hi)
                }
            }
        }
    }

    fn mound_k(&self) -> f64 {
        match self {
            Bathymetry::Mound { lo, hi, base, crest } => {
                let half = 0.5 * (hi - lo);
                (base - crest) / (half * half)
            }
            _ => 0.0,
        }
    }
}

/// Spatial operator of `u_t + L u = f`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialOperator {
    /// `L u = -u_xx`.
    Diffusion,
    /// `L u = A(x) u_x` for `u = (eta, mu)`.
    ShallowWater {
        gravity: f64,
        rest_height: f64,
        bathymetry: Bathymetry,
    },
}

impl SpatialOperator {
    pub fn n_components(&self) -> usize {
        match self {
            SpatialOperator::Diffusion => 1,
            SpatialOperator::ShallowWater { .. } => 2,
        }
    }

    /// Rest depth `h(x) = eta_rest - B(x)`; zero for diffusion.
    pub fn depth(&self, x: f64) -> f64 {
        match self {
            SpatialOperator::Diffusion => 0.0,
            SpatialOperator::ShallowWater {
                rest_height,
                bathymetry,
                ..
            } => rest_height - bathymetry.eval(x),
        }
    }

    pub fn depth_derivative(&self, x: f64) -> f64 {
        match self {
            SpatialOperator::Diffusion => 0.0,
            SpatialOperator::ShallowWater { bathymetry, .. } => -bathymetry.derivative(x),
        }
    }

    /// `L1 u` at `x` from `u_x` (both operators only see the derivative).
    #[inline]
    pub fn l1(&self, x: f64, ux: &[f64], out: &mut [f64]) {
        match self {
            SpatialOperator::Diffusion => out[0] = ux[0],
            SpatialOperator::ShallowWater { gravity, .. } => {
                out[0] = ux[1];
                out[1] = gravity * self.depth(x) * ux[0];
            }
        }
    }

    /// `L2 v` at `x`.
    #[inline]
    pub fn l2(&self, v: &[f64], vx: &[f64], out: &mut [f64]) {
        match self {
            SpatialOperator::Diffusion => out[0] = vx[0],
            SpatialOperator::ShallowWater { .. } => {
                out[0] = v[0];
                out[1] = v[1];
            }
        }
    }

    /// Whether `L2` acts on derivatives (true) or on values (false).
    pub fn l2_uses_derivative(&self) -> bool {
        matches!(self, SpatialOperator::Diffusion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shelf_ramp_is_continuous() {
        let b = Bathymetry::PiecewiseLinear(vec![(25000.0, -200.0), (50000.0, -4000.0)]);
        assert_eq!(b.eval(25000.0), -200.0);
        assert_eq!(b.eval(50000.0), -4000.0);
        assert!((b.eval(30000.0) - (-0.152 * 30000.0 + 3600.0)).abs() < 1e-9);
        assert!((b.derivative(30000.0) + 0.152).abs() < 1e-15);
    }

    #[test]
    fn mound_reaches_crest() {
        let b = Bathymetry::Mound {
            lo: 200000.0,
            hi: 250000.0,
            base: -4000.0,
            crest: -50.0,
        };
        assert!((b.eval(225000.0) + 50.0).abs() < 1e-9);
        assert_eq!(b.eval(200000.0), -4000.0);
        assert!(b.derivative(225000.0).abs() < 1e-12);
    }
}
