//! Element quadrature tables and assembly of mass and operator matrices.

use super::banded::BandedMatrix;
use super::operator::SpatialOperator;
use super::quadrature::gauss_rule;
use super::space::SpatialSpace;
use crate::error::{invalid, Result};

/// Extra Gauss points (beyond the degree) for polynomial operator integrals.
pub const OPERATOR_EXTRA_POINTS: usize = 4;
/// Extra Gauss points when integrating against analytic data.
pub const ANALYTIC_EXTRA_POINTS: usize = 6;

/// Basis values and derivatives at Gauss points of the reference cell `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ElementQuadrature {
    /// Points in `[0, 1]`.
    pub points: Vec<f64>,
    /// Weights on `[0, 1]` (sum to 1).
    pub weights: Vec<f64>,
    /// `values[q * n_basis + a]`.
    pub values: Vec<f64>,
    /// Reference derivatives `d/dxi`, same layout.
    pub derivatives: Vec<f64>,
    pub n_basis: usize,
}

impl ElementQuadrature {
    pub fn new(space: &SpatialSpace, n_points: usize) -> Result<Self> {
        let (points, weights) = gauss_rule(n_points)?.unit_interval();
        Ok(Self::at_points(space, points, weights))
    }

    /// Tables of `space`'s basis at given reference points, e.g. another
    /// space's quadrature on the same mesh.
    pub fn at_points(space: &SpatialSpace, points: Vec<f64>, weights: Vec<f64>) -> Self {
        let basis = space.basis();
        let nb = basis.len();
        let mut values = vec![0.0; points.len() * nb];
        let mut derivatives = vec![0.0; points.len() * nb];
        for (q, &xi) in points.iter().enumerate() {
            basis.values(xi, &mut values[q * nb..(q + 1) * nb]);
            basis.derivatives(xi, &mut derivatives[q * nb..(q + 1) * nb]);
        }
        Self {
            points,
            weights,
            values,
            derivatives,
            n_basis: nb,
        }
    }

    /// Tables with `degree + extra` points.
    pub fn with_extra(space: &SpatialSpace, extra: usize) -> Result<Self> {
        Self::new(space, space.degree() + extra)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn phi(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_basis..(q + 1) * self.n_basis]
    }

    #[inline]
    pub fn dphi(&self, q: usize) -> &[f64] {
        &self.derivatives[q * self.n_basis..(q + 1) * self.n_basis]
    }

    /// Physical coordinates of all quadrature points, element by element.
    pub fn physical_points(&self, space: &SpatialSpace) -> Vec<f64> {
        let h = space.h();
        let mut xs = Vec::with_capacity(space.n_elements() * self.n_points());
        for e in 0..space.n_elements() {
            let left = space.element_left(e);
            xs.extend(self.points.iter().map(|p| left + h * p));
        }
        xs
    }

    /// Values and x-derivatives of a field at every quadrature point.
    /// Output layout: `[(e * n_points + q) * n_components + c]`.
    pub fn field_at_points(
        &self,
        space: &SpatialSpace,
        coeffs: &[f64],
        values: &mut [f64],
        derivatives: Option<&mut [f64]>,
    ) {
        let nc = space.n_components();
        let nq = self.n_points();
        let inv_h = 1.0 / space.h();
        values.iter_mut().for_each(|v| *v = 0.0);
        for e in 0..space.n_elements() {
            for a in 0..self.n_basis {
                let base = space.dof(space.element_node(e, a), 0);
                for q in 0..nq {
                    let pa = self.values[q * self.n_basis + a];
                    let out = &mut values[(e * nq + q) * nc..(e * nq + q + 1) * nc];
                    for c in 0..nc {
                        out[c] += pa * coeffs[base + c];
                    }
                }
            }
        }
        if let Some(ders) = derivatives {
            ders.iter_mut().for_each(|v| *v = 0.0);
            for e in 0..space.n_elements() {
                for a in 0..self.n_basis {
                    let base = space.dof(space.element_node(e, a), 0);
                    for q in 0..nq {
                        let da = self.derivatives[q * self.n_basis + a] * inv_h;
                        let out = &mut ders[(e * nq + q) * nc..(e * nq + q + 1) * nc];
                        for c in 0..nc {
                            out[c] += da * coeffs[base + c];
                        }
                    }
                }
            }
        }
    }

    /// `out_i += sum_points weight * (vals . phi_i + ders . phi_i')`, the
    /// weak pairing of pointwise data with the basis. `vals`/`ders` use the
    /// `field_at_points` layout; weights include the element Jacobian.
    pub fn pair_with_basis(
        &self,
        space: &SpatialSpace,
        vals: Option<&[f64]>,
        ders: Option<&[f64]>,
        out: &mut [f64],
    ) {
        let nc = space.n_components();
        let nq = self.n_points();
        let h = space.h();
        for e in 0..space.n_elements() {
            for a in 0..self.n_basis {
                let base = space.dof(space.element_node(e, a), 0);
                for q in 0..nq {
                    let k = (e * nq + q) * nc;
                    if let Some(v) = vals {
                        let w = self.weights[q] * h * self.values[q * self.n_basis + a];
                        for c in 0..nc {
                            out[base + c] += w * v[k + c];
                        }
                    }
                    if let Some(d) = ders {
                        let w = self.weights[q] * self.derivatives[q * self.n_basis + a];
                        for c in 0..nc {
                            out[base + c] += w * d[k + c];
                        }
                    }
                }
            }
        }
    }
}

/// Mass matrix `M_ij = (phi_j, phi_i)` and operator matrix `B_ij = (L1 phi_j, L2 phi_i)`.
#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub mass: BandedMatrix,
    pub stiffness: BandedMatrix,
}

/// Assembles mass and operator matrices with `degree + 4` Gauss points per cell.
pub fn assemble(space: &SpatialSpace, operator: &SpatialOperator) -> Result<OperatorMatrices> {
    if space.n_components() != operator.n_components() {
        return Err(invalid(format!(
            "operator has {} components, space has {}",
            operator.n_components(),
            space.n_components()
        )));
    }
    let quad = ElementQuadrature::with_extra(space, OPERATOR_EXTRA_POINTS)?;
    let n = space.n_dofs();
    let bw = space.bandwidth();
    let nc = space.n_components();
    let nb = quad.n_basis;
    let h = space.h();
    let mut mass = BandedMatrix::zeros(n, bw, bw);
    let mut stiffness = BandedMatrix::zeros(n, bw, bw);
    let mut unit = vec![0.0; nc];
    let zero = vec![0.0; nc];
    // l1[(a * nc + c) * nc + k]: component k of L1 applied to phi_a e_c
    let mut l1 = vec![0.0; nb * nc * nc];
    let mut l2 = vec![0.0; nb * nc * nc];
    for e in 0..space.n_elements() {
        let left = space.element_left(e);
        for q in 0..quad.n_points() {
            let x = left + h * quad.points[q];
            let w = quad.weights[q] * h;
            let phi = quad.phi(q);
            let dphi = quad.dphi(q);
            for a in 0..nb {
                for c in 0..nc {
                    let slot = (a * nc + c) * nc;
                    unit.iter_mut().for_each(|u| *u = 0.0);
                    unit[c] = dphi[a] / h;
                    operator.l1(x, &unit, &mut l1[slot..slot + nc]);
                    let mut val = zero.clone();
                    val[c] = phi[a];
                    operator.l2(&val, &unit, &mut l2[slot..slot + nc]);
                }
            }
            for i in 0..nb {
                let gi = space.element_node(e, i);
                for j in 0..nb {
                    let gj = space.element_node(e, j);
                    let m = w * phi[i] * phi[j];
                    for c in 0..nc {
                        mass.add(space.dof(gi, c), space.dof(gj, c), m);
                    }
                    for ci in 0..nc {
                        let si = (i * nc + ci) * nc;
                        for cj in 0..nc {
                            let sj = (j * nc + cj) * nc;
                            let mut dot = 0.0;
                            for k in 0..nc {
                                dot += l2[si + k] * l1[sj + k];
                            }
                            if dot != 0.0 {
                                stiffness.add(space.dof(gi, ci), space.dof(gj, cj), w * dot);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(OperatorMatrices { mass, stiffness })
}

/// `entry_i = (w, phi_i)` with `degree + 6` Gauss points per cell.
pub fn weighted_vector(space: &SpatialSpace, w: &dyn Fn(f64, &mut [f64])) -> Vec<f64> {
    let quad =
        ElementQuadrature::with_extra(space, ANALYTIC_EXTRA_POINTS).expect("quadrature order within range");
    let nc = space.n_components();
    let xs = quad.physical_points(space);
    let mut vals = vec![0.0; xs.len() * nc];
    for (k, &x) in xs.iter().enumerate() {
        w(x, &mut vals[k * nc..(k + 1) * nc]);
    }
    let mut out = vec![0.0; space.n_dofs()];
    quad.pair_with_basis(space, Some(&vals), None, &mut out);
    out
}

/// Nodal interpolation of `g`.
pub fn interpolate(space: &SpatialSpace, g: &dyn Fn(f64, &mut [f64])) -> Vec<f64> {
    let nc = space.n_components();
    let mut out = vec![0.0; space.n_dofs()];
    for node in 0..space.n_nodes() {
        g(space.node_x(node), &mut out[node * nc..(node + 1) * nc]);
    }
    out
}

/// Spatial L2 norm of `coeffs - g` with analytic-data quadrature.
pub fn l2_error(space: &SpatialSpace, coeffs: &[f64], g: &dyn Fn(f64, &mut [f64])) -> f64 {
    let quad =
        ElementQuadrature::with_extra(space, ANALYTIC_EXTRA_POINTS).expect("quadrature order within range");
    let nc = space.n_components();
    let xs = quad.physical_points(space);
    let mut vals = vec![0.0; xs.len() * nc];
    quad.field_at_points(space, coeffs, &mut vals, None);
    let mut exact = vec![0.0; nc];
    let mut sum = 0.0;
    let nq = quad.n_points();
    for (k, &x) in xs.iter().enumerate() {
        g(x, &mut exact);
        let w = quad.weights[k % nq] * space.h();
        for c in 0..nc {
            let d = vals[k * nc + c] - exact[c];
            sum += w * d * d;
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::operator::Bathymetry;
    use crate::fem::space::{DirichletSpec, Interval};
    use std::f64::consts::PI;

    fn heat_space(n: usize, q: usize) -> SpatialSpace {
        SpatialSpace::new(Interval::new(0.0, 1.0), n, q, 1, &DirichletSpec::none(1)).unwrap()
    }

    #[test]
    fn linear_mass_and_stiffness_match_hand_integration() {
        let s = heat_space(2, 1);
        let m = assemble(&s, &SpatialOperator::Diffusion).unwrap();
        let h = 0.5;
        let mass = [[2.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 2.0]];
        let stiff = [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.mass.get(i, j) - h / 6.0 * mass[i][j]).abs() < 1e-14);
                assert!((m.stiffness.get(i, j) - stiff[i][j] / h).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn shallow_water_blocks_scale_by_wave_speed_squared() {
        let op = SpatialOperator::ShallowWater {
            gravity: 9.81,
            rest_height: 1.0,
            bathymetry: Bathymetry::Constant(-0.1),
        };
        let s = SpatialSpace::new(Interval::new(0.0, 400.0), 10, 2, 2, &DirichletSpec::none(2)).unwrap();
        let m = assemble(&s, &op).unwrap();
        let nn = s.n_nodes();
        for i in 0..nn {
            for j in 0..nn {
                let eta_mu = m.stiffness.get(s.dof(i, 0), s.dof(j, 1));
                let mu_eta = m.stiffness.get(s.dof(i, 1), s.dof(j, 0));
                assert!((mu_eta - 9.81 * 1.1 * eta_mu).abs() < 1e-12 * (1.0 + mu_eta.abs()));
                assert_eq!(m.stiffness.get(s.dof(i, 0), s.dof(j, 0)), 0.0);
            }
        }
    }

    #[test]
    fn mass_partition_of_unity() {
        let s = SpatialSpace::new(Interval::new(0.0, 400.0), 7, 3, 2, &DirichletSpec::none(2)).unwrap();
        let op = SpatialOperator::ShallowWater {
            gravity: 9.81,
            rest_height: 1.0,
            bathymetry: Bathymetry::Constant(-0.1),
        };
        let m = assemble(&s, &op).unwrap();
        assert!((m.mass.sum() - 2.0 * 400.0).abs() < 1e-10 * 800.0);
    }

    #[test]
    fn mass_times_ones_solves_back() {
        let s = heat_space(9, 2);
        let m = assemble(&s, &SpatialOperator::Diffusion).unwrap();
        let ones = vec![1.0; s.n_dofs()];
        let mut b = vec![0.0; s.n_dofs()];
        m.mass.matvec(&ones, &mut b);
        let x = m.mass.solve(&b).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn weighted_vector_of_sine_pairs_to_one_half() {
        let s = heat_space(100, 1);
        let w = |x: f64, o: &mut [f64]| o[0] = (PI * x).sin();
        let wv = weighted_vector(&s, &w);
        let u = interpolate(&s, &w);
        let g: f64 = wv.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((g - 0.5).abs() < 1e-3);
        let zero = weighted_vector(&s, &|_, o: &mut [f64]| o[0] = 0.0);
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn interpolation_error_is_second_order() {
        let g = |x: f64, o: &mut [f64]| o[0] = (PI * x).sin();
        let e1 = l2_error(&heat_space(100, 1), &interpolate(&heat_space(100, 1), &g), &g);
        let e2 = l2_error(&heat_space(200, 1), &interpolate(&heat_space(200, 1), &g), &g);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        let c = interpolate(&heat_space(5, 3), &|_, o: &mut [f64]| o[0] = 2.5);
        assert!(c.iter().all(|v| *v == 2.5));
    }
}
