//! Continuous Lagrange spaces on uniform 1D meshes.

use super::lagrange::LagrangeBasis;
use crate::error::{invalid, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Dirichlet data: for each solution component, the value imposed at both
/// ends of the domain, or `None` when the component is free.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSpec(pub Vec<Option<f64>>);

impl DirichletSpec {
    pub fn none(n_components: usize) -> Self {
        Self(vec![None; n_components])
    }

    pub fn homogeneous(&self) -> Self {
        Self(self.0.iter().map(|v| v.map(|_| 0.0)).collect())
    }
}

/// Continuous piecewise polynomial space of degree `degree` on `n_elements`
/// uniform cells, with `n_components` interleaved per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSpace {
    domain: Interval,
    n_elements: usize,
    degree: usize,
    n_components: usize,
    basis: LagrangeBasis,
    // (global dof, prescribed value), sorted by dof
    constrained: Vec<(usize, f64)>,
    is_constrained: Vec<bool>,
}

impl SpatialSpace {
    pub fn new(
        domain: Interval,
        n_elements: usize,
        degree: usize,
        n_components: usize,
        bc: &DirichletSpec,
    ) -> Result<Self> {
        if n_elements < 2 {
            return Err(invalid(format!("need at least 2 elements, got {n_elements}")));
        }
        if degree < 1 {
            return Err(invalid("spatial degree must be at least 1"));
        }
        if n_components < 1 {
            return Err(invalid("need at least one component"));
        }
        if !(domain.length() > 0.0) {
            return Err(invalid("empty spatial domain"));
        }
        if bc.0.len() != n_components {
            return Err(invalid(format!(
                "boundary spec has {} components, space has {n_components}",
                bc.0.len()
            )));
        }
        let n_nodes = n_elements * degree + 1;
        let mut constrained = Vec::new();
        for (c, value) in bc.0.iter().enumerate() {
            if let Some(v) = value {
                constrained.push((c, *v));
                constrained.push(((n_nodes - 1) * n_components + c, *v));
            }
        }
        constrained.sort_by_key(|&(d, _)| d);
        let mut is_constrained = vec![false; n_nodes * n_components];
        for &(d, _) in &constrained {
            is_constrained[d] = true;
        }
        Ok(Self {
            domain,
            n_elements,
            degree,
            n_components,
            basis: LagrangeBasis::equispaced(degree),
            constrained,
            is_constrained,
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elements * self.degree + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.n_components
    }

    pub fn h(&self) -> f64 {
        self.domain.length() / self.n_elements as f64
    }

    /// Reference basis on `[0, 1]`.
    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn node_x(&self, node: usize) -> f64 {
        self.domain.lo + self.domain.length() * node as f64 / (self.n_nodes() - 1) as f64
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.n_components + component
    }

    /// Global node of local node `a` in element `e`.
    pub fn element_node(&self, e: usize, a: usize) -> usize {
        e * self.degree + a
    }

    pub fn element_left(&self, e: usize) -> f64 {
        self.domain.lo + self.h() * e as f64
    }

    /// Element containing `x` and the local coordinate in `[0, 1]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let rel = (x - self.domain.lo) / self.h();
        let e = (rel.floor().max(0.0) as usize).min(self.n_elements - 1);
        (e, rel - e as f64)
    }

    /// Half-bandwidth of operator matrices in the interleaved numbering.
    pub fn bandwidth(&self) -> usize {
        (self.degree + 1) * self.n_components - 1
    }

    pub fn constrained(&self) -> &[(usize, f64)] {
        &self.constrained
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.is_constrained[dof]
    }

    /// Overwrites constrained entries of `coeffs` with their prescribed values.
    pub fn apply_dirichlet(&self, coeffs: &mut [f64]) {
        for &(d, v) in &self.constrained {
            coeffs[d] = v;
        }
    }

    /// Zeros constrained entries of `v`.
    pub fn zero_constrained(&self, v: &mut [f64]) {
        for &(d, _) in &self.constrained {
            v[d] = 0.0;
        }
    }

    /// Same mesh and constraints with a different polynomial degree.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        let mut bc = vec![None; self.n_components];
        for &(d, v) in &self.constrained {
            bc[d % self.n_components] = Some(v);
        }
        Self::new(
            self.domain,
            self.n_elements,
            degree,
            self.n_components,
            &DirichletSpec(bc),
        )
    }

    /// The same space with all prescribed values set to zero.
    pub fn homogeneous(&self) -> Self {
        let mut s = self.clone();
        for c in s.constrained.iter_mut() {
            c.1 = 0.0;
        }
        s
    }

    /// Evaluates the field with coefficient vector `coeffs` at `x`.
    pub fn eval(&self, coeffs: &[f64], x: f64, out: &mut [f64]) {
        let (e, xi) = self.locate(x);
        let phi = self.basis.value_vec(xi);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (a, pa) in phi.iter().enumerate() {
            let node = self.element_node(e, a);
            for (c, o) in out.iter_mut().enumerate() {
                *o += pa * coeffs[self.dof(node, c)];
            }
        }
    }

    /// Evaluates the x-derivative of the field at `x`.
    pub fn eval_dx(&self, coeffs: &[f64], x: f64, out: &mut [f64]) {
        let (e, xi) = self.locate(x);
        let dphi = self.basis.derivative_vec(xi);
        let scale = 1.0 / self.h();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (a, pa) in dphi.iter().enumerate() {
            let node = self.element_node(e, a);
            for (c, o) in out.iter_mut().enumerate() {
                *o += pa * scale * coeffs[self.dof(node, c)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_counts_follow_the_formula() {
        let s = SpatialSpace::new(Interval::new(0.0, 1.0), 2, 1, 1, &DirichletSpec::none(1)).unwrap();
        assert_eq!(s.n_dofs(), 3);
        let xs: Vec<f64> = (0..3).map(|i| s.node_x(i)).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        let s = SpatialSpace::new(Interval::new(0.0, 400.0), 50, 2, 2, &DirichletSpec::none(2)).unwrap();
        assert_eq!(s.n_dofs(), 202);
        let s = SpatialSpace::new(Interval::new(0.0, 1.0), 4, 3, 1, &DirichletSpec::none(1)).unwrap();
        assert_eq!(s.n_dofs(), 13);
    }

    #[test]
    fn shared_interface_nodes() {
        let s = SpatialSpace::new(Interval::new(0.0, 1.0), 3, 2, 1, &DirichletSpec::none(1)).unwrap();
        assert_eq!(s.element_node(0, 2), s.element_node(1, 0));
        assert_eq!(s.element_node(1, 2), s.element_node(2, 0));
    }

    #[test]
    fn constraints_are_boundary_nodes_of_listed_components() {
        let bc = DirichletSpec(vec![None, Some(0.0)]);
        let s = SpatialSpace::new(Interval::new(0.0, 1.0), 4, 2, 2, &bc).unwrap();
        let dofs: Vec<usize> = s.constrained().iter().map(|c| c.0).collect();
        assert_eq!(dofs, vec![1, s.n_dofs() - 1]);
    }

    #[test]
    fn preconditions() {
        let bc = DirichletSpec::none(1);
        assert!(SpatialSpace::new(Interval::new(0.0, 1.0), 1, 1, 1, &bc).is_err());
        assert!(SpatialSpace::new(Interval::new(0.0, 1.0), 4, 0, 1, &bc).is_err());
        assert!(SpatialSpace::new(Interval::new(1.0, 1.0), 4, 1, 1, &bc).is_err());
    }
}
