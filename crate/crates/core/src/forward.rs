//! Space-time continuous Galerkin cG(q_t, q_s) time stepping.
//!
//! On each slab `[t_n, t_n + p]` the trial function is
//! `U(t) = sum_j l_j(s) U_j` with Gauss-Lobatto nodes `s_j` in `[0, 1]`
//! (`U_0` is the value carried over from the previous slab), and the test
//! functions are `P_m(s) phi_i` with shifted Legendre `P_m`, `m < q_t`.
//! The slab equations are
//!
//! ```text
//!   sum_j [ C_mj M + p A_mj B ] U_j = p sum_q w_q P_m(s_q) F(U(t_q), t_q)
//! ```
//!
//! with `C_mj = int P_m l_j'`, `A_mj = int P_m l_j`, `M` the mass and `B` the
//! operator matrix. Unknowns are ordered dof-major (`dof * q_t + j - 1`) so the
//! slab matrix stays banded.

use crate::error::{invalid, Error, Result};
use crate::fem::assembly::ANALYTIC_EXTRA_POINTS;
use crate::fem::quadrature::shifted_legendre;
use crate::fem::{
    assemble, gauss_lobatto_nodes, gauss_rule, interpolate, BandedLu, BandedMatrix, ElementQuadrature,
    LagrangeBasis, SpatialSpace,
};
use crate::problems::{Forcing, ProblemSpec};

/// Slab knots `t_0 < t_1 < ... < t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    knots: Vec<f64>,
}

impl TimePartition {
    /// `n_slabs` slabs of equal width on `[t0, t_final]`.
    pub fn uniform(t0: f64, t_final: f64, n_slabs: usize) -> Result<Self> {
        if n_slabs == 0 || !(t_final > t0) {
            return Err(invalid(format!(
                "bad partition of [{t0}, {t_final}] into {n_slabs} slabs"
            )));
        }
        let p = (t_final - t0) / n_slabs as f64;
        let mut knots: Vec<f64> = (0..=n_slabs).map(|k| t0 + p * k as f64).collect();
        knots[n_slabs] = t_final;
        Ok(Self { knots })
    }

    pub fn from_knots(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("partition knots must be strictly increasing"));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_slabs(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn t0(&self) -> f64 {
        self.knots[0]
    }

    pub fn t_final(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn knot(&self, k: usize) -> f64 {
        self.knots[k]
    }

    pub fn width(&self, k: usize) -> f64 {
        self.knots[k + 1] - self.knots[k]
    }

    /// Slab containing `t`; an interior knot belongs to the slab on its left.
    pub fn slab_of(&self, t: f64) -> usize {
        let below = self.knots.partition_point(|&k| k < t);
        below.max(1).min(self.n_slabs()) - 1
    }

    /// Knots up to `t_end`, the last slab cut at `t_end`. A knot within
    /// `1e-12` relative of `t_end` is treated as `t_end` itself.
    pub fn truncated(&self, t_end: f64) -> Result<Self> {
        let span = self.t_final() - self.t0();
        if !(t_end > self.t0()) || t_end > self.t_final() + 1e-12 * span {
            return Err(invalid(format!("cannot truncate partition at {t_end}")));
        }
        let mut knots: Vec<f64> = self
            .knots
            .iter()
            .copied()
            .take_while(|&k| k < t_end - 1e-12 * span)
            .collect();
        knots.push(t_end);
        Self::from_knots(knots)
    }
}

/// A discrete solution continuous in time: `n_slabs * q_t + 1` coefficient
/// rows, row `k * q_t + j` holding slab `k`'s `j`-th Gauss-Lobatto node.
/// Neighbouring slabs share their boundary row.
#[derive(Debug, Clone)]
pub struct SpaceTimeSolution {
    space: SpatialSpace,
    partition: TimePartition,
    q_t: usize,
    time_basis: LagrangeBasis,
    values: Vec<f64>,
}

/// Gauss-Lobatto time nodes on `[0, 1]`.
pub fn time_nodes(q_t: usize) -> Vec<f64> {
    gauss_lobatto_nodes(q_t + 1)
        .into_iter()
        .map(|x| 0.5 * (x + 1.0))
        .collect()
}

impl SpaceTimeSolution {
    pub fn from_parts(
        space: SpatialSpace,
        partition: TimePartition,
        q_t: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let rows = partition.n_slabs() * q_t + 1;
        if q_t == 0 || values.len() != rows * space.n_dofs() {
            return Err(invalid(format!(
                "expected {rows} rows of {} coefficients, got {} values",
                space.n_dofs(),
                values.len()
            )));
        }
        Ok(Self {
            time_basis: LagrangeBasis::new(time_nodes(q_t)),
            space,
            partition,
            q_t,
            values,
        })
    }

    pub fn space(&self) -> &SpatialSpace {
        &self.space
    }

    pub fn partition(&self) -> &TimePartition {
        &self.partition
    }

    pub fn q_t(&self) -> usize {
        self.q_t
    }

    pub fn n_rows(&self) -> usize {
        self.partition.n_slabs() * self.q_t + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.space.n_dofs();
        &self.values[r * n..(r + 1) * n]
    }

    /// Row of node `j` in slab `k`.
    pub fn slab_row(&self, k: usize, j: usize) -> &[f64] {
        self.row(k * self.q_t + j)
    }

    /// Global time of every row.
    pub fn row_times(&self) -> Vec<f64> {
        let nodes = self.time_basis.nodes();
        let mut out = Vec::with_capacity(self.n_rows());
        for k in 0..self.partition.n_slabs() {
            let (t, p) = (self.partition.knot(k), self.partition.width(k));
            for &s in &nodes[..self.q_t] {
                out.push(t + p * s);
            }
        }
        out.push(self.partition.t_final());
        out
    }

    /// `U` at local coordinate `s` of slab `k`.
    pub fn eval_in_slab(&self, k: usize, s: f64, out: &mut [f64]) {
        let l = self.time_basis.value_vec(s);
        self.combine(k, &l, 1.0, out);
    }

    /// `dU/dt` at local coordinate `s` of slab `k`.
    pub fn eval_dt_in_slab(&self, k: usize, s: f64, out: &mut [f64]) {
        let dl = self.time_basis.derivative_vec(s);
        self.combine(k, &dl, 1.0 / self.partition.width(k), out);
    }

    fn combine(&self, k: usize, coef: &[f64], scale: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &c) in coef.iter().enumerate() {
            let c = c * scale;
            if c == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.slab_row(k, j)) {
                *o += c * v;
            }
        }
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let span = self.partition.t_final() - self.partition.t0();
        if t < self.partition.t0() - 1e-14 * span || t > self.partition.t_final() + 1e-14 * span {
            return Err(invalid(format!(
                "time {t} outside [{}, {}]",
                self.partition.t0(),
                self.partition.t_final()
            )));
        }
        let k = self.partition.slab_of(t);
        let s = ((t - self.partition.knot(k)) / self.partition.width(k)).clamp(0.0, 1.0);
        Ok((k, s))
    }

    /// `U(t)`.
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        let (k, s) = self.locate(t)?;
        let mut out = vec![0.0; self.space.n_dofs()];
        if s == 0.0 {
            out.copy_from_slice(self.slab_row(k, 0));
        } else if s == 1.0 {
            out.copy_from_slice(self.slab_row(k, self.q_t));
        } else {
            self.eval_in_slab(k, s, &mut out);
        }
        Ok(out)
    }

    /// `dU/dt(t)`; at interior knots the left slab is used.
    pub fn evaluate_dt(&self, t: f64) -> Result<Vec<f64>> {
        let (k, s) = self.locate(t)?;
        let mut out = vec![0.0; self.space.n_dofs()];
        self.eval_dt_in_slab(k, s, &mut out);
        Ok(out)
    }
}

/// How a source term depends on the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Zero,
    Explicit,
    StateDependent,
}

/// Right-hand side `f = reaction(u, x, t) + explicit(x, t)`, evaluated at
/// many points of one time.
pub trait Source: Sync {
    fn kind(&self) -> SourceKind;

    /// `values[k * nc + c]` of the state-independent part at `xs[k]`.
    fn explicit(&self, t: f64, xs: &[f64], values: &mut [f64]);

    /// `values[k * nc + c]` of the state-dependent part; if `jacobian` is
    /// given, `jacobian[(k * nc + i) * nc + j] = d reaction_i / du_j`.
    fn reaction(&self, t: f64, xs: &[f64], states: &[f64], values: &mut [f64], jacobian: Option<&mut [f64]>);

    fn has_explicit(&self) -> bool {
        self.kind() == SourceKind::Explicit
    }
}

/// The right-hand side `f(u, x, t)` of a catalog problem.
pub struct ProblemSource<'a> {
    pub problem: &'a ProblemSpec,
}

impl Source for ProblemSource<'_> {
    fn kind(&self) -> SourceKind {
        match self.problem.forcing {
            Forcing::Zero => SourceKind::Zero,
            Forcing::Explicit(_) => SourceKind::Explicit,
            Forcing::Semilinear { .. } => SourceKind::StateDependent,
        }
    }

    fn has_explicit(&self) -> bool {
        !matches!(self.problem.forcing, Forcing::Zero)
    }

    fn explicit(&self, t: f64, xs: &[f64], values: &mut [f64]) {
        let nc = self.problem.n_components();
        for (k, &x) in xs.iter().enumerate() {
            self.problem.source(x, t, &mut values[k * nc..(k + 1) * nc]);
        }
    }

    fn reaction(&self, t: f64, xs: &[f64], states: &[f64], values: &mut [f64], jacobian: Option<&mut [f64]>) {
        let nc = self.problem.n_components();
        for (k, &x) in xs.iter().enumerate() {
            let u = &states[k * nc..(k + 1) * nc];
            self.problem.reaction(u, x, t, &mut values[k * nc..(k + 1) * nc]);
        }
        if let Some(jac) = jacobian {
            for (k, &x) in xs.iter().enumerate() {
                let u = &states[k * nc..(k + 1) * nc];
                self.problem
                    .grad_f(u, x, t, &mut jac[k * nc * nc..(k + 1) * nc * nc]);
            }
        }
    }
}

/// Tunables of the slab solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabOptions {
    /// Gauss points per slab for time integrals; `None` means `q_t + 3`.
    pub time_points: Option<usize>,
    pub newton_tolerance: f64,
    pub max_newton_iterations: usize,
    /// Replace the state-independent forcing by its nodal interpolant in
    /// space before pairing it with the test functions.
    pub interpolate_forcing: bool,
}

impl Default for SlabOptions {
    fn default() -> Self {
        Self {
            time_points: None,
            newton_tolerance: 1e-12,
            max_newton_iterations: 25,
            interpolate_forcing: true,
        }
    }
}

/// One-slab cG solver for `(U_t, v) + (op U, v) = (source, v)` on a fixed space.
pub(crate) struct SlabSolver<'a> {
    space: &'a SpatialSpace,
    mass: &'a BandedMatrix,
    operator: &'a BandedMatrix,
    source: &'a dyn Source,
    options: SlabOptions,
    q_t: usize,
    // [m * (q_t + 1) + j]
    deriv_moments: Vec<f64>,
    value_moments: Vec<f64>,
    tq_points: Vec<f64>,
    tq_weights: Vec<f64>,
    // [q * q_t + m]
    test_at_tq: Vec<f64>,
    // [q * (q_t + 1) + j]
    trial_at_tq: Vec<f64>,
    quad: ElementQuadrature,
    xs: Vec<f64>,
    // node coordinates; nodal values of the source land in dof order
    node_xs: Vec<f64>,
    cached: Option<(f64, BandedLu)>,
}

impl<'a> SlabSolver<'a> {
    pub(crate) fn new(
        space: &'a SpatialSpace,
        mass: &'a BandedMatrix,
        operator: &'a BandedMatrix,
        source: &'a dyn Source,
        q_t: usize,
        options: SlabOptions,
    ) -> Result<Self> {
        if q_t == 0 {
            return Err(invalid("time degree must be at least 1"));
        }
        let basis = LagrangeBasis::new(time_nodes(q_t));
        let nq = options.time_points.unwrap_or(q_t + 3);
        let (tq_points, tq_weights) = gauss_rule(nq)?.unit_interval();
        let np = q_t + 1;
        let mut deriv_moments = vec![0.0; q_t * np];
        let mut value_moments = vec![0.0; q_t * np];
        let mut test_at_tq = vec![0.0; nq * q_t];
        let mut trial_at_tq = vec![0.0; nq * np];
        // Moments are polynomial of degree <= 2 q_t - 1; q_t + 1 points are exact.
        let (mp, mw) = gauss_rule(q_t + 1)?.unit_interval();
        for (&s, &w) in mp.iter().zip(&mw) {
            let l = basis.value_vec(s);
            let dl = basis.derivative_vec(s);
            for m in 0..q_t {
                let pm = shifted_legendre(m, s);
                for j in 0..np {
                    deriv_moments[m * np + j] += w * pm * dl[j];
                    value_moments[m * np + j] += w * pm * l[j];
                }
            }
        }
        for (q, &s) in tq_points.iter().enumerate() {
            for m in 0..q_t {
                test_at_tq[q * q_t + m] = shifted_legendre(m, s);
            }
            basis.values(s, &mut trial_at_tq[q * np..(q + 1) * np]);
        }
        let quad = ElementQuadrature::with_extra(space, ANALYTIC_EXTRA_POINTS)?;
        let xs = quad.physical_points(space);
        let node_xs = (0..space.n_nodes()).map(|i| space.node_x(i)).collect();
        Ok(Self {
            space,
            mass,
            operator,
            source,
            options,
            q_t,
            deriv_moments,
            value_moments,
            tq_weights,
            tq_points,
            test_at_tq,
            trial_at_tq,
            quad,
            xs,
            node_xs,
            cached: None,
        })
    }

    fn tq_point(&self, q: usize) -> f64 {
        self.tq_points[q]
    }

    fn slab_bandwidth(&self) -> usize {
        self.space.bandwidth() * self.q_t + self.q_t - 1
    }

    /// Slab matrix without the source Jacobian.
    pub(crate) fn slab_matrix(&self, width: f64) -> BandedMatrix {
        let n = self.space.n_dofs();
        let qt = self.q_t;
        let np = qt + 1;
        let bw = self.slab_bandwidth();
        let mut mat = BandedMatrix::zeros(n * qt, bw, bw);
        for i in 0..n {
            let (lo, hi) = self.mass.row_range(i);
            for k in lo..hi {
                let m_ik = self.mass.get(i, k);
                let b_ik = self.operator.get(i, k);
                if m_ik == 0.0 && b_ik == 0.0 {
                    continue;
                }
                for m in 0..qt {
                    for j in 1..np {
                        let v = self.deriv_moments[m * np + j] * m_ik
                            + width * self.value_moments[m * np + j] * b_ik;
                        if v != 0.0 {
                            mat.add(i * qt + m, k * qt + j - 1, v);
                        }
                    }
                }
            }
        }
        mat
    }

    fn apply_dirichlet_rows(&self, mat: &mut BandedMatrix) {
        for &(d, _) in self.space.constrained() {
            for m in 0..self.q_t {
                mat.eliminate(d * self.q_t + m);
            }
        }
    }

    /// State at time-quadrature point `q` from slab rows `u0` and `x` (rows 1..=q_t).
    fn state_at(&self, q: usize, u0: &[f64], x: &[f64], out: &mut [f64]) {
        let n = self.space.n_dofs();
        let np = self.q_t + 1;
        let l = &self.trial_at_tq[q * np..(q + 1) * np];
        for (o, v) in out.iter_mut().zip(u0) {
            *o = l[0] * v;
        }
        for j in 1..np {
            let row = &x[(j - 1) * n..j * n];
            for (o, v) in out.iter_mut().zip(row) {
                *o += l[j] * v;
            }
        }
    }

    /// Residual `A(X) - Load(X)` in equation layout, with its rhs scale.
    fn residual(&self, t_start: f64, width: f64, u0: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
        let n = self.space.n_dofs();
        let qt = self.q_t;
        let np = qt + 1;
        let nc = self.space.n_components();
        let mut res = vec![0.0; n * qt];
        let mut known = vec![0.0; n * qt];
        let mut mx = vec![0.0; n];
        let mut bx = vec![0.0; n];
        for j in 0..np {
            let row = if j == 0 { u0 } else { &x[(j - 1) * n..j * n] };
            self.mass.matvec(row, &mut mx);
            self.operator.matvec(row, &mut bx);
            let target = if j == 0 { &mut known } else { &mut res };
            for m in 0..qt {
                let c = self.deriv_moments[m * np + j];
                let a = width * self.value_moments[m * np + j];
                for i in 0..n {
                    target[i * qt + m] += c * mx[i] + a * bx[i];
                }
            }
        }
        let mut scale_vec = known.iter().map(|v| -v).collect::<Vec<_>>();
        for (r, k) in res.iter_mut().zip(&known) {
            *r += k;
        }
        let need_state = self.source.kind() == SourceKind::StateDependent;
        let explicit = self.source.has_explicit();
        if need_state || explicit {
            let npts = self.xs.len();
            let mut state = vec![0.0; n];
            let mut states = vec![0.0; npts * nc];
            let mut values = vec![0.0; npts * nc];
            let mut nodal = vec![0.0; n];
            let mut load = vec![0.0; n];
            for q in 0..self.tq_weights.len() {
                let t = t_start + width * self.tq_point(q);
                load.iter_mut().for_each(|v| *v = 0.0);
                if explicit {
                    if self.options.interpolate_forcing {
                        self.source.explicit(t, &self.node_xs, &mut nodal);
                        self.mass.matvec_add(1.0, &nodal, &mut load);
                    } else {
                        self.source.explicit(t, &self.xs, &mut values);
                        self.quad
                            .pair_with_basis(self.space, Some(&values), None, &mut load);
                    }
                }
                if need_state {
                    self.state_at(q, u0, x, &mut state);
                    self.quad.field_at_points(self.space, &state, &mut states, None);
                    self.source.reaction(t, &self.xs, &states, &mut values, None);
                    self.quad
                        .pair_with_basis(self.space, Some(&values), None, &mut load);
                }
                for m in 0..qt {
                    let w = width * self.tq_weights[q] * self.test_at_tq[q * qt + m];
                    for i in 0..n {
                        res[i * qt + m] -= w * load[i];
                        scale_vec[i * qt + m] += w * load[i];
                    }
                }
            }
        }
        for &(d, _) in self.space.constrained() {
            for m in 0..qt {
                res[d * qt + m] = 0.0;
                scale_vec[d * qt + m] = 0.0;
            }
        }
        let scale = scale_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
        (res, scale)
    }

    /// Adds `-dLoad/dX` to `mat`.
    fn add_source_jacobian(&self, mat: &mut BandedMatrix, t_start: f64, width: f64, u0: &[f64], x: &[f64]) {
        let n = self.space.n_dofs();
        let qt = self.q_t;
        let np = qt + 1;
        let nc = self.space.n_components();
        let npts = self.xs.len();
        let nq = self.quad.n_points();
        let nb = self.quad.n_basis;
        let h = self.space.h();
        let mut state = vec![0.0; n];
        let mut states = vec![0.0; npts * nc];
        let mut values = vec![0.0; npts * nc];
        let mut jac = vec![0.0; npts * nc * nc];
        let bw = self.space.bandwidth();
        for q in 0..self.tq_weights.len() {
            let t = t_start + width * self.tq_point(q);
            self.state_at(q, u0, x, &mut state);
            self.quad.field_at_points(self.space, &state, &mut states, None);
            self.source
                .reaction(t, &self.xs, &states, &mut values, Some(&mut jac));
            // spatial reaction matrix K_ik = (df/du phi_k, phi_i)
            let mut react = BandedMatrix::zeros(n, bw, bw);
            for e in 0..self.space.n_elements() {
                for p in 0..nq {
                    let w = self.quad.weights[p] * h;
                    let phi = self.quad.phi(p);
                    let jk = &jac[(e * nq + p) * nc * nc..(e * nq + p + 1) * nc * nc];
                    for a in 0..nb {
                        let ga = self.space.element_node(e, a);
                        for b in 0..nb {
                            let gb = self.space.element_node(e, b);
                            let wab = w * phi[a] * phi[b];
                            for ci in 0..nc {
                                for cj in 0..nc {
                                    let d = jk[ci * nc + cj];
                                    if d != 0.0 {
                                        react.add(self.space.dof(ga, ci), self.space.dof(gb, cj), wab * d);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let l = &self.trial_at_tq[q * np..(q + 1) * np];
            for i in 0..n {
                let (lo, hi) = react.row_range(i);
                for k in lo..hi {
                    let r = react.get(i, k);
                    if r == 0.0 {
                        continue;
                    }
                    for m in 0..qt {
                        let w = width * self.tq_weights[q] * self.test_at_tq[q * qt + m] * r;
                        for j in 1..np {
                            mat.add(i * qt + m, k * qt + j - 1, -w * l[j]);
                        }
                    }
                }
            }
        }
    }

    /// Solves one slab; returns rows `1..=q_t` concatenated.
    pub(crate) fn step(&mut self, slab: usize, t_start: f64, width: f64, u0: &[f64]) -> Result<Vec<f64>> {
        let n = self.space.n_dofs();
        let qt = self.q_t;
        let mut x = Vec::with_capacity(n * qt);
        let mut guess = u0.to_vec();
        self.space.apply_dirichlet(&mut guess);
        for _ in 0..qt {
            x.extend_from_slice(&guess);
        }
        if self.source.kind() != SourceKind::StateDependent {
            // knot differences of a uniform partition vary in the last bits
            let reuse = self
                .cached
                .as_ref()
                .is_some_and(|c| (c.0 - width).abs() <= 1e-12 * width);
            if !reuse {
                let mut mat = self.slab_matrix(width);
                self.apply_dirichlet_rows(&mut mat);
                self.cached = Some((width, mat.factor()?));
            }
            let (res, _) = self.residual(t_start, width, u0, &x);
            let mut delta = res;
            self.cached
                .as_ref()
                .expect("factored")
                .1
                .solve_in_place(&mut delta);
            let mut x = unpermute(&x, n, qt);
            for (xi, d) in x.iter_mut().zip(&delta) {
                *xi -= d;
            }
            return Ok(permute_back(&x, n, qt));
        }
        let mut last = f64::INFINITY;
        for it in 0..self.options.max_newton_iterations {
            let (res, scale) = self.residual(t_start, width, u0, &x);
            let norm = res.iter().map(|v| v * v).sum::<f64>().sqrt();
            last = norm / scale.max(f64::MIN_POSITIVE);
            if norm <= self.options.newton_tolerance * scale || norm == 0.0 {
                return Ok(x);
            }
            let mut mat = self.slab_matrix(width);
            self.add_source_jacobian(&mut mat, t_start, width, u0, &x);
            self.apply_dirichlet_rows(&mut mat);
            let lu = mat.factor()?;
            let mut delta = res;
            lu.solve_in_place(&mut delta);
            let mut xi = unpermute(&x, n, qt);
            for (v, d) in xi.iter_mut().zip(&delta) {
                *v -= d;
            }
            x = permute_back(&xi, n, qt);
            if it + 1 == self.options.max_newton_iterations {
                break;
            }
        }
        Err(Error::SolverFailure {
            slab,
            residual: last,
            iterations: self.options.max_newton_iterations,
        })
    }

    /// Relative slab residual of a computed slab (Galerkin orthogonality check).
    pub(crate) fn relative_residual(&self, t_start: f64, width: f64, u0: &[f64], x: &[f64]) -> f64 {
        let (res, scale) = self.residual(t_start, width, u0, x);
        let norm = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut mu = vec![0.0; u0.len()];
        self.mass.matvec(u0, &mut mu);
        let base = scale + mu.iter().map(|v| v * v).sum::<f64>().sqrt();
        norm / base.max(f64::MIN_POSITIVE)
    }
}

/// Row-major slab rows (`j`-major) to dof-major unknown ordering.
fn unpermute(x: &[f64], n: usize, qt: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * qt];
    for j in 0..qt {
        for i in 0..n {
            out[i * qt + j] = x[j * n + i];
        }
    }
    out
}

fn permute_back(x: &[f64], n: usize, qt: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * qt];
    for j in 0..qt {
        for i in 0..n {
            out[j * n + i] = x[i * qt + j];
        }
    }
    out
}

/// Solves the forward problem with cG(`q_t`, degree of `space`).
pub fn solve_forward(
    problem: &ProblemSpec,
    space: &SpatialSpace,
    partition: &TimePartition,
    q_t: usize,
) -> Result<SpaceTimeSolution> {
    solve_forward_with(problem, space, partition, q_t, SlabOptions::default())
}

pub fn solve_forward_with(
    problem: &ProblemSpec,
    space: &SpatialSpace,
    partition: &TimePartition,
    q_t: usize,
    options: SlabOptions,
) -> Result<SpaceTimeSolution> {
    if q_t == 0 {
        return Err(invalid("time degree must be at least 1"));
    }
    let matrices = assemble(space, &problem.operator)?;
    let source = ProblemSource { problem };
    let mut solver = SlabSolver::new(space, &matrices.mass, &matrices.stiffness, &source, q_t, options)?;
    let n = space.n_dofs();
    let rows = partition.n_slabs() * q_t + 1;
    let mut values = Vec::with_capacity(rows * n);
    let mut u0 = interpolate(space, &|x, o| problem.initial_value(x, o));
    space.apply_dirichlet(&mut u0);
    values.extend_from_slice(&u0);
    for k in 0..partition.n_slabs() {
        let start = values.len() - n;
        let prev = values[start..].to_vec();
        let slab_rows = solver.step(k, partition.knot(k), partition.width(k), &prev)?;
        values.extend_from_slice(&slab_rows);
    }
    SpaceTimeSolution::from_parts(space.clone(), partition.clone(), q_t, values)
}

/// Largest relative slab residual over all slabs of `solution`.
pub fn max_slab_residual(problem: &ProblemSpec, solution: &SpaceTimeSolution) -> Result<f64> {
    let space = solution.space();
    let matrices = assemble(space, &problem.operator)?;
    let source = ProblemSource { problem };
    let solver = SlabSolver::new(
        space,
        &matrices.mass,
        &matrices.stiffness,
        &source,
        solution.q_t(),
        SlabOptions::default(),
    )?;
    let n = space.n_dofs();
    let qt = solution.q_t();
    let part = solution.partition();
    let mut worst: f64 = 0.0;
    for k in 0..part.n_slabs() {
        let u0 = solution.slab_row(k, 0);
        let x = &solution.values()[(k * qt + 1) * n..(k * qt + qt + 1) * n];
        worst = worst.max(solver.relative_residual(part.knot(k), part.width(k), u0, x));
    }
    Ok(worst)
}
