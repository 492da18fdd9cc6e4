//! Backward adjoint problems and the error representation they weight.
//!
//! With `s = t_c - t` the adjoint `-phi_t + L* phi = (grad_u f)^T phi`,
//! `phi(t_c) = psi` becomes a forward problem in `s` whose spatial form is
//! `(L2 phi, L1 v)`, the transpose of the forward operator matrix. It is
//! solved with the cG scheme on a space `delta` degrees higher in space and
//! time, over the forward partition cut at `t_c`.

use crate::error::{invalid, Result};
use crate::fem::assembly::ANALYTIC_EXTRA_POINTS;
use crate::fem::{assemble, gauss_rule, ElementQuadrature, LagrangeBasis, SpatialSpace};
use crate::forward::{
    time_nodes, SlabOptions, SlabSolver, Source, SourceKind, SpaceTimeSolution, TimePartition,
};
use crate::problems::{adjoint_initial_data, AdjointData, EventSpec, ProblemSpec, StateAt};

/// Default elevation of the adjoint degrees over the forward ones.
pub const DEFAULT_DEGREE_OFFSET: usize = 2;

/// An adjoint solution stored in reversed time: row time `s` is `t = t_c - s`.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub which: AdjointData,
    pub t_c: f64,
    pub solution: SpaceTimeSolution,
}

impl AdjointSolution {
    /// `phi(t)` for `t` in `[t0, t_c]`.
    pub fn at_time(&self, t: f64) -> Result<Vec<f64>> {
        self.solution.evaluate(self.t_c - t)
    }
}

/// The elevated adjoint space: same mesh, degree `+ delta`, homogeneous
/// constraints on the forward-constrained dofs.
pub fn adjoint_space(forward: &SpatialSpace, delta: usize) -> Result<SpatialSpace> {
    Ok(forward.with_degree(forward.degree() + delta)?.homogeneous())
}

/// Reaction term `(grad_u f(U))^T phi` of the adjoint equation, in reversed time.
struct AdjointReaction<'a> {
    problem: &'a ProblemSpec,
    u: &'a SpaceTimeSolution,
    t_c: f64,
    // forward basis tabulated at the adjoint quadrature points
    forward_quad: ElementQuadrature,
}

impl Source for AdjointReaction<'_> {
    fn kind(&self) -> SourceKind {
        if self.problem.is_semilinear() {
            SourceKind::StateDependent
        } else {
            SourceKind::Zero
        }
    }

    fn explicit(&self, _s: f64, _xs: &[f64], _values: &mut [f64]) {}

    fn reaction(&self, s: f64, xs: &[f64], states: &[f64], values: &mut [f64], jacobian: Option<&mut [f64]>) {
        let nc = self.problem.n_components();
        let t = self.t_c - s;
        let coeffs = self.u.evaluate(t).expect("adjoint time inside the forward range");
        let mut u_pts = vec![0.0; xs.len() * nc];
        self.forward_quad
            .field_at_points(self.u.space(), &coeffs, &mut u_pts, None);
        let mut grad = vec![0.0; nc * nc];
        let mut jac = jacobian;
        for (k, &x) in xs.iter().enumerate() {
            self.problem.grad_f(&u_pts[k * nc..(k + 1) * nc], x, t, &mut grad);
            for i in 0..nc {
                values[k * nc + i] = (0..nc).map(|j| grad[j * nc + i] * states[k * nc + j]).sum();
            }
            if let Some(jac) = jac.as_deref_mut() {
                for i in 0..nc {
                    for j in 0..nc {
                        jac[(k * nc + i) * nc + j] = grad[j * nc + i];
                    }
                }
            }
        }
    }
}

fn check_event_time(u: &SpaceTimeSolution, t_c: f64) -> Result<()> {
    let part = u.partition();
    if !(t_c > part.t0()) || t_c > part.t_final() {
        return Err(invalid(format!(
            "event time {t_c} outside ({}, {}]",
            part.t0(),
            part.t_final()
        )));
    }
    Ok(())
}

/// Runs the requested adjoints in lockstep over the reversed truncated
/// partition. `observe(k, rows)` receives the forward slab index `k` covering
/// the current adjoint slab and, per adjoint, its `q_t + delta + 1` rows in
/// reversed-time order (row 0 at the slab's later end).
fn drive(
    problem: &ProblemSpec,
    event: &EventSpec,
    u: &SpaceTimeSolution,
    t_c: f64,
    which: &[AdjointData],
    delta: usize,
    mut observe: impl FnMut(usize, &TimePartition, &[Vec<f64>]) -> Result<()>,
) -> Result<()> {
    check_event_time(u, t_c)?;
    if delta == 0 {
        return Err(invalid("adjoint degree offset must be at least 1"));
    }
    let space = adjoint_space(u.space(), delta)?;
    let q_a = u.q_t() + delta;
    let n = space.n_dofs();
    let matrices = assemble(&space, &problem.operator)?;
    let transposed = matrices.stiffness.transpose();
    let (points, weights) = gauss_rule(space.degree() + ANALYTIC_EXTRA_POINTS)?.unit_interval();
    let reaction = AdjointReaction {
        problem,
        u,
        t_c,
        forward_quad: ElementQuadrature::at_points(u.space(), points, weights),
    };
    let truncated = u.partition().truncated(t_c)?;

    let k_c = u.partition().slab_of(t_c);
    let state_coeffs = {
        let p = u.partition();
        let mut out = vec![0.0; u.space().n_dofs()];
        u.eval_in_slab(k_c, (t_c - p.knot(k_c)) / p.width(k_c), &mut out);
        out
    };
    let state = StateAt {
        space: u.space(),
        coeffs: &state_coeffs,
        t: t_c,
    };
    let mut current: Vec<Vec<f64>> = which
        .iter()
        .map(|&w| adjoint_initial_data(problem, event, w, &space, Some(state)))
        .collect::<Result<_>>()?;
    let mut solvers: Vec<SlabSolver<'_>> = which
        .iter()
        .map(|_| {
            SlabSolver::new(
                &space,
                &matrices.mass,
                &transposed,
                &reaction,
                q_a,
                SlabOptions::default(),
            )
        })
        .collect::<Result<_>>()?;

    let n_slabs = truncated.n_slabs();
    let mut s_start = 0.0;
    for i in 0..n_slabs {
        let k = n_slabs - 1 - i;
        let width = truncated.width(k);
        let mut rows = Vec::with_capacity(which.len());
        for (solver, phi0) in solvers.iter_mut().zip(current.iter_mut()) {
            let next = solver.step(i, s_start, width, phi0)?;
            let mut all = Vec::with_capacity((q_a + 1) * n);
            all.extend_from_slice(phi0);
            all.extend_from_slice(&next);
            phi0.copy_from_slice(&next[(q_a - 1) * n..]);
            rows.push(all);
        }
        observe(k, &truncated, &rows)?;
        s_start += width;
    }
    Ok(())
}

/// Solves adjoint problem `which` for the event at `t_c`, storing every row.
pub fn solve_adjoint(
    problem: &ProblemSpec,
    event: &EventSpec,
    u: &SpaceTimeSolution,
    t_c: f64,
    which: AdjointData,
    delta: usize,
) -> Result<AdjointSolution> {
    let space = adjoint_space(u.space(), delta.max(1))?;
    let n = space.n_dofs();
    let q_a = u.q_t() + delta;
    let mut values: Vec<f64> = Vec::new();
    let mut s_knots = vec![0.0];
    drive(problem, event, u, t_c, &[which], delta, |k, part, rows| {
        let r = &rows[0];
        if values.is_empty() {
            values.extend_from_slice(&r[..n]);
        }
        values.extend_from_slice(&r[n..]);
        s_knots.push(s_knots[s_knots.len() - 1] + part.width(k));
        Ok(())
    })?;
    let partition = TimePartition::from_knots(s_knots)?;
    Ok(AdjointSolution {
        which,
        t_c,
        solution: SpaceTimeSolution::from_parts(space, partition, q_a, values)?,
    })
}

/// Pairs adjoint solutions with the forward residual `f(U) - U_t - L U`.
struct ResidualIntegrator<'a> {
    problem: &'a ProblemSpec,
    u: &'a SpaceTimeSolution,
    space: SpatialSpace,
    quad: ElementQuadrature,
    forward_quad: ElementQuadrature,
    xs: Vec<f64>,
    time_points: Vec<f64>,
    time_weights: Vec<f64>,
    adjoint_basis: LagrangeBasis,
}

impl<'a> ResidualIntegrator<'a> {
    fn new(problem: &'a ProblemSpec, u: &'a SpaceTimeSolution, delta: usize) -> Result<Self> {
        let space = adjoint_space(u.space(), delta)?;
        let quad = ElementQuadrature::with_extra(&space, ANALYTIC_EXTRA_POINTS)?;
        let forward_quad = ElementQuadrature::at_points(u.space(), quad.points.clone(), quad.weights.clone());
        let xs = quad.physical_points(&space);
        let (time_points, time_weights) = gauss_rule(u.q_t() + delta + 3)?.unit_interval();
        Ok(Self {
            problem,
            u,
            quad,
            forward_quad,
            xs,
            time_points,
            time_weights,
            adjoint_basis: LagrangeBasis::new(time_nodes(u.q_t() + delta)),
            space,
        })
    }

    /// `sum_points w h (phi . vals + phi_x . ders)`.
    fn pair(&self, phi: &[f64], vals: &[f64], ders: Option<&[f64]>) -> f64 {
        let nc = self.space.n_components();
        let mut pv = vec![0.0; vals.len()];
        let mut pd = vec![0.0; vals.len()];
        self.quad
            .field_at_points(&self.space, phi, &mut pv, ders.map(|_| &mut pd[..]));
        let nq = self.quad.n_points();
        let h = self.space.h();
        let mut total = 0.0;
        for e in 0..self.space.n_elements() {
            let mut elem = 0.0;
            for q in 0..nq {
                let k = (e * nq + q) * nc;
                let mut acc = 0.0;
                for c in 0..nc {
                    acc += pv[k + c] * vals[k + c];
                    if let Some(d) = ders {
                        acc += pd[k + c] * d[k + c];
                    }
                }
                elem += self.quad.weights[q] * acc;
            }
            total += h * elem;
        }
        total
    }

    /// `(phi(t0), u0 - U(t0))` for each adjoint.
    fn initial_terms(&self, phis: &[&[f64]]) -> Vec<f64> {
        let nc = self.space.n_components();
        let npts = self.xs.len();
        let mut diff = vec![0.0; npts * nc];
        self.forward_quad
            .field_at_points(self.u.space(), self.u.row(0), &mut diff, None);
        let mut u0 = vec![0.0; nc];
        for (k, &x) in self.xs.iter().enumerate() {
            self.problem.initial_value(x, &mut u0);
            for c in 0..nc {
                diff[k * nc + c] = u0[c] - diff[k * nc + c];
            }
        }
        phis.iter().map(|phi| self.pair(phi, &diff, None)).collect()
    }

    /// Residual contributions of forward slab `k` restricted to
    /// `[t_a, t_a + width]`; `rows[i]` are adjoint `i`'s rows on that interval
    /// in reversed time.
    fn slab_terms(&self, k: usize, t_a: f64, width: f64, rows: &[&[f64]]) -> Vec<f64> {
        let nc = self.space.n_components();
        let n_a = self.space.n_dofs();
        let n_f = self.u.space().n_dofs();
        let npts = self.xs.len();
        let op = &self.problem.operator;
        let uses_derivative = op.l2_uses_derivative();
        let fpart = self.u.partition();
        let (t_k, p_k) = (fpart.knot(k), fpart.width(k));

        let mut coeffs = vec![0.0; n_f];
        let mut coeffs_dt = vec![0.0; n_f];
        let mut u_pts = vec![0.0; npts * nc];
        let mut ux_pts = vec![0.0; npts * nc];
        let mut ut_pts = vec![0.0; npts * nc];
        let mut vals = vec![0.0; npts * nc];
        let mut ders = vec![0.0; npts * nc];
        let mut f = vec![0.0; nc];
        let mut l1 = vec![0.0; nc];
        let mut phi = vec![0.0; n_a];
        let mut out = vec![0.0; rows.len()];
        for (&tau, &wt) in self.time_points.iter().zip(&self.time_weights) {
            let t = t_a + width * tau;
            let s_f = ((t - t_k) / p_k).clamp(0.0, 1.0);
            self.u.eval_in_slab(k, s_f, &mut coeffs);
            self.u.eval_dt_in_slab(k, s_f, &mut coeffs_dt);
            self.forward_quad
                .field_at_points(self.u.space(), &coeffs, &mut u_pts, Some(&mut ux_pts));
            self.forward_quad
                .field_at_points(self.u.space(), &coeffs_dt, &mut ut_pts, None);
            for (p, &x) in self.xs.iter().enumerate() {
                let r = p * nc..(p + 1) * nc;
                self.problem.f(&u_pts[r.clone()], x, t, &mut f);
                op.l1(x, &ux_pts[r.clone()], &mut l1);
                for c in 0..nc {
                    let base = f[c] - ut_pts[p * nc + c];
                    if uses_derivative {
                        vals[p * nc + c] = base;
                        ders[p * nc + c] = -l1[c];
                    } else {
                        vals[p * nc + c] = base - l1[c];
                    }
                }
            }
            // adjoint local coordinate runs backwards
            let l = self.adjoint_basis.value_vec(1.0 - tau);
            for (o, r) in out.iter_mut().zip(rows) {
                phi.iter_mut().for_each(|v| *v = 0.0);
                for (j, &lj) in l.iter().enumerate() {
                    for (pv, rv) in phi.iter_mut().zip(&r[j * n_a..(j + 1) * n_a]) {
                        *pv += lj * rv;
                    }
                }
                let d = if uses_derivative { Some(&ders[..]) } else { None };
                *o += width * wt * self.pair(&phi, &vals, d);
            }
        }
        out
    }
}

/// `(phi(t0), e(t0)) + int_{t0}^{t_c} (phi, f(U) - U_t) - (L2 phi, L1 U) dt`.
pub fn error_functional(problem: &ProblemSpec, u: &SpaceTimeSolution, phi: &AdjointSolution) -> Result<f64> {
    let sol = &phi.solution;
    let delta = sol
        .q_t()
        .checked_sub(u.q_t())
        .filter(|d| *d >= 1 && sol.space().degree() == u.space().degree() + d)
        .ok_or_else(|| invalid("adjoint degrees do not match the forward solution"))?;
    let integrator = ResidualIntegrator::new(problem, u, delta)?;
    let s_part = sol.partition();
    let n = sol.space().n_dofs();
    let q_a = sol.q_t();
    let mut total = integrator.initial_terms(&[sol.row(sol.n_rows() - 1)])[0];
    for i in 0..s_part.n_slabs() {
        let width = s_part.width(i);
        let t_b = phi.t_c - s_part.knot(i);
        let t_a = t_b - width;
        let k = u.partition().slab_of(0.5 * (t_a + t_b));
        let rows = &sol.values()[i * q_a * n..((i + 1) * q_a + 1) * n];
        total += integrator.slab_terms(k, t_a, width, &[rows])[0];
    }
    Ok(total)
}

/// `E_1, E_2, E_3` without storing the adjoint solutions. The third is
/// exactly zero for problems with a state-independent right-hand side.
pub fn adjoint_error_estimates(
    problem: &ProblemSpec,
    event: &EventSpec,
    u: &SpaceTimeSolution,
    t_c: f64,
    delta: usize,
) -> Result<[f64; 3]> {
    let which: Vec<AdjointData> = AdjointData::ALL
        .into_iter()
        .filter(|w| *w != AdjointData::Reaction || problem.is_semilinear())
        .collect();
    let integrator = ResidualIntegrator::new(problem, u, delta.max(1))?;
    let mut sums = vec![0.0; which.len()];
    let mut last_rows: Vec<Vec<f64>> = Vec::new();
    let n = integrator.space.n_dofs();
    drive(problem, event, u, t_c, &which, delta, |k, part, rows| {
        let refs: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
        let terms = integrator.slab_terms(k, part.knot(k), part.width(k), &refs);
        for (s, t) in sums.iter_mut().zip(terms) {
            *s += t;
        }
        last_rows = rows.to_vec();
        Ok(())
    })?;
    let q_a = u.q_t() + delta;
    let finals: Vec<&[f64]> = last_rows.iter().map(|r| &r[q_a * n..]).collect();
    for (s, t) in sums.iter_mut().zip(integrator.initial_terms(&finals)) {
        *s += t;
    }
    let mut out = [0.0; 3];
    for (w, s) in which.iter().zip(sums) {
        out[w.index() - 1] = s;
    }
    Ok(out)
}
