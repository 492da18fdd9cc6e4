//! Event-time error estimates `nu = E1 / D` and their effectivity.

use crate::adjoint::{adjoint_error_estimates, DEFAULT_DEGREE_OFFSET};
use crate::error::{Error, Result};
use crate::event::{functional_series, nth_event, FunctionalSeries};
use crate::fem::assembly::ANALYTIC_EXTRA_POINTS;
use crate::fem::{gauss_rule, ElementQuadrature, QuadratureRule};
use crate::forward::SpaceTimeSolution;
use crate::problems::{EventSpec, ProblemSpec};

/// Where the true event time comes from.
#[derive(Debug, Clone, Copy)]
pub enum Truth<'a> {
    None,
    /// Root of `G` evaluated on the problem's exact solution.
    Analytic,
    /// Crossing of a reference solution's functional.
    Reference(&'a FunctionalSeries),
}

/// One event-time estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub occurrence: usize,
    pub t_c: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// `(L2 w, L1 U(t_c)) - (w, f(U(t_c)))`.
    pub d_direct: f64,
    /// `d_direct - e3 + e2`.
    pub d: f64,
    pub nu: f64,
    pub t_t: Option<f64>,
    pub e_q: Option<f64>,
    pub rho_eff: Option<f64>,
}

impl EstimateReport {
    /// Flat `key = value` pairs; absent values are omitted.
    pub fn records(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("occurrence", self.occurrence.to_string()),
            ("t_c", self.t_c.to_string()),
            ("E1", self.e1.to_string()),
            ("E2", self.e2.to_string()),
            ("E3", self.e3.to_string()),
            ("D_direct", self.d_direct.to_string()),
            ("D", self.d.to_string()),
            ("nu", self.nu.to_string()),
        ];
        for (k, v) in [("t_t", self.t_t), ("e_Q", self.e_q), ("rho_eff", self.rho_eff)] {
            if let Some(v) = v {
                out.push((k, v.to_string()));
            }
        }
        out
    }
}

/// `(L2 w, L1 U(t_c)) - (w, f(U(t_c), t_c))` with analytic `w`.
pub fn direct_denominator(
    problem: &ProblemSpec,
    event: &EventSpec,
    u: &SpaceTimeSolution,
    t_c: f64,
    delta: usize,
) -> Result<f64> {
    let space = u.space();
    let nc = space.n_components();
    let quad = ElementQuadrature::new(space, space.degree() + delta + ANALYTIC_EXTRA_POINTS)?;
    let xs = quad.physical_points(space);
    let coeffs = u.evaluate(t_c)?;
    let mut vals = vec![0.0; xs.len() * nc];
    let mut ders = vec![0.0; xs.len() * nc];
    quad.field_at_points(space, &coeffs, &mut vals, Some(&mut ders));
    let op = &problem.operator;
    let (mut w, mut wx, mut l2w, mut l1u, mut f) = (
        vec![0.0; nc],
        vec![0.0; nc],
        vec![0.0; nc],
        vec![0.0; nc],
        vec![0.0; nc],
    );
    let nq = quad.n_points();
    let mut total = 0.0;
    for (p, &x) in xs.iter().enumerate() {
        let r = p * nc..(p + 1) * nc;
        event.w(x, &mut w);
        event.w_dx(x, &mut wx);
        op.l2(&w, &wx, &mut l2w);
        op.l1(x, &ders[r.clone()], &mut l1u);
        problem.f(&vals[r], x, t_c, &mut f);
        let integrand: f64 = (0..nc).map(|c| l2w[c] * l1u[c] - w[c] * f[c]).sum();
        total += quad.weights[p % nq] * space.h() * integrand;
    }
    Ok(total)
}

/// `G(u; t)` on the exact solution, by composite Gauss quadrature over the
/// support of `w`.
fn analytic_functional(
    problem: &ProblemSpec,
    event: &EventSpec,
    exact: &(dyn Fn(f64, f64, &mut [f64]) + Send + Sync),
    rule: &QuadratureRule,
    t: f64,
) -> f64 {
    let nc = problem.n_components();
    let support = event.support(problem.domain);
    let panels = 64;
    let h = support.length() / panels as f64;
    let (mut u, mut w) = (vec![0.0; nc], vec![0.0; nc]);
    let mut total = 0.0;
    for e in 0..panels {
        let left = support.lo + h * e as f64;
        for (xi, wi) in rule.points().iter().zip(rule.weights()) {
            let x = left + 0.5 * h * (xi + 1.0);
            exact(x, t, &mut u);
            event.w(x, &mut w);
            total += 0.5 * h * wi * (0..nc).map(|c| u[c] * w[c]).sum::<f64>();
        }
    }
    total
}

/// `n`-th time after `event.tau` at which the exact `G` crosses the threshold.
pub fn analytic_event_time(problem: &ProblemSpec, event: &EventSpec, n: usize) -> Result<f64> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("{} has no exact solution", problem.name)))?;
    if n == 0 {
        return Err(crate::error::invalid("event occurrence counts from 1"));
    }
    let rule = gauss_rule(12)?;
    let raw = |t: f64| analytic_functional(problem, event, exact.as_ref(), &rule, t) - event.threshold;
    let (t0, t_end) = (event.tau, problem.t_final);
    let samples = 4000;
    let dt = (t_end - t0) / samples as f64;
    // values within round-off of the threshold count as touching it
    let snap = 1e-13 * event.threshold.abs().max(f64::MIN_POSITIVE);
    let g = |t: f64| {
        let v = raw(t);
        if v.abs() <= snap {
            0.0
        } else {
            v
        }
    };
    let mut found = 0;
    let mut prev = g(t0);
    let mut prev_t = t0;
    for i in 1..=samples {
        let t = if i == samples { t_end } else { t0 + dt * i as f64 };
        let gt = g(t);
        if gt == 0.0 {
            continue;
        }
        if prev != 0.0 && gt.signum() != prev.signum() {
            found += 1;
            if found == n {
                let (mut a, mut b, fa) = (prev_t, t, prev);
                while b - a > 1e-14 * (t_end - t0).max(1.0) {
                    let m = 0.5 * (a + b);
                    let gm = g(m);
                    if gm == 0.0 {
                        return Ok(m);
                    }
                    if gm.signum() == fa.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return Ok(0.5 * (a + b));
            }
        }
        prev = gt;
        prev_t = t;
    }
    Err(Error::EventNotFound { requested: n, found })
}

/// Estimates the error in the time of `event` on `u` with adjoints elevated by `delta`.
pub fn estimate_event_error_with(
    problem: &ProblemSpec,
    event: &EventSpec,
    u: &SpaceTimeSolution,
    truth: Truth<'_>,
    delta: usize,
) -> Result<EstimateReport> {
    let series = functional_series(u, event)?;
    let crossing = nth_event(&series, event.threshold, event.occurrence, event.tau)?;
    let t_c = crossing.t;
    let [e1, e2, e3] = adjoint_error_estimates(problem, event, u, t_c, delta)?;
    let d_direct = direct_denominator(problem, event, u, t_c, delta)?;
    let d = d_direct - e3 + e2;
    if d.abs() < 1e-12 * d_direct.abs().max(1.0) {
        return Err(Error::DegenerateDenominator {
            denominator: d,
            direct: d_direct,
        });
    }
    let nu = e1 / d;
    let t_t = match truth {
        Truth::None => None,
        Truth::Analytic => Some(analytic_event_time(problem, event, event.occurrence)?),
        Truth::Reference(reference) => {
            Some(nth_event(reference, event.threshold, event.occurrence, event.tau)?.t)
        }
    };
    let e_q = t_t.map(|t| t - t_c);
    Ok(EstimateReport {
        occurrence: event.occurrence,
        t_c,
        e1,
        e2,
        e3,
        d_direct,
        d,
        nu,
        t_t,
        e_q,
        rho_eff: e_q.map(|e| nu / e),
    })
}

/// [`estimate_event_error_with`] at the default adjoint elevation.
pub fn estimate_event_error(
    problem: &ProblemSpec,
    event: &EventSpec,
    u: &SpaceTimeSolution,
    truth: Truth<'_>,
) -> Result<EstimateReport> {
    estimate_event_error_with(problem, event, u, truth, DEFAULT_DEGREE_OFFSET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{solve_forward, TimePartition};
    use crate::problems::make_problem;

    fn run(name: &str, n: usize, q: usize) -> EstimateReport {
        let (p, e) = make_problem(name).unwrap();
        let space = p.space(n, q).unwrap();
        let part = TimePartition::uniform(0.0, p.t_final, n).unwrap();
        let u = solve_forward(&p, &space, &part, q).unwrap();
        estimate_event_error(&p, &e, &u, Truth::Analytic).unwrap()
    }

    #[test]
    fn analytic_times() {
        let (p, e) = make_problem("heat_linear").unwrap();
        let t = analytic_event_time(&p, &e, 1).unwrap();
        assert!((t - 0.94f64.acos()).abs() < 1e-11);
        assert!((t - 0.34816603).abs() < 1e-7);
        let (p, e) = make_problem("swe_manufactured").unwrap();
        let t = analytic_event_time(&p, &e, 1).unwrap();
        assert!((t - 0.81987644).abs() < 1e-6, "{t}");
        let (p, _) = make_problem("swe_constant").unwrap();
        let (_, e) = make_problem("swe_constant").unwrap();
        assert!(matches!(
            analytic_event_time(&p, &e, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tangent_start_is_not_an_event() {
        let (p, e) = make_problem("heat_linear").unwrap();
        let e = e.with_threshold(0.5);
        assert!(matches!(
            analytic_event_time(&p, &e, 1),
            Err(Error::EventNotFound { found: 0, .. })
        ));
    }

    #[test]
    fn heat_linear_row() {
        let r = run("heat_linear", 200, 1);
        assert!((r.t_c - 0.348053).abs() < 2e-6, "{r:?}");
        let e_q = r.e_q.unwrap();
        assert!((e_q / 1.129e-4 - 1.0).abs() < 0.01, "{e_q}");
        assert!((r.rho_eff.unwrap() - 1.0).abs() < 5e-3);
        assert_eq!(r.e3, 0.0);
        assert_eq!(r.d, r.d_direct + r.e2);
        // denominator approximates -dG/dt = 0.5 sin t_c
        assert!((r.d / (0.5 * r.t_c.sin()) - 1.0).abs() < 5e-2);
    }

    #[test]
    fn heat_nonlinear_row() {
        let r = run("heat_nonlinear", 100, 1);
        assert!((r.t_c - 0.347757).abs() < 2e-6, "{r:?}");
        assert!((r.e_q.unwrap() / 4.087e-4 - 1.0).abs() < 0.01);
        assert!((r.rho_eff.unwrap() - 1.0).abs() < 5e-3);
        assert!(r.e3 != 0.0);
    }

    #[test]
    fn swe_manufactured_row() {
        let r = run("swe_manufactured", 100, 2);
        assert!((r.t_c - 0.819917).abs() < 2e-6, "{r:?}");
        assert!((r.e_q.unwrap() / -4.035e-5 - 1.0).abs() < 0.01);
        assert!((r.rho_eff.unwrap() - 1.0).abs() < 5e-3);
        assert_eq!(r.nu.signum(), r.e_q.unwrap().signum());
    }
}
