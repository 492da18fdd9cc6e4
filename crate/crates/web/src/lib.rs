//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Only problems with a known exact solution report `e_Q` and `rho_eff`;
//! reference solves are too slow for an interactive page.

use evtime::estimator::{estimate_event_error_with, EstimateReport, Truth};
use evtime::event::functional_series;
use evtime::forward::{solve_forward, SpaceTimeSolution, TimePartition};
use evtime::problems::{make_problem, EventSpec, ProblemSpec, CATALOG};
use wasm_bindgen::prelude::*;

/// Largest mesh the page may request.
pub const MAX_ELEMENTS: usize = 2000;

fn js_err(err: evtime::Error) -> JsError {
    JsError::new(&err.to_string())
}

/// Catalog keys, one per line.
#[wasm_bindgen]
pub fn problems() -> String {
    CATALOG
        .iter()
        .map(|(name, _)| *name)
        .collect::<Vec<_>>()
        .join("\n")
}

#[wasm_bindgen]
pub fn describe(problem: &str) -> Option<String> {
    CATALOG
        .iter()
        .find(|(name, _)| *name == problem)
        .map(|(_, d)| d.to_string())
}

/// Event threshold `R` of a catalog problem.
#[wasm_bindgen]
pub fn threshold(problem: &str) -> Result<f64, JsError> {
    let (_, event) = make_problem(problem).map_err(js_err)?;
    Ok(event.threshold)
}

fn solve(
    problem: &str,
    n: usize,
    q_t: usize,
    q_s: usize,
) -> Result<(ProblemSpec, EventSpec, SpaceTimeSolution), JsError> {
    if n == 0 || n > MAX_ELEMENTS {
        return Err(JsError::new(&format!("N must be in 1..={MAX_ELEMENTS}")));
    }
    let (p, e) = make_problem(problem).map_err(js_err)?;
    let space = p.space(n, q_s).map_err(js_err)?;
    let partition = TimePartition::uniform(0.0, p.t_final, n).map_err(js_err)?;
    let u = solve_forward(&p, &space, &partition, q_t).map_err(js_err)?;
    Ok((p, e, u))
}

#[wasm_bindgen]
pub struct Estimate {
    report: EstimateReport,
}

#[wasm_bindgen]
impl Estimate {
    #[wasm_bindgen(getter)]
    pub fn t_c(&self) -> f64 {
        self.report.t_c
    }
    #[wasm_bindgen(getter)]
    pub fn nu(&self) -> f64 {
        self.report.nu
    }
    #[wasm_bindgen(getter)]
    pub fn e1(&self) -> f64 {
        self.report.e1
    }
    #[wasm_bindgen(getter)]
    pub fn e2(&self) -> f64 {
        self.report.e2
    }
    #[wasm_bindgen(getter)]
    pub fn e3(&self) -> f64 {
        self.report.e3
    }
    #[wasm_bindgen(getter)]
    pub fn denominator(&self) -> f64 {
        self.report.d
    }
    #[wasm_bindgen(getter)]
    pub fn t_t(&self) -> Option<f64> {
        self.report.t_t
    }
    #[wasm_bindgen(getter)]
    pub fn e_q(&self) -> Option<f64> {
        self.report.e_q
    }
    #[wasm_bindgen(getter)]
    pub fn rho_eff(&self) -> Option<f64> {
        self.report.rho_eff
    }
}

/// Forward solve plus the error estimate for the given event occurrence.
#[wasm_bindgen]
pub fn estimate(
    problem: &str,
    n: usize,
    q_t: usize,
    q_s: usize,
    occurrence: usize,
    adjoint_offset: usize,
) -> Result<Estimate, JsError> {
    let (p, e, u) = solve(problem, n, q_t, q_s)?;
    let truth = if p.exact.is_some() {
        Truth::Analytic
    } else {
        Truth::None
    };
    let event = e.with_occurrence(occurrence);
    let report = estimate_event_error_with(&p, &event, &u, truth, adjoint_offset).map_err(js_err)?;
    Ok(Estimate { report })
}

/// `G(U; t)` as interleaved `[t0, G0, t1, G1, ...]`, `per_slab` samples per slab.
#[wasm_bindgen]
pub fn functional_trace(
    problem: &str,
    n: usize,
    q_t: usize,
    q_s: usize,
    per_slab: usize,
) -> Result<Vec<f64>, JsError> {
    let (_, e, u) = solve(problem, n, q_t, q_s)?;
    let series = functional_series(&u, &e).map_err(js_err)?;
    Ok(series
        .sample(per_slab.max(1))
        .into_iter()
        .flat_map(|(t, g)| [t, g])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_round_trip() {
        let names: Vec<_> = problems().lines().map(str::to_string).collect();
        assert_eq!(names.len(), CATALOG.len());
        assert!(describe(&names[0]).is_some());
        assert!(describe("nope").is_none());
        assert_eq!(threshold("heat_linear").unwrap(), 0.47);
    }

    #[test]
    fn estimate_matches_core() {
        let est = estimate("heat_linear", 50, 1, 1, 1, 2).unwrap();
        assert!((est.t_c() - 0.346346).abs() < 1e-6);
        assert!((est.rho_eff().unwrap() - 1.0).abs() < 5e-3);
        assert_eq!(est.e3(), 0.0);
    }

    #[test]
    fn trace_is_interleaved() {
        let trace = functional_trace("heat_linear", 10, 1, 1, 4).unwrap();
        assert_eq!(trace.len(), 2 * (10 * 4 + 1));
        assert_eq!(trace[0], 0.0);
        assert!((trace[1] - 0.5).abs() < 1e-2);
        assert_eq!(trace[trace.len() - 2], 0.5);
    }
}
