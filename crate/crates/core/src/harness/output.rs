//! Table, report and trace writers.

use std::fmt::Write as _;

use super::{ExperimentConfig, RowOutcome};

/// `N,t_c,e_Q,nu,rho_eff` row of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub occurrence: usize,
    pub t_c: f64,
    pub e_q: Option<f64>,
    pub nu: f64,
    pub rho_eff: Option<f64>,
}

pub const CSV_HEADER: &str = "N,t_c,e_Q,nu,rho_eff";

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV with shortest round-trip numbers. Failed rows keep their `N` and
/// leave the numeric fields empty.
pub fn table_csv(rows: &[RowOutcome]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for row in rows {
        match row.table_row() {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    r.t_c,
                    opt(r.e_q),
                    r.nu,
                    opt(r.rho_eff)
                );
            }
            None => {
                let _ = writeln!(out, "{},,,,", row.n);
            }
        }
    }
    out
}

pub fn errors_csv(rows: &[RowOutcome]) -> String {
    let mut out = String::from("N,occurrence,error\n");
    for row in rows {
        if let Err(err) = &row.result {
            let msg = err.to_string().replace('"', "'");
            let _ = writeln!(out, "{},{},\"{}\"", row.n, row.occurrence, msg);
        }
    }
    out
}

/// Six significant digits, switching to exponent form outside `[1e-3, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-3..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn table_md(config: &ExperimentConfig, rows: &[RowOutcome]) -> String {
    let mut out = format!(
        "{}: cG({},{}), adjoint offset {}, truth {}\n\n",
        config.problem, config.q_t, config.q_s, config.adjoint_offset, config.truth
    );
    out.push_str("| N | event | t_c | e_Q | nu | rho_eff |\n|---:|---:|---:|---:|---:|---:|\n");
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), sig6);
    for row in rows {
        match row.table_row() {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.n,
                    r.occurrence,
                    sig6(r.t_c),
                    cell(r.e_q),
                    sig6(r.nu),
                    cell(r.rho_eff)
                );
            }
            None => {
                let _ = writeln!(out, "| {} | {} | failed | - | - | - |", row.n, row.occurrence);
            }
        }
    }
    out
}

/// Flat `key = value` record for one row.
pub fn report(config: &ExperimentConfig, row: &RowOutcome) -> String {
    let mut out = String::new();
    let header = [
        ("problem", config.problem.clone()),
        ("N", row.n.to_string()),
        ("q_t", config.q_t.to_string()),
        ("q_s", config.q_s.to_string()),
        ("adjoint_offset", config.adjoint_offset.to_string()),
        ("gravity", config.gravity.to_string()),
        ("truth", config.truth.to_string()),
    ];
    for (k, v) in header {
        let _ = writeln!(out, "{k} = {v}");
    }
    match &row.result {
        Ok(report) => {
            for (k, v) in report.records() {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        Err(err) => {
            let _ = writeln!(out, "occurrence = {}", row.occurrence);
            let _ = writeln!(out, "error = {err}");
        }
    }
    out
}

pub fn trace_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("t,G\n");
    for (t, g) in samples {
        let _ = writeln!(out, "{t},{g}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.3480531), "0.348053");
        assert_eq!(sig6(13.34953), "13.3495");
        assert_eq!(sig6(650.90208), "650.902");
        assert_eq!(sig6(1.129e-4), "1.12900e-4");
        assert_eq!(sig6(-3.1642e-3), "-0.00316420");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(0.0), "0");
    }
}
