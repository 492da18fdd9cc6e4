//! Mesh sweeps over a catalog problem, reference caching and table output.

mod cache;
mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{estimate_event_error_with, EstimateReport, Truth};
use crate::event::{functional_series, FunctionalSeries};
use crate::forward::{solve_forward, TimePartition};

pub use cache::{
    build_reference, decode, encode, CacheStatus, ReferenceCache, ReferenceKey, ReferenceSolution,
};
pub use config::{ExperimentConfig, TruthSource};
pub use output::{sig6, table_csv, table_md, TableRow, CSV_HEADER};

/// Overrides the reference cache location.
pub const CACHE_ENV: &str = "ESTIMATE_CACHE_DIR";

/// Samples of `G(U; t)` written per slab in functional traces.
pub const TRACE_SAMPLES_PER_SLAB: usize = 20;

/// `$ESTIMATE_CACHE_DIR` if set, otherwise `<output>/cache`.
pub fn default_cache_dir(config: &ExperimentConfig) -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| config.output.join("cache"))
}

/// Result for one mesh and one event occurrence.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub n: usize,
    pub occurrence: usize,
    pub result: Result<EstimateReport>,
}

impl RowOutcome {
    pub fn table_row(&self) -> Option<TableRow> {
        let r = self.result.as_ref().ok()?;
        Some(TableRow {
            n: self.n,
            occurrence: self.occurrence,
            t_c: r.t_c,
            e_q: r.e_q,
            nu: r.nu,
            rho_eff: r.rho_eff,
        })
    }
}

/// One mesh of a sweep.
#[derive(Debug, Clone)]
pub struct MeshOutcome {
    pub n: usize,
    pub rows: Vec<RowOutcome>,
    /// `(t, G(U; t))` samples when traces were requested and the forward solve succeeded.
    pub trace: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub meshes: Vec<MeshOutcome>,
    pub reference: Option<ReferenceSolution>,
    pub warnings: Vec<String>,
}

impl RunSummary {
    /// Rows ordered by mesh, then by occurrence as listed in the config.
    pub fn rows(&self) -> Vec<RowOutcome> {
        self.meshes.iter().flat_map(|m| m.rows.iter().cloned()).collect()
    }

    pub fn failed(&self) -> usize {
        self.meshes
            .iter()
            .flat_map(|m| &m.rows)
            .filter(|r| r.result.is_err())
            .count()
    }
}

/// Rows of one mesh and its optional functional trace.
type MeshRows = (Vec<RowOutcome>, Option<Vec<(f64, f64)>>);

fn sweep_mesh(config: &ExperimentConfig, n: usize, reference: Option<&FunctionalSeries>) -> Result<MeshRows> {
    let (problem, event) = config.problem()?;
    let space = problem.space(n, config.q_s)?;
    let partition = TimePartition::uniform(0.0, problem.t_final, n)?;
    let u = solve_forward(&problem, &space, &partition, config.q_t)?;
    let trace = if config.emit_functional_trace {
        Some(functional_series(&u, &event)?.sample(TRACE_SAMPLES_PER_SLAB))
    } else {
        None
    };
    let truth = match (config.truth, reference) {
        (TruthSource::Analytic, _) => Truth::Analytic,
        (TruthSource::Reference { .. }, Some(series)) => Truth::Reference(series),
        _ => Truth::None,
    };
    let rows = config
        .occurrences
        .par_iter()
        .map(|&occ| RowOutcome {
            n,
            occurrence: occ,
            result: estimate_event_error_with(
                &problem,
                &event.clone().with_occurrence(occ),
                &u,
                truth,
                config.adjoint_offset,
            ),
        })
        .collect();
    Ok((rows, trace))
}

/// Runs every mesh of the sweep in parallel without touching the disk.
/// A failure on one mesh or occurrence is recorded in its rows only.
pub fn sweep(config: &ExperimentConfig, reference: Option<&FunctionalSeries>) -> Vec<MeshOutcome> {
    config
        .meshes
        .par_iter()
        .map(|&n| match sweep_mesh(config, n, reference) {
            Ok((rows, trace)) => MeshOutcome { n, rows, trace },
            Err(err) => MeshOutcome {
                n,
                rows: config
                    .occurrences
                    .iter()
                    .map(|&occurrence| RowOutcome {
                        n,
                        occurrence,
                        result: Err(err.clone()),
                    })
                    .collect(),
                trace: None,
            },
        })
        .collect()
}

/// Loads or builds the configured reference solution.
pub fn reference(config: &ExperimentConfig, cache_dir: &Path) -> Result<(ReferenceSolution, CacheStatus)> {
    let TruthSource::Reference { n_ref, q_t, q_s } = config.truth else {
        return Err(Error::InvalidArgument(format!(
            "truth is {}, not a reference solution",
            config.truth
        )));
    };
    let (problem, event) = config.problem()?;
    let key = ReferenceKey::new(&problem, n_ref, q_t, q_s);
    ReferenceCache::new(cache_dir).load_or_build(&problem, &event, &key)
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the crossing list of a reference as `occurrence,t`.
pub fn write_reference_crossings(dir: &Path, reference: &ReferenceSolution) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = String::from("occurrence,t\n");
    for (i, t) in reference.crossings.iter().enumerate() {
        text.push_str(&format!("{},{t}\n", i + 1));
    }
    write(dir.join("reference_crossings.csv"), &text)
}

/// Runs the sweep and writes `table.csv`, `table.md`, `errors.csv`,
/// `report_<N>_<occurrence>.txt` and, when requested, `trace_<N>.csv`
/// into the output directory.
pub fn run_with_cache(config: &ExperimentConfig, cache_dir: &Path) -> Result<RunSummary> {
    let mut warnings = Vec::new();
    let reference = match config.truth {
        TruthSource::Reference { .. } => {
            let (reference, status) = reference(config, cache_dir)?;
            if let CacheStatus::Rebuilt(note) = status {
                warnings.push(note);
            }
            Some(reference)
        }
        _ => None,
    };
    let meshes = sweep(config, reference.as_ref().map(|r| &r.series));
    let summary = RunSummary {
        meshes,
        reference,
        warnings,
    };

    let out = &config.output;
    fs::create_dir_all(out)?;
    let rows = summary.rows();
    write(out.join("table.csv"), &table_csv(&rows))?;
    write(out.join("table.md"), &table_md(config, &rows))?;
    write(out.join("errors.csv"), &output::errors_csv(&rows))?;
    for row in &rows {
        write(
            out.join(format!("report_{}_{}.txt", row.n, row.occurrence)),
            &output::report(config, row),
        )?;
    }
    for mesh in &summary.meshes {
        if let Some(trace) = &mesh.trace {
            write(
                out.join(format!("trace_{}.csv", mesh.n)),
                &output::trace_csv(trace),
            )?;
        }
    }
    if let Some(reference) = &summary.reference {
        write_reference_crossings(out, reference)?;
    }
    if !summary.warnings.is_empty() {
        write(out.join("warnings.txt"), &(summary.warnings.join("\n") + "\n"))?;
    }
    Ok(summary)
}

/// [`run_with_cache`] at [`default_cache_dir`].
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    run_with_cache(config, &default_cache_dir(config))
}
