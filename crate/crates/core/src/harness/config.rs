//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::adjoint::DEFAULT_DEGREE_OFFSET;
use crate::error::{Error, Result};
use crate::problems::{make_problem_with_gravity, EventSpec, ProblemSpec, CATALOG, GRAVITY};

/// Source of the true event times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthSource {
    None,
    Analytic,
    /// Forward solve on `n_ref` elements and slabs with cG(`q_t`, `q_s`).
    Reference {
        n_ref: usize,
        q_t: usize,
        q_s: usize,
    },
}

impl fmt::Display for TruthSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruthSource::None => write!(f, "none"),
            TruthSource::Analytic => write!(f, "analytic"),
            TruthSource::Reference { n_ref, q_t, q_s } if q_t == q_s => {
                write!(f, "reference({n_ref}, {q_t})")
            }
            TruthSource::Reference { n_ref, q_t, q_s } => write!(f, "reference({n_ref}, {q_t}, {q_s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    /// Number of elements, equal to the number of time slabs.
    pub meshes: Vec<usize>,
    pub q_t: usize,
    pub q_s: usize,
    pub adjoint_offset: usize,
    pub occurrences: Vec<usize>,
    pub truth: TruthSource,
    pub output: PathBuf,
    pub emit_functional_trace: bool,
    pub gravity: f64,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    /// The catalog problem and its event (first occurrence) at the configured gravity.
    pub fn problem(&self) -> Result<(ProblemSpec, EventSpec)> {
        make_problem_with_gravity(&self.problem, self.gravity)
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| {
        config_error(
            line,
            format!("`{key}` expects a non-negative integer, got `{value}`"),
        )
    })
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|item| parse_usize(line, key, item))
        .collect()
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_error(
            line,
            format!("`{key}` expects true or false, got `{value}`"),
        )),
    }
}

fn parse_truth(line: usize, value: &str) -> Result<TruthSource> {
    match value {
        "none" => return Ok(TruthSource::None),
        "analytic" => return Ok(TruthSource::Analytic),
        _ => {}
    }
    let args = value
        .strip_prefix("reference")
        .map(str::trim)
        .and_then(|v| v.strip_prefix('('))
        .and_then(|v| v.strip_suffix(')'))
        .ok_or_else(|| {
            config_error(
                line,
                format!("`truth` expects analytic, none or reference(N_ref, q), got `{value}`"),
            )
        })?;
    let nums = parse_list(line, "truth", args)?;
    match nums[..] {
        [n_ref, q] => Ok(TruthSource::Reference {
            n_ref,
            q_t: q,
            q_s: q,
        }),
        [n_ref, q_t, q_s] => Ok(TruthSource::Reference { n_ref, q_t, q_s }),
        _ => Err(config_error(
            line,
            "reference takes (N_ref, q) or (N_ref, q_t, q_s)",
        )),
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut problem = None;
        let mut meshes = None;
        let mut q_t = None;
        let mut q_s = None;
        let mut adjoint_offset = None;
        let mut occurrences = None;
        let mut truth = None;
        let mut output = None;
        let mut trace = None;
        let mut gravity = None;

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(config_error(line, format!("`{key}` has no value")));
            }
            macro_rules! set {
                ($slot:ident, $parsed:expr) => {{
                    if $slot.is_some() {
                        return Err(config_error(line, format!("duplicate key `{key}`")));
                    }
                    $slot = Some(($parsed, line));
                }};
            }
            match key {
                "problem" => {
                    if !CATALOG.iter().any(|(name, _)| *name == value) {
                        return Err(config_error(line, format!("unknown problem `{value}`")));
                    }
                    set!(problem, value.to_string())
                }
                "meshes" => set!(meshes, parse_list(line, key, value)?),
                "q_t" => set!(q_t, parse_usize(line, key, value)?),
                "q_s" => set!(q_s, parse_usize(line, key, value)?),
                "adjoint_offset" => set!(adjoint_offset, parse_usize(line, key, value)?),
                "occurrence" => set!(occurrences, parse_list(line, key, value)?),
                "truth" => set!(truth, parse_truth(line, value)?),
                "output" => set!(output, PathBuf::from(value)),
                "emit_functional_trace" => set!(trace, parse_bool(line, key, value)?),
                "gravity" => {
                    let g: f64 = value.parse().map_err(|_| {
                        config_error(line, format!("`gravity` expects a number, got `{value}`"))
                    })?;
                    if !(g.is_finite() && g > 0.0) {
                        return Err(config_error(line, "gravity must be positive"));
                    }
                    set!(gravity, g)
                }
                _ => return Err(config_error(line, format!("unknown key `{key}`"))),
            }
        }

        let missing = |key: &str| Error::InvalidArgument(format!("config: missing required key `{key}`"));
        let (problem, _) = problem.ok_or_else(|| missing("problem"))?;
        let (meshes, meshes_line) = meshes.ok_or_else(|| missing("meshes"))?;
        let (q_t, q_t_line) = q_t.ok_or_else(|| missing("q_t"))?;
        let (q_s, q_s_line) = q_s.ok_or_else(|| missing("q_s"))?;

        if meshes.is_empty() || meshes.contains(&0) {
            return Err(config_error(
                meshes_line,
                "meshes must be nonempty positive integers",
            ));
        }
        if meshes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(config_error(meshes_line, "meshes must be strictly ascending"));
        }
        if q_t == 0 {
            return Err(config_error(q_t_line, "q_t must be at least 1"));
        }
        if q_s == 0 {
            return Err(config_error(q_s_line, "q_s must be at least 1"));
        }
        let occurrences = match occurrences {
            Some((list, line)) => {
                if list.contains(&0) {
                    return Err(config_error(line, "occurrences count from 1"));
                }
                let mut sorted = list.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != list.len() {
                    return Err(config_error(line, "duplicate occurrence"));
                }
                list
            }
            None => vec![1],
        };
        let gravity = gravity.map_or(GRAVITY, |(g, _)| g);
        let truth = match truth {
            Some((t, line)) => {
                let max_n = *meshes.last().unwrap();
                match t {
                    TruthSource::Reference { n_ref, q_t, q_s } => {
                        if q_t == 0 || q_s == 0 {
                            return Err(config_error(line, "reference degrees must be at least 1"));
                        }
                        if n_ref < 2 * max_n {
                            return Err(config_error(
                                line,
                                format!("N_ref = {n_ref} must be at least twice the finest mesh {max_n}"),
                            ));
                        }
                    }
                    TruthSource::Analytic => {
                        let (spec, _) = make_problem_with_gravity(&problem, gravity)?;
                        if spec.exact.is_none() {
                            return Err(config_error(line, format!("{problem} has no analytic solution")));
                        }
                    }
                    TruthSource::None => {}
                }
                t
            }
            None => TruthSource::None,
        };

        Ok(ExperimentConfig {
            problem,
            meshes,
            q_t,
            q_s,
            adjoint_offset: adjoint_offset.map_or(DEFAULT_DEGREE_OFFSET, |(d, _)| d),
            occurrences,
            truth,
            output: output.map_or_else(|| PathBuf::from("out"), |(p, _)| p),
            emit_functional_trace: trace.is_some_and(|(b, _)| b),
            gravity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "problem = heat_linear\nmeshes = 50, 100\nq_t = 1\nq_s = 1\n";

    fn line_of(text: &str) -> usize {
        match text.parse::<ExperimentConfig>() {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn full_config() {
        let text = "# sweep\nproblem = swe_constant\nmeshes = 25,50 , 100\nq_t = 2\nq_s = 2\n\
                    adjoint_offset = 3\noccurrence = 1, 2, 3\ntruth = reference(800, 3)\n\
                    output = out/swe   # trailing comment\nemit_functional_trace = true\ngravity = 9.81\n";
        let c: ExperimentConfig = text.parse().unwrap();
        assert_eq!(c.meshes, vec![25, 50, 100]);
        assert_eq!(c.occurrences, vec![1, 2, 3]);
        assert_eq!(
            c.truth,
            TruthSource::Reference {
                n_ref: 800,
                q_t: 3,
                q_s: 3
            }
        );
        assert_eq!(c.output, PathBuf::from("out/swe"));
        assert_eq!(c.adjoint_offset, 3);
        assert!(c.emit_functional_trace);
        assert_eq!(c.gravity, 9.81);
    }

    #[test]
    fn defaults() {
        let c: ExperimentConfig = BASE.parse().unwrap();
        assert_eq!(c.adjoint_offset, 2);
        assert_eq!(c.occurrences, vec![1]);
        assert_eq!(c.truth, TruthSource::None);
        assert_eq!(c.gravity, GRAVITY);
        assert!(!c.emit_functional_trace);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("problem = heat_linear\nmeshes =\n"), 2);
        assert_eq!(line_of("problem = heat_linear\n\nmeshes = 10, x\n"), 3);
        assert_eq!(line_of(&format!("{BASE}colour = red\n")), 5);
        assert_eq!(line_of(&format!("{BASE}q_t = 2\n")), 5);
        assert_eq!(line_of("problem = heat_cubic\n"), 1);
        assert_eq!(
            line_of("problem = heat_linear\nmeshes = 100, 50\nq_t = 1\nq_s = 1\n"),
            2
        );
        assert_eq!(line_of(&format!("{BASE}truth = reference(150, 3)\n")), 5);
        assert_eq!(
            line_of("problem = swe_shelf\nmeshes = 80\nq_t = 2\nq_s = 2\ntruth = analytic\n"),
            5
        );
        assert_eq!(line_of(&format!("{BASE}truth = oracle\n")), 5);
        assert_eq!(
            line_of("problem = heat_linear\nmeshes = 10\nq_t = 0\nq_s = 1\n"),
            3
        );
        assert_eq!(line_of(&format!("{BASE}occurrence = 1, 1\n")), 5);
        assert_eq!(line_of("just words\n"), 1);
    }

    #[test]
    fn empty_meshes_rejected() {
        assert_eq!(
            line_of("problem = heat_linear\nmeshes = ,\nq_t = 1\nq_s = 1\n"),
            2
        );
        assert!(matches!(
            "problem = heat_linear\nq_t = 1\nq_s = 1\n".parse::<ExperimentConfig>(),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn truth_display_round_trips() {
        for t in [
            TruthSource::None,
            TruthSource::Analytic,
            TruthSource::Reference {
                n_ref: 800,
                q_t: 3,
                q_s: 3,
            },
            TruthSource::Reference {
                n_ref: 640,
                q_t: 3,
                q_s: 1,
            },
        ] {
            assert_eq!(parse_truth(1, &t.to_string()).unwrap(), t);
        }
    }
}
