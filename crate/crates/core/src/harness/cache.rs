//! On-disk cache of reference functional series.
//!
//! Layout: a 64-byte ASCII header `EVTREF1 <slabs> <q_t> <crossings> <key>`
//! padded with spaces and closed by `\n`, then little-endian `f64`s: the
//! slab knots, the node values of `G`, and the crossing times.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::event::{find_crossings, functional_series, FunctionalSeries};
use crate::forward::{solve_forward, TimePartition};
use crate::problems::{EventSpec, ProblemSpec};

const MAGIC: &str = "EVTREF1";
const HEADER_LEN: usize = 64;

/// Identifies a reference solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceKey {
    pub problem: String,
    pub n_ref: usize,
    pub q_t: usize,
    pub q_s: usize,
    /// `None` for problems without gravity.
    pub gravity: Option<f64>,
}

impl ReferenceKey {
    pub fn new(problem: &ProblemSpec, n_ref: usize, q_t: usize, q_s: usize) -> Self {
        ReferenceKey {
            problem: problem.name.clone(),
            n_ref,
            q_t,
            q_s,
            gravity: problem.gravity(),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical key string.
    pub fn hash(&self) -> String {
        let g = self
            .gravity
            .map_or_else(|| "none".to_string(), |g| format!("{g:?}"));
        let canonical = format!(
            "{};N_ref={};q_t={};q_s={};g={}",
            self.problem, self.n_ref, self.q_t, self.q_s, g
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}-N{}-q{}{}-{}.ref",
            self.problem,
            self.n_ref,
            self.q_t,
            self.q_s,
            self.hash()
        )
    }
}

/// Reference functional series and its crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub key: ReferenceKey,
    pub series: FunctionalSeries,
    pub crossings: Vec<f64>,
}

/// Where the reference came from.
#[derive(Debug, Clone, PartialEq)]
pub enum CacheStatus {
    Loaded,
    Built,
    /// The cached file was unreadable and was rebuilt; the message says why.
    Rebuilt(String),
}

/// Solves the reference problem and records the crossings of `event.threshold`.
pub fn build_reference(
    problem: &ProblemSpec,
    event: &EventSpec,
    key: &ReferenceKey,
) -> Result<ReferenceSolution> {
    let space = problem.space(key.n_ref, key.q_s)?;
    let partition = TimePartition::uniform(0.0, problem.t_final, key.n_ref)?;
    let u = solve_forward(problem, &space, &partition, key.q_t)?;
    let series = functional_series(&u, event)?;
    let crossings = find_crossings(&series, event.threshold, event.tau)
        .into_iter()
        .map(|c| c.t)
        .collect();
    Ok(ReferenceSolution {
        key: key.clone(),
        series,
        crossings,
    })
}

pub fn encode(reference: &ReferenceSolution) -> Result<Vec<u8>> {
    let series = &reference.series;
    let header = format!(
        "{MAGIC} {} {} {} {}",
        series.partition().n_slabs(),
        series.q_t(),
        reference.crossings.len(),
        reference.key.hash()
    );
    if header.len() >= HEADER_LEN {
        return Err(invalid("reference header does not fit in 64 bytes"));
    }
    let floats = series
        .partition()
        .knots()
        .iter()
        .chain(series.node_values())
        .chain(&reference.crossings);
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (series.node_values().len() * 2 + 8));
    out.extend_from_slice(header.as_bytes());
    out.resize(HEADER_LEN - 1, b' ');
    out.push(b'\n');
    for v in floats {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8], key: &ReferenceKey) -> Result<ReferenceSolution> {
    let corrupt = |why: &str| Error::Io(format!("corrupt reference cache: {why}"));
    if bytes.len() < HEADER_LEN || bytes[HEADER_LEN - 1] != b'\n' {
        return Err(corrupt("short or malformed header"));
    }
    let header = std::str::from_utf8(&bytes[..HEADER_LEN - 1]).map_err(|_| corrupt("header is not text"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, slabs, q_t, n_cross, hash] = fields[..] else {
        return Err(corrupt("wrong header field count"));
    };
    if magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    if hash != key.hash() {
        return Err(corrupt("key hash mismatch"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| corrupt("bad count"));
    let (slabs, q_t, n_cross) = (parse(slabs)?, parse(q_t)?, parse(n_cross)?);
    if slabs == 0 || q_t == 0 {
        return Err(corrupt("empty series"));
    }
    let n_values = slabs * q_t + 1;
    let total = (slabs + 1) + n_values + n_cross;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * total {
        return Err(corrupt("length does not match header counts"));
    }
    let floats: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let knots = floats[..=slabs].to_vec();
    let values = floats[slabs + 1..slabs + 1 + n_values].to_vec();
    let crossings = floats[slabs + 1 + n_values..].to_vec();
    let partition = TimePartition::from_knots(knots).map_err(|_| corrupt("invalid knots"))?;
    let series = FunctionalSeries::new(partition, q_t, values)?;
    Ok(ReferenceSolution {
        key: key.clone(),
        series,
        crossings,
    })
}

/// Held while a reference is being built; dropping releases the lock.
struct CacheLock {
    file: File,
}

impl CacheLock {
    fn acquire(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(path)?;
        file.lock()?;
        Ok(CacheLock { file })
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}

/// Cache directory and the reference files under it.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReferenceCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &ReferenceKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// Loads `key` if a valid file exists, otherwise builds and stores it.
    /// Builders of the same key are serialized by an exclusive file lock.
    pub fn load_or_build(
        &self,
        problem: &ProblemSpec,
        event: &EventSpec,
        key: &ReferenceKey,
    ) -> Result<(ReferenceSolution, CacheStatus)> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let mut lock_name = path.clone().into_os_string();
        lock_name.push(".lock");
        let _lock = CacheLock::acquire(Path::new(&lock_name))?;

        let problem_note = match fs::read(&path) {
            Ok(bytes) => match decode(&bytes, key) {
                Ok(reference) => return Ok((reference, CacheStatus::Loaded)),
                Err(err) => Some(format!("{}: {err}; rebuilding", path.display())),
            },
            Err(err) if err.kind() == std::io::ErrorKind::NotFound => None,
            Err(err) => Some(format!("{}: {err}; rebuilding", path.display())),
        };

        let reference = build_reference(problem, event, key)?;
        let bytes = encode(&reference)?;
        let mut tmp_name = path.clone().into_os_string();
        tmp_name.push(".tmp");
        let tmp = PathBuf::from(tmp_name);
        {
            let mut file = File::create(&tmp)?;
            file.write_all(&bytes)?;
            file.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        let status = match problem_note {
            Some(note) => CacheStatus::Rebuilt(note),
            None => CacheStatus::Built,
        };
        Ok((reference, status))
    }
}
