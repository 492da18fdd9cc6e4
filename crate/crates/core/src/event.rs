//! The functional `G(U; t) = (w, U(t))` and its threshold crossings.

use crate::error::{invalid, Error, Result};
use crate::fem::{weighted_vector, LagrangeBasis};
use crate::forward::{time_nodes, SpaceTimeSolution, TimePartition};
use crate::problems::EventSpec;

/// `G` as a continuous piecewise polynomial of degree `q_t` in time, stored
/// by its values at the Gauss-Lobatto nodes of every slab.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    partition: TimePartition,
    q_t: usize,
    basis: LagrangeBasis,
    // n_slabs * q_t + 1 values, shared at knots
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// A transversal crossing of `G = R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub slab: usize,
    pub direction: Direction,
}

impl PartialEq for FunctionalSeries {
    fn eq(&self, other: &Self) -> bool {
        self.q_t == other.q_t && self.partition == other.partition && self.values == other.values
    }
}

impl FunctionalSeries {
    pub fn new(partition: TimePartition, q_t: usize, values: Vec<f64>) -> Result<Self> {
        if q_t == 0 || values.len() != partition.n_slabs() * q_t + 1 {
            return Err(invalid("functional series has the wrong number of node values"));
        }
        Ok(Self {
            basis: LagrangeBasis::new(time_nodes(q_t)),
            partition,
            q_t,
            values,
        })
    }

    /// Interpolates `g` at the time nodes of `partition`.
    pub fn from_fn(partition: TimePartition, q_t: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = time_nodes(q_t);
        let mut values = Vec::with_capacity(partition.n_slabs() * q_t + 1);
        for k in 0..partition.n_slabs() {
            for &s in &nodes[..q_t] {
                values.push(g(partition.knot(k) + partition.width(k) * s));
            }
        }
        values.push(g(partition.t_final()));
        Self::new(partition, q_t, values)
    }

    pub fn partition(&self) -> &TimePartition {
        &self.partition
    }

    pub fn q_t(&self) -> usize {
        self.q_t
    }

    /// Node values, `n_slabs * q_t + 1` of them.
    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    fn slab_values(&self, k: usize) -> &[f64] {
        &self.values[k * self.q_t..=(k + 1) * self.q_t]
    }

    /// `G` at local coordinate `s` of slab `k`.
    pub fn eval_in_slab(&self, k: usize, s: f64) -> f64 {
        let l = self.basis.value_vec(s);
        l.iter().zip(self.slab_values(k)).map(|(a, b)| a * b).sum()
    }

    /// `dG/dt` at local coordinate `s` of slab `k`.
    pub fn derivative_in_slab(&self, k: usize, s: f64) -> f64 {
        let dl = self.basis.derivative_vec(s);
        let d: f64 = dl.iter().zip(self.slab_values(k)).map(|(a, b)| a * b).sum();
        d / self.partition.width(k)
    }

    fn local(&self, t: f64) -> (usize, f64) {
        let k = self.partition.slab_of(t);
        let s = ((t - self.partition.knot(k)) / self.partition.width(k)).clamp(0.0, 1.0);
        (k, s)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (k, s) = self.local(t);
        self.eval_in_slab(k, s)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (k, s) = self.local(t);
        self.derivative_in_slab(k, s)
    }

    /// `(t, G)` at `per_slab` equispaced points in each slab plus the final time.
    pub fn sample(&self, per_slab: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.partition.n_slabs() * per_slab + 1);
        for k in 0..self.partition.n_slabs() {
            for i in 0..per_slab {
                let s = i as f64 / per_slab as f64;
                out.push((
                    self.partition.knot(k) + s * self.partition.width(k),
                    self.eval_in_slab(k, s),
                ));
            }
        }
        let n = self.partition.n_slabs();
        out.push((self.partition.t_final(), self.eval_in_slab(n - 1, 1.0)));
        out
    }
}

/// `G(U; t)` at every time node of `u`.
pub fn functional_series(u: &SpaceTimeSolution, event: &EventSpec) -> Result<FunctionalSeries> {
    let wv = weighted_vector(u.space(), &|x, o| event.w(x, o));
    let values = (0..u.n_rows())
        .map(|r| wv.iter().zip(u.row(r)).map(|(a, b)| a * b).sum())
        .collect();
    FunctionalSeries::new(u.partition().clone(), u.q_t(), values)
}

/// Every transversal root of `G - R` in `(tau, T]`, in increasing order.
pub fn find_crossings(series: &FunctionalSeries, threshold: f64, tau: f64) -> Vec<Crossing> {
    let part = series.partition();
    let span = part.t_final() - part.t0();
    let n_samples = 4 * series.q_t() + 1;

    // (slab, s, g) samples over (tau, T], knots shared between slabs
    let mut samples: Vec<(usize, f64, f64)> = Vec::new();
    for k in 0..part.n_slabs() {
        let (a, p) = (part.knot(k), part.width(k));
        if a + p <= tau {
            continue;
        }
        let s_lo = ((tau - a) / p).max(0.0);
        for i in 0..n_samples {
            if !samples.is_empty() && i == 0 {
                continue;
            }
            let c = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n_samples - 1) as f64).cos());
            let s = s_lo + (1.0 - s_lo) * c;
            samples.push((k, s, series.eval_in_slab(k, s) - threshold));
        }
    }

    let mut crossings: Vec<Crossing> = Vec::new();
    let mut last_nonzero: Option<usize> = None;
    for i in 0..samples.len() {
        let g = samples[i].2;
        if g == 0.0 {
            continue;
        }
        if let Some(j) = last_nonzero {
            let gj = samples[j].2;
            if gj.signum() != g.signum() {
                let direction = if g > 0.0 { Direction::Up } else { Direction::Down };
                let crossing = if i - j > 1 {
                    // exact zero at an intermediate sample
                    let (k, s, _) = samples[j + 1];
                    Crossing {
                        t: part.knot(k) + s * part.width(k),
                        slab: k,
                        direction,
                    }
                } else {
                    let (k, sa, _) = samples[j];
                    let (k2, sb, _) = samples[i];
                    // a bracket that straddles a knot starts at s = 1 of the left slab
                    let (k, sa) = if k2 != k { (k2, 0.0) } else { (k, sa) };
                    let s = refine(series, threshold, k, sa, sb, 1e-13 * span / part.width(k));
                    Crossing {
                        t: part.knot(k) + s * part.width(k),
                        slab: k,
                        direction,
                    }
                };
                let merge = crossings.last().is_some_and(|c| crossing.t - c.t < 1e-10 * span);
                if !merge {
                    crossings.push(crossing);
                }
            }
        }
        last_nonzero = Some(i);
    }
    crossings
}

/// Safeguarded Newton on `[a, b]` (local slab coordinates) with a sign change.
fn refine(series: &FunctionalSeries, r: f64, k: usize, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let p = series.partition().width(k);
    let mut fa = series.eval_in_slab(k, a) - r;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = series.eval_in_slab(k, x) - r;
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if b - a < tol {
            break;
        }
        let d = series.derivative_in_slab(k, x) * p;
        let newton = x - fx / d;
        x = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        // Newton converged to within tolerance: confirm with a bracket around x
        if (x - a).min(b - x) < 0.5 * tol {
            let lo = (x - tol).max(a);
            let hi = (x + tol).min(b);
            let flo = series.eval_in_slab(k, lo) - r;
            let fhi = series.eval_in_slab(k, hi) - r;
            if flo.signum() != fhi.signum() {
                return 0.5 * (lo + hi);
            }
        }
    }
    0.5 * (a + b)
}

/// The `n`-th crossing after `tau`.
pub fn nth_event(series: &FunctionalSeries, threshold: f64, n: usize, tau: f64) -> Result<Crossing> {
    if n == 0 {
        return Err(invalid("event occurrence counts from 1"));
    }
    let all = find_crossings(series, threshold, tau);
    all.get(n - 1).copied().ok_or(Error::EventNotFound {
        requested: n,
        found: all.len(),
    })
}

/// The crossing described by `event` on the solution `u`.
pub fn locate_event(u: &SpaceTimeSolution, event: &EventSpec) -> Result<Crossing> {
    let series = functional_series(u, event)?;
    nth_event(&series, event.threshold, event.occurrence, event.tau)
}
