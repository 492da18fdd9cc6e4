//! Catalog of model problems: forcing, boundary and initial data, bathymetry,
//! event weights and thresholds, and exact solutions where known.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::fem::{interpolate, Bathymetry, DirichletSpec, Interval, SpatialOperator, SpatialSpace};

/// Default gravitational acceleration (m/s^2).
pub const GRAVITY: f64 = 9.8;

/// `x -> vector`.
pub type PointFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;
/// `(x, t) -> vector`.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, &mut [f64]) + Send + Sync>;
/// `(u, x, t) -> vector` (or a row-major square matrix for gradients).
pub type StateFn = Arc<dyn Fn(&[f64], f64, f64, &mut [f64]) + Send + Sync>;

/// Catalog keys, in presentation order.
pub const CATALOG: [(&str, &str); 6] = [
    (
        "heat_linear",
        "linear heat equation with manufactured solution cos(t) sin(pi x)",
    ),
    (
        "heat_nonlinear",
        "heat equation with -u^2 reaction, same manufactured solution",
    ),
    (
        "swe_manufactured",
        "linearized shallow water, constant depth, manufactured solution",
    ),
    (
        "swe_constant",
        "linearized shallow water, constant bathymetry, reflecting walls",
    ),
    ("swe_shelf", "linearized shallow water over a continental shelf"),
    ("swe_reef", "linearized shallow water over a parabolic reef"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    HeatLinear,
    HeatSemilinear,
    SweLinearized,
}

/// Right-hand side `f(u, x, t)`.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// Depends on `(x, t)` only.
    Explicit(SpaceTimeFn),
    /// `f = reaction(u, x, t) + source(x, t)`; `gradient` returns
    /// `[grad_u f]_ij = df_i/du_j` row-major.
    Semilinear {
        reaction: StateFn,
        gradient: StateFn,
        source: SpaceTimeFn,
    },
}

/// A PDE `u_t + L u = f(u, x, t)` on an interval with Dirichlet data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ProblemKind,
    pub domain: Interval,
    pub t_final: f64,
    pub operator: SpatialOperator,
    pub forcing: Forcing,
    pub initial: PointFn,
    pub dirichlet: DirichletSpec,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("operator", &self.operator)
            .field("dirichlet", &self.dirichlet)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn n_components(&self) -> usize {
        self.operator.n_components()
    }

    pub fn is_semilinear(&self) -> bool {
        matches!(self.forcing, Forcing::Semilinear { .. })
    }

    pub fn gravity(&self) -> Option<f64> {
        match self.operator {
            SpatialOperator::ShallowWater { gravity, .. } => Some(gravity),
            SpatialOperator::Diffusion => None,
        }
    }

    /// `f(u, x, t)`.
    pub fn f(&self, u: &[f64], x: f64, t: f64, out: &mut [f64]) {
        match &self.forcing {
            Forcing::Zero => out.iter_mut().for_each(|v| *v = 0.0),
            Forcing::Explicit(g) => g(x, t, out),
            Forcing::Semilinear { reaction, source, .. } => {
                source(x, t, out);
                let mut r = vec![0.0; out.len()];
                reaction(u, x, t, &mut r);
                for (o, v) in out.iter_mut().zip(r) {
                    *o += v;
                }
            }
        }
    }

    /// The state-independent part of `f`.
    pub fn source(&self, x: f64, t: f64, out: &mut [f64]) {
        match &self.forcing {
            Forcing::Zero => out.iter_mut().for_each(|v| *v = 0.0),
            Forcing::Explicit(g) | Forcing::Semilinear { source: g, .. } => g(x, t, out),
        }
    }

    /// The state-dependent part of `f`.
    pub fn reaction(&self, u: &[f64], x: f64, t: f64, out: &mut [f64]) {
        match &self.forcing {
            Forcing::Semilinear { reaction, .. } => reaction(u, x, t, out),
            _ => out.iter_mut().for_each(|v| *v = 0.0),
        }
    }

    /// `grad_u f(u, x, t)`, row-major `n x n`.
    pub fn grad_f(&self, u: &[f64], x: f64, t: f64, out: &mut [f64]) {
        match &self.forcing {
            Forcing::Semilinear { gradient, .. } => gradient(u, x, t, out),
            _ => out.iter_mut().for_each(|v| *v = 0.0),
        }
    }

    pub fn initial_value(&self, x: f64, out: &mut [f64]) {
        (self.initial)(x, out)
    }

    /// Spatial space of the given resolution with this problem's constraints.
    pub fn space(&self, n_elements: usize, degree: usize) -> Result<SpatialSpace> {
        SpatialSpace::new(
            self.domain,
            n_elements,
            degree,
            self.n_components(),
            &self.dirichlet,
        )
    }
}

/// Scalar weight profile with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    /// `sin(k x)`.
    Sine {
        k: f64,
    },
    /// `scale (x - lo)^2 (x - hi)^2` on `(lo, hi)`, zero elsewhere.
    QuarticBump {
        lo: f64,
        hi: f64,
        scale: f64,
    },
}

impl Profile {
    /// Value and first two derivatives.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        match *self {
            Profile::Zero => [0.0; 3],
            Profile::Sine { k } => [(k * x).sin(), k * (k * x).cos(), -k * k * (k * x).sin()],
            Profile::QuarticBump { lo, hi, scale } => {
                if x <= lo || x >= hi {
                    return [0.0; 3];
                }
                let (a, b) = (x - lo, x - hi);
                [
                    scale * a * a * b * b,
                    scale * 2.0 * a * b * (a + b),
                    scale * 2.0 * (a * a + 4.0 * a * b + b * b),
                ]
            }
        }
    }

    /// Interval outside which the profile vanishes, if bounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::QuarticBump { lo, hi, .. } => Some((lo, hi)),
            _ => None,
        }
    }
}

/// The event `G(u; t) = (w, u(t)) = R`, its `n`-th occurrence after `tau`.
#[derive(Clone)]
pub struct EventSpec {
    /// One profile per solution component.
    pub weight: Vec<Profile>,
    /// `L* w`, the data of the second adjoint problem.
    pub psi2: PointFn,
    pub threshold: f64,
    pub occurrence: usize,
    pub tau: f64,
}

impl fmt::Debug for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSpec")
            .field("weight", &self.weight)
            .field("threshold", &self.threshold)
            .field("occurrence", &self.occurrence)
            .field("tau", &self.tau)
            .finish()
    }
}

impl EventSpec {
    pub fn w(&self, x: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.weight) {
            *o = p.eval(x)[0];
        }
    }

    pub fn w_dx(&self, x: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.weight) {
            *o = p.eval(x)[1];
        }
    }

    pub fn psi2(&self, x: f64, out: &mut [f64]) {
        (self.psi2)(x, out)
    }

    pub fn with_occurrence(mut self, n: usize) -> Self {
        self.occurrence = n;
        self
    }

    pub fn with_threshold(mut self, r: f64) -> Self {
        self.threshold = r;
        self
    }

    /// Smallest interval containing the support of every component, clipped to `domain`.
    pub fn support(&self, domain: Interval) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.weight {
            match p {
                Profile::Zero => {}
                _ => {
                    let (a, b) = p.support().unwrap_or((domain.lo, domain.hi));
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
            }
        }
        if lo > hi {
            return domain;
        }
        Interval::new(lo.max(domain.lo), hi.min(domain.hi))
    }

    /// Scales the weight (and `L* w`) by `factor`; used by invariance checks.
    pub fn scaled(&self, factor: f64) -> Self {
        let weight = self
            .weight
            .iter()
            .map(|p| match *p {
                Profile::Zero => Profile::Zero,
                Profile::Sine { .. } => panic!("sine weights cannot be rescaled in place"),
                Profile::QuarticBump { lo, hi, scale } => Profile::QuarticBump {
                    lo,
                    hi,
                    scale: scale * factor,
                },
            })
            .collect();
        let psi2 = self.psi2.clone();
        Self {
            weight,
            psi2: Arc::new(move |x, out| {
                psi2(x, out);
                out.iter_mut().for_each(|v| *v *= factor);
            }),
            threshold: self.threshold * factor,
            occurrence: self.occurrence,
            tau: self.tau,
        }
    }
}

/// Which adjoint problem: data `w`, `L* w`, or `(grad_u f)^T w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdjointData {
    Weight = 1,
    OperatorWeight = 2,
    Reaction = 3,
}

impl AdjointData {
    pub const ALL: [AdjointData; 3] = [
        AdjointData::Weight,
        AdjointData::OperatorWeight,
        AdjointData::Reaction,
    ];

    pub fn from_index(which: usize) -> Result<Self> {
        match which {
            1 => Ok(AdjointData::Weight),
            2 => Ok(AdjointData::OperatorWeight),
            3 => Ok(AdjointData::Reaction),
            _ => Err(invalid(format!("adjoint index must be 1, 2 or 3, got {which}"))),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Forward state at the event time, needed for the reaction adjoint data.
#[derive(Debug, Clone, Copy)]
pub struct StateAt<'a> {
    pub space: &'a SpatialSpace,
    pub coeffs: &'a [f64],
    pub t: f64,
}

/// Nodal data `psi` of an adjoint problem on `space`.
pub fn adjoint_initial_data(
    problem: &ProblemSpec,
    event: &EventSpec,
    which: AdjointData,
    space: &SpatialSpace,
    state: Option<StateAt<'_>>,
) -> Result<Vec<f64>> {
    let mut data = match which {
        AdjointData::Weight => interpolate(space, &|x, o| event.w(x, o)),
        AdjointData::OperatorWeight => interpolate(space, &|x, o| event.psi2(x, o)),
        AdjointData::Reaction => {
            let state = state
                .ok_or_else(|| invalid("reaction adjoint data needs the forward state at the event time"))?;
            if !problem.is_semilinear() {
                return Ok(vec![0.0; space.n_dofs()]);
            }
            let nc = problem.n_components();
            interpolate(space, &|x, out: &mut [f64]| {
                let mut u = vec![0.0; nc];
                let mut w = vec![0.0; nc];
                let mut grad = vec![0.0; nc * nc];
                state.space.eval(state.coeffs, x, &mut u);
                event.w(x, &mut w);
                problem.grad_f(&u, x, state.t, &mut grad);
                for (j, o) in out.iter_mut().enumerate() {
                    *o = (0..nc).map(|i| grad[i * nc + j] * w[i]).sum();
                }
            })
        }
    };
    space.zero_constrained(&mut data);
    Ok(data)
}

/// Builds a catalog problem with the default gravity.
pub fn make_problem(name: &str) -> Result<(ProblemSpec, EventSpec)> {
    make_problem_with_gravity(name, GRAVITY)
}

pub fn make_problem_with_gravity(name: &str, gravity: f64) -> Result<(ProblemSpec, EventSpec)> {
    match name {
        "heat_linear" => Ok(heat(false)),
        "heat_nonlinear" => Ok(heat(true)),
        "swe_manufactured" => Ok(swe_manufactured(gravity)),
        "swe_constant" => Ok(swe_constant(gravity)),
        "swe_shelf" => Ok(swe_ocean(
            "swe_shelf",
            gravity,
            Bathymetry::PiecewiseLinear(vec![(25000.0, -200.0), (50000.0, -4000.0)]),
        )),
        "swe_reef" => Ok(swe_ocean(
            "swe_reef",
            gravity,
            Bathymetry::Mound {
                lo: 200000.0,
                hi: 250000.0,
                base: -4000.0,
                crest: -50.0,
            },
        )),
        _ => Err(invalid(format!("unknown problem '{name}'"))),
    }
}

fn heat(semilinear: bool) -> (ProblemSpec, EventSpec) {
    let forcing = if semilinear {
        Forcing::Semilinear {
            reaction: Arc::new(|u, _x, _t, out| out[0] = -u[0] * u[0]),
            gradient: Arc::new(|u, _x, _t, out| out[0] = -2.0 * u[0]),
            source: Arc::new(|x, t, out| {
                let s = (PI * x).sin();
                out[0] = s * (-t.sin() + PI * PI * t.cos() + t.cos().powi(2) * s);
            }),
        }
    } else {
        Forcing::Explicit(Arc::new(|x, t, out| {
            out[0] = (PI * x).sin() * (PI * PI * t.cos() - t.sin());
        }))
    };
    let problem = ProblemSpec {
        name: if semilinear {
            "heat_nonlinear"
        } else {
            "heat_linear"
        }
        .to_string(),
        kind: if semilinear {
            ProblemKind::HeatSemilinear
        } else {
            ProblemKind::HeatLinear
        },
        domain: Interval::new(0.0, 1.0),
        t_final: 0.5,
        operator: SpatialOperator::Diffusion,
        forcing,
        initial: Arc::new(|x, out| out[0] = (PI * x).sin()),
        dirichlet: DirichletSpec(vec![Some(0.0)]),
        exact: Some(Arc::new(|x, t, out| out[0] = t.cos() * (PI * x).sin())),
    };
    let event = EventSpec {
        weight: vec![Profile::Sine { k: PI }],
        psi2: Arc::new(|x, out| out[0] = PI * PI * (PI * x).sin()),
        threshold: 0.47,
        occurrence: 1,
        tau: 0.0,
    };
    (problem, event)
}

/// `-(A^T w)_x = (-g (h w2)_x, -w1_x)` for the shallow water operator.
fn swe_psi2(operator: SpatialOperator, weight: Vec<Profile>) -> PointFn {
    Arc::new(move |x, out| {
        let g = match operator {
            SpatialOperator::ShallowWater { gravity, .. } => gravity,
            SpatialOperator::Diffusion => 0.0,
        };
        let w1 = weight[0].eval(x);
        let w2 = weight[1].eval(x);
        let h = operator.depth(x);
        let dh = operator.depth_derivative(x);
        out[0] = -g * (dh * w2[0] + h * w2[1]);
        out[1] = -w1[1];
    })
}

fn swe_manufactured(gravity: f64) -> (ProblemSpec, EventSpec) {
    let operator = SpatialOperator::ShallowWater {
        gravity,
        rest_height: 2.0,
        bathymetry: Bathymetry::Constant(-10.0),
    };
    let depth = operator.depth(0.0);
    let problem = ProblemSpec {
        name: "swe_manufactured".to_string(),
        kind: ProblemKind::SweLinearized,
        domain: Interval::new(0.0, 10.0),
        t_final: 1.0,
        operator: operator.clone(),
        forcing: Forcing::Explicit(Arc::new(move |x, t, out| {
            let (s, c) = ((PI * x).sin(), (PI * x).cos());
            out[0] = -t.sin() * s + PI * t.cos() * c;
            out[1] = -t.sin() * s + PI * gravity * depth * t.cos() * c;
        })),
        initial: Arc::new(|x, out| {
            let s = (PI * x).sin();
            out[0] = 2.0 + s;
            out[1] = s;
        }),
        dirichlet: DirichletSpec(vec![Some(2.0), Some(0.0)]),
        exact: Some(Arc::new(|x, t, out| {
            let v = t.cos() * (PI * x).sin();
            out[0] = 2.0 + v;
            out[1] = v;
        })),
    };
    let weight = vec![
        Profile::Zero,
        Profile::QuarticBump {
            lo: 5.0,
            hi: 6.0,
            scale: 10.0,
        },
    ];
    let event = EventSpec {
        psi2: swe_psi2(operator, weight.clone()),
        weight,
        threshold: -0.19,
        occurrence: 1,
        tau: 0.0,
    };
    (problem, event)
}

fn swe_constant(gravity: f64) -> (ProblemSpec, EventSpec) {
    let operator = SpatialOperator::ShallowWater {
        gravity,
        rest_height: 1.0,
        bathymetry: Bathymetry::Constant(-0.1),
    };
    let bump = Profile::QuarticBump {
        lo: 100.0,
        hi: 150.0,
        scale: 0.4 / 390625.0,
    };
    let problem = ProblemSpec {
        name: "swe_constant".to_string(),
        kind: ProblemKind::SweLinearized,
        domain: Interval::new(0.0, 400.0),
        t_final: 200.0,
        operator: operator.clone(),
        forcing: Forcing::Zero,
        initial: Arc::new(move |x, out| {
            out[0] = bump.eval(x)[0];
            out[1] = 0.0;
        }),
        dirichlet: DirichletSpec(vec![None, Some(0.0)]),
        exact: None,
    };
    let weight = vec![
        Profile::QuarticBump {
            lo: 160.0,
            hi: 200.0,
            scale: 1.0 / 200000.0,
        },
        Profile::Zero,
    ];
    let event = EventSpec {
        psi2: swe_psi2(operator, weight.clone()),
        weight,
        threshold: 2.0,
        occurrence: 1,
        tau: 0.0,
    };
    (problem, event)
}

fn swe_ocean(name: &str, gravity: f64, bathymetry: Bathymetry) -> (ProblemSpec, EventSpec) {
    let operator = SpatialOperator::ShallowWater {
        gravity,
        rest_height: 1.0,
        bathymetry,
    };
    let bump = Profile::QuarticBump {
        lo: 100000.0,
        hi: 150000.0,
        scale: 0.4 / 25000f64.powi(4),
    };
    let problem = ProblemSpec {
        name: name.to_string(),
        kind: ProblemKind::SweLinearized,
        domain: Interval::new(0.0, 400000.0),
        t_final: 4200.0,
        operator: operator.clone(),
        forcing: Forcing::Zero,
        initial: Arc::new(move |x, out| {
            out[0] = bump.eval(x)[0];
            out[1] = 0.0;
        }),
        dirichlet: DirichletSpec(vec![None, Some(0.0)]),
        exact: None,
    };
    let weight = vec![
        Profile::QuarticBump {
            lo: 10000.0,
            hi: 25000.0,
            scale: 1.0 / 7500f64.powi(4),
        },
        Profile::Zero,
    ];
    let event = EventSpec {
        psi2: swe_psi2(operator, weight.clone()),
        weight,
        threshold: 1000.0,
        occurrence: 1,
        tau: 0.0,
    };
    (problem, event)
}
