//! A posteriori error estimates for the time at which a linear functional of
//! a PDE solution reaches a threshold.
//!
//! The crate solves 1D semilinear parabolic and linear hyperbolic problems with
//! a space-time continuous Galerkin method, locates the crossings of
//! `G(U;t) = (w, U(t))` with a threshold `R`, and estimates the error in the
//! crossing time from three backward adjoint solves:
//!
//! ```text
//!   t_true - t_c  ~  E1 / (D_direct - E3 + E2)
//! ```
//!
//! where `E1 ~ (w, e(t_c))`, `E2 ~ (L2 w, L1 e(t_c))`, `E3 ~ (grad_u f^T w, e(t_c))`
//! and `D_direct = (L2 w, L1 U(t_c)) - (w, f(U, t_c))`.
//!
//! Module map:
//! - [`fem`]: quadrature, Lagrange bases, 1D spaces, assembly and banded solves.
//! - [`problems`]: the catalog of heat and linearized shallow water problems.
//! - [`forward`]: the cG(q_t, q_s) slab time stepper.
//! - [`event`]: functional series and threshold crossings.
//! - [`adjoint`]: backward adjoint solves and the error representation.
//! - [`estimator`]: the event-time estimate and effectivity ratios.
//! - [`harness`]: mesh sweeps, reference caching and table output.

pub mod adjoint;
pub mod error;
pub mod estimator;
pub mod event;
pub mod fem;
pub mod forward;
#[cfg(feature = "harness")]
pub mod harness;
pub mod problems;

pub use error::{Error, Result};
