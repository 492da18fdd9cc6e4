//! One-dimensional finite element machinery.

pub mod assembly;
pub mod banded;
pub mod lagrange;
pub mod operator;
pub mod quadrature;
pub mod space;

pub use assembly::{assemble, interpolate, weighted_vector, ElementQuadrature, OperatorMatrices};
pub use banded::{BandedLu, BandedMatrix};
pub use lagrange::LagrangeBasis;
pub use operator::{Bathymetry, SpatialOperator};
pub use quadrature::{gauss_lobatto_nodes, gauss_rule, QuadratureRule};
pub use space::{DirichletSpec, Interval, SpatialSpace};
