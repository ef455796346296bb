//! Numerical laboratory for the periodic (Delaunay-type) solutions of the
//! fourth-order constant Q-curvature ODE on the cylinder: construction by
//! shooting, Floquet monodromy and indicial roots, quasi-periodic spectral
//! bands, conserved quantities, and the translated solution families.

pub mod bands;
pub mod cylinder;
pub mod delaunay;
pub mod error;
pub mod families;
pub mod floquet;
pub mod fourier_laplace;
pub mod numerics;
pub mod ode;
pub mod params;

pub use error::{Error, Result};
pub use ode::CylState;
pub use params::{make_params, DimensionParams};
