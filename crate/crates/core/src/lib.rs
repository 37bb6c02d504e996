//! Numerical toolkit for asymptotically locally hyperbolic (ALH) geometry.
//!
//! The crate covers hyperbolic gluing isometries, Birmingham-Kottler and
//! Horowitz-Myers metrics with their curvature and static potentials, four
//! hyperbolic mass evaluators, a composite-grid Yamabe solver on punctured
//! flat tori, glued-mass estimates, and the conformal rescaling of boundary
//! data in Fefferman-Graham gauge.

pub mod conformal;
pub mod error;
pub mod gluemass;
pub mod hypgeo;
pub mod jet;
pub mod kids;
pub mod mass;
pub mod metrics;
pub mod quad;
pub mod yamabe;

pub use error::{AlhError, Result};
pub use jet::{Jet, Scalar};
pub use metrics::{BKParams, Boundary, ChartMetric, Family, HMParams};
