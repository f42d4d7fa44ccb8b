//! Numerical laboratory for conformal metrics `e^{2u}|dx|²` on `R^n` with finite total
//! Q-curvature: radial curvature operators, the normal log-potential and its Picard
//! solver, and the asymptotic functionals (`α₀`, volume entropy, conformal mass,
//! isoperimetric ratio of an end) with a verification harness.

pub mod calculus;
pub mod catalog;
pub mod constants;
pub mod endmodel;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod interp;
pub mod kernels;
pub mod limits;
pub mod potential;
pub mod profiles;
pub mod quadrature;

pub use calculus::{polyharmonic, q_curvature, radial_laplacian, scalar_curvature, OperatorStack};
pub use error::{Error, Result};
pub use kernels::{angular_log_avg, angular_pow_avg, offcenter_radial_avg, KernelKind, KernelTable};
pub use limits::{LimitEstimate, LimitScale, Schedule};
pub use potential::{picard_solve, potential_from_density, PicardState, PotentialConfig, QFunction};
pub use profiles::{density_from_profile, eval_profile, CurvatureDensity, RadialProfile};
