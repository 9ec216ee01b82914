//! Sprays on iterated tangent bundles.
//!
//! Points of `T^rM` are [`JetPoint`]s; maps between bundles are computed by
//! evaluating chart expressions on truncated Taylor [`Jet`]s. On top of that
//! sit sprays and their complete lifts, geodesic integration, Jacobi fields as
//! geodesics of `S^c`, and the sub-spray `P` on `TTM` whose geodesics are
//! parallel Jacobi fields.

// `!(x > 0.0)` style tests are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geodesic;
pub mod jacobi;
pub mod jet;
pub mod jetspace;
pub mod report;
pub mod spray;
pub mod subspray;

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use geodesic::{flow, integrate, ExitReason, Trajectory, RESIDUAL_TOL};
pub use jacobi::{conjugate_search, decompose_scc, jacobi_from_initial, JacobiField};
pub use jet::{Jet, Scalar};
pub use jetspace::{
    clift_fn, dproject, is_slashed, kappa, liouville, project, pushforward, vlift_fn,
    ChartTransition, JetPoint, ScalarField,
};
pub use report::CheckResult;
pub use spray::{
    complete_lift, homogeneity_check, make_finsler_example, make_flat, make_riemannian,
    make_sphere, project_spray, spray_value, Spray,
};
pub use subspray::{
    config_point, delta_membership, p_geodesic, DeltaPoint, Membership, PGeodesic, ParallelJacobi,
};
