//! Coordinates on iterated tangent bundles `T^rM` and the canonical maps
//! between them.

mod chart;
mod lift;
mod point;

pub use chart::{pullback, pushforward, ChartMap, ChartTransition, IdentityChart, QuadraticShear};
pub use lift::{clift_fn, eval_field, vlift_fn, CompleteLift, FnField, ScalarField, VerticalLift};
pub use point::{
    dfiber_combine, dfiber_scale, dproject, fiber_combine, fiber_scale, is_slashed, kappa,
    liouville, project, swap_bits, tangent_kappa, tangent_map, JetPoint, EPS_SLASH,
};
pub(crate) use point::{dproject_coords, euclid, max_abs_diff};
