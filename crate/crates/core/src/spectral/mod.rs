//! Hessian operator 𝒜 on a Fourier collocation grid, negative counts, and
//! Evans-function evaluation by monodromy integration.

mod evans;
mod hill;

pub use evans::{
    evans_eval, monodromy, real_coperiodic_scan, sideband_scan, EvansSample, MonodromyResult,
    RealRoot, SidebandCount, DEFAULT_CONTOUR_OFFSET,
};
pub use hill::{
    generator_min_singular_value, hill_assemble, hill_assemble_orbit, inertia, kernel_residual,
    sturm_liouville_check, HillOperator, SturmLiouville, MIN_HILL_MODES,
};
