//! Depth extrapolation with the wide-angle one-way equation
//! `u_t + c u_z - Σ_s ∂t ψ_s = 0`, `c⁻² ∂tt ψ_s - γ_s ∂xx ψ_s - β_s ∂xx u = 0`,
//! in the Laguerre domain. Each term is marched down in depth with a
//! fifth-order Adams scheme on filtered running sums.

mod coeffs;
mod march;
mod migration;
mod model;
mod operators;

pub use coeffs::{DrpStencil, PadeCoefficients};
pub use march::{
    filter_phi_fields, BoundaryData2D, Method2D, Run2DOutput, Solver2D, Solver2DConfig, Starter2D,
    WavefieldState2D,
};
pub use migration::{
    diffraction_section, flat_reflector_section, migrate, MigrationConfig, MigrationImage,
    ZeroOffsetSection,
};
pub use model::{smooth_velocity, VelocityModel2D};
pub use operators::{assemble_reduced, reduced_operator, reduced_rhs, ReducedSystem, RowOperators};
