//! Explicit solution machinery for the linear field-road diffusion system
//!
//! ```text
//! v_t = d Δv                      in the half-plane y > 0
//! u_t = D u_xx + ν v|₀ - μ u      on the road y = 0
//! -d ∂_y v|₀ = μ u - ν v|₀
//! ```
//!
//! together with an explicit finite-difference reference solver.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubic;
pub mod data;
pub mod error;
pub mod fd_solver;
pub mod kernels;
pub mod params;
pub mod phi;
pub mod quadrature;
pub mod semi_analytic;
pub mod special;

pub use cubic::{
    classify_regime, discriminant, partial_fraction_coeffs, solve_p_delta, Regime, RegimeKind,
    RootKind, RootTriple,
};
pub use data::{BoxDatum, DataSpec, InitialData, IntervalDatum, RoadProfile, ScalarField2D};
pub use error::{Error, Result};
pub use fd_solver::{
    fit_decay_rate, flux_profile, rightmost_sign_change, run, step, total_mass, DecayFit, SimConfig,
    SimState, Simulation, TimeSeriesRecord,
};
pub use kernels::{
    gauss_kernel, half_space_kernel, lambda_kernel, HalfSpacePoint, QuadratureConfig,
};
pub use params::ModelParams;
pub use phi::{phi_bullet, phi_compensated, sup_phi_scan, PhiEvalPoint, PhiEvaluator};
pub use semi_analytic::{solve_U, solve_V, solve_u, solve_v, Estimate, SemiAnalyticSolver};
pub use special::{erfc, erfc_ratio, erfc_ratio_derivs, ComplexPoint};

/// Library version, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
