//! Lindblad master equations and their Taylor expansion in the loss rates.
//!
//! A [`MasterEquation`] holds a Hermitian `H₀` and a list of channels, each an
//! eigenoperator `X⁻` of `H₀` with a downward rate `K` and an upward rate `G`.
//! [`evolve`] integrates it directly; [`solve_hierarchy`] integrates the
//! coefficients `D_α = ∂^α ρ / ∂r^α` at zero rates, and [`assemble`] sums
//! them into `Σ_α D_α r^α / α!`.
//!
//! ```
//! use lossrate::models::two_level::{two_level_me, TwoLevelParams};
//! use lossrate::{assemble, evolve, qubit_ops, solve_hierarchy, RateAssignment, TimeGrid};
//!
//! let p = TwoLevelParams::new(2.0, 0.05)?;
//! let me = two_level_me(&p)?;
//! let grid = TimeGrid::new(0.0, 2.0, 400)?;
//!
//! let exact = evolve(&me, &p.initial, &grid)?;
//! let coeffs = solve_hierarchy(&me, &p.initial, &grid, 2)?;
//! let series = assemble(&coeffs, &RateAssignment::of(&me), 2)?;
//!
//! let sz = qubit_ops().sigma_z;
//! let gap = exact.expectation(&sz)?.re().max_abs_diff(&series.expectation(&sz)?.re());
//! // Pauli ⟨σz⟩ = 2e^{−γt} − 1; the truncation error is 2(γt)³/3!.
//! assert!(gap < 2.0 * 0.1f64.powi(3) / 6.0);
//! # Ok::<(), lossrate::Error>(())
//! ```

pub mod error;
pub mod expansion;
pub mod grid;
mod integrate;
pub mod lindblad;
pub mod models;
pub mod operator;
pub mod quadrature;

pub use error::{Error, Result};
pub use expansion::{
    assemble, finite_difference_check, finite_difference_deviation, finite_difference_estimate, hierarchy_rhs,
    solve_hierarchy, solve_hierarchy_with, CoefficientSet, HierarchyOptions, MultiIndex, RateAssignment,
};
pub use grid::{expectation_trajectory, TimeGrid, Trajectory};
pub use lindblad::{
    default_grid, evolve, evolve_checked, evolve_with, lindblad_rhs, rate_multiplier, spectral_width,
    step_halving_deviation,
    Channel, EvolveOptions, MasterEquation, RateKind, RateParam,
};
pub use operator::{
    boson_ops, check_eigenoperator, commutator, dagger, embed, expect, qubit_ops, trace, trace_product, BosonOps,
    CMatrix, CVector, DensityMatrix, Factor, HilbertSpace, Operator, QubitOps,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/master-equation.md")]
    mod master_equation {}
    #[doc = include_str!("../../../book/src/expansion.md")]
    mod expansion {}
    #[doc = include_str!("../../../book/src/models/two-level.md")]
    mod two_level {}
    #[doc = include_str!("../../../book/src/models/cavity.md")]
    mod cavity {}
    #[doc = include_str!("../../../book/src/models/jaynes-cummings.md")]
    mod jaynes_cummings {}
    #[doc = include_str!("../../../book/src/models/dicke.md")]
    mod dicke {}
}
