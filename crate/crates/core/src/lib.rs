//! Simulator and analysis library for driven networks of harmonic
//! oscillators coupled to finite oscillator-chain baths.
//!
//! The crate propagates Gaussian states of quadratic Hamiltonians exactly
//! (spectral propagators off drive, RK4 across the driven phase) and
//! evaluates, cycle by cycle, the full energy balance
//! W_tot = ΣQ_j + ΔU_S + ΔU_int, the entropy balance
//! Σ_i ΔS_i + Σ_j Q_j/T_j = ΔΣ with Σ assembled from mutual information,
//! total correlations and thermal displacements, the generalized efficiency
//! with its bound, and the thermal/athermal operating-regime ratio.

pub mod dynamics;
pub mod engine;
pub mod error;
pub mod gaussian;
pub mod layout;
pub mod linalg;
pub mod runner;
pub mod sim;
pub mod thermo;

pub use dynamics::{
    constant_propagator, cycle_propagator, evolve, CyclePropagator, DriveProtocol, Propagator,
};
pub use engine::{EngineConfig, EngineModel};
pub use error::{Error, Result};
pub use gaussian::{EnergyForm, GaussianState, NormalModes, QuadraticHamiltonian};
pub use layout::ModeLayout;
pub use sim::{simulate, CycleRecord, Simulation};
pub use thermo::{
    bound_surface, cycle_ledger, efficiency_bound, efficiency_report, entropy_report,
    second_law_residual, work_decomposition_residual, BoundSurface, CycleLedger,
    EfficiencyReport, EntropyReport, Regime,
};
