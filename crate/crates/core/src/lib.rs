//! Two dipole-dipole coupled emitters in a driven two-sided cavity.
//!
//! The crate computes the weak-excitation steady state and its normalized
//! output intensities, locates coherent perfect absorption (CPA) points,
//! diagonalizes the dressed-state ladder, and integrates the mean-field
//! equations of motion as an independent check of the linear solution.
//!
//! ```
//! use tavis_cpa::{observables, DriveConfig, SystemParams};
//!
//! // g = 10, γ = κ = 1, J = 0: equal inputs are fully absorbed at Δ = √199
//! let p = SystemParams::default().on_resonance(199f64.sqrt());
//! let o = observables(&p, &DriveConfig::equal(1.0)).unwrap();
//! assert!(o.out_l < 1e-18);
//! ```

pub mod cli;
pub mod cpa;
pub mod dressed;
pub mod error;
pub mod io;
pub mod langevin;
pub mod model;
pub mod optimize;
pub mod steady_state;
pub mod sweep;

pub use cpa::{cpa_detuning_solutions, cpa_residuals, find_absorption_minima, single_input_scattering, Port};
pub use dressed::{numeric_ladder, polariton_eigensystem, rabi_splitting, EmitterSpace};
pub use error::{Error, Result};
pub use langevin::{integrate, relax_to_steady, MeanFieldState, RelaxationReport};
pub use model::{validate, DetuningAxis, DriveConfig, SystemParams};
pub use steady_state::{observables, solve_steady_state, Observables, SteadyState};
pub use sweep::{sweep_ddi, sweep_detuning, sweep_phase, DriveMode, SweepSpec, SweepTable, SweepVariable};
