//! Simulation toolkit for a cavity-assisted entanglement concentration
//! protocol that distills standard three-photon W states from partially
//! entangled ones.
//!
//! The crate is organized in four layers:
//!
//! - [`statevec`]: a dense pure-state engine over named two-level systems
//!   (photon polarization and electron spin) with tensor products,
//!   single-qubit operations, projective measurement and fidelity.
//! - [`cavity`]: the one-sided quantum-dot cavity optics, i.e. complex
//!   reflection coefficients for hot and cold cavities, Faraday rotation,
//!   and the diagonal photon-spin interaction in ideal and lossy modes.
//! - [`pcg`]: the spin-mediated polarization parity-check gate with
//!   enumerated and sampled variants plus fidelity/efficiency metrics.
//! - [`ecp`]: the two-step concentration protocol itself: state
//!   preparation, both protocol steps, closed-form probability tables,
//!   an exact branch-tree evaluator, and Monte Carlo ensemble runs.

pub mod cavity;
pub mod ecp;
pub mod pcg;
pub mod statevec;

pub use cavity::{faraday_rotation, reflection, CavityParams, InteractionMode, ReflectionPair};
pub use num_complex::Complex64;
pub use ecp::{balanced_alpha, closed_form, exact_table, make_w_input, run_ensemble, WParams};
pub use pcg::{gate_metrics, parity_check_enumerate, parity_check_sample, GateMetrics, GateResult};
pub use statevec::{Basis, MeasurementRecord, QubitId, QubitKind, StateVector};
