//! Numerical toolbox for the one-dimensional focusing nonlinear Schrödinger
//! equation `i u_t + u_xx + |u|^(p-1) u = 0` with supercritical power `p > 5`,
//! restricted to the odd-symmetry sector.
//!
//! The crate provides:
//!
//! * the explicit ground state `Q` and its translates, reflections and
//!   cutoff/glued combinations ([`soliton`]),
//! * conserved functionals, virial quantities, Gagliardo-Nirenberg constants
//!   and threshold classification ([`functionals`]),
//! * the quadratic form of the linearization around the ground state with
//!   constrained coercivity minimization ([`linearized`]),
//! * a symmetric split-step Fourier integrator with adaptive stepping,
//!   odd-sector projection and blow-up detection ([`evolve`]),
//! * decomposition of near two-soliton states into modulation parameters
//!   ([`modulation`]),
//! * localized virial quantities ([`virial`]) and synthetic field generators
//!   for randomized suites ([`synth`]).
//!
//! All quantities are dimensionless; the spatial domain is a uniform periodic
//! grid on `[-L, L)` standing in for the real line, which is adequate as long
//! as fields decay below roundoff at the boundary.

pub mod cutoff;
pub mod evolve;
pub mod fft;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod linearized;
pub mod modulation;
pub mod quadrature;
pub mod soliton;
pub mod synth;
pub mod virial;

pub use evolve::{EvolveConfig, Termination, TrajectoryRecord};
pub use field::Field;
pub use functionals::{FunctionalReport, ThresholdClass};
pub use grid::Grid;
pub use modulation::ModulationFit;
pub use soliton::{GroundStateParams, SpatialOperator};
