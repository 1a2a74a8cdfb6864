//! Dollard-modified scattering for a repulsive Coulomb-tail potential on a
//! periodic 1D spectral grid.
//!
//! Units have ħ = 1; the particle mass lives on the [`Grid`].
//!
//! * [`spectral`]: grids, states, transforms, observables.
//! * [`dynamics`]: free, Dollard, adiabatic Dollard and split-step full dynamics.
//! * [`moller`]: finite-horizon wave operators, Cauchy diagnostics, packet S-matrix.
//! * [`asymptotics`]: asymptotic dynamics, interpolation, asymptotic observables.
//! * [`adiabatic`]: switching integrals, the ε-regularized S-matrix and its
//!   infrared factorization.
//! * [`dense`] and [`classical`]: independent reference calculations.

pub mod adiabatic;
pub mod asymptotics;
pub mod classical;
pub mod dense;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod moller;
pub mod potential;
pub mod special;
pub mod spectral;

pub use dynamics::{
    adiabatic_dollard_propagate, dollard_phase, dollard_propagate, free_propagate, full_propagate,
    Scheme, StepperConfig, SwitchingSpec,
};
pub use error::{Error, Result};
pub use potential::{PotentialKind, PotentialSpec};
pub use spectral::{
    distance, expect, gaussian_packet, make_grid, overlap, FftBackend, Grid, Observable,
    PacketSpec, Representation, State,
};
