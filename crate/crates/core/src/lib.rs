//! Joint eigenstates of commuting position/momentum projectors on periodic
//! sets, and a simulation of the multi-slit + wire-grating + lens
//! interferometer built on them.

pub mod config;
pub mod eigenstate;
pub mod error;
pub mod grid;
pub mod pipeline;
pub mod propagation;
pub mod quadrature;
pub mod sets;
pub mod validate;

pub use eigenstate::{comb_construct, fourier_series_construct, Coefficients, EnvelopeSpec, JointEigenstate};
pub use error::{Error, Result};
pub use grid::{fidelity, fourier, inverse_fourier, parity, Fidelity, Grid, Space, Wavefunction, C64};
pub use pipeline::{run, simulate, sweep, ApertureMode, ExperimentConfig, GratingModel, RunReport, StageReport};
pub use propagation::{fraunhofer, fresnel, infer_wavelength, OpticalGeometry};
pub use sets::{GratingSpec, IntervalSet, PeriodicSet, Region, Set};
