//! Numerical core for one-dimensional atom-optics tunnelling studies.
//!
//! Everything in this crate works in internal natural units (ħ = m = 1, length
//! unit 1 µm by default, see [`units`]). The crate is `no_std` + `alloc`; file
//! formats, the scenario language and the command-line runner live in the
//! companion `tunnelsim` crate.
//!
//! Module map:
//!
//! - [`units`]: unit system, lab ↔ internal conversions, de Broglie wavelengths
//! - [`grid`]: uniform grids, scalar and spinor wavefunctions, observables
//! - [`potential`]: scheduled potential terms, Larmor fields, well finding
//! - [`propagate`]: split-operator real/imaginary time evolution, decay fits
//! - [`scattering`]: transfer-matrix scattering, group delay, bound-state counting
//! - [`larmor`]: conditional (post-selected) Larmor times and the two-field test
//! - [`cooling`]: delta-kick cooling ensembles and the swept-barrier capture
//! - [`causal`]: causal response kernels and front-causality checks
#![no_std]
// `!(x > 0.0)` style checks reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod causal;
pub mod cooling;
pub mod fft;
pub mod grid;
pub mod larmor;
pub mod math;
pub mod potential;
pub mod propagate;
pub mod runtime;
pub mod scattering;
pub mod units;

pub use num_complex::Complex64;

pub use fft::{Fft, Radix2Fft};
pub use grid::{Grid, Observables, SpinorWaveFunction, WaveFunction};
pub use potential::{LarmorField, PotentialSchedule, PotentialTerm, Shape, Window};
pub use propagate::{Absorber, PropagatorConfig, Trajectory};

pub use runtime::{Runtime, SerialRuntime};
pub use units::{Dimension, Quantity, UnitSystem};
