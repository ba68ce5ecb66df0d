//! Pump-pulse design and joint-spectrum verification for transverse-pumped,
//! counter-propagating spontaneous parametric down-conversion in a
//! single-mode nonlinear waveguide.
//!
//! The workflow is:
//!
//! 1. [`dispersion`]: Sellmeier-based indices, propagation constants and
//!    group slownesses for each index branch of a uniaxial medium.
//! 2. [`pump`]: turn requested photon centers and bandwidths into the pump
//!    carrier, widths, k-omega shear and incidence angle.
//! 3. [`biphoton`]: sample the joint spectral amplitude produced by a pump,
//!    either by direct evaluation under full or linearized dispersion or from
//!    the separable closed form, and quantify its frequency correlations.
//! 4. [`polarization`]: combine two pump polarization components driving two
//!    susceptibility pathways into a polarization-entangled design.
//! 5. [`calibration`]: sweep the unstated conventions against the published
//!    BBO design table.

pub mod biphoton;
pub mod calibration;
pub mod cli;
pub mod dispersion;
mod error;
pub mod polarization;
pub mod pump;
pub mod units;

pub use error::{Error, ErrorKind, Result};
