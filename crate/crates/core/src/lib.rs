//! Channel-resolved description of one-dimensional stationary scattering.
//!
//! A piecewise-constant barrier is reduced to its transmission coefficient
//! `T(k)` and the phase functions `J(k)`, `F(k)` ([`potential`]). From these
//! the scattering matrix is assembled and split into unitary transmission and
//! reflection channels, whose in- and out-asymptotes are built on a k-grid
//! ([`channels`]). Wave-packet moments of every asymptote ([`packets`]) feed
//! the characteristic times ([`timing`]). The [`oracle`] module propagates the
//! time-dependent Schrödinger equation directly and is used to validate the
//! asymptotic description.
//!
//! Internally `ħ = m = 1`; [`units::Units`] converts at the boundary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod cli;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod packets;
pub mod potential;
pub mod timing;
pub mod units;

pub use channels::{
    assemble_smatrix, decompose, in_asymptotes, out_asymptotes, reverse_motion,
    ChannelDecomposition, Mat2, ReverseMotion, SMatrix, Scenario, Side,
};
pub use error::{Error, Result};
pub use grid::KGrid;
pub use packets::{gaussian_packet, gwp_momentum_shifts, MomentSet, Role, SpectralPacket};
pub use potential::{scatter_coeffs, transfer_matrix, Barrier, ScatterCoeffs, Segment, TransferMatrix};
pub use timing::{
    delay_times, scattering_length, scattering_time, swpa_times, time_report, TimeReport,
};
pub use units::Units;

pub use num_complex::Complex64;
