//! Simulation and analysis toolkit for a ring gyroscope built from coupled
//! Mach-Zehnder interferometers ("coherence de Broglie waves", CBW).
//!
//! The crate is split along the physics:
//!
//! * [`optics`] builds exact 2x2 transfer matrices: beam splitters, arm
//!   phases, the asymmetric `[MZI]±` blocks and the closed-form order-`m`
//!   CBW matrix.
//! * [`cavity`] superposes the lossy round-trip orders of the ring into
//!   intensity traces and per-order amplitude traces.
//! * [`reference`] holds the classical baselines: the Fabry-Perot Airy
//!   profile and the Sagnac rotation-to-phase conversion.
//! * [`fringe`] measures peaks, widths and the CBW/FP resolution gain, and
//!   checks the analytic interference cases.
//! * [`dsl`] parses and compiles a small two-port optical netlist language.

pub mod cavity;
pub mod dsl;
pub mod error;
pub mod fringe;
pub mod optics;
pub mod reference;

pub use cavity::{
    mode_amplitudes, mode_traces, superpose, sweep, sweep_with, CavityConfig, ChannelConvention,
    Grid, LossExponent, ModeTrace, SweepOptions, Trace, TraceSource, ZetaModel,
};
pub use error::{Error, Result};
pub use fringe::{
    find_peaks, fwhm, measure_resolution, resolution_gain, verify_analytic_cases,
    verify_analytic_cases_on, zeta_invariance, AnalyticCase, CaseReport, Channel, FringeMetrics,
    Peak, ResolutionSummary,
};
pub use optics::{
    apply, bs_matrix, cbw_order_matrix, mzi_block, phase_matrix, ring_product, Arm, ComplexAmp,
    FieldPair, MziSign, Phase, TransferMatrix,
};
pub use reference::{fp_trace, sagnac_phase, FabryPerotConfig, SagnacParams, SPEED_OF_LIGHT};

/// The canonical netlist for the unfolded ring building block.
pub const RING_NETLIST: &str = include_str!("../../../netlists/ring.cir");
