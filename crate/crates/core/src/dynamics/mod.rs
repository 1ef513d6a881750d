//! Propagation of the two-level amplitudes in the lab frame, the tau frame
//! (with and without counter-rotating terms), and the rabi frame.

mod lab;
mod rabi;
pub mod rk;
mod state;
mod tau;

pub use lab::{integrate_lab, integrate_lab_with_stats, PropagateOptions};
pub use rabi::{
    from_rabi_frame, integrate_rabi, phase_integrals, rabi_reference, rabi_sign, to_rabi_frame,
    to_rabi_trace, PhaseIntegrals,
};
pub use rk::{Method, Sampling, StepStats};
pub use state::{Amplitudes, Frame, Trace, TraceKind, CSV_COLUMNS};
pub use tau::{integrate_tau_full, integrate_tau_rwa, integrate_tau_with_stats, Coupling};

/// Steps per period of the fastest phase present; caps the step size.
pub const STEPS_PER_PERIOD: f64 = 20.0;
