//! Time reparameterization and the shorthands of the transformed frame:
//! the tau map, the detunings, and the diagonal drive terms.

mod tau;

pub use tau::{
    build_tau_map, grid_points_for, invert_tau, tau_rate, TauMap, DEFAULT_POINTS_PER_PERIOD,
};

use crate::error::Result;
use crate::model::{PulseSpec, SystemModel, SystemSample};

/// Sum and difference of the drive frequency and the level splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    pub delta_plus: f64,
    pub delta_minus: f64,
}

pub fn detunings(model: &SystemModel, pulse: &PulseSpec, t: f64) -> Result<Detunings> {
    let w = pulse.chirp().eval(t)?;
    let w_ab = model.eval(t)?.omega_ab;
    Ok(Detunings {
        delta_plus: w + w_ab,
        delta_minus: w - w_ab,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Alpha,
    Beta,
}

/// `f_i = 2 (mu_ii / mu_ab) omega_ab t sin(phase(t))`, all factors at lab time `t`.
pub fn f_diagonal(model: &SystemModel, pulse: &PulseSpec, t: f64, level: Level) -> Result<f64> {
    pulse.check_window(t)?;
    let s = model.eval(t)?;
    let phase = pulse.carrier_phase(t)?;
    let (fa, fb) = drive_terms(&s, phase, t)?;
    Ok(match level {
        Level::Alpha => fa,
        Level::Beta => fb,
    })
}

/// Both diagonal drive terms from an already-evaluated model sample.
pub(crate) fn drive_terms(s: &SystemSample, carrier_phase: f64, t: f64) -> Result<(f64, f64)> {
    s.require_coupling(t)?;
    let common = 2.0 * s.omega_ab * t * carrier_phase.sin() / s.mu_ab;
    Ok((s.mu_aa * common, s.mu_bb * common))
}
