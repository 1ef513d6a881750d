use num_complex::Complex64;

use crate::dynamics::lab::PropagateOptions;
use crate::dynamics::tau::integrate_tau_rwa;
use crate::dynamics::{Amplitudes, Frame, Trace, TraceKind};
use crate::error::{Error, Result};
use crate::model::Sign;
use crate::transform::TauMap;

/// Diagonal phases `rho_1(tau)`, `rho_2(tau)` with `drho_i/dtau = f_i`,
/// tabulated at the nodes of the tau map they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIntegrals {
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
}

/// `f_i dtau = F0 mu_ii m omega t sin(phase) dt`, so the phases are
/// accumulated in lab time without dividing by `mu_ab`.
fn phase_integrands(map: &TauMap, t: f64) -> Result<(f64, f64)> {
    let pulse = map.pulse();
    let s = map.model().eval(t)?;
    let common = pulse.f0()
        * pulse.envelope().eval(t)?
        * pulse.chirp().eval(t)?
        * t
        * pulse.carrier_phase(t)?.sin();
    Ok((s.mu_aa * common, s.mu_bb * common))
}

pub fn phase_integrals(map: &TauMap) -> Result<PhaseIntegrals> {
    Ok(PhaseIntegrals {
        rho1: map.accumulate(|t| Ok(phase_integrands(map, t)?.0))?,
        rho2: map.accumulate(|t| Ok(phase_integrands(map, t)?.1))?,
    })
}

impl PhaseIntegrals {
    /// `(rho_1, rho_2)` at lab time `t`.
    pub fn at_time(&self, map: &TauMap, t: f64) -> Result<(f64, f64)> {
        let (j, r1) = map.integrate_from_node(t, |s| Ok(phase_integrands(map, s)?.0))?;
        let (_, r2) = map.integrate_from_node(t, |s| Ok(phase_integrands(map, s)?.1))?;
        Ok((self.rho1[j] + r1, self.rho2[j] + r2))
    }

    /// `(rho_1, rho_2)` at transformed time `tau`.
    pub fn at(&self, map: &TauMap, tau: f64) -> Result<(f64, f64)> {
        self.at_time(map, map.invert(tau)?)
    }
}

/// `b = diag(e^{-i rho_1}, e^{-i rho_2}) a`.
pub fn to_rabi_frame(a: Amplitudes, rho: (f64, f64)) -> Result<Amplitudes> {
    if a.frame != Frame::Tau {
        return Err(Error::invalid(
            "rabi-frame transformation needs tau-frame amplitudes",
        ));
    }
    Ok(Amplitudes::new(
        a.first * Complex64::from_polar(1.0, -rho.0),
        a.second * Complex64::from_polar(1.0, -rho.1),
        Frame::Rabi,
    ))
}

/// Inverse of [`to_rabi_frame`].
pub fn from_rabi_frame(b: Amplitudes, rho: (f64, f64)) -> Result<Amplitudes> {
    if b.frame != Frame::Rabi {
        return Err(Error::invalid("expected rabi-frame amplitudes"));
    }
    Ok(Amplitudes::new(
        b.first * Complex64::from_polar(1.0, rho.0),
        b.second * Complex64::from_polar(1.0, rho.1),
        Frame::Tau,
    ))
}

/// Closed-form solution of `db/dtau = sign * i * sigma_x * b`.
pub fn rabi_reference(init: Amplitudes, tau: f64, sign: Sign) -> Amplitudes {
    let (s, c) = tau.sin_cos();
    let rot = Complex64::new(0.0, sign.value() * s);
    Amplitudes::new(
        init.first * c + rot * init.second,
        init.second * c + rot * init.first,
        Frame::Rabi,
    )
}

/// Sign of the ideal Rabi generator reached after the phase rotation:
/// the rotating-frame coupling is `-i s_ab sigma_x`.
pub fn rabi_sign(sign_ab: Sign) -> Sign {
    sign_ab.flip()
}

/// Propagate in the rabi frame: rotating-wave tau dynamics followed by the
/// diagonal phase rotation at every sample.
pub fn integrate_rabi(
    map: &TauMap,
    phases: &PhaseIntegrals,
    init: Amplitudes,
    tau_span: (f64, f64),
    opts: &PropagateOptions,
) -> Result<Trace> {
    let rho0 = phases.at(map, tau_span.0)?;
    let a0 = from_rabi_frame(init, rho0)?;
    let a_trace = integrate_tau_rwa(map, a0, tau_span, opts)?;
    to_rabi_trace(map, phases, &a_trace)
}

/// Rotate every sample of a tau-frame trace into the rabi frame.
pub fn to_rabi_trace(map: &TauMap, phases: &PhaseIntegrals, a_trace: &Trace) -> Result<Trace> {
    let mut out = a_trace.clone();
    out.kind = TraceKind::Rabi;
    for (i, amps) in out.amplitudes.iter_mut().enumerate() {
        let rho = phases.at_time(map, a_trace.t[i])?;
        let b = to_rabi_frame(a_trace.state(i), rho)?;
        *amps = [b.first, b.second];
    }
    Ok(out)
}
