use std::f64::consts::PI;

use crate::dynamics::rk::{integrate, OdeSystem, Sampling, StepOptions, StepStats};
use crate::dynamics::{Amplitudes, Frame, Trace, TraceKind, STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::model::{DerivativeMode, PulseSpec, SystemModel};
use crate::transform::TauMap;

/// Options shared by all propagators.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagateOptions {
    pub tol: f64,
    pub sampling: Sampling,
    /// Field derivative used by the lab-frame equation.
    pub derivative: DerivativeMode,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            tol: 1e-9,
            sampling: Sampling::Steps,
            derivative: DerivativeMode::Exact,
        }
    }
}

impl PropagateOptions {
    pub fn with_tol(tol: f64) -> Self {
        PropagateOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn sampled(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn derivative(mut self, mode: DerivativeMode) -> Self {
        self.derivative = mode;
        self
    }

    pub(crate) fn step_options(&self) -> StepOptions {
        StepOptions {
            tol: self.tol,
            sampling: self.sampling.clone(),
            ..Default::default()
        }
    }
}

struct LabEquation<'a> {
    model: &'a SystemModel,
    pulse: &'a PulseSpec,
    mode: DerivativeMode,
}

impl LabEquation<'_> {
    fn level_phase(&self, t: f64) -> Result<f64> {
        self.pulse
            .phase_convention()
            .phase(&self.model.omega_ab, self.pulse.t_start(), t)
    }
}

impl OdeSystem<4> for LabEquation<'_> {
    fn rhs(&self, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let s = self.model.eval(t)?;
        let df = self.pulse.eval_field_derivative(t, self.mode)?;
        let theta = s.sign_ab.value() * self.level_phase(t)?;
        let (sin, cos) = theta.sin_cos();
        let coupling = df * s.mu_ab / s.omega_ab;
        // diagonal: F' (mu_ab/omega_ab)(-i mu_ii/mu_ab omega_ab t) = -i mu_ii t F'
        let da = df * s.mu_aa * t;
        let db = df * s.mu_bb * t;
        let (ar, ai, br, bi) = (y[0], y[1], y[2], y[3]);
        // e^{i theta} c_beta and -e^{-i theta} c_alpha
        let up_r = cos * br - sin * bi;
        let up_i = cos * bi + sin * br;
        let dn_r = -(cos * ar + sin * ai);
        let dn_i = -(cos * ai - sin * ar);
        Ok([
            da * ai + coupling * up_r,
            -da * ar + coupling * up_i,
            db * bi + coupling * dn_r,
            -db * br + coupling * dn_i,
        ])
    }

    fn max_step(&self, t: f64, _y: &[f64; 4]) -> Result<f64> {
        let conv = self.pulse.phase_convention();
        let carrier = conv.phase_rate(self.pulse.chirp(), t)?.abs();
        let level = conv.phase_rate(&self.model.omega_ab, t)?.abs();
        let s = self.model.eval(t)?;
        let df = self.pulse.eval_field_derivative(t, self.mode)?.abs();
        // the diagonal terms shift the off-diagonal beat by up to their spread
        let diag = df * (s.mu_aa.abs() + s.mu_bb.abs()) * t;
        let coupling = df * s.mu_ab.abs() / s.omega_ab;
        let fastest = carrier.max(level) + diag + coupling;
        Ok(if fastest > 0.0 {
            2.0 * PI / (STEPS_PER_PERIOD * fastest)
        } else {
            f64::INFINITY
        })
    }

    fn coordinate(&self) -> &'static str {
        "t"
    }
}

/// Propagate the lab-frame coefficients over `t_span`.
pub fn integrate_lab(
    model: &SystemModel,
    pulse: &PulseSpec,
    init: Amplitudes,
    t_span: (f64, f64),
    opts: &PropagateOptions,
) -> Result<Trace> {
    integrate_lab_with_stats(model, pulse, init, t_span, opts).map(|(t, _)| t)
}

pub fn integrate_lab_with_stats(
    model: &SystemModel,
    pulse: &PulseSpec,
    init: Amplitudes,
    t_span: (f64, f64),
    opts: &PropagateOptions,
) -> Result<(Trace, StepStats)> {
    if init.frame != Frame::Lab {
        return Err(Error::invalid("lab propagation needs lab-frame amplitudes"));
    }
    init.require_normalized(1e-12)?;
    pulse.check_window(t_span.0)?;
    pulse.check_window(t_span.1)?;
    if !model.covers(t_span.0, t_span.1) {
        return Err(Error::invalid(
            "system model does not cover the requested span",
        ));
    }
    let eq = LabEquation {
        model,
        pulse,
        mode: opts.derivative,
    };
    let mut trace = Trace::empty(TraceKind::Lab);
    let (_, stats) = integrate(
        &eq,
        t_span.0,
        init.to_real(),
        t_span.1,
        &opts.step_options(),
        |t, y| {
            let a = Amplitudes::from_real(y, Frame::Lab);
            trace.t.push(t);
            trace.tau.push(f64::NAN);
            trace.amplitudes.push([a.first, a.second]);
            trace.field.push(pulse.eval_field(t)?);
            trace.chirp.push(pulse.chirp().eval(t)?);
            Ok(())
        },
    )?;
    Ok((trace, stats))
}

impl Trace {
    /// Fill the tau column of a lab-frame trace from a map.
    pub fn attach_tau(&mut self, map: &TauMap) -> Result<()> {
        for (t, tau) in self.t.iter().zip(self.tau.iter_mut()) {
            *tau = map.tau_at(*t)?;
        }
        Ok(())
    }
}
