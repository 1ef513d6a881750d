use std::cell::Cell;
use std::f64::consts::PI;

use crate::dynamics::lab::PropagateOptions;
use crate::dynamics::rk::{integrate, OdeSystem, StepStats};
use crate::dynamics::{Amplitudes, Frame, Trace, TraceKind, STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::model::SystemSample;
use crate::transform::{drive_terms, TauMap};

/// Whether the sum-frequency (counter-rotating) terms are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Full,
    Rotating,
}

/// Everything the tau-frame generator needs at one instant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TauPoint {
    pub sample: SystemSample,
    pub f_alpha: f64,
    pub f_beta: f64,
    /// `s (phase_carrier - phase_level)`, the slow phase.
    pub theta_minus: f64,
    /// `s (phase_carrier + phase_level)`, the counter-rotating phase.
    pub theta_plus: f64,
}

pub(crate) fn point_at_time(map: &TauMap, t: f64) -> Result<TauPoint> {
    let model = map.model();
    let pulse = map.pulse();
    let s = model.eval(t)?;
    let carrier = pulse.carrier_phase(t)?;
    let level = pulse
        .phase_convention()
        .phase(&model.omega_ab, pulse.t_start(), t)?;
    let (f_alpha, f_beta) = drive_terms(&s, carrier, t)?;
    let sg = s.sign_ab.value();
    Ok(TauPoint {
        sample: s,
        f_alpha,
        f_beta,
        theta_minus: sg * (carrier - level),
        theta_plus: sg * (carrier + level),
    })
}

struct TauEquation<'a> {
    map: &'a TauMap,
    coupling: Coupling,
    last: Cell<(f64, f64)>,
}

impl TauEquation<'_> {
    fn time_at(&self, tau: f64) -> Result<f64> {
        let (tau_prev, t_prev) = self.last.get();
        if tau == tau_prev {
            return Ok(t_prev);
        }
        let t = self.map.invert(tau)?;
        self.last.set((tau, t));
        Ok(t)
    }
}

impl OdeSystem<4> for TauEquation<'_> {
    fn rhs(&self, tau: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let p = point_at_time(self.map, self.time_at(tau)?)?;
        let sg = p.sample.sign_ab.value();
        // off-diagonal (1,2): s (e^{-i theta_-} - e^{i theta_+}); (2,1) is its conjugate
        let (sm, cm) = p.theta_minus.sin_cos();
        let (mut ur, mut ui) = (cm, -sm);
        if self.coupling == Coupling::Full {
            let (sp, cp) = p.theta_plus.sin_cos();
            ur -= cp;
            ui -= sp;
        }
        ur *= sg;
        ui *= sg;
        let (ar, ai, br, bi) = (y[0], y[1], y[2], y[3]);
        // M a with M = [[-f_a, u], [conj(u), -f_b]]
        let m1r = -p.f_alpha * ar + ur * br - ui * bi;
        let m1i = -p.f_alpha * ai + ur * bi + ui * br;
        let m2r = ur * ar + ui * ai - p.f_beta * br;
        let m2i = ur * ai - ui * ar - p.f_beta * bi;
        // da/dtau = -i M a
        Ok([m1i, -m1r, m2i, -m2r])
    }

    fn max_step(&self, tau: f64, _y: &[f64; 4]) -> Result<f64> {
        let t = self.time_at(tau)?;
        let rate = self.map.rate_at(t)?;
        if !(rate > 0.0) {
            return Ok(0.0);
        }
        let p = point_at_time(self.map, t)?;
        let pulse = self.map.pulse();
        let conv = pulse.phase_convention();
        let carrier = conv.phase_rate(pulse.chirp(), t)?;
        let level = conv.phase_rate(&self.map.model().omega_ab, t)?;
        let dt_dtau = 1.0 / rate;
        let mut fastest: f64 = 1.0;
        fastest = fastest.max((carrier - level).abs() * dt_dtau);
        if self.coupling == Coupling::Full {
            fastest = fastest.max((carrier + level).abs() * dt_dtau);
        }
        if p.sample.mu_aa != 0.0 || p.sample.mu_bb != 0.0 {
            fastest = fastest
                .max(carrier.abs() * dt_dtau)
                .max(p.f_alpha.abs())
                .max(p.f_beta.abs());
        }
        Ok(2.0 * PI / (STEPS_PER_PERIOD * fastest))
    }

    fn coordinate(&self) -> &'static str {
        "tau"
    }
}

fn integrate_tau(
    map: &TauMap,
    init: Amplitudes,
    tau_span: (f64, f64),
    opts: &PropagateOptions,
    coupling: Coupling,
) -> Result<(Trace, StepStats)> {
    if init.frame != Frame::Tau {
        return Err(Error::invalid("tau propagation needs tau-frame amplitudes"));
    }
    init.require_normalized(1e-12)?;
    let eq = TauEquation {
        map,
        coupling,
        last: Cell::new((f64::NAN, f64::NAN)),
    };
    let kind = match coupling {
        Coupling::Full => TraceKind::TauFull,
        Coupling::Rotating => TraceKind::TauRwa,
    };
    let pulse = map.pulse();
    let mut trace = Trace::empty(kind);
    let (_, stats) = integrate(
        &eq,
        tau_span.0,
        init.to_real(),
        tau_span.1,
        &opts.step_options(),
        |tau, y| {
            let a = Amplitudes::from_real(y, Frame::Tau);
            let t = eq.time_at(tau)?;
            trace.t.push(t);
            trace.tau.push(tau);
            trace.amplitudes.push([a.first, a.second]);
            trace.field.push(pulse.eval_field(t)?);
            trace.chirp.push(pulse.chirp().eval(t)?);
            Ok(())
        },
    )?;
    Ok((trace, stats))
}

/// Tau-frame propagation keeping both the difference- and sum-frequency
/// off-diagonal terms.
pub fn integrate_tau_full(
    map: &TauMap,
    init: Amplitudes,
    tau_span: (f64, f64),
    opts: &PropagateOptions,
) -> Result<Trace> {
    integrate_tau(map, init, tau_span, opts, Coupling::Full).map(|(t, _)| t)
}

/// Tau-frame propagation with the sum-frequency terms dropped.
pub fn integrate_tau_rwa(
    map: &TauMap,
    init: Amplitudes,
    tau_span: (f64, f64),
    opts: &PropagateOptions,
) -> Result<Trace> {
    integrate_tau(map, init, tau_span, opts, Coupling::Rotating).map(|(t, _)| t)
}

pub fn integrate_tau_with_stats(
    map: &TauMap,
    init: Amplitudes,
    tau_span: (f64, f64),
    opts: &PropagateOptions,
    coupling: Coupling,
) -> Result<(Trace, StepStats)> {
    integrate_tau(map, init, tau_span, opts, coupling)
}
