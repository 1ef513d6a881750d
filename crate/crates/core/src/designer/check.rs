use std::f64::consts::PI;

use crate::dynamics::{
    integrate_tau_with_stats, Amplitudes, Coupling, Frame, PropagateOptions, Sampling, Trace,
};
use crate::error::{Error, Result};
use crate::model::{PulseSpec, SystemModel};
use crate::transform::{
    build_tau_map, detunings, grid_points_for, TauMap, DEFAULT_POINTS_PER_PERIOD,
};

/// Default pass threshold of [`rwa_validity_metric`].
pub const RWA_THRESHOLD: f64 = 10.0;
/// Default `P_beta` level counted as complete transfer.
pub const TRANSFER_THRESHOLD: f64 = 0.99;

/// Smallest counter-rotating phase speed in `tau` units and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaMetric {
    pub value: f64,
    pub at: f64,
}

impl RwaMetric {
    pub fn passes(&self, threshold: f64) -> bool {
        self.value >= threshold
    }
}

/// `min Delta_+(t) dt/dtau` over the grid nodes of `map` where the pulse
/// is on. Infinite when the field vanishes everywhere.
pub fn rwa_validity_metric(
    model: &SystemModel,
    pulse: &PulseSpec,
    map: &TauMap,
) -> Result<RwaMetric> {
    let mut best = RwaMetric {
        value: f64::INFINITY,
        at: f64::NAN,
    };
    for (&t, &rate) in map.t_grid().iter().zip(map.rate_grid()) {
        if !(rate > 0.0) {
            continue;
        }
        let v = detunings(model, pulse, t)?.delta_plus / rate;
        if v < best.value {
            best = RwaMetric { value: v, at: t };
        }
    }
    Ok(best)
}

/// Largest oscillation depth `F0 |mu_aa - mu_bb| m t` of the diagonal phase
/// difference over the nodes of `map`. Counter-rotating terms mix down to
/// zero frequency at second order in this depth, which the Delta_+ metric
/// does not see.
pub fn modulation_depth(map: &TauMap) -> Result<f64> {
    let model = map.model();
    let pulse = map.pulse();
    let mut depth: f64 = 0.0;
    for &t in map.t_grid() {
        let s = model.eval(t)?;
        depth = depth.max(pulse.f0() * (s.mu_aa - s.mu_bb).abs() * pulse.envelope().eval(t)? * t);
    }
    Ok(depth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub tol: f64,
    /// Requested end of the run in `tau`; clipped to the map's range.
    pub tau_end: f64,
    pub coupling: Coupling,
    /// Evenly spaced output samples in `tau`.
    pub samples: usize,
    pub points_per_period: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: 1e-9,
            tau_end: PI,
            coupling: Coupling::Rotating,
            samples: 2000,
            points_per_period: DEFAULT_POINTS_PER_PERIOD,
        }
    }
}

/// Population transfer achieved by a pulse.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub p_beta_max: f64,
    pub tau_at_max: f64,
    /// Where the run stopped; below the requested end if `tau_max` is shorter.
    pub tau_end: f64,
    pub p_beta_end: f64,
    pub norm_drift: f64,
    pub coupling: Coupling,
    pub trace: Trace,
}

impl Transfer {
    pub fn passes(&self, threshold: f64) -> bool {
        self.p_beta_max >= threshold
    }
}

/// Propagate in the transformed frame from `tau = 0` and report the largest
/// upper-level population.
pub fn verify_transfer(
    model: &SystemModel,
    pulse: &PulseSpec,
    init: Amplitudes,
    opts: &VerifyOptions,
) -> Result<Transfer> {
    let n = grid_points_for(model, pulse, opts.points_per_period)?;
    let map = build_tau_map(model, pulse, n)?;
    verify_on_map(&map, init, opts)
}

/// [`verify_transfer`] on an existing map.
pub fn verify_on_map(map: &TauMap, init: Amplitudes, opts: &VerifyOptions) -> Result<Transfer> {
    if !(opts.tau_end > 0.0) {
        return Err(Error::invalid(format!(
            "tau_end must be > 0, got {}",
            opts.tau_end
        )));
    }
    let tau_end = opts.tau_end.min(map.tau_max());
    if !(tau_end > 0.0) {
        return Err(Error::invalid("the pulse accumulates no transformed time"));
    }
    let run = PropagateOptions::with_tol(opts.tol).sampled(Sampling::Uniform(opts.samples.max(1)));
    let (trace, _) = integrate_tau_with_stats(
        map,
        init.in_frame(Frame::Tau),
        (0.0, tau_end),
        &run,
        opts.coupling,
    )?;
    let pops = trace.pop_second();
    let (imax, p_beta_max) =
        pops.iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p > best.1 {
                    (i, p)
                } else {
                    best
                }
            });
    Ok(Transfer {
        p_beta_max,
        tau_at_max: trace.tau[imax],
        tau_end,
        p_beta_end: *pops.last().expect("non-empty trace"),
        norm_drift: trace.max_norm_drift(),
        coupling: opts.coupling,
        trace,
    })
}
