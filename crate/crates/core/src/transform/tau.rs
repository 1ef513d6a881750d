use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Interpolation, PulseSpec, SystemModel};
use crate::quadrature::{cumulative_simpson, gauss_legendre};

/// Default number of grid points per carrier period.
pub const DEFAULT_POINTS_PER_PERIOD: usize = 64;

/// `dtau/dt = F0 m omega mu_ab / (2 omega_ab)`.
pub fn tau_rate(model: &SystemModel, pulse: &PulseSpec, t: f64) -> Result<f64> {
    let s = model.eval(t)?;
    let m = pulse.envelope().eval(t)?;
    let w = pulse.chirp().eval(t)?;
    Ok(pulse.f0() * m * w * s.mu_ab / (2.0 * s.omega_ab))
}

/// Grid size resolving the fastest of the carrier and the level splitting
/// with `points_per_period` samples per period across the pulse window.
pub fn grid_points_for(
    model: &SystemModel,
    pulse: &PulseSpec,
    points_per_period: usize,
) -> Result<usize> {
    let (t0, t1) = pulse.window();
    let probes = 2001;
    let mut fastest: f64 = 0.0;
    for i in 0..probes {
        let t = t0 + (t1 - t0) * i as f64 / (probes - 1) as f64;
        let conv = pulse.phase_convention();
        let carrier = conv.phase_rate(pulse.chirp(), t)?.abs();
        let level = conv.phase_rate(&model.omega_ab, t)?.abs();
        fastest = fastest.max(carrier).max(level);
    }
    let periods = (t1 - t0) * fastest / (2.0 * std::f64::consts::PI);
    Ok(((periods * points_per_period as f64).ceil() as usize + 1).max(2))
}

/// Monotone map between lab time and transformed time.
///
/// Node values come from per-interval Gauss-Legendre sums of the rate, and
/// off-node queries integrate from the nearest node, so the map is
/// consistent with `dtau/dt` everywhere, not only at the nodes.
#[derive(Debug, Clone)]
pub struct TauMap {
    model: Arc<SystemModel>,
    pulse: Arc<PulseSpec>,
    t_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    rate: Vec<f64>,
    interpolation: Interpolation,
    simpson_check: f64,
}

impl TauMap {
    pub fn build(model: &SystemModel, pulse: &PulseSpec, n_grid: usize) -> Result<Self> {
        Self::build_shared(Arc::new(model.clone()), Arc::new(pulse.clone()), n_grid)
    }

    pub fn build_shared(
        model: Arc<SystemModel>,
        pulse: Arc<PulseSpec>,
        n_grid: usize,
    ) -> Result<Self> {
        if n_grid < 2 {
            return Err(Error::invalid(format!(
                "tau map needs n_grid >= 2, got {n_grid}"
            )));
        }
        let (t0, t1) = pulse.window();
        if !model.covers(t0, t1) {
            return Err(Error::invalid(format!(
                "system model does not cover the pulse window [{t0}, {t1}]"
            )));
        }
        let h = (t1 - t0) / (n_grid - 1) as f64;
        let t_grid: Vec<f64> = (0..n_grid)
            .map(|i| {
                if i == n_grid - 1 {
                    t1
                } else {
                    t0 + h * i as f64
                }
            })
            .collect();
        let checked_rate = |t: f64| -> Result<f64> {
            let r = tau_rate(&model, &pulse, t)?;
            if r < 0.0 {
                return Err(Error::Orientation { t, value: r });
            }
            Ok(r)
        };
        let rate = t_grid
            .iter()
            .map(|&t| checked_rate(t))
            .collect::<Result<Vec<_>>>()?;
        let mut tau_grid = Vec::with_capacity(n_grid);
        tau_grid.push(0.0);
        for w in t_grid.windows(2) {
            let piece = gauss_legendre(w[0], w[1], checked_rate)?;
            tau_grid.push(tau_grid.last().unwrap() + piece);
        }
        // fourth-order check of the node values against the same samples
        let simpson = cumulative_simpson(&rate, h);
        let simpson_check = simpson
            .iter()
            .zip(&tau_grid)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(TauMap {
            model,
            pulse,
            t_grid,
            tau_grid,
            rate,
            interpolation: Interpolation::Cubic,
            simpson_check,
        })
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn pulse(&self) -> &PulseSpec {
        &self.pulse
    }

    pub fn shared_model(&self) -> Arc<SystemModel> {
        Arc::clone(&self.model)
    }

    pub fn shared_pulse(&self) -> Arc<PulseSpec> {
        Arc::clone(&self.pulse)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    /// `dtau/dt` at the grid nodes.
    pub fn rate_grid(&self) -> &[f64] {
        &self.rate
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau_grid.last().unwrap()
    }

    /// Largest node discrepancy between the Gauss-Legendre accumulation and
    /// the fourth-order cumulative rule on the same grid.
    pub fn quadrature_check(&self) -> f64 {
        self.simpson_check
    }

    pub fn rate_at(&self, t: f64) -> Result<f64> {
        tau_rate(&self.model, &self.pulse, t)
    }

    pub(crate) fn interval_of(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.pulse.window();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { t, lo, hi });
        }
        let idx = self.t_grid.partition_point(|&x| x <= t);
        Ok(idx.saturating_sub(1).min(self.t_grid.len() - 2))
    }

    /// Integral of `f` from the grid node at or below `t` up to `t`, plus
    /// that node's index.
    pub(crate) fn integrate_from_node<F>(&self, t: f64, f: F) -> Result<(usize, f64)>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let j = self.interval_of(t)?;
        Ok((j, gauss_legendre(self.t_grid[j], t, f)?))
    }

    /// Running integral of `f(t) dt` over the grid, node by node.
    pub(crate) fn accumulate<F>(&self, mut f: F) -> Result<Vec<f64>>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut out = Vec::with_capacity(self.t_grid.len());
        out.push(0.0);
        for w in self.t_grid.windows(2) {
            let piece = gauss_legendre(w[0], w[1], &mut f)?;
            out.push(out.last().unwrap() + piece);
        }
        Ok(out)
    }

    /// `tau(t)`.
    pub fn tau_at(&self, t: f64) -> Result<f64> {
        let (j, piece) = self.integrate_from_node(t, |s| self.rate_at(s))?;
        Ok(self.tau_grid[j] + piece)
    }

    /// `t(tau)`. Fails outside `[0, tau_max]` and inside flat segments
    /// where the envelope vanishes over a finite stretch.
    pub fn invert(&self, tau: f64) -> Result<f64> {
        let tau_max = self.tau_max();
        if !(tau >= 0.0 && tau <= tau_max) {
            return Err(Error::Domain {
                t: tau,
                lo: 0.0,
                hi: tau_max,
            });
        }
        let first_ge = self.tau_grid.partition_point(|&x| x < tau);
        let last_le = self.tau_grid.partition_point(|&x| x <= tau);
        if last_le > first_ge {
            // tau hits one or more nodes exactly
            if last_le - first_ge > 1 {
                return Err(Error::TauAmbiguity {
                    tau,
                    t_lo: self.t_grid[first_ge],
                    t_hi: self.t_grid[last_le - 1],
                });
            }
            return Ok(self.t_grid[first_ge]);
        }
        let j = first_ge - 1;
        let (ta, tb) = (self.t_grid[j], self.t_grid[j + 1]);
        let (sa, sb) = (self.tau_grid[j], self.tau_grid[j + 1]);
        let target = tau - sa;
        let mut guess = self.initial_guess(j, tau);
        let (mut lo, mut hi) = (ta, tb);
        for _ in 0..60 {
            let g = gauss_legendre(ta, guess, |s| self.rate_at(s))? - target;
            if g == 0.0 {
                return Ok(guess);
            }
            if g > 0.0 {
                hi = guess;
            } else {
                lo = guess;
            }
            let slope = self.rate_at(guess)?;
            let step = if slope > 0.0 {
                g / slope
            } else {
                f64::INFINITY
            };
            // the Newton error after a step d is O(d^2 / envelope scale)
            if step.abs() <= NEWTON_ACCEPT * (tb - ta) {
                return Ok((guess - step).clamp(lo, hi));
            }
            let newton = guess - step;
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            guess = next;
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        debug_assert!(sb > sa);
        Ok(guess)
    }

    fn initial_guess(&self, j: usize, tau: f64) -> f64 {
        let (ta, tb) = (self.t_grid[j], self.t_grid[j + 1]);
        let (sa, sb) = (self.tau_grid[j], self.tau_grid[j + 1]);
        let u = (tau - sa) / (sb - sa);
        let linear = ta + u * (tb - ta);
        let (ra, rb) = (self.rate[j], self.rate[j + 1]);
        if self.interpolation == Interpolation::Linear || ra <= 0.0 || rb <= 0.0 {
            return linear;
        }
        // cubic Hermite on t(tau) with slopes dt/dtau = 1/rate
        let ds = sb - sa;
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let cubic = h00 * ta + h10 * ds / ra + h01 * tb + h11 * ds / rb;
        if cubic > ta && cubic < tb {
            cubic
        } else {
            linear
        }
    }
}

/// Build the map on a uniform grid of `n_grid` points.
pub fn build_tau_map(model: &SystemModel, pulse: &PulseSpec, n_grid: usize) -> Result<TauMap> {
    TauMap::build(model, pulse, n_grid)
}

const NEWTON_ACCEPT: f64 = 1e-8;

pub fn invert_tau(map: &TauMap, tau: f64) -> Result<f64> {
    map.invert(tau)
}
