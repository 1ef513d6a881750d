use crate::error::{Error, Result};
use crate::model::{PulseSpec, SystemModel};
use crate::quadrature::differentiate;
use crate::transform::{drive_terms, tau_rate};

/// Stencil width of the finite-difference derivative of `Delta_- t`.
pub const RESIDUAL_STENCIL: usize = 9;

/// Pointwise `d/dtau (Delta_- t) + s (f_alpha - f_beta)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpResidual {
    pub t: Vec<f64>,
    /// NaN where `dtau/dt = 0` and the transformed derivative is undefined.
    pub values: Vec<f64>,
    pub sup: f64,
}

/// Evaluate the residual of the transformed-frame phase condition for the
/// chirp carried by `pulse`, differentiating `(omega - omega_ab) t` on `grid`
/// and converting to `tau` with the chain rule.
pub fn chirp_residual(
    model: &SystemModel,
    pulse: &PulseSpec,
    grid: &[f64],
) -> Result<ChirpResidual> {
    if grid.len() < RESIDUAL_STENCIL {
        return Err(Error::invalid(format!(
            "residual grid needs at least {RESIDUAL_STENCIL} points, got {}",
            grid.len()
        )));
    }
    let phase = grid
        .iter()
        .map(|&t| Ok((pulse.chirp().eval(t)? - model.eval(t)?.omega_ab) * t))
        .collect::<Result<Vec<_>>>()?;
    let dphase = differentiate(grid, &phase, RESIDUAL_STENCIL);
    let sign = model.sign_ab.value();
    let mut values = Vec::with_capacity(grid.len());
    let mut sup: f64 = 0.0;
    for (&t, d) in grid.iter().zip(dphase) {
        let rate = tau_rate(model, pulse, t)?;
        if !(rate > 0.0) {
            values.push(f64::NAN);
            continue;
        }
        let s = model.eval(t)?;
        let (fa, fb) = drive_terms(&s, pulse.carrier_phase(t)?, t)?;
        let r = d / rate + sign * (fa - fb);
        sup = sup.max(r.abs());
        values.push(r);
    }
    Ok(ChirpResidual {
        t: grid.to_vec(),
        values,
        sup,
    })
}
