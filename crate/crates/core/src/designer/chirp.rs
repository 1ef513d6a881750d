use crate::designer::residual::chirp_residual;
use crate::error::{Error, Result};
use crate::model::{Interpolation, PhaseConvention, PulseSpec, SystemModel, TimeFunction};
use crate::quadrature::{gauss_legendre, LocalLagrange};
use crate::transform::{grid_points_for, DEFAULT_POINTS_PER_PERIOD};

/// Nodes of the local interpolant used for the iterate inside the integral.
const INTERPOLANT_WIDTH: usize = 8;

/// Settings of the fixed-point chirp solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    /// Relative sup-norm change that ends the iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation factor in `(0, 1]`.
    pub relaxation: f64,
    /// Switch to `relaxation = 0.5` when the change grows twice in a row.
    pub adaptive_relaxation: bool,
    /// Design grid size; derived from `points_per_period` when unset.
    pub grid_points: Option<usize>,
    pub points_per_period: usize,
    /// Fraction of the window near `t = 0` evaluated in scaled form.
    pub near_zero_fraction: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            tol: 1e-8,
            max_iter: 100,
            relaxation: 1.0,
            adaptive_relaxation: true,
            grid_points: None,
            points_per_period: DEFAULT_POINTS_PER_PERIOD,
            near_zero_fraction: 0.01,
        }
    }
}

impl DesignOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!(
                "design tolerance must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::invalid(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        if !(0.0..1.0).contains(&self.near_zero_fraction) {
            return Err(Error::invalid("near_zero_fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// One step of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpIterate {
    pub iteration: usize,
    pub values: Vec<f64>,
    /// Relative sup-norm change from the previous iterate.
    pub change: f64,
    /// Sup-norm of the transformed-frame consistency residual.
    pub residual: f64,
}

/// Outcome of [`design_chirp`].
#[derive(Debug, Clone)]
pub struct ChirpDesign {
    pub grid: Vec<f64>,
    pub chirp: TimeFunction,
    pub pulse: PulseSpec,
    pub history: Vec<ChirpIterate>,
    pub converged: bool,
    pub relaxation: f64,
}

impl ChirpDesign {
    pub fn values(&self) -> &[f64] {
        &self.history.last().expect("at least one iterate").values
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_change(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.change)
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.residual)
    }
}

/// Uniform design grid over the pulse window.
pub fn design_grid(pulse: &PulseSpec, n: usize) -> Result<Vec<f64>> {
    if n < 9 {
        return Err(Error::invalid(format!(
            "design grid needs at least 9 points, got {n}"
        )));
    }
    let (t0, t1) = pulse.window();
    let h = (t1 - t0) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { t1 } else { t0 + h * i as f64 })
        .collect())
}

/// Solve `omega(t) = omega_ab(t) - s (F0/t) int_{t0}^{t} (mu_aa - mu_bb) m omega t1 sin(omega t1) dt1`
/// by Picard iteration from the resonant seed `omega = omega_ab`.
///
/// The chirp carried by `pulse` is ignored. Non-convergence is reported
/// through `converged = false`; an iterate that turns non-positive is an error.
pub fn design_chirp(
    model: &SystemModel,
    pulse: &PulseSpec,
    opts: &DesignOptions,
) -> Result<ChirpDesign> {
    opts.validate()?;
    if pulse.phase_convention() != PhaseConvention::Product {
        return Err(Error::invalid(
            "the chirp design formula uses the product phase convention; set phase_convention = \"product\"",
        ));
    }
    let (t0, t1) = pulse.window();
    if !model.covers(t0, t1) {
        return Err(Error::invalid(
            "system model does not cover the pulse window",
        ));
    }
    let seeded = pulse.with_chirp(model.omega_ab.clone())?;
    let n = match opts.grid_points {
        Some(n) => n,
        None => grid_points_for(model, &seeded, opts.points_per_period)?.max(9),
    };
    let grid = design_grid(pulse, n)?;
    let omega_ab = grid
        .iter()
        .map(|&t| Ok(model.eval(t)?.omega_ab))
        .collect::<Result<Vec<_>>>()?;
    let sign = model.sign_ab.value();
    let f0 = pulse.f0();
    let cutoff = if t0 == 0.0 {
        opts.near_zero_fraction * (t1 - t0)
    } else {
        0.0
    };

    let mut current = omega_ab.clone();
    let mut history: Vec<ChirpIterate> = Vec::new();
    let mut relaxation = opts.relaxation;
    let mut converged = false;
    for iteration in 1..=opts.max_iter {
        let table = LocalLagrange::new(&grid, current.clone(), INTERPOLANT_WIDTH);
        let weighted = |s: f64| -> Result<f64> {
            let sample = model.eval(s)?;
            let w = table.eval(s);
            Ok((sample.mu_aa - sample.mu_bb) * pulse.envelope().eval(s)? * w)
        };
        let mut next = Vec::with_capacity(n);
        let mut running = 0.0;
        for j in 0..n {
            let t = grid[j];
            if j > 0 {
                running += gauss_legendre(grid[j - 1], t, |s| {
                    Ok(weighted(s)? * s * (table.eval(s) * s).sin())
                })?;
            }
            // (1/t) int_0^t g = t^2 int_0^1 u^2 q(t u) du with q(s) = g(s)/s^2
            let correction = if t == 0.0 {
                0.0
            } else if t <= cutoff {
                let mut acc = 0.0;
                for k in 0..j {
                    let (ua, ub) = (k as f64 / j as f64, (k + 1) as f64 / j as f64);
                    acc += gauss_legendre(ua, ub, |u| {
                        let s = t * u;
                        let w = table.eval(s);
                        Ok(u * u * weighted(s)? * w * sinc(w * s))
                    })?;
                }
                -sign * f0 * t * t * acc
            } else {
                -sign * f0 * running / t
            };
            let fresh = omega_ab[j] + correction;
            let value = if relaxation == 1.0 {
                fresh
            } else {
                (1.0 - relaxation) * current[j] + relaxation * fresh
            };
            if !(value > 0.0) {
                return Err(Error::DesignFailure {
                    iteration,
                    t,
                    value,
                });
            }
            next.push(value);
        }
        let scale = next.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let change = next
            .iter()
            .zip(&current)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
            / scale;
        let candidate = pulse.with_chirp(TimeFunction::tabulated(
            grid.clone(),
            next.clone(),
            Interpolation::Cubic,
        )?)?;
        let residual = chirp_residual(model, &candidate, &grid)?.sup;
        let growing = opts.adaptive_relaxation
            && relaxation > 0.5
            && history.len() >= 2
            && change > history[history.len() - 1].change
            && history[history.len() - 1].change > history[history.len() - 2].change;
        history.push(ChirpIterate {
            iteration,
            values: next.clone(),
            change,
            residual,
        });
        current = next;
        if change < opts.tol {
            converged = true;
            break;
        }
        if growing {
            relaxation = 0.5;
        }
    }
    let chirp = TimeFunction::tabulated(grid.clone(), current, Interpolation::Cubic)?;
    let designed = pulse.with_chirp(chirp.clone())?;
    Ok(ChirpDesign {
        grid,
        chirp,
        pulse: designed,
        history,
        converged,
        relaxation,
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
