//! Embedded explicit Runge-Kutta pairs with PI step-size control and an
//! externally supplied step ceiling.

use crate::error::{Error, Result};

/// Explicit embedded Runge-Kutta pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Dormand-Prince 5(4), first-same-as-last.
    DormandPrince54,
    /// Fehlberg 7(8), eighth-order solution propagated.
    #[default]
    Fehlberg78,
}

struct Tableau {
    c: &'static [f64],
    a: &'static [&'static [f64]],
    b: &'static [f64],
    /// propagated minus embedded weights
    e: &'static [f64],
    /// order of the embedded solution
    low_order: i32,
    fsal: bool,
}

const DP54: Tableau = Tableau {
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
        ],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ],
    b: &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ],
    e: &[
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ],
    low_order: 4,
    fsal: true,
};

// Fehlberg, NASA TR R-287 (1968), table X.
const RKF78: Tableau = Tableau {
    c: &[
        0.0,
        2.0 / 27.0,
        1.0 / 9.0,
        1.0 / 6.0,
        5.0 / 12.0,
        0.5,
        5.0 / 6.0,
        1.0 / 6.0,
        2.0 / 3.0,
        1.0 / 3.0,
        1.0,
        0.0,
        1.0,
    ],
    a: &[
        &[],
        &[2.0 / 27.0],
        &[1.0 / 36.0, 1.0 / 12.0],
        &[1.0 / 24.0, 0.0, 1.0 / 8.0],
        &[5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0],
        &[1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0],
        &[
            -25.0 / 108.0,
            0.0,
            0.0,
            125.0 / 108.0,
            -65.0 / 27.0,
            125.0 / 54.0,
        ],
        &[
            31.0 / 300.0,
            0.0,
            0.0,
            0.0,
            61.0 / 225.0,
            -2.0 / 9.0,
            13.0 / 900.0,
        ],
        &[
            2.0,
            0.0,
            0.0,
            -53.0 / 6.0,
            704.0 / 45.0,
            -107.0 / 9.0,
            67.0 / 90.0,
            3.0,
        ],
        &[
            -91.0 / 108.0,
            0.0,
            0.0,
            23.0 / 108.0,
            -976.0 / 135.0,
            311.0 / 54.0,
            -19.0 / 60.0,
            17.0 / 6.0,
            -1.0 / 12.0,
        ],
        &[
            2383.0 / 4100.0,
            0.0,
            0.0,
            -341.0 / 164.0,
            4496.0 / 1025.0,
            -301.0 / 82.0,
            2133.0 / 4100.0,
            45.0 / 82.0,
            45.0 / 164.0,
            18.0 / 41.0,
        ],
        &[
            3.0 / 205.0,
            0.0,
            0.0,
            0.0,
            0.0,
            -6.0 / 41.0,
            -3.0 / 205.0,
            -3.0 / 41.0,
            3.0 / 41.0,
            6.0 / 41.0,
            0.0,
        ],
        &[
            -1777.0 / 4100.0,
            0.0,
            0.0,
            -341.0 / 164.0,
            4496.0 / 1025.0,
            -289.0 / 82.0,
            2193.0 / 4100.0,
            51.0 / 82.0,
            33.0 / 164.0,
            12.0 / 41.0,
            0.0,
            1.0,
        ],
    ],
    b: &[
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        34.0 / 105.0,
        9.0 / 35.0,
        9.0 / 35.0,
        9.0 / 280.0,
        9.0 / 280.0,
        0.0,
        41.0 / 840.0,
        41.0 / 840.0,
    ],
    e: &[
        -41.0 / 840.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -41.0 / 840.0,
        41.0 / 840.0,
        41.0 / 840.0,
    ],
    low_order: 7,
    fsal: false,
};

impl Method {
    fn tableau(self) -> &'static Tableau {
        match self {
            Method::DormandPrince54 => &DP54,
            Method::Fehlberg78 => &RKF78,
        }
    }
}

const MAX_STAGES: usize = 13;
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// A first-order system `dy/dx = f(x, y)` on `N` real components.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> Result<[f64; N]>;

    /// Upper bound on the step taken from `x`; `f64::INFINITY` for none.
    fn max_step(&self, _x: f64, _y: &[f64; N]) -> Result<f64> {
        Ok(f64::INFINITY)
    }

    /// Name of the independent variable, used in failure reports.
    fn coordinate(&self) -> &'static str {
        "x"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOptions {
    /// Absolute and relative tolerance per step.
    pub tol: f64,
    pub sampling: Sampling,
    pub max_steps: usize,
    pub method: Method,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            tol: 1e-9,
            sampling: Sampling::Steps,
            max_steps: 20_000_000,
            method: Method::default(),
        }
    }
}

/// Which points an integration reports besides its start.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Sampling {
    /// Every accepted step.
    #[default]
    Steps,
    /// `n` evenly spaced points after the start, the last one at the end.
    Uniform(usize),
    /// The given increasing points, followed by the end if not included.
    At(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn stage_input<const N: usize>(
    y: &[f64; N],
    h: f64,
    coeffs: &[f64],
    k: &[[f64; N]; MAX_STAGES],
) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                acc += c * k[j][i];
            }
        }
        *o += h * acc;
    }
    out
}

/// Integrate from `x0` to `x_end`, calling `observe` at the start, at every
/// accepted step (or every requested sample), and at the end.
pub fn integrate<S, const N: usize, O>(
    sys: &S,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &StepOptions,
    mut observe: O,
) -> Result<([f64; N], StepStats)>
where
    S: OdeSystem<N>,
    O: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if !(opts.tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be > 0, got {}",
            opts.tol
        )));
    }
    if !(x_end > x0) {
        return Err(Error::invalid(format!(
            "integration span [{x0}, {x_end}] is empty"
        )));
    }
    let span = x_end - x0;
    let targets: Vec<f64> = match &opts.sampling {
        Sampling::Uniform(n) if *n >= 1 => (1..=*n)
            .map(|i| {
                if i == *n {
                    x_end
                } else {
                    x0 + span * i as f64 / *n as f64
                }
            })
            .collect(),
        Sampling::At(points) => {
            if let Some(bad) = points
                .windows(2)
                .find(|w| !(w[1] > w[0]))
                .map(|w| w[1])
                .or_else(|| points.iter().copied().find(|p| !(*p > x0 && *p <= x_end)))
            {
                return Err(Error::invalid(format!(
                    "output point {bad} is not increasing inside ({x0}, {x_end}]"
                )));
            }
            let mut t = points.clone();
            if t.last() != Some(&x_end) {
                t.push(x_end);
            }
            t
        }
        _ => vec![x_end],
    };
    let record_steps = opts.sampling == Sampling::Steps;
    let tol = opts.tol;
    let mut stats = StepStats::default();
    let mut x = x0;
    let mut y = y0;
    observe(x, &y)?;

    let tab = opts.method.tableau();
    let stages = tab.c.len();
    let alpha = 1.0 / f64::from(tab.low_order + 1) - 0.75 * BETA;
    let reject_exp = -1.0 / f64::from(tab.low_order + 1);
    let mut k = [[0.0; N]; MAX_STAGES];
    k[0] = sys.rhs(x, &y)?;
    stats.evaluations += 1;
    let mut h = (span * 1e-3).min(sys.max_step(x, &y)?).max(span * 1e-12);
    let mut err_prev: f64 = 1e-4;
    let mut target_idx = 0;
    let mut rejected_last = false;

    while target_idx < targets.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration {
                coordinate: sys.coordinate(),
                at: x,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let target = targets[target_idx];
        let ceiling = sys.max_step(x, &y)?;
        let floor = span * 1e-9;
        h = h.min(if ceiling.is_finite() {
            ceiling.max(floor)
        } else {
            ceiling
        });
        let h_natural = h;
        let mut hits_target = false;
        if x + h >= target || target - (x + h) < 1e-12 * span {
            h = target - x;
            hits_target = true;
        }
        if h <= 16.0 * f64::EPSILON * x.abs().max(span) {
            return Err(Error::Integration {
                coordinate: sys.coordinate(),
                at: x,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        let x_new = if hits_target { target } else { x + h };
        for j in 1..stages {
            let xj = if tab.c[j] == 1.0 {
                x_new
            } else {
                x + tab.c[j] * h
            };
            k[j] = sys.rhs(xj, &stage_input(&y, h, tab.a[j], &k))?;
        }
        stats.evaluations += stages - 1;
        let y_new = stage_input(&y, h, tab.b, &k);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, c) in tab.e.iter().enumerate() {
                if *c != 0.0 {
                    e += c * k[j][i];
                }
            }
            let scale = tol + tol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integration {
                coordinate: sys.coordinate(),
                at: x,
                reason: "non-finite error estimate".into(),
            });
        }

        if err <= 1.0 {
            stats.accepted += 1;
            x = x_new;
            y = y_new;
            k[0] = if tab.fsal {
                k[stages - 1]
            } else {
                stats.evaluations += 1;
                sys.rhs(x, &y)?
            };
            if hits_target {
                target_idx += 1;
                observe(x, &y)?;
            } else if record_steps {
                observe(x, &y)?;
            }
            let mut factor = SAFETY * err.max(1e-10).powf(-alpha) * err_prev.powf(BETA);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if rejected_last {
                factor = factor.min(1.0);
            }
            // a step shortened to hit a target says nothing about the natural step
            h = if hits_target && factor >= 1.0 {
                (h * factor).max(h_natural)
            } else {
                h * factor
            };
            err_prev = err.max(1e-4);
            rejected_last = false;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(reject_exp)).max(MIN_FACTOR);
            rejected_last = true;
        }
    }
    Ok((y, stats))
}
