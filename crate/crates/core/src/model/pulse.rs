use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TimeFunction;

/// How phases of time-dependent frequencies are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseConvention {
    /// `omega(t) * t`, the instantaneous frequency times absolute time.
    #[default]
    Product,
    /// `omega(t0) * t0 + integral_{t0}^{t} omega`, an accumulated phase that
    /// agrees with `Product` for constant frequencies.
    Integral,
}

impl PhaseConvention {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "product" => Ok(PhaseConvention::Product),
            "integral" => Ok(PhaseConvention::Integral),
            other => Err(Error::invalid(format!(
                "phase convention must be `product` or `integral`, got `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhaseConvention::Product => "product",
            PhaseConvention::Integral => "integral",
        }
    }

    /// Phase accumulated by frequency `freq` at time `t`; `t_ref` anchors
    /// the integral convention.
    pub fn phase(self, freq: &TimeFunction, t_ref: f64, t: f64) -> Result<f64> {
        match self {
            PhaseConvention::Product => Ok(freq.eval(t)? * t),
            PhaseConvention::Integral => Ok(freq.eval(t_ref)? * t_ref + freq.integral(t_ref, t)?),
        }
    }

    /// Time derivative of [`PhaseConvention::phase`].
    pub fn phase_rate(self, freq: &TimeFunction, t: f64) -> Result<f64> {
        match self {
            PhaseConvention::Product => Ok(freq.eval(t)? + freq.derivative(t)? * t),
            PhaseConvention::Integral => freq.eval(t),
        }
    }
}

/// How `dF/dt` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Full chain rule including `dm/dt` and `d(phase)/dt`.
    #[default]
    Exact,
    /// `-F0 m omega sin(phase)`, valid when the envelope varies slowly
    /// compared with the carrier.
    EnvelopeSlow,
}

/// Driving pulse `F(t) = F0 m(t) cos(phase(t))` on `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    f0: f64,
    envelope: TimeFunction,
    chirp: TimeFunction,
    t_start: f64,
    t_end: f64,
    convention: PhaseConvention,
}

/// Samples used when validating the envelope and chirp bounds.
pub const VALIDATION_SAMPLES: usize = 10_000;

impl PulseSpec {
    /// Build and validate a pulse. `f0 = 0` is accepted for field-free
    /// reference runs; negative amplitudes are not.
    pub fn new(
        f0: f64,
        envelope: TimeFunction,
        chirp: TimeFunction,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self> {
        let pulse = PulseSpec {
            f0,
            envelope,
            chirp,
            t_start,
            t_end,
            convention: PhaseConvention::Product,
        };
        pulse.validate()?;
        Ok(pulse)
    }

    pub fn with_phase_convention(mut self, convention: PhaseConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_chirp(&self, chirp: TimeFunction) -> Result<Self> {
        let pulse = PulseSpec {
            chirp,
            ..self.clone()
        };
        pulse.validate()?;
        Ok(pulse)
    }

    pub fn with_f0(&self, f0: f64) -> Result<Self> {
        let pulse = PulseSpec { f0, ..self.clone() };
        pulse.validate()?;
        Ok(pulse)
    }

    fn validate(&self) -> Result<()> {
        if !self.f0.is_finite() || self.f0 < 0.0 {
            return Err(Error::invalid(format!(
                "field amplitude must satisfy F0 > 0 (F0 = 0 only for field-free runs), got {}",
                self.f0
            )));
        }
        if !(self.t_start >= 0.0) || !self.t_start.is_finite() {
            return Err(Error::invalid(format!(
                "t_start must be >= 0, got {}",
                self.t_start
            )));
        }
        if !(self.t_end > self.t_start) || !self.t_end.is_finite() {
            return Err(Error::invalid(format!(
                "t_end must exceed t_start ({} <= {})",
                self.t_end, self.t_start
            )));
        }
        for (name, f) in [("envelope", &self.envelope), ("chirp", &self.chirp)] {
            if !f.covers(self.t_start, self.t_end) {
                return Err(Error::invalid(format!(
                    "{name} does not cover the pulse window [{}, {}]",
                    self.t_start, self.t_end
                )));
            }
        }
        let n = VALIDATION_SAMPLES;
        for i in 0..n {
            let t = self.t_start + (self.t_end - self.t_start) * i as f64 / (n - 1) as f64;
            let m = self.envelope.eval(t)?;
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::invalid(format!(
                    "envelope must satisfy 0 <= m(t) <= 1, got m({t}) = {m}"
                )));
            }
            let w = self.chirp.eval(t)?;
            if !(w > 0.0) {
                return Err(Error::invalid(format!(
                    "chirp must be > 0, got omega({t}) = {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn envelope(&self) -> &TimeFunction {
        &self.envelope
    }

    pub fn chirp(&self) -> &TimeFunction {
        &self.chirp
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn phase_convention(&self) -> PhaseConvention {
        self.convention
    }

    pub(crate) fn check_window(&self, t: f64) -> Result<()> {
        if t >= self.t_start && t <= self.t_end {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                lo: self.t_start,
                hi: self.t_end,
            })
        }
    }

    /// Carrier phase at `t`.
    pub fn carrier_phase(&self, t: f64) -> Result<f64> {
        self.convention.phase(&self.chirp, self.t_start, t)
    }

    /// `F0 m(t) cos(phase(t))`.
    pub fn eval_field(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        Ok(self.f0 * self.envelope.eval(t)? * self.carrier_phase(t)?.cos())
    }

    pub fn eval_field_derivative(&self, t: f64, mode: DerivativeMode) -> Result<f64> {
        self.check_window(t)?;
        let m = self.envelope.eval(t)?;
        let phase = self.carrier_phase(t)?;
        match mode {
            DerivativeMode::EnvelopeSlow => Ok(-self.f0 * m * self.chirp.eval(t)? * phase.sin()),
            DerivativeMode::Exact => {
                let dm = self.envelope.derivative(t)?;
                let rate = self.convention.phase_rate(&self.chirp, t)?;
                Ok(self.f0 * (dm * phase.cos() - m * rate * phase.sin()))
            }
        }
    }
}
