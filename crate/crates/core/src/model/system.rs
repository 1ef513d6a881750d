use crate::error::{Error, Result};
use crate::model::TimeFunction;

/// Sign of `E_alpha - E_beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_int(value: i64) -> Result<Self> {
        match value {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::invalid(format!(
                "sign_ab must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Level structure and induced dipole functions of the two-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub omega_ab: TimeFunction,
    pub sign_ab: Sign,
    pub mu_aa: TimeFunction,
    pub mu_bb: TimeFunction,
    pub mu_ab: TimeFunction,
}

/// Instantaneous values of a [`SystemModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSample {
    pub omega_ab: f64,
    pub sign_ab: Sign,
    pub mu_aa: f64,
    pub mu_bb: f64,
    pub mu_ab: f64,
}

impl SystemSample {
    /// Fails when the transition moment vanishes, which the diagonal
    /// drive terms and the tau map cannot tolerate.
    pub fn require_coupling(&self, t: f64) -> Result<()> {
        if self.mu_ab == 0.0 {
            Err(Error::DegenerateCoupling { t })
        } else {
            Ok(())
        }
    }
}

impl SystemModel {
    pub fn new(
        omega_ab: TimeFunction,
        sign_ab: Sign,
        mu_aa: TimeFunction,
        mu_bb: TimeFunction,
        mu_ab: TimeFunction,
    ) -> Self {
        SystemModel {
            omega_ab,
            sign_ab,
            mu_aa,
            mu_bb,
            mu_ab,
        }
    }

    /// All-constant model.
    pub fn constant(omega_ab: f64, sign_ab: Sign, mu_aa: f64, mu_bb: f64, mu_ab: f64) -> Self {
        SystemModel::new(
            TimeFunction::constant(omega_ab),
            sign_ab,
            TimeFunction::constant(mu_aa),
            TimeFunction::constant(mu_bb),
            TimeFunction::constant(mu_ab),
        )
    }

    /// Dipoles induced by the cycle-averaged field strength:
    /// `mu_ij(t) = kappa_ij * f0 * envelope(t)`.
    ///
    /// This is a modeling convenience. The instantaneous `|F(t)|` vanishes
    /// twice per carrier cycle and would make `mu_ab` degenerate, so the
    /// envelope magnitude `f0 * m(t)` is used instead.
    pub fn with_induced_dipoles(
        omega_ab: TimeFunction,
        sign_ab: Sign,
        kappa: [f64; 3],
        f0: f64,
        envelope: &TimeFunction,
    ) -> Self {
        let induced = |k: f64| TimeFunction::scaled(k * f0, envelope.clone());
        SystemModel::new(
            omega_ab,
            sign_ab,
            induced(kappa[0]),
            induced(kappa[1]),
            induced(kappa[2]),
        )
    }

    /// Evaluate all five model values at `t`.
    pub fn eval(&self, t: f64) -> Result<SystemSample> {
        let omega_ab = self.omega_ab.eval(t)?;
        if !(omega_ab > 0.0) {
            return Err(Error::LevelCrossing { t, value: omega_ab });
        }
        Ok(SystemSample {
            omega_ab,
            sign_ab: self.sign_ab,
            mu_aa: self.mu_aa.eval(t)?,
            mu_bb: self.mu_bb.eval(t)?,
            mu_ab: self.mu_ab.eval(t)?,
        })
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        [&self.omega_ab, &self.mu_aa, &self.mu_bb, &self.mu_ab]
            .iter()
            .all(|f| f.covers(lo, hi))
    }

    /// True when the diagonal dipoles are the same function, so the
    /// diagonal drive terms cancel identically.
    pub fn is_symmetric(&self) -> bool {
        self.mu_aa == self.mu_bb
    }
}
