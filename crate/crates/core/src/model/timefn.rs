//! Scalar functions of time used for envelopes, chirps, level splittings and
//! dipole moments.
//!
//! Analytic kinds are defined on the whole real line. Tabulated functions are
//! defined only on `[times[0], times[last]]` and refuse to extrapolate.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Interpolation order for tabulated samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

impl Interpolation {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(Interpolation::Linear),
            3 => Ok(Interpolation::Cubic),
            other => Err(Error::invalid(format!(
                "interpolation order must be 1 or 3, got {other}"
            ))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Interpolation::Linear => 1,
            Interpolation::Cubic => 3,
        }
    }
}

/// Samples with a not-a-knot cubic (or linear) interpolant and its exact
/// antiderivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    times: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    /// Second derivatives at the nodes; all zero for linear interpolation.
    curvature: Vec<f64>,
    /// Running integral of the interpolant from `times[0]` to each node.
    cumulative: Vec<f64>,
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "table has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::invalid("table needs at least 2 samples"));
        }
        if let Some(bad) = times.iter().chain(&values).find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "table contains non-finite entry {bad}"
            )));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "table times must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        let curvature = match interpolation {
            Interpolation::Linear => vec![0.0; times.len()],
            Interpolation::Cubic => spline_curvature(&times, &values),
        };
        let mut cumulative = Vec::with_capacity(times.len());
        cumulative.push(0.0);
        for j in 0..times.len() - 1 {
            let h = times[j + 1] - times[j];
            let piece = 0.5 * h * (values[j] + values[j + 1])
                - h * h * h * (curvature[j] + curvature[j + 1]) / 24.0;
            cumulative.push(cumulative[j] + piece);
        }
        Ok(Table {
            times,
            values,
            interpolation,
            curvature,
            cumulative,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { t, lo, hi });
        }
        let idx = self.times.partition_point(|&x| x <= t);
        Ok(idx.saturating_sub(1).min(self.times.len() - 2))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let j = self.locate(t)?;
        let (x0, x1) = (self.times[j], self.times[j + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let (m0, m1) = (self.curvature[j], self.curvature[j + 1]);
        Ok(a * self.values[j]
            + b * self.values[j + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        let j = self.locate(t)?;
        let (x0, x1) = (self.times[j], self.times[j + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let (m0, m1) = (self.curvature[j], self.curvature[j + 1]);
        Ok(
            (self.values[j + 1] - self.values[j]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                + (3.0 * b * b - 1.0) / 6.0 * h * m1,
        )
    }

    /// Integral of the interpolant from `times[0]` to `t`.
    pub fn integral_from_start(&self, t: f64) -> Result<f64> {
        let j = self.locate(t)?;
        let (x0, x1) = (self.times[j], self.times[j + 1]);
        let h = x1 - x0;
        let b = (t - x0) / h;
        let a_rem = 1.0 - b;
        let (m0, m1) = (self.curvature[j], self.curvature[j + 1]);
        let lin = h * (self.values[j] * (b - 0.5 * b * b) + self.values[j + 1] * 0.5 * b * b);
        let cubic0 = (0.25 * (1.0 - a_rem.powi(4)) - b + 0.5 * b * b) * m0;
        let cubic1 = (0.25 * b.powi(4) - 0.5 * b * b) * m1;
        Ok(self.cumulative[j] + lin + h * h * h / 6.0 * (cubic0 + cubic1))
    }
}

/// Second derivatives of the not-a-knot cubic spline through the samples
/// (Thomas algorithm on the standard tridiagonal system, with the end
/// unknowns eliminated through third-derivative continuity at the second
/// and second-to-last nodes).
fn spline_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope = |i: usize| (y[i + 1] - y[i]) / h[i];
    if n == 3 {
        // one parabola through all three points
        let c = (slope(1) - slope(0)) / (0.5 * (h[0] + h[1]));
        return vec![c; 3];
    }
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        lower[i] = h[i - 1] / 6.0;
        diag[i] = (h[i - 1] + h[i]) / 3.0;
        upper[i] = h[i] / 6.0;
        rhs[i] = slope(i) - slope(i - 1);
    }
    // M0 = M1 (1 + h0/h1) - M2 h0/h1
    let r = h[0] / h[1];
    diag[1] += lower[1] * (1.0 + r);
    upper[1] -= lower[1] * r;
    // M_{n-1} = M_{n-2} (1 + h_{n-2}/h_{n-3}) - M_{n-3} h_{n-2}/h_{n-3}
    let r = h[n - 2] / h[n - 3];
    diag[n - 2] += upper[n - 2] * (1.0 + r);
    lower[n - 2] -= upper[n - 2] * r;
    for i in 2..n - 1 {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 2] = rhs[n - 2] / diag[n - 2];
    for i in (1..n - 2).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    let r = h[0] / h[1];
    m[0] = m[1] * (1.0 + r) - m[2] * r;
    let r = h[n - 2] / h[n - 3];
    m[n - 1] = m[n - 2] * (1.0 + r) - m[n - 3] * r;
    m
}

/// A real-valued function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFunction {
    Constant(f64),
    /// `height * exp(-(t - center)^2 / (2 width^2))`; `width` is the standard deviation.
    Gaussian {
        center: f64,
        width: f64,
        height: f64,
    },
    /// `height * sin^2(pi (t - start) / duration)` on `[start, start + duration]`, zero elsewhere.
    SinSquared {
        start: f64,
        duration: f64,
        height: f64,
    },
    Tabulated(Table),
    /// `factor * inner(t)`.
    Scaled {
        factor: f64,
        inner: Box<TimeFunction>,
    },
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant(value)
    }

    pub fn gaussian(center: f64, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() || !height.is_finite() {
            return Err(Error::invalid(format!(
                "gaussian needs finite center/height and width > 0 (got width {width})"
            )));
        }
        Ok(TimeFunction::Gaussian {
            center,
            width,
            height,
        })
    }

    pub fn sin_squared(start: f64, duration: f64, height: f64) -> Result<Self> {
        if !(duration > 0.0) || !start.is_finite() || !height.is_finite() {
            return Err(Error::invalid(format!(
                "sin-squared needs finite start/height and duration > 0 (got duration {duration})"
            )));
        }
        Ok(TimeFunction::SinSquared {
            start,
            duration,
            height,
        })
    }

    pub fn tabulated(
        times: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        Table::new(times, values, interpolation).map(TimeFunction::Tabulated)
    }

    pub fn scaled(factor: f64, inner: TimeFunction) -> Self {
        TimeFunction::Scaled {
            factor,
            inner: Box::new(inner),
        }
    }

    /// Domain on which evaluation succeeds; `None` means the whole line.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            TimeFunction::Tabulated(table) => Some(table.domain()),
            TimeFunction::Scaled { inner, .. } => inner.domain(),
            _ => None,
        }
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        match self.domain() {
            None => true,
            Some((a, b)) => a <= lo && hi <= b,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            TimeFunction::Constant(v) => Ok(*v),
            TimeFunction::Gaussian {
                center,
                width,
                height,
            } => {
                let z = (t - center) / width;
                Ok(height * (-0.5 * z * z).exp())
            }
            TimeFunction::SinSquared {
                start,
                duration,
                height,
            } => {
                let u = t - start;
                if u <= 0.0 || u >= *duration {
                    Ok(0.0)
                } else {
                    let s = (PI * u / duration).sin();
                    Ok(height * s * s)
                }
            }
            TimeFunction::Tabulated(table) => table.eval(t),
            TimeFunction::Scaled { factor, inner } => Ok(factor * inner.eval(t)?),
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            TimeFunction::Constant(_) => Ok(0.0),
            TimeFunction::Gaussian {
                center,
                width,
                height,
            } => {
                let z = (t - center) / width;
                Ok(-height * z / width * (-0.5 * z * z).exp())
            }
            TimeFunction::SinSquared {
                start,
                duration,
                height,
            } => {
                let u = t - start;
                if u <= 0.0 || u >= *duration {
                    Ok(0.0)
                } else {
                    Ok(height * PI / duration * (2.0 * PI * u / duration).sin())
                }
            }
            TimeFunction::Tabulated(table) => table.derivative(t),
            TimeFunction::Scaled { factor, inner } => Ok(factor * inner.derivative(t)?),
        }
    }

    /// An antiderivative. Only differences are meaningful; the reference
    /// point depends on the kind.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        match self {
            TimeFunction::Constant(v) => Ok(v * t),
            TimeFunction::Gaussian {
                center,
                width,
                height,
            } => {
                let z = (t - center) / (width * std::f64::consts::SQRT_2);
                Ok(height * width * (0.5 * PI).sqrt() * libm::erf(z))
            }
            TimeFunction::SinSquared {
                start,
                duration,
                height,
            } => {
                let u = (t - start).clamp(0.0, *duration);
                Ok(height * (0.5 * u - duration / (4.0 * PI) * (2.0 * PI * u / duration).sin()))
            }
            TimeFunction::Tabulated(table) => table.integral_from_start(t),
            TimeFunction::Scaled { factor, inner } => Ok(factor * inner.antiderivative(t)?),
        }
    }

    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.antiderivative(b)? - self.antiderivative(a)?)
    }
}

/// Read a two-column whitespace-separated sample table. Blank lines and
/// anything after `#` are ignored.
pub fn read_sample_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sample_table(&text).map_err(|e| match e {
        Error::Invalid(msg) => Error::io(path, msg),
        other => other,
    })
}

pub fn parse_sample_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            let tok = tok.ok_or_else(|| {
                Error::invalid(format!("line {}: expected two columns", lineno + 1))
            })?;
            tok.parse::<f64>().map_err(|_| {
                Error::invalid(format!(
                    "line {}: cannot parse `{tok}` as a number",
                    lineno + 1
                ))
            })
        };
        let t = parse(cols.next())?;
        let v = parse(cols.next())?;
        if cols.next().is_some() {
            return Err(Error::invalid(format!(
                "line {}: expected exactly two columns",
                lineno + 1
            )));
        }
        times.push(t);
        values.push(v);
    }
    Ok((times, values))
}

pub fn format_sample_table(header: &str, times: &[f64], values: &[f64]) -> String {
    let mut out = String::new();
    for line in header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    for (t, v) in times.iter().zip(values) {
        let _ = writeln!(out, "{t:e} {v:e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_scaled() {
        let f = TimeFunction::scaled(2.0, TimeFunction::constant(0.25));
        assert_eq!(f.eval(123.0).unwrap(), 0.5);
        assert_eq!(f.derivative(1.0).unwrap(), 0.0);
        assert!((f.integral(1.0, 3.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_node_values_are_exact() {
        let t = vec![0.0, 0.3, 1.1, 2.0, 2.5];
        let v = vec![1.0, -0.7, 0.123456789, 4.0, 3.3];
        for order in [Interpolation::Linear, Interpolation::Cubic] {
            let f = TimeFunction::tabulated(t.clone(), v.clone(), order).unwrap();
            for (ti, vi) in t.iter().zip(&v) {
                assert_eq!(f.eval(*ti).unwrap(), *vi);
            }
        }
    }

    #[test]
    fn tabulated_refuses_to_extrapolate() {
        let f =
            TimeFunction::tabulated(vec![0.0, 1.0], vec![0.0, 1.0], Interpolation::Linear).unwrap();
        assert!(matches!(f.eval(1.0 + 1e-12), Err(Error::Domain { .. })));
        assert!(matches!(f.eval(-1e-12), Err(Error::Domain { .. })));
        assert!(matches!(f.eval(f64::NAN), Err(Error::Domain { .. })));
    }

    #[test]
    fn table_validation() {
        assert!(Table::new(vec![0.0], vec![1.0], Interpolation::Cubic).is_err());
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 2.0], Interpolation::Cubic).is_err());
        assert!(Table::new(vec![0.0, 1.0], vec![1.0], Interpolation::Cubic).is_err());
        assert!(Interpolation::from_order(2).is_err());
    }

    #[test]
    fn cubic_spline_reproduces_straight_lines() {
        let t: Vec<f64> = (0..7).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = TimeFunction::tabulated(t, v, Interpolation::Cubic).unwrap();
        for x in [0.1, 0.77, 2.9] {
            assert!((f.eval(x).unwrap() - (3.0 - 2.0 * x)).abs() < 1e-14);
            assert!((f.derivative(x).unwrap() + 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn spline_integral_matches_fine_trapezoid() {
        let t: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).powf(1.2)).collect();
        let v: Vec<f64> = t.iter().map(|x| (1.3 * x).sin()).collect();
        let f = TimeFunction::tabulated(t.clone(), v, Interpolation::Cubic).unwrap();
        let (a, b) = (0.2, *t.last().unwrap() - 0.1);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut trap = 0.5 * (f.eval(a).unwrap() + f.eval(b).unwrap());
        for i in 1..n {
            trap += f.eval(a + i as f64 * h).unwrap();
        }
        trap *= h;
        assert!((f.integral(a, b).unwrap() - trap).abs() < 1e-9);
    }

    #[test]
    fn analytic_antiderivatives_match_derivatives() {
        let fns = [
            TimeFunction::gaussian(1.0, 0.7, 0.9).unwrap(),
            TimeFunction::sin_squared(0.5, 2.0, 1.0).unwrap(),
        ];
        for f in &fns {
            for t in [0.3, 0.9, 1.4, 2.2] {
                let h = 1e-5;
                let d = (f.antiderivative(t + h).unwrap() - f.antiderivative(t - h).unwrap())
                    / (2.0 * h);
                assert!((d - f.eval(t).unwrap()).abs() < 1e-8, "{f:?} at {t}");
                let dd = (f.eval(t + h).unwrap() - f.eval(t - h).unwrap()) / (2.0 * h);
                assert!((dd - f.derivative(t).unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sample_table_text_round_trip() {
        let text = "# header\n0 1.5\n\n 1.0\t2.5 # trailing\n2e0 -3\n";
        let (t, v) = parse_sample_table(text).unwrap();
        assert_eq!(t, vec![0.0, 1.0, 2.0]);
        assert_eq!(v, vec![1.5, 2.5, -3.0]);
        let again = parse_sample_table(&format_sample_table("x", &t, &v)).unwrap();
        assert_eq!(again, (t, v));
        assert!(parse_sample_table("1 2 3").is_err());
        assert!(parse_sample_table("1 abc").is_err());
    }
}
