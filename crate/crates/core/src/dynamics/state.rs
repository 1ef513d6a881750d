use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which set of expansion coefficients an amplitude pair refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `c`: lab time.
    Lab,
    /// `a`: the same coefficients parameterized by tau.
    Tau,
    /// `b`: tau-frame coefficients after the diagonal phase rotation.
    Rabi,
}

/// A two-level state in a declared frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub first: Complex64,
    pub second: Complex64,
    pub frame: Frame,
}

impl Amplitudes {
    pub fn new(first: Complex64, second: Complex64, frame: Frame) -> Self {
        Amplitudes {
            first,
            second,
            frame,
        }
    }

    /// All population in the first level.
    pub fn ground(frame: Frame) -> Self {
        Amplitudes::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), frame)
    }

    pub fn in_frame(self, frame: Frame) -> Self {
        Amplitudes { frame, ..self }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.first.norm_sqr() + self.second.norm_sqr()
    }

    pub fn populations(&self) -> (f64, f64) {
        (self.first.norm_sqr(), self.second.norm_sqr())
    }

    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        let drift = (self.norm_sqr() - 1.0).abs();
        if drift > tol {
            return Err(Error::invalid(format!(
                "initial state must be normalized (|norm^2 - 1| = {drift:e})"
            )));
        }
        Ok(())
    }

    pub(crate) fn to_real(self) -> [f64; 4] {
        [self.first.re, self.first.im, self.second.re, self.second.im]
    }

    pub(crate) fn from_real(y: &[f64; 4], frame: Frame) -> Self {
        Amplitudes::new(
            Complex64::new(y[0], y[1]),
            Complex64::new(y[2], y[3]),
            frame,
        )
    }
}

/// Which equation produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraceKind {
    #[serde(rename = "lab")]
    Lab,
    #[serde(rename = "tau-full")]
    TauFull,
    #[serde(rename = "tau-rwa")]
    TauRwa,
    #[serde(rename = "rabi-b")]
    Rabi,
}

impl TraceKind {
    pub const ALL: [TraceKind; 4] = [
        TraceKind::Lab,
        TraceKind::TauFull,
        TraceKind::TauRwa,
        TraceKind::Rabi,
    ];

    pub fn frame(self) -> Frame {
        match self {
            TraceKind::Lab => Frame::Lab,
            TraceKind::TauFull | TraceKind::TauRwa => Frame::Tau,
            TraceKind::Rabi => Frame::Rabi,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TraceKind::Lab => "lab",
            TraceKind::TauFull => "tau-full",
            TraceKind::TauRwa => "tau-rwa",
            TraceKind::Rabi => "rabi-b",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        TraceKind::ALL
            .into_iter()
            .find(|k| k.name() == name.trim())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown frame `{name}` (expected lab, tau-full, tau-rwa or rabi-b)"
                ))
            })
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampled evolution. `tau` is NaN where no tau map was attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub kind: TraceKind,
    pub t: Vec<f64>,
    pub tau: Vec<f64>,
    pub amplitudes: Vec<[Complex64; 2]>,
    pub field: Vec<f64>,
    pub chirp: Vec<f64>,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "t", "tau", "re_1", "im_1", "re_2", "im_2", "pop_1", "pop_2", "field", "chirp",
];

impl Trace {
    pub(crate) fn empty(kind: TraceKind) -> Self {
        Trace {
            kind,
            t: Vec::new(),
            tau: Vec::new(),
            amplitudes: Vec::new(),
            field: Vec::new(),
            chirp: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn state(&self, i: usize) -> Amplitudes {
        let [a, b] = self.amplitudes[i];
        Amplitudes::new(a, b, self.kind.frame())
    }

    pub fn last_state(&self) -> Amplitudes {
        self.state(self.len() - 1)
    }

    pub fn populations(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.amplitudes
            .iter()
            .map(|[a, b]| (a.norm_sqr(), b.norm_sqr()))
    }

    pub fn pop_second(&self) -> Vec<f64> {
        self.populations().map(|(_, p)| p).collect()
    }

    /// Largest `|P_1 + P_2 - 1|` over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.populations()
            .map(|(p, q)| (p + q - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The independent coordinate the trace was integrated in.
    pub fn coordinate(&self) -> &[f64] {
        match self.kind {
            TraceKind::Lab => &self.t,
            _ => &self.tau,
        }
    }

    /// Check the trace invariants: increasing coordinates, populations in
    /// `[0, 1]` and summing to one, each within `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let coord = self.coordinate();
        if let Some(w) = coord.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(format!(
                "trace coordinates not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        for (i, (p, q)) in self.populations().enumerate() {
            let bad = |x: f64| x < -tol || x > 1.0 + tol;
            if bad(p) || bad(q) || (p + q - 1.0).abs() > tol {
                return Err(Error::invalid(format!(
                    "sample {i}: populations ({p}, {q}) violate unitarity at tolerance {tol:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        self.write_records(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_records(&mut w).expect("writing to memory");
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf8 csv")
    }

    fn write_records<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        w.write_record(CSV_COLUMNS)?;
        for i in 0..self.len() {
            let [a, b] = self.amplitudes[i];
            let row = [
                self.t[i],
                self.tau[i],
                a.re,
                a.im,
                b.re,
                b.im,
                a.norm_sqr(),
                b.norm_sqr(),
                self.field[i],
                self.chirp[i],
            ];
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path, kind: TraceKind) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, kind).map_err(|e| match e {
            Error::Invalid(msg) => Error::io(path, msg),
            other => other,
        })
    }

    pub fn parse_csv(text: &str, kind: TraceKind) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| Error::invalid(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
            return Err(Error::invalid(format!(
                "unexpected trace header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut trace = Trace::empty(kind);
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::invalid(e.to_string()))?;
            let v = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("cannot parse `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            trace.t.push(v[0]);
            trace.tau.push(v[1]);
            trace
                .amplitudes
                .push([Complex64::new(v[2], v[3]), Complex64::new(v[4], v[5])]);
            trace.field.push(v[8]);
            trace.chirp.push(v[9]);
        }
        Ok(trace)
    }
}
