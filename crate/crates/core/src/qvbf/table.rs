//! Tabulated `Δ(λ)` with shape-preserving cubic Hermite interpolation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Minimum number of samples in a table.
pub const MIN_TABLE_POINTS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("table needs at least {MIN_TABLE_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("table λ values must be strictly increasing (row {0})")]
    NotIncreasing(usize),
    #[error("non-finite table entry at row {0}")]
    NonFinite(usize),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("λ = {lambda} outside table span [{lo}, {hi}]")]
    OutOfRange { lambda: f64, lo: f64, hi: f64 },
}

/// Monotone piecewise-cubic interpolant of `(λ, Δ)` samples.
///
/// Node slopes come from the parabola through each node and its neighbours
/// (one-sided at the ends), then are clamped to `3·min(|s_left|, |s_right|)`
/// wherever the data is locally monotone and zeroed next to flat segments,
/// which rules out overshoot there. Quadratic data is reproduced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTable {
    lambdas: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

fn parabola_slope(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let s0 = (y[1] - y[0]) / h0;
    let s1 = (y[2] - y[1]) / h1;
    match at {
        0 => ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1),
        1 => (h1 * s0 + h0 * s1) / (h0 + h1),
        _ => ((2.0 * h1 + h0) * s1 - h1 * s0) / (h0 + h1),
    }
}

impl DeltaTable {
    pub fn new(samples: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, TableError> {
        let (lambdas, values): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        let n = lambdas.len();
        if n < MIN_TABLE_POINTS {
            return Err(TableError::TooFewPoints(n));
        }
        for i in 0..n {
            if !(lambdas[i].is_finite() && values[i].is_finite()) {
                return Err(TableError::NonFinite(i));
            }
            if i > 0 && lambdas[i] <= lambdas[i - 1] {
                return Err(TableError::NotIncreasing(i));
            }
        }
        let secant = |i: usize| (values[i + 1] - values[i]) / (lambdas[i + 1] - lambdas[i]);
        let mut slopes = vec![0.0; n];
        for (i, slope) in slopes.iter_mut().enumerate() {
            let (base, at) = match i {
                0 => (0, 0),
                i if i == n - 1 => (n - 3, 2),
                i => (i - 1, 1),
            };
            let x = [lambdas[base], lambdas[base + 1], lambdas[base + 2]];
            let y = [values[base], values[base + 1], values[base + 2]];
            let mut d = parabola_slope(x, y, at);
            let left = (i > 0).then(|| secant(i - 1));
            let right = (i + 1 < n).then(|| secant(i));
            match (left, right) {
                (Some(l), Some(r)) if l * r > 0.0 => {
                    d = if d * l <= 0.0 { 0.0 } else { l.signum() * d.abs().min(3.0 * l.abs().min(r.abs())) };
                }
                (Some(l), Some(r)) if l == 0.0 || r == 0.0 => d = 0.0,
                (None, Some(s)) | (Some(s), None) => {
                    if d * s < 0.0 {
                        d = 0.0;
                    } else if d.abs() > 3.0 * s.abs() {
                        d = 3.0 * s;
                    }
                }
                _ => {}
            }
            *slope = d;
        }
        Ok(Self { lambdas, values, slopes })
    }

    /// `(λ_min, λ_max)`.
    pub fn span(&self) -> (f64, f64) {
        (self.lambdas[0], *self.lambdas.last().expect("nonempty"))
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Interpolated `Δ` (order 0) or its first or second derivative.
    pub fn eval(&self, lambda: f64, order: u8) -> Result<f64, TableError> {
        let (lo, hi) = self.span();
        if !(lambda >= lo && lambda <= hi) {
            return Err(TableError::OutOfRange { lambda, lo, hi });
        }
        let i = match self.lambdas.partition_point(|&x| x <= lambda) {
            0 => 0,
            p => (p - 1).min(self.lambdas.len() - 2),
        };
        let h = self.lambdas[i + 1] - self.lambdas[i];
        let t = (lambda - self.lambdas[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        // Cubic Hermite basis in t, derivatives rescaled by 1/h per order.
        Ok(match order {
            0 => {
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * m1
            }
            1 => {
                let t2 = t * t;
                ((6.0 * t2 - 6.0 * t) * y0
                    + (3.0 * t2 - 4.0 * t + 1.0) * m0
                    + (-6.0 * t2 + 6.0 * t) * y1
                    + (3.0 * t2 - 2.0 * t) * m1)
                    / h
            }
            _ => {
                ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1)
                    / (h * h)
            }
        })
    }
}

impl FromStr for DeltaTable {
    type Err = TableError;

    /// Two numeric columns `λ Δ` separated by whitespace or a comma; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut samples = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if fields.len() != 2 {
                return Err(TableError::Parse { line: k + 1, reason: format!("expected 2 columns, found {}", fields.len()) });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| TableError::Parse { line: k + 1, reason: format!("{s:?}: {e}") })
            };
            samples.push((parse(fields[0])?, parse(fields[1])?));
        }
        Self::new(samples)
    }
}

impl fmt::Display for DeltaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.span();
        write!(f, "table[{} points on {lo}..{hi}]", self.len())
    }
}
