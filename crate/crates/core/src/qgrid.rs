//! The truncated geometric grid, grid functions, Jackson integration,
//! weighted norms, the q-derivative, q-Pochhammer symbols and grid dilation.

use std::io::{Read, Write};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::numfmt::sig17;
use crate::sum::neumaier;

/// Points `q^(shift + n)` for `n_low <= n <= n_high`, largest first.
///
/// Spatial grids have `shift = 0`. The spectral grid of a transform with
/// parameter `beta` carries `shift = beta` (see [`crate::TransformPlan`]).
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    q: f64,
    n_low: i64,
    n_high: i64,
    shift: f64,
}

impl QGrid {
    pub fn new(q: f64, n_low: i64, n_high: i64) -> Result<Self> {
        Self::with_shift(q, n_low, n_high, 0.0)
    }

    pub fn with_shift(q: f64, n_low: i64, n_high: i64, shift: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::InvalidQ(q));
        }
        if n_low > n_high {
            return Err(QError::InvalidRange { n_low, n_high });
        }
        if !shift.is_finite() {
            return Err(QError::Invalid(format!("grid shift {shift}")));
        }
        Ok(QGrid {
            q,
            n_low,
            n_high,
            shift,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn n_low(&self) -> i64 {
        self.n_low
    }
    pub fn n_high(&self) -> i64 {
        self.n_high
    }
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn len(&self) -> usize {
        (self.n_high - self.n_low + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> RangeInclusive<i64> {
        self.n_low..=self.n_high
    }

    pub fn contains(&self, n: i64) -> bool {
        self.n_low <= n && n <= self.n_high
    }

    /// Position of index `n` in value vectors.
    pub fn offset(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_low) as usize)
    }

    pub fn point(&self, n: i64) -> f64 {
        self.q.powf(self.shift + n as f64)
    }

    pub fn points(&self) -> Vec<f64> {
        self.indices().map(|n| self.point(n)).collect()
    }

    /// Grid index of `x`, accepting only values within 1e-12 relative of a point.
    pub fn index_of(&self, x: f64) -> Result<i64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(QError::OffGrid(x));
        }
        let e = x.ln() / self.q.ln() - self.shift;
        let n = e.round();
        if !self.contains(n as i64) || ((self.point(n as i64) - x) / x).abs() > 1e-12 {
            return Err(QError::OffGrid(x));
        }
        Ok(n as i64)
    }

    /// Same q, range and shift.
    pub fn same_as(&self, other: &QGrid) -> bool {
        self == other
    }

    /// Jackson weight `(1-q) x^(2|v|+2)` at index `n`: the measure of
    /// `x^(2|v|+1) d_qx` at one grid point.
    pub fn weight(&self, n: i64, v: &BesselParams) -> f64 {
        (1.0 - self.q) * self.point(n).powf(2.0 * v.abs_v() + 2.0)
    }

    pub fn weights(&self, v: &BesselParams) -> Vec<f64> {
        self.indices().map(|n| self.weight(n, v)).collect()
    }

    /// The refinement grid: both index bounds doubled when the range straddles
    /// 0, otherwise the width doubled around the original range.
    pub fn doubled(&self) -> QGrid {
        let (lo, hi) = if self.n_low <= 0 && self.n_high >= 0 {
            (2 * self.n_low, 2 * self.n_high)
        } else {
            let w = self.n_high - self.n_low;
            (self.n_low - w / 2, self.n_high + w - w / 2)
        };
        QGrid {
            n_low: lo,
            n_high: hi,
            ..self.clone()
        }
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            q: self.q,
            n_low: self.n_low,
            n_high: self.n_high,
            shift: (self.shift != 0.0).then_some(self.shift),
        }
    }
}

/// Sidecar descriptor stored next to a GridFunction CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub q: f64,
    pub n_low: i64,
    pub n_high: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl GridMeta {
    pub fn grid(&self) -> Result<QGrid> {
        QGrid::with_shift(self.q, self.n_low, self.n_high, self.shift.unwrap_or(0.0))
    }

    pub fn to_json(&self) -> String {
        let mut s = format!(
            "{{\"q\":{},\"n_low\":{},\"n_high\":{}",
            sig17(self.q),
            self.n_low,
            self.n_high
        );
        if let Some(b) = self.shift {
            s.push_str(&format!(",\"shift\":{}", sig17(b)));
        }
        s.push_str("}\n");
        s
    }
}

/// The pair `v = (alpha, beta)` with `|v| = alpha + beta > -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselParams {
    alpha: f64,
    beta: f64,
}

impl BesselParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || !(alpha + beta > -1.0) {
            return Err(QError::InvalidParams(alpha + beta));
        }
        Ok(BesselParams { alpha, beta })
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn abs_v(&self) -> f64 {
        self.alpha + self.beta
    }
    /// Order `alpha - beta` of the underlying normalized kernel.
    pub fn gamma(&self) -> f64 {
        self.alpha - self.beta
    }
}

/// Real values on every point of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: QGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &QGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QError::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(QError::Divergence(format!("grid function value {x}")));
        }
        Ok(GridFunction {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &QGrid) -> Self {
        GridFunction {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &QGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn indicator(grid: &QGrid, n: i64) -> Result<Self> {
        Self::from_entries(grid, &[(n, 1.0)])
    }

    /// Zero except at the listed `(index, value)` pairs.
    pub fn from_entries(grid: &QGrid, entries: &[(i64, f64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(n, x) in entries {
            let i = grid.offset(n).ok_or_else(|| {
                QError::SupportOverflow(format!("index {n} outside [{}, {}]", grid.n_low, grid.n_high))
            })?;
            f.values[i] = x;
        }
        Self::new(grid, f.values)
    }

    pub fn grid(&self) -> &QGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value_at(&self, n: i64) -> Option<f64> {
        self.grid.offset(n).map(|i| self.values[i])
    }

    /// Smallest and largest index carrying a nonzero value.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = self.values.iter().position(|&x| x != 0.0)?;
        let hi = self.values.iter().rposition(|&x| x != 0.0)?;
        Some((self.grid.n_low + lo as i64, self.grid.n_low + hi as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.map(|_, y| lambda * y)
    }

    /// Pointwise `f(x, value)`.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .grid
            .indices()
            .zip(&self.values)
            .map(|(n, &y)| f(self.grid.point(n), y))
            .collect();
        GridFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    /// `a*self + b*other` on a common grid.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(QError::GridMismatch("combining functions on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Writes `n,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| QError::Invalid(format!("csv write: {e}"));
        out.write_record(["n", "value"]).map_err(io)?;
        for (n, y) in self.grid.indices().zip(&self.values) {
            out.write_record([n.to_string(), sig17(*y)]).map_err(io)?;
        }
        out.flush().map_err(|e| QError::Invalid(format!("csv write: {e}")))
    }

    /// Reads `n,value` rows; every grid index must appear exactly once.
    pub fn read_csv<R: Read>(grid: &QGrid, r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let bad = |m: String| QError::Invalid(format!("csv read: {m}"));
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "n" || &headers[1] != "value" {
            return Err(bad(format!("expected header n,value, got {:?}", headers)));
        }
        let mut values = vec![f64::NAN; grid.len()];
        let mut seen = vec![false; grid.len()];
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let n: i64 = rec[0].parse().map_err(|_| bad(format!("index {:?}", &rec[0])))?;
            let y: f64 = rec[1].parse().map_err(|_| bad(format!("value {:?}", &rec[1])))?;
            let i = grid
                .offset(n)
                .ok_or_else(|| bad(format!("index {n} outside the grid")))?;
            if seen[i] {
                return Err(bad(format!("index {n} repeated")));
            }
            seen[i] = true;
            values[i] = y;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(bad(format!("index {} missing", grid.n_low + i as i64)));
        }
        Self::new(grid, values)
    }
}

/// Length of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PochLen {
    Finite(u32),
    Infinite,
}

/// `(a; q)_n = prod_{k<n} (1 - a q^k)`. The infinite product stops once
/// `|a q^k| < 1e-16`.
pub fn qpochhammer(a: f64, q: f64, n: PochLen) -> f64 {
    let mut p = 1.0;
    let mut t = a;
    match n {
        PochLen::Finite(n) => {
            for _ in 0..n {
                p *= 1.0 - t;
                t *= q;
            }
        }
        PochLen::Infinite => {
            while t.abs() >= 1e-16 {
                p *= 1.0 - t;
                t *= q;
            }
        }
    }
    p
}

/// A Jackson-integral endpoint: the origin or a grid index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Zero,
    Index(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacksonRange {
    Interval(Endpoint, Endpoint),
    ZeroToInf,
    AToInf(Endpoint),
}

/// Jackson integral of `f` over `range`, summed in ascending index order with
/// compensation. Sums run over the grid's index range only.
pub fn jackson_integral(f: impl Fn(f64) -> f64, range: JacksonRange, grid: &QGrid) -> Result<f64> {
    let q = grid.q();
    // (1-q) sum_{k>=0} x_{i+k} f(x_{i+k}) over indices still on the grid
    let from_zero = |e: Endpoint| -> Result<f64> {
        match e {
            Endpoint::Zero => Ok(0.0),
            Endpoint::Index(i) => {
                if !grid.contains(i) {
                    return Err(QError::OffGrid(grid.point(i)));
                }
                Ok((1.0 - q) * neumaier((i..=grid.n_high()).map(|n| {
                    let x = grid.point(n);
                    x * f(x)
                })))
            }
        }
    };
    let total = || -> f64 {
        (1.0 - q)
            * neumaier(grid.indices().map(|n| {
                let x = grid.point(n);
                x * f(x)
            }))
    };
    let value = match range {
        JacksonRange::Interval(a, b) => {
            let ord = |e: Endpoint| match e {
                Endpoint::Zero => i64::MAX,
                Endpoint::Index(i) => i,
            };
            if ord(a) < ord(b) {
                return Err(QError::Invalid("interval endpoints must satisfy a <= b".into()));
            }
            from_zero(b)? - from_zero(a)?
        }
        JacksonRange::ZeroToInf => total(),
        JacksonRange::AToInf(a) => total() - from_zero(a)?,
    };
    if !value.is_finite() {
        return Err(QError::Divergence("Jackson sum".into()));
    }
    Ok(value)
}

/// Jackson sum of `f(x) x^(2|v|+1) d_qx` over the grid of `f`.
pub fn weighted_integral(f: &GridFunction, v: &BesselParams) -> f64 {
    let g = f.grid();
    neumaier(g.indices().zip(f.values()).map(|(n, y)| y * g.weight(n, v)))
}

/// `(f(x) - f(qx)) / ((1-q) x)` on indices `n_low..=n_high-1`.
pub fn q_derivative(f: &GridFunction) -> Result<GridFunction> {
    let g = f.grid();
    if g.len() < 2 {
        return Err(QError::GridTooSmall("q-derivative needs two points".into()));
    }
    let out = QGrid::with_shift(g.q(), g.n_low(), g.n_high() - 1, g.shift())?;
    let y = f.values();
    let values = out
        .indices()
        .enumerate()
        .map(|(i, n)| (y[i] - y[i + 1]) / ((1.0 - g.q()) * g.point(n)))
        .collect();
    GridFunction::new(&out, values)
}

/// `[(1-q) sum |f|^p x^(2|v|+2)]^(1/p)`.
pub fn weighted_p_norm(f: &GridFunction, p: f64, v: &BesselParams) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(QError::Invalid(format!("p must be >= 1, got {p}")));
    }
    let g = f.grid();
    let s = neumaier(
        g.indices()
            .zip(f.values())
            .map(|(n, y)| y.abs().powf(p) * g.weight(n, v)),
    );
    Ok(s.powf(1.0 / p))
}

/// `x -> f(x/a)` for `a = q^m`: the values move `m` indices toward the small end.
pub fn dilate(f: &GridFunction, m: i64) -> Result<GridFunction> {
    let g = f.grid();
    if let Some((lo, hi)) = f.support() {
        if !g.contains(lo + m) || !g.contains(hi + m) {
            return Err(QError::SupportOverflow(format!(
                "support [{lo}, {hi}] shifted by {m} leaves [{}, {}]",
                g.n_low(),
                g.n_high()
            )));
        }
    }
    let mut values = vec![0.0; g.len()];
    for (i, n) in g.indices().enumerate() {
        if let Some(j) = g.offset(n - m) {
            values[i] = f.values()[j];
        }
    }
    GridFunction::new(g, values)
}

/// Exponent `m` with `a = q^m`, rejecting scales that are not powers of q.
pub fn scale_exponent(q: f64, a: f64) -> Result<i64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(QError::OffGrid(a));
    }
    let m = (a.ln() / q.ln()).round();
    if ((q.powf(m) - a) / a).abs() > 1e-12 {
        return Err(QError::OffGrid(a));
    }
    Ok(m as i64)
}
