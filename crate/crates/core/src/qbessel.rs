//! Normalized q-Bessel series, the two-parameter modified kernel, grid kernel
//! tables and the generalized q-Bessel difference operator.

use crate::error::{QError, Result};
use crate::qgrid::{BesselParams, GridFunction, QGrid};
use crate::sum::neumaier;

/// Denominator factors closer than this to zero are treated as singular.
const DEGENERATE: f64 = 1e-14;

/// Truncation policy for the q-Bessel series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTolerance {
    /// Stop once `|term| < rel_tol * |partial sum|`.
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        SeriesTolerance {
            rel_tol: 1e-15,
            max_terms: 200,
        }
    }
}

impl SeriesTolerance {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(QError::Invalid(format!("rel_tol must lie in (0,1), got {rel_tol}")));
        }
        if max_terms < 1 {
            return Err(QError::Invalid("max_terms must be at least 1".into()));
        }
        Ok(SeriesTolerance { rel_tol, max_terms })
    }
}

/// A truncated series value and an a-posteriori bound on its error: the larger
/// of the first omitted term and the rounding floor `eps * sum |term|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub err_bound: f64,
    pub terms: usize,
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(QError::InvalidQ(q))
    }
}

/// Fails when some factor `1 - q^(2 order + 2 + 2k)`, `k < terms`, vanishes.
fn check_order(order: f64, q: f64, terms: usize) -> Result<()> {
    for k in 0..terms {
        let d = 1.0 - q.powf(2.0 * order + 2.0 + 2.0 * k as f64);
        if d.abs() < DEGENERATE {
            return Err(QError::Degenerate(d));
        }
    }
    Ok(())
}

/// Ratio `term_{n+1} / term_n` of the series at `x`.
#[inline]
fn term_ratio(order: f64, q: f64, x: f64, n: usize) -> f64 {
    let k = n as f64;
    -q.powf(2.0 * k + 2.0) * x * x
        / ((1.0 - q.powf(2.0 * order + 2.0 + 2.0 * k)) * (1.0 - q.powf(2.0 * k + 2.0)))
}

/// `j_alpha(x; q^2) = sum_n (-1)^n q^(n(n+1)) x^(2n) / ((q^(2alpha+2); q^2)_n (q^2; q^2)_n)`.
pub fn normalized_q_bessel(alpha: f64, x: f64, q: f64, tol: SeriesTolerance) -> Result<SeriesValue> {
    check_q(q)?;
    if !alpha.is_finite() || !x.is_finite() {
        return Err(QError::Invalid(format!("alpha {alpha}, x {x}")));
    }
    if x == 0.0 {
        return Ok(SeriesValue {
            value: 1.0,
            err_bound: 0.0,
            terms: 1,
        });
    }
    check_order(alpha, q, tol.max_terms)?;
    let mut terms = vec![1.0];
    let mut term = 1.0f64;
    let mut partial = 1.0f64;
    loop {
        let n = terms.len() - 1;
        let next = term * term_ratio(alpha, q, x, n);
        if !next.is_finite() {
            return Err(QError::Divergence(format!("q-Bessel series at x = {x}")));
        }
        if next.abs() < tol.rel_tol * partial.abs() {
            let abs_sum = neumaier(terms.iter().map(|t: &f64| t.abs()));
            return Ok(SeriesValue {
                value: partial,
                err_bound: next.abs().max(f64::EPSILON * abs_sum),
                terms: terms.len(),
            });
        }
        if terms.len() >= tol.max_terms {
            return Err(QError::Truncation(tol.max_terms));
        }
        terms.push(next);
        partial = neumaier(terms.iter().copied());
        term = next;
    }
}

/// `x^(-2 beta) j_(alpha-beta)(q^(-beta) x; q^2)` for `x > 0`.
pub fn modified_q_bessel(v: &BesselParams, x: f64, q: f64, tol: SeriesTolerance) -> Result<SeriesValue> {
    if !(x > 0.0) {
        return Err(QError::Invalid(format!("modified kernel needs x > 0, got {x}")));
    }
    let inner = normalized_q_bessel(v.gamma(), q.powf(-v.beta()) * x, q, tol)?;
    let pre = x.powf(-2.0 * v.beta());
    Ok(SeriesValue {
        value: pre * inner.value,
        err_bound: pre * inner.err_bound,
        terms: inner.terms,
    })
}

/// `j_gamma(q^s; q^2)` and `j_gamma(q^s; q^2) - 1` for every integer `s` in a range.
///
/// Non-negative `s` use the series directly. Negative `s` use a backward
/// ratio recurrence from the three-term q-difference equation, which stays
/// accurate where the series cancels catastrophically.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    gamma: f64,
    smin: i64,
    j: Vec<f64>,
    r: Vec<f64>,
}

const TABLE_TOL: f64 = 1e-18;
const RECURRENCE_PAD: i64 = 30;

impl KernelTable {
    pub fn new(gamma: f64, q: f64, smin: i64, smax: i64) -> Result<Self> {
        check_q(q)?;
        if smin > smax {
            return Err(QError::InvalidRange {
                n_low: smin,
                n_high: smax,
            });
        }
        check_order(gamma, q, 200)?;
        let series = |x: f64, skip_one: bool| -> Result<f64> {
            let mut term = 1.0f64;
            let mut out: Vec<f64> = if skip_one { Vec::new() } else { vec![1.0] };
            for n in 0..200 {
                term *= term_ratio(gamma, q, x, n);
                let tot = neumaier(out.iter().copied());
                if term == 0.0 || (!out.is_empty() && term.abs() < TABLE_TOL * tot.abs()) {
                    return Ok(tot);
                }
                out.push(term);
            }
            Err(QError::Truncation(200))
        };
        let len = (smax - smin + 1) as usize;
        let mut j = vec![0.0; len];
        let mut r = vec![0.0; len];
        let j0 = series(1.0, false)?;
        for s in smin.max(0)..=smax {
            let i = (s - smin) as usize;
            let x = q.powf(s as f64);
            j[i] = if s == 0 { j0 } else { series(x, false)? };
            r[i] = if s >= 1 { series(x, true)? } else { j[i] - 1.0 };
        }
        if smin < 0 {
            let depth = -smin;
            let b = q.powf(2.0 * gamma);
            // rho_k = j(q^-(k+1)) / j(q^-k), run downward from zero
            let mut rho = vec![0.0; (depth + RECURRENCE_PAD) as usize];
            let mut next = 0.0;
            for k in (1..=depth + RECURRENCE_PAD).rev() {
                let a = 1.0 + b - q.powf(-2.0 * k as f64);
                next = b / (a - next);
                rho[(k - 1) as usize] = next;
            }
            let mut f = j0;
            for k in 1..=depth {
                f *= rho[(k - 1) as usize];
                let s = -k;
                if s <= smax {
                    let i = (s - smin) as usize;
                    j[i] = f;
                    r[i] = f - 1.0;
                }
            }
        }
        if j.iter().chain(&r).any(|x| !x.is_finite()) {
            return Err(QError::Divergence("kernel table".into()));
        }
        Ok(KernelTable { gamma, smin, j, r })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn smin(&self) -> i64 {
        self.smin
    }
    pub fn smax(&self) -> i64 {
        self.smin + self.j.len() as i64 - 1
    }
    pub fn contains(&self, s: i64) -> bool {
        s >= self.smin && s <= self.smax()
    }

    /// `j_gamma(q^s)`. Panics outside the table.
    #[inline]
    pub fn j(&self, s: i64) -> f64 {
        self.j[(s - self.smin) as usize]
    }

    /// `j_gamma(q^s) - 1`, accurate for large `s` where `j` rounds to 1.
    #[inline]
    pub fn r(&self, s: i64) -> f64 {
        self.r[(s - self.smin) as usize]
    }
}

/// `[f(x/q) - (q^(2a) + q^(2b)) f(x) + q^(2a+2b) f(qx)] / x^2` on interior indices.
pub fn generalized_q_bessel_operator(f: &GridFunction, v: &BesselParams) -> Result<GridFunction> {
    let g = f.grid();
    if g.len() < 3 {
        return Err(QError::GridTooSmall("operator needs three points".into()));
    }
    let q = g.q();
    let qa = q.powf(2.0 * v.alpha());
    let qb = q.powf(2.0 * v.beta());
    let out = QGrid::with_shift(q, g.n_low() + 1, g.n_high() - 1, g.shift())?;
    let y = f.values();
    let values = out
        .indices()
        .enumerate()
        .map(|(i, n)| {
            let x = g.point(n);
            (y[i] - (qa + qb) * y[i + 1] + qa * qb * y[i + 2]) / (x * x)
        })
        .collect();
    GridFunction::new(&out, values)
}

/// Pointwise ratio `D j~(lambda x) / j~(lambda x)` for `lambda = q^(beta+m)`,
/// on interior points where the kernel does not vanish. Diagnostic only.
pub fn eigencheck(grid: &QGrid, v: &BesselParams, m: i64) -> Result<Vec<(i64, f64)>> {
    let q = grid.q();
    let table = KernelTable::new(v.gamma(), q, grid.n_low() + m, grid.n_high() + m)?;
    let b = v.beta();
    let kern = GridFunction::new(
        grid,
        grid.indices()
            .map(|n| q.powf(-2.0 * b * (b + (n + m) as f64)) * table.j(n + m))
            .collect(),
    )?;
    let d = generalized_q_bessel_operator(&kern, v)?;
    Ok(d.grid()
        .indices()
        .filter_map(|n| {
            let k = kern.value_at(n)?;
            let dv = d.value_at(n)?;
            (k != 0.0).then_some((n, dv / k))
        })
        .collect())
}
