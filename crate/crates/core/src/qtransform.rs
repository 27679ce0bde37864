//! The generalized q-Bessel Fourier transform, its normalization and the
//! associated translation operator.
//!
//! A spatial function lives on `x_n = q^n`. Its transform is sampled on the
//! spectral grid `xi_m = q^(beta+m)` over the same index range, so that every
//! kernel value needed is `j~(x_n xi_m) = q^(-2beta(beta+n+m)) j_(alpha-beta)(q^(n+m))`:
//! the normalized kernel is only ever evaluated on the grid `q^Z`, where it is
//! bounded. Transforming a spectral function returns to the spatial grid.

use crate::error::{QError, Result};
use crate::qbessel::KernelTable;
use crate::qgrid::{qpochhammer, weighted_p_norm, BesselParams, GridFunction, PochLen, QGrid};
use crate::sum::{dot, neumaier};

/// Kernel form used by a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Sum `f * j` directly.
    Generic,
    /// For functions whose weighted moment vanishes: per output point, sum
    /// against either `j` or `j - 1` (equal for such inputs), whichever has the
    /// smaller absolute mass. Removes the cancellation of the constant part
    /// of the kernel at small arguments.
    MomentFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Spatial,
    Spectral,
}

#[derive(Debug, Clone)]
pub struct TransformPlan {
    spatial: QGrid,
    spectral: QGrid,
    v: BesselParams,
    c_qv: f64,
    table: KernelTable,
    w_x: Vec<f64>,
    w_xi: Vec<f64>,
    // q^(-2 beta n) over the index range, shared by both sides
    tilt: Vec<f64>,
}

/// `c_gamma q^(-beta(gamma+1))` with
/// `c_gamma = (q^(2gamma+2); q^2)_inf / ((1-q) (q^2; q^2)_inf)`, `gamma = alpha - beta`.
/// Used as the plan's starting constant; [`calibrate_normalization`] measures it.
pub fn closed_form_normalization(q: f64, v: &BesselParams) -> f64 {
    let g = v.gamma();
    let cg = qpochhammer(q.powf(2.0 * g + 2.0), q * q, PochLen::Infinite)
        / (qpochhammer(q * q, q * q, PochLen::Infinite) * (1.0 - q));
    cg * q.powf(-v.beta() * (g + 1.0))
}

impl TransformPlan {
    /// Plan on the spatial grid `grid` with the closed-form constant.
    ///
    /// The kernel table is padded by the grid width on both sides so that
    /// dilated spectra (wavelets) can be evaluated beyond the grid.
    pub fn new(grid: &QGrid, v: BesselParams) -> Result<Self> {
        if grid.shift() != 0.0 {
            return Err(QError::GridMismatch("plan needs an unshifted spatial grid".into()));
        }
        let (lo, hi) = (grid.n_low(), grid.n_high());
        let pad = hi - lo;
        let table = KernelTable::new(v.gamma(), grid.q(), 2 * lo - pad, 2 * hi + pad)?;
        let spectral = QGrid::with_shift(grid.q(), lo, hi, v.beta())?;
        let q = grid.q();
        Ok(TransformPlan {
            w_x: grid.weights(&v),
            w_xi: spectral.weights(&v),
            tilt: grid.indices().map(|n| q.powf(-2.0 * v.beta() * n as f64)).collect(),
            spatial: grid.clone(),
            spectral,
            c_qv: closed_form_normalization(q, &v),
            table,
            v,
        })
    }

    pub fn with_normalization(&self, c_qv: f64) -> Result<Self> {
        if !(c_qv > 0.0) || !c_qv.is_finite() {
            return Err(QError::Invalid(format!("normalization must be positive, got {c_qv}")));
        }
        Ok(TransformPlan {
            c_qv,
            ..self.clone()
        })
    }

    pub fn spatial(&self) -> &QGrid {
        &self.spatial
    }
    pub fn spectral(&self) -> &QGrid {
        &self.spectral
    }
    pub fn v(&self) -> &BesselParams {
        &self.v
    }
    pub fn q(&self) -> f64 {
        self.spatial.q()
    }
    pub fn c_qv(&self) -> f64 {
        self.c_qv
    }
    pub fn table(&self) -> &KernelTable {
        &self.table
    }
    pub fn weights(&self, side: Side) -> &[f64] {
        match side {
            Side::Spatial => &self.w_x,
            Side::Spectral => &self.w_xi,
        }
    }
    pub fn grid(&self, side: Side) -> &QGrid {
        match side {
            Side::Spatial => &self.spatial,
            Side::Spectral => &self.spectral,
        }
    }

    /// `j~(q^(beta+s))`, the kernel at index sum `s = n + m`.
    #[inline]
    pub fn kernel(&self, s: i64) -> f64 {
        let b = self.v.beta();
        self.q().powf(-2.0 * b * (b + s as f64)) * self.table.j(s)
    }

    /// `kernel_table[n][m]`: the kernel at `x_n xi_m`.
    pub fn kernel_entry(&self, n: i64, m: i64) -> f64 {
        self.kernel(n + m)
    }

    pub fn side_of(&self, f: &GridFunction) -> Result<Side> {
        if f.grid().same_as(&self.spatial) {
            Ok(Side::Spatial)
        } else if f.grid().same_as(&self.spectral) {
            Ok(Side::Spectral)
        } else {
            Err(QError::GridMismatch(format!(
                "function grid {:?} matches neither side of the plan",
                f.grid().meta()
            )))
        }
    }

    /// Transform values given on `from` and evaluate at the opposite-side
    /// indices `outputs`, which may leave the grid as far as the kernel table allows.
    pub fn apply(&self, values: &[f64], from: Side, outputs: &[i64], mode: Mode) -> Result<Vec<f64>> {
        let g = &self.spatial;
        if values.len() != g.len() {
            return Err(QError::GridMismatch("value count differs from grid".into()));
        }
        if let (Some(&lo), Some(&hi)) = (outputs.iter().min(), outputs.iter().max()) {
            if !self.table.contains(lo + g.n_low()) || !self.table.contains(hi + g.n_high()) {
                return Err(QError::SupportOverflow(format!(
                    "output indices [{lo}, {hi}] exceed the kernel table"
                )));
            }
        }
        let w = self.weights(from);
        let gv: Vec<f64> = values
            .iter()
            .zip(w)
            .zip(&self.tilt)
            .map(|((f, w), t)| f * w * t)
            .collect();
        let b = self.v.beta();
        let q = self.q();
        let lo = g.n_low();
        Ok(outputs
            .iter()
            .map(|&m| {
                let j = |i: usize| self.table.j(lo + i as i64 + m);
                let sum = match mode {
                    Mode::Generic => neumaier(gv.iter().enumerate().map(|(i, x)| x * j(i))),
                    Mode::MomentFree => {
                        let r = |i: usize| self.table.r(lo + i as i64 + m);
                        let mass_j = neumaier(gv.iter().enumerate().map(|(i, x)| (x * j(i)).abs()));
                        let mass_r = neumaier(gv.iter().enumerate().map(|(i, x)| (x * r(i)).abs()));
                        if mass_r < mass_j {
                            neumaier(gv.iter().enumerate().map(|(i, x)| x * r(i)))
                        } else {
                            neumaier(gv.iter().enumerate().map(|(i, x)| x * j(i)))
                        }
                    }
                };
                self.c_qv * q.powf(-2.0 * b * (b + m as f64)) * sum
            })
            .collect())
    }

    /// `F f` on the opposite side of the plan.
    pub fn transform(&self, f: &GridFunction) -> Result<GridFunction> {
        self.transform_with(f, Mode::Generic)
    }

    pub fn transform_with(&self, f: &GridFunction, mode: Mode) -> Result<GridFunction> {
        let from = self.side_of(f)?;
        let to = match from {
            Side::Spatial => Side::Spectral,
            Side::Spectral => Side::Spatial,
        };
        let outs: Vec<i64> = self.spatial.indices().collect();
        let vals = self.apply(f.values(), from, &outs, mode)?;
        GridFunction::new(self.grid(to), vals)
    }

    /// Weighted moment `sum f_n w_n x_n^(-2 beta)`, the coefficient of the
    /// constant part of the kernel, and the absolute mass it is measured against.
    pub fn moment(&self, f: &GridFunction) -> Result<(f64, f64)> {
        let side = self.side_of(f)?;
        let w = self.weights(side);
        let terms: Vec<f64> = f
            .values()
            .iter()
            .zip(w)
            .zip(&self.tilt)
            .map(|((f, w), t)| f * w * t)
            .collect();
        Ok((neumaier(terms.iter().copied()), neumaier(terms.iter().map(|x| x.abs()))))
    }

    /// True when the weighted moment is zero up to rounding.
    pub fn has_vanishing_moment(&self, f: &GridFunction) -> Result<bool> {
        let (m, mass) = self.moment(f)?;
        Ok(m.abs() <= 1e-12 * mass)
    }

    /// Squared weighted L2 norm on the function's own grid.
    pub fn norm_sq(&self, f: &GridFunction) -> Result<f64> {
        let side = self.side_of(f)?;
        Ok(dot(
            &f.values().iter().map(|x| x * x).collect::<Vec<_>>(),
            self.weights(side),
        ))
    }

    /// `T_x f(y) = c sum_xi F f(xi) j~(y xi) j~(x xi) w(xi)`, for `x = q^x_index`.
    pub fn translate(&self, f: &GridFunction, x_index: i64) -> Result<GridFunction> {
        if self.side_of(f)? != Side::Spatial {
            return Err(QError::GridMismatch("translation takes a spatial function".into()));
        }
        if !self.spatial.contains(x_index) {
            return Err(QError::OffGrid(self.spatial.point(x_index)));
        }
        let ff = self.transform(f)?;
        let shifted: Vec<f64> = self
            .spectral
            .indices()
            .zip(ff.values())
            .map(|(m, v)| v * self.kernel(x_index + m))
            .collect();
        // multiply-by-kernel then transform back is exactly the translation sum
        let back = self.transform(&GridFunction::new(&self.spectral, shifted)?)?;
        Ok(back)
    }
}

/// Result of [`calibrate_normalization`].
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub c_qv: f64,
    /// Worst `||F(F f) - f|| / ||f||` over the probes after calibration.
    pub residual: f64,
    /// Per-probe double-transform ratio measured with constant 1.
    pub rho: Vec<f64>,
}

/// Probe-to-probe disagreement of the double-transform ratio tolerated before
/// the grid is declared too small.
pub const CALIBRATION_SPREAD: f64 = 1e-6;

/// Constant making `F` an involution on the probes.
///
/// With constant 1 the double transform is `rho f`; it scales as `c^2`, so the
/// constant minimizing the worst `|c^2 rho_i - 1|` is `sqrt(2 / (rho_min + rho_max))`.
pub fn calibrate_normalization(v: BesselParams, grid: &QGrid, probes: &[GridFunction]) -> Result<Calibration> {
    if probes.is_empty() {
        return Err(QError::Invalid("calibration needs at least one probe".into()));
    }
    let unit = TransformPlan::new(grid, v)?.with_normalization(1.0)?;
    let mut rho = Vec::with_capacity(probes.len());
    for f in probes {
        if unit.side_of(f)? != Side::Spatial {
            return Err(QError::GridMismatch("calibration probes must be spatial".into()));
        }
        if f.is_zero() {
            continue;
        }
        let ff = unit.transform(&unit.transform(f)?)?;
        let w = unit.weights(Side::Spatial);
        let num = neumaier(ff.values().iter().zip(f.values()).zip(w).map(|((a, b), w)| a * b * w));
        rho.push(num / unit.norm_sq(f)?);
    }
    if rho.is_empty() {
        return Err(QError::ZeroInput("all calibration probes are zero".into()));
    }
    let lo = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(QError::GridTooSmall(format!("double-transform ratios in [{lo:e}, {hi:e}]")));
    }
    if hi / lo - 1.0 > CALIBRATION_SPREAD {
        return Err(QError::GridTooSmall(format!(
            "double-transform ratios disagree by {:e}",
            hi / lo - 1.0
        )));
    }
    let c = (2.0 / (lo + hi)).sqrt();
    let plan = unit.with_normalization(c)?;
    let mut residual = 0.0f64;
    for f in probes.iter().filter(|f| !f.is_zero()) {
        residual = residual.max(involution_residual(&plan, f)?);
    }
    Ok(Calibration { c_qv: c, residual, rho })
}

/// `||F(F f) - f|| / ||f||` in the weighted spatial norm.
pub fn involution_residual(plan: &TransformPlan, f: &GridFunction) -> Result<f64> {
    let back = plan.transform(&plan.transform(f)?)?;
    let diff = back.combine(1.0, f, -1.0)?;
    let v = plan.v();
    let nf = weighted_p_norm(f, 2.0, v)?;
    if nf == 0.0 {
        return Err(QError::ZeroInput("zero function".into()));
    }
    Ok(weighted_p_norm(&diff, 2.0, v)? / nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(q: f64, a: f64, b: f64) -> TransformPlan {
        let g = QGrid::new(q, -20, 40).unwrap();
        TransformPlan::new(&g, BesselParams::new(a, b).unwrap()).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = plan(0.5, 0.0, 0.0);
        assert!(p.transform(&GridFunction::zeros(p.spatial())).unwrap().is_zero());
    }

    #[test]
    fn indicator_at_one_is_scaled_kernel() {
        let p = plan(0.5, 0.5, 0.25);
        let f = GridFunction::indicator(p.spatial(), 0).unwrap();
        let ff = p.transform(&f).unwrap();
        for m in p.spectral().indices() {
            let want = p.c_qv() * 0.5 * p.kernel(m);
            assert!((ff.value_at(m).unwrap() - want).abs() <= 1e-15 * want.abs());
        }
    }

    #[test]
    fn kernel_symmetric() {
        let p = plan(0.3, 1.0, -0.25);
        for n in -5..5 {
            for m in -5..5 {
                assert_eq!(p.kernel_entry(n, m), p.kernel_entry(m, n));
            }
        }
    }

    #[test]
    fn rejects_foreign_grid() {
        let p = plan(0.5, 0.0, 0.0);
        let other = GridFunction::zeros(&QGrid::new(0.5, 0, 10).unwrap());
        assert!(matches!(p.transform(&other), Err(QError::GridMismatch(_))));
    }

    #[test]
    fn spectral_side_carries_beta_shift() {
        let p = plan(0.5, 0.5, 0.25);
        let f = GridFunction::indicator(p.spatial(), 10).unwrap();
        let ff = p.transform(&f).unwrap();
        assert_eq!(ff.grid().shift(), 0.25);
        assert_eq!(p.transform(&ff).unwrap().grid().shift(), 0.0);
    }

    #[test]
    fn translation_rejects_off_grid_point() {
        let p = plan(0.5, 0.0, 0.0);
        let f = GridFunction::indicator(p.spatial(), 10).unwrap();
        assert!(p.translate(&f, 41).is_err());
        assert!(p.translate(&GridFunction::zeros(p.spatial()), 3).unwrap().is_zero());
    }

    #[test]
    fn calibration_rejects_empty_and_zero() {
        let g = QGrid::new(0.5, -20, 40).unwrap();
        let v = BesselParams::new(0.0, 0.0).unwrap();
        assert!(calibrate_normalization(v, &g, &[]).is_err());
        assert!(calibrate_normalization(v, &g, &[GridFunction::zeros(&g)]).is_err());
    }

    #[test]
    fn calibration_detects_truncation() {
        // support touching the top of the grid breaks the involution
        let g = QGrid::new(0.7, -20, 40).unwrap();
        let v = BesselParams::new(0.0, 0.0).unwrap();
        let probes = [
            GridFunction::indicator(&g, 40).unwrap(),
            GridFunction::indicator(&g, 10).unwrap(),
        ];
        assert!(matches!(
            calibrate_normalization(v, &g, &probes),
            Err(QError::GridTooSmall(_))
        ));
    }
}
