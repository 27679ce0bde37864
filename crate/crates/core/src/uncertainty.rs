//! The operators R and S, the per-scale Heisenberg ratio, the weighted-energy
//! identity and the homogeneous uncertainty ratio.

use crate::error::{QError, Result};
use crate::qgrid::GridFunction;
use crate::qtransform::{Side, TransformPlan};
use crate::qwavelet::{cwt, Scaleogram, WaveletSpec};
use crate::sum::neumaier;

/// Energies entering the uncertainty ratio of one function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    /// Jackson double sum of `|b C(f)(a,b)|^2` against `d_q(a,b)`.
    pub i_r: f64,
    /// `||t F f(t)||^2` on the spectral grid.
    pub i_s: f64,
    pub norm_sq: f64,
    /// `sqrt(i_r * i_s) / norm_sq`.
    pub ratio: f64,
}

/// `R f(a,b) = b C(f)(a,b)`.
pub fn op_r(f: &GridFunction, spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<Scaleogram> {
    Ok(r_of(&cwt(f, spec, scales, positions)?))
}

/// `b C(a,b)` for a computed scaleogram.
pub fn r_of(s: &Scaleogram) -> Scaleogram {
    s.map(|_, b, c| b * c)
}

/// `S f(t) = t F f(t)` on the spectral grid.
pub fn op_s(f: &GridFunction, plan: &TransformPlan) -> Result<GridFunction> {
    Ok(plan.transform(f)?.map(|t, y| t * y))
}

fn full_row(s: &Scaleogram, plan: &TransformPlan) -> Result<()> {
    let g = plan.spatial();
    if s.positions().len() != g.len() || s.positions().iter().zip(g.indices()).any(|(a, b)| *a != b) {
        return Err(QError::GridMismatch("position transform needs every grid position".into()));
    }
    Ok(())
}

/// `||b C|| ||xi F C|| / ||C||^2` for one scale slice given on every grid position.
pub fn slice_heisenberg_ratio(row: &[f64], plan: &TransformPlan) -> Result<f64> {
    let c = GridFunction::new(plan.spatial(), row.to_vec())?;
    let nc = plan.norm_sq(&c)?;
    if nc == 0.0 {
        return Err(QError::ZeroInput("zero scale slice".into()));
    }
    let bc = c.map(|b, y| b * y);
    let xfc = op_s(&c, plan)?;
    Ok((plan.norm_sq(&bc)? * plan.norm_sq(&xfc)?).sqrt() / nc)
}

/// Heisenberg ratio of the slice `C(f)(q^k, .)`; bounded below by 1/2 in the continuum.
pub fn intermediate_heisenberg_check(f: &GridFunction, spec: &WaveletSpec, k: i64) -> Result<f64> {
    let plan = spec.plan();
    let positions: Vec<i64> = plan.spatial().indices().collect();
    let s = cwt(f, spec, &[k], &positions)?;
    slice_heisenberg_ratio(s.row(0), plan)
}

/// Slices whose squared norm is below this fraction of the largest slice are
/// rounding noise, not signal.
pub const NOISE_FLOOR: f64 = 1e-20;

/// Heisenberg ratio of every non-negligible slice, paired with its scale exponent.
pub fn heisenberg_ratios(s: &Scaleogram, plan: &TransformPlan) -> Result<Vec<(i64, f64)>> {
    full_row(s, plan)?;
    let norms: Vec<f64> = (0..s.scales().len())
        .map(|i| plan.norm_sq(&GridFunction::new(plan.spatial(), s.row(i).to_vec())?))
        .collect::<Result<_>>()?;
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (i, &n) in norms.iter().enumerate() {
        if n > 0.0 && n > NOISE_FLOOR * top {
            out.push((s.scales()[i], slice_heisenberg_ratio(s.row(i), plan)?));
        }
    }
    Ok(out)
}

/// Both sides of the weighted-energy identity: the double sum of
/// `|xi F_b C(f)(a, .)(xi)|^2` against `xi^(2|v|+1) d_qa d_qxi / a^2`, and `||xi F f||^2`.
pub fn weighted_energy(f: &GridFunction, s: &Scaleogram, plan: &TransformPlan) -> Result<(f64, f64)> {
    full_row(s, plan)?;
    let q = plan.q();
    let rows: Vec<f64> = (0..s.scales().len())
        .map(|i| {
            let c = GridFunction::new(plan.spatial(), s.row(i).to_vec())?;
            Ok((1.0 - q) * plan.norm_sq(&op_s(&c, plan)?)? / s.scale_point(i))
        })
        .collect::<Result<_>>()?;
    Ok((neumaier(rows), plan.norm_sq(&op_s(f, plan)?)?))
}

/// Report from a precomputed scaleogram of `f`.
pub fn report_from(f: &GridFunction, s: &Scaleogram, plan: &TransformPlan) -> Result<UncertaintyReport> {
    if plan.side_of(f)? != Side::Spatial {
        return Err(QError::GridMismatch("uncertainty input must be spatial".into()));
    }
    let norm_sq = plan.norm_sq(f)?;
    if norm_sq == 0.0 {
        return Err(QError::ZeroInput("uncertainty ratio of the zero function".into()));
    }
    let i_r = r_of(s).energy();
    let i_s = plan.norm_sq(&op_s(f, plan)?)?;
    Ok(UncertaintyReport {
        i_r,
        i_s,
        norm_sq,
        ratio: (i_r * i_s).sqrt() / norm_sq,
    })
}

pub fn uncertainty_report(f: &GridFunction, spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<UncertaintyReport> {
    if f.is_zero() {
        return Err(QError::ZeroInput("uncertainty ratio of the zero function".into()));
    }
    report_from(f, &cwt(f, spec, scales, positions)?, spec.plan())
}

/// Smallest uncertainty ratio over the probes.
pub fn empirical_lower_constant(probes: &[GridFunction], spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<f64> {
    let reports = probes
        .iter()
        .map(|f| uncertainty_report(f, spec, scales, positions))
        .collect::<Result<Vec<_>>>()?;
    lower_constant_of(&reports)
}

pub fn lower_constant_of(reports: &[UncertaintyReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(QError::Invalid("empty probe set".into()));
    }
    Ok(reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::{BesselParams, QGrid};
    use std::sync::Arc;

    fn spec() -> WaveletSpec {
        let g = QGrid::new(0.5, -20, 40).unwrap();
        let plan = Arc::new(TransformPlan::new(&g, BesselParams::new(0.0, 0.0).unwrap()).unwrap());
        WaveletSpec::pair(plan, 2, 3).unwrap()
    }

    #[test]
    fn zero_inputs() {
        let s = spec();
        let z = GridFunction::zeros(s.plan().spatial());
        assert!(uncertainty_report(&z, &s, &s.scales(), &[0]).is_err());
        assert!(intermediate_heisenberg_check(&z, &s, 0).is_err());
        assert!(op_s(&z, s.plan()).unwrap().is_zero());
        assert!(lower_constant_of(&[]).is_err());
    }

    #[test]
    fn r_entry_is_b_times_coefficient() {
        let s = spec();
        let f = GridFunction::indicator(s.plan().spatial(), 12).unwrap();
        let c = cwt(&f, &s, &[5, 9], &[3, 11]).unwrap();
        let r = op_r(&f, &s, &[5, 9], &[3, 11]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(r.get(i, j), c.position_point(j) * c.get(i, j));
            }
        }
    }

    #[test]
    fn s_is_t_times_transform() {
        let s = spec();
        let f = GridFunction::indicator(s.plan().spatial(), 12).unwrap();
        let ff = s.plan().transform(&f).unwrap();
        let sf = op_s(&f, s.plan()).unwrap();
        for m in sf.grid().indices() {
            assert_eq!(sf.value_at(m).unwrap(), sf.grid().point(m) * ff.value_at(m).unwrap());
        }
    }

    #[test]
    fn singleton_family_constant() {
        let s = spec();
        let f = crate::probes::zero_moment_family(s.plan()).unwrap().remove(0);
        let pos: Vec<i64> = s.plan().spatial().indices().collect();
        let r = uncertainty_report(&f, &s, &s.scales(), &pos).unwrap();
        assert_eq!(empirical_lower_constant(&[f], &s, &s.scales(), &pos).unwrap(), r.ratio);
    }
}
