//! Finitely supported test functions used for calibration and verification.
//!
//! Probes sit at fixed absolute indices so the same functions are used on a
//! grid and on its refinement.

use crate::error::{QError, Result};
use crate::qgrid::GridFunction;
use crate::qtransform::TransformPlan;

/// Point indicators and short profiles: `(first index, coefficients)`.
const PROFILES: [(i64, &[f64]); 6] = [
    (5, &[1.0]),
    (8, &[1.0]),
    (12, &[1.0]),
    (6, &[1.0, -0.5]),
    (9, &[1.0, 0.3, 0.7]),
    (7, &[1.0, 2.0, 3.0, 2.0, 1.0]),
];

/// Differences whose weighted moment vanishes once each coefficient is
/// multiplied by `q^(-n(2alpha+2))`.
const ZERO_MOMENT: [(i64, &[f64]); 4] = [
    (5, &[1.0, -1.0]),
    (8, &[1.0, -2.0, 1.0]),
    (10, &[1.0, -1.0]),
    (6, &[2.0, -1.0, -1.0]),
];

fn build(plan: &TransformPlan, start: i64, coeffs: &[f64], balanced: bool) -> Result<GridFunction> {
    let g = plan.spatial();
    let a = plan.v().alpha();
    let entries: Vec<(i64, f64)> = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let n = start + i as i64;
            let w = if balanced { g.q().powf(-(n as f64) * (2.0 * a + 2.0)) } else { 1.0 };
            (n, c * w)
        })
        .collect();
    let peak = entries.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
    let scaled: Vec<(i64, f64)> = entries.iter().map(|&(n, c)| (n, c / peak)).collect();
    GridFunction::from_entries(g, &scaled).map_err(|_| {
        QError::GridTooSmall(format!(
            "probe at indices {start}..{} does not fit [{}, {}]",
            start + coeffs.len() as i64 - 1,
            g.n_low(),
            g.n_high()
        ))
    })
}

/// Point indicators, two- and three-point combinations and a polynomial profile.
pub fn point_family(plan: &TransformPlan) -> Result<Vec<GridFunction>> {
    PROFILES.iter().map(|(s, c)| build(plan, *s, c, false)).collect()
}

/// Probes with vanishing weighted moment.
pub fn zero_moment_family(plan: &TransformPlan) -> Result<Vec<GridFunction>> {
    ZERO_MOMENT.iter().map(|(s, c)| build(plan, *s, c, true)).collect()
}

/// All ten default probes, point family first.
pub fn standard_family(plan: &TransformPlan) -> Result<Vec<GridFunction>> {
    let mut out = point_family(plan)?;
    out.extend(zero_moment_family(plan)?);
    Ok(out)
}

/// Whether the position-weighted wavelet energy of `f` is finite on the full
/// grid. For `alpha - beta <= 0` it diverges with the number of scales unless
/// the weighted moment of `f` vanishes.
pub fn in_domain_of_r(plan: &TransformPlan, f: &GridFunction) -> Result<bool> {
    Ok(plan.v().gamma() > 0.0 || plan.has_vanishing_moment(f)?)
}

/// The standard family restricted to probes in the domain of `R`.
pub fn uncertainty_family(plan: &TransformPlan) -> Result<Vec<GridFunction>> {
    let mut out = Vec::new();
    for f in standard_family(plan)? {
        if in_domain_of_r(plan, &f)? {
            out.push(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::{BesselParams, QGrid};

    #[test]
    fn zero_moment_probes_balance() {
        for (a, b) in [(0.0, 0.0), (0.5, 0.25), (1.0, -0.25)] {
            let g = QGrid::new(0.5, -20, 40).unwrap();
            let plan = TransformPlan::new(&g, BesselParams::new(a, b).unwrap()).unwrap();
            for f in zero_moment_family(&plan).unwrap() {
                assert!(plan.has_vanishing_moment(&f).unwrap());
            }
            for f in point_family(&plan).unwrap() {
                assert!(!plan.has_vanishing_moment(&f).unwrap());
            }
        }
    }

    #[test]
    fn domain_filter() {
        let g = QGrid::new(0.5, -20, 40).unwrap();
        let plan = TransformPlan::new(&g, BesselParams::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(uncertainty_family(&plan).unwrap().len(), 4);
        let plan = TransformPlan::new(&g, BesselParams::new(0.5, 0.25).unwrap()).unwrap();
        assert_eq!(uncertainty_family(&plan).unwrap().len(), 10);
    }

    #[test]
    fn small_grid_rejected() {
        let g = QGrid::new(0.5, 0, 10).unwrap();
        let plan = TransformPlan::new(&g, BesselParams::new(0.0, 0.0).unwrap()).unwrap();
        assert!(matches!(standard_family(&plan), Err(QError::GridTooSmall(_))));
    }
}
