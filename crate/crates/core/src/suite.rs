//! The verification suite behind `verify`: numbered checks for one
//! `(q, alpha, beta)` cell on a grid and its refinement.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::numfmt::Sig17;
use crate::par;
use crate::probes;
use crate::qgrid::{
    jackson_integral, q_derivative, weighted_integral, BesselParams, Endpoint, GridFunction, JacksonRange, QGrid,
};
use crate::qtransform::{calibrate_normalization, closed_form_normalization, involution_residual, Mode, TransformPlan};
use crate::qwavelet::{cwt_fourier, cwt_many, daughter_spectrum, daughter_wavelet, plancherel_ratio_of, Scaleogram, WaveletSpec};
use crate::uncertainty::{heisenberg_ratios, lower_constant_of, report_from, weighted_energy, UncertaintyReport};

pub const JACKSON_TOL: f64 = 1e-12;
pub const DERIVATIVE_TOL: f64 = 1e-12;
pub const DILATION_TOL: f64 = 1e-12;
pub const INVOLUTION_TOL: f64 = 1e-6;
pub const CALIBRATION_DRIFT: f64 = 1e-3;
pub const FACTORIZATION_TOL: f64 = 1e-8;
pub const ROUTE_TOL: f64 = 1e-8;
pub const SPREAD_TOL: f64 = 1e-6;
pub const REFINEMENT_TOL: f64 = 1e-2;
pub const HEISENBERG_FLOOR: f64 = 0.5 - 1e-3;
pub const SCALE_INVARIANCE_TOL: f64 = 1e-12;

/// Index offsets of the 5 x 5 daughter sample, measured from the grid centre.
const SAMPLE_OFFSETS: [i64; 5] = [2, 4, 6, 8, 10];
/// Spectral indices this close to either grid end are excluded from the
/// factorization check.
const INTERIOR_MARGIN: i64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Pass when `value < limit`.
    Below,
    /// Pass when `value >= limit`.
    AtLeast,
    /// Pass when `value > limit`.
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: &'static str,
    pub value: Sig17,
    pub bound: Bound,
    pub limit: Sig17,
}

impl Metric {
    fn new(name: &'static str, value: f64, bound: Bound, limit: f64) -> Self {
        Metric {
            name,
            value: Sig17(value),
            bound,
            limit: Sig17(limit),
        }
    }

    pub fn pass(&self) -> bool {
        let (v, l) = (self.value.0, self.limit.0);
        match self.bound {
            Bound::Below => v < l,
            Bound::AtLeast => v >= l,
            Bound::Above => v > l,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub metrics: Vec<Metric>,
}

impl Check {
    fn new(id: u8, name: &'static str, metrics: Vec<Metric>) -> Self {
        Check {
            id,
            name,
            pass: metrics.iter().all(Metric::pass),
            metrics,
        }
    }

    fn failed(id: u8, name: &'static str) -> Self {
        Check {
            id,
            name,
            pass: false,
            metrics: Vec::new(),
        }
    }
}

/// Constants measured while running the suite, reported next to the checks.
#[derive(Debug, Clone, Serialize)]
pub struct Measured {
    pub c_qv: Sig17,
    pub c_qv_closed_form: Sig17,
    pub c_qv_refined: Sig17,
    #[serde(rename = "C_v_psi")]
    pub c_v_psi: Sig17,
    pub plancherel_ratio: Sig17,
    pub plancherel_ratio_refined: Sig17,
    #[serde(rename = "q4v2_C_v_psi")]
    pub q4v2_c_v_psi: Sig17,
    pub kappa: Sig17,
    pub heisenberg_min: Sig17,
    #[serde(rename = "K_emp")]
    pub k_emp: Sig17,
    #[serde(rename = "K_emp_refined")]
    pub k_emp_refined: Sig17,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub q: Sig17,
    pub alpha: Sig17,
    pub beta: Sig17,
    pub n_low: i64,
    pub n_high: i64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub measured: Measured,
    /// Per-error messages for checks that could not be evaluated.
    pub errors: Vec<String>,
}

impl CellReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check(&self, id: u8) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

fn max_rel(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(got, want)| if want == 0.0 { got.abs() } else { ((got - want) / want).abs() })
        .fold(0.0, f64::max)
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo - 1.0
    } else {
        f64::INFINITY
    }
}

/// Power rule of the Jackson integral on `[0, 1]` for `k <= 8`.
pub fn jackson_power_rule(q: f64) -> Result<f64> {
    // enough terms that q^n x^k is below 1e-18 for every k
    let n_high = ((1e-18f64).ln() / q.ln()).ceil() as i64 + 10;
    let g = QGrid::new(q, 0, n_high)?;
    let mut pairs = Vec::new();
    for k in 0..=8 {
        let got = jackson_integral(|x| x.powi(k), JacksonRange::Interval(Endpoint::Zero, Endpoint::Index(0)), &g)?;
        pairs.push((got, (1.0 - q) / (1.0 - q.powi(k + 1))));
    }
    Ok(max_rel(pairs))
}

/// Power rule of the q-derivative at every interior point for `k <= 8`.
pub fn derivative_power_rule(grid: &QGrid) -> Result<f64> {
    let q = grid.q();
    let mut pairs = Vec::new();
    for k in 0..=8 {
        let f = GridFunction::from_fn(grid, |x| x.powi(k))?;
        let d = q_derivative(&f)?;
        let qk = (1.0 - q.powi(k)) / (1.0 - q);
        for n in d.grid().indices() {
            let x = grid.point(n);
            let want = if k == 0 { 0.0 } else { qk * x.powi(k - 1) };
            pairs.push((d.value_at(n).unwrap(), want));
        }
    }
    Ok(max_rel(pairs))
}

/// Both sides of the change of variables for `a = q^m`, `m = -2..=3`.
pub fn dilation_identity(plan: &TransformPlan) -> Result<f64> {
    let v = plan.v();
    let e = 2.0 * v.abs_v() + 2.0;
    let mut pairs = Vec::new();
    for f in probes::point_family(plan)? {
        let lhs = weighted_integral(&f, v);
        for m in -2..=3 {
            let a = plan.q().powf(m as f64);
            let rhs = a.powf(-e) * weighted_integral(&crate::qgrid::dilate(&f, m)?, v);
            pairs.push((rhs, lhs));
        }
    }
    Ok(max_rel(pairs))
}

/// Scale and position exponents of the 5 x 5 daughter sample.
pub fn daughter_sample(spec: &WaveletSpec) -> (Vec<i64>, Vec<i64>) {
    let g = spec.plan().spatial();
    let c0 = (g.n_low() + g.n_high()).div_euclid(2);
    let s0 = spec.mother().support().map(|s| s.0).unwrap_or(0);
    let ks = SAMPLE_OFFSETS.iter().map(|d| c0 + d - s0).collect();
    let bs = SAMPLE_OFFSETS.iter().map(|d| c0 + d).collect();
    (ks, bs)
}

/// Worst normwise relative error of `F[daughter] = sqrt(a) F Psi(a .) j~(b .)`
/// over interior spectral indices.
pub fn daughter_factorization(spec: &WaveletSpec) -> Result<f64> {
    let (ks, bs) = daughter_sample(spec);
    let plan = spec.plan();
    let g = plan.spectral();
    let cells: Vec<(i64, i64)> = ks.iter().flat_map(|&k| bs.iter().map(move |&b| (k, b))).collect();
    let errs = par::map(&cells, |&(k, b)| -> Result<f64> {
        let d = daughter_wavelet(spec, k, b)?;
        let lhs = plan.transform_with(&d, Mode::MomentFree)?;
        let rhs = daughter_spectrum(spec, k, b);
        let interior = (g.n_low() + INTERIOR_MARGIN)..=(g.n_high() - INTERIOR_MARGIN);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for m in interior {
            let i = (m - g.n_low()) as usize;
            num = num.max((lhs.values()[i] - rhs[i]).abs());
            den = den.max(rhs[i].abs());
        }
        Ok(num / den)
    });
    errs.into_iter().try_fold(0.0f64, |acc, e| Ok(acc.max(e?)))
}

/// Normwise disagreement of the direct and Fourier routes over every scale
/// and position.
pub fn route_agreement(spec: &WaveletSpec, f: &GridFunction) -> Result<f64> {
    let ks = spec.scales();
    let bs: Vec<i64> = spec.plan().spatial().indices().collect();
    let direct = cwt_many(std::slice::from_ref(f), spec, &ks, &bs)?.remove(0);
    let fourier = cwt_fourier(f, spec, &ks, &bs)?;
    let num = direct
        .coeffs()
        .iter()
        .zip(fourier.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let den = fourier.coeffs().iter().map(|b| b.abs()).fold(0.0, f64::max);
    Ok(num / den)
}

/// Everything computed from the probe family on one grid.
pub struct GridRun {
    pub plan: Arc<TransformPlan>,
    pub spec: WaveletSpec,
    pub probes: Vec<GridFunction>,
    pub scaleograms: Vec<Scaleogram>,
    pub calibration_residual: f64,
}

impl GridRun {
    /// Calibrates on the probe family, builds the pair wavelet and computes
    /// every probe's scaleogram over all scales and positions.
    pub fn new(grid: &QGrid, v: BesselParams) -> Result<Self> {
        let base = TransformPlan::new(grid, v)?;
        let probes = probes::standard_family(&base)?;
        let cal = calibrate_normalization(v, grid, &probes)?;
        let plan = Arc::new(base.with_normalization(cal.c_qv)?);
        let spec = WaveletSpec::pair(Arc::clone(&plan), 2, 3)?;
        let positions: Vec<i64> = grid.indices().collect();
        let scaleograms = cwt_many(&probes, &spec, &spec.scales(), &positions)?;
        Ok(GridRun {
            plan,
            spec,
            probes,
            scaleograms,
            calibration_residual: cal.residual,
        })
    }

    pub fn plancherel_ratios(&self) -> Result<Vec<f64>> {
        self.probes
            .iter()
            .zip(&self.scaleograms)
            .map(|(f, s)| plancherel_ratio_of(s, f, &self.plan))
            .collect()
    }

    /// Reports for probes in the domain of R.
    pub fn uncertainty_reports(&self) -> Result<Vec<UncertaintyReport>> {
        let mut out = Vec::new();
        for (f, s) in self.probes.iter().zip(&self.scaleograms) {
            if probes::in_domain_of_r(&self.plan, f)? {
                out.push(report_from(f, s, &self.plan)?);
            }
        }
        Ok(out)
    }
}

/// Runs checks 1-9 and the route cross-check for one cell.
pub fn run_cell(q: f64, alpha: f64, beta: f64, grid: &QGrid) -> Result<CellReport> {
    let v = BesselParams::new(alpha, beta)?;
    let grid = QGrid::new(q, grid.n_low(), grid.n_high())?;
    let fine = grid.doubled();
    let mut checks = Vec::new();
    let mut errors = Vec::new();
    let mut record = |id: u8, name: &'static str, r: Result<Vec<Metric>>| match r {
        Ok(m) => checks.push(Check::new(id, name, m)),
        Err(e) => {
            errors.push(format!("check {id} ({name}): {e}"));
            checks.push(Check::failed(id, name));
        }
    };

    record(1, "jackson_power_rule", jackson_power_rule(q).map(|e| vec![Metric::new("max_rel_err", e, Bound::Below, JACKSON_TOL)]));
    record(2, "q_derivative_power_rule", derivative_power_rule(&grid).map(|e| vec![Metric::new("max_rel_err", e, Bound::Below, DERIVATIVE_TOL)]));

    let base = TransformPlan::new(&grid, v)?;
    record(3, "change_of_variables", dilation_identity(&base).map(|e| vec![Metric::new("max_rel_err", e, Bound::Below, DILATION_TOL)]));

    let coarse = GridRun::new(&grid, v);
    let refined = GridRun::new(&fine, v);
    let nan = f64::NAN;
    let mut measured = Measured {
        c_qv: Sig17(nan),
        c_qv_closed_form: Sig17(closed_form_normalization(q, &v)),
        c_qv_refined: Sig17(nan),
        c_v_psi: Sig17(nan),
        plancherel_ratio: Sig17(nan),
        plancherel_ratio_refined: Sig17(nan),
        q4v2_c_v_psi: Sig17(nan),
        kappa: Sig17(nan),
        heisenberg_min: Sig17(nan),
        k_emp: Sig17(nan),
        k_emp_refined: Sig17(nan),
    };

    let (coarse, refined) = match (coarse, refined) {
        (Ok(c), Ok(r)) => (c, r),
        (c, r) => {
            let e = c.err().or(r.err()).unwrap();
            for (id, name) in CELL_CHECKS {
                record(id, name, Err(e.clone()));
            }
            return Ok(finish(q, alpha, beta, &grid, checks, measured, errors));
        }
    };

    measured.c_qv = Sig17(coarse.plan.c_qv());
    measured.c_qv_refined = Sig17(refined.plan.c_qv());
    let involution = coarse
        .probes
        .iter()
        .map(|f| involution_residual(&coarse.plan, f))
        .collect::<Result<Vec<_>>>()
        .map(|r| r.into_iter().fold(coarse.calibration_residual, f64::max));
    record(4, "fourier_involution", involution.map(|r| {
        vec![
            Metric::new("max_residual", r, Bound::Below, INVOLUTION_TOL),
            Metric::new("c_qv_refinement_drift", (coarse.plan.c_qv() / refined.plan.c_qv() - 1.0).abs(), Bound::Below, CALIBRATION_DRIFT),
            Metric::new("probes", coarse.probes.len() as f64, Bound::AtLeast, 5.0),
        ]
    }));

    record(5, "daughter_factorization", daughter_factorization(&coarse.spec).map(|e| vec![Metric::new("max_normwise_err", e, Bound::Below, FACTORIZATION_TOL)]));

    let cpsi = coarse.spec.admissibility();
    measured.c_v_psi = Sig17(cpsi);
    measured.q4v2_c_v_psi = Sig17(q.powf(4.0 * v.abs_v() + 2.0) * cpsi);

    let kappa = coarse
        .probes
        .iter()
        .zip(&coarse.scaleograms)
        .map(|(f, s)| weighted_energy(f, s, &coarse.plan).map(|(l, r)| l / r))
        .collect::<Result<Vec<_>>>();
    if let Ok(k) = &kappa {
        measured.kappa = Sig17(k.iter().sum::<f64>() / k.len() as f64);
    }
    record(6, "weighted_energy_identity", kappa.map(|k| {
        vec![
            Metric::new("kappa_spread", spread(&k), Bound::Below, SPREAD_TOL),
            Metric::new("probes", k.len() as f64, Bound::AtLeast, 5.0),
        ]
    }));

    let planch = coarse.plancherel_ratios().and_then(|a| Ok((a, refined.plancherel_ratios()?)));
    if let Ok((a, b)) = &planch {
        measured.plancherel_ratio = Sig17(a.iter().sum::<f64>() / a.len() as f64);
        measured.plancherel_ratio_refined = Sig17(b.iter().sum::<f64>() / b.len() as f64);
    }
    record(7, "wavelet_plancherel", planch.map(|(a, b)| {
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        vec![
            Metric::new("ratio_spread", spread(&a), Bound::Below, SPREAD_TOL),
            Metric::new("refinement_drift", (ma / mb - 1.0).abs(), Bound::Below, REFINEMENT_TOL),
            Metric::new("probes", a.len() as f64, Bound::AtLeast, 5.0),
        ]
    }));

    let heis = coarse
        .scaleograms
        .iter()
        .map(|s| heisenberg_ratios(s, &coarse.plan))
        .collect::<Result<Vec<_>>>()
        .map(|all| all.into_iter().flatten().map(|(_, r)| r).fold(f64::INFINITY, f64::min));
    if let Ok(h) = &heis {
        measured.heisenberg_min = Sig17(*h);
    }
    record(8, "intermediate_heisenberg", heis.map(|h| vec![Metric::new("min_slice_ratio", h, Bound::AtLeast, HEISENBERG_FLOOR)]));

    let unc = (|| -> Result<Vec<Metric>> {
        let rc = coarse.uncertainty_reports()?;
        let rf = refined.uncertainty_reports()?;
        let (kc, kf) = (lower_constant_of(&rc)?, lower_constant_of(&rf)?);
        measured.k_emp = Sig17(kc);
        measured.k_emp_refined = Sig17(kf);
        let mut inv = 0.0f64;
        for (f, r) in coarse.probes.iter().filter(|f| probes::in_domain_of_r(&coarse.plan, f).unwrap_or(false)).zip(&rc) {
            let g = f.scaled(7.0);
            let s = crate::qwavelet::cwt(&g, &coarse.spec, &coarse.spec.scales(), &grid.indices().collect::<Vec<_>>())?;
            let r7 = report_from(&g, &s, &coarse.plan)?;
            inv = inv.max((r7.ratio / r.ratio - 1.0).abs());
        }
        Ok(vec![
            Metric::new("K_emp", kc, Bound::Above, 0.0),
            Metric::new("refinement_drift", (kc / kf - 1.0).abs(), Bound::Below, REFINEMENT_TOL),
            Metric::new("scale_invariance_err", inv, Bound::Below, SCALE_INVARIANCE_TOL),
            Metric::new("probes", rc.len() as f64, Bound::AtLeast, 1.0),
        ])
    })();
    record(9, "uncertainty_ratio", unc);

    let f = &coarse.probes[3];
    record(0, "cwt_route_agreement", route_agreement(&coarse.spec, f).map(|e| vec![Metric::new("max_normwise_err", e, Bound::Below, ROUTE_TOL)]));

    Ok(finish(q, alpha, beta, &grid, checks, measured, errors))
}

const CELL_CHECKS: [(u8, &str); 7] = [
    (4, "fourier_involution"),
    (5, "daughter_factorization"),
    (6, "weighted_energy_identity"),
    (7, "wavelet_plancherel"),
    (8, "intermediate_heisenberg"),
    (9, "uncertainty_ratio"),
    (0, "cwt_route_agreement"),
];

fn finish(q: f64, alpha: f64, beta: f64, grid: &QGrid, checks: Vec<Check>, measured: Measured, errors: Vec<String>) -> CellReport {
    CellReport {
        q: Sig17(q),
        alpha: Sig17(alpha),
        beta: Sig17(beta),
        n_low: grid.n_low(),
        n_high: grid.n_high(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        measured,
        errors,
    }
}
