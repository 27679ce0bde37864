//! Admissible wavelets, daughter wavelets, the continuous wavelet transform and
//! its Plancherel ratio.
//!
//! Scales are `a = q^k` and positions `b = q^n` with integer `k`, `n`. The
//! dilated mother `Psi_a(x) = a^(-(2|v|+2)) Psi(x/a)` has transform
//! `F Psi(a xi)`, which on the spectral grid is the mother's spectrum shifted
//! by `k` indices. The mother's spectrum is therefore tabulated once over an
//! extended index range.

use std::sync::Arc;

use crate::error::{QError, Result};
use crate::par;
use crate::qbessel::generalized_q_bessel_operator;
use crate::qgrid::{weighted_p_norm, GridFunction, QGrid};
use crate::qtransform::{Mode, Side, TransformPlan};
use crate::sum::{dot, neumaier};

#[derive(Debug, Clone)]
pub struct WaveletSpec {
    mother: GridFunction,
    plan: Arc<TransformPlan>,
    admissibility: f64,
    spectrum: Vec<f64>,
    spectrum_lo: i64,
    support: (i64, i64),
}

/// `(1-q) sum |F Psi(q^(beta+m))|^2` over the grid: the Jackson sum of
/// `|F Psi(a)|^2 d_qa / a`.
pub fn admissibility_constant(psi: &GridFunction, plan: &TransformPlan) -> Result<f64> {
    let mode = if plan.has_vanishing_moment(psi)? { Mode::MomentFree } else { Mode::Generic };
    let fp = plan.transform_with(psi, mode)?;
    let c = (1.0 - plan.q()) * neumaier(fp.values().iter().map(|x| x * x));
    if !c.is_finite() {
        return Err(QError::NotAdmissible("non-finite admissibility sum".into()));
    }
    Ok(c)
}

impl WaveletSpec {
    /// Accepts `mother` if its admissibility constant is finite and positive.
    pub fn new(mother: GridFunction, plan: Arc<TransformPlan>) -> Result<Self> {
        if plan.side_of(&mother)? != Side::Spatial {
            return Err(QError::GridMismatch("mother wavelet must be spatial".into()));
        }
        let support = mother
            .support()
            .ok_or_else(|| QError::NotAdmissible("zero mother wavelet".into()))?;
        let g = plan.spatial();
        let (lo, hi) = (g.n_low(), g.n_high());
        // output indices m with every n + m inside the kernel table
        let spectrum_lo = plan.table().smin() - lo;
        let spectrum_hi = plan.table().smax() - hi;
        let mode = if plan.has_vanishing_moment(&mother)? { Mode::MomentFree } else { Mode::Generic };
        let outs: Vec<i64> = (spectrum_lo..=spectrum_hi).collect();
        let spectrum = plan.apply(mother.values(), Side::Spatial, &outs, mode)?;
        let admissibility = (1.0 - plan.q())
            * neumaier((lo..=hi).map(|m| spectrum[(m - spectrum_lo) as usize].powi(2)));
        if !(admissibility > 0.0) || !admissibility.is_finite() {
            return Err(QError::NotAdmissible(format!("admissibility constant {admissibility:e}")));
        }
        Ok(WaveletSpec {
            mother,
            plan,
            admissibility,
            spectrum,
            spectrum_lo,
            support,
        })
    }

    /// `Psi = delta_{s1} q^(-s1(2alpha+2)) - delta_{s2} q^(-s2(2alpha+2))`,
    /// scaled to unit peak; its weighted moment is zero.
    pub fn pair(plan: Arc<TransformPlan>, s1: i64, s2: i64) -> Result<Self> {
        if s1 == s2 {
            return Err(QError::Invalid("pair wavelet needs two distinct indices".into()));
        }
        let q = plan.q();
        let e = 2.0 * plan.v().alpha() + 2.0;
        let (a, b) = (q.powf(-(s1 as f64) * e), -q.powf(-(s2 as f64) * e));
        let peak = a.abs().max(b.abs());
        let psi = GridFunction::from_entries(plan.spatial(), &[(s1, a / peak), (s2, b / peak)])?;
        Self::new(psi, plan)
    }

    /// The generalized q-Bessel operator applied to a smooth bump of
    /// half-width `width` centred at index `center`, scaled to unit peak.
    /// The operator annihilates the weighted moment, so this is admissible.
    pub fn bump(plan: Arc<TransformPlan>, center: i64, width: i64) -> Result<Self> {
        if width < 1 {
            return Err(QError::Invalid("bump width must be at least 1".into()));
        }
        let g = plan.spatial();
        let entries: Vec<(i64, f64)> = (center - width..=center + width)
            .map(|n| {
                let t = (n - center) as f64 / (width + 1) as f64;
                (n, (1.0 - t * t).powi(2))
            })
            .collect();
        let bump = GridFunction::from_entries(g, &entries)?;
        let d = generalized_q_bessel_operator(&bump, plan.v())?;
        let peak = d.values().iter().map(|x| x.abs()).fold(0.0, f64::max);
        let mut values = vec![0.0; g.len()];
        for n in d.grid().indices() {
            values[g.offset(n).unwrap()] = d.value_at(n).unwrap() / peak;
        }
        Self::new(GridFunction::new(g, values)?, plan)
    }

    pub fn mother(&self) -> &GridFunction {
        &self.mother
    }
    pub fn plan(&self) -> &TransformPlan {
        &self.plan
    }
    pub fn plan_arc(&self) -> Arc<TransformPlan> {
        Arc::clone(&self.plan)
    }
    pub fn admissibility(&self) -> f64 {
        self.admissibility
    }

    /// `F Psi(q^(beta+j))` for any index within the tabulated range.
    pub fn spectrum_at(&self, j: i64) -> Option<f64> {
        let i = j - self.spectrum_lo;
        (i >= 0 && (i as usize) < self.spectrum.len()).then(|| self.spectrum[i as usize])
    }

    /// Scale exponents `k` whose dilated mother stays inside the grid.
    pub fn scales(&self) -> Vec<i64> {
        let g = self.plan.spatial();
        (g.n_low() - self.support.0..=g.n_high() - self.support.1).collect()
    }

    fn check_scale(&self, k: i64) -> Result<()> {
        let g = self.plan.spatial();
        let (lo, hi) = (self.support.0 + k, self.support.1 + k);
        if !g.contains(lo) || !g.contains(hi) {
            return Err(QError::SupportOverflow(format!(
                "mother dilated by q^{k} occupies [{lo}, {hi}], outside [{}, {}]",
                g.n_low(),
                g.n_high()
            )));
        }
        Ok(())
    }

    /// `Psi_a = a^(-(2|v|+2)) Psi(x/a)` for `a = q^k`.
    pub fn dilated_mother(&self, k: i64) -> Result<GridFunction> {
        self.check_scale(k)?;
        let g = self.plan.spatial();
        let factor = g.q().powf(-(k as f64) * (2.0 * self.plan.v().abs_v() + 2.0));
        crate::qgrid::dilate(&self.mother, k).map(|f| f.scaled(factor))
    }

    /// Spectrum of the dilated mother on the spectral grid: `F Psi(q^k xi_m)`.
    fn dilated_spectrum(&self, k: i64) -> Vec<f64> {
        self.plan
            .spectral()
            .indices()
            .map(|m| self.spectrum_at(k + m).expect("scale checked against spectrum range"))
            .collect()
    }
}

/// `sqrt(a) T_b Psi_a` for `a = q^k`, `b = q^b_index`, on the spatial grid.
pub fn daughter_wavelet(spec: &WaveletSpec, k: i64, b_index: i64) -> Result<GridFunction> {
    spec.check_scale(k)?;
    let plan = spec.plan();
    if !plan.spatial().contains(b_index) {
        return Err(QError::OffGrid(plan.spatial().point(b_index)));
    }
    let outs: Vec<i64> = plan.spatial().indices().collect();
    let vals = plan.apply(&daughter_spectrum(spec, k, b_index), Side::Spectral, &outs, Mode::Generic)?;
    GridFunction::new(plan.spatial(), vals)
}

/// `sqrt(a) F Psi(a xi) j~(b xi)` on the spectral grid: the transform of the daughter.
pub fn daughter_spectrum(spec: &WaveletSpec, k: i64, b_index: i64) -> Vec<f64> {
    let plan = spec.plan();
    let root_a = plan.q().powf(k as f64 / 2.0);
    spec.dilated_spectrum(k)
        .iter()
        .zip(plan.spectral().indices())
        .map(|(p, m)| root_a * p * plan.kernel(b_index + m))
        .collect()
}

/// Wavelet coefficients over a scale x position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaleogram {
    grid: QGrid,
    abs_v: f64,
    scales: Vec<i64>,
    positions: Vec<i64>,
    coeffs: Vec<f64>,
}

impl Scaleogram {
    pub fn new(grid: &QGrid, abs_v: f64, scales: Vec<i64>, positions: Vec<i64>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != scales.len() * positions.len() {
            return Err(QError::GridMismatch("scaleogram shape".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(QError::Divergence("scaleogram entry".into()));
        }
        Ok(Scaleogram {
            grid: grid.clone(),
            abs_v,
            scales,
            positions,
            coeffs,
        })
    }

    pub fn q(&self) -> f64 {
        self.grid.q()
    }
    pub fn scales(&self) -> &[i64] {
        &self.scales
    }
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.positions.len() + j]
    }
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.positions.len();
        &self.coeffs[i * p..(i + 1) * p]
    }
    pub fn scale_point(&self, i: usize) -> f64 {
        self.q().powf(self.scales[i] as f64)
    }
    pub fn position_point(&self, j: usize) -> f64 {
        self.q().powf(self.positions[j] as f64)
    }

    /// Entrywise map `(a, b, C) -> value`.
    pub fn map(&self, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let p = self.positions.len();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| f(self.scale_point(idx / p), self.position_point(idx % p), c))
            .collect();
        Scaleogram {
            coeffs,
            ..self.clone()
        }
    }

    /// `(1-q)^2 sum |C(a,b)|^2 b^(2|v|+2) / a`: the Jackson double sum of
    /// `|C|^2 b^(2|v|+1) d_qa d_qb / a^2`.
    pub fn energy(&self) -> f64 {
        let q = self.q();
        let e = 2.0 * self.abs_v + 2.0;
        let bw: Vec<f64> = (0..self.positions.len()).map(|j| self.position_point(j).powf(e)).collect();
        let rows: Vec<f64> = (0..self.scales.len())
            .map(|i| {
                let r: Vec<f64> = self.row(i).iter().map(|c| c * c).collect();
                dot(&r, &bw) / self.scale_point(i)
            })
            .collect();
        (1.0 - q) * (1.0 - q) * neumaier(rows)
    }
}

fn check_cells(spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<()> {
    for &k in scales {
        spec.check_scale(k)?;
    }
    let g = spec.plan().spatial();
    if let Some(&b) = positions.iter().find(|&&b| !g.contains(b)) {
        return Err(QError::OffGrid(g.point(b)));
    }
    Ok(())
}

/// Direct route for several inputs at once: each daughter is built once and
/// integrated against every input. Cells run in parallel; every cell is an
/// independent ordered sum, so the result does not depend on scheduling.
pub fn cwt_many(fs: &[GridFunction], spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<Vec<Scaleogram>> {
    check_cells(spec, scales, positions)?;
    let plan = spec.plan();
    for f in fs {
        if plan.side_of(f)? != Side::Spatial {
            return Err(QError::GridMismatch("wavelet transform input must be spatial".into()));
        }
    }
    let c = plan.c_qv();
    let w = plan.weights(Side::Spatial);
    let fw: Vec<Vec<f64>> = fs
        .iter()
        .map(|f| f.values().iter().zip(w).map(|(a, b)| a * b).collect())
        .collect();
    let p = positions.len();
    let cells = par::map_range(scales.len() * p, |idx| -> Result<Vec<f64>> {
        let d = daughter_wavelet(spec, scales[idx / p], positions[idx % p])?;
        Ok(fw.iter().map(|g| c * dot(g, d.values())).collect())
    });
    let mut out = vec![Vec::with_capacity(cells.len()); fs.len()];
    for cell in cells {
        for (dst, v) in out.iter_mut().zip(cell?) {
            dst.push(v);
        }
    }
    out.into_iter()
        .map(|coeffs| Scaleogram::new(plan.spatial(), plan.v().abs_v(), scales.to_vec(), positions.to_vec(), coeffs))
        .collect()
}

/// `C(f)(a,b) = c sum_x f(x) Psi_(a,b)(x) w(x)`, the daughter-wavelet definition.
pub fn cwt(f: &GridFunction, spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<Scaleogram> {
    Ok(cwt_many(std::slice::from_ref(f), spec, scales, positions)?.remove(0))
}

/// Fourier route: `C(f)(a, .) = sqrt(a) F[F Psi(a .) F f]`.
pub fn cwt_fourier(f: &GridFunction, spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<Scaleogram> {
    check_cells(spec, scales, positions)?;
    let plan = spec.plan();
    let ff = plan.transform(f)?;
    if ff.grid() != plan.spectral() {
        return Err(QError::GridMismatch("wavelet transform input must be spatial".into()));
    }
    let rows = par::map(scales, |&k| {
        let root_a = plan.q().powf(k as f64 / 2.0);
        let h: Vec<f64> = spec
            .dilated_spectrum(k)
            .iter()
            .zip(ff.values())
            .map(|(p, x)| root_a * p * x)
            .collect();
        plan.apply(&h, Side::Spectral, positions, Mode::Generic)
    });
    let mut coeffs = Vec::with_capacity(scales.len() * positions.len());
    for r in rows {
        coeffs.extend(r?);
    }
    Scaleogram::new(plan.spatial(), plan.v().abs_v(), scales.to_vec(), positions.to_vec(), coeffs)
}

/// Scaleogram energy over `||f||^2`.
pub fn wavelet_plancherel_ratio(f: &GridFunction, spec: &WaveletSpec, scales: &[i64], positions: &[i64]) -> Result<f64> {
    let nf = weighted_p_norm(f, 2.0, spec.plan().v())?;
    if nf == 0.0 {
        return Err(QError::ZeroInput("Plancherel ratio of the zero function".into()));
    }
    Ok(cwt(f, spec, scales, positions)?.energy() / (nf * nf))
}

/// Plancherel ratio from an already computed scaleogram.
pub fn plancherel_ratio_of(s: &Scaleogram, f: &GridFunction, plan: &TransformPlan) -> Result<f64> {
    let nf2 = plan.norm_sq(f)?;
    if nf2 == 0.0 {
        return Err(QError::ZeroInput("Plancherel ratio of the zero function".into()));
    }
    Ok(s.energy() / nf2)
}
