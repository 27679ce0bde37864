//! Worked examples, each checked against a sum written out independently here.

use std::sync::Arc;

use qwave::qbessel::{generalized_q_bessel_operator, modified_q_bessel, normalized_q_bessel, KernelTable};
use qwave::qgrid::{dilate, jackson_integral, q_derivative, qpochhammer, weighted_integral, weighted_p_norm, PochLen};
use qwave::qwavelet::admissibility_constant;
use qwave::{BesselParams, Endpoint, GridFunction, JacksonRange, QGrid, SeriesTolerance, TransformPlan, WaveletSpec};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn infinite_pochhammer_matches_partial_product() {
    let mut p = 1.0f64;
    let mut t = 0.5f64;
    while t.abs() >= 1e-16 {
        p *= 1.0 - t;
        t *= 0.5;
    }
    assert!(rel(qpochhammer(0.5, 0.5, PochLen::Infinite), p) < 1e-15);
    assert_eq!(qpochhammer(0.5, 0.5, PochLen::Finite(2)), 0.375);
    assert_eq!(qpochhammer(0.9, 0.3, PochLen::Finite(0)), 1.0);
}

#[test]
fn jackson_examples() {
    let g = QGrid::new(0.5, 0, 80).unwrap();
    // f = 1 on [q^3, q^1]: telescoping to q - q^3
    let v = jackson_integral(|_| 1.0, JacksonRange::Interval(Endpoint::Index(3), Endpoint::Index(1)), &g).unwrap();
    assert!(rel(v, 0.5 - 0.125) < 1e-15);
    // f = x on [0, 1]: (1 - q) sum q^(2n) = 1 / (1 + q)
    let v = jackson_integral(|x| x, JacksonRange::Interval(Endpoint::Zero, Endpoint::Index(0)), &g).unwrap();
    assert!(rel(v, 2.0 / 3.0) < 1e-15);
    let v = jackson_integral(|_| 0.0, JacksonRange::ZeroToInf, &g).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn derivative_examples() {
    let q = 0.5;
    let g = QGrid::new(q, -5, 10).unwrap();
    let d = q_derivative(&GridFunction::from_fn(&g, |x| x * x).unwrap()).unwrap();
    for n in d.grid().indices() {
        let x = g.point(n);
        assert!(rel(d.value_at(n).unwrap(), (1.0 + q) * x) < 1e-15);
    }
    let d = q_derivative(&GridFunction::from_fn(&g, |x| x).unwrap()).unwrap();
    assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn norm_of_point_indicator() {
    let g = QGrid::new(0.5, -3, 3).unwrap();
    let f = GridFunction::indicator(&g, 1).unwrap();
    let n = weighted_p_norm(&f, 2.0, &BesselParams::new(0.0, 0.0).unwrap()).unwrap();
    assert!(rel(n * n, 0.125) < 1e-15);
}

#[test]
fn change_of_variables_polynomial_profile() {
    // truncated polynomial, q = 0.5, v = (0.5, 0.25), a = q^2
    let q = 0.5f64;
    let v = BesselParams::new(0.5, 0.25).unwrap();
    let g = QGrid::new(q, -20, 40).unwrap();
    let poly = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
    let entries: Vec<(i64, f64)> = (0..=10).map(|n| (n, poly(q.powi(n as i32)))).collect();
    let f = GridFunction::from_entries(&g, &entries).unwrap();
    let e = 2.0 * 0.75 + 2.0;
    // int f(x/a) x^(2|v|+1) d_qx with f(x/a) at x = q^n being f at q^(n-2)
    let lhs: f64 = (0..=10).map(|n: i32| (1.0 - q) * poly(q.powi(n)) * q.powi(n + 2).powf(e)).sum();
    let rhs: f64 = (0..=10).map(|n: i32| (1.0 - q) * poly(q.powi(n)) * q.powi(n).powf(e)).sum::<f64>() * q.powi(2).powf(e);
    assert!(rel(lhs, rhs) < 1e-12);
    let dilated = weighted_integral(&dilate(&f, 2).unwrap(), &v);
    assert!(rel(dilated, lhs) < 1e-12);
}

/// Series summed term by term with no stopping rule.
fn brute_series(alpha: f64, x: f64, q: f64, terms: usize) -> f64 {
    let mut s = 0.0;
    for n in 0..terms {
        let mut den = 1.0;
        for k in 0..n {
            den *= (1.0 - q.powf(2.0 * alpha + 2.0 + 2.0 * k as f64)) * (1.0 - q.powi(2 + 2 * k as i32));
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * q.powi((n * (n + 1)) as i32) * x.powi(2 * n as i32) / den;
    }
    s
}

#[test]
fn modified_kernel_composition() {
    let q = 0.5f64;
    let v = BesselParams::new(0.5, 0.25).unwrap();
    let x = q * q;
    let got = modified_q_bessel(&v, x, q, SeriesTolerance::default()).unwrap();
    let want = x.powf(-0.5) * brute_series(0.25, q.powf(-0.25) * x, q, 60);
    assert!(rel(got.value, want) < 1e-14);
    // beta = 0 reduces to the plain series
    let v0 = BesselParams::new(0.7, 0.0).unwrap();
    let a = modified_q_bessel(&v0, 0.3, q, SeriesTolerance::default()).unwrap().value;
    let b = normalized_q_bessel(0.7, 0.3, q, SeriesTolerance::default()).unwrap().value;
    assert_eq!(a, b);
    // x = 1 has unit prefactor
    let c = modified_q_bessel(&v, 1.0, q, SeriesTolerance::default()).unwrap().value;
    let d = normalized_q_bessel(0.25, q.powf(-0.25), q, SeriesTolerance::default()).unwrap().value;
    assert_eq!(c, d);
}

#[test]
fn series_at_half_with_fifty_terms() {
    let got = normalized_q_bessel(0.0, 0.5, 0.5, SeriesTolerance::default()).unwrap();
    assert!((got.value - brute_series(0.0, 0.5, 0.5, 50)).abs() < 1e-12);
}

#[test]
fn operator_examples() {
    let q = 0.5f64;
    let (a, b) = (0.5f64, 0.25f64);
    let v = BesselParams::new(a, b).unwrap();
    let g = QGrid::new(q, -5, 10).unwrap();
    let qa = q.powf(2.0 * a);
    let qb = q.powf(2.0 * b);
    let d = generalized_q_bessel_operator(&GridFunction::from_fn(&g, |_| 3.0).unwrap(), &v).unwrap();
    for n in d.grid().indices() {
        let x = g.point(n);
        assert!(rel(d.value_at(n).unwrap(), 3.0 * (1.0 - qa) * (1.0 - qb) / (x * x)) < 1e-13);
    }
    let d = generalized_q_bessel_operator(&GridFunction::from_fn(&g, |x| x * x).unwrap(), &v).unwrap();
    let want = q.powi(-2) - qa - qb + qa * qb * q * q;
    assert!(d.values().iter().all(|y| rel(*y, want) < 1e-13));
}

fn plan(q: f64, a: f64, b: f64) -> TransformPlan {
    TransformPlan::new(&QGrid::new(q, -20, 40).unwrap(), BesselParams::new(a, b).unwrap()).unwrap()
}

#[test]
fn translation_matches_nested_sum() {
    let p = plan(0.5, 0.0, 0.0);
    let g = p.spatial().clone();
    let q = g.q();
    let t = KernelTable::new(0.0, q, -120, 160).unwrap();
    let c = p.c_qv();
    let f = GridFunction::indicator(&g, 1).unwrap();
    let got = p.translate(&f, 1).unwrap();
    let w = |n: i64| (1.0 - q) * q.powf(2.0 * n as f64);
    for y in [-5i64, 0, 1, 4, 12] {
        let mut outer = 0.0;
        for m in g.indices() {
            // F f(xi_m) for the indicator of q^1
            let ff = c * w(1) * t.j(1 + m);
            outer += ff * t.j(1 + m) * t.j(y + m) * w(m);
        }
        let want = c * outer;
        let scale = got.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((got.value_at(y).unwrap() - want).abs() < 1e-12 * scale, "y={y}");
    }
}

#[test]
fn admissibility_of_point_pair() {
    let p = plan(0.5, 0.5, 0.25);
    let g = p.spatial().clone();
    let q = g.q();
    let psi = GridFunction::from_entries(&g, &[(2, 1.0), (3, -0.5)]).unwrap();
    let got = admissibility_constant(&psi, &p).unwrap();
    // F psi at xi = q^(beta+m), then (1-q) sum of squares
    let (b, e) = (0.25f64, 2.0 * 0.75 + 2.0);
    let kernel = |s: i64| q.powf(-2.0 * b * (b + s as f64)) * modified_table(q).j(s);
    let w = |n: i64| (1.0 - q) * q.powf(n as f64 * e);
    let mut sum = 0.0;
    for m in g.indices() {
        let fp = p.c_qv() * (w(2) * kernel(2 + m) - 0.5 * w(3) * kernel(3 + m));
        sum += fp * fp;
    }
    let want = (1.0 - q) * sum;
    assert!(rel(got, want) < 1e-12, "{got} vs {want}");
    // zero wavelet: constant 0, rejected as a mother
    assert_eq!(admissibility_constant(&GridFunction::zeros(&g), &p).unwrap(), 0.0);
    assert!(WaveletSpec::new(GridFunction::zeros(&g), Arc::new(p)).is_err());
}

fn modified_table(q: f64) -> KernelTable {
    KernelTable::new(0.25, q, -60, 100).unwrap()
}

#[test]
fn indicator_at_one_transforms_to_kernel() {
    let p = plan(0.3, 1.0, -0.25);
    let f = GridFunction::indicator(p.spatial(), 0).unwrap();
    let ff = p.transform(&f).unwrap();
    let q = p.q();
    let tol = SeriesTolerance::default();
    for m in [10i64, 20, 30, 40] {
        let xi = p.spectral().point(m);
        let want = p.c_qv() * (1.0 - q) * modified_q_bessel(p.v(), xi, q, tol).unwrap().value;
        assert!(rel(ff.value_at(m).unwrap(), want) < 1e-12, "m={m}");
    }
}
