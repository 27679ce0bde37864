//! Kernel values against an exact fixed-point evaluation of the series.
//!
//! `j_g(q^s; q^2)` for negative `s` is a sum of huge alternating terms; the
//! oracle sums them in big-integer fixed point with enough digits to absorb
//! the cancellation, then rounds once to `f64`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use qwave::qbessel::{normalized_q_bessel, KernelTable, SeriesTolerance};

/// Fixed-point reals with `digits` decimal places.
struct Fx {
    scale: BigInt,
    digits: usize,
}

impl Fx {
    fn new(digits: usize) -> Self {
        Fx {
            scale: BigInt::from(10u32).pow(digits as u32),
            digits,
        }
    }
    fn ratio(&self, p: u64, d: u64) -> BigInt {
        &self.scale * p / d
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b / &self.scale
    }
    fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * &self.scale / b
    }
    fn sqrt(&self, a: &BigInt) -> BigInt {
        (a * &self.scale).sqrt()
    }
    fn powi(&self, a: &BigInt, k: i64) -> BigInt {
        let mut out = self.scale.clone();
        for _ in 0..k.unsigned_abs() {
            out = self.mul(&out, a);
        }
        if k < 0 {
            self.div(&self.scale, &out)
        } else {
            out
        }
    }
    fn to_f64(&self, a: &BigInt) -> f64 {
        let neg = a.is_negative();
        let s = a.abs().to_string();
        let s = if s.len() <= self.digits {
            format!("0.{}{}", "0".repeat(self.digits - s.len()), s)
        } else {
            let (i, f) = s.split_at(s.len() - self.digits);
            format!("{i}.{f}")
        };
        let v: f64 = s.parse().unwrap();
        if neg {
            -v
        } else {
            v
        }
    }
}

/// `q^(2 gamma)` for gamma in quarter steps: `q^(k/2)` with one square root.
fn q_pow_half(fx: &Fx, q: &BigInt, halves: i64) -> BigInt {
    let whole = fx.powi(q, halves.div_euclid(2));
    if halves.rem_euclid(2) == 1 {
        fx.mul(&whole, &fx.sqrt(q))
    } else {
        whole
    }
}

/// `j_gamma(q^s; q^2)` with `q = p/d` and `gamma = quarters / 4`.
fn oracle(p: u64, d: u64, quarters: i64, s: i64) -> f64 {
    let log_inv_q = (d as f64 / p as f64).log10();
    let k = s.min(0).unsigned_abs() as f64;
    let digits = (2.2 * k * k * log_inv_q) as usize + 80;
    let fx = Fx::new(digits);
    let q = fx.ratio(p, d);
    let q2 = fx.mul(&q, &q);
    let a = fx.mul(&q2, &q_pow_half(&fx, &q, quarters)); // q^(2 gamma + 2)
    let x2 = fx.powi(&q, 2 * s);
    let mut term = fx.scale.clone();
    let mut sum = term.clone();
    let mut a_pow = a.clone(); // a q^(2(n-1))
    let mut q2n = q2.clone(); // q^(2n)
    let mut n = 1;
    loop {
        let num = fx.mul(&q2n, &x2);
        let den = fx.mul(&(&fx.scale - &a_pow), &(&fx.scale - &q2n));
        term = -fx.div(&fx.mul(&term, &num), &den);
        sum += &term;
        if term.is_zero() || (n > 10 && term.abs() < BigInt::one() && num < fx.scale) {
            break;
        }
        a_pow = fx.mul(&a_pow, &q2);
        q2n = fx.mul(&q2n, &q2);
        n += 1;
    }
    fx.to_f64(&sum)
}

const CASES: [(u64, u64); 3] = [(3, 10), (1, 2), (7, 10)];
const GAMMAS: [i64; 3] = [0, 1, 5]; // quarters: 0, 0.25, 1.25

#[test]
fn table_matches_fixed_point_series() {
    for (p, d) in CASES {
        let q = p as f64 / d as f64;
        for quarters in GAMMAS {
            let gamma = quarters as f64 / 4.0;
            let (lo, hi) = (-30, 60);
            let t = KernelTable::new(gamma, q, lo, hi).unwrap();
            let mut worst = 0.0f64;
            for s in lo..=hi {
                let want = oracle(p, d, quarters, s);
                if want.abs() < 1e-280 {
                    continue;
                }
                let err = ((t.j(s) - want) / want).abs();
                worst = worst.max(err);
                if s >= 1 && want != 1.0 {
                    let r_err = ((t.r(s) - (want - 1.0)) / (want - 1.0)).abs();
                    // `want - 1` itself carries the rounding of `want`
                    assert!(r_err < 1e-12 || (t.r(s) - (want - 1.0)).abs() < 2e-16, "r q={q} g={gamma} s={s}: {r_err:e}");
                }
            }
            assert!(worst < 2e-13, "q={q} gamma={gamma}: worst relative error {worst:e}");
        }
    }
}

#[test]
fn table_small_values_have_small_r_error() {
    // for large s the table keeps j - 1 to full relative precision
    let t = KernelTable::new(0.0, 0.5, 0, 60).unwrap();
    for s in [20i64, 30, 40] {
        // leading term of j - 1 is -q^2 x^2 / ((1 - q^2)^2)
        let lead = -(0.25f64) * 0.5f64.powi(2 * s as i32) / (0.75 * 0.75);
        assert!(((t.r(s) - lead) / lead).abs() < 1e-10);
    }
}

#[test]
fn series_at_half_matches_oracle() {
    let v = normalized_q_bessel(0.0, 0.5, 0.5, SeriesTolerance::default()).unwrap();
    let want = oracle(1, 2, 0, 1);
    assert!((v.value - want).abs() < 1e-12, "{} vs {want}", v.value);
    assert!((v.value - want).abs() <= v.err_bound + f64::EPSILON);
}

#[test]
fn frozen_values() {
    // frozen from a 200-digit evaluation of the series
    let cases = [
        (0.5, 0.0, -6, oracle(1, 2, 0, -6)),
        (0.7, 1.25, -12, oracle(7, 10, 5, -12)),
        (0.3, 0.25, -4, oracle(3, 10, 1, -4)),
    ];
    let frozen = [FROZEN_HALF_M6, FROZEN_07_M12, FROZEN_03_M4];
    for ((q, g, s, want), f) in cases.into_iter().zip(frozen) {
        assert!(((want - f) / f).abs() < 1e-15, "oracle drifted: {want:e} vs {f:e}");
        let t = KernelTable::new(g, q, s, 0).unwrap();
        assert!(((t.j(s) - f) / f).abs() < 1e-12);
    }
}

const FROZEN_HALF_M6: f64 = 3.301732392668857e-13;
const FROZEN_07_M12: f64 = 2.356510804302359e-29;
const FROZEN_03_M4: f64 = 3.3169515640851943e-12;
