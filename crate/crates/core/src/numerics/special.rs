//! Gamma-family special functions: chi-square CDF and quantile, the
//! complementary error function and the Gaussian tail `Q(x)`.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 1000;
const EPS: f64 = 1e-16;

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn gamma_prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Series for the regularized lower incomplete gamma `P(a, x)`, good for `x < a + 1`.
fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * gamma_prefactor(a, x)
}

/// Lentz continued fraction for the regularized upper incomplete gamma
/// `Q(a, x)`, good for `x >= a + 1`.
fn upper_gamma_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    gamma_prefactor(a, x) * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else if x < a + 1.0 {
        lower_gamma_series(a, x)
    } else {
        1.0 - upper_gamma_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`, accurate in
/// the far tail.
pub fn regularized_upper_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x < a + 1.0 {
        1.0 - lower_gamma_series(a, x)
    } else {
        upper_gamma_fraction(a, x)
    }
}

/// CDF of a chi-square variable with `dof` degrees of freedom.
pub fn chi_square_cdf(x: f64, dof: usize) -> f64 {
    assert!(dof > 0, "chi-square needs at least one degree of freedom");
    regularized_lower_gamma(dof as f64 / 2.0, x / 2.0)
}

/// Inverse of [`chi_square_cdf`] by bracketed bisection.
pub fn chi_square_quantile(p: f64, dof: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!(
            "chi-square quantile needs 0 < p < 1, got {p}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = (dof as f64).max(1.0);
    let mut grow = 0;
    while chi_square_cdf(hi, dof) < p {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::NonConvergence("chi-square quantile bracketing"));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if chi_square_cdf(mid, dof) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1e-300) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NonConvergence("chi-square quantile bisection"))
}

/// Complementary error function, via `erfc(x) = Q(1/2, x²)` for `x >= 0`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x > 27.3 {
        return 0.0;
    }
    regularized_upper_gamma(0.5, x * x)
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n = {n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn chi_square_cdf_basics() {
        for k in 1..10 {
            assert_eq!(chi_square_cdf(0.0, k), 0.0);
        }
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0] {
            let exact = 1.0 - (-x / 2.0f64).exp();
            assert!((chi_square_cdf(x, 2) - exact).abs() < 1e-13, "x = {x}");
        }
        assert!(chi_square_cdf(1e4, 5) > 1.0 - 1e-15);
    }

    #[test]
    fn quantile_dof2_closed_form() {
        let q = chi_square_quantile(1.0 - (-1.0f64).exp(), 2).unwrap();
        assert!((q - 2.0).abs() < 1e-9);
        let median = chi_square_quantile(0.5, 2).unwrap();
        assert!((median - 2.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn quantile_rejects_bad_probability() {
        assert!(chi_square_quantile(0.0, 3).is_err());
        assert!(chi_square_quantile(1.0, 3).is_err());
    }

    #[test]
    fn q_function_symmetry() {
        assert_eq!(gaussian_q(0.0), 0.5);
        for &x in &[0.1, 0.7, 1.3, 2.5, 4.0, 7.5] {
            assert!((gaussian_q(x) + gaussian_q(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn erfc_reference_points() {
        // erfc(1) and erfc(3) to 16 digits.
        assert!((erfc(1.0) / 0.157_299_207_050_285_13 - 1.0).abs() < 1e-13);
        assert!((erfc(3.0) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-12);
        assert_eq!(erfc(0.0), 1.0);
    }
}
