use spherelab::detectors::fp_radius;
use spherelab::numerics::{
    chi_square_cdf, chi_square_quantile, gaussian_q, ln_gamma, qr_decompose, RealMatrix, Rng,
};

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn chi_square_pdf(x: f64, k: usize) -> f64 {
    let h = k as f64 / 2.0;
    if x <= 0.0 {
        return if k == 2 { 0.5 } else { 0.0 };
    }
    ((h - 1.0) * x.ln() - x / 2.0 - h * 2f64.ln() - ln_gamma(h)).exp()
}

#[test]
fn qr_of_identity_and_pythagorean_column() {
    let qr = qr_decompose(&RealMatrix::identity(2)).unwrap();
    assert!(qr.q.sub(&RealMatrix::identity(2)).frobenius_norm() < 1e-15);
    assert!(qr.r.sub(&RealMatrix::identity(2)).frobenius_norm() < 1e-15);
    let col = RealMatrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
    assert!((qr_decompose(&col).unwrap().r[(0, 0)] - 5.0).abs() < 1e-14);
}

#[test]
fn qr_reconstructs_gaussian_8x4() {
    let mut rng = Rng::new(8);
    let a = RealMatrix::from_row_major(8, 4, rng.sample_standard_normal(32)).unwrap();
    let qr = qr_decompose(&a).unwrap();
    let recon = qr.q.matmul(&qr.r);
    for i in 0..8 {
        for j in 0..4 {
            assert!((recon[(i, j)] - a[(i, j)]).abs() <= 1e-10);
        }
    }
    assert!(qr.q.gram().sub(&RealMatrix::identity(4)).frobenius_norm() <= 1e-10);
}

#[test]
fn chi_square_cdf_matches_quadrature() {
    let quad = simpson(|x| chi_square_pdf(x, 4), 0.0, 4.0, 2000);
    assert!((chi_square_cdf(4.0, 4) - quad).abs() < 1e-10);
    assert_eq!(chi_square_cdf(0.0, 3), 0.0);
    for x in [0.1, 1.0, 7.5] {
        assert!((chi_square_cdf(x, 2) - (1.0 - (-x / 2.0f64).exp())).abs() < 1e-14);
    }
}

#[test]
fn chi_square_quantile_matches_quadrature_bisection() {
    let cdf = |x: f64| simpson(|t| chi_square_pdf(t, 8), 0.0, x, 4000);
    let (mut lo, mut hi) = (0.0, 60.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 0.99 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((chi_square_quantile(0.99, 8).unwrap() - 0.5 * (lo + hi)).abs() < 1e-6);
    let p = 1.0 - (-1.0f64).exp();
    assert!((chi_square_quantile(p, 2).unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn chi_square_round_trip() {
    for k in [1, 2, 5, 16, 28] {
        for x in [0.05, 0.7, 3.0, 12.0, 40.0] {
            let p = chi_square_cdf(x, k);
            if p > 1e-12 && p < 1.0 - 1e-12 {
                assert!(
                    (chi_square_quantile(p, k).unwrap() - x).abs() <= 1e-7 * x.max(1.0),
                    "k={k} x={x}"
                );
            }
        }
    }
}

#[test]
fn gaussian_tail_matches_quadrature() {
    assert_eq!(gaussian_q(0.0), 0.5);
    for x in [0.3, 1.7, 4.0] {
        assert!((gaussian_q(x) + gaussian_q(-x) - 1.0).abs() < 1e-15);
    }
    let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = simpson(phi, 1.0, 40.0, 20000);
    assert!((gaussian_q(1.0) - tail).abs() < 1e-10);
}

#[test]
fn normal_sampler_moments() {
    let mut a = Rng::new(4);
    let mut b = Rng::new(4);
    assert_eq!(a.sample_standard_normal(16), b.sample_standard_normal(16));
    let x = Rng::new(17).sample_standard_normal(1_000_000);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 4e-3, "mean {mean}");
    assert!((var - 1.0).abs() < 0.01, "variance {var}");
}

#[test]
fn normal_sampler_passes_kolmogorov_smirnov() {
    let mut x = Rng::new(99).sample_standard_normal(100_000);
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = 1.0 - gaussian_q(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the one-sample statistic
    assert!(d < 1.628 / n.sqrt(), "D = {d}");
}

#[test]
fn fp_radius_closed_form_scaling_and_coverage() {
    let rho = 3.0;
    let r = fp_radius(2, rho, 0.5).unwrap();
    assert!((r - 0.5 / rho * 2.0 * 2f64.ln()).abs() < 1e-12);
    let r2 = fp_radius(8, 2.0 * rho, 0.01).unwrap();
    assert!((fp_radius(8, rho, 0.01).unwrap() / r2 - 2.0).abs() < 1e-12);

    let (dof, eps, trials) = (8, 0.05, 100_000);
    let radius = fp_radius(dof, rho, eps).unwrap();
    let sd = (0.5 / rho).sqrt();
    let mut rng = Rng::new(5);
    let inside = (0..trials)
        .filter(|_| {
            rng.sample_standard_normal(dof)
                .iter()
                .map(|z| (z * sd).powi(2))
                .sum::<f64>()
                <= radius
        })
        .count();
    let coverage = inside as f64 / trials as f64;
    assert!((coverage - (1.0 - eps)).abs() < 0.01, "coverage {coverage}");
}
