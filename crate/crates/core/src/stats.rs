//! Small statistics toolbox: confidence intervals, two-sample
//! Kolmogorov-Smirnov, chi-square goodness of fit.
//!
//! Conventions (fixed across the crate): confidence intervals are normal
//! approximations at 95%, distribution tests run at level 0.01.

use serde::Serialize;

/// z quantile for two-sided 95% intervals.
pub const Z_95: f64 = 1.959963984540054;

/// Sample mean with a 95% normal confidence half-width.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub std_error: f64,
    pub ci_half_width: f64,
    pub n: usize,
}

pub fn mean_ci(values: &[f64]) -> MeanCi {
    assert!(!values.is_empty(), "mean of empty sample");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let se = (var / n).sqrt();
    MeanCi {
        mean,
        std_error: se,
        ci_half_width: Z_95 * se,
        n: values.len(),
    }
}

/// Two-sample Kolmogorov-Smirnov test. Returns `(D, p)` where `p` uses the
/// asymptotic Kolmogorov distribution with the Stephens small-sample
/// correction.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && !ys.is_empty(), "ks test on empty sample");
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    (d, kolmogorov_q(lambda))
}

/// Complementary CDF of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Regularized lower incomplete gamma `P(a, x)`, series + continued
/// fraction split at `x = a + 1` (Numerical Recipes construction).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_p domain");
    if x == 0.0 {
        return 0.0;
    }
    let ln_gamma_a = ln_gamma(a);
    if x < a + 1.0 {
        // Series representation.
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma_a).exp()
    } else {
        // Continued fraction for Q(a, x), modified Lentz.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        1.0 - (-x + a * x.ln() - ln_gamma_a).exp() * h
    }
}

/// Lanczos log-gamma.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for c in COEFFS {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Upper-tail p-value of a chi-square statistic with `df` degrees of freedom.
pub fn chi_square_p(stat: f64, df: usize) -> f64 {
    assert!(df > 0, "chi-square needs at least one degree of freedom");
    1.0 - gamma_p(df as f64 / 2.0, stat / 2.0)
}

/// Binned chi-square goodness of fit of observed counts against expected
/// counts (same total). Returns `(statistic, p)` with `df = bins - 1 - extra_constraints`.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], extra_constraints: usize) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len());
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| {
            assert!(*e > 0.0, "expected bin mass must be positive");
            (o - e) * (o - e) / e
        })
        .sum();
    let df = observed.len() - 1 - extra_constraints;
    (stat, chi_square_p(stat, df))
}

/// `|observed - expected| <= 3 sqrt(expected)` check for Poisson totals.
pub fn poisson_within_3se(observed: f64, expected: f64) -> bool {
    (observed - expected).abs() <= 3.0 * expected.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn mean_ci_on_constants() {
        let m = mean_ci(&[2.0, 2.0, 2.0, 2.0]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.ci_half_width, 0.0);
    }

    #[test]
    fn ks_accepts_identical_distributions() {
        let mut rng = crate::rng::replica_rng(1, 0);
        let a: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01);
    }

    #[test]
    fn ks_rejects_shifted_distributions() {
        let mut rng = crate::rng::replica_rng(2, 0);
        let a: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>() + 0.2).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p < 1e-6);
    }

    #[test]
    fn gamma_p_reference_values() {
        // P(0.5, x) = erf(sqrt(x)).
        assert!((gamma_p(0.5, 1.0) - 0.8427007929497149).abs() < 1e-10);
        // Chi-square(2) CDF at 2: 1 - exp(-1).
        assert!((gamma_p(1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        // Known 95% quantile of chi-square with 3 df ~ 7.8147.
        assert!((chi_square_p(7.814727903251179, 3) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn chi_square_gof_on_exact_fit() {
        let (stat, p) = chi_square_gof(&[10.0, 20.0, 30.0], &[10.0, 20.0, 30.0], 0);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }
}
