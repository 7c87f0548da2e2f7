//! Small statistical helpers used by aggregation and the acceptance checks.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::summation::KahanSum;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().collect::<KahanSum>().value() / xs.len() as f64
}

/// Unbiased sample variance (divisor `n − 1`); two-pass for stability.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: KahanSum = xs.iter().map(|x| (x - m) * (x - m)).collect();
    ss.value() / (xs.len() - 1) as f64
}

/// Sample skewness `m3 / m2^{3/2}` and excess kurtosis `m4 / m2² − 3`.
pub fn skewness_kurtosis(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Jarque–Bera statistic and its asymptotic `χ²₂` p-value.
pub fn jarque_bera(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (s, k) = skewness_kurtosis(xs);
    let jb = n / 6.0 * (s * s + k * k / 4.0);
    let p = 1.0 - ChiSquared::new(2.0).expect("valid dof").cdf(jb);
    (jb, p)
}

/// One-sided p-value of `H0: σ₁² ≤ σ₂²` given sample variances with
/// `df1`, `df2` degrees of freedom.
pub fn f_test_greater(var1: f64, df1: f64, var2: f64, df2: f64) -> f64 {
    if var2 == 0.0 {
        return if var1 > 0.0 { 0.0 } else { 1.0 };
    }
    let f = var1 / var2;
    1.0 - FisherSnedecor::new(df1, df2).expect("valid dof").cdf(f)
}

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Residual-based slope standard error (`NaN` with fewer than 3 points).
    pub slope_se: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let sst: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    let slope_se = if n > 2 {
        (ssr / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LineFit {
        slope,
        intercept,
        r2,
        slope_se,
    })
}
