#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function e^{x²}·erfc(x) for x ≥ 0.
///
/// Below 5 the product is formed directly; above, a continued fraction
/// evaluated backwards avoids the overflow of e^{x²}.
pub fn erfcx(x: f64) -> f64 {
    if x < 5.0 {
        return libm::erfc(x) * (x * x).exp();
    }
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = x;
    for k in (1..=60).rev() {
        f = x + (k as f64 * 0.5) / f;
    }
    1.0 / (PI.sqrt() * f)
}

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_branches_meet() {
        let direct = libm::erfc(5.0) * 25.0f64.exp();
        assert!((erfcx(5.0) - direct).abs() < 1e-12 * direct);
        // large-x asymptotics 1/(x√π)(1 − 1/(2x²))
        let x = 1e4;
        let approx = 1.0 / (x * PI.sqrt()) * (1.0 - 0.5 / (x * x));
        assert!((erfcx(x) - approx).abs() < 1e-12 * approx);
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(-1.3) - (1.0 - normal_cdf(1.3))).abs() < 1e-14);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
    }
}
