//! Standard normal CDF and quantile.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF, `Φ(x) = erfc(−x/√2) / 2`.
pub fn phi(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

// Acklam's rational approximation, relative error below 1.2e-9 before
// refinement.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

/// Standard normal quantile. Returns `−∞` at 0, `+∞` at 1 and NaN outside
/// `[0, 1]`.
pub fn phi_inv(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        tail(q)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -tail(q)
    };
    newton_step(x, p)
}

fn tail(q: f64) -> f64 {
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

fn newton_step(x: f64, p: f64) -> f64 {
    // in the upper tail work with the complement to keep relative accuracy
    let (err, slope) = if x > 0.0 {
        let upper = 0.5 * libm::erfc(x * FRAC_1_SQRT_2);
        ((1.0 - p) - upper, density(x))
    } else {
        (phi(x) - p, density(x))
    };
    if slope == 0.0 || !slope.is_finite() {
        return x;
    }
    x - err / slope
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        assert_eq!(phi(0.0), 0.5);
        assert_eq!(phi_inv(0.5), 0.0);
        assert_eq!(phi_inv(0.0), f64::NEG_INFINITY);
        assert_eq!(phi_inv(1.0), f64::INFINITY);
        assert!(phi_inv(1.5).is_nan());
        assert_eq!(phi(f64::INFINITY), 1.0);
        assert_eq!(phi(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn known_quantiles() {
        assert!((phi(1.959964) - 0.975).abs() < 1e-6);
        assert!((phi_inv(0.975) - 1.959963984540054).abs() < 1e-12);
        assert!((phi_inv(0.025) + 1.959963984540054).abs() < 1e-12);
        assert!((phi(-1.0) - 0.15865525393145707).abs() < 1e-15);
    }

    #[test]
    fn round_trip_accuracy() {
        let mut worst: f64 = 0.0;
        for i in 1..100_000 {
            let p = i as f64 / 100_000.0;
            worst = worst.max((phi(phi_inv(p)) - p).abs());
        }
        for e in 1..300 {
            let p = 10f64.powi(-e);
            let rel = (phi(phi_inv(p)) - p).abs() / p;
            assert!(rel < 1e-10, "p={p} relative error {rel}");
        }
        assert!(worst <= 1e-10, "worst round-trip error {worst}");
    }

    #[test]
    fn symmetric() {
        for p in [0.001, 0.1, 0.3, 0.49] {
            assert!((phi_inv(p) + phi_inv(1.0 - p)).abs() < 1e-8);
        }
    }
}
