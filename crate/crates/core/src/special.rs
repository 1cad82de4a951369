//! Small special-function toolbox: factorials, harmonic numbers, the
//! generalized exponential integral for complex arguments and
//! Gauss–Legendre rules.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: u32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Digamma at a positive integer: `ψ(n) = H_{n-1} - γ`.
pub fn digamma_int(n: u32) -> f64 {
    assert!(n >= 1);
    harmonic(n - 1) - EULER_GAMMA
}

/// `E_n(z) = ∫_1^∞ e^{-zt} t^{-n} dt` for `Re z ≥ 0`, `z ≠ 0`.
pub fn expint_en(n: u32, z: C64) -> C64 {
    if n == 0 {
        return (-z).exp() / z;
    }
    if z.norm() < 1.0 {
        en_series(n, z)
    } else {
        en_continued_fraction(n, z)
    }
}

fn en_series(n: u32, z: C64) -> C64 {
    let nm1 = (n - 1) as i64;
    let mut sum = C64::new(0.0, 0.0);
    let mut term = C64::new(1.0, 0.0); // (-z)^k / k!
    for k in 0..200i64 {
        if k != nm1 {
            let add = term / (k - nm1) as f64;
            sum -= add;
            if k > nm1 && add.norm() < 1e-18 * sum.norm().max(1e-300) {
                break;
            }
        }
        term *= -z / (k + 1) as f64;
    }
    let lead = (-z).powu(n - 1) / factorial(n - 1) * (digamma_int(n) - z.ln());
    lead + sum
}

fn en_continued_fraction(n: u32, z: C64) -> C64 {
    let tiny = 1e-300;
    let nf = n as f64;
    let mut b = z + nf;
    let mut c = C64::new(1.0 / tiny, 0.0);
    let mut d = C64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..100_000 {
        let fi = i as f64;
        let an = -fi * (nf - 1.0 + fi);
        b += 2.0;
        d = C64::new(1.0, 0.0) / (d * an + b);
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in ascending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_harmonics() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        assert!((digamma_int(1) + EULER_GAMMA).abs() < 1e-16);
    }

    #[test]
    fn expint_matches_reference_values() {
        // E_1(1) = 0.21938393439552027, E_2(0.5) = 0.32664386232455300
        let e1 = expint_en(1, C64::new(1.0, 0.0));
        assert!((e1.re - 0.219_383_934_395_520_27).abs() < 1e-14);
        let e2 = expint_en(2, C64::new(0.5, 0.0));
        assert!((e2.re - 0.326_643_862_324_553).abs() < 1e-14);
        // series and continued fraction agree across the switch radius
        for &z in &[C64::new(0.999, 0.02), C64::new(0.0, 0.9999)] {
            for n in 1..5 {
                let a = en_series(n, z);
                let b = en_continued_fraction(n, z);
                assert!((a - b).norm() < 1e-12, "n={n} z={z} {a} {b}");
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }
}
