//! Exact half-line integrals of closed-form radial functions.
//!
//! Each term `c r^p e^{σr}` is integrated through the analytically continued
//! Mellin transform `∫ r^{s-1} e^{-ar} dr = Γ(s) a^{-s}`. When the term sum is
//! integrable the poles at nonpositive `s` cancel between terms and the
//! finite parts add up to the true integral.

use crate::error::{Error, Result};
use crate::radial::{RadialFunction, C64};
use crate::special::{digamma_int, factorial};

/// Checks integrability of `f` on `(0, ∞)` from its term structure.
pub fn check_integrable(f: &RadialFunction) -> Result<()> {
    let l = f.laurent(-1);
    if let Some(k) = (l.min_power..0).find(|&k| !l.vanishes(k)) {
        return Err(Error::NonIntegrable(format!(
            "uncancelled r^{k} coefficient at the origin"
        )));
    }
    for t in f.terms() {
        let ok = if t.rate.re < 0.0 {
            true
        } else if t.rate.re > 0.0 {
            false
        } else if t.rate.im != 0.0 {
            t.power <= -1
        } else {
            t.power <= -2
        };
        if !ok {
            return Err(Error::NonIntegrable(format!(
                "term r^{} e^{{({})r}} does not decay at infinity",
                t.power, t.rate
            )));
        }
    }
    Ok(())
}

/// `∫_0^∞ f(r) dr` in closed form.
pub fn integrate_exact(f: &RadialFunction) -> Result<C64> {
    check_integrable(f)?;
    Ok(finite_part_sum(f))
}

pub(crate) fn finite_part_sum(f: &RadialFunction) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for t in f.terms() {
        if t.rate == C64::new(0.0, 0.0) {
            continue;
        }
        let a = -t.rate;
        let n = t.power + 1;
        if n > 0 {
            total += t.coeff * factorial((n - 1) as u32) / a.powi(n);
        } else {
            let m = (-n) as u32;
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            total += t.coeff * sign / factorial(m) * a.powu(m) * (digamma_int(m + 1) - a.ln());
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialFunction as F;

    #[test]
    fn simple_moments() {
        let u = F::term(1.0, 1, -1.0);
        assert!((integrate_exact(&(&u * &u)).unwrap().re - 0.25).abs() < 1e-15);
        let v = &F::exp(-1.0) * &F::exp(-2.0);
        assert!((integrate_exact(&v).unwrap().re - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(integrate_exact(&F::exp(1.0)), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn grouped_inverse_power_identities() {
        let g = (&F::d_exp(-1.0) - &F::d_exp(-2.0)).shift_power(-1);
        assert!((integrate_exact(&g).unwrap() + 1.0).norm() < 1e-14);
        let h = F::d_exp(-1.0).shift_power(2);
        assert!((integrate_exact(&h).unwrap() + 3.0).norm() < 1e-14);
        assert!(integrate_exact(&F::d_exp(-1.0).shift_power(-1)).is_err());
    }

    #[test]
    fn angle_product_of_r_exp() {
        let u = F::term(1.0, 1, -1.0);
        let du = u.derivative();
        let integrand = &(&du.conj() * &du) + &(&u.conj() * &u).shift_power(-2).scale(2.0);
        assert!((integrate_exact(&integrand).unwrap().re - 1.25).abs() < 1e-14);
        let via_t = &u.conj() * &u.apply_t();
        assert!((integrate_exact(&via_t).unwrap().re - 1.25).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_tail_with_inverse_power() {
        // ∫ (1 - cos r) / r² dr = π/2
        let f = (&F::power(0) - &(&F::exp(C64::new(0.0, 1.0)) + &F::exp(C64::new(0.0, -1.0))).scale(0.5))
            .shift_power(-2);
        let v = integrate_exact(&f).unwrap();
        assert!((v.re - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }
}
