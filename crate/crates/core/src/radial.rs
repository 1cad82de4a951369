//! Closed-form radial functions `Σ c · r^p · e^{σr}` and the covariant
//! derivatives `D = d/dr - 1/r`, `D* = -d/dr - 1/r`, `T = DD*`.

use crate::error::{Error, Result};
use crate::special::factorial;
use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Extra orders kept in the Laurent expansion beyond the largest power.
const SERIES_ORDERS: i32 = 26;
/// The expansion is used for `r · max|σ|` below this value.
const SERIES_RADIUS: f64 = 0.5;
/// Relative size below which a Laurent coefficient counts as cancelled.
pub(crate) const CANCEL_TOL: f64 = 1e-10;
const GLOBAL_CANCEL_TOL: f64 = 1e-13;
/// Merged coefficients this small relative to their summands are rounding noise.
const MERGE_CANCEL_TOL: f64 = 1e-14;

/// Rates equal up to a few ulps are merged into one term.
fn same_rate(a: C64, b: C64) -> bool {
    a == b || (a - b).norm() <= 4.0 * f64::EPSILON * a.norm().max(b.norm())
}

/// A single term `coeff · r^power · e^{rate · r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub power: i32,
    pub rate: C64,
}

impl Term {
    pub fn new(coeff: C64, power: i32, rate: C64) -> Self {
        Term { coeff, power, rate }
    }

    pub fn eval(&self, r: f64) -> C64 {
        let e = (self.rate * r).exp();
        if e == C64::new(0.0, 0.0) {
            return e;
        }
        self.coeff * r.powi(self.power) * e
    }
}

/// Laurent coefficients at the origin together with the magnitude of the
/// contributions that were summed into each of them.
#[derive(Clone, Debug)]
pub struct Laurent {
    pub min_power: i32,
    pub coeffs: Vec<C64>,
    pub scale: Vec<f64>,
    /// Length used to compare coefficients of different powers.
    pub unit: f64,
}

impl Laurent {
    /// Coefficient of `r^k` (zero outside the stored range).
    pub fn coeff(&self, k: i32) -> C64 {
        let idx = k - self.min_power;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    fn scale_at(&self, k: i32) -> f64 {
        let idx = k - self.min_power;
        if idx < 0 || idx as usize >= self.scale.len() {
            0.0
        } else {
            self.scale[idx as usize]
        }
    }

    /// True when the coefficient of `r^k` vanishes up to rounding, either
    /// against its own summands or against the overall size of the expansion.
    pub fn vanishes(&self, k: i32) -> bool {
        let c = self.coeff(k).norm();
        if c <= CANCEL_TOL * self.scale_at(k).max(f64::MIN_POSITIVE) {
            return true;
        }
        let global = (0..self.scale.len())
            .map(|i| self.scale[i] * self.unit.powi(self.min_power + i as i32))
            .fold(0.0, f64::max);
        c * self.unit.powi(k) <= GLOBAL_CANCEL_TOL * global
    }

    /// Lowest power carrying a non-cancelled coefficient.
    pub fn leading_power(&self) -> Option<i32> {
        (self.min_power..self.min_power + self.coeffs.len() as i32).find(|&k| !self.vanishes(k))
    }
}

#[derive(Clone, Debug)]
struct Series {
    /// Laurent coefficients, with rounding-level entries at `k ≤ 0` set to zero.
    coeffs: Vec<C64>,
    min_power: i32,
    radius: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RadialFunction {
    terms: Vec<Term>,
    series: OnceLock<Series>,
}

impl PartialEq for RadialFunction {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl RadialFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a function from terms, merging equal `(power, rate)` pairs and
    /// dropping zero coefficients.
    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Self {
        let mut out: Vec<(Term, f64)> = Vec::new();
        for t in terms {
            if let Some(e) = out
                .iter_mut()
                .find(|e| e.0.power == t.power && same_rate(e.0.rate, t.rate))
            {
                e.0.coeff += t.coeff;
                e.1 += t.coeff.norm();
            } else {
                out.push((t, t.coeff.norm()));
            }
        }
        RadialFunction {
            terms: out
                .into_iter()
                .filter(|(t, mag)| t.coeff != ZERO && t.coeff.norm() > MERGE_CANCEL_TOL * mag)
                .map(|(t, _)| t)
                .collect(),
            series: OnceLock::new(),
        }
    }

    pub fn term(coeff: impl Into<C64>, power: i32, rate: impl Into<C64>) -> Self {
        Self::from_terms([Term::new(coeff.into(), power, rate.into())])
    }

    /// `r^p`.
    pub fn power(p: i32) -> Self {
        Self::term(1.0, p, 0.0)
    }

    /// `e^{σr}`.
    pub fn exp(rate: impl Into<C64>) -> Self {
        Self::term(1.0, 0, rate)
    }

    /// `D e^{σr} = σ e^{σr} - r⁻¹ e^{σr}`.
    pub fn d_exp(rate: impl Into<C64>) -> Self {
        let s = rate.into();
        Self::from_terms([Term::new(s, 0, s), Term::new(-C64::from(1.0), -1, s)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        Self::from_terms(self.terms.iter().map(|t| Term::new(t.coeff * c, t.power, t.rate)))
    }

    /// Multiplies by `r^k`.
    pub fn shift_power(&self, k: i32) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term::new(t.coeff, t.power + k, t.rate)))
    }

    /// Pointwise complex conjugate for real `r`.
    pub fn conj(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff.conj(), t.power, t.rate.conj())),
        )
    }

    pub fn max_rate_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.rate.norm()).fold(0.0, f64::max)
    }

    pub fn min_power(&self) -> i32 {
        self.terms.iter().map(|t| t.power).min().unwrap_or(0)
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power != 0 {
                out.push(Term::new(t.coeff * t.power as f64, t.power - 1, t.rate));
            }
            if t.rate != ZERO {
                out.push(Term::new(t.coeff * t.rate, t.power, t.rate));
            }
        }
        Self::from_terms(out)
    }

    /// `Df = f' - f/r`.
    pub fn apply_d(&self) -> Self {
        &self.derivative() - &self.shift_power(-1)
    }

    /// `D*f = -f' - f/r`.
    pub fn apply_dstar(&self) -> Self {
        -(&self.derivative() + &self.shift_power(-1))
    }

    /// `Tf = D(D*f) = -f'' + 2f/r²`.
    pub fn apply_t(&self) -> Self {
        self.apply_dstar().apply_d()
    }

    /// `-f'' + 2f/r²` assembled directly from the second derivative.
    pub fn apply_t_direct(&self) -> Self {
        &self.derivative().derivative().scale(-1.0) + &self.shift_power(-2).scale(2.0)
    }

    /// Laurent coefficients at `r = 0` from `min_power` up to `max_power`.
    pub fn laurent(&self, max_power: i32) -> Laurent {
        let min_power = self.min_power().min(0);
        let len = (max_power - min_power + 1).max(0) as usize;
        let mut coeffs = vec![ZERO; len];
        let mut scale = vec![0.0; len];
        for t in &self.terms {
            let mut c = t.coeff;
            let mut j = 0;
            while t.power + j <= max_power {
                let idx = (t.power + j - min_power) as usize;
                coeffs[idx] += c;
                scale[idx] += c.norm();
                if t.rate == ZERO {
                    break;
                }
                j += 1;
                c = c * t.rate / j as f64;
            }
        }
        Laurent {
            min_power,
            coeffs,
            scale,
            unit: 1.0 / self.max_rate_norm().max(1.0),
        }
    }

    fn series(&self) -> &Series {
        self.series.get_or_init(|| {
            let m = self.max_rate_norm();
            let top = self.terms.iter().map(|t| t.power).max().unwrap_or(0);
            let radius = if m == 0.0 { f64::INFINITY } else { SERIES_RADIUS / m };
            let l = self.laurent(top + SERIES_ORDERS);
            let coeffs = (0..l.coeffs.len())
                .map(|i| {
                    let k = l.min_power + i as i32;
                    if k <= 0 && l.vanishes(k) {
                        ZERO
                    } else {
                        l.coeffs[i]
                    }
                })
                .collect();
            Series {
                coeffs,
                min_power: l.min_power,
                radius,
            }
        })
    }

    /// Value at `r > 0`. Close to the origin the Laurent expansion is summed so
    /// that cancelling `r⁻ᵏ` pieces drop out exactly.
    pub fn eval(&self, r: f64) -> C64 {
        let s = self.series();
        if r < s.radius && s.radius.is_finite() {
            let mut acc = ZERO;
            for (i, c) in s.coeffs.iter().enumerate().rev() {
                let k = s.min_power + i as i32;
                if k >= 0 {
                    acc = acc * r + c;
                } else if *c != ZERO {
                    acc += c * r.powi(k);
                }
            }
            acc
        } else {
            self.eval_direct(r)
        }
    }

    /// Term-by-term value, without the series switch.
    pub fn eval_direct(&self, r: f64) -> C64 {
        self.terms.iter().map(|t| t.eval(r)).sum()
    }

    /// `[f(0), f'(0), f''(0)]` truncated to `order + 1` entries.
    pub fn taylor_at_zero(&self, order: usize) -> Result<Vec<C64>> {
        if order > 2 {
            return Err(Error::InvalidArgument(format!("Taylor order {order} exceeds 2")));
        }
        let l = self.laurent(2);
        if (l.min_power..0).any(|k| !l.vanishes(k)) {
            return Err(Error::PoleAtOrigin);
        }
        let clean = |k: i32| if l.vanishes(k) { ZERO } else { l.coeff(k) };
        let all = [clean(0), clean(1), clean(2) * 2.0];
        Ok(all[..=order].to_vec())
    }

    /// Largest imaginary part over the sample points.
    pub fn max_imag_on(&self, rs: &[f64]) -> f64 {
        rs.iter().map(|&r| self.eval(r).im.abs()).fold(0.0, f64::max)
    }

    /// `∫_0^r f(s) ds` in closed form; every term must have `p ≥ 0`.
    pub fn primitive_from_zero(&self) -> Result<Self> {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.power < 0 {
                return Err(Error::InvalidArgument(
                    "primitive from zero needs nonnegative powers".into(),
                ));
            }
            out.extend(antiderivative(t));
            if t.rate != ZERO {
                let p = t.power as u32;
                let f0 = t.coeff * sign(p) * factorial(p) / t.rate.powu(p + 1);
                out.push(Term::new(-f0, 0, ZERO));
            }
        }
        Ok(Self::from_terms(out))
    }

    /// `∫_r^∞ f(s) ds` in closed form; every term needs `p ≥ 0`, `Re σ < 0`.
    pub fn primitive_to_infinity(&self) -> Result<Self> {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.power < 0 || t.rate.re >= 0.0 {
                return Err(Error::NonIntegrable(
                    "tail primitive needs nonnegative powers and decaying rates".into(),
                ));
            }
            out.extend(antiderivative(t).into_iter().map(|a| Term::new(-a.coeff, a.power, a.rate)));
        }
        Ok(Self::from_terms(out))
    }
}

fn sign(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Antiderivative of a term with `p ≥ 0`, without integration constant.
fn antiderivative(t: &Term) -> Vec<Term> {
    if t.rate == ZERO {
        let p = t.power + 1;
        return vec![Term::new(t.coeff / p as f64, p, ZERO)];
    }
    let p = t.power as u32;
    let mut out = Vec::with_capacity(p as usize + 1);
    let mut falling = 1.0;
    let mut a_pow = t.rate;
    for k in 0..=p {
        out.push(Term::new(t.coeff * sign(k) * falling / a_pow, (p - k) as i32, t.rate));
        falling *= (p - k) as f64;
        a_pow *= t.rate;
    }
    out
}

impl Add<&RadialFunction> for &RadialFunction {
    type Output = RadialFunction;
    fn add(self, rhs: &RadialFunction) -> RadialFunction {
        RadialFunction::from_terms(self.terms.iter().chain(rhs.terms.iter()).copied())
    }
}

impl Add for RadialFunction {
    type Output = RadialFunction;
    fn add(self, rhs: RadialFunction) -> RadialFunction {
        &self + &rhs
    }
}

impl AddAssign<&RadialFunction> for RadialFunction {
    fn add_assign(&mut self, rhs: &RadialFunction) {
        *self = &*self + rhs;
    }
}

impl Sub<&RadialFunction> for &RadialFunction {
    type Output = RadialFunction;
    fn sub(self, rhs: &RadialFunction) -> RadialFunction {
        self + &(-rhs)
    }
}

impl Sub for RadialFunction {
    type Output = RadialFunction;
    fn sub(self, rhs: RadialFunction) -> RadialFunction {
        &self - &rhs
    }
}

impl Neg for &RadialFunction {
    type Output = RadialFunction;
    fn neg(self) -> RadialFunction {
        self.scale(-1.0)
    }
}

impl Neg for RadialFunction {
    type Output = RadialFunction;
    fn neg(self) -> RadialFunction {
        self.scale(-1.0)
    }
}

impl Mul<&RadialFunction> for &RadialFunction {
    type Output = RadialFunction;
    fn mul(self, rhs: &RadialFunction) -> RadialFunction {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                out.push(Term::new(a.coeff * b.coeff, a.power + b.power, a.rate + b.rate));
            }
        }
        RadialFunction::from_terms(out)
    }
}

impl Mul for RadialFunction {
    type Output = RadialFunction;
    fn mul(self, rhs: RadialFunction) -> RadialFunction {
        &self * &rhs
    }
}

impl Mul<C64> for &RadialFunction {
    type Output = RadialFunction;
    fn mul(self, rhs: C64) -> RadialFunction {
        self.scale(rhs)
    }
}

impl Mul<f64> for &RadialFunction {
    type Output = RadialFunction;
    fn mul(self, rhs: f64) -> RadialFunction {
        self.scale(rhs)
    }
}

impl Mul<C64> for RadialFunction {
    type Output = RadialFunction;
    fn mul(self, rhs: C64) -> RadialFunction {
        self.scale(rhs)
    }
}

impl Mul<f64> for RadialFunction {
    type Output = RadialFunction;
    fn mul(self, rhs: f64) -> RadialFunction {
        self.scale(rhs)
    }
}
