//! Inverse kernels `T⁻¹`, `T⁻²` and the extension family
//! `T_κ⁻²(r,s) = T⁻²(r,s) - r/(κ³s)` with its resolvent and eigensets.
//!
//! Kernels act by the plain integral `(Ku)(r) = ∫ K(r,s) u(s) ds`.

use crate::error::{Error, Result};
use crate::integrate::integrate_exact;
use crate::quadrature::{inner_angle, integrate_split, RadialGrid};
use crate::radial::{RadialFunction, C64};
use crate::spectral::{ContinuousMode, DiscreteMode, SpectralFamily};
use crate::tkappa::{dexp, in_h, Sign};
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);
const ACTION_TOL: f64 = 1e-13;

/// `T⁻¹(r,s) = r²/(3s)` for `r < s` and `s²/(3r)` otherwise.
pub fn kernel_tinv(r: f64, s: f64) -> f64 {
    if r < s {
        r * r / (3.0 * s)
    } else {
        s * s / (3.0 * r)
    }
}

/// `T⁻²(r,s) = (r²s - r⁴/(5s))/6` for `r < s`, symmetric in `(r, s)`.
pub fn kernel_tinv2(r: f64, s: f64) -> f64 {
    let (a, b) = if r < s { (r, s) } else { (s, r) };
    (a * a * b - a.powi(4) / (5.0 * b)) / 6.0
}

/// Extension parameter of `T_κ⁻²`; `Infinite` gives the bare kernel `T⁻²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KappaInvExtension {
    Finite(f64),
    Infinite,
}

impl KappaInvExtension {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_nan() {
            Err(Error::InvalidArgument("κ must not be NaN".into()))
        } else if kappa.is_infinite() {
            Ok(KappaInvExtension::Infinite)
        } else if kappa == 0.0 {
            Err(Error::ZeroKappa)
        } else {
            Ok(KappaInvExtension::Finite(kappa))
        }
    }

    /// `κ⁻³`, zero for the infinite extension.
    fn inv_cube(self) -> Result<f64> {
        match self {
            KappaInvExtension::Finite(0.0) => Err(Error::ZeroKappa),
            KappaInvExtension::Finite(k) => Ok(1.0 / (k * k * k)),
            KappaInvExtension::Infinite => Ok(0.0),
        }
    }
}

/// `T_κ⁻²(r,s) = T⁻²(r,s) - r/(κ³s)`.
pub fn kernel_tinv2_kappa(r: f64, s: f64, ext: KappaInvExtension) -> Result<f64> {
    Ok(kernel_tinv2(r, s) - r * ext.inv_cube()? / s)
}

fn require_powers(u: &RadialFunction, min: i32) -> Result<()> {
    if u.terms().iter().any(|t| t.power < min) {
        Err(Error::InvalidArgument(format!("closed-form action needs powers p ≥ {min}")))
    } else {
        Ok(())
    }
}

/// `T⁻¹u` in closed form for `u` with powers `p ≥ 1` and decaying rates.
pub fn apply_tinv(u: &RadialFunction) -> Result<RadialFunction> {
    require_powers(u, 1)?;
    let far = u.shift_power(-1).primitive_to_infinity()?.shift_power(2);
    let near = u.shift_power(2).primitive_from_zero()?.shift_power(-1);
    Ok((&far + &near).scale(1.0 / 3.0))
}

/// `T⁻²u` in closed form for `u` with powers `p ≥ 1` and decaying rates.
pub fn apply_tinv2(u: &RadialFunction) -> Result<RadialFunction> {
    require_powers(u, 1)?;
    let a = u.shift_power(1).primitive_to_infinity()?.shift_power(2);
    let b = u.shift_power(-1).primitive_to_infinity()?.shift_power(4).scale(-0.2);
    let c = u.shift_power(2).primitive_from_zero()?.shift_power(1);
    let d = u.shift_power(4).primitive_from_zero()?.shift_power(-1).scale(-0.2);
    Ok((&(&a + &b) + &(&c + &d)).scale(1.0 / 6.0))
}

/// `T_κ⁻²u` in closed form for `u` with powers `p ≥ 1` and decaying rates.
pub fn apply_tinv2_kappa(u: &RadialFunction, ext: KappaInvExtension) -> Result<RadialFunction> {
    let k3 = ext.inv_cube()?;
    let base = apply_tinv2(u)?;
    if k3 == 0.0 {
        return Ok(base);
    }
    let m = integrate_exact(&u.shift_power(-1))?;
    Ok(&base - &RadialFunction::term(m * k3, 1, 0.0))
}

/// `(T_κ⁻²u)(r)` by adaptive quadrature split at `s = r`.
pub fn apply_tinv2_kappa_at(u: &RadialFunction, r: f64, ext: KappaInvExtension) -> Result<C64> {
    let k3 = ext.inv_cube()?;
    let v = integrate_split(|s| (kernel_tinv2(r, s) - r * k3 / s) * u.eval(s), r, ACTION_TOL);
    Ok(v.value)
}

/// Residuals of the four `𝒲₀` moment conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct W0Residuals {
    /// `∫ u/r dr`
    pub inv_r: C64,
    /// `[r u]₀^∞`
    pub boundary: C64,
    /// `∫ r u dr`
    pub first: C64,
    /// `∫ r² u dr`
    pub second: C64,
}

impl W0Residuals {
    pub fn max_norm(&self) -> f64 {
        [self.inv_r, self.boundary, self.first, self.second]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// `lim r u(r)` at the origin and at infinity.
fn boundary_values(u: &RadialFunction) -> Result<(C64, C64)> {
    let l = u.laurent(-1);
    if let Some(k) = (l.min_power..-1).find(|&k| !l.vanishes(k)) {
        return Err(Error::NonIntegrable(format!("r u has an r^{} singularity", k + 1)));
    }
    let at_zero = l.coeff(-1);
    let mut at_inf = C64::new(0.0, 0.0);
    for t in u.terms() {
        let p = t.power + 1;
        let decays = t.rate.re < 0.0 || (t.rate.re == 0.0 && p < 0);
        if decays {
            continue;
        }
        if t.rate == C64::new(0.0, 0.0) && p == 0 {
            at_inf += t.coeff;
        } else {
            return Err(Error::NonIntegrable("r u has no limit at infinity".into()));
        }
    }
    Ok((at_zero, at_inf))
}

/// The moments `∫u/r`, `[ru]₀^∞`, `∫ru`, `∫r²u`; all vanish on `𝒲₀`.
pub fn check_w0_conditions(u: &RadialFunction) -> Result<W0Residuals> {
    let (z, inf) = boundary_values(u)?;
    Ok(W0Residuals {
        inv_r: integrate_exact(&u.shift_power(-1))?,
        boundary: inf - z,
        first: integrate_exact(&u.shift_power(1))?,
        second: integrate_exact(&u.shift_power(2))?,
    })
}

/// `𝒲₀` membership: `u ∈ ℋ` and the four moments vanish relative to the
/// size of `u`.
pub fn in_domain_w0_inv(u: &RadialFunction) -> Result<()> {
    if !in_h(u) {
        return Err(Error::DomainViolation("NotInH".into()));
    }
    let res = check_w0_conditions(u)?;
    let scale = u.terms().iter().map(|t| t.coeff.norm()).fold(1.0, f64::max);
    if res.max_norm() > 1e-9 * scale {
        return Err(Error::DomainViolation(format!("moment conditions fail: {res:?}")));
    }
    Ok(())
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    x
}

/// Canonical `𝒲₀` probe `r² Σ cᵢ e^{-σᵢr}` with `σ = (1, 2, 3, 4)`, `c₁ = 1`.
pub fn w0_probe() -> RadialFunction {
    w0_probe_with_rates([1.0, 2.0, 3.0, 4.0])
}

/// `r² Σ cᵢ e^{-σᵢr}` with `c₁ = 1` and `∫u/r = ∫ru = ∫r²u = 0`.
/// Rates must be positive and distinct.
pub fn w0_probe_with_rates(sigma: [f64; 4]) -> RadialFunction {
    let row = |k: i32, f: f64| -> [f64; 4] { sigma.map(|s| f / s.powi(k)) };
    let rows = [row(2, 1.0), row(4, 6.0), row(5, 24.0)];
    let a = rows.map(|r| [r[1], r[2], r[3]]);
    let b = rows.map(|r| -r[0]);
    let c = solve3(a, b);
    let coeffs = [1.0, c[0], c[1], c[2]];
    RadialFunction::from_terms(
        coeffs
            .iter()
            .zip(sigma)
            .map(|(&c, s)| crate::radial::Term::new(C64::from(c), 2, C64::from(-s))),
    )
}

/// `κ³∫r²u dr - 6∫u/r dr`; for the infinite extension `∫r²u dr`.
pub fn check_wkappa_condition(u: &RadialFunction, ext: KappaInvExtension) -> Result<C64> {
    let k3 = ext.inv_cube()?;
    let m2 = integrate_exact(&u.shift_power(2))?;
    if k3 == 0.0 {
        return Ok(m2);
    }
    let m0 = integrate_exact(&u.shift_power(-1))?;
    Ok(m2 / k3 - 6.0 * m0)
}

/// `𝒲_κ` membership from the closed-form data: `u ∈ ℋ`, `r u → 0` at both
/// ends and the moment condition.
pub fn in_domain_wkappa_inv(u: &RadialFunction, ext: KappaInvExtension) -> Result<()> {
    if !in_h(u) {
        return Err(Error::DomainViolation("NotInH".into()));
    }
    let (z, inf) = boundary_values(u)?;
    let scale = u.terms().iter().map(|t| t.coeff.norm()).fold(1.0, f64::max);
    if (inf - z).norm() > 1e-12 * scale {
        return Err(Error::DomainViolation("r u does not vanish at the ends".into()));
    }
    let k3 = ext.inv_cube()?;
    let m2 = integrate_exact(&u.shift_power(2))?;
    let (res, size) = if k3 == 0.0 {
        (m2, m2.norm())
    } else {
        let m0 = integrate_exact(&u.shift_power(-1))? * 6.0;
        (m2 / k3 - m0, (m2 / k3).norm().max(m0.norm()))
    };
    if res.norm() > 1e-10 * size.max(scale) {
        return Err(Error::DomainViolation(format!("moment condition residual {res}")));
    }
    Ok(())
}

/// Spectral argument `z` with `0 < arg z < π/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventArgInv(C64);

impl ResolventArgInv {
    pub fn new(z: C64) -> Result<Self> {
        if z.re > 0.0 && z.im > 0.0 && z.is_finite() {
            Ok(ResolventArgInv(z))
        } else {
            Err(Error::InvalidArgument(format!("z = {z} is outside 0 < arg z < π/2")))
        }
    }

    pub fn z(&self) -> C64 {
        self.0
    }
}

/// Coefficients of the boundary-matching part of the resolvent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientSet {
    /// `d = κ³ + z³(1+i)`; infinite for the infinite extension.
    pub d: C64,
    pub alpha_plus: C64,
    pub alpha_minus: C64,
    pub beta_plus: C64,
    pub beta_minus: C64,
    pub w_plus: C64,
    pub w_minus: C64,
}

impl CoefficientSet {
    /// `1/d`, zero for the infinite extension.
    pub fn inv_d(&self) -> C64 {
        if self.d.is_finite() {
            self.d.inv()
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Residuals of `1 + α± + β± = 0`,
    /// `κ³(1 + α₋ - β₋) = 2z³(i - iα₋ + β₋)` and
    /// `κ³(1 + α₊ - β₊) = 2z³(1 - α₊ + iβ₊)`, relative to the size of
    /// their terms.
    pub fn residuals(&self, z: C64, ext: KappaInvExtension) -> Result<[f64; 4]> {
        let one = C64::new(1.0, 0.0);
        let z3 = 2.0 * z * z * z;
        let k3 = ext.inv_cube()?;
        let rel = |a: C64, b: C64, s: f64| (a - b).norm() / s.max(1.0);
        let (am, bm, ap, bp) = (self.alpha_minus, self.beta_minus, self.alpha_plus, self.beta_plus);
        let minus = if k3 == 0.0 {
            rel(one + am - bm, C64::new(0.0, 0.0), 1.0 + am.norm() + bm.norm())
        } else {
            let lhs = (one + am - bm) / k3;
            let rhs = z3 * (I - I * am + bm);
            rel(lhs, rhs, lhs.norm().max(rhs.norm()))
        };
        let plus = if k3 == 0.0 {
            rel(one + ap - bp, C64::new(0.0, 0.0), 1.0 + ap.norm() + bp.norm())
        } else {
            let lhs = (one + ap - bp) / k3;
            let rhs = z3 * (one - ap + I * bp);
            rel(lhs, rhs, lhs.norm().max(rhs.norm()))
        };
        Ok([
            rel(one + ap, -bp, 1.0 + ap.norm()),
            rel(one + am, -bm, 1.0 + am.norm()),
            minus,
            plus,
        ])
    }
}

/// `W₊ = -2z³`.
pub fn wronskian_plus(z: C64) -> C64 {
    -2.0 * z * z * z
}

/// `W₋ = -2iz³`.
pub fn wronskian_minus(z: C64) -> C64 {
    -2.0 * I * z * z * z
}

/// `d(z) = κ³ + z³(1+i)`.
pub fn determinant(z: C64, kappa: f64) -> C64 {
    kappa.powi(3) + z * z * z * C64::new(1.0, 1.0)
}

/// Solves for `α±`, `β±`; fails with `DeterminantZero` near the pole.
pub fn coefficient_set(z: C64, ext: KappaInvExtension) -> Result<CoefficientSet> {
    let (wp, wm) = (wronskian_plus(z), wronskian_minus(z));
    let z3 = z * z * z;
    match ext {
        KappaInvExtension::Finite(0.0) => Err(Error::ZeroKappa),
        KappaInvExtension::Finite(k) => {
            let k3 = k * k * k;
            let d = determinant(z, k);
            if d.norm() < 1e-10 * k3.abs().max(1.0) {
                return Err(Error::DeterminantZero);
            }
            Ok(CoefficientSet {
                d,
                alpha_plus: -(k3 + z3 * C64::new(-1.0, 1.0)) / d,
                alpha_minus: -(k3 + z3 * C64::new(1.0, -1.0)) / d,
                beta_plus: wp / d,
                beta_minus: wm / d,
                w_plus: wp,
                w_minus: wm,
            })
        }
        KappaInvExtension::Infinite => Ok(CoefficientSet {
            d: C64::new(f64::INFINITY, 0.0),
            alpha_plus: C64::new(-1.0, 0.0),
            alpha_minus: C64::new(-1.0, 0.0),
            beta_plus: C64::new(0.0, 0.0),
            beta_minus: C64::new(0.0, 0.0),
            w_plus: wp,
            w_minus: wm,
        }),
    }
}

/// Regular part of the resolvent kernel of `T_κ⁻²`; the full kernel is
/// `-z⁴δ(r-s)` plus this value.
pub fn resolvent_tinv2(r: f64, s: f64, z: ResolventArgInv, ext: KappaInvExtension) -> Result<C64> {
    let z = z.z();
    let c = coefficient_set(z, ext)?;
    let (iz, mz) = (I * z, -z);
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    let r_minus = dexp(-iz, lo) * dexp(iz, hi) / c.w_minus;
    let r_plus = dexp(z, lo) * dexp(mz, hi) / c.w_plus;
    let inv_d = c.inv_d();
    let tilde = inv_d * (dexp(mz, r) * dexp(iz, s) - dexp(mz, s) * dexp(iz, r))
        - c.alpha_plus / c.w_plus * dexp(mz, r) * dexp(mz, s)
        + c.alpha_minus / c.w_minus * dexp(iz, r) * dexp(iz, s);
    Ok(-z.powu(6) / 2.0 * (r_minus - r_plus + tilde))
}

/// `∫ G(r,s) v(s) ds` for the Green function `G = g(r_>)h(r_<)/W` with
/// `g = De^{σr}`, `h = De^{-σr}`.
fn green_apply(v: &RadialFunction, sigma: C64, w: C64) -> Result<RadialFunction> {
    let g = RadialFunction::d_exp(sigma);
    let h = RadialFunction::d_exp(-sigma);
    let near = &g * &(&h * v).primitive_from_zero()?;
    let far = &h * &(&g * v).primitive_to_infinity()?;
    Ok((&near + &far).scale(w.inv()))
}

/// `(R(z)v)(r)` in closed form, for `v` built from terms with `p ≥ 1`.
pub fn resolvent_tinv2_apply(
    v: &RadialFunction,
    z: ResolventArgInv,
    ext: KappaInvExtension,
) -> Result<RadialFunction> {
    require_powers(v, 1)?;
    let z = z.z();
    let c = coefficient_set(z, ext)?;
    let (iz, mz) = (I * z, -z);
    let rm = green_apply(v, iz, c.w_minus)?;
    let rp = green_apply(v, mz, c.w_plus)?;
    let i_iz = integrate_exact(&(&RadialFunction::d_exp(iz) * v))?;
    let i_mz = integrate_exact(&(&RadialFunction::d_exp(mz) * v))?;
    let inv_d = c.inv_d();
    let a = inv_d * i_iz - c.alpha_plus / c.w_plus * i_mz;
    let b = -inv_d * i_mz + c.alpha_minus / c.w_minus * i_iz;
    let tilde = &RadialFunction::d_exp(mz).scale(a) + &RadialFunction::d_exp(iz).scale(b);
    let bracket = &(&rm - &rp) + &tilde;
    Ok(&v.scale(-z.powu(4)) + &bracket.scale(-z.powu(6) / 2.0))
}

/// `(T_κ⁻² - z⁻⁴)(R(z)φ)(s) - φ(s)`, with the kernel action by quadrature.
pub fn resolvent_tinv2_defect(
    phi: &RadialFunction,
    s: f64,
    z: ResolventArgInv,
    ext: KappaInvExtension,
) -> Result<C64> {
    let psi = resolvent_tinv2_apply(phi, z, ext)?;
    let a = apply_tinv2_kappa_at(&psi, s, ext)?;
    Ok(a - psi.eval(s) / z.z().powu(4) - phi.eval(s))
}

/// Pole of the resolvent, `z₀ = 2^{-1/6}e^{iπ/4}κ`.
pub fn pole_tinv2(kappa: f64) -> C64 {
    C64::from_polar(2f64.powf(-1.0 / 6.0) * kappa, PI / 4.0)
}

/// `q̂ = i√(2/(3κ³))(De^{ar} - De^{āar})`, `a = 2^{-1/6}e^{3iπ/4}κ`, with
/// eigenvalue `-2^{2/3}κ⁻⁴`; exists for `κ > 0`.
pub fn discrete_mode_tinv2(ext: KappaInvExtension) -> Result<DiscreteMode> {
    match ext {
        KappaInvExtension::Finite(k) if k > 0.0 => {
            let a = C64::from_polar(2f64.powf(-1.0 / 6.0) * k, 0.75 * PI);
            let q = &RadialFunction::d_exp(a) - &RadialFunction::d_exp(a.conj());
            Ok(DiscreteMode {
                eigenvalue: -(2f64.powf(2.0 / 3.0)) / k.powi(4),
                profile: q.scale(I * (2.0 / (3.0 * k * k * k)).sqrt()),
            })
        }
        _ => Err(Error::NoBoundState),
    }
}

/// `arg d(λ)`, continuous on `λ > 0`.
pub fn arg_determinant(lambda: f64, ext: KappaInvExtension) -> f64 {
    match ext {
        KappaInvExtension::Finite(k) => {
            let l3 = lambda.powi(3);
            l3.atan2(k.powi(3) + l3)
        }
        KappaInvExtension::Infinite => 0.0,
    }
}

/// `p̂_λ = i/(√(2π)λ²) D(e^{-iθ}e^{iλr} - e^{iθ}e^{-iλr} + 2iλ³/|d| e^{-λr})`
/// with `θ = arg d(λ)`; eigenvalue `λ⁻⁴`.
pub fn continuous_mode_tinv2(lambda: f64, ext: KappaInvExtension) -> Result<ContinuousMode> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument("λ must be positive".into()));
    }
    let theta = arg_determinant(lambda, ext);
    let evanescent = match ext {
        KappaInvExtension::Finite(k) => 2.0 * lambda.powi(3) / determinant(C64::from(lambda), k).norm(),
        KappaInvExtension::Infinite => 0.0,
    };
    let e = C64::from_polar(1.0, -theta);
    let p = &(&RadialFunction::d_exp(I * lambda).scale(e) - &RadialFunction::d_exp(-I * lambda).scale(e.conj()))
        + &RadialFunction::d_exp(-lambda).scale(I * evanescent);
    Ok(ContinuousMode {
        lambda,
        zeta: -theta / 2.0,
        profile: p.scale(I / ((2.0 * PI).sqrt() * lambda * lambda)),
    })
}

impl SpectralFamily for KappaInvExtension {
    fn continuous_mode(&self, lambda: f64) -> Result<ContinuousMode> {
        continuous_mode_tinv2(lambda, *self)
    }

    fn discrete_modes(&self) -> Vec<DiscreteMode> {
        discrete_mode_tinv2(*self).into_iter().collect()
    }

    fn check_domain(&self, u: &RadialFunction) -> Result<()> {
        in_domain_wkappa_inv(u, *self)
    }
}

/// `Q_κ⁻¹(u) = ∬ ū(r)(T⁻¹(r,s) - 2/(κ³rs))u(s) dr ds`, outer integral on the
/// grid and inner integral by adaptive quadrature.
pub fn qform_tinv2_kappa(u: &RadialFunction, ext: KappaInvExtension, grid: &RadialGrid) -> Result<f64> {
    let k3 = ext.inv_cube()?;
    crate::integrate::check_integrable(&u.shift_power(-1))?;
    let inner = |r: f64| integrate_split(|s| kernel_tinv(r, s) * u.eval(s), r, ACTION_TOL).value;
    let main = grid.integrate_fn(|r| u.eval(r).conj() * inner(r)).value;
    let m = grid.integrate_fn(|r| u.eval(r) / r).value;
    let tail = crate::quadrature::tail_integral(&u.shift_power(-1), grid.r_max())?;
    let m = m + tail;
    Ok((main - 2.0 * k3 * m.norm_sqr()).re)
}

/// `Q_κ⁻¹(u) = (u, T⁻¹u) - (2/κ³)|∫u/r|²` in closed form.
pub fn qform_tinv2_kappa_exact(u: &RadialFunction, ext: KappaInvExtension) -> Result<f64> {
    let k3 = ext.inv_cube()?;
    let main = integrate_exact(&(&u.conj() * &apply_tinv(u)?))?;
    let m = integrate_exact(&u.shift_power(-1))?;
    Ok((main - 2.0 * k3 * m.norm_sqr()).re)
}

/// `⟨u, T_κ⁻²u⟩` in closed form.
pub fn qform_tinv2_kappa_angle(u: &RadialFunction, ext: KappaInvExtension) -> Result<f64> {
    let w = apply_tinv2_kappa(u, ext)?;
    Ok(crate::quadrature::inner_angle_exact(u, &w)?.re)
}

/// `c± = αDe^{e^{∓5iπ/8}ρr} + βDe^{e^{∓9iπ/8}ρr} + (α+β)/r`, vanishing at the origin.
pub fn deficiency_vector_inv2(sign: Sign, rho: f64, alpha: C64, beta: C64) -> RadialFunction {
    let s = -sign.value();
    let a = RadialFunction::d_exp(C64::from_polar(rho, s * 5.0 * PI / 8.0)).scale(alpha);
    let b = RadialFunction::d_exp(C64::from_polar(rho, s * 9.0 * PI / 8.0)).scale(beta);
    &(&a + &b) + &RadialFunction::term(alpha + beta, -1, 0.0)
}

/// `⟨c±, (T⁻² ± iρ⁻⁴)u⟩` by grid quadrature, for `u ∈ 𝒲₀`.
pub fn deficiency_pairing_inv2(
    sign: Sign,
    rho: f64,
    alpha: C64,
    beta: C64,
    u: &RadialFunction,
    grid: &RadialGrid,
) -> Result<C64> {
    if rho <= 0.0 {
        return Err(Error::InvalidArgument("ρ must be positive".into()));
    }
    in_domain_w0_inv(u)?;
    let w = &apply_tinv2(u)? + &u.scale(I * (sign.value() / rho.powi(4)));
    let c = deficiency_vector_inv2(sign, rho, alpha, beta);
    Ok(inner_angle(&c, &w, grid)?.value)
}

/// `d± = De^{e^{∓5iπ/8}ρr} - De^{e^{∓9iπ/8}ρr}`.
pub fn d_vector(sign: Sign, rho: f64) -> RadialFunction {
    deficiency_vector_inv2(sign, rho, C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
}

/// `(∫d±/r dr, ∫r²d± dr)` by grid quadrature.
pub fn d_vector_moments(sign: Sign, rho: f64, grid: &RadialGrid) -> Result<(C64, C64)> {
    let d = d_vector(sign, rho);
    let m0 = crate::quadrature::integrate_halfline(&d.shift_power(-1), grid)?.value;
    let m2 = crate::quadrature::integrate_halfline(&d.shift_power(2), grid)?.value;
    Ok((m0, m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{inner_angle_exact, integrate_adaptive, integrate_to_infinity};
    use crate::radial::RadialFunction as F;
    use crate::spectral::{forward, parseval_defect, round_trip_error, LambdaGrid};

    fn fin(k: f64) -> KappaInvExtension {
        KappaInvExtension::new(k).unwrap()
    }

    fn wkappa_probe(k: f64) -> F {
        let k3 = k * k * k;
        let c = (6.0 - 24.0 * k3) / (0.75 * k3 - 1.5);
        &F::term(1.0, 2, -1.0) + &F::term(c, 2, -2.0)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn kernel_values() {
        assert!((kernel_tinv(1.0, 2.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((kernel_tinv(3.0, 3.0) - 1.0).abs() < 1e-15);
        assert!((kernel_tinv2(1.0, 2.0) - 19.0 / 60.0).abs() < 1e-15);
        assert!((kernel_tinv2(1.0, 1.0) - 2.0 / 15.0).abs() < 1e-15);
        assert_eq!(kernel_tinv2(0.7, 2.3), kernel_tinv2(2.3, 0.7));
        assert!((kernel_tinv2_kappa(1.0, 1.0, fin(1.0)).unwrap() + 13.0 / 15.0).abs() < 1e-15);
        assert_eq!(
            kernel_tinv2_kappa(1.0, 2.0, KappaInvExtension::Infinite).unwrap(),
            kernel_tinv2(1.0, 2.0)
        );
        assert_eq!(KappaInvExtension::new(0.0), Err(Error::ZeroKappa));
        assert_eq!(kernel_tinv2_kappa(1.0, 1.0, KappaInvExtension::Finite(0.0)), Err(Error::ZeroKappa));
        let far = kernel_tinv2_kappa(1.0, 2.0, fin(1e6)).unwrap();
        assert!((far - kernel_tinv2(1.0, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn tinv_inverts_t() {
        let u = F::term(1.0, 1, -1.0);
        let tu = u.apply_t();
        for r in [0.5, 1.0, 2.0] {
            let v = integrate_split(|s| kernel_tinv(r, s) * tu.eval(s), r, 1e-14).value;
            assert!((v - u.eval(r)).norm() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn composition_matches_closed_form() {
        for (r, s) in [(1.0f64, 2.0f64), (0.3, 0.3), (4.0, 0.7)] {
            let comp = integrate_adaptive(|t| C64::from(kernel_tinv(r, t) * kernel_tinv(t, s)), 0.0, r.min(s), 1e-14)
                .value
                + integrate_adaptive(|t| C64::from(kernel_tinv(r, t) * kernel_tinv(t, s)), r.min(s), r.max(s), 1e-14)
                    .value
                + integrate_to_infinity(|t| C64::from(kernel_tinv(r, t) * kernel_tinv(t, s)), r.max(s), 1e-14).value;
            assert!((comp.re - kernel_tinv2(r, s)).abs() < 1e-10, "({r},{s})");
        }
    }

    #[test]
    fn closed_form_actions_match_quadrature() {
        let u = &F::term(1.0, 2, -1.3) + &F::term(0.4, 1, -0.6);
        let a1 = apply_tinv(&u).unwrap();
        let a2 = apply_tinv2(&u).unwrap();
        let ext = fin(1.7);
        let a3 = apply_tinv2_kappa(&u, ext).unwrap();
        for r in [0.2, 1.0, 3.5] {
            let n1 = integrate_split(|s| kernel_tinv(r, s) * u.eval(s), r, 1e-14).value;
            let n2 = integrate_split(|s| kernel_tinv2(r, s) * u.eval(s), r, 1e-14).value;
            assert!(rel(a1.eval(r), n1) < 1e-11);
            assert!(rel(a2.eval(r), n2) < 1e-11);
            assert!(rel(a3.eval(r), apply_tinv2_kappa_at(&u, r, ext).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn auxiliary_formula() {
        let sigma = C64::new(-0.8, 0.5);
        assert!(apply_tinv2(&F::d_exp(sigma)).is_err());
        for r in [0.4, 1.3] {
            let n = integrate_split(|s| kernel_tinv2(r, s) * dexp(sigma, s), r, 1e-14).value;
            let e = (sigma * r).exp();
            let d_expm1 = (sigma * e - (e - 1.0) / r) / sigma.powu(4);
            assert!(rel(n, d_expm1 - r / (2.0 * sigma * sigma)) < 1e-10);
        }
    }

    #[test]
    fn w0_conditions() {
        let res = check_w0_conditions(&F::term(1.0, 2, -1.0)).unwrap();
        assert!((res.inv_r - 1.0).norm() < 1e-14);
        let p = w0_probe();
        assert!(check_w0_conditions(&p).unwrap().max_norm() < 1e-10);
        assert!(in_domain_w0_inv(&p).is_ok());
        assert!(matches!(check_w0_conditions(&F::power(-1)), Err(Error::NonIntegrable(_))));
        let q = w0_probe_with_rates([0.7, 1.9, 2.6, 5.1]);
        assert!(check_w0_conditions(&q).unwrap().max_norm() < 1e-10);
    }

    #[test]
    fn wkappa_condition() {
        let k = 1.3;
        let sigma = 4f64.powf(1.0 / 3.0) * k;
        let u = F::term(1.0, 2, -sigma);
        assert!(check_wkappa_condition(&u, fin(k)).unwrap().norm() < 1e-12);
        let v = F::term(1.0, 2, -1.0);
        assert!((check_wkappa_condition(&v, fin(1.0)).unwrap() - 18.0).norm() < 1e-12);
        assert_eq!(check_wkappa_condition(&v, KappaInvExtension::Finite(0.0)), Err(Error::ZeroKappa));
        assert!(in_domain_wkappa_inv(&u, fin(k)).is_ok());
        assert!(in_domain_wkappa_inv(&v, fin(k)).is_err());
    }

    #[test]
    fn coefficient_identities() {
        let ext = fin(2.0);
        let z = C64::new(1.0, 0.5);
        let c = coefficient_set(z, ext).unwrap();
        assert_eq!(c.beta_minus / c.w_minus - c.beta_plus / c.w_plus, C64::new(0.0, 0.0));
        assert!(c.residuals(z, ext).unwrap().iter().all(|&r| r < 1e-12));
        assert_eq!(coefficient_set(C64::new(0.0, 0.0), fin(1.0)).unwrap().d, C64::new(1.0, 0.0));
        assert_eq!(coefficient_set(pole_tinv2(1.0), fin(1.0)), Err(Error::DeterminantZero));
        assert!(determinant(pole_tinv2(1.0), 1.0).norm() < 1e-12);
        assert_eq!(wronskian_plus(C64::new(1.0, 0.0)), C64::new(-2.0, 0.0));
        assert_eq!(wronskian_minus(C64::new(1.0, 0.0)), C64::new(0.0, -2.0));
        let p = pole_tinv2(-1.0).arg();
        assert!(!(0.0..=PI / 2.0).contains(&p));
    }

    #[test]
    fn resolvent_action_matches_kernel() {
        let ext = fin(1.0);
        let z = ResolventArgInv::new(C64::from_polar(1.0, PI / 5.0)).unwrap();
        let v = F::term(1.0, 2, -1.5);
        let rv = resolvent_tinv2_apply(&v, z, ext).unwrap();
        for r in [0.3, 1.0, 2.5] {
            let n = integrate_split(|s| resolvent_tinv2(r, s, z, ext).unwrap() * v.eval(s), r, 1e-14).value
                - z.z().powu(4) * v.eval(r);
            assert!(rel(rv.eval(r), n) < 1e-9, "r={r}");
        }
    }

    #[test]
    fn resolvent_defect() {
        let ext = fin(1.0);
        let z = ResolventArgInv::new(C64::from_polar(1.0, PI / 5.0)).unwrap();
        let phi = w0_probe();
        for s in [0.5, 1.0, 2.0] {
            let d = resolvent_tinv2_defect(&phi, s, z, ext).unwrap();
            assert!(d.norm() / phi.eval(s).norm() < 1e-5, "s={s} {d}");
        }
    }

    #[test]
    fn resolvent_complex_symmetry() {
        let ext = fin(1.0);
        let z = C64::new(0.9, 0.4);
        let zz = ResolventArgInv::new(z).unwrap();
        let zc = ResolventArgInv::new(I * z.conj()).unwrap();
        let u = F::term(1.0, 2, -1.0);
        let v = &F::term(1.0, 1, -2.0) + &F::term(0.5, 3, -1.0);
        let lhs = inner_angle_exact(&u, &resolvent_tinv2_apply(&v, zz, ext).unwrap()).unwrap();
        let rhs = inner_angle_exact(&resolvent_tinv2_apply(&u, zc, ext).unwrap(), &v).unwrap();
        assert!(rel(lhs, rhs) < 1e-8, "{lhs} {rhs}");
    }

    #[test]
    fn bound_state() {
        for k in [0.5, 1.0, 2.0] {
            let ext = fin(k);
            let q = discrete_mode_tinv2(ext).unwrap();
            let rs: Vec<f64> = (1..200).map(|i| i as f64 * 0.05).collect();
            assert!(q.profile.max_imag_on(&rs) < 1e-12);
            let n = inner_angle_exact(&q.profile, &q.profile).unwrap();
            assert!((n - 1.0).norm() < 1e-10, "{n}");
            for r in [0.5, 1.0, 2.0] {
                let a = apply_tinv2_kappa_at(&q.profile, r, ext).unwrap();
                assert!(rel(a, q.profile.eval(r) * q.eigenvalue) < 1e-6, "κ={k} r={r}");
            }
        }
        assert_eq!(discrete_mode_tinv2(fin(-1.0)).unwrap_err(), Error::NoBoundState);
    }

    #[test]
    fn continuous_modes() {
        let rs: Vec<f64> = (1..400).map(|i| i as f64 * 0.05).collect();
        for k in [1.0, -1.0] {
            for l in [0.5, 1.0, 2.0] {
                let p = continuous_mode_tinv2(l, fin(k)).unwrap().profile;
                assert!(p.max_imag_on(&rs) < 1e-12);
                assert!(crate::quadrature::require_vanishing_at_origin(&p).is_ok());
            }
        }
    }

    #[test]
    fn weak_eigen_relation() {
        let k = 1.0;
        let ext = fin(k);
        let v = F::term(1.0, 1, -k);
        let av = apply_tinv2_kappa(&v, ext).unwrap();
        for l in [0.5, 1.0, 2.0] {
            let p = continuous_mode_tinv2(l, ext).unwrap().profile;
            let lhs = inner_angle_exact(&p, &av).unwrap();
            let rhs = inner_angle_exact(&p, &v).unwrap() / l.powi(4);
            assert!(rel(lhs, rhs) < 1e-9, "λ={l} {lhs} {rhs}");
        }
    }

    #[test]
    fn envelope_decay() {
        let ext = fin(1.0);
        let amp = |l: f64| {
            let p = continuous_mode_tinv2(l, ext).unwrap().profile;
            let r = 40.0;
            (0..64).map(|j| p.eval(r + j as f64 * 0.1 / l).norm()).fold(0.0, f64::max)
        };
        let ratio = amp(200.0) / amp(100.0);
        assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn symmetry_on_domain() {
        let k = 1.2;
        let ext = fin(k);
        let u = F::term(1.0, 1, -k);
        let v = F::term(1.0, 2, -(4f64.powf(1.0 / 3.0) * k));
        let a = inner_angle_exact(&u, &apply_tinv2_kappa(&v, ext).unwrap()).unwrap();
        let b = inner_angle_exact(&apply_tinv2_kappa(&u, ext).unwrap(), &v).unwrap();
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn quadratic_form_routes() {
        let u = F::term(1.0, 1, -1.0);
        let grid = RadialGrid::default();
        for ext in [fin(1.0), fin(-0.7), KappaInvExtension::Infinite] {
            let e = qform_tinv2_kappa_exact(&u, ext).unwrap();
            let g = qform_tinv2_kappa(&u, ext, &grid).unwrap();
            assert!((e - g).abs() < 1e-8 * e.abs(), "{e} {g}");
            let s = qform_tinv2_kappa_exact(&u.scale(3.0), ext).unwrap();
            assert!((s - 9.0 * e).abs() < 1e-12 * s.abs());
        }
        let e = qform_tinv2_kappa_exact(&u, fin(1.0)).unwrap();
        let a = qform_tinv2_kappa_angle(&u, fin(1.0)).unwrap();
        assert!((e - a).abs() < 1e-10 * e.abs(), "{e} {a}");
    }

    #[test]
    fn transform_round_trip() {
        let grid = RadialGrid::new(2048, 1e-4, 40.0).unwrap();
        let lambdas = LambdaGrid::default();
        for k in [1.0, -1.0] {
            let ext = fin(k);
            let u = wkappa_probe(k);
            assert!(in_domain_wkappa_inv(&u, ext).is_ok());
            let err = round_trip_error(&ext, &u, &lambdas, &grid).unwrap();
            assert!(err < 1e-3, "κ={k} {err}");
            let pd = parseval_defect(&ext, &u, &lambdas).unwrap();
            assert!(pd < 1e-3, "κ={k} {pd}");
        }
        let t = forward(&fin(-1.0), &F::term(1.0, 2, -1.0), &lambdas);
        assert!(t.is_err());
    }

    #[test]
    fn deficiency_pairings() {
        let grid = RadialGrid::default();
        let u = w0_probe();
        for sign in [Sign::Plus, Sign::Minus] {
            for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
                let p = deficiency_pairing_inv2(sign, 1.0, C64::from(a), C64::from(b), &u, &grid).unwrap();
                assert!(p.norm() < 1e-6, "{sign:?} {a} {b} {p}");
            }
        }
        let bad = F::term(1.0, 2, -1.0);
        assert!(matches!(
            deficiency_pairing_inv2(Sign::Plus, 1.0, C64::from(1.0), C64::from(0.0), &bad, &grid),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn d_vector_moment_values() {
        let grid = RadialGrid::default();
        for sign in [Sign::Plus, Sign::Minus] {
            let rho = 1.3;
            let s = sign.value();
            let (m0, m2) = d_vector_moments(sign, rho, &grid).unwrap();
            let e0 = C64::from_polar(2f64.sqrt() * rho, s * 5.0 * PI / 8.0);
            let e2 = C64::from_polar(6.0 / (rho * rho), s * PI / 4.0);
            assert!((m0 - e0).norm() < 1e-8, "{m0} {e0}");
            assert!((m2 - e2).norm() < 1e-8, "{m2} {e2}");
        }
    }
}
