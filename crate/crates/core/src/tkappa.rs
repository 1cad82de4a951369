//! The extension family `T_κ u = Tu - (2/r) u'(0)` on
//! `𝒲_κ = {u ∈ ℋ : T_κ u ∈ ℋ, 3u''(0) = 4κ u'(0)}`.

use crate::error::{Error, Result};
use crate::integrate::{check_integrable, integrate_exact};
use crate::quadrature::{angle_integrand, inner_angle, integrate_split, require_vanishing_at_origin, RadialGrid};
use crate::radial::{RadialFunction, C64};
use crate::spectral::{ContinuousMode, DiscreteMode, SpectralFamily};
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

/// Extension parameter κ. `Infinite` is the boundary condition `u'(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KappaExtension {
    Finite(f64),
    Infinite,
}

impl KappaExtension {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_finite() {
            Ok(KappaExtension::Finite(kappa))
        } else if kappa.is_infinite() {
            Ok(KappaExtension::Infinite)
        } else {
            Err(Error::InvalidArgument("κ must not be NaN".into()))
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match *self {
            KappaExtension::Finite(k) => Some(k),
            KappaExtension::Infinite => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainReason {
    NotInH,
    ImageNotInH,
    PoleAtOrigin,
    FirstDerivative,
    SecondDerivative,
    BoundaryCondition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainCheck {
    pub member: bool,
    pub reason: Option<DomainReason>,
}

impl DomainCheck {
    fn pass() -> Self {
        DomainCheck { member: true, reason: None }
    }

    fn fail(reason: DomainReason) -> Self {
        DomainCheck {
            member: false,
            reason: Some(reason),
        }
    }

    pub fn into_result(self) -> Result<()> {
        match self.reason {
            None => Ok(()),
            Some(r) => Err(Error::DomainViolation(format!("{r:?}"))),
        }
    }
}

/// `u` vanishes at the origin and `⟨u, u⟩` is finite.
pub fn in_h(u: &RadialFunction) -> bool {
    require_vanishing_at_origin(u).is_ok() && check_integrable(&angle_integrand(u, u)).is_ok()
}

fn near_zero(x: C64, scale: f64) -> bool {
    x.norm() <= 1e-12 * scale.max(1.0)
}

/// `u ∈ 𝒲₀`: `u, Tu ∈ ℋ` and `u'(0) = u''(0) = 0`.
pub fn in_domain_w0(u: &RadialFunction) -> DomainCheck {
    if !in_h(u) {
        return DomainCheck::fail(DomainReason::NotInH);
    }
    let Ok(t) = u.taylor_at_zero(2) else {
        return DomainCheck::fail(DomainReason::PoleAtOrigin);
    };
    let scale = u.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    if !near_zero(t[1], scale) {
        DomainCheck::fail(DomainReason::FirstDerivative)
    } else if !near_zero(t[2], scale) {
        DomainCheck::fail(DomainReason::SecondDerivative)
    } else if !in_h(&u.apply_t()) {
        DomainCheck::fail(DomainReason::ImageNotInH)
    } else {
        DomainCheck::pass()
    }
}

/// `u ∈ 𝒲_κ`: `u, T_κu ∈ ℋ` and `3u''(0) = 4κu'(0)`.
pub fn in_domain_wkappa(u: &RadialFunction, ext: KappaExtension) -> DomainCheck {
    if !in_h(u) {
        return DomainCheck::fail(DomainReason::NotInH);
    }
    let Ok(t) = u.taylor_at_zero(2) else {
        return DomainCheck::fail(DomainReason::PoleAtOrigin);
    };
    let ok = match ext {
        KappaExtension::Finite(k) => {
            let (a, b) = (t[2] * 3.0, t[1] * 4.0 * k);
            near_zero(a - b, a.norm().max(b.norm()))
        }
        KappaExtension::Infinite => near_zero(t[1], t[2].norm()),
    };
    if !ok {
        return DomainCheck::fail(DomainReason::BoundaryCondition);
    }
    match apply_t_kappa(u, ext) {
        Ok(tu) if in_h(&tu) => DomainCheck::pass(),
        _ => DomainCheck::fail(DomainReason::ImageNotInH),
    }
}

/// `T_κ u = Tu - (2/r) u'(0)`.
pub fn apply_t_kappa(u: &RadialFunction, _ext: KappaExtension) -> Result<RadialFunction> {
    let du0 = u.taylor_at_zero(1)?[1];
    Ok(&u.apply_t() - &RadialFunction::term(du0 * 2.0, -1, 0.0))
}

/// `c± = D e^{e^{±3πi/4} ρ r} + r⁻¹`, orthogonal to `(T ± iρ²)𝒲₀` in the
/// sesquilinear product `⟨·,·⟩`.
pub fn deficiency_vector_t(sign: Sign, rho: f64) -> RadialFunction {
    let rate = C64::from_polar(rho, sign.value() * 3.0 * PI / 4.0);
    &RadialFunction::d_exp(rate) + &RadialFunction::power(-1)
}

/// `⟨c±, (T ± iρ²) v⟩` by grid quadrature.
pub fn deficiency_pairing_t(sign: Sign, rho: f64, v: &RadialFunction, grid: &RadialGrid) -> Result<C64> {
    if rho <= 0.0 {
        return Err(Error::InvalidArgument("ρ must be positive".into()));
    }
    in_domain_w0(v).into_result()?;
    let w = &v.apply_t() + &v.scale(I * (sign.value() * rho * rho));
    Ok(inner_angle(&deficiency_vector_t(sign, rho), &w, grid)?.value)
}

/// Spectral argument `z` with `0 < arg z < π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventArgT(C64);

impl ResolventArgT {
    pub fn new(z: C64) -> Result<Self> {
        if z.im > 0.0 && z.is_finite() {
            Ok(ResolventArgT(z))
        } else {
            Err(Error::InvalidArgument(format!("z = {z} is outside 0 < arg z < π")))
        }
    }

    pub fn z(&self) -> C64 {
        self.0
    }
}

/// `β(z) = (z - iκ)/(z + iκ)`; `-1` for the `u'(0) = 0` extension.
pub fn beta_t(z: C64, ext: KappaExtension) -> Result<C64> {
    match ext {
        KappaExtension::Finite(k) => {
            let den = z + I * k;
            if den.norm() < 1e-10 {
                Err(Error::PoleHit)
            } else {
                Ok((z - I * k) / den)
            }
        }
        KappaExtension::Infinite => Ok(C64::new(-1.0, 0.0)),
    }
}

/// `W(z) = h'g - hg' = -2iz³`.
pub fn wronskian_t(z: C64) -> C64 {
    -2.0 * I * z * z * z
}

pub(crate) fn cexpm1(w: C64) -> C64 {
    if w.norm() < 0.5 {
        let mut term = w;
        let mut sum = w;
        for k in 2..30 {
            term = term * w / k as f64;
            sum += term;
        }
        sum
    } else {
        w.exp() - 1.0
    }
}

/// `D e^{σr}` at `r`.
pub(crate) fn dexp(sigma: C64, r: f64) -> C64 {
    (sigma * r).exp() * (sigma - 1.0 / r)
}

/// `D e^{σr} + r⁻¹` at `r`, free of cancellation near the origin.
pub(crate) fn dexp_plus_inv(sigma: C64, r: f64) -> C64 {
    sigma * (sigma * r).exp() - sigma * cexpm1(sigma * r) / (sigma * r)
}

/// `R(r, s; z) = (1/W)(h(r)g(s)θ(s-r) + h(s)g(r)θ(r-s) + (1+β)g(s)/r)` with
/// `h = De^{-izr} + βDe^{izr}`, `g = De^{izr}`.
pub fn resolvent_t(r: f64, s: f64, z: ResolventArgT, ext: KappaExtension) -> Result<C64> {
    let z = z.z();
    let beta = beta_t(z, ext)?;
    let w = wronskian_t(z);
    let iz = I * z;
    if r <= s {
        let near = dexp_plus_inv(-iz, r) + beta * dexp_plus_inv(iz, r);
        Ok(near * dexp(iz, s) / w)
    } else {
        let h_s = dexp(-iz, s) + beta * dexp(iz, s);
        Ok((h_s * dexp(iz, r) + (1.0 + beta) * dexp(iz, s) / r) / w)
    }
}

/// `∂_r R(r, s; z)` at `r = 0`.
pub fn resolvent_t_dr0(s: f64, z: ResolventArgT, ext: KappaExtension) -> Result<C64> {
    let z = z.z();
    let beta = beta_t(z, ext)?;
    Ok(-z * z * (1.0 + beta) * dexp(I * z, s) / (2.0 * wronskian_t(z)))
}

/// `(R(z)v)(r) = ∫ R(r, s; z) v(s) ds` in closed form, for `v` built from
/// terms with `p ≥ 1`.
pub fn resolvent_t_apply(v: &RadialFunction, z: ResolventArgT, ext: KappaExtension) -> Result<RadialFunction> {
    if v.terms().iter().any(|t| t.power < 1) {
        return Err(Error::InvalidArgument("resolvent action needs powers p ≥ 1".into()));
    }
    let z = z.z();
    let beta = beta_t(z, ext)?;
    let w = wronskian_t(z);
    let g = RadialFunction::d_exp(I * z);
    let h = &RadialFunction::d_exp(-I * z) + &g.scale(beta);
    let gv = &g * v;
    let far = &h * &gv.primitive_to_infinity()?;
    let near = &g * &(&h * v).primitive_from_zero()?;
    let total = integrate_exact(&gv)?;
    let pole = RadialFunction::term((1.0 + beta) * total, -1, 0.0);
    Ok((&(&far + &near) + &pole).scale(w.inv()))
}

/// `∫ φ(r) (T_κ - z²)_r R(r, s; z) dr - φ(s)`, evaluated as
/// `∫ R(r,s)(T - z²)φ(r) dr - 2 ∂_rR(0,s) ∫ φ/r dr - φ(s)`.
pub fn resolvent_t_smeared_defect(phi: &RadialFunction, s: f64, z: ResolventArgT, ext: KappaExtension) -> Result<C64> {
    in_domain_w0(phi).into_result()?;
    let w = &phi.apply_t() - &phi.scale(z.z() * z.z());
    beta_t(z.z(), ext)?;
    let integral = integrate_split(
        |r| resolvent_t(r, s, z, ext).expect("β checked above") * w.eval(r),
        s,
        1e-14,
    );
    let phi_r = integrate_exact(&phi.shift_power(-1))?;
    Ok(integral.value - 2.0 * resolvent_t_dr0(s, z, ext)? * phi_r - phi.eval(s))
}

/// `2z₀ lim_{z→z₀} (z₀ - z) R(r, s; z)` at `z₀ = -iκ`, from a symmetric
/// four-point average around the pole.
pub fn residue_limit_t(r: f64, s: f64, ext: KappaExtension, eps: f64) -> Result<C64> {
    let k = match ext {
        KappaExtension::Finite(k) if k < 0.0 => k,
        _ => return Err(Error::NoBoundState),
    };
    let z0 = -I * k;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..4 {
        let dz = C64::from_polar(eps, PI / 4.0 + j as f64 * PI / 2.0);
        let z = ResolventArgT::new(z0 + dz)?;
        acc += -dz * resolvent_t(r, s, z, ext)?;
    }
    Ok(2.0 * z0 * acc / 4.0)
}

/// `q̃ = √(-2/κ³)(De^{κr} + r⁻¹)`, eigenvalue `-κ²`, for `κ < 0`.
pub fn discrete_mode_t(ext: KappaExtension) -> Result<DiscreteMode> {
    match ext {
        KappaExtension::Finite(k) if k < 0.0 => {
            let norm = (-2.0 / (k * k * k)).sqrt();
            let q = &RadialFunction::d_exp(k) + &RadialFunction::power(-1);
            Ok(DiscreteMode {
                eigenvalue: -k * k,
                profile: q.scale(norm),
            })
        }
        _ => Err(Error::NoBoundState),
    }
}

/// `ζ(λ) = arg(λ - iκ) ∈ (-π/2, π/2)`, so that `β(λ) = e^{2iζ}`.
pub fn phase_t(lambda: f64, ext: KappaExtension) -> f64 {
    match ext {
        KappaExtension::Finite(k) => (-k).atan2(lambda),
        KappaExtension::Infinite => -PI / 2.0,
    }
}

/// `p̃_λ = (e^{iζ}De^{iλr} + e^{-iζ}De^{-iλr} + 2cos ζ / r) / (√(2π) λ²)`.
pub fn continuous_mode_t(lambda: f64, ext: KappaExtension) -> Result<ContinuousMode> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument("λ must be positive".into()));
    }
    let zeta = phase_t(lambda, ext);
    let e = C64::from_polar(1.0, zeta);
    let p = &(&RadialFunction::d_exp(I * lambda).scale(e) + &RadialFunction::d_exp(-I * lambda).scale(e.conj()))
        + &RadialFunction::term(2.0 * zeta.cos(), -1, 0.0);
    Ok(ContinuousMode {
        lambda,
        zeta,
        profile: p.scale(1.0 / ((2.0 * PI).sqrt() * lambda * lambda)),
    })
}

impl SpectralFamily for KappaExtension {
    fn continuous_mode(&self, lambda: f64) -> Result<ContinuousMode> {
        continuous_mode_t(lambda, *self)
    }

    fn discrete_modes(&self) -> Vec<DiscreteMode> {
        discrete_mode_t(*self).into_iter().collect()
    }

    fn check_domain(&self, u: &RadialFunction) -> Result<()> {
        in_domain_wkappa(u, *self).into_result()
    }
}
