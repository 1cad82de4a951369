//! Second extension family of `T⁻²`, built on the eigensets of `T_ϰ`.
//!
//! Domain conditions: `∫D*u + ϰ∫rD*u = 0` and `3∫r²D*u + ϰ∫r³D*u = 0`.
//! The operator is the mixed kernel
//! `(s²r - s⁴/(5r))θ(r-s)/6 + (r/12)s²(d/ds)s - (r²/6)s(d/ds)s + (r³/8)(d/ds)s`.

use crate::error::{Error, Result};
use crate::integrate::integrate_exact;
use crate::quadrature::{tail_integral, RadialGrid};
use crate::radial::{RadialFunction, C64};
use crate::spectral::{forward_unchecked, LambdaGrid, SpectralFamily};
use crate::tkappa::KappaExtension;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarkappaExtension {
    varkappa: f64,
}

impl VarkappaExtension {
    pub fn new(varkappa: f64) -> Result<Self> {
        if varkappa.is_finite() {
            Ok(VarkappaExtension { varkappa })
        } else {
            Err(Error::InvalidArgument("ϰ must be finite".into()))
        }
    }

    pub fn value(&self) -> f64 {
        self.varkappa
    }
}

/// `∫ r^k D*u dr` for `k = 0..=3`.
pub fn dstar_moments(u: &RadialFunction) -> Result<[C64; 4]> {
    let d = u.apply_dstar();
    let mut out = [C64::new(0.0, 0.0); 4];
    for (k, m) in out.iter_mut().enumerate() {
        *m = integrate_exact(&d.shift_power(k as i32))?;
    }
    Ok(out)
}

/// Residuals `∫D*u + ϰ∫rD*u` and `3∫r²D*u + ϰ∫r³D*u`.
pub fn varkappa_residuals(u: &RadialFunction, ext: VarkappaExtension) -> Result<[C64; 2]> {
    let m = dstar_moments(u)?;
    let k = ext.varkappa;
    Ok([m[0] + k * m[1], 3.0 * m[2] + k * m[3]])
}

/// The `ϰ` for which the first condition holds, `-∫D*u / ∫rD*u`; infinite
/// when `∫rD*u = 0`.
pub fn critical_varkappa(u: &RadialFunction) -> Result<f64> {
    let m = dstar_moments(u)?;
    if m[1].norm() == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((-m[0] / m[1]).re)
}

fn require_smooth(u: &RadialFunction) -> Result<()> {
    let l = u.laurent(0);
    if (l.min_power..=0).all(|k| l.vanishes(k)) {
        Ok(())
    } else {
        Err(Error::NotSmoothEnough)
    }
}

/// Action of the mixed kernel on `u`, with `(d/ds)(su) = -sD*u` and the
/// resulting moments taken in closed form.
pub fn apply_tinv2_varkappa(u: &RadialFunction) -> Result<RadialFunction> {
    require_smooth(u)?;
    if u.terms().iter().any(|t| t.power < -2) {
        return Err(Error::InvalidArgument("closed-form action needs powers p ≥ -2".into()));
    }
    let m = dstar_moments(u)?;
    let near = &u.shift_power(2).primitive_from_zero()?.shift_power(1).scale(1.0 / 6.0)
        - &u.shift_power(4).primitive_from_zero()?.shift_power(-1).scale(1.0 / 30.0);
    let poly = RadialFunction::from_terms([
        crate::radial::Term::new(-m[3] / 12.0, 1, C64::new(0.0, 0.0)),
        crate::radial::Term::new(m[2] / 6.0, 2, C64::new(0.0, 0.0)),
        crate::radial::Term::new(-m[1] / 8.0, 3, C64::new(0.0, 0.0)),
    ]);
    Ok(&near + &poly)
}

/// `w = T⁻¹u - (r/2)∫(d/ds)(su) ds` and `w'` at `r`.
fn form_vector(u: &RadialFunction, m1: C64, r: f64) -> Result<(C64, C64)> {
    let a = tail_integral(&u.shift_power(-1), r)?;
    let b = u.shift_power(2).primitive_from_zero()?.eval(r);
    let w = (r * r * a + b / r) / 3.0 + 0.5 * r * m1;
    let dw = (2.0 * r * a - b / (r * r)) / 3.0 + 0.5 * m1;
    Ok((w, dw))
}

/// `Q_ϰ⁻¹(u) = ⟨w, w⟩` with `w = (T⁻¹(r,s) - (r/2)(d/ds)s)u(s)` integrated
/// over `s`. The outer product is taken on the grid; beyond `r_max` the
/// `w ~ c/r` asymptotics contributes `|c|²/R³`.
pub fn qform_varkappa(u: &RadialFunction, grid: &RadialGrid) -> Result<f64> {
    require_smooth(u)?;
    let m1 = dstar_moments(u)?[1];
    let vals = grid
        .nodes()
        .iter()
        .map(|&r| {
            let (w, dw) = form_vector(u, m1, r)?;
            Ok(C64::from(dw.norm_sqr() + 2.0 * w.norm_sqr() / (r * r)))
        })
        .collect::<Result<Vec<_>>>()?;
    let head = grid.integrate_samples(&vals).value.re;
    let big_r = grid.r_max();
    let c = form_vector(u, m1, big_r)?.0 * big_r;
    Ok(head + c.norm_sqr() / big_r.powi(3))
}

/// `Q_ϰ⁻¹(u) = ∫ w̄ (u + m/r) dr` with `m = ∫rD*u`, the form after
/// integration by parts.
pub fn qform_varkappa_by_parts(u: &RadialFunction, grid: &RadialGrid) -> Result<f64> {
    require_smooth(u)?;
    let m1 = dstar_moments(u)?[1];
    let vals = grid
        .nodes()
        .iter()
        .map(|&r| Ok(form_vector(u, m1, r)?.0.conj() * (u.eval(r) + m1 / r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid.integrate_samples(&vals).value.re)
}

/// `∫λ⁻⁴|⟨p̃_{λ,ϰ}, u⟩|² dλ + ϰ⁻⁴|⟨q̃_ϰ, u⟩|²` from the eigensets of `T_ϰ`.
pub fn qform_varkappa_spectral(u: &RadialFunction, ext: VarkappaExtension, lambdas: &LambdaGrid) -> Result<f64> {
    let family = KappaExtension::Finite(ext.varkappa);
    let t = forward_unchecked(&family, u, &lambdas.nodes, &lambdas.weights)?;
    let cont: f64 = t
        .density
        .iter()
        .zip(&t.weights)
        .zip(&t.lambdas)
        .map(|((g, w), l)| w * g.norm_sqr() / l.powi(4))
        .sum();
    let bound: f64 = family
        .discrete_modes()
        .iter()
        .zip(&t.bound)
        .map(|(q, c)| c.norm_sqr() / (q.eigenvalue * q.eigenvalue))
        .sum();
    Ok(cont + bound)
}

/// Membership residuals, kernel action and form value for `u`.
#[derive(Clone, Debug)]
pub struct VarkappaReport {
    pub residuals: [C64; 2],
    pub action: RadialFunction,
    pub form: f64,
}

pub fn varkappa_family(u: &RadialFunction, ext: VarkappaExtension, grid: &RadialGrid) -> Result<VarkappaReport> {
    Ok(VarkappaReport {
        residuals: varkappa_residuals(u, ext)?,
        action: apply_tinv2_varkappa(u)?,
        form: qform_varkappa(u, grid)?,
    })
}

/// `(1 - e^{-r})²/r + 0.3 r e^{-r}`: smooth, `u ~ 1/r` at infinity, with a
/// finite critical `ϰ`.
pub fn varkappa_example() -> RadialFunction {
    RadialFunction::from_terms([
        crate::radial::Term::new(C64::new(1.0, 0.0), -1, C64::new(0.0, 0.0)),
        crate::radial::Term::new(C64::new(-2.0, 0.0), -1, C64::new(-1.0, 0.0)),
        crate::radial::Term::new(C64::new(1.0, 0.0), -1, C64::new(-2.0, 0.0)),
        crate::radial::Term::new(C64::new(0.3, 0.0), 1, C64::new(-1.0, 0.0)),
    ])
}
