//! Transverse vector fields on `ℝ³` built from radial profiles and vector
//! spherical harmonics
//!
//! `f = Σ (l̃ u/r² Υ + u'/r Ψ) + Σ φ/r Φ`, `l̃ = √(l(l+1))`,
//! `Υ = (x/r)Y`, `Ψ = l̃⁻¹ r ∂Y`, `Φ = l̃⁻¹ x × ∂Y`.
//!
//! `Y_lm` are real orthonormal harmonics: `m > 0` carries `√2 cos(mφ)`,
//! `m < 0` carries `√2 sin(|m|φ)`, without the Condon–Shortley phase. The
//! complex harmonics are `Y_l^{±|m|} = (Y_{l|m|} ± iY_{l,-|m|})/√2` up to that
//! phase. The Laplacian is taken positive, `Δ = -Σ∂²/∂x_k²`.

use crate::error::{Error, Result};
use crate::integrate::integrate_exact;
use crate::quadrature::{integrate_adaptive, integrate_to_infinity, RadialGrid};
use crate::radial::{RadialFunction, C64};
use crate::special::{factorial, gauss_legendre};
use crate::tkappa::{apply_t_kappa, in_domain_wkappa, KappaExtension};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];

/// Point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalDirection {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        SphericalDirection { theta, phi }
    }

    pub fn unit(&self) -> Vec3 {
        let s = self.theta.sin();
        [s * self.phi.cos(), s * self.phi.sin(), self.theta.cos()]
    }
}

/// Homogeneous polynomial in `(x, y, z)`.
#[derive(Clone, Debug, Default)]
struct Poly(Vec<(f64, [u32; 3])>);

impl Poly {
    fn monomial(c: f64, e: [u32; 3]) -> Self {
        Poly(vec![(c, e)])
    }

    fn add(&mut self, other: &Poly, scale: f64) {
        for &(c, e) in &other.0 {
            match self.0.iter_mut().find(|(_, f)| *f == e) {
                Some(t) => t.0 += scale * c,
                None => self.0.push((scale * c, e)),
            }
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for &(a, ea) in &self.0 {
            for &(b, eb) in &other.0 {
                out.add(&Poly::monomial(a * b, [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]), 1.0);
            }
        }
        out
    }

    fn diff(&self, k: usize) -> Poly {
        let mut out = Poly::default();
        for &(c, e) in &self.0 {
            if e[k] > 0 {
                let mut f = e;
                f[k] -= 1;
                out.add(&Poly::monomial(c * e[k] as f64, f), 1.0);
            }
        }
        out
    }

    fn eval(&self, x: &Vec3) -> f64 {
        self.0
            .iter()
            .map(|&(c, e)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }
}

/// Real solid harmonic `r^l Y_lm(x/r)` with its first and second
/// derivatives as polynomials.
#[derive(Clone, Debug)]
struct SolidHarmonic {
    l: u32,
    p: Poly,
    dp: [Poly; 3],
    ddp: [[Poly; 3]; 3],
}

fn binom(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl SolidHarmonic {
    fn new(l: u32, m: i32) -> Self {
        let am = m.unsigned_abs();
        let mut r2 = Poly::default();
        for k in 0..3 {
            let mut e = [0; 3];
            e[k] = 2;
            r2.add(&Poly::monomial(1.0, e), 1.0);
        }
        let mut pi = Poly::default();
        let mut r2k = Poly::monomial(1.0, [0, 0, 0]);
        for k in 0..=(l - am) / 2 {
            let c = (-1f64).powi(k as i32) * 2f64.powi(-(l as i32)) * binom(l, k) * binom(2 * l - 2 * k, l)
                * factorial(l - 2 * k)
                / factorial(l - 2 * k - am);
            pi.add(&r2k.mul(&Poly::monomial(c, [0, 0, l - 2 * k - am])), 1.0);
            r2k = r2k.mul(&r2);
        }
        let mut azim = Poly::default();
        for j in 0..=am {
            let c = binom(am, j);
            let ipow = j % 4;
            let take = if m >= 0 { ipow % 2 == 0 } else { ipow % 2 == 1 };
            if take {
                let sign = if ipow >= 2 { -1.0 } else { 1.0 };
                azim.add(&Poly::monomial(sign * c, [am - j, j, 0]), 1.0);
            }
        }
        let mut norm = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        if m != 0 {
            norm *= (2.0 * factorial(l - am) / factorial(l + am)).sqrt();
        }
        let mut p = Poly::default();
        p.add(&pi.mul(&azim), norm);
        let dp = [p.diff(0), p.diff(1), p.diff(2)];
        let ddp = [0, 1, 2].map(|j| [0, 1, 2].map(|k| dp[j].diff(k)));
        SolidHarmonic { l, p, dp, ddp }
    }

    /// `Y`, `∂_kY` and `∂_j∂_kY` of `Y(x/|x|)` at `x ≠ 0`.
    fn angular(&self, x: &Vec3) -> (f64, Vec3, [[f64; 3]; 3]) {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let r = r2.sqrt();
        let l = self.l as f64;
        let rl = r.powi(self.l as i32);
        let p = self.p.eval(x);
        let dp = [0, 1, 2].map(|k| self.dp[k].eval(x));
        let y = p / rl;
        let dy = [0, 1, 2].map(|k| dp[k] / rl - l * p * x[k] / (rl * r2));
        let mut ddy = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                let delta = if j == k { 1.0 } else { 0.0 };
                ddy[j][k] = self.ddp[j][k].eval(x) / rl - l * (dp[k] * x[j] + dp[j] * x[k]) / (rl * r2)
                    - l * p * delta / (rl * r2)
                    + l * (l + 2.0) * p * x[j] * x[k] / (rl * r2 * r2);
            }
        }
        (y, dy, ddy)
    }
}

/// `Υ`, `Ψ`, `Φ` at one direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorHarmonicTriple {
    pub upsilon: Vec3,
    pub psi: Vec3,
    pub phi: Vec3,
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn check_indices(l: u32, m: i32) -> Result<()> {
    if l == 0 || m.unsigned_abs() > l {
        Err(Error::InvalidIndices { l: l as i32, m })
    } else {
        Ok(())
    }
}

/// Real scalar harmonic `Y_lm(Ω)`, `l ≥ 0`.
pub fn eval_ylm(l: u32, m: i32, dir: SphericalDirection) -> Result<f64> {
    if m.unsigned_abs() > l {
        return Err(Error::InvalidIndices { l: l as i32, m });
    }
    Ok(SolidHarmonic::new(l, m).angular(&dir.unit()).0)
}

fn triple_at(h: &SolidHarmonic, n: &Vec3) -> VectorHarmonicTriple {
    let (y, dy, _) = h.angular(n);
    let lt = ((h.l * (h.l + 1)) as f64).sqrt();
    VectorHarmonicTriple {
        upsilon: n.map(|c| c * y),
        psi: dy.map(|c| c / lt),
        phi: cross(n, &dy).map(|c| c / lt),
    }
}

/// Vector harmonics `Υ_lm`, `Ψ_lm`, `Φ_lm` at `Ω`; requires `l ≥ 1`,
/// `|m| ≤ l`.
pub fn eval_vsh(l: u32, m: i32, dir: SphericalDirection) -> Result<VectorHarmonicTriple> {
    check_indices(l, m)?;
    Ok(triple_at(&SolidHarmonic::new(l, m), &dir.unit()))
}

/// Product rule on `S²`: Gauss–Legendre in `cos θ` times a uniform rule in
/// `φ`. With `n_theta` and `n_phi` nodes it integrates `Y_lm Y_l'm'` exactly
/// for `l + l' ≤ min(2n_theta - 1, n_phi - 1)`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<(Vec3, f64)>,
}

impl SphereRule {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for (c, wc) in x.iter().zip(&w) {
            let s = (1.0 - c * c).sqrt();
            for j in 0..n_phi {
                let p = (j as f64 + 0.5) * dphi;
                points.push(([s * p.cos(), s * p.sin(), *c], wc * dphi));
            }
        }
        SphereRule { points }
    }

    pub fn integrate<F: FnMut(&Vec3) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().map(|(n, w)| w * f(n)).sum()
    }
}

impl Default for SphereRule {
    fn default() -> Self {
        SphereRule::new(32, 64)
    }
}

/// Radial profiles `(u_lm, φ_lm)` of one harmonic component.
#[derive(Clone, Debug)]
pub struct Component {
    pub u: RadialFunction,
    pub phi: RadialFunction,
}

/// Finite set of components indexed by `(l, m)`.
#[derive(Clone, Debug, Default)]
pub struct TransverseFieldSpec {
    components: BTreeMap<(u32, i32), Component>,
}

struct Prepared {
    h: SolidHarmonic,
    lt: f64,
    u: [RadialFunction; 3],
    phi: [RadialFunction; 2],
}

impl TransverseFieldSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, l: u32, m: i32, u: RadialFunction, phi: RadialFunction) -> Result<Self> {
        self.insert(l, m, u, phi)?;
        Ok(self)
    }

    pub fn insert(&mut self, l: u32, m: i32, u: RadialFunction, phi: RadialFunction) -> Result<()> {
        check_indices(l, m)?;
        self.components.insert((l, m), Component { u, phi });
        Ok(())
    }

    pub fn components(&self) -> impl Iterator<Item = (&(u32, i32), &Component)> {
        self.components.iter()
    }

    fn prepare(&self) -> Vec<Prepared> {
        self.components
            .iter()
            .map(|(&(l, m), c)| {
                let du = c.u.derivative();
                let ddu = du.derivative();
                Prepared {
                    h: SolidHarmonic::new(l, m),
                    lt: ((l * (l + 1)) as f64).sqrt(),
                    u: [c.u.clone(), du, ddu],
                    phi: [c.phi.clone(), c.phi.derivative()],
                }
            })
            .collect()
    }
}

fn norm3(x: &Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

type Angular = (f64, Vec3, [[f64; 3]; 3]);

/// `(a, a', b, b', c, c')` in `f = a xY + b∂Y + c x×∂Y`.
fn radial_coeffs(p: &Prepared, r: f64) -> [C64; 6] {
    let (u, du, ddu) = (p.u[0].eval(r), p.u[1].eval(r), p.u[2].eval(r));
    let (ph, dph) = (p.phi[0].eval(r), p.phi[1].eval(r));
    [
        u * p.lt / r.powi(3),
        (du / r.powi(3) - 3.0 * u / r.powi(4)) * p.lt,
        du / p.lt,
        ddu / p.lt,
        ph / (p.lt * r),
        (dph / r - ph / (r * r)) / p.lt,
    ]
}

fn accumulate(co: &[C64; 6], ang: &Angular, x: &Vec3, r: f64, f: &mut CVec3, jac: &mut [[C64; 3]; 3]) {
    let [a, da, b, db, c, dc] = *co;
    let (y, dy, ddy) = ang;
    let xd = cross(x, dy);
    for j in 0..3 {
        f[j] += a * x[j] * *y + b * dy[j] + c * xd[j];
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        for k in 0..3 {
            let delta = if j == k { 1.0 } else { 0.0 };
            let curl_part = if k == j1 {
                dy[j2]
            } else if k == j2 {
                -dy[j1]
            } else {
                0.0
            } + x[j1] * ddy[j2][k]
                - x[j2] * ddy[j1][k];
            jac[j][k] += da * x[k] / r * x[j] * *y
                + a * (delta * *y + x[j] * dy[k])
                + db * x[k] / r * dy[j]
                + b * ddy[j][k]
                + dc * x[k] / r * xd[j]
                + c * curl_part;
        }
    }
}

/// Field value and Jacobian `J[j][k] = ∂_k f^j` at `x`.
fn field_and_jacobian(prep: &[Prepared], x: &Vec3) -> (CVec3, [[C64; 3]; 3]) {
    let r = norm3(x);
    let zero = C64::new(0.0, 0.0);
    let mut f = [zero; 3];
    let mut jac = [[zero; 3]; 3];
    for p in prep {
        accumulate(&radial_coeffs(p, r), &p.h.angular(x), x, r, &mut f, &mut jac);
    }
    (f, jac)
}

/// Angular factors tabulated on the unit sphere; `∂Y` and `∂∂Y` scale as
/// `r⁻¹` and `r⁻²`.
struct SphereTable<'a> {
    prep: &'a [Prepared],
    sphere: &'a SphereRule,
    table: Vec<Vec<Angular>>,
}

impl<'a> SphereTable<'a> {
    fn new(prep: &'a [Prepared], sphere: &'a SphereRule) -> Self {
        let table = sphere
            .points
            .iter()
            .map(|(n, _)| prep.iter().map(|p| p.h.angular(n)).collect())
            .collect();
        SphereTable { prep, sphere, table }
    }

    /// `∫_{S²} g(f(rΩ), ∂f(rΩ)) dΩ`.
    fn integrate<G: Fn(&CVec3, &[[C64; 3]; 3]) -> f64>(&self, r: f64, g: G) -> f64 {
        let coeffs: Vec<[C64; 6]> = self.prep.iter().map(|p| radial_coeffs(p, r)).collect();
        let zero = C64::new(0.0, 0.0);
        self.sphere
            .points
            .iter()
            .zip(&self.table)
            .map(|((n, w), angs)| {
                let x = n.map(|c| c * r);
                let mut f = [zero; 3];
                let mut jac = [[zero; 3]; 3];
                for (co, (y, dy, ddy)) in coeffs.iter().zip(angs) {
                    let ang = (*y, dy.map(|v| v / r), ddy.map(|row| row.map(|v| v / (r * r))));
                    accumulate(co, &ang, &x, r, &mut f, &mut jac);
                }
                w * g(&f, &jac)
            })
            .sum()
    }
}

/// `f(x)` for `x ≠ 0`.
pub fn assemble_field(spec: &TransverseFieldSpec, x: Vec3) -> Result<CVec3> {
    if norm3(&x) == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    Ok(field_and_jacobian(&spec.prepare(), &x).0)
}

/// `∂_k f^j` at `x ≠ 0`, from the closed-form radial derivatives.
pub fn field_jacobian(spec: &TransverseFieldSpec, x: Vec3) -> Result<[[C64; 3]; 3]> {
    if norm3(&x) == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    Ok(field_and_jacobian(&spec.prepare(), &x).1)
}

/// `Σ_k ∂_k f^k` from the analytic Jacobian.
pub fn divergence(spec: &TransverseFieldSpec, x: Vec3) -> Result<C64> {
    let j = field_jacobian(spec, x)?;
    Ok(j[0][0] + j[1][1] + j[2][2])
}

/// `Σ_k ∂_k f^k` by central differences with step `h`.
pub fn divergence_fd(spec: &TransverseFieldSpec, x: Vec3, h: f64) -> Result<C64> {
    let prep = spec.prepare();
    if norm3(&x) <= h {
        return Err(Error::OriginEvaluation);
    }
    let mut d = C64::new(0.0, 0.0);
    for k in 0..3 {
        let (mut a, mut b) = (x, x);
        a[k] += h;
        b[k] -= h;
        d += (field_and_jacobian(&prep, &a).0[k] - field_and_jacobian(&prep, &b).0[k]) / (2.0 * h);
    }
    Ok(d)
}

fn angle_product_l(u: &RadialFunction, v: &RadialFunction, l: u32) -> Result<C64> {
    let ub = u.conj();
    let g = &(&ub.derivative() * &v.derivative()) + &(&ub * v).shift_power(-2).scale((l * (l + 1)) as f64);
    integrate_exact(&g)
}

/// `∫ f̄_A · f_B d³x` by radial grid × sphere rule, and
/// `Σ_lm [(φ_A, φ_B) + ⟨u_A, u_B⟩_l]` in closed form.
pub fn product_reduction_check(
    a: &TransverseFieldSpec,
    b: &TransverseFieldSpec,
    grid: &RadialGrid,
    sphere: &SphereRule,
) -> Result<(f64, f64)> {
    let (pa, pb) = (a.prepare(), b.prepare());
    let vals: Vec<C64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let s = sphere.integrate(|n| {
                let x = n.map(|c| c * r);
                let fa = field_and_jacobian(&pa, &x).0;
                let fb = field_and_jacobian(&pb, &x).0;
                (0..3).map(|j| (fa[j].conj() * fb[j]).re).sum::<f64>()
            });
            C64::from(s * r * r)
        })
        .collect();
    let lhs = grid.integrate_samples(&vals).value.re;
    let mut rhs = C64::new(0.0, 0.0);
    for (key, ca) in a.components() {
        if let Some(cb) = b.components.get(key) {
            rhs += integrate_exact(&(&ca.phi.conj() * &cb.phi))?;
            rhs += angle_product_l(&ca.u, &cb.u, key.0)?;
        }
    }
    Ok((lhs, rhs.re))
}

/// `∫_{∂B_ρ} |f|² d²s`.
pub fn surface_integral(spec: &TransverseFieldSpec, rho: f64, sphere: &SphereRule) -> f64 {
    let prep = spec.prepare();
    rho * rho * SphereTable::new(&prep, sphere).integrate(rho, |f, _| f.iter().map(|c| c.norm_sqr()).sum())
}

/// `∫_{ℝ³∖B_ρ} Σ|∂_k f^j|² d³x` for each `ρ` (any order).
pub fn gradient_energy_outside(spec: &TransverseFieldSpec, rhos: &[f64], sphere: &SphereRule) -> Vec<f64> {
    let prep = spec.prepare();
    let table = SphereTable::new(&prep, sphere);
    let integrand =
        |r: f64| C64::from(r * r * table.integrate(r, |_, j| j.iter().flatten().map(|c| c.norm_sqr()).sum()));
    let mut order: Vec<usize> = (0..rhos.len()).collect();
    order.sort_by(|&i, &j| rhos[j].total_cmp(&rhos[i]));
    let mut out = vec![0.0; rhos.len()];
    let Some(&first) = order.first() else {
        return out;
    };
    let mut acc = integrate_to_infinity(integrand, rhos[first].max(1.0), 1e-13).value.re;
    let mut upper = rhos[first].max(1.0);
    for &i in &order {
        let mut lo = upper;
        while lo > rhos[i] {
            let next = (lo / 4.0).max(rhos[i]);
            acc += integrate_adaptive(integrand, next, lo, 1e-13 * acc.abs().max(1.0)).value.re;
            lo = next;
        }
        upper = lo;
        out[i] = acc;
    }
    out
}

/// Result of the excised-ball evaluation of the extended form.
#[derive(Clone, Debug)]
pub struct PullbackResult {
    pub rhos: Vec<f64>,
    /// `∫(∂f)² - (5/(3ρ) - 44κ/27)∫_{∂B_ρ}|f|²` per `ρ`.
    pub bracket_mext: Vec<f64>,
    /// `∫(∂f)² - (5/ρ + 4κ)u'(0)²` per `ρ`.
    pub bracket_utu: Vec<f64>,
    pub surface: Vec<f64>,
    /// Linear extrapolation to `ρ = 0` from the two smallest radii.
    pub extrapolated_mext: f64,
    pub extrapolated_utu: f64,
    /// `⟨u, T_κu⟩` in closed form.
    pub exact: f64,
}

fn extrapolate(rhos: &[f64], vals: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..rhos.len()).collect();
    idx.sort_by(|&i, &j| rhos[i].total_cmp(&rhos[j]));
    let (a, b) = (idx[0], idx[1]);
    let slope = (vals[b] - vals[a]) / (rhos[b] - rhos[a]);
    vals[a] - slope * rhos[a]
}

pub const DEFAULT_PULLBACK_RADII: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Excised-ball form of a single `l = 1` component `u ∈ 𝒲_κ`.
pub fn qform_pullback(
    u: &RadialFunction,
    m: i32,
    ext: KappaExtension,
    rhos: &[f64],
    sphere: &SphereRule,
) -> Result<PullbackResult> {
    let KappaExtension::Finite(k) = ext else {
        return Err(Error::InvalidArgument("the excised-ball form needs a finite κ".into()));
    };
    if rhos.len() < 2 || rhos.iter().any(|&r| r <= 0.0) {
        return Err(Error::InvalidArgument("need at least two positive radii".into()));
    }
    in_domain_wkappa(u, ext).into_result()?;
    let spec = TransverseFieldSpec::new().with(1, m, u.clone(), RadialFunction::zero())?;
    let du0 = u.taylor_at_zero(1)?[1];
    let du0_sq = du0.norm_sqr();
    let energy = gradient_energy_outside(&spec, rhos, sphere);
    let surface: Vec<f64> = rhos.iter().map(|&r| surface_integral(&spec, r, sphere)).collect();
    let bracket_mext: Vec<f64> = (0..rhos.len())
        .map(|i| energy[i] - (5.0 / (3.0 * rhos[i]) - 44.0 * k / 27.0) * surface[i])
        .collect();
    let bracket_utu: Vec<f64> = (0..rhos.len())
        .map(|i| energy[i] - (5.0 / rhos[i] + 4.0 * k) * du0_sq)
        .collect();
    let exact = crate::quadrature::inner_angle_exact(u, &apply_t_kappa(u, ext)?)?.re;
    Ok(PullbackResult {
        extrapolated_mext: extrapolate(rhos, &bracket_mext),
        extrapolated_utu: extrapolate(rhos, &bracket_utu),
        rhos: rhos.to_vec(),
        bracket_mext,
        bracket_utu,
        surface,
        exact,
    })
}

/// Largest residual of `x·Ψ = 0`, `∫Υ^j x_k∂_j∂_kY' = 0` and
/// `∫Ψ^j x_k∂_j∂_kY' = -l̃ρ⁻¹δδ'` over `l, l' ≤ l_max` on the sphere of radius
/// `rho`.
pub fn auxiliary_identities(rho: f64, l_max: u32, sphere: &SphereRule) -> f64 {
    let hs: Vec<SolidHarmonic> = (1..=l_max)
        .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| SolidHarmonic::new(l, m)))
        .collect();
    let mut worst: f64 = 0.0;
    for (a, ha) in hs.iter().enumerate() {
        for (b, hb) in hs.iter().enumerate() {
            let (mut ups, mut psi, mut radial) = (0.0, 0.0, 0.0);
            for (n, w) in &sphere.points {
                let x = n.map(|c| c * rho);
                let t = triple_at(ha, n);
                let ddy = hb.angular(&x).2;
                let contract = |v: &Vec3| -> f64 {
                    (0..3).map(|j| (0..3).map(|k| v[j] * x[k] * ddy[j][k]).sum::<f64>()).sum()
                };
                ups += w * contract(&t.upsilon);
                psi += w * contract(&t.psi);
                radial = f64::max(radial, (0..3).map(|k| x[k] * t.psi[k]).sum::<f64>().abs());
            }
            let lt = ((ha.l * (ha.l + 1)) as f64).sqrt();
            let target = if a == b { -lt / rho } else { 0.0 };
            worst = worst.max(ups.abs()).max((psi - target).abs() * rho).max(radial);
        }
    }
    worst
}

/// Largest deviation of the sphere Gram matrix of `{Υ, Ψ, Φ}_{lm}`,
/// `l ≤ l_max`, from the identity.
pub fn orthonormality_defect(l_max: u32, sphere: &SphereRule) -> f64 {
    let hs: Vec<SolidHarmonic> = (1..=l_max)
        .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| SolidHarmonic::new(l, m)))
        .collect();
    let samples: Vec<Vec<[Vec3; 3]>> = sphere
        .points
        .iter()
        .map(|(n, _)| {
            hs.iter()
                .map(|h| {
                    let t = triple_at(h, n);
                    [t.upsilon, t.psi, t.phi]
                })
                .collect()
        })
        .collect();
    let count = hs.len() * 3;
    let mut worst: f64 = 0.0;
    for a in 0..count {
        for b in a..count {
            let g: f64 = sphere
                .points
                .iter()
                .zip(&samples)
                .map(|((_, w), s)| {
                    let (va, vb) = (&s[a / 3][a % 3], &s[b / 3][b % 3]);
                    w * (va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2])
                })
                .sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialFunction as F;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dot(a: &Vec3, b: &Vec3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn y10_convention() {
        let d = SphericalDirection::new(0.7, 1.9);
        let y = eval_ylm(1, 0, d).unwrap();
        assert!((y - (3.0 / (4.0 * PI)).sqrt() * 0.7f64.cos()).abs() < 1e-15);
        let t = eval_vsh(1, 0, d).unwrap();
        let n = d.unit();
        assert!((norm3(&n) - 1.0).abs() < 1e-14);
        for k in 0..3 {
            assert!((t.upsilon[k] - n[k] * y).abs() < 1e-15);
        }
        assert_eq!(eval_vsh(0, 0, d), Err(Error::InvalidIndices { l: 0, m: 0 }));
        assert_eq!(eval_vsh(2, 3, d), Err(Error::InvalidIndices { l: 2, m: 3 }));
    }

    #[test]
    fn pointwise_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = SphericalDirection::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
            for (l, m) in [(1, 0), (1, -1), (2, 1), (3, -2)] {
                let t = eval_vsh(l, m, d).unwrap();
                let n = d.unit();
                assert!(dot(&t.upsilon, &t.psi).abs() < 1e-14);
                assert!(dot(&t.upsilon, &t.phi).abs() < 1e-14);
                assert!(dot(&t.psi, &t.phi).abs() < 1e-14);
                assert!(dot(&n, &t.psi).abs() < 1e-14);
                assert!(dot(&n, &t.phi).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sphere_orthonormality() {
        let s = SphereRule::default();
        assert!(orthonormality_defect(2, &s) < 1e-10);
        let psi = s.integrate(|n| {
            let h = SolidHarmonic::new(1, 0);
            let t = triple_at(&h, n);
            dot(&t.psi, &t.psi)
        });
        assert!((psi - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_toroidal_component() {
        let spec = TransverseFieldSpec::new()
            .with(1, 0, F::zero(), F::term(1.0, 1, -1.0))
            .unwrap();
        let x = [0.3, -0.4, 0.5];
        let r = norm3(&x);
        let d = SphericalDirection::new((x[2] / r).acos(), x[1].atan2(x[0]));
        let t = eval_vsh(1, 0, d).unwrap();
        let f = assemble_field(&spec, x).unwrap();
        for k in 0..3 {
            assert!((f[k].re - (-r).exp() * t.phi[k]).abs() < 1e-14);
        }
        assert_eq!(assemble_field(&spec, [0.0; 3]), Err(Error::OriginEvaluation));
    }

    #[test]
    fn harmonic_profile_envelope() {
        let spec = TransverseFieldSpec::new().with(1, 0, F::power(2), F::zero()).unwrap();
        let x = [0.2, 0.9, -0.4];
        let r = norm3(&x);
        let d = SphericalDirection::new((x[2] / r).acos(), x[1].atan2(x[0]));
        let t = eval_vsh(1, 0, d).unwrap();
        let f = assemble_field(&spec, x).unwrap();
        let f2: f64 = f.iter().map(|c| c.norm_sqr()).sum();
        let expect = 2.0 * dot(&t.upsilon, &t.upsilon) + 4.0 * dot(&t.psi, &t.psi);
        assert!((f2 - expect).abs() < 1e-13);
    }

    #[test]
    fn divergence_free() {
        let spec = TransverseFieldSpec::new().with(1, 0, F::term(1.0, 2, -1.0), F::zero()).unwrap();
        let x = [0.3, 0.4, 0.5];
        assert!(divergence_fd(&spec, x, 1e-5 * norm3(&x)).unwrap().norm() < 1e-8);
        assert!(divergence(&spec, x).unwrap().norm() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut spec = TransverseFieldSpec::new();
        for (l, m) in [(1, 1), (2, -1), (3, 2)] {
            let a: f64 = rng.gen_range(0.5..2.0);
            spec.insert(l, m, F::term(rng.gen_range(-1.0..1.0), 2, -a), F::term(1.0, 1, -a)).unwrap();
        }
        for _ in 0..50 {
            let x = [0, 1, 2].map(|_| rng.gen_range(-2.0..2.0));
            assert!(divergence(&spec, x).unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let mut spec = TransverseFieldSpec::new();
        spec.insert(2, 1, F::term(1.0, 3, -1.0), F::term(0.5, 2, -1.5)).unwrap();
        let x = [0.6, -0.2, 0.9];
        let j = field_jacobian(&spec, x).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let (mut a, mut b) = (x, x);
            a[k] += h;
            b[k] -= h;
            let fa = assemble_field(&spec, a).unwrap();
            let fb = assemble_field(&spec, b).unwrap();
            for jj in 0..3 {
                assert!((j[jj][k] - (fa[jj] - fb[jj]) / (2.0 * h)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn product_reduction() {
        let grid = RadialGrid::new(512, 1e-6, 40.0).unwrap();
        let sphere = SphereRule::new(8, 16);
        let u = F::term(1.0, 1, -1.0);
        let a = TransverseFieldSpec::new().with(1, 0, u.clone(), F::zero()).unwrap();
        let (lhs, rhs) = product_reduction_check(&a, &a, &grid, &sphere).unwrap();
        assert!((rhs - 1.25).abs() < 1e-14);
        assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} {rhs}");
        let b = TransverseFieldSpec::new().with(1, 0, F::zero(), u.clone()).unwrap();
        assert!(product_reduction_check(&a, &b, &grid, &sphere).unwrap().0.abs() < 1e-10);
        let c = TransverseFieldSpec::new().with(1, 1, u, F::zero()).unwrap();
        assert!(product_reduction_check(&a, &c, &grid, &sphere).unwrap().0.abs() < 1e-10);
    }

    #[test]
    fn auxiliary() {
        assert!(auxiliary_identities(0.7, 2, &SphereRule::new(12, 24)) < 1e-8);
    }

    #[test]
    fn pullback_brackets() {
        let u = F::term(1.0, 1, -1.0);
        let res = qform_pullback(&u, 0, KappaExtension::Finite(-1.5), &DEFAULT_PULLBACK_RADII, &SphereRule::default())
            .unwrap();
        let b1 = [-2.669053759673369, -2.741790653676013, -2.749177906653668];
        let b2 = [-2.680266988421773, -2.743002666998834, -2.749300026666999];
        for i in 0..3 {
            assert!((res.bracket_mext[i + 1] - b1[i]).abs() < 1e-8, "{:?}", res.bracket_mext);
            assert!((res.bracket_utu[i + 1] - b2[i]).abs() < 1e-8, "{:?}", res.bracket_utu);
        }
        assert!((res.surface[1] - 2.921090066321461).abs() < 1e-9);
        assert!((res.exact + 2.75).abs() < 1e-12, "{}", res.exact);
        assert!((res.extrapolated_mext - res.exact).abs() < 1e-4);
        assert!((res.extrapolated_utu - res.exact).abs() < 1e-4);
        assert!(qform_pullback(&u, 0, KappaExtension::Infinite, &DEFAULT_PULLBACK_RADII, &SphereRule::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fields_are_divergence_free(
            l in 1u32..4, mi in 0u32..7, a in 0.3f64..2.5, p in 1i32..4,
            cu in -2.0f64..2.0, cp in -2.0f64..2.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0, z in 0.1f64..3.0,
        ) {
            let m = (mi % (2 * l + 1)) as i32 - l as i32;
            let spec = TransverseFieldSpec::new()
                .with(l, m, F::term(cu, p + 1, -a), F::term(cp, p, -a))
                .unwrap();
            let d = divergence(&spec, [x, y, z]).unwrap();
            let scale = field_jacobian(&spec, [x, y, z]).unwrap().iter().flatten().map(|c| c.norm()).fold(1.0, f64::max);
            prop_assert!(d.norm() < 1e-12 * scale);
        }

        #[test]
        fn vsh_triples_are_orthogonal(l in 1u32..5, mi in 0u32..9, th in 0.01f64..3.13, ph in 0.0f64..6.0) {
            let m = (mi % (2 * l + 1)) as i32 - l as i32;
            let t = eval_vsh(l, m, SphericalDirection::new(th, ph)).unwrap();
            prop_assert!(dot(&t.upsilon, &t.psi).abs() < 1e-13);
            prop_assert!(dot(&t.psi, &t.phi).abs() < 1e-13);
            prop_assert!(dot(&t.upsilon, &t.phi).abs() < 1e-13);
        }
    }
}
