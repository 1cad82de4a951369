//! Numerical checks of the identities implemented in this crate, collected
//! into a report with one row per check.
//!
//! Each check returns a nonnegative residual; a row passes when the residual
//! does not exceed its tolerance. A check that errors reports a NaN residual
//! and fails.

use crate::error::{Error, Result};
use crate::inverse::{
    apply_tinv2_kappa_at, coefficient_set, continuous_mode_tinv2, d_vector_moments, deficiency_pairing_inv2,
    deficiency_vector_inv2, determinant, discrete_mode_tinv2, kernel_tinv, kernel_tinv2, pole_tinv2,
    resolvent_tinv2_defect, w0_probe, w0_probe_with_rates, KappaInvExtension, ResolventArgInv,
};
use crate::quadrature::{
    inner_angle, inner_angle_exact, inner_plain, integrate_adaptive, integrate_halfline, integrate_split,
    integrate_to_infinity, RadialGrid,
};
use crate::radial::{RadialFunction, C64};
use crate::registry::wkappa_probe;
use crate::spectral::{parseval_defect, round_trip_error, LambdaGrid};
use crate::tkappa::{
    apply_t_kappa, continuous_mode_t, deficiency_pairing_t, deficiency_vector_t, discrete_mode_t, residue_limit_t,
    resolvent_t_smeared_defect, KappaExtension, ResolventArgT, Sign,
};
use crate::transverse::{
    auxiliary_identities, divergence, orthonormality_defect, product_reduction_check, qform_pullback, PullbackResult,
    SphereRule, TransverseFieldSpec, DEFAULT_PULLBACK_RADII,
};
use crate::varkappa::{critical_varkappa, qform_varkappa, qform_varkappa_spectral, varkappa_example, VarkappaExtension};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// One registered check.
pub struct CheckDef {
    pub id: &'static str,
    /// Acceptance criterion the check belongs to.
    pub criterion: u8,
    /// The identity being measured.
    pub anchor: &'static str,
    pub tolerance: f64,
    run: fn() -> Result<f64>,
}

impl CheckDef {
    pub fn measure(&self) -> Result<f64> {
        (self.run)()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub criterion: u8,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
    pub passed: usize,
    pub failed: usize,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Selection and tolerance override for [`run_checks`].
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Replaces every tolerance.
    pub tolerance: Option<f64>,
    /// A check id, or a prefix ending before a `-` (`tinv2` selects
    /// `tinv2-*`), or a criterion number such as `c7`.
    pub only: Option<String>,
}

fn selects(filter: &str, c: &CheckDef) -> bool {
    if let Some(n) = filter.strip_prefix('c').and_then(|n| n.parse::<u8>().ok()) {
        return c.criterion == n;
    }
    c.id == filter || c.id.strip_prefix(filter).is_some_and(|rest| rest.starts_with('-'))
}

/// Runs the selected checks in registration order.
pub fn run_checks(opts: &VerifyOptions) -> Result<VerificationReport> {
    if let Some(t) = opts.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
    }
    let selected: Vec<&CheckDef> = CHECKS
        .iter()
        .filter(|c| opts.only.as_deref().is_none_or(|f| selects(f, c)))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no check matches `{}`",
            opts.only.as_deref().unwrap_or("")
        )));
    }
    let rows: Vec<CheckRow> = selected
        .into_iter()
        .map(|c| {
            let tolerance = opts.tolerance.unwrap_or(c.tolerance);
            let (residual, error) = match c.measure() {
                Ok(r) => (r, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            CheckRow {
                id: c.id.into(),
                criterion: c.criterion,
                anchor: c.anchor.into(),
                residual,
                tolerance,
                pass: residual <= tolerance,
                error,
            }
        })
        .collect();
    let passed = rows.iter().filter(|r| r.pass).count();
    Ok(VerificationReport {
        failed: rows.len() - passed,
        passed,
        rows,
    })
}

pub fn checks() -> &'static [CheckDef] {
    &CHECKS
}

pub fn find_check(id: &str) -> Option<&'static CheckDef> {
    CHECKS.iter().find(|c| c.id == id)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn probe_radii() -> Vec<f64> {
    (1..=400).map(|k| k as f64 * 0.05).collect()
}

fn max_abs_on(f: &RadialFunction, rs: &[f64]) -> f64 {
    rs.iter().map(|&r| f.eval(r).norm()).fold(0.0, f64::max)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn basis() -> Vec<RadialFunction> {
    let rates = [
        C64::new(-1.0, 0.0),
        C64::new(-0.5, 0.7),
        C64::new(-2.0, 0.0),
        C64::new(-1.3, -0.4),
        C64::new(-0.8, 1.5),
    ];
    (1..=4)
        .flat_map(|p| rates.iter().map(move |&s| RadialFunction::term(1.0, p, s)))
        .collect()
}

fn tdrel() -> Result<f64> {
    let rs = [0.1, 0.7, 1.0, 2.5, 6.0];
    let mut worst: f64 = 0.0;
    for s in [C64::new(-1.0, 0.0), C64::new(-0.5, 2.0), C64::new(0.25, -0.75), C64::new(0.0, 0.0)] {
        for p in -3..5 {
            let f = RadialFunction::term(C64::new(3.0, -1.0), p, s);
            let a = &f.apply_t() - &f.apply_dstar().apply_d();
            let b = &f.apply_d().apply_dstar() + &f.derivative().derivative();
            let c = &f.apply_t() - &f.apply_t_direct();
            worst = worst.max(max_abs_on(&a, &rs)).max(max_abs_on(&b, &rs)).max(max_abs_on(&c, &rs));
        }
    }
    Ok(worst)
}

fn t_null() -> Result<f64> {
    let rs = [0.1, 1.0, 5.0];
    Ok(max_abs_on(&RadialFunction::power(2).apply_t(), &rs).max(max_abs_on(&RadialFunction::power(-1).apply_t(), &rs)))
}

fn apc() -> Result<f64> {
    let b = basis();
    let grid = RadialGrid::default();
    let mut worst: f64 = 0.0;
    for i in 0..b.len() {
        let (u, v) = (&b[i], &b[(i + 7) % b.len()]);
        let a = inner_angle_exact(u, v)?;
        let p = inner_plain(u, &v.apply_t(), &grid)?.value;
        worst = worst.max(rel(p, a));
    }
    Ok(worst)
}

fn apc_pinned() -> Result<f64> {
    let u = RadialFunction::term(1.0, 1, -1.0);
    let grid = RadialGrid::default();
    let a = inner_angle(&u, &u, &grid)?.value;
    let p = inner_plain(&u, &u.apply_t(), &grid)?.value;
    Ok((a - 1.25).norm().max((p - 1.25).norm()))
}

fn random_rate(g: &mut ChaCha8Rng) -> C64 {
    C64::new(g.gen_range(-3.0..-0.1), g.gen_range(-2.0..2.0))
}

fn pf2() -> Result<f64> {
    let mut g = rng(2);
    let grid = RadialGrid::default();
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let n = g.gen_range(2..5);
        let mut alpha: Vec<C64> = (0..n - 1).map(|_| C64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect();
        alpha.push(-alpha.iter().sum::<C64>());
        let sigma: Vec<C64> = (0..n).map(|_| random_rate(&mut g)).collect();
        let mut f = RadialFunction::zero();
        for (a, s) in alpha.iter().zip(&sigma) {
            f += &RadialFunction::d_exp(*s).scale(*a);
        }
        let f = f.shift_power(-1);
        let exact: C64 = -alpha.iter().zip(&sigma).map(|(a, s)| a * s).sum::<C64>();
        worst = worst.max(rel(integrate_halfline(&f, &grid)?.value, exact));
    }
    Ok(worst)
}

fn pf3() -> Result<f64> {
    let mut g = rng(3);
    let grid = RadialGrid::default();
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let n = g.gen_range(1..4);
        let alpha: Vec<C64> = (0..n).map(|_| C64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect();
        let sigma: Vec<C64> = (0..n).map(|_| random_rate(&mut g)).collect();
        let mut f = RadialFunction::zero();
        for (a, s) in alpha.iter().zip(&sigma) {
            f += &RadialFunction::d_exp(*s).scale(*a);
        }
        let f = f.shift_power(2);
        let exact: C64 = -3.0 * alpha.iter().zip(&sigma).map(|(a, s)| a / (s * s)).sum::<C64>();
        worst = worst.max(rel(integrate_halfline(&f, &grid)?.value, exact));
    }
    Ok(worst)
}

fn tinv_delta() -> Result<f64> {
    let mut g = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let r: f64 = g.gen_range(0.1..5.0);
        let u = RadialFunction::term(1.0, 1, -g.gen_range(0.5..2.0));
        let tu = u.apply_t();
        let v = integrate_split(|s| kernel_tinv(r, s) * tu.eval(s), r, 1e-14).value;
        worst = worst.max((v - u.eval(r)).norm());
    }
    Ok(worst)
}

fn tinv2_composition() -> Result<f64> {
    let mut g = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let (r, s): (f64, f64) = (g.gen_range(0.1..5.0), g.gen_range(0.1..5.0));
        let k = |t: f64| C64::from(kernel_tinv(r, t) * kernel_tinv(t, s));
        let (lo, hi) = (r.min(s), r.max(s));
        let comp = integrate_adaptive(k, 0.0, lo, 1e-14).value
            + integrate_adaptive(k, lo, hi, 1e-14).value
            + integrate_to_infinity(k, hi, 1e-14).value;
        worst = worst.max((comp.re - kernel_tinv2(r, s)).abs());
    }
    Ok(worst)
}

fn kernel_pinned() -> Result<f64> {
    Ok((kernel_tinv(1.0, 2.0) - 1.0 / 6.0)
        .abs()
        .max((kernel_tinv2(1.0, 2.0) - 19.0 / 60.0).abs()))
}

const T_BOUND_KAPPAS: [f64; 3] = [-0.5, -1.0, -2.0];

fn t_bound_eigen() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in T_BOUND_KAPPAS {
        let ext = KappaExtension::Finite(k);
        let q = discrete_mode_t(ext)?.profile;
        let res = &apply_t_kappa(&q, ext)? + &q.scale(k * k);
        worst = worst.max(max_abs_on(&res, &probe_radii()));
    }
    Ok(worst)
}

fn t_bound_norm() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in T_BOUND_KAPPAS {
        let q = discrete_mode_t(KappaExtension::Finite(k))?.profile;
        worst = worst.max((inner_angle_exact(&q, &q)? - 1.0).norm());
    }
    Ok(worst)
}

fn t_bound_boundary() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in T_BOUND_KAPPAS {
        let q = discrete_mode_t(KappaExtension::Finite(k))?.profile;
        let t = q.taylor_at_zero(2)?;
        worst = worst.max((t[2] * 3.0 - t[1] * 4.0 * k).norm());
    }
    Ok(worst)
}

const MODE_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

fn t_continuous_eigen() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [-1.0, 1.0] {
        let ext = KappaExtension::Finite(k);
        for l in MODE_LAMBDAS {
            let p = continuous_mode_t(l, ext)?.profile;
            let res = &apply_t_kappa(&p, ext)? - &p.scale(l * l);
            worst = worst.max(max_abs_on(&res, &probe_radii()));
        }
    }
    Ok(worst)
}

fn modes_real() -> Result<f64> {
    let rs = probe_radii();
    let mut worst: f64 = 0.0;
    for k in [-1.0, 1.0] {
        let inv = KappaInvExtension::new(k)?;
        for l in MODE_LAMBDAS {
            worst = worst
                .max(continuous_mode_t(l, KappaExtension::Finite(k))?.profile.max_imag_on(&rs))
                .max(continuous_mode_tinv2(l, inv)?.profile.max_imag_on(&rs));
        }
        if k > 0.0 {
            worst = worst.max(discrete_mode_tinv2(inv)?.profile.max_imag_on(&rs));
        } else {
            worst = worst.max(discrete_mode_t(KappaExtension::Finite(k))?.profile.max_imag_on(&rs));
        }
    }
    Ok(worst)
}

fn t_resolvent_defect() -> Result<f64> {
    let phi = RadialFunction::term(1.0, 3, -1.0);
    let z = ResolventArgT::new(C64::from_polar(1.0, PI / 3.0))?;
    let mut worst: f64 = 0.0;
    for k in [-1.5, 1.0] {
        for s in [0.5, 1.0, 2.0] {
            let d = resolvent_t_smeared_defect(&phi, s, z, KappaExtension::Finite(k))?;
            worst = worst.max(d.norm() / phi.eval(s).norm());
        }
    }
    Ok(worst)
}

fn tinv2_resolvent_defect() -> Result<f64> {
    let phi = w0_probe();
    let mut worst: f64 = 0.0;
    for (k, arg) in [(1.0, PI / 5.0), (-0.8, PI / 3.0)] {
        let z = ResolventArgInv::new(C64::from_polar(1.0, arg))?;
        for s in [0.5, 1.0, 2.0] {
            let d = resolvent_tinv2_defect(&phi, s, z, KappaInvExtension::new(k)?)?;
            worst = worst.max(d.norm() / phi.eval(s).norm());
        }
    }
    Ok(worst)
}

fn t_residue() -> Result<f64> {
    let ext = KappaExtension::Finite(-1.2);
    let q = discrete_mode_t(ext)?.profile;
    let tq = q.apply_t();
    let pts: Vec<f64> = (0..10).map(|i| 0.2 + 0.3 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for &r in &pts {
        for &s in &pts {
            let lim = residue_limit_t(r, s, ext, 1e-3)?;
            worst = worst.max((lim - q.eval(r) * tq.eval(s)).norm());
        }
    }
    Ok(worst)
}

fn tinv2_pole() -> Result<f64> {
    Ok([0.5, 1.0, 2.0]
        .iter()
        .map(|&k| determinant(pole_tinv2(k), k).norm())
        .fold(0.0, f64::max))
}

fn sector_points() -> Vec<(C64, KappaInvExtension)> {
    let mut g = rng(9);
    (0..100)
        .map(|_| {
            let z = C64::from_polar(g.gen_range(0.1..3.0), g.gen_range(0.01..PI / 2.0 - 0.01));
            let k: f64 = g.gen_range(0.3..2.0) * if g.gen_bool(0.5) { 1.0 } else { -1.0 };
            (z, KappaInvExtension::Finite(k))
        })
        .collect()
}

fn magic_relation() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (z, ext) in sector_points() {
        let c = coefficient_set(z, ext)?;
        let (m, p, inv) = (c.beta_minus / c.w_minus, c.beta_plus / c.w_plus, c.inv_d());
        worst = worst.max(rel(m, p)).max(rel(p, inv));
    }
    Ok(worst)
}

fn coefficient_equations() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (z, ext) in sector_points() {
        let r = coefficient_set(z, ext)?.residuals(z, ext)?;
        worst = r.iter().fold(worst, |a, &b| a.max(b));
    }
    Ok(worst)
}

fn tinv2_bound_eigen() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [0.5, 1.0, 2.0] {
        let ext = KappaInvExtension::new(k)?;
        let q = discrete_mode_tinv2(ext)?;
        for r in [0.5, 1.0, 2.0] {
            let a = apply_tinv2_kappa_at(&q.profile, r, ext)?;
            worst = worst.max(rel(a, q.profile.eval(r) * q.eigenvalue));
        }
    }
    Ok(worst)
}

fn transform_grid() -> Result<RadialGrid> {
    RadialGrid::new(2048, 1e-4, 40.0)
}

fn t_round_trip() -> Result<f64> {
    let u = RadialFunction::term(1.0, 1, -1.0);
    round_trip_error(&KappaExtension::Finite(-1.5), &u, &LambdaGrid::default(), &transform_grid()?)
}

fn t_parseval() -> Result<f64> {
    let u = RadialFunction::term(1.0, 1, -1.0);
    parseval_defect(&KappaExtension::Finite(-1.5), &u, &LambdaGrid::default())
}

fn tinv2_round_trip() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [1.0, -1.0] {
        let ext = KappaInvExtension::new(k)?;
        worst = worst.max(round_trip_error(&ext, &wkappa_probe(k)?, &LambdaGrid::default(), &transform_grid()?)?);
    }
    Ok(worst)
}

fn tinv2_parseval() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [1.0, -1.0] {
        let ext = KappaInvExtension::new(k)?;
        worst = worst.max(parseval_defect(&ext, &wkappa_probe(k)?, &LambdaGrid::default())?);
    }
    Ok(worst)
}

fn orthogonality() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let ext = KappaExtension::Finite(-1.0);
    let q = discrete_mode_t(ext)?.profile;
    let inv = KappaInvExtension::new(1.0)?;
    let qh = discrete_mode_tinv2(inv)?.profile;
    for l in [0.25, 0.5, 1.0, 2.0, 5.0] {
        worst = worst
            .max(inner_angle_exact(&continuous_mode_t(l, ext)?.profile, &q)?.norm())
            .max(inner_angle_exact(&continuous_mode_tinv2(l, inv)?.profile, &qh)?.norm());
    }
    Ok(worst)
}

fn t_deficiency() -> Result<f64> {
    let mut g = rng(12);
    let grid = RadialGrid::default();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let v = &RadialFunction::term(g.gen_range(-1.0..1.0), 3, -g.gen_range(0.5..2.5))
            + &RadialFunction::term(g.gen_range(-1.0..1.0), 4, -g.gen_range(0.5..2.5));
        let rho = [0.5, 1.0, 2.0][i % 3];
        let sign = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
        worst = worst.max(deficiency_pairing_t(sign, rho, &v, &grid)?.norm());
    }
    Ok(worst)
}

fn tinv2_deficiency() -> Result<f64> {
    let mut g = rng(13);
    let grid = RadialGrid::default();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let mut rates = [0.0; 4];
        for (j, r) in rates.iter_mut().enumerate() {
            *r = g.gen_range(0.5..1.0) + j as f64 * 0.8;
        }
        let u = w0_probe_with_rates(rates);
        let rho = [0.5, 1.0, 2.0][i % 3];
        for sign in [Sign::Plus, Sign::Minus] {
            for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
                let p = deficiency_pairing_inv2(sign, rho, C64::from(a), C64::from(b), &u, &grid)?;
                worst = worst.max(p.norm());
            }
        }
    }
    Ok(worst)
}

/// Numerical rank of sampled vectors, by Gram–Schmidt with a relative cutoff.
fn sampled_rank(vs: &[RadialFunction]) -> usize {
    let rs = [0.3, 0.7, 1.1, 1.9, 2.6, 3.4];
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut x: Vec<C64> = rs.iter().map(|&r| v.eval(r)).collect();
        let n0 = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for b in &basis {
            let p: C64 = b.iter().zip(&x).map(|(bi, xi)| bi.conj() * xi).sum();
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= p * bi;
            }
        }
        let n = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 * n0 {
            basis.push(x.iter().map(|c| c / n).collect());
        }
    }
    basis.len()
}

fn deficiency_indices() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        let t = sampled_rank(&[deficiency_vector_t(sign, 1.0)]);
        let one = C64::from(1.0);
        let zero = C64::from(0.0);
        let inv = sampled_rank(&[
            deficiency_vector_inv2(sign, 1.0, one, zero),
            deficiency_vector_inv2(sign, 1.0, zero, one),
        ]);
        worst = worst.max((t as f64 - 1.0).abs()).max((inv as f64 - 2.0).abs());
    }
    Ok(worst)
}

fn d_moments() -> Result<f64> {
    let grid = RadialGrid::default();
    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        for rho in [0.7, 1.3] {
            let s = sign.value();
            let (m0, m2) = d_vector_moments(sign, rho, &grid)?;
            let e0 = C64::from_polar(2f64.sqrt() * rho, s * 5.0 * PI / 8.0);
            let e2 = C64::from_polar(6.0 / (rho * rho), s * PI / 4.0);
            worst = worst.max((m0 - e0).norm()).max((m2 - e2).norm());
        }
    }
    Ok(worst)
}

pub const PULLBACK_KAPPA: f64 = -1.5;

/// Excised-ball evaluation for `u = re^{-r}`, `κ = -3/2`, shared by the
/// pullback rows.
pub fn pullback_example() -> Result<&'static PullbackResult> {
    static CELL: OnceLock<Result<PullbackResult>> = OnceLock::new();
    CELL.get_or_init(|| {
        qform_pullback(
            &RadialFunction::term(1.0, 1, -1.0),
            0,
            KappaExtension::Finite(PULLBACK_KAPPA),
            &DEFAULT_PULLBACK_RADII,
            &SphereRule::default(),
        )
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn pullback_exact() -> Result<f64> {
    Ok((pullback_example()?.exact + 2.75).abs())
}

fn pullback_mext() -> Result<f64> {
    let p = pullback_example()?;
    Ok(((p.extrapolated_mext - p.exact) / p.exact).abs())
}

fn pullback_utu() -> Result<f64> {
    let p = pullback_example()?;
    Ok(((p.extrapolated_utu - p.exact) / p.exact).abs())
}

fn pullback_routes() -> Result<f64> {
    let p = pullback_example()?;
    Ok(((p.extrapolated_mext - p.extrapolated_utu) / p.exact).abs())
}

/// `|p - 2|` for the observed order `p` of `∫_{∂B_ρ}|f|² - (3 + 16ρκ/3)u'(0)²`
/// between `ρ = 10⁻²` and `10⁻³`.
fn pullback_surface_order() -> Result<f64> {
    let p = pullback_example()?;
    let dev = |i: usize| (p.surface[i] - (3.0 + 16.0 * p.rhos[i] * PULLBACK_KAPPA / 3.0)).abs();
    let order = (dev(1) / dev(2)).log10() / (p.rhos[1] / p.rhos[2]).log10();
    Ok((order - 2.0).abs())
}

fn vsh_orthonormality() -> Result<f64> {
    Ok(orthonormality_defect(2, &SphereRule::default()))
}

fn field_divergence() -> Result<f64> {
    let mut g = rng(14);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let mut spec = TransverseFieldSpec::new();
        for _ in 0..3 {
            let l = g.gen_range(1..=3u32);
            let m = g.gen_range(-(l as i32)..=l as i32);
            let a = g.gen_range(0.5..2.0);
            let p = g.gen_range(1..4);
            spec.insert(
                l,
                m,
                RadialFunction::term(g.gen_range(-1.0..1.0), p + 1, -a),
                RadialFunction::term(g.gen_range(-1.0..1.0), p, -a),
            )?;
        }
        for _ in 0..10 {
            let x = [0, 1, 2].map(|_| g.gen_range(-2.0..2.0));
            worst = worst.max(divergence(&spec, x)?.norm());
        }
    }
    Ok(worst)
}

fn product_spec() -> Result<TransverseFieldSpec> {
    TransverseFieldSpec::new().with(1, 0, RadialFunction::term(1.0, 1, -1.0), RadialFunction::zero())
}

fn prod_reduction() -> Result<f64> {
    let a = product_spec()?;
    let (lhs, rhs) = product_reduction_check(&a, &a, &RadialGrid::new(512, 1e-6, 40.0)?, &SphereRule::new(8, 16))?;
    Ok((lhs - rhs).abs() / rhs.abs())
}

fn prod_pinned() -> Result<f64> {
    let a = product_spec()?;
    let (_, rhs) = product_reduction_check(&a, &a, &RadialGrid::new(64, 1e-3, 10.0)?, &SphereRule::new(2, 4))?;
    Ok((rhs - 1.25).abs())
}

fn sphere_identities() -> Result<f64> {
    Ok(auxiliary_identities(0.7, 2, &SphereRule::new(12, 24)))
}

fn varkappa_spectral() -> Result<f64> {
    let u = varkappa_example();
    let ext = VarkappaExtension::new(critical_varkappa(&u)?)?;
    let q = qform_varkappa(&u, &RadialGrid::default())?;
    let s = qform_varkappa_spectral(&u, ext, &LambdaGrid::default())?;
    Ok((q - s).abs() / q.abs())
}

fn beta_unimodular() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [-2.0, -0.5, 0.7] {
        for l in [0.1, 0.9, 3.0, 40.0] {
            let b = crate::tkappa::beta_t(C64::from(l), KappaExtension::Finite(k))?;
            worst = worst.max((b.norm() - 1.0).abs());
        }
    }
    Ok(worst)
}

macro_rules! check {
    ($id:literal, $c:literal, $anchor:literal, $tol:expr, $f:ident) => {
        CheckDef {
            id: $id,
            criterion: $c,
            anchor: $anchor,
            tolerance: $tol,
            run: $f,
        }
    };
}

static CHECKS: [CheckDef; 43] = [
    check!("tdrel", 1, "T = DD*, D*D = -d²/dr²", 0.0, tdrel),
    check!("t-null", 1, "T r² = T r⁻¹ = 0", 0.0, t_null),
    check!("apc", 2, "⟨u,v⟩ = (u, Tv)", 1e-10, apc),
    check!("apc-pinned", 2, "⟨re^{-r}, re^{-r}⟩ = 5/4", 1e-12, apc_pinned),
    check!("pf2", 3, "∫Σα D e^{σr}/r = -Σασ, Σα = 0", 1e-8, pf2),
    check!("pf3", 3, "∫Σα r² D e^{σr} = -3Σα/σ²", 1e-8, pf3),
    check!("tinv-delta", 4, "∫T⁻¹(r,s)(Tu)(s)ds = u(r)", 1e-8, tinv_delta),
    check!("tinv2-composition", 4, "T⁻² = T⁻¹T⁻¹", 1e-8, tinv2_composition),
    check!("kernel-pinned", 4, "T⁻¹(1,2) = 1/6, T⁻²(1,2) = 19/60", 1e-15, kernel_pinned),
    check!("t-bound-eigen", 5, "(T_κ + κ²)q̃ = 0", 1e-10, t_bound_eigen),
    check!("t-bound-norm", 5, "⟨q̃,q̃⟩ = 1", 1e-8, t_bound_norm),
    check!("t-bound-boundary", 5, "3q̃''(0) = 4κq̃'(0)", 1e-14, t_bound_boundary),
    check!("t-continuous-eigen", 6, "(T_κ - λ²)p̃_λ = 0", 1e-10, t_continuous_eigen),
    check!("modes-real", 6, "Im p̃_λ = Im q̂ = Im p̂_λ = 0", 1e-12, modes_real),
    check!("t-resolvent-defect", 7, "∫(T_κ - z²)R(·,s;z)φ = φ(s)", 1e-6, t_resolvent_defect),
    check!("tinv2-resolvent-defect", 7, "(T_κ⁻² - z⁻⁴)Rφ = φ", 1e-5, tinv2_resolvent_defect),
    check!("t-residue", 8, "2z₀ lim (z₀ - z)R = q̃ ⊗ Tq̃", 1e-8, t_residue),
    check!("tinv2-pole", 8, "d(2^{-1/6}e^{iπ/4}κ) = 0", 1e-12, tinv2_pole),
    check!("magic-relation", 9, "β₋/W₋ = β₊/W₊ = 1/d", 4.0 * f64::EPSILON, magic_relation),
    check!("coefficient-equations", 9, "1 + α± + β± = 0 and the two κ³ equations", 1e-12, coefficient_equations),
    check!("tinv2-bound-eigen", 10, "T_κ⁻² q̂ = -2^{2/3}κ⁻⁴ q̂", 1e-6, tinv2_bound_eigen),
    check!("t-round-trip", 11, "u = ∫g p̃_λ dλ + c q̃", 1e-3, t_round_trip),
    check!("t-parseval", 11, "⟨u,u⟩ = ∫|g|² dλ + |c|²", 1e-3, t_parseval),
    check!("tinv2-round-trip", 11, "u = ∫g p̂_λ dλ + c q̂", 1e-3, tinv2_round_trip),
    check!("tinv2-parseval", 11, "⟨u,u⟩ = ∫|g|² dλ + |c|²", 1e-3, tinv2_parseval),
    check!("orthogonality", 11, "⟨q, p_λ⟩ = 0", 1e-6, orthogonality),
    check!("t-deficiency", 12, "⟨c±, (T ± iρ²)v⟩ = 0, v ∈ 𝒲₀", 1e-6, t_deficiency),
    check!("tinv2-deficiency", 12, "⟨c±, (T⁻² ± iρ⁻²)v⟩ = 0", 1e-6, tinv2_deficiency),
    check!("deficiency-indices", 12, "dim ker = 1 for T, 2 for T⁻²", 0.0, deficiency_indices),
    check!("d-moments", 12, "∫d±/r = √2e^{±5iπ/8}ρ, ∫r²d± = 6e^{±iπ/4}ρ⁻²", 1e-8, d_moments),
    check!("pullback-exact", 13, "⟨u, T_κu⟩ = -11/4", 1e-12, pullback_exact),
    check!("pullback-mext", 13, "lim ∫(∂f)² - (5/(3ρ) - 44κ/27)∫|f|²", 1e-4, pullback_mext),
    check!("pullback-utu", 13, "lim ∫(∂f)² - (5/ρ + 4κ)u'(0)²", 1e-4, pullback_utu),
    check!("pullback-routes", 13, "both excised-ball routes agree", 1e-4, pullback_routes),
    check!("pullback-surface-order", 13, "∫_{∂B_ρ}|f|² = (3 + 16ρκ/3)u'(0)² + O(ρ²)", 0.05, pullback_surface_order),
    check!("vsh-orthonormality", 14, "∫Y·Y' dΩ = δ", 1e-10, vsh_orthonormality),
    check!("field-divergence", 14, "∂_k f^k = 0", 1e-8, field_divergence),
    check!("prod-reduction", 14, "∫f̄·f d³x = (φ,φ) + ⟨u,u⟩", 1e-6, prod_reduction),
    check!("prod-pinned", 14, "⟨re^{-r}, re^{-r}⟩ = 5/4", 1e-14, prod_pinned),
    check!("sphere-identities", 14, "x·Ψ = 0, ∫Ψ^j x_k∂_j∂_kY' = -l̃ρ⁻¹δ", 1e-8, sphere_identities),
    check!("beta-unimodular", 0, "|β(λ)| = 1", 1e-15, beta_unimodular),
    check!("varkappa-spectral", 0, "Q_ϰ⁻¹ = ∫λ⁻⁴|g|² + ϰ⁻⁴|c|²", 1e-3, varkappa_spectral),
    check!("d-nonvanishing", 0, "|d(λ)|² = (κ³+λ³)² + λ⁶", 1e-12, d_nonvanishing),
];

fn d_nonvanishing() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [-2.0, -0.6, 0.6, 2.0] {
        for i in 1..=100 {
            let l = i as f64;
            let d = determinant(C64::from(l), k);
            let expect = (k * k * k + l * l * l).powi(2) + l.powi(6);
            worst = worst.max((d.norm_sqr() - expect).abs() / expect);
        }
    }
    Ok(worst)
}
