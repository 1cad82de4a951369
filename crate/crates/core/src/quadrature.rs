//! Quadrature on the half-line: a geometric Gauss–Kronrod grid with an
//! origin panel and closed-form tails, plus adaptive integrators for
//! integrands that are only available pointwise.

use crate::error::{Error, Result};
use crate::integrate::check_integrable;
use crate::radial::{RadialFunction, C64};
use crate::special::expint_en;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Abscissae, Kronrod weights and embedded Gauss weights of the 15-point
/// rule on `[-1, 1]`, in ascending order.
fn gk15_rule() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..7 {
        x[i] = -XGK[i];
        x[14 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[14 - i] = WG[i / 2];
        }
    }
    wk[7] = WGK[7];
    wg[7] = WG[3];
    (x, wk, wg)
}

/// Value of an integral together with a nonnegative error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedProductValue {
    pub value: C64,
    pub abs_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridScheme {
    GeometricGaussKronrod15,
}

/// Nodes and weights on `(0, r_max]`. The first panel covers `[0, r_min]`;
/// the rest are geometric in `r` and capped at a maximal width.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    gauss_weights: Vec<f64>,
    r_min: f64,
    r_max: f64,
    scheme: GridScheme,
}

pub const DEFAULT_GRID_N: usize = 4096;
pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 60.0;
const MAX_PANEL_WIDTH: f64 = 0.5;

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid::new(DEFAULT_GRID_N, DEFAULT_R_MIN, DEFAULT_R_MAX).expect("default grid")
    }
}

impl RadialGrid {
    /// About `n` nodes over `[0, r_max]`; panel widths above 0.5 are split,
    /// which can raise the count.
    pub fn new(n: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if n < 16 || !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidArgument(format!(
                "grid needs n >= 16 and 0 < r_min < r_max (n = {n}, r_min = {r_min}, r_max = {r_max})"
            )));
        }
        let panels = (n / 15).max(2) - 1;
        let mut edges = vec![0.0, r_min];
        edges.extend(geometric_edges(r_min, r_max, panels).into_iter().skip(1));
        Ok(Self::from_edges(&edges, r_min, r_max))
    }

    /// Geometric panels on `[a, b]` without an origin panel.
    pub fn interval(a: f64, b: f64, panels: usize) -> Result<Self> {
        if !(a > 0.0 && b > a) || panels == 0 {
            return Err(Error::InvalidArgument("interval grid needs 0 < a < b".into()));
        }
        Ok(Self::from_edges(&geometric_edges(a, b, panels), a, b))
    }

    fn from_edges(edges: &[f64], r_min: f64, r_max: f64) -> Self {
        let (x, wk, wg) = gk15_rule();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut gauss_weights = Vec::new();
        for e in edges.windows(2) {
            let (a, b) = (e[0], e[1]);
            let pieces = ((b - a) / MAX_PANEL_WIDTH).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            for k in 0..pieces {
                let lo = a + h * k as f64;
                let hi = if k + 1 == pieces { b } else { lo + h };
                let (c, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                for i in 0..15 {
                    nodes.push(c + half * x[i]);
                    weights.push(half * wk[i]);
                    gauss_weights.push(half * wg[i]);
                }
            }
        }
        RadialGrid {
            nodes,
            weights,
            gauss_weights,
            r_min,
            r_max,
            scheme: GridScheme::GeometricGaussKronrod15,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    /// Sums sampled values panel by panel in ascending order.
    pub fn integrate_samples(&self, values: &[C64]) -> WeightedProductValue {
        assert_eq!(values.len(), self.nodes.len());
        let mut value = C64::new(0.0, 0.0);
        let mut abs_error = 0.0;
        for p in 0..self.nodes.len() / 15 {
            let idx = p * 15..p * 15 + 15;
            let mut k = C64::new(0.0, 0.0);
            let mut g = C64::new(0.0, 0.0);
            let mut abs = 0.0;
            for i in idx.clone() {
                k += values[i] * self.weights[i];
                g += values[i] * self.gauss_weights[i];
                abs += (values[i] * self.weights[i]).norm();
            }
            let mean = k / self.weights[idx.clone()].iter().sum::<f64>();
            let asc: f64 = idx.map(|i| (values[i] - mean).norm() * self.weights[i]).sum();
            value += k;
            abs_error += panel_error((k - g).norm(), abs, asc);
        }
        WeightedProductValue { value, abs_error }
    }

    pub fn integrate_fn<F: Fn(f64) -> C64>(&self, f: F) -> WeightedProductValue {
        let v: Vec<C64> = self.nodes.iter().map(|&r| f(r)).collect();
        self.integrate_samples(&v)
    }
}

fn geometric_edges(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let q = (b / a).powf(1.0 / panels as f64);
    let mut e: Vec<f64> = (0..=panels).map(|k| a * q.powi(k as i32)).collect();
    e[0] = a;
    e[panels] = b;
    e
}

/// QUADPACK-style error estimate for one Gauss–Kronrod panel.
fn panel_error(diff: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = diff;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    err.max(floor)
}

/// `∫_R^∞ f(r) dr` in closed form, term by term.
pub fn tail_integral(f: &RadialFunction, r0: f64) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for t in f.terms() {
        let p = t.power;
        if t.rate == C64::new(0.0, 0.0) {
            if p >= -1 {
                return Err(Error::NonIntegrable("power tail decays too slowly".into()));
            }
            total -= t.coeff * r0.powi(p + 1) / (p + 1) as f64;
        } else if t.rate.re > 0.0 || (t.rate.re == 0.0 && p >= 0) {
            return Err(Error::NonIntegrable("tail does not decay".into()));
        } else if p >= 0 {
            let a = t.rate;
            let mut s = C64::new(0.0, 0.0);
            let mut falling = 1.0;
            let mut a_pow = a;
            for k in 0..=p as u32 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * falling * r0.powi(p - k as i32) / a_pow;
                falling *= (p as u32 - k) as f64;
                a_pow *= a;
            }
            total -= t.coeff * s * (a * r0).exp();
        } else {
            total += t.coeff * r0.powi(p + 1) * expint_en((-p) as u32, -t.rate * r0);
        }
    }
    Ok(total)
}

/// `∫_0^∞ f(r) dr` on the grid with a closed-form tail beyond `r_max`.
pub fn integrate_halfline(f: &RadialFunction, grid: &RadialGrid) -> Result<WeightedProductValue> {
    check_integrable(f)?;
    let mut v = grid.integrate_fn(|r| f.eval(r));
    let tail = tail_integral(f, grid.r_max())?;
    v.value += tail;
    v.abs_error += 1e-14 * tail.norm();
    Ok(v)
}

/// `(u, v) = ∫ ū v dr`.
pub fn inner_plain(u: &RadialFunction, v: &RadialFunction, grid: &RadialGrid) -> Result<WeightedProductValue> {
    integrate_halfline(&(&u.conj() * v), grid)
}

/// Fails with `SingularAtOrigin` unless `u(r) → 0` as `r → 0`.
pub fn require_vanishing_at_origin(u: &RadialFunction) -> Result<()> {
    let l = u.laurent(0);
    if (l.min_power..=0).all(|k| l.vanishes(k)) {
        Ok(())
    } else {
        Err(Error::SingularAtOrigin)
    }
}

/// Integrand of `⟨u, v⟩ = ∫ (ū'v' + 2ūv/r²) dr`.
pub fn angle_integrand(u: &RadialFunction, v: &RadialFunction) -> RadialFunction {
    let ub = u.conj();
    &(&ub.derivative() * &v.derivative()) + &(&ub * v).shift_power(-2).scale(2.0)
}

/// `⟨u, v⟩ = ∫ (ū'v' + 2ūv/r²) dr` by grid quadrature.
pub fn inner_angle(u: &RadialFunction, v: &RadialFunction, grid: &RadialGrid) -> Result<WeightedProductValue> {
    require_vanishing_at_origin(u)?;
    require_vanishing_at_origin(v)?;
    integrate_halfline(&angle_integrand(u, v), grid)
}

/// `⟨u, v⟩` in closed form.
pub fn inner_angle_exact(u: &RadialFunction, v: &RadialFunction) -> Result<C64> {
    require_vanishing_at_origin(u)?;
    require_vanishing_at_origin(v)?;
    crate::integrate::integrate_exact(&angle_integrand(u, v))
}

/// `(u, v)` in closed form.
pub fn inner_plain_exact(u: &RadialFunction, v: &RadialFunction) -> Result<C64> {
    crate::integrate::integrate_exact(&(&u.conj() * v))
}

/// Adaptive Gauss–Kronrod integration on a finite interval.
pub fn integrate_adaptive<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> WeightedProductValue {
    let (x, wk, wg) = gk15_rule();
    let panel = |lo: f64, hi: f64| -> (C64, f64) {
        let (c, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let vals: Vec<C64> = x.iter().map(|&t| f(c + half * t)).collect();
        let mut k = C64::new(0.0, 0.0);
        let mut g = C64::new(0.0, 0.0);
        let mut abs = 0.0;
        for i in 0..15 {
            k += vals[i] * wk[i];
            g += vals[i] * wg[i];
            abs += vals[i].norm() * wk[i];
        }
        let mean = k * 0.5;
        let asc: f64 = (0..15).map(|i| (vals[i] - mean).norm() * wk[i]).sum();
        (k * half, panel_error(((k - g) * half).norm(), abs * half.abs(), asc * half.abs()))
    };
    let mut parts = vec![(a, b, panel(a, b))];
    for _ in 0..5000 {
        let total_err: f64 = parts.iter().map(|p| p.2 .1).sum();
        let total: C64 = parts.iter().map(|p| p.2 .0).sum();
        if total_err <= tol.max(1e-15 * total.norm()) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, panel(lo, hi)));
            break;
        }
        parts.push((lo, mid, panel(lo, mid)));
        parts.push((mid, hi, panel(mid, hi)));
    }
    parts.sort_by(|p, q| p.0.total_cmp(&q.0));
    WeightedProductValue {
        value: parts.iter().map(|p| p.2 .0).sum(),
        abs_error: parts.iter().map(|p| p.2 .1).sum(),
    }
}

/// Adaptive integration over `[a, ∞)` through `r = a + (1 - t)/t`.
pub fn integrate_to_infinity<F: Fn(f64) -> C64>(f: F, a: f64, tol: f64) -> WeightedProductValue {
    integrate_adaptive(
        |t| {
            if t <= 0.0 {
                return C64::new(0.0, 0.0);
            }
            let r = a + (1.0 - t) / t;
            let v = f(r);
            if v == C64::new(0.0, 0.0) {
                v
            } else {
                v / t / t
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_0^∞` of a pointwise integrand with a kink at `r = s`: finite part on
/// `[0, s]` and mapped tail on `[s, ∞)`.
pub fn integrate_split<F: Fn(f64) -> C64>(f: F, s: f64, tol: f64) -> WeightedProductValue {
    let head = integrate_adaptive(&f, 0.0, s, 0.5 * tol);
    let tail = integrate_to_infinity(&f, s, 0.5 * tol);
    WeightedProductValue {
        value: head.value + tail.value,
        abs_error: head.abs_error + tail.abs_error,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_exact;
    use crate::radial::RadialFunction as F;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn grid_layout() {
        let g = RadialGrid::default();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > 0.0 && *g.nodes().last().unwrap() < 60.0);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 60.0).abs() < 1e-10);
        assert!(RadialGrid::new(8, 1e-6, 60.0).is_err());
    }

    #[test]
    fn plain_products() {
        let g = RadialGrid::default();
        let u = F::term(1.0, 1, -1.0);
        let v = inner_plain(&u, &u, &g).unwrap();
        assert!((v.value.re - 0.25).abs() < 1e-13);
        let w = inner_plain(&F::exp(-1.0), &F::exp(-2.0), &g).unwrap();
        assert!((w.value.re - 1.0 / 3.0).abs() < 1e-13);
        assert!(matches!(inner_plain(&F::exp(1.0), &F::exp(-0.5), &g), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn angle_products() {
        let g = RadialGrid::default();
        let u = F::term(1.0, 1, -1.0);
        let a = inner_angle(&u, &u, &g).unwrap();
        assert!((a.value.re - 1.25).abs() < 1e-12);
        let b = inner_plain(&u, &u.apply_t(), &g).unwrap();
        assert!((b.value.re - 1.25).abs() < 1e-12);
        assert!((a.value - b.value).norm() <= a.abs_error + b.abs_error + 1e-15);
        assert_eq!(inner_angle(&F::power(-1), &F::power(-1), &g), Err(Error::SingularAtOrigin));
    }

    #[test]
    fn halfline_closed_forms() {
        let g = RadialGrid::default();
        let f = (&F::d_exp(-1.0) - &F::d_exp(-2.0)).shift_power(-1);
        assert!((integrate_halfline(&f, &g).unwrap().value + 1.0).norm() < 1e-12);
        let h = F::d_exp(-1.0).shift_power(2);
        assert!((integrate_halfline(&h, &g).unwrap().value + 3.0).norm() < 1e-12);
        assert!(integrate_halfline(&F::d_exp(-1.0).shift_power(-1), &g).is_err());
    }

    #[test]
    fn tails_match_exact_integrals() {
        let fs = [
            F::term(1.0, 3, c(-0.2, 0.4)),
            F::term(1.0, -2, c(-0.1, 1.0)),
            F::term(1.0, -3, 0.0),
        ];
        for f in fs {
            let r0 = 5.0;
            let t = tail_integral(&f, r0).unwrap();
            let q = integrate_to_infinity(|r| f.eval(r), r0, 1e-13);
            assert!((t - q.value).norm() < 1e-9, "{f:?}: {t} vs {}", q.value);
        }
        let osc = (&F::exp(c(0.0, 2.0)) - &F::exp(-1.0)).shift_power(-1);
        let head = integrate_adaptive(|r| osc.eval(r), 0.0, 5.0, 1e-14);
        let t = tail_integral(&osc, 5.0).unwrap();
        let exact = integrate_exact(&osc).unwrap();
        assert!((head.value + t - exact).norm() < 1e-12);
    }

    #[test]
    fn adaptive_integrators() {
        let v = integrate_adaptive(|x| c(x.sin(), 0.0), 0.0, std::f64::consts::PI, 1e-14);
        assert!((v.value.re - 2.0).abs() < 1e-13);
        let w = integrate_to_infinity(|x| c((-x).exp(), 0.0), 0.0, 1e-14);
        assert!((w.value.re - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn error_estimate_bounds_true_error(
            re in -3.0f64..-0.1, im in -2.0f64..2.0, p in 0i32..4,
            re2 in -3.0f64..-0.1, q in 0i32..3,
        ) {
            let g = RadialGrid::new(1024, 1e-6, 60.0).unwrap();
            let f = &F::term(1.0, p, c(re, im)) + &F::term(0.5, q, c(re2, 0.0));
            let exact = integrate_exact(&f).unwrap();
            let v = integrate_halfline(&f, &g).unwrap();
            prop_assert!((v.value - exact).norm() <= v.abs_error.max(1e-14 * exact.norm()));
        }
    }
}
