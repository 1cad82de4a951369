//! Eigensets and the spectral transform shared by both operator families.
//!
//! For a family with continuous modes `p_λ` and discrete modes `q_n`, the
//! forward transform is `g(λ) = ⟨p_λ, u⟩`, `c_n = ⟨q_n, u⟩`, and
//! `u = ∫ g(λ) p_λ dλ + Σ c_n q_n`.

use crate::error::Result;
use crate::quadrature::{inner_angle_exact, RadialGrid};
use crate::radial::{RadialFunction, C64};
use crate::special::gauss_legendre;

/// Normalized bound state.
#[derive(Clone, Debug)]
pub struct DiscreteMode {
    pub eigenvalue: f64,
    pub profile: RadialFunction,
}

/// Continuous-spectrum mode at spectral parameter `λ`.
#[derive(Clone, Debug)]
pub struct ContinuousMode {
    pub lambda: f64,
    /// Phase of the mode; for the inverse family this is `-arg d(λ)/2`.
    pub zeta: f64,
    pub profile: RadialFunction,
}

/// Quadrature nodes in `λ`: Gauss–Legendre panels on `(0, Λ]`.
#[derive(Clone, Debug)]
pub struct LambdaGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub const DEFAULT_LAMBDA_MAX: f64 = 40.0;
pub const DEFAULT_LAMBDA_NODES: usize = 2000;
const PANEL_ORDER: usize = 20;

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::new(0.0, DEFAULT_LAMBDA_MAX, DEFAULT_LAMBDA_NODES)
    }
}

impl LambdaGrid {
    /// About `count` nodes on `(lo, hi]`, in panels of 20 Gauss points.
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        let panels = count.div_ceil(PANEL_ORDER).max(1);
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let h = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let c = lo + h * (p as f64 + 0.5);
            for i in 0..PANEL_ORDER {
                nodes.push(c + 0.5 * h * x[i]);
                weights.push(0.5 * h * w[i]);
            }
        }
        LambdaGrid { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// An operator family with a complete set of generalized eigenfunctions in
/// the scalar product `⟨·,·⟩`.
pub trait SpectralFamily {
    fn continuous_mode(&self, lambda: f64) -> Result<ContinuousMode>;
    fn discrete_modes(&self) -> Vec<DiscreteMode>;
    /// Rejects inputs outside the operator domain.
    fn check_domain(&self, u: &RadialFunction) -> Result<()>;
}

/// Transform coefficients on a λ-grid.
#[derive(Clone, Debug)]
pub struct Transform {
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
    pub density: Vec<C64>,
    pub bound: Vec<C64>,
}

impl Transform {
    /// `∫|g|² dλ + Σ|c|²`.
    pub fn norm_sq(&self) -> f64 {
        let cont: f64 = self
            .density
            .iter()
            .zip(&self.weights)
            .map(|(g, w)| w * g.norm_sqr())
            .sum();
        cont + self.bound.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// `g(λ) = ⟨p_λ, u⟩` at each node and `c_n = ⟨q_n, u⟩`.
pub fn forward<F: SpectralFamily + ?Sized>(family: &F, u: &RadialFunction, grid: &LambdaGrid) -> Result<Transform> {
    family.check_domain(u)?;
    forward_unchecked(family, u, &grid.nodes, &grid.weights)
}

pub(crate) fn forward_unchecked<F: SpectralFamily + ?Sized>(
    family: &F,
    u: &RadialFunction,
    lambdas: &[f64],
    weights: &[f64],
) -> Result<Transform> {
    let density = lambdas
        .iter()
        .map(|&l| inner_angle_exact(&family.continuous_mode(l)?.profile, u))
        .collect::<Result<Vec<_>>>()?;
    let bound = family
        .discrete_modes()
        .iter()
        .map(|q| inner_angle_exact(&q.profile, u))
        .collect::<Result<Vec<_>>>()?;
    Ok(Transform {
        lambdas: lambdas.to_vec(),
        weights: weights.to_vec(),
        density,
        bound,
    })
}

/// `∫ g(λ) p_λ(r) dλ + Σ c_n q_n(r)` at the sample points.
pub fn reconstruct<F: SpectralFamily + ?Sized>(family: &F, t: &Transform, rs: &[f64]) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); rs.len()];
    for ((&l, &w), g) in t.lambdas.iter().zip(&t.weights).zip(&t.density) {
        let p = family.continuous_mode(l)?.profile;
        for (o, &r) in out.iter_mut().zip(rs) {
            *o += g * w * p.eval(r);
        }
    }
    for (q, c) in family.discrete_modes().iter().zip(&t.bound) {
        for (o, &r) in out.iter_mut().zip(rs) {
            *o += c * q.profile.eval(r);
        }
    }
    Ok(out)
}

/// Relative `L²` distance between `u` and its reconstruction on the grid.
pub fn round_trip_error<F: SpectralFamily + ?Sized>(
    family: &F,
    u: &RadialFunction,
    lambdas: &LambdaGrid,
    grid: &RadialGrid,
) -> Result<f64> {
    let t = forward(family, u, lambdas)?;
    let rec = reconstruct(family, &t, grid.nodes())?;
    let diff: Vec<C64> = rec
        .iter()
        .zip(grid.nodes())
        .map(|(v, &r)| C64::from((v - u.eval(r)).norm_sqr()))
        .collect();
    let base: Vec<C64> = grid.nodes().iter().map(|&r| C64::from(u.eval(r).norm_sqr())).collect();
    let d = grid.integrate_samples(&diff).value.re;
    let b = grid.integrate_samples(&base).value.re;
    Ok((d / b).sqrt())
}

/// Relative Parseval defect `|⟨u,u⟩ - ∫|g|² - Σ|c|²| / ⟨u,u⟩`.
pub fn parseval_defect<F: SpectralFamily + ?Sized>(family: &F, u: &RadialFunction, lambdas: &LambdaGrid) -> Result<f64> {
    let t = forward(family, u, lambdas)?;
    let uu = inner_angle_exact(u, u)?.re;
    Ok((uu - t.norm_sq()).abs() / uu)
}

/// Superposition `∫ g(λ) p_λ dλ` of continuous modes on `[lo, hi]`, sampled
/// with its derivative, for smeared orthogonality checks.
pub fn packet_samples<F: SpectralFamily + ?Sized, G: Fn(f64) -> f64>(
    family: &F,
    g: G,
    lambdas: &LambdaGrid,
    rs: &[f64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    let mut vals = vec![C64::new(0.0, 0.0); rs.len()];
    let mut ders = vals.clone();
    for (&l, &w) in lambdas.nodes.iter().zip(&lambdas.weights) {
        let a = g(l) * w;
        if a == 0.0 {
            continue;
        }
        let p = family.continuous_mode(l)?.profile;
        let dp = p.derivative();
        for i in 0..rs.len() {
            vals[i] += p.eval(rs[i]) * a;
            ders[i] += dp.eval(rs[i]) * a;
        }
    }
    Ok((vals, ders))
}
