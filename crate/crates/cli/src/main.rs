//! `radext`: batch evaluation of kernels, resolvents, eigensets and
//! transforms, and the verification suite.
//!
//! Exit codes: 0 success, 1 failed check, 2 bad configuration, 3 input outside
//! the operator domain.

mod table;

use clap::{Parser, Subcommand, ValueEnum};
use radext_core::inverse::{
    discrete_mode_tinv2, kernel_tinv, kernel_tinv2, kernel_tinv2_kappa, resolvent_tinv2,
    KappaInvExtension, ResolventArgInv,
};
use radext_core::quadrature::RadialGrid;
use radext_core::registry;
use radext_core::spectral::{forward, reconstruct, LambdaGrid, SpectralFamily};
use radext_core::tkappa::{discrete_mode_t, resolvent_t, KappaExtension, ResolventArgT};
use radext_core::transverse::{qform_pullback, SphereRule, DEFAULT_PULLBACK_RADII};
use radext_core::verify::{run_checks, VerifyOptions};
use radext_core::{Error, C64};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use table::{num_value, Cell, Table, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "radext", version, about = "Self-adjoint extensions of the l = 1 radial Laplacian")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate T⁻¹, T⁻² or T_κ⁻² kernels.
    #[command(allow_negative_numbers = true)]
    Kernel {
        #[arg(long, value_enum)]
        which: KernelKind,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Resolvent kernel R(r, s; z) of T_κ or T_κ⁻².
    #[command(allow_negative_numbers = true)]
    Resolvent {
        #[arg(long, value_enum, default_value = "t")]
        op: Op,
        #[arg(long)]
        kappa: f64,
        #[arg(long = "z-re")]
        z_re: f64,
        #[arg(long = "z-im")]
        z_im: f64,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Continuous modes on a λ range and the bound state, sampled at probe radii.
    #[command(allow_negative_numbers = true)]
    Spectrum {
        #[arg(long, value_enum, default_value = "t")]
        op: Op,
        /// κ, or ϰ for `tinv2vk`.
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        lambdas: LambdaArgs,
        /// Comma-separated probe radii.
        #[arg(long = "r-probe", value_delimiter = ',', default_value = "0.5,1,2,4")]
        r_probe: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Spectral coefficients of a named function and the round-trip error.
    #[command(allow_negative_numbers = true)]
    Transform {
        #[arg(long, value_enum, default_value = "t")]
        op: Op,
        #[arg(long)]
        kappa: f64,
        /// One of q~, q^, re^-r, w0probe, wkappa, wkappa:σ, varkappa-example.
        #[arg(long)]
        input: String,
        #[command(flatten)]
        lambdas: LambdaArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Excised-ball evaluation of ⟨u, T_κu⟩ for an l = 1 transverse field.
    #[command(allow_negative_numbers = true)]
    Pullback {
        #[arg(long, default_value_t = -1.5)]
        kappa: f64,
        #[arg(long, default_value = "re^-r")]
        input: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the verification suite.
    #[command(allow_negative_numbers = true)]
    Verify {
        /// Override every tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Check id, id prefix, or criterion such as `c9`.
        #[arg(long)]
        only: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KernelKind {
    Tinv,
    Tinv2,
    Tinv2k,
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum Op {
    T,
    Tinv2,
    Tinv2vk,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct LambdaArgs {
    #[arg(long = "lambda-min", default_value_t = 0.0)]
    lambda_min: f64,
    #[arg(long = "lambda-max", default_value_t = 40.0)]
    lambda_max: f64,
    #[arg(long = "lambda-count", default_value_t = 2000)]
    lambda_count: usize,
}

#[derive(clap::Args, Debug)]
struct GridArgs {
    #[arg(long = "grid-n", default_value_t = 2048)]
    grid_n: usize,
    #[arg(long = "r-max", default_value_t = 40.0)]
    r_max: f64,
}

enum Failure {
    Config(String),
    Domain(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DomainViolation(_) | Error::NoBoundState | Error::SingularAtOrigin | Error::PoleAtOrigin => {
                Failure::Domain(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(String, bool), Failure>;

const PROBE: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

fn render(t: &Table, out: &OutputArgs) -> String {
    match out.format {
        Format::Csv => t.to_csv(),
        Format::Json => format!("{:#}\n", t.to_json()),
    }
}

fn pairs(r: Option<f64>, s: Option<f64>) -> Vec<(f64, f64)> {
    let rs = r.map_or(PROBE.to_vec(), |x| vec![x]);
    let ss = s.map_or(PROBE.to_vec(), |x| vec![x]);
    rs.iter().flat_map(|&r| ss.iter().map(move |&s| (r, s))).collect()
}

fn check_radius(name: &str, v: Option<f64>) -> Result<(), Failure> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Failure::Config(format!("--{name} must be positive"))),
        _ => Ok(()),
    }
}

fn lambda_grid(a: &LambdaArgs) -> Result<LambdaGrid, Failure> {
    if !(a.lambda_min >= 0.0 && a.lambda_max > a.lambda_min && a.lambda_max.is_finite()) || a.lambda_count == 0 {
        return Err(Failure::Config("need 0 ≤ lambda-min < lambda-max and lambda-count ≥ 1".into()));
    }
    Ok(LambdaGrid::new(a.lambda_min, a.lambda_max, a.lambda_count))
}

fn radial_grid(g: &GridArgs) -> Result<RadialGrid, Failure> {
    if g.grid_n < 16 {
        return Err(Failure::Config("--grid-n must be at least 16".into()));
    }
    Ok(RadialGrid::new(g.grid_n, 1e-4, g.r_max)?)
}

fn cmd_kernel(which: KernelKind, kappa: Option<f64>, r: Option<f64>, s: Option<f64>, out: &OutputArgs) -> Outcome {
    check_radius("r", r)?;
    check_radius("s", s)?;
    let ext = match which {
        KernelKind::Tinv2k => {
            let k = kappa.ok_or_else(|| Failure::Config("--which tinv2k needs --kappa".into()))?;
            Some(KappaInvExtension::new(k)?)
        }
        _ => None,
    };
    let mut t = Table::new("kernel", &["r", "s", "value"]);
    for (r, s) in pairs(r, s) {
        let v = match (which, ext) {
            (KernelKind::Tinv, _) => kernel_tinv(r, s),
            (KernelKind::Tinv2, _) => kernel_tinv2(r, s),
            (KernelKind::Tinv2k, Some(e)) => kernel_tinv2_kappa(r, s, e)?,
            (KernelKind::Tinv2k, None) => unreachable!(),
        };
        t.push(vec![r.into(), s.into(), v.into()]);
    }
    Ok((render(&t, out), true))
}

fn cmd_resolvent(op: Op, kappa: f64, z: C64, r: Option<f64>, s: Option<f64>, out: &OutputArgs) -> Outcome {
    check_radius("r", r)?;
    check_radius("s", s)?;
    let mut t = Table::new("resolvent", &["r", "s", "re", "im"]);
    match op {
        Op::T => {
            let ext = KappaExtension::new(kappa)?;
            let z = ResolventArgT::new(z)?;
            for (r, s) in pairs(r, s) {
                let v = resolvent_t(r, s, z, ext)?;
                t.push(vec![r.into(), s.into(), v.re.into(), v.im.into()]);
            }
        }
        Op::Tinv2 => {
            let ext = KappaInvExtension::new(kappa)?;
            let z = ResolventArgInv::new(z)?;
            t.note("delta_coefficient_re", (-z.z().powu(4)).re);
            t.note("delta_coefficient_im", (-z.z().powu(4)).im);
            for (r, s) in pairs(r, s) {
                let v = resolvent_tinv2(r, s, z, ext)?;
                t.push(vec![r.into(), s.into(), v.re.into(), v.im.into()]);
            }
        }
        Op::Tinv2vk => return Err(Failure::Config("resolvent supports --op t and tinv2".into())),
    }
    Ok((render(&t, out), true))
}

fn cmd_spectrum(op: Op, kappa: f64, lambdas: &LambdaArgs, r_probe: &[f64], out: &OutputArgs) -> Outcome {
    let grid = lambda_grid(lambdas)?;
    if r_probe.is_empty() || r_probe.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Failure::Config("--r-probe radii must be positive".into()));
    }
    let mut rs = r_probe.to_vec();
    rs.sort_by(f64::total_cmp);
    let family: Box<dyn SpectralFamily> = match op {
        Op::T | Op::Tinv2vk => Box::new(KappaExtension::new(kappa)?),
        Op::Tinv2 => Box::new(KappaInvExtension::new(kappa)?),
    };
    let eigen = |l: f64| match op {
        Op::T => l * l,
        Op::Tinv2 | Op::Tinv2vk => l.powi(-4),
    };
    let mut t = Table::new("spectrum", &["kind", "lambda", "eigenvalue", "r", "re", "im"]);
    for &l in &grid.nodes {
        let p = family.continuous_mode(l)?.profile;
        for &r in &rs {
            let v = p.eval(r);
            t.push(vec!["continuous".into(), l.into(), eigen(l).into(), r.into(), v.re.into(), v.im.into()]);
        }
    }
    let bound = match op {
        Op::T => discrete_mode_t(KappaExtension::new(kappa)?).ok(),
        Op::Tinv2 => discrete_mode_tinv2(KappaInvExtension::new(kappa)?).ok(),
        Op::Tinv2vk => discrete_mode_t(KappaExtension::new(kappa)?).ok().map(|mut q| {
            q.eigenvalue = q.eigenvalue.powi(-2);
            q
        }),
    };
    t.note("bound_states", bound.is_some() as u32);
    if let Some(q) = bound {
        t.note("bound_eigenvalue", num_value(q.eigenvalue));
        for &r in &rs {
            let v = q.profile.eval(r);
            t.push(vec!["bound".into(), Cell::Empty, q.eigenvalue.into(), r.into(), v.re.into(), v.im.into()]);
        }
    }
    Ok((render(&t, out), true))
}

fn cmd_transform(op: Op, kappa: f64, input: &str, lambdas: &LambdaArgs, grid: &GridArgs, out: &OutputArgs) -> Outcome {
    let lg = lambda_grid(lambdas)?;
    let rg = radial_grid(grid)?;
    let u = registry::lookup(input, Some(kappa))?;
    let family: Box<dyn SpectralFamily> = match op {
        Op::T => Box::new(KappaExtension::new(kappa)?),
        Op::Tinv2 => Box::new(KappaInvExtension::new(kappa)?),
        Op::Tinv2vk => return Err(Failure::Config("transform supports --op t and tinv2".into())),
    };
    let tr = forward(family.as_ref(), &u, &lg)?;
    let rec = reconstruct(family.as_ref(), &tr, rg.nodes())?;
    let mut diff = Vec::with_capacity(rec.len());
    let mut base = Vec::with_capacity(rec.len());
    for (v, &r) in rec.iter().zip(rg.nodes()) {
        let ur = u.eval(r);
        diff.push(C64::from((v - ur).norm_sqr()));
        base.push(C64::from(ur.norm_sqr()));
    }
    let err = (rg.integrate_samples(&diff).value.re / rg.integrate_samples(&base).value.re).sqrt();
    let mut t = Table::new("transform", &["kind", "lambda", "re", "im"]);
    for (&l, g) in tr.lambdas.iter().zip(&tr.density) {
        t.push(vec!["density".into(), l.into(), g.re.into(), g.im.into()]);
    }
    for c in &tr.bound {
        t.push(vec!["bound".into(), Cell::Empty, c.re.into(), c.im.into()]);
    }
    let max_g = tr.density.iter().map(|g| g.norm()).fold(0.0, f64::max);
    t.note("input", input);
    t.note("max_abs_density", num_value(max_g));
    t.note("round_trip_error", num_value(err));
    Ok((render(&t, out), true))
}

fn cmd_pullback(kappa: f64, input: &str, out: &OutputArgs) -> Outcome {
    if !kappa.is_finite() {
        return Err(Failure::Config("--kappa must be finite".into()));
    }
    let u = registry::lookup(input, Some(kappa))?;
    let res = qform_pullback(
        &u,
        0,
        KappaExtension::Finite(kappa),
        &DEFAULT_PULLBACK_RADII,
        &SphereRule::default(),
    )?;
    let mut t = Table::new("pullback", &["rho", "bracket_mext", "bracket_utu", "surface"]);
    let mut idx: Vec<usize> = (0..res.rhos.len()).collect();
    idx.sort_by(|&a, &b| res.rhos[a].total_cmp(&res.rhos[b]));
    for i in idx {
        t.push(vec![
            res.rhos[i].into(),
            res.bracket_mext[i].into(),
            res.bracket_utu[i].into(),
            res.surface[i].into(),
        ]);
    }
    t.note("extrapolated_mext", num_value(res.extrapolated_mext));
    t.note("extrapolated_utu", num_value(res.extrapolated_utu));
    t.note("exact", num_value(res.exact));
    Ok((render(&t, out), true))
}

fn cmd_verify(tol: Option<f64>, only: Option<String>, out: &OutputArgs) -> Outcome {
    let report = run_checks(&VerifyOptions { tolerance: tol, only })?;
    let text = match out.format {
        Format::Json => {
            let mut v = serde_json::to_value(&report).map_err(|e| Failure::Io(e.to_string()))?;
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["command"] = json!("verify");
            format!("{v:#}\n")
        }
        Format::Csv => {
            let mut t = Table::new("verify", &["id", "criterion", "anchor", "residual", "tolerance", "pass"]);
            for r in &report.rows {
                t.push(vec![
                    r.id.as_str().into(),
                    Cell::Text(r.criterion.to_string()),
                    r.anchor.as_str().into(),
                    r.residual.into(),
                    r.tolerance.into(),
                    r.pass.into(),
                ]);
            }
            t.note("passed", report.passed as u64);
            t.note("failed", report.failed as u64);
            t.to_csv()
        }
    };
    Ok((text, report.all_passed()))
}

fn run(cli: Cli) -> (Outcome, Option<PathBuf>) {
    match cli.cmd {
        Command::Kernel { which, kappa, r, s, out } => (cmd_kernel(which, kappa, r, s, &out), out.out),
        Command::Resolvent {
            op,
            kappa,
            z_re,
            z_im,
            r,
            s,
            out,
        } => (cmd_resolvent(op, kappa, C64::new(z_re, z_im), r, s, &out), out.out),
        Command::Spectrum {
            op,
            kappa,
            lambdas,
            r_probe,
            out,
        } => (cmd_spectrum(op, kappa, &lambdas, &r_probe, &out), out.out),
        Command::Transform {
            op,
            kappa,
            input,
            lambdas,
            grid,
            out,
        } => (cmd_transform(op, kappa, &input, &lambdas, &grid, &out), out.out),
        Command::Pullback { kappa, input, out } => (cmd_pullback(kappa, &input, &out), out.out),
        Command::Verify { tol, only, out } => (cmd_verify(tol, only, &out), out.out),
    }
}

fn main() -> ExitCode {
    let (outcome, path) = run(Cli::parse());
    let outcome = outcome.and_then(|(text, ok)| {
        match path {
            Some(p) => std::fs::write(&p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
            None => print!("{text}"),
        }
        Ok(ok)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) | Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
