//! Acceptance suite: fourteen criteria, each a group of measured residuals
//! with pinned tolerances. Prints one line per criterion and fails if any
//! criterion fails.

use radext_core::verify::find_check;
use std::time::{Duration, Instant};

struct Criterion {
    number: u8,
    title: &'static str,
    /// `(check id, tolerance)`.
    checks: &'static [(&'static str, f64)],
    /// Wall-clock budget, if the criterion has one.
    budget: Option<Duration>,
}

const EPS: f64 = f64::EPSILON;

const CRITERIA: [Criterion; 14] = [
    Criterion {
        number: 1,
        title: "algebraic identities T = DD*, D*D = -d²/dr², T r² = T r⁻¹ = 0",
        checks: &[("tdrel", 0.0), ("t-null", 0.0)],
        budget: Some(Duration::from_secs(1)),
    },
    Criterion {
        number: 2,
        title: "⟨u,v⟩ = (u,Tv) on 20 basis pairs, ⟨re^{-r},re^{-r}⟩ = 5/4",
        checks: &[("apc", 1e-10), ("apc-pinned", 1e-12)],
        budget: None,
    },
    Criterion {
        number: 3,
        title: "closed-form half-line integrals of D e^{σr} against quadrature",
        checks: &[("pf2", 1e-8), ("pf3", 1e-8)],
        budget: None,
    },
    Criterion {
        number: 4,
        title: "T⁻¹ delta identity, T⁻² composition, T⁻¹(1,2) = 1/6, T⁻²(1,2) = 19/60",
        checks: &[("tinv-delta", 1e-8), ("tinv2-composition", 1e-8), ("kernel-pinned", 1e-15)],
        budget: None,
    },
    Criterion {
        number: 5,
        title: "T_κ bound state: eigen-residual, norm, boundary condition",
        checks: &[("t-bound-eigen", 1e-10), ("t-bound-norm", 1e-8), ("t-bound-boundary", 1e-14)],
        budget: None,
    },
    Criterion {
        number: 6,
        title: "continuous modes of T_κ and reality of all modes",
        checks: &[("t-continuous-eigen", 1e-10), ("modes-real", 1e-12)],
        budget: None,
    },
    Criterion {
        number: 7,
        title: "smeared resolvent equations for T_κ and T_κ⁻²",
        checks: &[("t-resolvent-defect", 1e-6), ("tinv2-resolvent-defect", 1e-5)],
        budget: None,
    },
    Criterion {
        number: 8,
        title: "residue at -iκ factorizes, d(z₀) = 0 at 2^{-1/6}e^{iπ/4}κ",
        checks: &[("t-residue", 1e-8), ("tinv2-pole", 1e-12)],
        budget: None,
    },
    Criterion {
        number: 9,
        title: "β₋/W₋ = β₊/W₊ = 1/d and the coefficient equations",
        checks: &[("magic-relation", 4.0 * EPS), ("coefficient-equations", 1e-12)],
        budget: None,
    },
    Criterion {
        number: 10,
        title: "T_κ⁻² q̂ = -2^{2/3}κ⁻⁴ q̂ by quadrature",
        checks: &[("tinv2-bound-eigen", 1e-6)],
        budget: None,
    },
    Criterion {
        number: 11,
        title: "transform round trips, Parseval, orthogonality of bound and continuous modes",
        checks: &[
            ("t-round-trip", 1e-3),
            ("t-parseval", 1e-3),
            ("tinv2-round-trip", 1e-3),
            ("tinv2-parseval", 1e-3),
            ("orthogonality", 1e-6),
        ],
        budget: None,
    },
    Criterion {
        number: 12,
        title: "deficiency pairings vanish, indices (1,1) and (2,2)",
        checks: &[
            ("t-deficiency", 1e-6),
            ("tinv2-deficiency", 1e-6),
            ("deficiency-indices", 0.0),
            ("d-moments", 1e-8),
        ],
        budget: None,
    },
    Criterion {
        number: 13,
        title: "excised-ball form of re^{-r}, κ = -3/2, equals -11/4",
        checks: &[
            ("pullback-exact", 1e-12),
            ("pullback-mext", 1e-4),
            ("pullback-utu", 1e-4),
            ("pullback-routes", 1e-4),
            ("pullback-surface-order", 0.05),
        ],
        budget: None,
    },
    Criterion {
        number: 14,
        title: "vector harmonics orthonormal, fields divergence-free, 3D product reduces to ⟨u,u⟩",
        checks: &[
            ("vsh-orthonormality", 1e-10),
            ("field-divergence", 1e-8),
            ("prod-reduction", 1e-6),
            ("prod-pinned", 1e-14),
            ("sphere-identities", 1e-8),
        ],
        budget: None,
    },
];

fn run(c: &Criterion) -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for &(id, tol) in c.checks {
        let check = find_check(id).unwrap_or_else(|| panic!("unknown check {id}"));
        match check.measure() {
            Ok(r) => {
                let pass = r <= tol;
                ok &= pass;
                details.push(format!("{id}={r:.2e}{}{tol:.0e}", if pass { "≤" } else { ">" }));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{id}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if let Some(b) = c.budget {
        if elapsed > b {
            ok = false;
            details.push(format!("took {elapsed:?} > {b:?}"));
        }
    }
    (ok, format!("{} [{:.1?}]", details.join(", "), elapsed))
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let (ok, detail) = run(c);
        println!("{} criterion {:2}: {} :: {}", if ok { "PASS" } else { "FAIL" }, c.number, c.title, detail);
        if !ok {
            failed.push(c.number);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn every_criterion_has_checks() {
    for (i, c) in CRITERIA.iter().enumerate() {
        assert_eq!(c.number as usize, i + 1);
        for &(id, tol) in c.checks {
            let check = find_check(id).unwrap();
            assert_eq!(check.criterion, c.number, "{id}");
            assert!(tol >= 0.0);
        }
    }
}
