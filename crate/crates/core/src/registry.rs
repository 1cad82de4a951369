//! Named test functions for batch runs.
//!
//! | name | function |
//! |------|----------|
//! | `q~` | bound state of `T_κ` (`κ < 0`) |
//! | `q^` | bound state of `T_κ⁻²` (`κ > 0`) |
//! | `re^-r` | `r e^{-r}` |
//! | `w0probe` | four-exponential member of the `T⁻²` base domain |
//! | `wkappa` | two-exponential member of the `T_κ⁻²` domain for the given `κ` |
//! | `wkappa:σ` | `r² e^{-σr}` |
//! | `varkappa-example` | `(1 - e^{-r})²/r + 0.3 r e^{-r}` |

use crate::error::{Error, Result};
use crate::inverse::{discrete_mode_tinv2, w0_probe, KappaInvExtension};
use crate::radial::RadialFunction;
use crate::tkappa::{discrete_mode_t, KappaExtension};
use crate::varkappa::varkappa_example;

pub const NAMES: [&str; 7] = ["q~", "q^", "re^-r", "w0probe", "wkappa", "wkappa:σ", "varkappa-example"];

/// `r²e^{-r} + c r²e^{-2r}` with `c` chosen so that `κ³∫r²u = 6∫u/r`.
pub fn wkappa_probe(kappa: f64) -> Result<RadialFunction> {
    let k3 = kappa * kappa * kappa;
    let den = 0.75 * k3 - 1.5;
    if den == 0.0 || kappa == 0.0 {
        return Err(Error::InvalidArgument(format!("no two-exponential probe for κ = {kappa}")));
    }
    let c = (6.0 - 24.0 * k3) / den;
    Ok(&RadialFunction::term(1.0, 2, -1.0) + &RadialFunction::term(c, 2, -2.0))
}

fn need_kappa(name: &str, kappa: Option<f64>) -> Result<f64> {
    kappa.ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs --kappa")))
}

/// Looks up a named function; `kappa` parametrizes the family-dependent
/// entries.
pub fn lookup(name: &str, kappa: Option<f64>) -> Result<RadialFunction> {
    match name {
        "q~" => Ok(discrete_mode_t(KappaExtension::new(need_kappa(name, kappa)?)?)?.profile),
        "q^" => Ok(discrete_mode_tinv2(KappaInvExtension::new(need_kappa(name, kappa)?)?)?.profile),
        "re^-r" => Ok(RadialFunction::term(1.0, 1, -1.0)),
        "w0probe" => Ok(w0_probe()),
        "wkappa" => wkappa_probe(need_kappa(name, kappa)?),
        "varkappa-example" => Ok(varkappa_example()),
        _ => match name.strip_prefix("wkappa:") {
            Some(s) => {
                let sigma: f64 = s
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad rate in `{name}`")))?;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidArgument("rate must be positive".into()));
                }
                Ok(RadialFunction::term(1.0, 2, -sigma))
            }
            None => Err(Error::InvalidArgument(format!(
                "unknown function `{name}`; known: {}",
                NAMES.join(", ")
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inverse::in_domain_wkappa_inv;
    use crate::tkappa::in_domain_wkappa;

    #[test]
    fn entries_resolve() {
        assert!(lookup("q~", Some(-1.0)).is_ok());
        assert_eq!(lookup("q~", Some(1.0)).unwrap_err(), Error::NoBoundState);
        assert!(lookup("q~", None).is_err());
        assert!(lookup("q^", Some(1.0)).is_ok());
        let u = lookup("re^-r", None).unwrap();
        assert!(in_domain_wkappa(&u, KappaExtension::Finite(-1.5)).member);
        assert_eq!(lookup("wkappa:2", None).unwrap(), RadialFunction::term(1.0, 2, -2.0));
        assert!(lookup("wkappa:-1", None).is_err());
        assert!(lookup("nope", None).is_err());
    }

    #[test]
    fn wkappa_probe_is_in_domain() {
        for k in [-1.0, 0.5, 1.0, 2.0] {
            let u = wkappa_probe(k).unwrap();
            assert!(in_domain_wkappa_inv(&u, KappaInvExtension::new(k).unwrap()).is_ok(), "κ={k}");
        }
    }
}
