//! Upper bound on conversion rates from squashed entanglement.

use serde::Serialize;

use crate::qstate::{entanglement_entropy, Bipartition, QState};
use crate::{Error, Result};

use super::{hashing_bounds, squashed_upper, SquashedSearch};

/// How the denominator of the ratio was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyKind {
    /// `σ` is pure and its squashed entanglement is `S(σ^A)`.
    Exact,
    /// Hashing bound `max(S(A), S(B)) − S(AB) > 0`, which lower-bounds the
    /// distillable entanglement and hence the squashed entanglement.
    Hashing,
    /// Searched upper bound on `E_sq(σ)`. The ratio is then not a bound.
    Heuristic,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateBoundReport {
    pub esq_rho_upper: f64,
    pub esq_sigma_lower_proxy: f64,
    pub ratio_upper: f64,
    pub proxy: ProxyKind,
    pub sigma_pure: bool,
    /// Whether `ratio_upper` is a proven upper bound on the rate.
    pub certified: bool,
    pub notes: Vec<String>,
}

/// `E_sq(ρ) / E_sq(σ)` with an upper bound in the numerator and the best
/// available lower value in the denominator.
pub fn rate_bound_report(rho: &QState, sigma: &QState, search: &SquashedSearch) -> Result<RateBoundReport> {
    let mut notes = Vec::new();
    let esq_rho_upper = if rho.is_pure() {
        notes.push("rho is pure; numerator is its entanglement entropy".to_string());
        entanglement_entropy(rho, &Bipartition::alice(rho.layout()))?
    } else {
        let b = squashed_upper(rho, search)?;
        notes.push(format!(
            "numerator from extension search: {} evaluations, extension dimension {}",
            b.evaluations, b.extension_dim
        ));
        b.value
    };

    let sigma_pure = sigma.is_pure();
    let (proxy, value) = if sigma_pure {
        (ProxyKind::Exact, entanglement_entropy(sigma, &Bipartition::alice(sigma.layout()))?)
    } else {
        let cut_a = Bipartition::alice(sigma.layout());
        let b_side = cut_a.b_side(sigma.layout());
        let cut_b = Bipartition::new(sigma.layout(), &b_side)?;
        let h = hashing_bounds(sigma, &cut_a)?
            .lower
            .max(hashing_bounds(sigma, &cut_b)?.lower);
        if h > 1e-12 {
            notes.push("sigma is mixed; denominator is its hashing bound".to_string());
            (ProxyKind::Hashing, h)
        } else {
            notes.push(
                "sigma is mixed without a positive hashing bound; denominator is a searched \
                 upper bound and the ratio is a heuristic, not a bound"
                    .to_string(),
            );
            (ProxyKind::Heuristic, squashed_upper(sigma, search)?.value)
        }
    };
    if value <= 1e-12 {
        return Err(Error::Divergent(format!(
            "lower proxy for the target's squashed entanglement is {value:e}"
        )));
    }
    Ok(RateBoundReport {
        esq_rho_upper,
        esq_sigma_lower_proxy: value,
        ratio_upper: esq_rho_upper / value,
        proxy,
        sigma_pure,
        certified: proxy != ProxyKind::Heuristic,
        notes,
    })
}
