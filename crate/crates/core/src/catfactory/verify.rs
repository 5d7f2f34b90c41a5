//! Checks of the catalytic and marginal conversion conditions on explicit
//! protocols and states.

use serde::Serialize;

use crate::locc::LoccProtocol;
use crate::measures::{decoupling_rhs, DecouplingCheck};
use crate::qstate::{trace_norm_dist, QState};
use crate::{Error, Result};

use super::{copy_indices, expect_profile};

const SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatalysisCertificate {
    /// `‖μ^S − σ‖₁`.
    pub epsilon_achieved: f64,
    /// `‖μ^C − τ‖₁`.
    pub catalyst_drift: f64,
    /// `‖μ^{SC} − μ^S ⊗ μ^C‖₁`.
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionCertificate {
    pub n: usize,
    pub m: usize,
    /// `‖Γ^{(j)} − σ‖₁` for `j = 1..m`.
    pub per_marginal_errors: Vec<f64>,
    /// `m / n`.
    pub rate_slack: f64,
}

impl ReductionCertificate {
    pub fn max_error(&self) -> f64 {
        self.per_marginal_errors.iter().copied().fold(0.0, f64::max)
    }

    /// `1 − m/n`.
    pub fn delta(&self) -> f64 {
        1.0 - self.rate_slack
    }

    /// Smallest `(m'/n)·ε_{m'} + 2(n − m')/n` over `m' ≤ m`, where `ε_{m'}` is
    /// the largest of the first `m'` marginal errors. The catalyst built from
    /// the same protocol has output error at most this value.
    pub fn catalysis_bound(&self) -> f64 {
        let n = self.n as f64;
        let mut best = 2.0;
        let mut eps = 0.0f64;
        for (i, e) in self.per_marginal_errors.iter().enumerate() {
            eps = eps.max(*e);
            let m = (i + 1) as f64;
            best = f64::min(best, m / n * eps + 2.0 * (n - m) / n);
        }
        best
    }
}

/// `Γ^{(k)}` for each of the `n` copies of `gamma`, `per` factors per copy.
pub fn gamma_marginals(gamma: &QState, per: usize, n: usize) -> Result<Vec<QState>> {
    (0..n).map(|k| gamma.partial_trace(&copy_indices(k, per))).collect()
}

/// Runs `lambda` on `ρ ⊗ τ`, with `S` the leading `σ`-shaped factors of the
/// output and `C` the rest, and returns `μ^{SC}`.
fn catalytic_output(lambda: &LoccProtocol, tau: &QState, rho: &QState, sigma: &QState) -> Result<QState> {
    let input = rho.tensor(tau)?;
    expect_profile(lambda.input(), input.layout(), "protocol input")?;
    let want_out = sigma.layout().concat(tau.layout())?;
    expect_profile(lambda.output(), &want_out, "protocol output")?;
    lambda.run(&input)
}

fn certificate(mu: &QState, tau: &QState, sigma: &QState) -> Result<(CatalysisCertificate, QState, QState)> {
    let k = sigma.layout().len();
    let total = mu.layout().len();
    let mu_s = mu.partial_trace(&(0..k).collect::<Vec<_>>())?;
    let mu_c = mu.partial_trace(&(k..total).collect::<Vec<_>>())?;
    let cert = CatalysisCertificate {
        epsilon_achieved: trace_norm_dist(&mu_s, sigma)?,
        catalyst_drift: trace_norm_dist(&mu_c, tau)?,
        correlation: trace_norm_dist(mu, &mu_s.tensor(&mu_c)?)?,
    };
    Ok((cert, mu_s, mu_c))
}

/// Distances that decide whether `lambda` converts `rho` into `sigma` with
/// catalyst `tau`.
pub fn verify_catalysis(
    lambda: &LoccProtocol,
    tau: &QState,
    rho: &QState,
    sigma: &QState,
) -> Result<CatalysisCertificate> {
    let mu = catalytic_output(lambda, tau, rho, sigma)?;
    Ok(certificate(&mu, tau, sigma)?.0)
}

/// Marginal errors of `Λ(ρ^{⊗n})` against `σ`, for a protocol producing `m`
/// copies of `σ`'s layout.
pub fn verify_marginal_reduction(
    lambda: &LoccProtocol,
    rho: &QState,
    sigma: &QState,
    n: usize,
    m: usize,
) -> Result<ReductionCertificate> {
    if m == 0 || n == 0 {
        return Err(Error::OutOfRange(format!("need m ≥ 1 and n ≥ 1, got n = {n}, m = {m}")));
    }
    if m > n {
        return Err(Error::OutOfRange(format!("m = {m} exceeds n = {n}")));
    }
    expect_profile(lambda.input(), &rho.layout().repeat(n)?, "protocol input")?;
    expect_profile(lambda.output(), &sigma.layout().repeat(m)?, "protocol output")?;
    let gamma = lambda.run(&rho.power(n)?)?;
    let per_marginal_errors = gamma_marginals(&gamma, sigma.layout().len(), m)?
        .iter()
        .map(|g| trace_norm_dist(g, sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReductionCertificate {
        n,
        m,
        per_marginal_errors,
        rate_slack: m as f64 / n as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoupledCertificate {
    pub certificate: CatalysisCertificate,
    /// Decoupling comparison of `μ^{SC}` against `φ ⊗ μ^C`.
    pub decoupling: DecouplingCheck,
    /// `ε + 6√(ε/2)` at `ε = epsilon_achieved`.
    pub bound: f64,
    /// Both the correlation and the decoupling distance are within `bound`.
    pub pass: bool,
}

/// [`verify_catalysis`] for a pure target, additionally checking that the
/// catalyst ends up nearly uncorrelated with the system.
pub fn decoupled_catalysis_check(
    lambda: &LoccProtocol,
    tau: &QState,
    rho: &QState,
    phi: &QState,
) -> Result<DecoupledCertificate> {
    if !phi.is_pure() {
        return Err(Error::NotPure(1.0 - phi.max_eigenvalue()));
    }
    let mu = catalytic_output(lambda, tau, rho, phi)?;
    let (cert, _, mu_c) = certificate(&mu, tau, phi)?;
    let eps = cert.epsilon_achieved;
    let bound = decoupling_rhs(eps);
    let lhs = trace_norm_dist(&mu, &phi.tensor(&mu_c)?)?;
    let decoupling = DecouplingCheck {
        eps,
        lhs,
        rhs: bound,
        pass: lhs <= bound + SLACK,
    };
    Ok(DecoupledCertificate {
        certificate: cert,
        decoupling,
        bound,
        pass: decoupling.pass && cert.correlation <= bound + SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catfactory::build_catalyst;
    use crate::qstate::{random_state, Ensemble, Party, SystemLayout};

    #[test]
    fn identity_catalysis_is_exact() {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 1);
        let tau = random_state(&SystemLayout::single(Party::ALICE, 3).unwrap(), Ensemble::GinibreMixed, 2);
        let id = LoccProtocol::identity(rho.layout().concat(tau.layout()).unwrap());
        let c = verify_catalysis(&id, &tau, &rho, &rho).unwrap();
        assert!(c.epsilon_achieved < 1e-12 && c.catalyst_drift < 1e-12 && c.correlation < 1e-12);
    }

    #[test]
    fn wrong_catalyst_shows_drift() {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 4);
        let two = rho.layout().repeat(2).unwrap();
        let swap = crate::locc::permute_factors(&two, &[2, 3, 0, 1]).unwrap();
        let asm = build_catalyst(&swap, &rho, 2).unwrap();
        let good = verify_catalysis(&asm.embedding, &asm.tau, &rho, &rho).unwrap();
        assert!(good.catalyst_drift < 1e-9);
        let other = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 9);
        let reg = QState::basis(SystemLayout::single(Party::ALICE, 2).unwrap(), 0).unwrap();
        let bad_tau = other.tensor(&reg).unwrap();
        let bad = verify_catalysis(&asm.embedding, &bad_tau, &rho, &rho).unwrap();
        assert!(bad.catalyst_drift > 1e-3);
    }

    #[test]
    fn marginal_reduction_identity_and_degenerate() {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 2);
        let id = LoccProtocol::identity(rho.layout().repeat(3).unwrap());
        let c = verify_marginal_reduction(&id, &rho, &rho, 3, 3).unwrap();
        assert!(c.max_error() < 1e-12 && (c.rate_slack - 1.0).abs() < 1e-15);
        assert!(c.catalysis_bound() < 1e-12);
        assert!(verify_marginal_reduction(&id, &rho, &rho, 3, 0).is_err());
    }

    #[test]
    fn noisy_pure_target_decouples() {
        let phi = QState::singlet();
        let m = QState::maximally_mixed(SystemLayout::two_qubits());
        let rho = QState::mixture(&[(0.99, &phi), (0.01, &m)]).unwrap();
        let tau = QState::basis(SystemLayout::single(Party::BOB, 2).unwrap(), 1).unwrap();
        let id = LoccProtocol::identity(rho.layout().concat(tau.layout()).unwrap());
        let r = decoupled_catalysis_check(&id, &tau, &rho, &phi).unwrap();
        assert!(r.pass && r.certificate.correlation < 1e-12);
        assert!((r.certificate.epsilon_achieved - 0.015).abs() < 1e-12);
        let mixed = QState::maximally_mixed(SystemLayout::two_qubits());
        assert!(decoupled_catalysis_check(&id, &tau, &mixed, &mixed).is_err());
    }
}
