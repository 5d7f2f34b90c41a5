//! Correlated catalysts built from multi-copy protocols, and the reverse
//! direction: marginal reductions obtained by reusing an approximate
//! catalyst copy after copy.

mod assembly;
mod reuse;
mod verify;

pub use assembly::{build_catalyst, CatalystAssembly};
pub use reuse::{iterate_reuse, reduction_pipeline, ReuseOptions, ReuseOutcome};
pub use verify::{
    decoupled_catalysis_check, gamma_marginals, verify_catalysis, verify_marginal_reduction,
    CatalysisCertificate, DecoupledCertificate, ReductionCertificate,
};

use crate::qstate::SystemLayout;
use crate::{Error, Result};

/// Factor indices of copy `copy` when `per` factors make one copy.
pub(crate) fn copy_indices(copy: usize, per: usize) -> Vec<usize> {
    (copy * per..(copy + 1) * per).collect()
}

pub(crate) fn expect_profile(got: &SystemLayout, want: &SystemLayout, what: &str) -> Result<()> {
    if got.same_profile(want) {
        Ok(())
    } else {
        Err(Error::LayoutMismatch(format!("{what}: expected {want}, got {got}")))
    }
}
