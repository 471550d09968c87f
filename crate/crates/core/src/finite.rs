//! Exact finite-n expectations for the d×d model with density proportional
//! to e^{−n Tr(V(M) − AM)}, A = diag(a_1, …, a_𝐦, 0, …, 0).
//!
//! Everything reduces to small determinants of Gram matrices over a region
//! E, with the integrals done by composite Gauss–Legendre on a window where
//! the weights are not negligible.

mod basis;
mod expect;
mod region;

pub use basis::{build_basis, build_basis_stieltjes, gamma_j, gamma_j_on, OrthoBasis};
pub use expect::{
    expectation_null, expectation_rank_m_direct, expectation_rank_m_identity, expectation_rank_one,
    gap_prob, spiked_kernel_data, GramRestriction, SpikedKernelData, MAX_COND_B, MIN_SPIKE_GAP,
};
pub use region::Region;
