//! Boundary Hamiltonians, factorization certificates and martingale norms.

pub mod certificate;
pub mod hamiltonian;
pub mod martingale;

pub use certificate::{
    build_sigma, certify, comparing_norms_check, composition_residuals, epsilon_qf1, epsilon_qf2, gibbs_certificate,
    gibbs_factors, layout_states, lemma_main_check, match_traces, mps_convergence, product_certificate, ptilde,
    CertificateKind, Factors, MpsConvergencePoint,
    FactorizationCertificate, LemmaMainCheck, Mode,
};
pub use hamiltonian::{
    boundary_hamiltonian, homogeneity_delta, intervals, local_decomposition, locality_profile, BoundaryHamiltonian,
    Decomposition, HomogeneityPair, HomogeneityReport, LocalityProfile, Topology,
};
pub use martingale::{
    decay_fit, martingale_norm, martingale_norm_auto, pulling_through_check, strictly_decreasing, verify_main_theorem,
    DecayFit, DecayModel, MainTheoremReport, MartingaleReport, Method,
};
