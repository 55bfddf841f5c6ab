//! Exact normal-ordered arithmetic in the quantum plane, truncated Fock ×
//! charge matrices and the constructive oracle for U and the coaction.

pub mod fock;
pub mod nopoly;
pub mod oracle;

pub use fock::{
    build_fock_ops, check_closing_identities, check_relations, compare_interior, FockBasis, FockOps, FockScalar,
    OpMatrix, RelationCheck, INTERIOR_MARGIN,
};
pub use nopoly::{
    covariance_check, expand_d_poly, nopoly_adjoint, nopoly_normal_product, q_exp_zstar, r_action,
    zeta_poly, zeta_shifted_product, CovarianceCheck, DNormalization, DPoly, Generator, NOPoly,
};
pub use oracle::{build_u_constructive, oracle_degree_cutoff, u_match, ShiftOracle, SVec, UMatch};
