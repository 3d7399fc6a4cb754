//! Proximal point iteration for strongly quasiconvex objectives on Hadamard
//! model spaces (Euclidean, hyperbolic, metric trees, and products), together
//! with randomized geometry checkers and convergence-rate certificates.

pub mod error;
pub mod objective;
pub mod parse;
pub mod ppa;
pub mod prox;
pub mod space;

pub use error::{Error, Result};
pub use objective::{catalog, Ball, CatalogEntry, GammaProvenance, Objective, ObjectiveKind, SqcReport};
pub use parse::{parse_objective, parse_point, parse_space, point_literal};
pub use ppa::{
    certify, descent_witness, fejer_slacks, rate_phi, rate_phi_values, run_ppa, PpaTrace,
    RateCertificate, Schedule, StopReason, StopRule,
};
pub use prox::{
    fixed_point_gap, prox, prox_inequality_residual, prox_oracle, prox_search_radius, ProxParams,
    ProxResult,
};
pub use space::{
    check_cat0, check_hyperbolic_axioms, AxiomReport, BrokenGeodesic, CheckLine, Geometry, Point,
    RandomSampler, SpaceHandle, TreeEdge, TreeSpace,
};
