//! Robinson structure in step graphons.
//!
//! The crate measures how far a symmetric step kernel is from being Robinson
//! (values non-increasing away from the diagonal) through the parameter Λ,
//! computes cut norms with witnesses, builds the α-Robinson approximation
//! `R_w^α`, and runs a recovery pipeline with explicit error bounds.
//!
//! Everything operates on [`StepGraphon`]: an `n × n` symmetric array read as a
//! function on `[0,1]²` that is constant on the cells of the uniform grid.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod cutnorm;
pub mod error;
pub mod gamma;
pub mod graphon;
pub mod io;
mod knapsack;
pub mod lambda;
pub mod recovery;
pub mod regions;
pub mod render;
pub mod robinson;
pub mod synth;

pub use cutnorm::{cut_norm, cut_norm_exact, cut_norm_local_search, CutNormBudget, CutNormMode, CutNormResult};
pub use error::{Error, Result};
pub use gamma::{gamma_estimate, GammaEstimate};
pub use graphon::{CellSet, CutoffResult, IntegralTable, RobinsonCheck, SearchMode, StepGraphon};
pub use lambda::{lambda_exact, lambda_heuristic, LambdaCertificate};
pub use recovery::{
    proposition_constants, recover, recover_bounded, theoretical_bound, CaseTaken, RecoveryConfig,
    RecoveryReport,
};
pub use regions::{compute_regions, regions_csv, verify_partition, RegionMap};
pub use robinson::{
    closed_form_robinson_ae, monotone_envelope, robinson_approx, ul_sup, RobinsonApprox,
};
