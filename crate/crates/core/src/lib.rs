//! Geometric multigrid for the weighted (Caffarelli–Silvestre) extension of
//! the spectral fractional Laplacian on the truncated cylinder
//! `Ω × (0, Y)`, discretized with Q1 elements on tensor-product meshes that
//! are uniform in Ω and graded in the extended variable `y`.
//!
//! The pieces, bottom up:
//! - [`mesh`]: grading maps, graded axes, tensor meshes, nested hierarchies.
//! - [`assembly`]: the `y^α`-weighted stiffness operator in Kronecker and CSR
//!   form, the trace load, energy inner products.
//! - [`transfer`]: grading-aware prolongation and its transpose.
//! - [`smoother`]: point and vertical-line Gauss–Seidel.
//! - [`vcycle`]: the symmetric V-cycle and the outer iteration.
//! - [`analysis`]: energy errors, rates, spectral-equivalence measurements.
//! - [`experiment`]: the table driver used by the `fracmg` binary.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod experiment;
pub mod mesh;
pub mod smoother;
pub mod sparse;
pub mod special;
pub mod transfer;
pub mod tridiag;
pub mod vcycle;

pub use analysis::{
    convergence_rate, energy_error, exact_energy_sq, spectral_equivalence_report, ExactProblem,
};
pub use assembly::{
    assemble_axis_matrices, assemble_load, assemble_mass, assemble_operator, energy_inner,
    energy_norm, weighted_moment, Axis1DMatrices, LoadVector, WeightedOperator,
};
pub use error::{Error, FailureReason, Result};
pub use mesh::{
    build_axis, build_hierarchy, estimate_a2_constant, modified_map_params, FracParams, GradedAxis,
    GradingKind, GradingMap, TensorMesh,
};
pub use smoother::{
    build_line_plan, line_gs_sweep, point_gs_sweep, tridiag_solve, Direction, LineOrdering,
    LinePlan,
};
pub use sparse::CsrMatrix;
pub use transfer::{build_transfer, TransferPair};
pub use tridiag::Tridiag;
pub use vcycle::{
    estimate_contraction, mg_solve, vcycle_apply, MgHierarchy, SmootherKind, SolveOptions,
    SolveReport,
};
