//! Numerical geometry of moduli of polarized Calabi-Yau manifolds.
//!
//! Everything in this crate is computed from variation-of-Hodge-structure
//! data alone: a polarization form `Q` on `H ≅ ℂ^d` and a holomorphic period
//! section `Ω` known through its truncated Taylor expansion (a jet of order
//! at most 4).  From these the crate builds
//!
//! * the polarized-Hodge-structure algebra (pairings, Weil operator,
//!   Hodge-Riemann validation, block projections)        — [`hodge`],
//! * model families producing jets: nilpotent orbits and one-parameter
//!   Picard-Fuchs equations                              — [`models`],
//! * the Weil-Petersson metric, its covariant-derivative chain and
//!   curvature tensor                                    — [`wp`],
//! * the partial Hodge metric `ω_μ = μ·ω_WP + Ric(ω_WP)`, its curvature,
//!   and fourfold Yukawa couplings                       — [`partial`],
//! * the Hodge metric through Hom-norms of the tangent action
//!   on the Hodge decomposition                          — [`hodge_metric`],
//! * one-dimensional boundary asymptotics (Yukawa chain, weight
//!   polynomial, completeness, truncation bounds)        — [`dim1`],
//! * independent finite-difference oracles and the consolidated
//!   identity suite                                      — [`verify`].
//!
//! All types are immutable after construction and all operations are pure,
//! so values can be shared freely across threads.

pub mod dim1;
pub mod error;
pub mod geometry;
pub mod hodge;
pub mod hodge_metric;
pub mod jet;
pub mod linalg;
pub mod models;
pub mod partial;
pub mod report;
pub mod series;
pub mod tol;
pub mod verify;
pub mod wp;

pub use dim1::BoundaryModel1D;
pub use error::{Error, Result};
pub use hodge::{HodgeDecompositionAt, PolarizationForm, WeilOperator};
pub use jet::JetSection;
pub use models::{Model, NilpotentOrbitModel, PicardFuchsModel};
pub use report::{BoundReport, CheckLine, Report, SuiteReport, ValidationReport};
pub use tol::Tolerances;
pub use wp::{CovariantFrame, CurvatureField, MetricField};
