//! Ricci curvature of solvable metric Lie algebras.
//!
//! This crate computes the Ricci operator of a metric Lie algebra from its
//! structure constants, decides whether a given solvable Lie algebra admits
//! an inner product of strictly negative Ricci curvature (for algebras whose
//! nilradical is abelian, Heisenberg or standard filiform), and constructs an
//! explicit certified metric when one exists.
//!
//! The main entry points are:
//!
//! * [`algebra::LieAlgebra`] — structure constants, brackets, Killing form,
//!   derived/lower central series, center, nilradical, solvable extensions;
//! * [`ricci`] — the Ricci operator, its nilpotent specialization and the
//!   adapted block assembly, plus definiteness tests;
//! * [`triangulate`] — real simultaneous block-triangularization of a solvable
//!   family of operators and the associated weight forms;
//! * [`classify`] — recognition of abelian / Heisenberg / standard filiform
//!   nilradicals with adapted bases;
//! * [`decide`] — the eigenvalue-criterion checkers backed by a small strict
//!   feasibility LP;
//! * [`degenerate`] — the GL(n) action on brackets, one-parameter
//!   degenerations and the pullback metric search;
//! * [`construct`] — certified construction of metrics of negative Ricci
//!   curvature from the decision witnesses;
//! * [`optimize`] — a derivative-free fallback that minimizes the largest
//!   Ricci eigenvalue over the space of inner products;
//! * [`catalog`] — named example algebras with expected outcomes.

// The matrix types of the public API come from nalgebra; re-exported so
// that downstream crates use the same version.
pub use nalgebra;

pub mod algebra;
pub mod catalog;
pub mod classify;
pub mod construct;
pub mod decide;
pub mod degenerate;
pub mod linalg;
pub mod optimize;
pub mod ricci;
pub mod simplex;
pub mod triangulate;

pub use algebra::{LieAlgebra, LinearForm, Subspace};
pub use classify::NilradicalClass;
pub use construct::Certificate;
pub use decide::{DecisionReport, TheoremTag, Verdict};
pub use ricci::{Definiteness, InnerProduct, MetricLieAlgebra};
