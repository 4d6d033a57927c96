//! Numerical laboratory for self-similar sets, Hutchinson measures, and
//! the operator algebra of an expanding branched covering.
//!
//! The library builds attractors and invariant measures of iterated
//! function systems of proper contractions, discretizes L^2 over the
//! attractor on depth-N word cells, and verifies the identities relating
//! composition, transfer, and multiplication operators — including the
//! Cuntz–Pimsner bimodule structure — as quantitative defect checks.
//!
//! All numerics are generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*64` aliases fix the common case.

pub mod attractor;
pub mod bimodule;
pub mod branch;
pub mod cells;
pub mod error;
pub mod export;
pub mod geometry;
pub mod ifs;
pub mod measure;
pub mod operators;
pub mod report;
pub mod scalar;
pub mod suite;
pub mod words;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub use attractor::{attractor_chaos_game, attractor_deterministic, hausdorff_distance,
    self_similarity_defect, PointCloud, Provenance};
pub use bimodule::{
    bimodule_norm, covariant_rep_check, cuntz_relations_check, cylinder_basis, frame_bounds_check,
    frame_operator, ideal_covariance_defect, ideal_element, ideal_element_default,
    inner_product_A, key_identity_defect, module_action, pou_basis, reconstruct, BasisFamily,
    BasisKind, BimoduleElement, IdealElement,
};
pub use branch::{branch_sets, open_set_condition_check, BranchSetEstimate};
pub use cells::{cell_space, cylinder_indicator, discretize, discretize_real, CellSpace,
    GridFunction};
pub use geometry::{distance, Ambient, OpenSet, Point};
pub use ifs::{builtin, contraction_bounds_estimate, eval_map, eval_map_inverse, from_json,
    ContractionMap, IfSystem, MapKind};
pub use measure::{
    empirical_measure, integrate, invariance_defect, overlap_mass, pushforward,
    self_similar_measure, weak_distance, AtomicMeasure, MeasureKind,
};
pub use operators::{
    adjoint_defect, comp_op, covariance_defect, identity_op, isometry_defect, mult_op,
    operator_norm, refinement_embedding, transfer_op, Entries, OperatorMatrix,
};
pub use report::{DefectReport, RunReport};
pub use suite::{run_check, run_full_suite, CHECK_NAMES};
pub use words::{cell_budget, check_cell_budget, DEFAULT_CELL_BUDGET};

/// Concrete f64 aliases for the common case.
pub type Point64 = geometry::Point<f64>;
pub type Ambient64 = geometry::Ambient<f64>;
pub type System64 = ifs::IfSystem<f64>;
pub type Map64 = ifs::ContractionMap<f64>;
pub type Cloud64 = attractor::PointCloud<f64>;
pub type Measure64 = measure::AtomicMeasure<f64>;
pub type CellSpace64 = cells::CellSpace<f64>;
pub type GridFunction64 = cells::GridFunction<f64>;
pub type Operator64 = operators::OperatorMatrix<f64>;
pub type Basis64 = bimodule::BasisFamily<f64>;
