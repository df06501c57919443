//! Tangent-line configurations around the unit sphere: distances, the
//! three-fold symmetric family and its trajectory, the general `n`-line
//! family, and a maximin search.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod d3;
pub mod error;
pub mod general;
pub mod geometry;
pub mod numfmt;
pub mod report;

pub mod scene;
pub mod search;

pub use curve::{gamma_point, record, CurveSample, RecordReport};
pub use d3::{build_c6, AlgCoords, D3Params, DistanceTriplets};
pub use error::{Error, Result};
pub use general::{unlock_verdict, FourCylPoint, GeneralParams, UnlockReport, Verdict};
pub use geometry::{
    distance_from_radius, distance_sq, make_tangent_line, radius_from_distance, Configuration,
    SphericalPoint, TangentLine, Vec3,
};
pub use scene::{GapReport, SceneSpec};
pub use search::{local_maximize, multi_start, perturbation_probe, FreeConfig, OptResult};
