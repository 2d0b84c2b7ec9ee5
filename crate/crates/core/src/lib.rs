//! Numerical laboratory for the flow of convex planar curves by a power
//! `kappa^alpha`, `alpha in (1/2, 1]`, of their curvature.
//!
//! Curves are stored through their support function on a uniform grid of
//! turning angles. The crate builds doubled translator caps, flows them to
//! extinction, assembles ancient "oval" solutions as the cap depth grows and
//! checks the quantitative estimates these solutions satisfy.

pub mod ancient;
pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod initcurve;
pub mod io;
pub mod quadrature;
pub mod report;
pub mod translator;

pub use error::{FlowError, Result};
pub use geometry::{hausdorff_distance, solve_support_from_radius, CurveState, Diagnostics};
pub use grid::ThetaGrid;
pub use translator::{
    cap_angle, cap_depth, cap_halfwidth, slab_width, translator_curvature, TranslatorProfile,
};
