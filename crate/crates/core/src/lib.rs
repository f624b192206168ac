//! Matching-rule engine for decorated hexagonal monotiles.
//!
//! - [`hexgrid`]: axial lattice geometry, regions and torus quotients.
//! - [`tilemodel`]: rule sets (labels, compatibilities, male joints, motifs).
//! - [`solver`]: patch verification, propagation, region and torus search.
//! - [`dendrite`]: the male-joint graph, cycle detection and placement order.
//! - [`aperiodicity`]: translation scans, torus scans and motif loop census.
//! - [`render`]: deterministic SVG output.

pub mod aperiodicity;
pub mod dendrite;
pub mod exec;
pub mod hexgrid;
pub mod render;
pub mod solver;
pub mod tilemodel;

pub use exec::Execution;
pub use hexgrid::{AxialCell, CornerIndex, EdgeIndex, Region, TorusBasis};
pub use solver::{Patch, SolveResult, SolverConfig};
pub use tilemodel::{Chirality, RuleSet, TileState};
