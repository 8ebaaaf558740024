//! Periodic prismatic and antiprismatic polyhedra in the three constant-
//! curvature 3-spaces.
//!
//! The crate solves the closing-up parameter conditions (dihedral-angle
//! targeting, prism squareness, the kis angle condition, antiprism
//! regularity), generates the periodic surfaces as discrete group orbits of
//! fundamental patches, and machine-checks regularity and quotient
//! combinatorics (cell counts, Euler characteristic, genus, straight-ahead
//! and Petrie cycles).

pub mod error;
pub mod spaceform;
pub mod isometry;
pub mod tables;
pub mod solids;
pub mod pyramid;
pub mod kis;
pub mod solvers;
pub mod orbit;
pub mod surface;
pub mod scenario;
pub mod report;
pub mod obj;

pub use error::{Error, Result};
pub use spaceform::SpaceForm;
