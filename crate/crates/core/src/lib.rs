//! Thick polygonal knots, their projected diagrams, and ropelength-filtered
//! Reidemeister graphs.

pub mod diagram;
pub mod error;
pub mod families;
pub mod lifted;
pub mod moves;
pub mod optimizer;
pub mod pattern;
pub mod polygon;
pub mod projection;
pub mod sweep;

pub use diagram::{Diagram, Passage};
pub use error::{Error, Result};
pub use polygon::{Chord, ChordEnd, Polygon3, ThicknessReport, Vec3};
