//! Billiards in an ellipse and the Poncelet grid.
//!
//! The library models the billiard ball map on the space of oriented lines,
//! the confocal family of conics that serve as its caustics, the canonical
//! coordinate on a caustic in which every confocal billiard map is a rigid
//! shift, and the grid of intersection points obtained by extending the
//! sides of a Poncelet polygon. All constructions are numerical and every
//! classical invariant (caustic preservation, area preservation, Poncelet
//! closure, Graves string construction, Ivory affinity, confocality of the
//! grid loci) is exposed as a measurable quantity.
//!
//! ```
//! use poncelet_core::{conics::evaluate_confocal, grid, ConfocalFamily};
//!
//! // the ellipse x1²/4 + x2² = 1 and its confocal family
//! let family = ConfocalFamily::new(4.0, 1.0)?;
//!
//! // a pentagon inscribed in the member λ = 0, circumscribed about the
//! // caustic with rotation number 1/5
//! let poly = grid::build_polygon(&family, 0.0, 5, 1, 0.0)?;
//! let boundary = family.conic(0.0)?;
//! for v in &poly.vertices {
//!     assert!(evaluate_confocal(&boundary, *v).abs() < 1e-9);
//! }
//!
//! // its grid has n(n+1)/2 = 15 points in 3 angular and 5 radial sets
//! let sets = grid::grid_sets(&poly)?;
//! assert_eq!(sets.len(), 8);
//! # Ok::<(), poncelet_core::Error>(())
//! ```

pub mod canonical;
pub mod conics;
mod error;
pub mod grid;
pub mod linespace;
mod numeric;
pub mod projective;

pub use error::{Error, Result};

pub use conics::{ConfocalConic, ConfocalFamily, ConicKind, EllipticCoords, GeneralConic, Point2};
pub use linespace::{Chord, OrientedLine};
