//! Combinatorial toolkit for compact cube complexes of dimension at most 3:
//! nonpositive curvature and specialness verdicts with witnesses, graphs of
//! spaces and their horizontal quotients, separability searches over finite
//! quotients of free groups, and the construction that embeds a complex `Y`
//! into a finite complex `R` in which every given injective partial local
//! isometry of `Y` extends to an automorphism.

#![allow(clippy::needless_range_loop)]

pub mod complex;
pub mod dot;
pub mod error;
pub mod freegrp;
pub mod gos;
pub mod hyperplane;
pub mod json;
pub mod map;
pub mod pipeline;
pub mod sample;
pub mod sym;

pub use complex::{CellId, CubeComplex, LinkComplex, Subcomplex, ValidationReport};
pub use error::Error;
pub use freegrp::{Budget, CosetProduct, FiniteQuotient, StallingsGraph, Word};
pub use gos::{GraphOfSpaces, HorizontalQuotient, TotalSpace, UGraph};
pub use hyperplane::{Hyperplane, MidcubeComplex, SpecialnessReport};
pub use map::{CubicalMap, PartialLocalIsometry};
pub use pipeline::{CoverSpec, HrushovskiCertificate, Target};
pub use sym::{CubeSym, Dir, SquareSym};
