//! Exact construction and verification of Alice's winning strategy in Schmidt's game
//! for the set of weighted badly approximable vectors in the plane.
//!
//! Every length and threshold lives in ℚ(√2) ([`quad::Quad`]) so that all
//! inequalities of the construction are decided exactly.

pub mod cantor;
pub mod diophantine;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod geometry;
pub mod lattice;
pub mod par;
pub mod quad;
pub mod suites;
pub mod trees;

pub use error::{Error, Result};
pub use geometry::{Disc, HalfWidth, Rect, Region, Square, Strip};
pub use quad::{cmp_power, floor_quad, parse_quad, parse_rational, Exponent, ExponentPair, Quad};
