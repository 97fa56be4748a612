//! Space-filling curves: the static Hilbert, Z and Peano curves and the
//! adaptive quadtree curve built on top of them.

mod adaptive;
mod curve;

pub use self::adaptive::{levels_for_fanout, AdaptiveSfc, LeafStatus, Refinement};
pub use self::curve::{curve_cell, curve_index, CellCoord, Curve, SfcIndex};
