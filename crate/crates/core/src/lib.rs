//! Convex caps with prescribed vertex curvature, their pseudo-edge graphs and
//! unfoldings, Tarasov monotonicity of cut forests, and a machine-checked
//! non-monotonicity certificate for an 84-vertex subdivision of the equilateral
//! triangle, assembled into a 340-vertex polyhedron with no simple pseudo-edge
//! unfolding.

pub mod geom;
pub mod subdivision;
pub mod fixtures;
pub mod capsolver;
pub mod surface;
pub mod cutforest;
pub mod unfold;
pub mod assembly;
pub mod export;
pub mod pipeline;
