//! Exact expansions, finite differences and estimate checks for degenerate parabolic
//! equations whose normal diffusion carries the weight x_n^γ on the half space {x_n > 0}.

pub mod expansion;
pub mod fdsolver;
pub mod metric;
pub mod model;
pub mod operator;
pub mod rational;
pub mod spoly;
pub mod verify;
