//! Curve geometry: Frenet-Serret frames, generalized curvatures (numeric,
//! closed-form, and recursion routes), block decomposition, and closure
//! diagnostics.

pub mod blocks;
pub mod curvature;
pub mod fd;
pub mod frames;
pub mod recursion;

pub use blocks::{
    block_decompose, block_kappa_tau_exact, block_kappa_tau_fd, reconstruct_from_blocks,
    reconstruction_residual, BlockCurves,
};
pub use curvature::{closure_residual, curvatures_numeric, ising_curvatures, CurvatureProfile};
pub use frames::{
    frame_at_sample, frames_from_curve, frames_operator_side, DerivativeOperators, FrameSeries,
    FrenetFrame, FRAME_DROP_TOL,
};
pub use recursion::{RecursionCurvatures, RecursionSample, RecursionState};
