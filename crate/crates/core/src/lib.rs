//! Design and verification of dynamically corrected quantum gates through
//! curve geometry.
//!
//! The accumulated first-order effect of a quasi-static noise term is
//! represented as a unit-speed curve in the subspace of Hermitian operators
//! the noise can reach; a control pulse cancels that error exactly when its
//! curve closes. This crate provides the operator algebra and subspace
//! construction, time-ordered propagation, Frenet-frame curvature analysis
//! (numeric, closed-form, and recursion routes), and a derivative-free
//! multi-start search for n-fold symmetric closed curves, together with
//! infidelity-scaling verification of the resulting gates.

pub mod basis;
pub mod design;
pub mod error;
pub mod export;
pub mod geometry;
pub mod jet;
pub mod model;
pub mod operator;
pub mod pauli;
pub mod propagation;
pub mod pulse;

pub use basis::{error_subspace, BasisElement, OperatorBasis};
pub use design::{
    design, extract_gate, step_rotation_angle, AnsatzSpec, ClosureDiagnostics, ClosureEvaluator,
    DesignProblem, DesignResult, GateClassification, GateTarget, OptimizerSettings, SmoothBounds,
    SquareBounds,
};
pub use error::{Error, Result};
pub use geometry::{
    block_decompose, closure_residual, curvatures_numeric, frames_from_curve,
    frames_operator_side, ising_curvatures, BlockCurves, CurvatureProfile, FrameSeries,
    FrenetFrame,
};
pub use model::{ControlHamiltonian, IsingModel, NoiseSpec};
pub use operator::{anticommutator, commutator_i, inner_product, HermitianOperator};
pub use pauli::{all_pauli_strings, Pauli, PauliString};
pub use propagation::{
    error_curve, infidelity, log_spaced, noisy_propagate, propagate, scaling_exponent, ErrorCurve,
    Infidelity, PropagatorTrajectory, ScalingFit, TimeGrid,
};
pub use pulse::{
    eval_pulse, LinearWaveform, LorentzianTerm, PulseSegment, PulseShape, SmoothPulse,
    SquarePulseSequence,
};
