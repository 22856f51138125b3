//! Pulse design: ansatz parameterizations, the n-fold symmetric closure
//! objective, and the multi-start derivative-free search that produces
//! dynamically corrected gates.

pub mod gate;
pub mod nelder_mead;
pub mod residual;
pub mod step_rotation;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::IsingModel;
use crate::propagation::{
    error_curve, log_spaced, propagate, scaling_exponent, ScalingFit, TimeGrid,
};
use crate::pulse::{LorentzianTerm, PulseSegment, PulseShape, SmoothPulse, SquarePulseSequence};

pub use gate::{extract_gate, GateClassification, GateTarget};
pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadResult};
pub use residual::{ClosureDiagnostics, ClosureEvaluator};
pub use step_rotation::{step_rotation_angle, step_rotation_integrand};

/// Box bounds for the smooth ansatz parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SmoothBounds {
    pub c0: (f64, f64),
    pub c: (f64, f64),
    pub a: (f64, f64),
    #[serde(default = "default_phi_bounds")]
    pub phi: (f64, f64),
    pub t_p: (f64, f64),
}

fn default_phi_bounds() -> (f64, f64) {
    (0.0, std::f64::consts::TAU)
}

/// Box bounds for the square-sequence ansatz parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SquareBounds {
    pub omega: (f64, f64),
    pub duration: (f64, f64),
}

/// Pulse family searched by the optimizer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnsatzSpec {
    /// Smooth periodic pulse with `lorentzians` bump terms (2 by default,
    /// 3 for a larger search space).
    Smooth {
        lorentzians: usize,
        bounds: SmoothBounds,
    },
    /// Square sequence with `segments` constant pieces per period.
    Square {
        segments: usize,
        bounds: SquareBounds,
    },
}

impl AnsatzSpec {
    pub fn param_count(&self) -> usize {
        match self {
            AnsatzSpec::Smooth { lorentzians, .. } => 2 + 3 * lorentzians,
            AnsatzSpec::Square { segments, .. } => 2 * segments,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            AnsatzSpec::Smooth { lorentzians, .. } => {
                let mut names = vec!["c0".to_string()];
                for i in 1..=*lorentzians {
                    names.push(format!("c{i}"));
                }
                for i in 1..=*lorentzians {
                    names.push(format!("a{i}"));
                }
                for i in 1..=*lorentzians {
                    names.push(format!("phi{i}"));
                }
                names.push("t_p".to_string());
                names
            }
            AnsatzSpec::Square { segments, .. } => {
                let mut names = Vec::with_capacity(2 * segments);
                for i in 1..=*segments {
                    names.push(format!("omega{i}"));
                }
                for i in 1..=*segments {
                    names.push(format!("duration{i}"));
                }
                names
            }
        }
    }

    pub fn bounds(&self) -> Result<Vec<(f64, f64)>> {
        let out = match self {
            AnsatzSpec::Smooth { lorentzians, bounds } => {
                if !(1..=3).contains(lorentzians) {
                    return Err(Error::invalid("smooth ansatz takes 1 to 3 Lorentzians"));
                }
                let mut v = vec![bounds.c0];
                v.extend(std::iter::repeat_n(bounds.c, *lorentzians));
                v.extend(std::iter::repeat_n(bounds.a, *lorentzians));
                v.extend(std::iter::repeat_n(bounds.phi, *lorentzians));
                v.push(bounds.t_p);
                v
            }
            AnsatzSpec::Square { segments, bounds } => {
                if *segments == 0 {
                    return Err(Error::invalid("square ansatz needs at least one segment"));
                }
                let mut v = Vec::with_capacity(2 * segments);
                v.extend(std::iter::repeat_n(bounds.omega, *segments));
                v.extend(std::iter::repeat_n(bounds.duration, *segments));
                v
            }
        };
        for (lo, hi) in &out {
            if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
                return Err(Error::invalid("ansatz bounds must be finite with lo < hi"));
            }
        }
        if let AnsatzSpec::Square { bounds, .. } = self {
            if bounds.duration.0 <= 0.0 {
                return Err(Error::invalid("segment durations must stay positive"));
            }
        }
        if let AnsatzSpec::Smooth { bounds, .. } = self {
            if bounds.t_p.0 <= 0.0 {
                return Err(Error::invalid("period bounds must stay positive"));
            }
        }
        Ok(out)
    }

    /// Builds the pulse for one period (or for `n_sym` repeats).
    pub fn build(&self, params: &[f64], n_sym: u32) -> Result<PulseShape> {
        if params.len() != self.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        match self {
            AnsatzSpec::Smooth { lorentzians, .. } => {
                let l = *lorentzians;
                let c0 = params[0];
                let terms: Vec<LorentzianTerm> = (0..l)
                    .map(|i| LorentzianTerm {
                        c: params[1 + i],
                        a: params[1 + l + i],
                        phi: params[1 + 2 * l + i],
                    })
                    .collect();
                let t_p = params[1 + 3 * l];
                Ok(PulseShape::Smooth(SmoothPulse::new(c0, terms, t_p, n_sym)?))
            }
            AnsatzSpec::Square { segments, .. } => {
                let m = *segments;
                let segs: Vec<PulseSegment> = (0..m)
                    .map(|i| PulseSegment {
                        amplitude: params[i],
                        duration: params[m + i],
                    })
                    .collect();
                Ok(PulseShape::Square(SquarePulseSequence::new(segs, n_sym)?))
            }
        }
    }
}

/// Optimizer and verification settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub multi_starts: usize,
    pub max_iters: usize,
    pub ftol: f64,
    /// Candidates taken into the polish stage, ranked by objective.
    pub polish_candidates: usize,
    pub polish_rounds: usize,
    pub polish_iters: usize,
    /// Full-pulse closure acceptance: `|G(T)| < closure_tol_per_time * T`.
    pub closure_tol_per_time: f64,
    pub seed: u64,
    /// Grid density: `h * max(|Omega|, E1, E2) <= grid_target`.
    pub grid_target: f64,
    pub sweep_points: usize,
    pub sweep_range: (f64, f64),
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            multi_starts: 32,
            max_iters: 600,
            ftol: 1e-14,
            polish_candidates: 6,
            polish_rounds: 2,
            polish_iters: 2500,
            closure_tol_per_time: 1e-6,
            seed: 1,
            grid_target: 0.02,
            sweep_points: 12,
            sweep_range: (1e-4, 1e-1),
        }
    }
}

/// A full design task: model, ansatz, symmetry, and optimizer settings.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    pub model: IsingModel,
    pub ansatz: AnsatzSpec,
    pub n_sym: u32,
    pub k: u32,
    /// Preferred gate among the diagonal targets; solutions realizing it are
    /// selected over other converged solutions.
    pub target_gate: Option<GateTarget>,
    pub settings: OptimizerSettings,
}

/// Outcome of one optimization start.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: usize,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// The designed pulse with its closure and verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignResult {
    /// Whether any candidate met the closure tolerance.
    pub converged: bool,
    /// Whether the selected solution realizes the requested target gate
    /// (None when no target was requested).
    pub target_matched: Option<bool>,
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    /// The full pulse (all symmetry repeats).
    pub pulse: PulseShape,
    pub duration: f64,
    /// One-period symmetric residual of the selected parameters.
    pub objective_residual: f64,
    pub frame_angle: f64,
    pub out_of_plane: f64,
    /// |G(T)| measured on the full pulse.
    pub closure_residual: f64,
    /// The acceptance threshold that was applied (`tol_per_time * T`).
    pub closure_threshold: f64,
    pub gate: Option<GateClassification>,
    pub sweep: Option<SweepSummary>,
    pub grid_steps: usize,
    pub seed: u64,
    pub starts: Vec<StartOutcome>,
}

/// Slimmed-down scaling fit for manifests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub slope: f64,
    pub points: Vec<(f64, f64, f64)>,
    pub dropped: Vec<f64>,
}

impl From<&ScalingFit> for SweepSummary {
    fn from(fit: &ScalingFit) -> Self {
        SweepSummary {
            slope: fit.slope,
            points: fit
                .points
                .iter()
                .map(|p| (p.epsilon, p.infidelity, p.infidelity_phase_min))
                .collect(),
            dropped: fit.dropped.clone(),
        }
    }
}

struct Candidate {
    params: Vec<f64>,
    objective: f64,
}

struct Verified {
    params: Vec<f64>,
    diagnostics: ClosureDiagnostics,
    closure_residual: f64,
    gate: GateClassification,
    grid_steps: usize,
}

/// Runs the multi-start closure search. Deterministic for a fixed seed:
/// per-start RNG streams, index-ordered reductions, and a sequential final
/// selection.
pub fn design(problem: &DesignProblem) -> Result<DesignResult> {
    let settings = &problem.settings;
    if settings.multi_starts == 0 {
        return Err(Error::invalid("need at least one start"));
    }
    let bounds = problem.ansatz.bounds()?;
    let evaluator = ClosureEvaluator::new(
        problem.model.clone(),
        problem.n_sym,
        problem.k,
        settings.grid_target,
    )?;

    let objective = |params: &[f64]| -> f64 {
        match problem
            .ansatz
            .build(params, 1)
            .and_then(|pulse| evaluator.residual(&pulse))
        {
            Ok(d) => d.total,
            Err(_) => 1e3,
        }
    };

    let spans: Vec<f64> = bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let coarse_steps: Vec<f64> = spans.iter().map(|s| 0.15 * s).collect();
    let fine_steps: Vec<f64> = spans.iter().map(|s| 0.01 * s).collect();

    // stage 1: independent starts
    let mut starts: Vec<(usize, NelderMeadResult)> = (0..settings.multi_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha20Rng::seed_from_u64(settings.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)));
            let x0: Vec<f64> = bounds
                .iter()
                .map(|(lo, hi)| rng.random_range(*lo..*hi))
                .collect();
            let res = minimize(
                &objective,
                &x0,
                &coarse_steps,
                &bounds,
                NelderMeadOptions {
                    max_iters: settings.max_iters,
                    ftol: settings.ftol,
                    xtol: 1e-12,
                },
            );
            (i, res)
        })
        .collect();
    starts.sort_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)));

    let outcomes: Vec<StartOutcome> = starts
        .iter()
        .map(|(i, r)| StartOutcome {
            start: *i,
            objective: r.f,
            iterations: r.iterations,
            evaluations: r.evaluations,
        })
        .collect();

    // stage 2: polish the leading candidates
    let polish_count = settings.polish_candidates.min(starts.len()).max(1);
    let mut candidates: Vec<Candidate> = starts[..polish_count]
        .par_iter()
        .map(|(_, r)| {
            let mut x = r.x.clone();
            let mut f = r.f;
            for _ in 0..settings.polish_rounds {
                let res = minimize(
                    &objective,
                    &x,
                    &fine_steps,
                    &bounds,
                    NelderMeadOptions {
                        max_iters: settings.polish_iters,
                        ftol: settings.ftol,
                        xtol: 1e-15,
                    },
                );
                if res.f < f {
                    x = res.x;
                    f = res.f;
                }
            }
            Candidate { params: x, objective: f }
        })
        .collect();
    candidates.sort_by(|a, b| a.objective.total_cmp(&b.objective));

    // stage 3: verify candidates on the full pulse
    let verify = |c: &Candidate| -> Result<Verified> {
        let pulse = problem.ansatz.build(&c.params, problem.n_sym)?;
        let grid = TimeGrid::for_scale(
            pulse.duration(),
            problem.model.grid_scale(&pulse),
            settings.grid_target,
        )?;
        let ham = problem.model.hamiltonian(pulse.clone())?;
        let traj = propagate(&ham, grid)?;
        let curve = error_curve(&traj, &problem.model.noise_direction(), evaluator.basis())?;
        let period_pulse = problem.ansatz.build(&c.params, 1)?;
        let diagnostics = evaluator.residual(&period_pulse)?;
        let gate = extract_gate(traj.final_unitary(), &[])?;
        Ok(Verified {
            params: c.params.clone(),
            diagnostics,
            closure_residual: curve.closure_residual(),
            gate,
            grid_steps: grid.steps(),
        })
    };

    let verified: Vec<Verified> = candidates
        .iter()
        .filter_map(|c| verify(c).ok())
        .collect();
    if verified.is_empty() {
        return Err(Error::NoConvergence {
            best: candidates.first().map(|c| c.objective).unwrap_or(f64::NAN),
            starts: settings.multi_starts,
        });
    }

    // selection: closed solutions first, preferring the requested gate
    let closed = |v: &&Verified| {
        let t = problem.ansatz.param_duration(&v.params, problem.n_sym);
        v.closure_residual < settings.closure_tol_per_time * t
    };
    let selected = match problem.target_gate {
        Some(target) => verified
            .iter()
            .find(|v| closed(v) && v.gate.best == target)
            .or_else(|| verified.iter().find(closed)),
        None => verified.iter().find(closed),
    };
    let (selected, converged) = match selected {
        Some(v) => (v, true),
        None => (&verified[0], false),
    };

    let pulse = problem.ansatz.build(&selected.params, problem.n_sym)?;
    let duration = pulse.duration();
    let target_matched = problem
        .target_gate
        .map(|t| selected.gate.best == t && converged);

    // verification sweep for converged designs
    let sweep = if converged {
        let ham = problem.model.hamiltonian(pulse.clone())?;
        let grid = TimeGrid::for_scale(
            duration,
            problem.model.grid_scale(&pulse),
            settings.grid_target,
        )?;
        let noise = problem.model.noise_spec(settings.sweep_range.0)?;
        let eps = log_spaced(
            settings.sweep_range.0,
            settings.sweep_range.1,
            settings.sweep_points.max(2),
        );
        let fit = scaling_exponent(&ham, &noise, &eps, grid)?;
        Some(SweepSummary::from(&fit))
    } else {
        None
    };

    Ok(DesignResult {
        converged,
        target_matched,
        param_names: problem.ansatz.param_names(),
        params: selected.params.clone(),
        pulse,
        duration,
        objective_residual: selected.diagnostics.total,
        frame_angle: selected.diagnostics.frame_angle,
        out_of_plane: selected.diagnostics.out_of_plane,
        closure_residual: selected.closure_residual,
        closure_threshold: settings.closure_tol_per_time * duration,
        gate: Some(selected.gate.clone()),
        sweep,
        grid_steps: selected.grid_steps,
        seed: settings.seed,
        starts: outcomes,
    })
}

impl AnsatzSpec {
    fn param_duration(&self, params: &[f64], n_sym: u32) -> f64 {
        match self {
            AnsatzSpec::Smooth { lorentzians, .. } => params[1 + 3 * lorentzians] * n_sym as f64,
            AnsatzSpec::Square { segments, .. } => {
                params[*segments..].iter().sum::<f64>() * n_sym as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ansatz_roundtrip() {
        let ansatz = AnsatzSpec::Smooth {
            lorentzians: 2,
            bounds: SmoothBounds {
                c0: (-2.0, 2.0),
                c: (-2.0, 2.0),
                a: (0.2, 3.0),
                phi: (0.0, std::f64::consts::TAU),
                t_p: (2.0, 5.0),
            },
        };
        assert_eq!(ansatz.param_count(), 8);
        assert_eq!(
            ansatz.param_names(),
            ["c0", "c1", "c2", "a1", "a2", "phi1", "phi2", "t_p"]
        );
        let params = [0.5, 0.7, -0.3, 1.0, 2.0, 0.4, 1.2, 3.0];
        let pulse = ansatz.build(&params, 3).unwrap();
        assert!((pulse.duration() - 9.0).abs() < 1e-12);
        assert!((ansatz.param_duration(&params, 3) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn square_ansatz_roundtrip() {
        let ansatz = AnsatzSpec::Square {
            segments: 3,
            bounds: SquareBounds {
                omega: (-2.0, 2.0),
                duration: (0.1, 2.0),
            },
        };
        assert_eq!(ansatz.param_count(), 6);
        let params = [1.0, -0.5, 0.2, 0.5, 0.4, 0.3];
        let pulse = ansatz.build(&params, 3).unwrap();
        assert!((pulse.duration() - 3.6).abs() < 1e-12);
    }

    #[test]
    fn coprimality_is_enforced() {
        let model = IsingModel::new(0.5, 1.0).unwrap();
        assert!(ClosureEvaluator::new(model.clone(), 4, 2, 0.02).is_err());
        assert!(ClosureEvaluator::new(model, 3, 1, 0.02).is_ok());
    }
}
