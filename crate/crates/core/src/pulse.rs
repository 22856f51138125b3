//! Control pulse shapes: piecewise-constant sequences, smooth periodic
//! pulses built from periodized Lorentzian bumps, and sampled waveforms
//! ingested from CSV (piecewise-linear).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// One constant-amplitude segment of a square sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub amplitude: f64,
    pub duration: f64,
}

/// Piecewise-constant pulse: `segments` repeated `n_sym` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquarePulseSequence {
    segments: Vec<PulseSegment>,
    n_sym: u32,
}

impl SquarePulseSequence {
    pub fn new(segments: Vec<PulseSegment>, n_sym: u32) -> Result<Self> {
        if n_sym == 0 {
            return Err(Error::invalid("n_sym must be at least 1"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() || !s.amplitude.is_finite() {
                return Err(Error::invalid(format!(
                    "segment {i} must have finite amplitude and positive duration"
                )));
            }
        }
        Ok(SquarePulseSequence { segments, n_sym })
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn n_sym(&self) -> u32 {
        self.n_sym
    }

    pub fn period(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn duration(&self) -> f64 {
        self.n_sym as f64 * self.period()
    }

    /// All segments of the full pulse, expanded over the symmetry repeats,
    /// with their start times.
    pub fn expanded(&self) -> Vec<(f64, PulseSegment)> {
        let mut out = Vec::with_capacity(self.segments.len() * self.n_sym as usize);
        let mut t = 0.0;
        for _ in 0..self.n_sym {
            for s in &self.segments {
                out.push((t, *s));
                t += s.duration;
            }
        }
        out
    }

    /// Amplitude at `t` (right-continuous at interior boundaries; the final
    /// endpoint belongs to the last segment).
    fn amplitude_at(&self, t: f64) -> f64 {
        if self.segments.is_empty() {
            return 0.0;
        }
        let t = t.clamp(0.0, self.duration());
        for (start, s) in self.expanded() {
            if t < start + s.duration {
                return s.amplitude;
            }
        }
        self.segments.last().unwrap().amplitude
    }

    /// Distance from `t` to the nearest segment boundary of the full pulse.
    fn boundary_distance(&self, t: f64) -> f64 {
        let mut best = f64::INFINITY;
        for (start, s) in self.expanded() {
            best = best.min((t - start).abs()).min((t - (start + s.duration)).abs());
        }
        best
    }
}

/// One periodized-Lorentzian bump `c / (1 + a^2 sin^2(pi t / t_p + phi))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianTerm {
    pub c: f64,
    pub a: f64,
    pub phi: f64,
}

/// Smooth `t_p`-periodic pulse: a constant plus two (optionally three)
/// periodized-Lorentzian bumps; the total duration is `n_sym * t_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothPulse {
    c0: f64,
    terms: Vec<LorentzianTerm>,
    t_p: f64,
    n_sym: u32,
}

impl SmoothPulse {
    pub fn new(c0: f64, terms: Vec<LorentzianTerm>, t_p: f64, n_sym: u32) -> Result<Self> {
        if !(t_p > 0.0) || !t_p.is_finite() {
            return Err(Error::invalid("pulse period t_p must be positive"));
        }
        if n_sym == 0 {
            return Err(Error::invalid("n_sym must be at least 1"));
        }
        if terms.is_empty() || terms.len() > 3 {
            return Err(Error::invalid("smooth pulse takes 1 to 3 Lorentzian terms"));
        }
        for t in &terms {
            if !t.c.is_finite() || !t.a.is_finite() || !t.phi.is_finite() {
                return Err(Error::invalid("smooth pulse parameters must be finite"));
            }
        }
        Ok(SmoothPulse { c0, terms, t_p, n_sym })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn terms(&self) -> &[LorentzianTerm] {
        &self.terms
    }

    pub fn t_p(&self) -> f64 {
        self.t_p
    }

    pub fn n_sym(&self) -> u32 {
        self.n_sym
    }

    pub fn duration(&self) -> f64 {
        self.n_sym as f64 * self.t_p
    }

    pub fn with_n_sym(&self, n_sym: u32) -> Result<Self> {
        SmoothPulse::new(self.c0, self.terms.clone(), self.t_p, n_sym)
    }

    fn value(&self, t: f64) -> f64 {
        let mut v = self.c0;
        for term in &self.terms {
            let s = (std::f64::consts::PI * t / self.t_p + term.phi).sin();
            v += term.c / (1.0 + (term.a * s).powi(2));
        }
        v
    }

    fn slope(&self, t: f64) -> f64 {
        let w = std::f64::consts::PI / self.t_p;
        let mut v = 0.0;
        for term in &self.terms {
            let u = w * t + term.phi;
            let denom = 1.0 + (term.a * u.sin()).powi(2);
            v -= term.c * term.a * term.a * (2.0 * u).sin() * w / (denom * denom);
        }
        v
    }

    fn jet(&self, t: f64, order: usize) -> Jet {
        let tj = Jet::variable(t, order);
        let mut v = Jet::constant(self.c0, order);
        let w = std::f64::consts::PI / self.t_p;
        for term in &self.terms {
            let u = tj.scale(w).add(&Jet::constant(term.phi, order));
            let (s, _) = u.sin_cos();
            let denom = Jet::constant(1.0, order).add(&s.mul(&s).scale(term.a * term.a));
            v = v.add(&denom.recip().scale(term.c));
        }
        v
    }
}

/// Piecewise-linear interpolation of a sampled waveform (t, value), used to
/// verify externally supplied pulses. The interpolation is an approximation:
/// slopes are constant on segments and jump at the sample knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearWaveform {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl LinearWaveform {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid("waveform times and values differ in length"));
        }
        if times.len() < 2 {
            return Err(Error::invalid("waveform needs at least two samples"));
        }
        if times[0].abs() > 1e-12 {
            return Err(Error::invalid("waveform must start at t = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("waveform times must be strictly increasing"));
        }
        if values.iter().chain(times.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("waveform samples must be finite"));
        }
        Ok(LinearWaveform { times, values })
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn segment(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        }
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    fn slope(&self, t: f64) -> f64 {
        let i = self.segment(t);
        (self.values[i + 1] - self.values[i]) / (self.times[i + 1] - self.times[i])
    }
}

/// Tagged union over the supported pulse families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PulseShape {
    Square(SquarePulseSequence),
    Smooth(SmoothPulse),
    Waveform(LinearWaveform),
}

impl PulseShape {
    pub fn duration(&self) -> f64 {
        match self {
            PulseShape::Square(p) => p.duration(),
            PulseShape::Smooth(p) => p.duration(),
            PulseShape::Waveform(p) => p.duration(),
        }
    }

    /// Amplitude at `t` in `[0, duration]`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            PulseShape::Square(p) => p.amplitude_at(t),
            PulseShape::Smooth(p) => p.value(t),
            PulseShape::Waveform(p) => p.value(t.clamp(0.0, p.duration())),
        }
    }

    /// Analytic time derivative at `t`; zero inside square segments
    /// (transitions are handled by the frame-tracking step rotation).
    pub fn slope(&self, t: f64) -> f64 {
        match self {
            PulseShape::Square(_) => 0.0,
            PulseShape::Smooth(p) => p.slope(t),
            PulseShape::Waveform(p) => p.slope(t.clamp(0.0, p.duration())),
        }
    }

    /// Taylor jet of the amplitude at `t`.
    pub fn jet(&self, t: f64, order: usize) -> Jet {
        match self {
            PulseShape::Square(p) => Jet::constant(p.amplitude_at(t), order),
            PulseShape::Smooth(p) => p.jet(t, order),
            PulseShape::Waveform(p) => {
                let t = t.clamp(0.0, p.duration());
                let mut c = vec![0.0; order + 1];
                c[0] = p.value(t);
                if order >= 1 {
                    c[1] = p.slope(t);
                }
                Jet::from_coefficients(c)
            }
        }
    }

    /// Jet with a differentiability check: square pulses are not
    /// differentiable at interior segment boundaries, waveforms not beyond
    /// first order at their knots.
    pub fn jet_checked(&self, t: f64, order: usize) -> Result<Jet> {
        match self {
            PulseShape::Square(p) if order >= 1 && !p.segments().is_empty() => {
                let d = p.boundary_distance(t);
                let interior = t > 1e-12 && t < p.duration() - 1e-12;
                if interior && d < 1e-12 * p.duration().max(1.0) {
                    return Err(Error::NonDifferentiable { t, order });
                }
                Ok(self.jet(t, order))
            }
            PulseShape::Waveform(p) if order >= 2 => {
                let near_knot = p
                    .times
                    .iter()
                    .skip(1)
                    .take(p.times.len() - 2)
                    .any(|x| (x - t).abs() < 1e-12 * p.duration().max(1.0));
                if near_knot {
                    return Err(Error::NonDifferentiable { t, order });
                }
                Ok(self.jet(t, order))
            }
            _ => Ok(self.jet(t, order)),
        }
    }

    /// Value and analytic slope, with a range check.
    pub fn sample(&self, t: f64) -> Result<(f64, f64)> {
        let tol = 1e-9 * self.duration().max(1.0);
        if t < -tol || t > self.duration() + tol {
            return Err(Error::invalid(format!(
                "t = {t} outside pulse range [0, {}]",
                self.duration()
            )));
        }
        Ok((self.value(t), self.slope(t)))
    }

    /// Cheap upper bound on `|value|` over the pulse, used for grid sizing.
    pub fn max_abs(&self) -> f64 {
        match self {
            PulseShape::Square(p) => p
                .segments()
                .iter()
                .map(|s| s.amplitude.abs())
                .fold(0.0, f64::max),
            PulseShape::Smooth(p) => {
                p.c0.abs() + p.terms.iter().map(|t| t.c.abs()).sum::<f64>()
            }
            PulseShape::Waveform(p) => p.values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }

    pub fn as_square(&self) -> Option<&SquarePulseSequence> {
        match self {
            PulseShape::Square(p) => Some(p),
            _ => None,
        }
    }
}

/// Value and analytic slope of a pulse at `t`.
pub fn eval_pulse(pulse: &PulseShape, t: f64) -> Result<(f64, f64)> {
    pulse.sample(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth(c0: f64, terms: &[(f64, f64, f64)], t_p: f64, n_sym: u32) -> SmoothPulse {
        SmoothPulse::new(
            c0,
            terms
                .iter()
                .map(|&(c, a, phi)| LorentzianTerm { c, a, phi })
                .collect(),
            t_p,
            n_sym,
        )
        .unwrap()
    }

    #[test]
    fn constant_limits() {
        // With both bump strengths zero the pulse is the constant c0.
        let p = PulseShape::Smooth(smooth(0.8, &[(0.0, 1.0, 0.2), (0.0, 2.0, 0.4)], 3.0, 1));
        let (v, dv) = p.sample(1.234).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
        assert!(dv.abs() < 1e-15);

        // a = 0 makes a bump contribute its constant c.
        let p = PulseShape::Smooth(smooth(0.5, &[(0.7, 0.0, 0.2)], 3.0, 1));
        let (v, dv) = p.sample(2.0).unwrap();
        assert!((v - 1.2).abs() < 1e-15);
        assert!(dv.abs() < 1e-14);
    }

    #[test]
    fn periodicity() {
        let p = smooth(1.2, &[(0.8, 1.3, 0.4), (0.5, 2.1, 2.3)], 2.5, 3);
        for k in 0..40 {
            let t = 0.061 * k as f64;
            assert!((p.value(t + p.t_p()) - p.value(t)).abs() < 1e-12);
        }
        assert!((p.duration() - 7.5).abs() < 1e-15);
    }

    #[test]
    fn slope_matches_jet_and_finite_differences() {
        let sp = smooth(1.2, &[(0.8, 1.3, 0.4), (0.5, 2.1, 2.3)], 2.5, 1);
        let p = PulseShape::Smooth(sp);
        let h = 1e-6;
        for k in 1..20 {
            let t = 0.11 * k as f64;
            let (v, dv) = p.sample(t).unwrap();
            let jet = p.jet(t, 3);
            assert!((jet.value() - v).abs() < 1e-13);
            assert!((jet.derivative(1) - dv).abs() < 1e-12);
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((dv - fd).abs() < 1e-6 * (1.0 + dv.abs()));
        }
    }

    #[test]
    fn square_segments_and_boundaries() {
        let sq = SquarePulseSequence::new(
            vec![
                PulseSegment { amplitude: 1.0, duration: 0.5 },
                PulseSegment { amplitude: -2.0, duration: 1.0 },
            ],
            2,
        )
        .unwrap();
        let p = PulseShape::Square(sq);
        assert!((p.duration() - 3.0).abs() < 1e-15);
        assert_eq!(p.value(0.25), 1.0);
        assert_eq!(p.value(0.75), -2.0);
        assert_eq!(p.value(1.6), 1.0); // second repeat
        assert_eq!(p.slope(0.75), 0.0);
        // jets at an interior boundary are flagged
        assert!(p.jet_checked(0.5, 2).is_err());
        assert!(p.jet_checked(0.25, 2).is_ok());
    }

    #[test]
    fn waveform_interpolation() {
        let w = LinearWaveform::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        let p = PulseShape::Waveform(w);
        assert!((p.value(0.5) - 1.0).abs() < 1e-15);
        assert!((p.slope(0.5) - 2.0).abs() < 1e-15);
        assert!((p.value(2.0) - 1.0).abs() < 1e-15);
        assert!((p.slope(2.0) + 1.0).abs() < 1e-15);
        assert!(p.sample(3.5).is_err());
        assert!(LinearWaveform::new(vec![0.5, 1.0], vec![0.0, 0.0]).is_err());
    }
}
