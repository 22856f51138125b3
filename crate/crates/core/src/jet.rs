//! Truncated Taylor-series (jet) arithmetic.
//!
//! A jet stores the scaled derivatives `c[m] = f^(m)(t0) / m!` of a function
//! at one point. Arithmetic on jets propagates derivatives exactly (to
//! roundoff), which is how pulse shapes and nested-commutator expansions
//! expose high-order time derivatives without finite differencing.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The identity function t evaluated at `t0`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn from_coefficients(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Unscaled m-th derivative `f^(m)(t0)`.
    pub fn derivative(&self, m: usize) -> f64 {
        if m > self.order() {
            return 0.0;
        }
        self.c[m] * factorial(m)
    }

    pub fn coefficient(&self, m: usize) -> f64 {
        self.c.get(m).copied().unwrap_or(0.0)
    }

    fn zip_len(&self, other: &Jet) -> usize {
        self.c.len().min(other.c.len())
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.zip_len(other);
        Jet {
            c: (0..n).map(|m| self.c[m] + other.c[m]).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.zip_len(other);
        Jet {
            c: (0..n).map(|m| self.c[m] - other.c[m]).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| k * v).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.zip_len(other);
        let mut c = vec![0.0; n];
        for (m, slot) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=m {
                acc += self.c[j] * other.c[m - j];
            }
            *slot = acc;
        }
        Jet { c }
    }

    /// Reciprocal 1/f; requires f(t0) != 0.
    pub fn recip(&self) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        c[0] = 1.0 / self.c[0];
        for m in 1..self.c.len() {
            let mut acc = 0.0;
            for j in 1..=m {
                acc += self.c[j] * c[m - j];
            }
            c[m] = -acc * c[0];
        }
        Jet { c }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    /// Square root; requires f(t0) > 0.
    pub fn sqrt(&self) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        c[0] = self.c[0].sqrt();
        for m in 1..self.c.len() {
            let mut acc = 0.0;
            for j in 1..m {
                acc += c[j] * c[m - j];
            }
            c[m] = (self.c[m] - acc) / (2.0 * c[0]);
        }
        Jet { c }
    }

    /// sin(f) and cos(f) by the standard joint recurrence.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        let (s0, c0) = self.c[0].sin_cos();
        s[0] = s0;
        c[0] = c0;
        for m in 1..n {
            let mut sacc = 0.0;
            let mut cacc = 0.0;
            for j in 1..=m {
                let ju = j as f64 * self.c[j];
                sacc += ju * c[m - j];
                cacc += ju * s[m - j];
            }
            s[m] = sacc / m as f64;
            c[m] = -cacc / m as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    /// Jet of the derivative f'; drops one order.
    pub fn derivative_jet(&self) -> Jet {
        if self.c.len() == 1 {
            return Jet { c: vec![0.0] };
        }
        Jet {
            c: (1..self.c.len())
                .map(|m| m as f64 * self.c[m])
                .collect(),
        }
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Jet of a matrix-valued function of time.
#[derive(Clone, Debug)]
pub struct MatrixJet {
    c: Vec<DMatrix<C64>>,
}

impl MatrixJet {
    pub fn constant(value: DMatrix<C64>, order: usize) -> Self {
        let dim = value.nrows();
        let mut c = vec![DMatrix::zeros(dim, dim); order + 1];
        c[0] = value;
        MatrixJet { c }
    }

    pub fn from_coefficients(c: Vec<DMatrix<C64>>) -> Self {
        assert!(!c.is_empty());
        MatrixJet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.c[0].nrows()
    }

    pub fn value(&self) -> &DMatrix<C64> {
        &self.c[0]
    }

    pub fn coefficient(&self, m: usize) -> &DMatrix<C64> {
        &self.c[m]
    }

    pub fn add(&self, other: &MatrixJet) -> MatrixJet {
        let n = self.c.len().min(other.c.len());
        MatrixJet {
            c: (0..n).map(|m| &self.c[m] + &other.c[m]).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> MatrixJet {
        MatrixJet {
            c: self.c.iter().map(|m| m * k).collect(),
        }
    }

    /// Product jet by the Cauchy rule over matrix products.
    pub fn mul(&self, other: &MatrixJet) -> MatrixJet {
        let n = self.c.len().min(other.c.len());
        let dim = self.dim();
        let mut c = vec![DMatrix::<C64>::zeros(dim, dim); n];
        for (m, slot) in c.iter_mut().enumerate() {
            for j in 0..=m {
                *slot += &self.c[j] * &other.c[m - j];
            }
        }
        MatrixJet { c }
    }

    /// Scalar-jet times matrix-jet.
    pub fn scale_jet(&self, k: &Jet) -> MatrixJet {
        let n = self.c.len().min(k.order() + 1);
        let dim = self.dim();
        let mut c = vec![DMatrix::<C64>::zeros(dim, dim); n];
        for (m, slot) in c.iter_mut().enumerate() {
            for j in 0..=m {
                *slot += &self.c[m - j] * C64::new(k.coefficient(j), 0.0);
            }
        }
        MatrixJet { c }
    }

    pub fn derivative_jet(&self) -> MatrixJet {
        if self.c.len() == 1 {
            let dim = self.dim();
            return MatrixJet {
                c: vec![DMatrix::zeros(dim, dim)],
            };
        }
        MatrixJet {
            c: (1..self.c.len())
                .map(|m| &self.c[m] * C64::new(m as f64, 0.0))
                .collect(),
        }
    }

    /// Jet of `i [A(t), B(t)]`.
    pub fn commutator_i(&self, other: &MatrixJet) -> MatrixJet {
        let ab = self.mul(other);
        let ba = other.mul(self);
        let n = ab.c.len();
        MatrixJet {
            c: (0..n)
                .map(|m| (&ab.c[m] - &ba.c[m]) * C64::new(0.0, 1.0))
                .collect(),
        }
    }

    /// Jet of `{A(t), B(t)}`.
    pub fn anticommutator(&self, other: &MatrixJet) -> MatrixJet {
        let ab = self.mul(other);
        let ba = other.mul(self);
        let n = ab.c.len();
        MatrixJet {
            c: (0..n).map(|m| &ab.c[m] + &ba.c[m]).collect(),
        }
    }

    /// Jet of the norm `sqrt(tr(A^dagger A)/dim)`; requires a nonzero value.
    pub fn norm_jet(&self) -> Jet {
        let dim = self.dim() as f64;
        let n = self.c.len();
        let mut g = vec![0.0; n];
        for (m, slot) in g.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..=m {
                // tr(A_j^dagger A_{m-j}) as a conjugate-linear dot product.
                acc += self.c[j].dotc(&self.c[m - j]);
            }
            debug_assert!(acc.im.abs() < 1e-9 * (1.0 + acc.re.abs()));
            *slot = acc.re / dim;
        }
        Jet::from_coefficients(g).sqrt()
    }
}
