//! The complex p-norm and the midpoint phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{to_point, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::potential::MagneticPotential;

/// A vector of ℂ^N, e.g. a value of ∇u − iAu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn new(components: Vec<Complex64>) -> Self {
        ComplexVector(components)
    }

    pub fn real(v: &[f64]) -> Self {
        ComplexVector(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.0
    }

    /// Euclidean norms of the real and imaginary parts.
    pub fn part_norms(&self) -> (f64, f64) {
        let re: f64 = self.0.iter().map(|z| z.re * z.re).sum();
        let im: f64 = self.0.iter().map(|z| z.im * z.im).sum();
        (re.sqrt(), im.sqrt())
    }

    pub fn conj(&self) -> Self {
        ComplexVector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, lambda: f64) -> Self {
        ComplexVector(self.0.iter().map(|z| z * lambda).collect())
    }

    /// Σ v_k h_k for a real direction h.
    pub fn dot_real(&self, h: &[f64]) -> Complex64 {
        self.0.iter().zip(h).map(|(z, &x)| z * x).sum()
    }
}

impl From<Complex64> for ComplexVector {
    fn from(z: Complex64) -> Self {
        ComplexVector(vec![z])
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param("p", format!("p must be ≥ 1, got {p}")));
    }
    Ok(())
}

/// |z|_p = (|Re z|^p + |Im z|^p)^{1/p}.
pub fn pnorm(z: &ComplexVector, p: f64) -> Result<f64> {
    check_p(p)?;
    if z.0.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::InvalidField("non-finite vector component".into()));
    }
    let (re, im) = z.part_norms();
    Ok(combine(re, im, p))
}

/// |z|_p^p for a scalar, without validation.
#[inline]
pub fn pnorm_pow_scalar(z: Complex64, p: f64) -> f64 {
    if p == 2.0 {
        z.re * z.re + z.im * z.im
    } else if p == 1.0 {
        z.re.abs() + z.im.abs()
    } else {
        z.re.abs().powf(p) + z.im.abs().powf(p)
    }
}

fn combine(re: f64, im: f64, p: f64) -> f64 {
    if p == 2.0 {
        re.hypot(im)
    } else if p == 1.0 {
        re + im
    } else {
        let m = re.max(im);
        if m == 0.0 {
            return 0.0;
        }
        // scale to avoid overflow in the powers
        m * ((re / m).powf(p) + (im / m).powf(p)).powf(1.0 / p)
    }
}

/// θ(x, y) = (x − y)·A((x + y)/2).
pub fn modulation_phase(x: &[f64], y: &[f64], a: &MagneticPotential) -> Result<f64> {
    let n = a.dim();
    if x.len() != n || y.len() != n {
        let found = if x.len() != n { x.len() } else { y.len() };
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    Ok(phase(&to_point(x), &to_point(y), a, n))
}

#[inline]
pub(crate) fn phase(x: &Point, y: &Point, a: &MagneticPotential, dim: usize) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let mut mid = [0.0; MAX_DIM];
    for i in 0..dim {
        mid[i] = 0.5 * (x[i] + y[i]);
    }
    let av = a.eval(&mid);
    (0..dim).map(|i| (x[i] - y[i]) * av[i]).sum()
}
