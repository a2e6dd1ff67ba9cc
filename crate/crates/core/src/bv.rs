//! Magnetic total variation |Du|_A.
//!
//! The discrete problem uses cell averages of u, A at cell centers, central
//! differences D (one-sided inward at the mask boundary) and div = −Dᵀ.
//! Every stencil stays inside the mask, so div φ never reaches outside it.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Profile};
use crate::functionals::local_magnetic_energy;
use crate::potential::MagneticPotential;
use crate::quadrature::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BvOptions {
    pub max_iter: usize,
    /// Relative change of c1 + c2 over one check window.
    pub tol: f64,
    /// Ascent step in grid units; defaults to 1/(2‖D‖²).
    pub step: Option<f64>,
}

impl Default for BvOptions {
    fn default() -> Self {
        BvOptions { max_iter: 20_000, tol: 1e-6, step: None }
    }
}

const CHECK_EVERY: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvResult {
    pub c1: f64,
    pub c2: f64,
    pub total: f64,
    pub iterations: usize,
    /// Discrete supremum minus the attained value.
    #[serde(rename = "gap")]
    pub primal_dual_gap: Option<f64>,
}

/// Test fields φ₁, φ₂ of the two suprema, on the support cells.
#[derive(Debug, Clone)]
pub struct DualField {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub phi1: Vec<Point>,
    pub phi2: Vec<Point>,
}

impl DualField {
    /// Largest pointwise Euclidean norm of φ₁ and φ₂.
    pub fn max_norm(&self) -> f64 {
        let n = |v: &Point| v[..self.dim].iter().map(|x| x * x).sum::<f64>().sqrt();
        self.phi1.iter().chain(&self.phi2).map(n).fold(0.0, f64::max)
    }
}

/// Per-cell masses μ₁, μ₂ with Σ[Re u div φ − A·φ Im u] vol = Σ φ·μ₁ and
/// Σ[Im u div φ + A·φ Re u] vol = Σ φ·μ₂ for every test field φ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteVectorMeasure {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl DiscreteVectorMeasure {
    pub fn total_variation(&self) -> f64 {
        let n = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let parts: Vec<f64> = self.real.iter().zip(&self.imag).map(|(a, b)| n(a) + n(b)).collect();
        pairwise_sum(&parts)
    }

    /// Masses at a grid cell, if it carries any.
    pub fn at(&self, cell: usize) -> Option<(&[f64], &[f64])> {
        let k = self.cells.binary_search(&cell).ok()?;
        Some((&self.real[k], &self.imag[k]))
    }
}

/// ∫_Ω |∇u − iAu|₁ dx for smooth u.
pub fn bv_primal_smooth(u: &ComplexField, a: &MagneticPotential, omega: &Domain) -> Result<f64> {
    Ok(local_magnetic_energy(u, a, omega, 1.0)?.value)
}

/// D_i u at a cell is (u[hi] − u[lo])·scale.
#[derive(Clone, Copy)]
struct Stencil {
    lo: usize,
    hi: usize,
    scale: f64,
}

struct Discrete {
    dim: usize,
    vol: f64,
    /// cell averages, zero off the mask
    u: Vec<Complex64>,
    a: Vec<Point>,
    /// masked cells, which carry the test fields
    support: Vec<usize>,
    stencils: Vec<[Stencil; MAX_DIM]>,
}

impl Discrete {
    fn new(u: &ComplexField, a: &MagneticPotential, omega: &Domain) -> Result<Self> {
        let dim = omega.dim();
        if u.dim() != dim || a.dim() != dim {
            let found = if u.dim() != dim { u.dim() } else { a.dim() };
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
        let support = omega.masked_cells().to_vec();
        let avg: Vec<Complex64> = support.par_iter().map(|&c| u.cell_average_on(omega, c)).collect();
        let mut vals = vec![Complex64::new(0.0, 0.0); omega.cell_count()];
        let mut av = vec![[0.0; MAX_DIM]; omega.cell_count()];
        for (&c, v) in support.iter().zip(avg) {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidField(format!("non-finite value in cell {c}")));
            }
            vals[c] = v;
            av[c] = a.eval(&omega.center(c));
        }
        let none = Stencil { lo: 0, hi: 0, scale: 0.0 };
        let stencils = support
            .iter()
            .map(|&c| {
                let mut st = [none; MAX_DIM];
                for (i, s) in st.iter_mut().enumerate().take(dim) {
                    let h = omega.widths()[i];
                    let step = |k: isize| {
                        let mut o = [0isize; MAX_DIM];
                        o[i] = k;
                        omega.masked_neighbor(c, &o[..dim])
                    };
                    *s = match (step(-1), step(1)) {
                        (Some(m), Some(p)) => Stencil { lo: m, hi: p, scale: 0.5 / h },
                        (None, Some(p)) => Stencil { lo: c, hi: p, scale: 1.0 / h },
                        (Some(m), None) => Stencil { lo: m, hi: c, scale: 1.0 / h },
                        (None, None) => Stencil { lo: c, hi: c, scale: 0.0 },
                    };
                }
                st
            })
            .collect();
        Ok(Discrete { dim, vol: omega.cell_volume(), u: vals, a: av, support, stencils })
    }

    /// g₁ = D Re u + A Im u and g₂ = D Im u − A Re u on the support.
    fn gradients(&self) -> Vec<(Point, Point)> {
        self.support
            .par_iter()
            .zip(&self.stencils)
            .map(|(&c, st)| {
                let mut g1 = [0.0; MAX_DIM];
                let mut g2 = [0.0; MAX_DIM];
                for i in 0..self.dim {
                    let d = (self.u[st[i].hi] - self.u[st[i].lo]) * st[i].scale;
                    g1[i] = d.re + self.a[c][i] * self.u[c].im;
                    g2[i] = d.im - self.a[c][i] * self.u[c].re;
                }
                (g1, g2)
            })
            .collect()
    }

    /// c₁ and c₂ objectives evaluated through div φ = −Dᵀφ.
    fn objective(&self, phi1: &[Point], phi2: &[Point]) -> (f64, f64) {
        let dim = self.dim;
        let mut div1 = vec![0.0; self.u.len()];
        let mut div2 = vec![0.0; self.u.len()];
        for (k, st) in self.stencils.iter().enumerate() {
            for i in 0..dim {
                let s = st[i];
                div1[s.lo] += s.scale * phi1[k][i];
                div1[s.hi] -= s.scale * phi1[k][i];
                div2[s.lo] += s.scale * phi2[k][i];
                div2[s.hi] -= s.scale * phi2[k][i];
            }
        }
        let parts: Vec<(f64, f64)> = self
            .support
            .par_iter()
            .enumerate()
            .map(|(k, &c)| {
                let (mut t1, mut t2) = (0.0, 0.0);
                for i in 0..dim {
                    t1 += self.a[c][i] * phi1[k][i];
                    t2 += self.a[c][i] * phi2[k][i];
                }
                let u = self.u[c];
                ((u.re * div1[c] - t1 * u.im) * self.vol, (u.im * div2[c] + t2 * u.re) * self.vol)
            })
            .collect();
        let a: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let b: Vec<f64> = parts.iter().map(|p| p.1).collect();
        (pairwise_sum(&a), pairwise_sum(&b))
    }
}

fn project(v: &mut Point, dim: usize) {
    let n = v[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 1.0 {
        v[..dim].iter_mut().for_each(|x| *x /= n);
    }
}

/// Discrete per-cell measures of u.
pub fn discrete_measures(u: &ComplexField, a: &MagneticPotential, omega: &Domain) -> Result<DiscreteVectorMeasure> {
    let d = Discrete::new(u, a, omega)?;
    let g = d.gradients();
    let dim = d.dim;
    let mass = |v: &Point| v[..dim].iter().map(|x| -x * d.vol).collect::<Vec<f64>>();
    Ok(DiscreteVectorMeasure {
        dim,
        cells: d.support.clone(),
        real: g.iter().map(|(g1, _)| mass(g1)).collect(),
        imag: g.iter().map(|(_, g2)| mass(g2)).collect(),
    })
}

/// C₁ + C₂ by projected gradient ascent on the test fields.
pub fn bv_dual(u: &ComplexField, a: &MagneticPotential, omega: &Domain, opts: &BvOptions) -> Result<BvResult> {
    Ok(bv_dual_field(u, a, omega, opts)?.0)
}

/// As [`bv_dual`], also returning the final test fields.
pub fn bv_dual_field(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    opts: &BvOptions,
) -> Result<(BvResult, DualField)> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    let d = Discrete::new(u, a, omega)?;
    let dim = d.dim;
    // rows and columns of each D_i have absolute sums ≤ 2 in grid units
    let norm2 = 4.0 * dim as f64;
    let step = opts.step.unwrap_or(1.0 / (2.0 * norm2));
    if !(step.is_finite() && step > 0.0) || step > 2.0 / norm2 {
        return Err(Error::StepSize(format!("ascent step {step} outside (0, {}]", 2.0 / norm2)));
    }
    let g = d.gradients();
    let hmin = omega.min_width();
    let n = d.support.len();
    let mut phi1 = vec![[0.0; MAX_DIM]; n];
    let mut phi2 = vec![[0.0; MAX_DIM]; n];
    let sup: f64 = {
        let norm = |v: &Point| v[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
        let parts: Vec<f64> = g.iter().map(|(a, b)| (norm(a) + norm(b)) * d.vol).collect();
        pairwise_sum(&parts)
    };
    let mut last = 0.0f64;
    let mut value = (0.0, 0.0);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        phi1.par_iter_mut().zip(phi2.par_iter_mut()).zip(&g).for_each(|((p1, p2), (g1, g2))| {
            for i in 0..dim {
                p1[i] -= step * hmin * g1[i];
                p2[i] -= step * hmin * g2[i];
            }
            project(p1, dim);
            project(p2, dim);
        });
        iterations += 1;
        if iterations % CHECK_EVERY == 0 || iterations == opts.max_iter {
            value = d.objective(&phi1, &phi2);
            let total = value.0 + value.1;
            if !total.is_finite() || total < last - 1e-12 * last.abs().max(1.0) {
                return Err(Error::StepSize(format!("ascent diverged at iteration {iterations}")));
            }
            let done = total == 0.0 || (total - last).abs() <= opts.tol * total.abs();
            last = total;
            if done {
                break;
            }
        }
    }
    if iterations % CHECK_EVERY != 0 && iterations != opts.max_iter {
        value = d.objective(&phi1, &phi2);
    }
    let (c1, c2) = (value.0.max(0.0), value.1.max(0.0));
    let result = BvResult {
        c1,
        c2,
        total: c1 + c2,
        iterations,
        primal_dual_gap: Some((sup - c1 - c2).max(0.0)),
    };
    let field = DualField { dim, cells: d.support, phi1, phi2 };
    Ok((result, field))
}

/// Σ_cells (|Re ū| + |Im ū|) vol with the cell averages the dual solver uses.
pub fn discrete_l1(u: &ComplexField, omega: &Domain) -> f64 {
    let vol = omega.cell_volume();
    let parts: Vec<f64> = omega
        .masked_cells()
        .par_iter()
        .map(|&c| {
            let v = u.cell_average_on(omega, c);
            (v.re.abs() + v.im.abs()) * vol
        })
        .collect();
    pairwise_sum(&parts)
}

/// ‖u‖_{L¹} + |Du|_A.
pub fn bv_norm(u: &ComplexField, a: &MagneticPotential, omega: &Domain, opts: &BvOptions) -> Result<f64> {
    let tv = bv_dual(u, a, omega, opts)?.total;
    Ok(discrete_l1(u, omega) + tv)
}

/// u on the masked cells of Ω, zero on the rest of W.
pub fn extend_by_zero(u: &ComplexField, omega: &Domain, w: &Domain) -> Result<ComplexField> {
    if omega.dim() != w.dim() || u.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: omega.dim() });
    }
    let tol = 1e-9 * omega.max_width().max(w.max_width());
    for i in 0..w.dim() {
        if omega.lo()[i] < w.lo()[i] - tol || omega.hi()[i] > w.hi()[i] + tol {
            return Err(Error::ContainmentViolated(format!("box of Ω leaves W along axis {i}")));
        }
    }
    if let Some(c) = omega.masked_cells().iter().find(|&&c| !w.contains(&omega.center(c)[..w.dim()])) {
        return Err(Error::ContainmentViolated(format!("cell {c} of Ω lies outside the mask of W")));
    }
    let profile = Profile::ZeroExtended { inner: Box::new(u.profile().clone()), support: Arc::new(omega.clone()) };
    let label = format!("{}_ext", u.label());
    ComplexField::new(Arc::new(w.clone()), u.wave(), profile, label)
}
