//! Magnetic energies: fractional Gagliardo, kernel-weighted, local, and the
//! translation defect.

mod engine;
mod local;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::kernels::RadialKernel;
use crate::norm::{phase, pnorm_pow_scalar};
use crate::potential::MagneticPotential;

pub(crate) use engine::{double_integral, PairIntegrand, Weight};
pub use local::{local_magnetic_energy, translation_defect, DefectResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Gauss order per axis for cell pairs.
    pub pair_rule_order: usize,
    /// Dyadic shell levels around the diagonal.
    pub diagonal_refinement: usize,
    pub target_rel_tol: f64,
    /// Extra shell levels for integrands that jump across the diagonal.
    pub jump_extra_levels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { pair_rule_order: 4, diagonal_refinement: 12, target_rel_tol: 1e-4, jump_extra_levels: 6 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pair_rule_order < 2 {
            return Err(Error::param("pair_rule_order", "must be ≥ 2"));
        }
        if self.diagonal_refinement > 60 || self.jump_extra_levels > 60 {
            return Err(Error::param("diagonal_refinement", "at most 60 levels"));
        }
        if !(self.target_rel_tol > 0.0) {
            return Err(Error::param("target_rel_tol", "must be > 0"));
        }
        Ok(())
    }

    pub fn with_refinement(mut self, levels: usize) -> Self {
        self.diagonal_refinement = levels;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.pair_rule_order = order;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub value: f64,
    pub est_error: f64,
    pub node_pairs: u64,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub warning: Option<String>,
}

impl EnergyResult {
    pub fn tolerance_met(&self) -> bool {
        self.warning.as_deref().is_none_or(|w| !w.contains("tolerance not met"))
    }
}

/// |u(x) − e^{iθ(x,y)} u(y)|_p^p.
pub(crate) struct MagneticIntegrand<'a> {
    pub u: &'a ComplexField,
    pub a: &'a MagneticPotential,
    pub p: f64,
    pub dim: usize,
    /// Evaluate F(y, x) instead of F(x, y).
    pub swapped: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FieldSample {
    v: Complex64,
    carrier: Complex64,
}

impl MagneticIntegrand<'_> {
    #[inline]
    fn eval(&self, x: &Point, sx: &FieldSample, y: &Point, sy: &FieldSample) -> f64 {
        let mut d = [0.0; crate::domain::MAX_DIM];
        for i in 0..self.dim {
            d[i] = x[i] - y[i];
        }
        // u(x) − e^{iθ}u(y) = e^{ia·x}(v(x) − e^{i(θ − a·(x−y))} v(y))
        let beta = phase(x, y, self.a, self.dim) - self.u.wave_dot(&d);
        let rot = if beta == 0.0 { sy.v } else { Complex64::from_polar(1.0, beta) * sy.v };
        let diff = sx.v - rot;
        if diff.re == 0.0 && diff.im == 0.0 {
            return 0.0;
        }
        if self.p == 2.0 {
            return diff.norm_sqr();
        }
        pnorm_pow_scalar(sx.carrier * diff, self.p)
    }
}

impl PairIntegrand for MagneticIntegrand<'_> {
    type Sample = FieldSample;

    #[inline]
    fn sample(&self, x: &Point) -> FieldSample {
        FieldSample { v: self.u.profile_at(x), carrier: self.u.carrier(x) }
    }

    #[inline]
    fn pair(&self, x: &Point, sx: &FieldSample, y: &Point, sy: &FieldSample) -> f64 {
        if self.swapped {
            self.eval(y, sy, x, sx)
        } else {
            self.eval(x, sx, y, sy)
        }
    }

    fn smooth(&self) -> bool {
        self.u.is_smooth()
    }

    fn vanishing_order(&self) -> f64 {
        self.p
    }
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", format!("s must lie in (0, 1), got {s}")));
    }
    Ok(())
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param("p", format!("p must be ≥ 1, got {p}")));
    }
    Ok(())
}

pub(crate) fn check_dims(u: &ComplexField, a: &MagneticPotential, omega: &Domain) -> Result<()> {
    let n = omega.dim();
    for d in [u.dim(), a.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    Ok(())
}

/// ∫_Ω∫_Ω |u(x) − e^{iθ}u(y)|_p^p / |x−y|^{N+ps} dx dy (the p-th power).
pub fn fractional_magnetic_energy(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    s: f64,
    p: f64,
    q: &QuadratureSpec,
) -> Result<EnergyResult> {
    fractional_energy_ordered(u, a, omega, s, p, q, false)
}

/// As [`fractional_magnetic_energy`], with an explicit choice of which
/// variable plays x in the integrand.
pub fn fractional_energy_ordered(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    s: f64,
    p: f64,
    q: &QuadratureSpec,
    swapped: bool,
) -> Result<EnergyResult> {
    check_s(s)?;
    check_p(p)?;
    check_dims(u, a, omega)?;
    let n = omega.dim();
    let integrand = MagneticIntegrand { u, a, p, dim: n, swapped };
    double_integral(&integrand, omega, Weight::Power(-(n as f64) - p * s), q)
}

/// ∫_Ω∫_Ω |u(x) − e^{iθ}u(y)|_p^p / |x−y|^p · ρ(|x−y|) dx dy.
pub fn weighted_difference_energy(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    rho: &RadialKernel,
    p: f64,
    q: &QuadratureSpec,
) -> Result<EnergyResult> {
    check_p(p)?;
    check_dims(u, a, omega)?;
    let cell = omega.max_width();
    if rho.support_radius() < cell {
        return Err(Error::UnderResolvedKernel { support: rho.support_radius(), cell });
    }
    let integrand = MagneticIntegrand { u, a, p, dim: omega.dim(), swapped: false };
    double_integral(&integrand, omega, Weight::Kernel { rho, p }, q)
}
