//! Complex fields u on a gridded domain.
//!
//! Every field is stored as u(x) = e^{i a·x} v(x): a plane-wave carrier with
//! wave vector `a` times a profile `v`. Differences and gradients are formed
//! on the profile, so a plane wave against the matching constant potential
//! cancels exactly in floating point.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{to_point, Domain, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::grid_csv::{self, Layout};
use crate::norm::ComplexVector;
use crate::potential::MagneticPotential;
use crate::quadrature::GaussRule;
use crate::shape::ShapeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    /// Piecewise constant on cells.
    Constant,
    /// Multilinear between cell centers.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(Complex64),
    /// offset + Σ slope_i x_i
    Linear { slope: Vec<Complex64>, offset: Complex64 },
    /// amplitude · exp(−|x − center|² / width²)
    Gaussian { center: Vec<f64>, width: f64, amplitude: Complex64 },
    /// amplitude · exp(−1 / (1 − |x − center|²/radius²)) inside the ball.
    Bump { center: Vec<f64>, radius: f64, amplitude: Complex64 },
    /// 1_E, real valued.
    Indicator(ShapeSet),
    Product(Box<Profile>, Box<Profile>),
    /// Values at the cell centers of the field's domain.
    Sampled { values: Vec<Complex64>, interp: Interp },
    /// `inner` on the masked cells of `support`, zero elsewhere.
    ZeroExtended { inner: Box<Profile>, support: Arc<Domain> },
}

impl Profile {
    fn is_smooth(&self) -> bool {
        match self {
            Profile::Constant(_) | Profile::Linear { .. } | Profile::Gaussian { .. } | Profile::Bump { .. } => true,
            Profile::Indicator(_) | Profile::ZeroExtended { .. } => false,
            Profile::Product(a, b) => a.is_smooth() && b.is_smooth(),
            Profile::Sampled { interp, .. } => *interp == Interp::Linear,
        }
    }

    fn is_analytic(&self) -> bool {
        match self {
            Profile::Sampled { .. } | Profile::Indicator(_) | Profile::ZeroExtended { .. } => false,
            Profile::Product(a, b) => a.is_analytic() && b.is_analytic(),
            _ => true,
        }
    }

    fn value(&self, domain: &Domain, x: &Point) -> Complex64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Linear { slope, offset } => {
                let mut v = *offset;
                for (i, s) in slope.iter().enumerate() {
                    v += s * x[i];
                }
                v
            }
            Profile::Gaussian { center, width, amplitude } => {
                amplitude * (-dist2(x, center) / (width * width)).exp()
            }
            Profile::Bump { center, radius, amplitude } => {
                let r2 = dist2(x, center) / (radius * radius);
                if r2 < 1.0 {
                    amplitude * (-1.0 / (1.0 - r2)).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Profile::Indicator(e) => {
                let inside = e.contains(&x[..domain.dim()]);
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
            Profile::Product(a, b) => a.value(domain, x) * b.value(domain, x),
            Profile::Sampled { values, interp } => sample(domain, values, *interp, x),
            Profile::ZeroExtended { inner, support } => {
                if support.contains(&x[..support.dim()]) {
                    inner.value(support, x)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Value and gradient of an analytic profile.
    fn jet(&self, dim: usize, x: &Point) -> Option<(Complex64, [Complex64; MAX_DIM])> {
        let zero = Complex64::new(0.0, 0.0);
        let mut g = [zero; MAX_DIM];
        match self {
            Profile::Constant(c) => Some((*c, g)),
            Profile::Linear { slope, offset } => {
                let mut v = *offset;
                for (i, s) in slope.iter().enumerate() {
                    v += s * x[i];
                    g[i] = *s;
                }
                Some((v, g))
            }
            Profile::Gaussian { center, width, amplitude } => {
                let w2 = width * width;
                let v = amplitude * (-dist2(x, center) / w2).exp();
                for i in 0..dim {
                    g[i] = v * (-2.0 * (x[i] - center[i]) / w2);
                }
                Some((v, g))
            }
            Profile::Bump { center, radius, amplitude } => {
                let r2 = dist2(x, center) / (radius * radius);
                if r2 >= 1.0 {
                    return Some((zero, g));
                }
                let q = 1.0 - r2;
                let v = amplitude * (-1.0 / q).exp();
                for i in 0..dim {
                    g[i] = v * (-2.0 * (x[i] - center[i]) / (radius * radius * q * q));
                }
                Some((v, g))
            }
            Profile::Product(a, b) => {
                let (va, ga) = a.jet(dim, x)?;
                let (vb, gb) = b.jet(dim, x)?;
                for i in 0..dim {
                    g[i] = va * gb[i] + vb * ga[i];
                }
                Some((va * vb, g))
            }
            _ => None,
        }
    }
}

fn dist2(x: &Point, c: &[f64]) -> f64 {
    c.iter().enumerate().map(|(i, ci)| (x[i] - ci).powi(2)).sum()
}

fn sample(domain: &Domain, values: &[Complex64], interp: Interp, x: &Point) -> Complex64 {
    let dim = domain.dim();
    match interp {
        Interp::Constant => match domain.locate(&x[..dim]) {
            Some(c) => values[c],
            None => Complex64::new(0.0, 0.0),
        },
        Interp::Linear => {
            let mut base = [0usize; MAX_DIM];
            let mut frac = [0.0; MAX_DIM];
            for i in 0..dim {
                let n = domain.resolution()[i];
                let t = ((x[i] - domain.lo()[i]) / domain.widths()[i] - 0.5).clamp(0.0, (n - 1) as f64);
                let j = (t.floor() as usize).min(n.saturating_sub(2));
                base[i] = j;
                frac[i] = if n == 1 { 0.0 } else { t - j as f64 };
            }
            let mut out = Complex64::new(0.0, 0.0);
            for corner in 0..(1usize << dim) {
                let mut idx = [0usize; MAX_DIM];
                let mut w = 1.0;
                for i in 0..dim {
                    let up = corner >> i & 1 == 1;
                    idx[i] = if up { (base[i] + 1).min(domain.resolution()[i] - 1) } else { base[i] };
                    w *= if up { frac[i] } else { 1.0 - frac[i] };
                }
                if w != 0.0 {
                    out += values[domain.flat_index(&idx[..dim])] * w;
                }
            }
            out
        }
    }
}

/// A complex-valued function on a gridded domain.
#[derive(Debug, Clone)]
pub struct ComplexField {
    domain: Arc<Domain>,
    wave: Point,
    profile: Profile,
    label: String,
}

impl ComplexField {
    pub fn new(domain: Arc<Domain>, wave: &[f64], profile: Profile, label: impl Into<String>) -> Result<Self> {
        let dim = domain.dim();
        if wave.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: wave.len() });
        }
        if wave.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidField("non-finite wave vector".into()));
        }
        check_profile(&profile, &domain)?;
        Ok(ComplexField { domain, wave: to_point(wave), profile, label: label.into() })
    }

    pub fn constant(domain: Arc<Domain>, c: Complex64) -> Result<Self> {
        let dim = domain.dim();
        Self::new(domain, &vec![0.0; dim], Profile::Constant(c), "constant")
    }

    /// e^{i a·x}.
    pub fn plane_wave(domain: Arc<Domain>, a: &[f64]) -> Result<Self> {
        Self::new(domain, a, Profile::Constant(Complex64::new(1.0, 0.0)), "plane_wave")
    }

    pub fn linear(domain: Arc<Domain>, slope: &[f64], offset: f64) -> Result<Self> {
        let dim = domain.dim();
        let slope = slope.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        Self::new(domain, &vec![0.0; dim], Profile::Linear { slope, offset: Complex64::new(offset, 0.0) }, "linear")
    }

    /// exp(−|x − c|²/w²).
    pub fn gaussian(domain: Arc<Domain>, center: &[f64], width: f64) -> Result<Self> {
        let dim = domain.dim();
        let profile = Profile::Gaussian { center: center.to_vec(), width, amplitude: Complex64::new(1.0, 0.0) };
        Self::new(domain, &vec![0.0; dim], profile, "gaussian")
    }

    pub fn bump(domain: Arc<Domain>, center: &[f64], radius: f64) -> Result<Self> {
        let dim = domain.dim();
        let profile = Profile::Bump { center: center.to_vec(), radius, amplitude: Complex64::new(1.0, 0.0) };
        Self::new(domain, &vec![0.0; dim], profile, "bump")
    }

    pub fn indicator(domain: Arc<Domain>, set: ShapeSet) -> Result<Self> {
        let dim = domain.dim();
        Self::new(domain, &vec![0.0; dim], Profile::Indicator(set), "indicator")
    }

    pub fn sampled(domain: Arc<Domain>, values: Vec<Complex64>, interp: Interp) -> Result<Self> {
        let dim = domain.dim();
        Self::new(domain, &vec![0.0; dim], Profile::Sampled { values, interp }, "sampled")
    }

    /// Loads `x1..xN,re,im` node data; the field's domain is the node grid.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let g = grid_csv::load(path, Layout::Field)?;
        let values = g.values.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        Self::sampled(Arc::new(g.domain), values, Interp::Linear)
    }

    /// The same field multiplied by e^{i a·x}.
    pub fn modulated(&self, a: &[f64]) -> Result<Self> {
        if a.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.len() });
        }
        let mut out = self.clone();
        for i in 0..self.dim() {
            out.wave[i] += a[i];
        }
        Ok(out)
    }

    /// Pointwise product with a real or complex profile ψ (carrier of `self` kept).
    pub fn times(&self, psi: Profile) -> Result<Self> {
        check_profile(&psi, &self.domain)?;
        let mut out = self.clone();
        out.profile = Profile::Product(Box::new(psi), Box::new(self.profile.clone()));
        out.label = format!("{}*psi", self.label);
        Ok(out)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn domain_arc(&self) -> &Arc<Domain> {
        &self.domain
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
    pub fn wave(&self) -> &[f64] {
        &self.wave[..self.dim()]
    }
    pub fn profile(&self) -> &Profile {
        &self.profile
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn is_smooth(&self) -> bool {
        self.profile.is_smooth()
    }
    pub fn is_analytic(&self) -> bool {
        self.profile.is_analytic()
    }
    pub fn is_sampled(&self) -> bool {
        matches!(self.profile, Profile::Sampled { .. })
    }
    pub fn is_indicator(&self) -> bool {
        matches!(self.profile, Profile::Indicator(_))
    }

    /// e^{i a·x}.
    #[inline]
    pub(crate) fn carrier(&self, x: &Point) -> Complex64 {
        let dim = self.dim();
        let ph: f64 = (0..dim).map(|i| self.wave[i] * x[i]).sum();
        if ph == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, ph)
        }
    }

    #[inline]
    pub(crate) fn wave_dot(&self, d: &Point) -> f64 {
        (0..self.dim()).map(|i| self.wave[i] * d[i]).sum()
    }

    #[inline]
    pub(crate) fn profile_at(&self, x: &Point) -> Complex64 {
        self.profile.value(&self.domain, x)
    }

    /// u(x) at any point; analytic presets are defined on all of ℝ^N.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let p = to_point(x);
        Ok(self.carrier(&p) * self.profile_at(&p))
    }

    /// u extended by zero outside the masked region.
    pub fn eval_extended(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        if !self.domain.contains(x) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.eval(x)
    }

    /// Masked cell whose center is `x`, if any.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let c = self.domain.locate(x)?;
        if !self.domain.is_masked(c) {
            return None;
        }
        let ctr = self.domain.center(c);
        let tol = 1e-9 * self.domain.max_width();
        (0..self.dim()).all(|i| (ctr[i] - x[i]).abs() <= tol).then_some(c)
    }

    /// ∇u(x) − iA(x)u(x).
    pub fn magnetic_gradient(&self, a: &MagneticPotential, x: &[f64]) -> Result<ComplexVector> {
        let dim = self.dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
        }
        if a.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
        }
        let p = to_point(x);
        let t = if self.is_analytic() {
            self.analytic_magnetic_gradient(a, &p).expect("analytic profile has a jet")
        } else if let Profile::Sampled { interp: Interp::Linear, .. } = self.profile {
            let cell = self.node_at(x).ok_or_else(|| Error::NodeOutsideMask(x.to_vec()))?;
            self.stencil_magnetic_gradient(a, cell)?
        } else {
            return Err(Error::NotSmooth("the magnetic gradient"));
        };
        Ok(ComplexVector(t[..dim].to_vec()))
    }

    /// e^{ia·x}(∇v + i(a − A)v) from the analytic jet.
    pub(crate) fn analytic_magnetic_gradient(&self, a: &MagneticPotential, x: &Point) -> Option<[Complex64; MAX_DIM]> {
        let dim = self.dim();
        let (v, g) = self.profile.jet(dim, x)?;
        let av = a.eval(x);
        let car = self.carrier(x);
        let mut out = [Complex64::new(0.0, 0.0); MAX_DIM];
        for i in 0..dim {
            let k = self.wave[i] - av[i];
            out[i] = car * (g[i] + Complex64::new(0.0, k) * v);
        }
        Some(out)
    }

    /// Second-order finite differences of the profile at a masked node.
    pub(crate) fn stencil_magnetic_gradient(&self, a: &MagneticPotential, cell: usize) -> Result<[Complex64; MAX_DIM]> {
        let dim = self.dim();
        let d = &self.domain;
        let x = d.center(cell);
        let node = |c: usize| self.profile_at(&d.center(c));
        let v0 = node(cell);
        let mut out = [Complex64::new(0.0, 0.0); MAX_DIM];
        let av = a.eval(&x);
        let car = self.carrier(&x);
        for i in 0..dim {
            let h = d.widths()[i];
            let step = |k: isize| {
                let mut o = vec![0isize; dim];
                o[i] = k;
                d.masked_neighbor(cell, &o)
            };
            let deriv = match (step(-1), step(1)) {
                (Some(m), Some(p)) => (node(p) - node(m)) / (2.0 * h),
                _ => match (step(1), step(2), step(-1), step(-2)) {
                    (Some(p1), Some(p2), _, _) => (-3.0 * v0 + 4.0 * node(p1) - node(p2)) / (2.0 * h),
                    (_, _, Some(m1), Some(m2)) => (3.0 * v0 - 4.0 * node(m1) + node(m2)) / (2.0 * h),
                    _ => return Err(Error::BoundaryStencil { axis: i, cell }),
                },
            };
            let k = self.wave[i] - av[i];
            out[i] = car * (deriv + Complex64::new(0.0, k) * v0);
        }
        Ok(out)
    }

    /// Average of u over a cell of the field's own grid.
    pub fn cell_average(&self, cell: usize) -> Complex64 {
        self.cell_average_on(&self.domain, cell)
    }

    /// Average of u over a cell of `grid`.
    pub fn cell_average_on(&self, grid: &Domain, cell: usize) -> Complex64 {
        let dim = grid.dim();
        match &self.profile {
            Profile::Indicator(e) if self.wave[..dim].iter().all(|&w| w == 0.0) => {
                Complex64::new(e.cell_fraction(grid, cell), 0.0)
            }
            Profile::Sampled { values, interp: Interp::Constant } if std::ptr::eq(grid, &*self.domain) => values[cell],
            Profile::ZeroExtended { inner, support } if self.wave[..dim].iter().all(|&w| w == 0.0) => {
                let ctr = grid.center(cell);
                if !support.contains(&ctr[..dim]) {
                    return Complex64::new(0.0, 0.0);
                }
                let inner_field = ComplexField {
                    domain: support.clone(),
                    wave: self.wave,
                    profile: (**inner).clone(),
                    label: String::new(),
                };
                inner_field.cell_average_on(grid, cell)
            }
            _ => {
                let rule = GaussRule::legendre(if self.is_smooth() { 4 } else { 8 });
                let lo = grid.cell_lo(cell);
                let w = grid.widths();
                let n = rule.len();
                let mut acc = Complex64::new(0.0, 0.0);
                let total = n.pow(dim as u32);
                for k in 0..total {
                    let mut x = [0.0; MAX_DIM];
                    let mut wt = 1.0;
                    let mut rest = k;
                    for i in 0..dim {
                        let j = rest % n;
                        rest /= n;
                        x[i] = lo[i] + 0.5 * w[i] * (1.0 + rule.nodes[j]);
                        wt *= 0.5 * rule.weights[j];
                    }
                    acc += self.carrier(&x) * self.profile_at(&x) * wt;
                }
                acc
            }
        }
    }

    /// ∫_Ω |Re u| + |Im u| by cell averages of a subdivided rule.
    pub fn l1_norm(&self, omega: &Domain) -> f64 {
        let dim = omega.dim();
        let rule = GaussRule::legendre(4);
        let n = rule.len();
        let total = n.pow(dim as u32);
        let vol = omega.cell_volume();
        let smooth = self.is_smooth();
        let parts: Vec<f64> = omega
            .masked_cells()
            .iter()
            .map(|&c| {
                if !smooth {
                    let a = self.cell_average_on(omega, c);
                    if a.im == 0.0 && self.is_indicator() {
                        return a.re.abs() * vol;
                    }
                }
                let lo = omega.cell_lo(c);
                let mut acc = 0.0;
                for k in 0..total {
                    let mut x = [0.0; MAX_DIM];
                    let mut wt = 1.0;
                    let mut rest = k;
                    for i in 0..dim {
                        let j = rest % n;
                        rest /= n;
                        x[i] = lo[i] + 0.5 * omega.widths()[i] * (1.0 + rule.nodes[j]);
                        wt *= 0.5 * rule.weights[j];
                    }
                    let u = self.carrier(&x) * self.profile_at(&x);
                    acc += wt * (u.re.abs() + u.im.abs());
                }
                acc * vol
            })
            .collect();
        crate::quadrature::pairwise_sum(&parts)
    }

    /// Node values at the cell centers of the field's grid (zero off the mask).
    pub fn node_values(&self) -> Vec<Complex64> {
        (0..self.domain.cell_count())
            .map(|c| {
                if self.domain.is_masked(c) {
                    let x = self.domain.center(c);
                    self.carrier(&x) * self.profile_at(&x)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }
}

fn check_profile(profile: &Profile, domain: &Domain) -> Result<()> {
    let dim = domain.dim();
    let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
    match profile {
        Profile::Constant(c) => {
            if !finite(c) {
                return Err(Error::InvalidField("non-finite constant".into()));
            }
        }
        Profile::Linear { slope, offset } => {
            if slope.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: slope.len() });
            }
            if !finite(offset) || !slope.iter().all(finite) {
                return Err(Error::InvalidField("non-finite linear coefficients".into()));
            }
        }
        Profile::Gaussian { center, width, .. } | Profile::Bump { center, radius: width, .. } => {
            if center.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: center.len() });
            }
            if !(width.is_finite() && *width > 0.0) {
                return Err(Error::InvalidField("width must be positive".into()));
            }
        }
        Profile::Indicator(e) => {
            e.validate()?;
            if let Some(d) = e.dim() {
                if d != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: d });
                }
            }
        }
        Profile::Product(a, b) => {
            check_profile(a, domain)?;
            check_profile(b, domain)?;
        }
        Profile::Sampled { values, .. } => {
            if values.len() != domain.cell_count() {
                return Err(Error::InvalidField(format!(
                    "expected {} node values, got {}",
                    domain.cell_count(),
                    values.len()
                )));
            }
            for &c in domain.masked_cells() {
                if !finite(&values[c]) {
                    return Err(Error::InvalidField(format!("non-finite value at node {c}")));
                }
            }
        }
        Profile::ZeroExtended { inner, support } => check_profile(inner, support)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Arc<Domain> {
        Arc::new(Domain::new_box(&[0.0, 0.0], &[1.0, 1.0], &[n, n]).unwrap())
    }

    #[test]
    fn plane_wave_gradient_cancels_constant_potential() {
        let d = unit_square(4);
        let a = [0.5, -2.0];
        let u = ComplexField::plane_wave(d, &a).unwrap();
        let pot = MagneticPotential::constant(&a).unwrap();
        for x in [[0.1, 0.2], [0.9, 0.33], [2.0, -5.0]] {
            let g = u.magnetic_gradient(&pot, &x).unwrap();
            assert!(g.0.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn linear_gradient_without_potential() {
        let d = Arc::new(Domain::new_box(&[0.0], &[1.0], &[8]).unwrap());
        let u = ComplexField::linear(d, &[1.0], 0.0).unwrap();
        let g = u.magnetic_gradient(&MagneticPotential::zero(1), &[0.3]).unwrap();
        assert_eq!(g.0, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn sampled_gradient_is_second_order() {
        let pot = MagneticPotential::landau(2, 1.0).unwrap();
        let mut errs = Vec::new();
        for n in [16usize, 32] {
            let d = Arc::new(Domain::new_box(&[-1.0, -1.0], &[1.0, 1.0], &[n, n]).unwrap());
            let exact = ComplexField::gaussian(d.clone(), &[0.0, 0.0], 1.0).unwrap();
            let sampled = ComplexField::sampled(d.clone(), exact.node_values(), Interp::Linear).unwrap();
            // a node near (0.5, 0)
            let c = d.locate(&[0.5, 0.01]).unwrap();
            let x = d.center(c);
            let fd = sampled.magnetic_gradient(&pot, &x[..2]).unwrap();
            let an = exact.magnetic_gradient(&pot, &x[..2]).unwrap();
            let e: f64 = fd.0.iter().zip(&an.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn boundary_nodes_use_one_sided_stencils() {
        let d = Arc::new(Domain::new_box(&[0.0], &[1.0], &[10]).unwrap());
        let exact = ComplexField::linear(d.clone(), &[2.0], 1.0).unwrap();
        let s = ComplexField::sampled(d.clone(), exact.node_values(), Interp::Linear).unwrap();
        let g = s.magnetic_gradient(&MagneticPotential::zero(1), &[0.05]).unwrap();
        assert!((g.0[0].re - 2.0).abs() < 1e-12);
        assert!(matches!(
            s.magnetic_gradient(&MagneticPotential::zero(1), &[0.1]),
            Err(Error::NodeOutsideMask(_))
        ));
        let tiny = Arc::new(Domain::new_box(&[0.0], &[1.0], &[2]).unwrap());
        let t = ComplexField::sampled(tiny, vec![Complex64::new(1.0, 0.0); 2], Interp::Linear).unwrap();
        assert!(matches!(
            t.magnetic_gradient(&MagneticPotential::zero(1), &[0.25]),
            Err(Error::BoundaryStencil { .. })
        ));
    }

    #[test]
    fn indicator_values_are_exact() {
        let d = Arc::new(Domain::new_box(&[-1.0], &[2.0], &[30]).unwrap());
        let u = ComplexField::indicator(d, ShapeSet::interval(0.0, 1.0)).unwrap();
        assert_eq!(u.eval(&[0.5]).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(u.eval(&[1.5]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(u.cell_average(15), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_non_finite_samples() {
        let d = Arc::new(Domain::new_box(&[0.0], &[1.0], &[2]).unwrap());
        let bad = vec![Complex64::new(1.0, 0.0), Complex64::new(f64::INFINITY, 0.0)];
        assert!(matches!(ComplexField::sampled(d, bad, Interp::Linear), Err(Error::InvalidField(_))));
    }
}
