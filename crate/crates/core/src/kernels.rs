//! Radial kernels ρ, their moment conditions, and mollification.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{to_point, Domain, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Interp};
use crate::quadrature::{adaptive, adaptive_origin_power, pairwise_sum, GaussRule};
use crate::sphere::sphere_area;

/// C² quintic smoothstep cutoff: 1 on [0, 1], 0 on [2, ∞).
pub fn psi0(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let x = t - 1.0;
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// p(1−s) r^{p−ps−N} ψ₀(r/r_Ω)
    Bbm { s: f64, p: f64, r_omega: f64, dim: usize },
    /// Piecewise-linear through (r, ρ) nodes, zero past the last node.
    Tabulated { r: Vec<f64>, rho: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialKernel {
    kind: KernelKind,
    support_radius: f64,
}

pub const TAIL_RADII: [f64; 3] = [0.1, 0.5, 1.0];
pub const BETAS: [f64; 2] = [0.5, 1.0];

const MOMENT_TOL: f64 = 1e-13;

/// ρ(r) = p(1−s) r^{p−ps−N} ψ₀(r/r_Ω).
pub fn bbm_kernel(s: f64, p: f64, r_omega: f64, dim: usize) -> Result<RadialKernel> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", format!("s must lie in (0, 1), got {s}")));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param("p", format!("p must be ≥ 1, got {p}")));
    }
    if !(r_omega.is_finite() && r_omega > 0.0) {
        return Err(Error::param("r_omega", format!("must be positive, got {r_omega}")));
    }
    if dim == 0 {
        return Err(Error::param("dim", "must be ≥ 1"));
    }
    Ok(RadialKernel { kind: KernelKind::Bbm { s, p, r_omega, dim }, support_radius: 2.0 * r_omega })
}

impl RadialKernel {
    pub fn tabulated(r: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if r.len() != rho.len() || r.len() < 2 {
            return Err(Error::param("kernel", "need at least two (r, rho) nodes of equal count"));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("kernel", "radii must be nonnegative and increasing"));
        }
        if let Some((k, &v)) = rho.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::NegativeKernel { r: r[k], value: v });
        }
        let support = *r.last().unwrap();
        Ok(RadialKernel { kind: KernelKind::Tabulated { r, rho }, support_radius: support })
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// s of a BBM kernel.
    pub fn s(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Bbm { s, .. } => Some(s),
            _ => None,
        }
    }

    /// Exponent κ with ρ(r) ~ r^κ as r → 0.
    pub fn origin_exponent(&self) -> f64 {
        match self.kind {
            KernelKind::Bbm { s, p, dim, .. } => p - p * s - dim as f64,
            KernelKind::Tabulated { .. } => 0.0,
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match &self.kind {
            KernelKind::Bbm { s, p, r_omega, dim } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let cut = psi0(r / r_omega);
                if cut == 0.0 {
                    return 0.0;
                }
                p * (1.0 - s) * r.powf(p - p * s - *dim as f64) * cut
            }
            KernelKind::Tabulated { r: rs, rho } => {
                if r < rs[0] || r > rs[rs.len() - 1] {
                    return 0.0;
                }
                let k = rs.partition_point(|&x| x <= r).clamp(1, rs.len() - 1);
                let t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
                rho[k - 1] + t * (rho[k] - rho[k - 1])
            }
        }
    }

    /// Points where the kernel stops being smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            KernelKind::Bbm { r_omega, .. } => vec![*r_omega, 2.0 * r_omega],
            KernelKind::Tabulated { r, .. } => r.clone(),
        }
    }

    /// ∫_a^b ρ(r) r^{N−1+β} dr by adaptive quadrature.
    pub fn moment(&self, a: f64, b: f64, n: usize, beta: f64) -> f64 {
        let b = b.min(self.support_radius);
        if !(b > a) {
            return 0.0;
        }
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints().into_iter().filter(|&c| c > a && c < b));
        cuts.push(b);
        let power = (n as f64) - 1.0 + beta;
        let f = |r: f64| self.eval(r) * r.powf(power);
        let gamma = self.origin_exponent() + power;
        let mut parts = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let piece = match self.kind {
                KernelKind::Bbm { s, p, r_omega, .. } if w[0] == 0.0 => {
                    adaptive_origin_power(|r| p * (1.0 - s) * psi0(r / r_omega), w[1], gamma, 0.0, MOMENT_TOL)
                }
                _ => adaptive(f, w[0], w[1], 0.0, MOMENT_TOL),
            };
            parts.push(piece.value);
        }
        pairwise_sum(&parts)
    }

    /// Samples ρ on a log grid and at every tabulated node.
    fn check_nonnegative(&self) -> Result<()> {
        let top = if self.support_radius.is_finite() { self.support_radius } else { 1e3 };
        let mut rs: Vec<f64> = (0..=400).map(|k| top * 10f64.powf(-6.0 * (1.0 - k as f64 / 400.0))).collect();
        rs.extend(self.breakpoints());
        for r in rs {
            let v = self.eval(r);
            if !(v >= 0.0) {
                return Err(Error::NegativeKernel { r, value: v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KernelMoments {
    pub s: Option<f64>,
    /// ∫₀^∞ ρ r^{N−1}
    pub total_moment: f64,
    /// ∫₀^{r_Ω} ρ r^{N−1}, BBM kernels only
    pub core_moment: Option<f64>,
    /// ∫_δ^∞ ρ r^{N−1} for δ in `TAIL_RADII`
    pub tails: Vec<f64>,
    /// ∫₀^δ ρ r^{N−1+β}, indexed [β][δ] over `BETAS` × `TAIL_RADII`
    pub beta_moments: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KernelReport {
    pub dim: usize,
    pub kernels: Vec<KernelMoments>,
    pub tails_decreasing: bool,
    pub beta_moments_decreasing: bool,
    pub convergent: bool,
}

impl KernelReport {
    /// Columns `s,total_moment,tail_0.1,tail_0.5,tail_1.0,beta_moment`; the
    /// β-moment column is β = 1, δ = 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,total_moment,tail_0.1,tail_0.5,tail_1.0,beta_moment\n");
        for k in &self.kernels {
            let s = k.s.map(|v| format!("{v}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{s},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                k.total_moment, k.tails[0], k.tails[1], k.tails[2], k.beta_moments[1][2]
            );
        }
        out
    }
}

/// Moments and tail decay of a kernel sequence.
pub fn validate_kernel_sequence(kernels: &[RadialKernel], n: usize) -> Result<KernelReport> {
    if kernels.is_empty() {
        return Err(Error::param("kernels", "need at least one kernel"));
    }
    let mut rows = Vec::with_capacity(kernels.len());
    for k in kernels {
        if let KernelKind::Bbm { dim, .. } = k.kind {
            if dim != n {
                return Err(Error::DimensionMismatch { expected: n, found: dim });
            }
        }
        k.check_nonnegative()?;
        let top = k.support_radius;
        let total = k.moment(0.0, top, n, 0.0);
        let core = match k.kind {
            KernelKind::Bbm { r_omega, .. } => Some(k.moment(0.0, r_omega, n, 0.0)),
            _ => None,
        };
        let tails = TAIL_RADII.iter().map(|&d| k.moment(d, top, n, 0.0)).collect();
        let beta_moments = BETAS
            .iter()
            .map(|&b| TAIL_RADII.iter().map(|&d| k.moment(0.0, d, n, b)).collect())
            .collect();
        rows.push(KernelMoments { s: k.s(), total_moment: total, core_moment: core, tails, beta_moments });
    }
    let slack = 1e-14;
    let tails_decreasing = rows
        .windows(2)
        .all(|w| (0..TAIL_RADII.len()).all(|j| w[1].tails[j] <= w[0].tails[j] + slack));
    let beta_moments_decreasing = rows.windows(2).all(|w| {
        (0..BETAS.len()).all(|b| (0..TAIL_RADII.len()).all(|j| w[1].beta_moments[b][j] <= w[0].beta_moments[b][j] + slack))
    });
    Ok(KernelReport {
        dim: n,
        kernels: rows,
        tails_decreasing,
        beta_moments_decreasing,
        convergent: tails_decreasing,
    })
}

/// The normalized bump η(x) = c_N exp(−1/(1−|x|²)) on B(0,1), scaled by ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    dim: usize,
    eps: f64,
    c_n: f64,
}

impl Mollifier {
    pub fn new(dim: usize, eps: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param("dim", format!("must be in 1..={MAX_DIM}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::param("eps", format!("must be positive, got {eps}")));
        }
        let radial = adaptive(|r| bump(r * r) * r.powi(dim as i32 - 1), 0.0, 1.0, 1e-16, 1e-14).value;
        let c_n = 1.0 / (sphere_area(dim) * radial);
        Ok(Mollifier { dim, eps, c_n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    /// Normalizing constant c_N of the unit-scale bump.
    pub fn normalization(&self) -> f64 {
        self.c_n
    }

    /// η(x) at unit scale.
    pub fn eta(&self, x: &[f64]) -> f64 {
        self.c_n * bump(x.iter().map(|v| v * v).sum())
    }

    /// ε^{−N} η(x/ε).
    #[inline]
    pub fn eval_scaled(&self, x: &Point) -> f64 {
        let r2: f64 = (0..self.dim).map(|i| x[i] * x[i]).sum::<f64>() / (self.eps * self.eps);
        self.c_n * bump(r2) / self.eps.powi(self.dim as i32)
    }
}

#[inline]
fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

const MOLLIFY_ORDER: usize = 8;

/// u_ε(x) with u extended by zero outside its mask.
///
/// The cells met by the box [x−ε, x+ε] are clipped to it, split into pieces
/// no wider than ε/2 and integrated by Gauss–Legendre of order 8. The result
/// is divided by the same rule applied to η alone, so constants are
/// reproduced to rounding away from the boundary.
pub fn mollify_at(u: &ComplexField, m: &Mollifier, x: &[f64]) -> Result<Complex64> {
    let d = u.domain();
    check_resolution(d, m)?;
    if x.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), found: x.len() });
    }
    Ok(mollify_point(u, m, &to_point(x), &GaussRule::legendre(MOLLIFY_ORDER)))
}

/// u_ε sampled at every masked cell center of u's grid.
pub fn mollify(u: &ComplexField, m: &Mollifier) -> Result<ComplexField> {
    let d = u.domain();
    check_resolution(d, m)?;
    let rule = GaussRule::legendre(MOLLIFY_ORDER);
    let values: Vec<Complex64> = (0..d.cell_count())
        .into_par_iter()
        .map(|c| {
            if d.is_masked(c) {
                mollify_point(u, m, &d.center(c), &rule)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(ComplexField::sampled(Arc::clone(u.domain_arc()), values, Interp::Linear)?
        .with_label(format!("{}_eps{}", u.label(), m.eps())))
}

fn check_resolution(d: &Domain, m: &Mollifier) -> Result<()> {
    if m.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), found: m.dim() });
    }
    let half = 0.5 * d.max_width();
    if m.eps() < half {
        return Err(Error::UnresolvedMollifier { eps: m.eps(), half_width: half });
    }
    Ok(())
}

fn mollify_point(u: &ComplexField, m: &Mollifier, x: &Point, rule: &GaussRule) -> Complex64 {
    let d = u.domain();
    let dim = d.dim();
    let eps = m.eps();
    // lattice index range per axis, lattice extended past the box
    let mut kmin = [0i64; MAX_DIM];
    let mut kmax = [0i64; MAX_DIM];
    let mut splits = [1usize; MAX_DIM];
    for i in 0..dim {
        let h = d.widths()[i];
        kmin[i] = ((x[i] - eps - d.lo()[i]) / h).floor() as i64;
        kmax[i] = ((x[i] + eps - d.lo()[i]) / h).ceil() as i64 - 1;
        splits[i] = (2.0 * h / eps).ceil().max(1.0) as usize;
    }
    let n = rule.len();
    let mut num = Vec::new();
    let mut den = Vec::new();
    let mut k = kmin;
    'cells: loop {
        // cell with lattice index k, clipped to the ball's bounding box
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        let mut in_box = true;
        let mut idx = [0usize; MAX_DIM];
        for i in 0..dim {
            let h = d.widths()[i];
            let a = d.lo()[i] + k[i] as f64 * h;
            lo[i] = a.max(x[i] - eps);
            hi[i] = (a + h).min(x[i] + eps);
            if k[i] < 0 || k[i] >= d.resolution()[i] as i64 {
                in_box = false;
            } else {
                idx[i] = k[i] as usize;
            }
        }
        let masked = in_box && d.is_masked(d.flat_index(&idx[..dim]));
        let mut acc_u = Complex64::new(0.0, 0.0);
        let mut acc_w = 0.0;
        let pieces: usize = splits[..dim].iter().product();
        let pts = n.pow(dim as u32);
        for piece in 0..pieces {
            let mut plo = [0.0; MAX_DIM];
            let mut pw = [0.0; MAX_DIM];
            let mut rest = piece;
            for i in 0..dim {
                let j = rest % splits[i];
                rest /= splits[i];
                pw[i] = (hi[i] - lo[i]) / splits[i] as f64;
                plo[i] = lo[i] + j as f64 * pw[i];
            }
            for q in 0..pts {
                let mut y = [0.0; MAX_DIM];
                let mut rel = [0.0; MAX_DIM];
                let mut w = 1.0;
                let mut rest = q;
                for i in 0..dim {
                    let j = rest % n;
                    rest /= n;
                    y[i] = plo[i] + 0.5 * pw[i] * (1.0 + rule.nodes[j]);
                    rel[i] = x[i] - y[i];
                    w *= 0.5 * pw[i] * rule.weights[j];
                }
                let eta = m.eval_scaled(&rel) * w;
                if eta == 0.0 {
                    continue;
                }
                acc_w += eta;
                if masked {
                    acc_u += u.carrier(&y) * u.profile_at(&y) * eta;
                }
            }
        }
        num.push(acc_u);
        den.push(acc_w);
        // advance the lattice index
        for i in 0..dim {
            if k[i] < kmax[i] {
                k[i] += 1;
                continue 'cells;
            }
            k[i] = kmin[i];
        }
        break;
    }
    let re: Vec<f64> = num.iter().map(|z| z.re).collect();
    let im: Vec<f64> = num.iter().map(|z| z.im).collect();
    let z = pairwise_sum(&den);
    Complex64::new(pairwise_sum(&re) / z, pairwise_sum(&im) / z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::ShapeSet;

    #[test]
    fn first_moment_closed_form() {
        let k = bbm_kernel(0.5, 2.0, 1.0, 1).unwrap();
        assert!((k.moment(0.0, 1.0, 1, 0.0) - 1.0).abs() < 1e-10);
        let k = bbm_kernel(0.75, 1.0, 2.0, 1).unwrap();
        assert!((k.moment(0.0, 2.0, 1, 0.0) - 2f64.powf(0.25)).abs() < 1e-10);
        let k = bbm_kernel(0.99, 1.0, 1.0, 3).unwrap();
        assert!((k.moment(0.0, 1.0, 3, 0.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bad_parameters() {
        assert!(bbm_kernel(1.0, 2.0, 1.0, 1).is_err());
        assert!(bbm_kernel(0.5, 2.0, 0.0, 1).is_err());
        assert!(matches!(
            RadialKernel::tabulated(vec![0.0, 1.0], vec![1.0, -0.5]),
            Err(Error::NegativeKernel { .. })
        ));
    }

    #[test]
    fn psi0_is_monotone_cutoff() {
        assert_eq!(psi0(0.3), 1.0);
        assert_eq!(psi0(2.5), 0.0);
        assert!((psi0(1.5) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for k in 0..=100 {
            let v = psi0(1.0 + k as f64 / 100.0);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn mollifier_unit_mass() {
        for n in 1..=3 {
            let m = Mollifier::new(n, 1.0).unwrap();
            let radial = adaptive(|r| m.eta(&[r]) * r.powi(n as i32 - 1), 0.0, 1.0, 1e-16, 1e-14).value;
            assert!((radial * sphere_area(n) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mollify_constant_and_jump() {
        let d = Arc::new(Domain::new_box(&[-1.0], &[2.0], &[30]).unwrap());
        let c = ComplexField::constant(d.clone(), Complex64::new(2.5, -1.0)).unwrap();
        let m = Mollifier::new(1, 0.25).unwrap();
        let v = mollify_at(&c, &m, &[0.55]).unwrap();
        assert!((v - Complex64::new(2.5, -1.0)).norm() < 1e-10);
        let ind = ComplexField::indicator(d.clone(), ShapeSet::interval(0.0, 1.0)).unwrap();
        let half = mollify_at(&ind, &m, &[0.0]).unwrap();
        assert!((half.re - 0.5).abs() < 1e-10, "{half}");
        let tiny = Mollifier::new(1, 0.04).unwrap();
        assert!(matches!(mollify(&ind, &tiny), Err(Error::UnresolvedMollifier { .. })));
    }
}
