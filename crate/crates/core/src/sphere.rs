//! Quadrature on the unit sphere S^{N−1} and the constant Q_{p,N}.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::norm::ComplexVector;
use crate::quadrature::{pairwise_sum, GaussRule};

/// Seed of the Monte Carlo sphere rules and of the rotation check.
pub const DEFAULT_SEED: u64 = 0x5EED;

const CIRCLE_PANELS: usize = 64;
const CIRCLE_ORDER: usize = 8;
const POLAR_NODES: usize = 128;
const AZIMUTH_NODES: usize = 256;
const MC_NODES: usize = 1 << 18;

#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    seed: Option<u64>,
}

/// |S^{N−1}| = 2π^{N/2} / Γ(N/2).
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Γ(n/2) for a positive integer n.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

impl SphereRule {
    /// The default rule: exact two-point sum (N=1), composite Gauss in the
    /// angle (N=2), Gauss × trapezoid product (N=3), symmetrized Monte Carlo
    /// (N ≥ 4).
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_seed(dim, DEFAULT_SEED)
    }

    pub fn with_seed(dim: usize, seed: u64) -> Result<Self> {
        match dim {
            0 => Err(Error::param("dim", "sphere dimension must be ≥ 1")),
            1 => Ok(SphereRule { dim, nodes: vec![-1.0, 1.0], weights: vec![1.0, 1.0], seed: None }),
            2 => Ok(Self::circle(CIRCLE_PANELS, CIRCLE_ORDER)),
            3 => Ok(Self::product3(POLAR_NODES, AZIMUTH_NODES)),
            _ => Ok(Self::monte_carlo(dim, MC_NODES, seed)),
        }
    }

    /// Composite Gauss–Legendre in the angle. Panel edges sit on multiples of
    /// π/2 so the kinks of |h₁|^p and |h₂|^p fall between panels.
    pub fn circle(panels: usize, order: usize) -> Self {
        let panels = panels.max(4).div_ceil(4) * 4;
        let rule = GaussRule::legendre(order);
        let dt = 2.0 * PI / panels as f64;
        let mut nodes = Vec::with_capacity(2 * panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let a = k as f64 * dt;
            for (t, w) in rule.mapped(a, a + dt) {
                nodes.push(t.cos());
                nodes.push(t.sin());
                weights.push(w);
            }
        }
        SphereRule { dim: 2, nodes, weights, seed: None }
    }

    /// Gauss in t = h₁ ∈ [−1, 1] (split at 0) times the trapezoid rule in the
    /// azimuth of (h₂, h₃).
    pub fn product3(polar: usize, azimuth: usize) -> Self {
        let half = GaussRule::legendre(polar.div_ceil(2));
        let dphi = 2.0 * PI / azimuth as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (a, b) in [(-1.0, 0.0), (0.0, 1.0)] {
            for (t, w) in half.mapped(a, b) {
                let r = (1.0 - t * t).max(0.0).sqrt();
                for j in 0..azimuth {
                    let phi = j as f64 * dphi;
                    nodes.extend([t, r * phi.cos(), r * phi.sin()]);
                    weights.push(w * dphi);
                }
            }
        }
        SphereRule { dim: 3, nodes, weights, seed: None }
    }

    /// Gaussian-direction samples averaged over sign flips and cyclic
    /// coordinate shifts. The symmetrization makes every quadratic
    /// polynomial integrate exactly.
    pub fn monte_carlo(dim: usize, target_nodes: usize, seed: u64) -> Self {
        let group = (1usize << dim) * dim;
        let base = target_nodes.div_ceil(group).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(base * group * dim);
        let mut v = vec![0.0; dim];
        for _ in 0..base {
            loop {
                for x in v.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 1e-8 {
                    v.iter_mut().for_each(|x| *x /= n);
                    break;
                }
            }
            for shift in 0..dim {
                for signs in 0..(1usize << dim) {
                    for i in 0..dim {
                        let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
                        nodes.push(s * v[(i + shift) % dim]);
                    }
                }
            }
        }
        let count = base * group;
        let w = sphere_area(dim) / count as f64;
        SphereRule { dim, nodes, weights: vec![w; count], seed: Some(seed) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Seed used to draw the nodes, for Monte Carlo rules.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Σ_k w_k f(h_k), pairwise-summed.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let terms: Vec<f64> = (0..self.len()).map(|k| self.weights[k] * f(self.node(k))).collect();
        pairwise_sum(&terms)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param("p", format!("p must be ≥ 1, got {p}")));
    }
    Ok(())
}

/// Tolerance of the rotation check. Even integer powers are polynomials the
/// rules integrate exactly; otherwise the integrand has kinks off the rule's
/// panel edges.
pub fn rotation_tolerance(p: f64, dim: usize) -> f64 {
    let even = p.fract() == 0.0 && (p as i64) % 2 == 0;
    if even || dim == 1 {
        1e-10
    } else if dim >= 4 {
        1e-2
    } else {
        1e-4
    }
}

/// (1/p) ∫_{S^{N−1}} |ω·h|^p dH^{N−1}(h) for a given unit ω.
pub fn q_constant_along(p: f64, rule: &SphereRule, omega: &[f64]) -> Result<f64> {
    check_p(p)?;
    if omega.len() != rule.dim {
        return Err(Error::DimensionMismatch { expected: rule.dim, found: omega.len() });
    }
    let n: f64 = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::param("omega", "direction must be a nonzero finite vector"));
    }
    let val = rule.integrate(|h| {
        let d: f64 = omega.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / n;
        pow_abs(d, p)
    });
    Ok(val / p)
}

/// Q_{p,N} with ω = e₁, checked against three random directions.
pub fn q_constant(p: f64, n: usize, rule: &SphereRule) -> Result<f64> {
    check_p(p)?;
    if rule.dim != n {
        return Err(Error::DimensionMismatch { expected: n, found: rule.dim });
    }
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let q = q_constant_along(p, rule, &e1)?;
    let tol = rotation_tolerance(p, n);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED.wrapping_add(1));
    for _ in 0..3 {
        let omega: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let qw = q_constant_along(p, rule, &omega)?;
        let dev = (qw - q).abs() / q.abs().max(1e-300);
        if dev > tol {
            return Err(Error::RotationCheck { deviation: dev, tolerance: tol });
        }
    }
    Ok(q)
}

/// Q_{p,N} with the default rule.
pub fn q_constant_default(p: f64, n: usize) -> Result<f64> {
    q_constant(p, n, &SphereRule::new(n)?)
}

/// ∫_{S^{N−1}} |v·h|_p^p dH^{N−1}(h).
pub fn directional_integral(v: &ComplexVector, p: f64, rule: &SphereRule) -> Result<f64> {
    check_p(p)?;
    if v.dim() != rule.dim {
        return Err(Error::DimensionMismatch { expected: rule.dim, found: v.dim() });
    }
    if v.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidField("non-finite vector component".into()));
    }
    Ok(rule.integrate(|h| {
        let z = v.dot_real(h);
        pow_abs(z.re, p) + pow_abs(z.im, p)
    }))
}

#[inline]
fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}
