//! Double integrals ∫_Ω∫_Ω F(x, y) W(|x − y|) dx dy over masked cell pairs.
//!
//! Far pairs use tensor Gauss rules whose order drops with distance. Pairs of
//! touching cells are rewritten in h = y − x as ∫ W(|h|) G(h) dh with
//! G(h) = ∫ F(x, x + h) dx over the overlap of the two cells. The h-box is
//! split into sub-boxes at the kinks of G; those with a corner at h = 0 are
//! cut into pyramids h = t·v(ξ) and integrated in t over dyadic shells down
//! to t_L = 2^{−L}, with the remaining [0, t_L] filled by a power law
//! t^{α−1}(g₀ + g₁ t) fitted at t_L and t_L/2.

use std::time::Instant;

use rayon::prelude::*;

use crate::domain::{Domain, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::kernels::RadialKernel;
use crate::quadrature::{pairwise_sum, GaussRule};

use super::{EnergyResult, QuadratureSpec};

pub(crate) trait PairIntegrand: Sync {
    type Sample: Copy + Send + Sync;

    fn sample(&self, x: &Point) -> Self::Sample;

    /// F(x, y) ≥ 0.
    fn pair(&self, x: &Point, sx: &Self::Sample, y: &Point, sy: &Self::Sample) -> f64;

    /// Whether F is smooth off the diagonal and vanishes there like |x−y|^order.
    fn smooth(&self) -> bool;

    /// Vanishing order of F on the diagonal for smooth data.
    fn vanishing_order(&self) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Weight<'a> {
    /// r^exponent
    Power(f64),
    /// ρ(r) / r^p
    Kernel { rho: &'a RadialKernel, p: f64 },
}

impl Weight<'_> {
    #[inline]
    fn eval_r2(&self, r2: f64) -> f64 {
        match self {
            Weight::Power(e) => r2.powf(0.5 * e),
            Weight::Kernel { rho, p } => {
                let r = r2.sqrt();
                let v = rho.eval(r);
                if v == 0.0 {
                    0.0
                } else {
                    v / r.powf(*p)
                }
            }
        }
    }

    /// κ with W(r) ~ r^κ at the origin.
    fn origin_exponent(&self) -> f64 {
        match self {
            Weight::Power(e) => *e,
            Weight::Kernel { rho, p } => rho.origin_exponent() - p,
        }
    }

    fn support(&self) -> f64 {
        match self {
            Weight::Power(_) => f64::INFINITY,
            Weight::Kernel { rho, .. } => rho.support_radius(),
        }
    }
}

/// Chebyshev cell distance up to which far pairs keep the full order, and
/// up to which they use the two-point rule; beyond, the midpoint rule.
fn far_tiers(dim: usize) -> (usize, usize) {
    match dim {
        1 => (usize::MAX, usize::MAX),
        2 => (4, 24),
        _ => (2, 8),
    }
}

/// Gauss points of one cell relative to its lower corner.
struct CellRule {
    offsets: Vec<Point>,
    weights: Vec<f64>,
}

impl CellRule {
    fn new(order: usize, widths: &[f64]) -> Self {
        let dim = widths.len();
        let g = GaussRule::legendre(order);
        let n = g.len();
        let total = n.pow(dim as u32);
        let vol: f64 = widths.iter().product();
        let mut offsets = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for k in 0..total {
            let mut p = [0.0; MAX_DIM];
            let mut w = vol;
            let mut rest = k;
            for i in 0..dim {
                let j = rest % n;
                rest /= n;
                p[i] = 0.5 * widths[i] * (1.0 + g.nodes[j]);
                w *= 0.5 * g.weights[j];
            }
            offsets.push(p);
            weights.push(w);
        }
        CellRule { offsets, weights }
    }
}

struct Tier<S> {
    rule: CellRule,
    points: Vec<Vec<Point>>,
    samples: Vec<Vec<S>>,
}

fn build_tier<I: PairIntegrand>(integrand: &I, omega: &Domain, order: usize) -> Tier<I::Sample> {
    let rule = CellRule::new(order, omega.widths());
    let (points, samples): (Vec<Vec<Point>>, Vec<Vec<I::Sample>>) = omega
        .masked_cells()
        .par_iter()
        .map(|&c| {
            let lo = omega.cell_lo(c);
            let pts: Vec<Point> = rule
                .offsets
                .iter()
                .map(|o| {
                    let mut p = lo;
                    for i in 0..omega.dim() {
                        p[i] += o[i];
                    }
                    p
                })
                .collect();
            let s = pts.iter().map(|p| integrand.sample(p)).collect();
            (pts, s)
        })
        .unzip();
    Tier { rule, points, samples }
}

fn far_pair<I: PairIntegrand>(
    integrand: &I,
    weight: Weight<'_>,
    t: &Tier<I::Sample>,
    a: usize,
    b: usize,
    dim: usize,
) -> (f64, u64) {
    let (px, sx) = (&t.points[a], &t.samples[a]);
    let (py, sy) = (&t.points[b], &t.samples[b]);
    let w = &t.rule.weights;
    let mut acc = 0.0;
    for i in 0..px.len() {
        let mut inner = 0.0;
        for j in 0..py.len() {
            let f = integrand.pair(&px[i], &sx[i], &py[j], &sy[j]);
            if f != 0.0 {
                let mut r2 = 0.0;
                for k in 0..dim {
                    let d = px[i][k] - py[j][k];
                    r2 += d * d;
                }
                inner += w[j] * f * weight.eval_r2(r2);
            }
        }
        acc += w[i] * inner;
    }
    (acc, (px.len() * py.len()) as u64)
}

struct Partial {
    value: f64,
    error: f64,
    evals: u64,
    unsnapped: bool,
}

/// ∫_Ω∫_Ω F(x,y) W(|x−y|) dx dy.
pub(crate) fn double_integral<I: PairIntegrand>(
    integrand: &I,
    omega: &Domain,
    weight: Weight<'_>,
    spec: &QuadratureSpec,
) -> Result<EnergyResult> {
    spec.validate()?;
    let start = Instant::now();
    let dim = omega.dim();
    let order = spec.pair_rule_order;
    let (full_reach, mid_reach) = far_tiers(dim);
    let tiers = [
        build_tier(integrand, omega, order),
        build_tier(integrand, omega, order.min(2)),
        build_tier(integrand, omega, 1),
        build_tier(integrand, omega, 2 * order),
    ];
    let smooth = integrand.smooth();
    let near = NearRule::new(integrand, weight, spec, omega.widths(), smooth);
    let support = weight.support();
    let masked = omega.masked_cells();
    let idx: Vec<[usize; MAX_DIM]> = masked.iter().map(|&c| omega.multi_index(c)).collect();

    let partials: Vec<Partial> = (0..masked.len())
        .into_par_iter()
        .map(|a| -> Result<Partial> {
            let mut vals = Vec::with_capacity(masked.len());
            let mut err = 0.0;
            let mut evals = 0u64;
            let mut unsnapped = false;
            let lo_a = omega.cell_lo(masked[a]);
            for b in 0..masked.len() {
                let mut cheb = 0usize;
                let mut gap2 = 0.0;
                let mut off = [0isize; MAX_DIM];
                for i in 0..dim {
                    let d = idx[b][i] as isize - idx[a][i] as isize;
                    off[i] = d;
                    cheb = cheb.max(d.unsigned_abs());
                    let g = (d.unsigned_abs() as f64 - 1.0).max(0.0) * omega.widths()[i];
                    gap2 += g * g;
                }
                if gap2 > support * support {
                    continue;
                }
                if cheb <= 1 {
                    let r = near.pair(&lo_a, &off[..dim])?;
                    vals.push(r.value);
                    err += r.error;
                    evals += r.evals;
                    unsnapped |= r.unsnapped;
                    continue;
                }
                let k = if cheb <= full_reach {
                    0
                } else if cheb <= mid_reach {
                    1
                } else {
                    2
                };
                let (acc, n) = far_pair(integrand, weight, &tiers[k], a, b, dim);
                evals += n;
                // first ring of each tier: compare with the next rule up
                if cheb == 2 || cheb == full_reach.saturating_add(1) || cheb == mid_reach.saturating_add(1) {
                    let (finer, n) = far_pair(integrand, weight, &tiers[[3, 0, 1][k]], a, b, dim);
                    evals += n;
                    err += (acc - finer).abs();
                }
                vals.push(acc);
            }
            Ok(Partial { value: pairwise_sum(&vals), error: err, evals, unsnapped })
        })
        .collect::<Result<Vec<_>>>()?;

    let values: Vec<f64> = partials.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = partials.iter().map(|p| p.error).collect();
    let value = pairwise_sum(&values);
    let mut est_error = pairwise_sum(&errors) + 1e-13 * value.abs();
    let unsnapped = partials.iter().any(|p| p.unsnapped);
    if !smooth {
        // the shell model was derived for smooth data; keep a cushion
        est_error *= 2.0;
    }
    let evals = partials.iter().map(|p| p.evals).sum();
    let mut result = EnergyResult {
        value,
        est_error,
        node_pairs: evals,
        wall_time_s: start.elapsed().as_secs_f64(),
        warning: None,
    };
    if unsnapped {
        result.warning = Some("diagonal power law did not match a model exponent".into());
    }
    if est_error > spec.target_rel_tol * value.abs() && est_error > 1e-14 {
        let msg = format!(
            "tolerance not met: est_error {:.3e} > {:.1e} relative",
            est_error, spec.target_rel_tol
        );
        result.warning = Some(match result.warning {
            Some(w) => format!("{w}; {msg}"),
            None => msg,
        });
    }
    Ok(result)
}

struct NearResult {
    value: f64,
    error: f64,
    evals: u64,
    unsnapped: bool,
}

/// Quadrature for pairs of cells that touch (including a cell with itself).
struct NearRule<'a, I: PairIntegrand> {
    integrand: &'a I,
    weight: Weight<'a>,
    dim: usize,
    widths: Point,
    h_rule: GaussRule,
    h_check: GaussRule,
    x_rule: GaussRule,
    levels: usize,
    kappa: f64,
    smooth: bool,
}

impl<'a, I: PairIntegrand> NearRule<'a, I> {
    fn new(integrand: &'a I, weight: Weight<'a>, spec: &QuadratureSpec, widths: &[f64], smooth: bool) -> Self {
        let mut w = [0.0; MAX_DIM];
        w[..widths.len()].copy_from_slice(widths);
        let levels = spec.diagonal_refinement + if smooth { 0 } else { spec.jump_extra_levels };
        NearRule {
            integrand,
            weight,
            dim: widths.len(),
            widths: w,
            h_rule: GaussRule::legendre(spec.pair_rule_order),
            h_check: GaussRule::legendre(2 * spec.pair_rule_order),
            x_rule: GaussRule::legendre(if smooth { 2 } else { spec.pair_rule_order }),
            levels,
            kappa: weight.origin_exponent(),
            smooth,
        }
    }

    /// G(h) = ∫ F(x, x+h) dx over {x ∈ C_a, x + h ∈ C_b}.
    fn g(&self, lo_a: &Point, off: &[isize], h: &Point, evals: &mut u64) -> f64 {
        let dim = self.dim;
        let mut a = [0.0; MAX_DIM];
        let mut len = [0.0; MAX_DIM];
        for i in 0..dim {
            let w = self.widths[i];
            let yb = lo_a[i] + off[i] as f64 * w;
            let lo = lo_a[i].max(yb - h[i]);
            let hi = (lo_a[i] + w).min(yb + w - h[i]);
            if hi <= lo {
                return 0.0;
            }
            a[i] = lo;
            len[i] = hi - lo;
        }
        let n = self.x_rule.len();
        let total = n.pow(dim as u32);
        let mut acc = 0.0;
        for k in 0..total {
            let mut x = [0.0; MAX_DIM];
            let mut y = [0.0; MAX_DIM];
            let mut w = 1.0;
            let mut rest = k;
            for i in 0..dim {
                let j = rest % n;
                rest /= n;
                x[i] = a[i] + 0.5 * len[i] * (1.0 + self.x_rule.nodes[j]);
                y[i] = x[i] + h[i];
                w *= 0.5 * len[i] * self.x_rule.weights[j];
            }
            let sx = self.integrand.sample(&x);
            let sy = self.integrand.sample(&y);
            acc += w * self.integrand.pair(&x, &sx, &y, &sy);
        }
        *evals += total as u64;
        acc
    }

    fn pair(&self, lo_a: &Point, off: &[isize]) -> Result<NearResult> {
        let dim = self.dim;
        let n_adj = off.iter().filter(|&&o| o != 0).count();
        let mut out = NearResult { value: 0.0, error: 0.0, evals: 0, unsnapped: false };
        let mut parts = Vec::new();
        for sub in 0..(1usize << dim) {
            // interval choice per axis: k = 0 → [o−1, o]·w, k = 1 → [o, o+1]·w
            let mut touches = true;
            let mut sigma = [0.0; MAX_DIM];
            let mut box_lo = [0.0; MAX_DIM];
            for i in 0..dim {
                let k = (sub >> i & 1) as isize;
                let w = self.widths[i];
                box_lo[i] = (off[i] + k - 1) as f64 * w;
                let touching = match off[i] {
                    0 => true,
                    1 => k == 0,
                    _ => k == 1,
                };
                touches &= touching;
                sigma[i] = if box_lo[i] < 0.0 { -1.0 } else { 1.0 };
            }
            if touches {
                for j in 0..dim {
                    let (v, e, u) = self.pyramid(lo_a, off, &sigma, j, n_adj, &mut out.evals)?;
                    parts.push(v);
                    out.error += e;
                    out.unsnapped |= u;
                }
            } else {
                parts.push(self.tensor_box(lo_a, off, &box_lo, &mut out.evals));
            }
        }
        out.value = pairwise_sum(&parts);
        Ok(out)
    }

    /// Tensor Gauss over an h-box away from the origin.
    fn tensor_box(&self, lo_a: &Point, off: &[isize], box_lo: &Point, evals: &mut u64) -> f64 {
        let dim = self.dim;
        let n = self.h_rule.len();
        let total = n.pow(dim as u32);
        let mut acc = 0.0;
        for k in 0..total {
            let mut h = [0.0; MAX_DIM];
            let mut w = 1.0;
            let mut rest = k;
            let mut r2 = 0.0;
            for i in 0..dim {
                let j = rest % n;
                rest /= n;
                let wi = self.widths[i];
                h[i] = box_lo[i] + 0.5 * wi * (1.0 + self.h_rule.nodes[j]);
                w *= 0.5 * wi * self.h_rule.weights[j];
                r2 += h[i] * h[i];
            }
            let g = self.g(lo_a, off, &h, evals);
            if g != 0.0 {
                acc += w * g * self.weight.eval_r2(r2);
            }
        }
        acc
    }

    /// Pyramid j of the origin-touching sub-box with reflection `sigma`.
    fn pyramid(
        &self,
        lo_a: &Point,
        off: &[isize],
        sigma: &Point,
        j: usize,
        n_adj: usize,
        evals: &mut u64,
    ) -> Result<(f64, f64, bool)> {
        let dim = self.dim;
        let n = self.h_rule.len();
        let face_dims = dim - 1;
        let faces = n.pow(face_dims as u32);
        let jac: f64 = self.widths[..dim].iter().product();
        let mut vals = Vec::with_capacity(faces);
        let mut err = 0.0;
        let mut unsnapped = false;
        for f in 0..faces {
            let mut v = [0.0; MAX_DIM];
            let mut wf = 1.0;
            let mut rest = f;
            for i in 0..dim {
                if i == j {
                    v[i] = sigma[i] * self.widths[i];
                    continue;
                }
                let k = rest % n;
                rest /= n;
                let xi = 0.5 * (1.0 + self.h_rule.nodes[k]);
                v[i] = sigma[i] * self.widths[i] * xi;
                wf *= 0.5 * self.h_rule.weights[k];
            }
            let (val, e, u) = self.ray(lo_a, off, &v, n_adj, evals)?;
            vals.push(wf * val);
            err += wf * e;
            unsnapped |= u;
        }
        Ok((jac * pairwise_sum(&vals), jac * err, unsnapped))
    }

    /// ∫₀¹ t^{N−1} W(t|v|) G(t v) dt.
    fn ray(&self, lo_a: &Point, off: &[isize], v: &Point, n_adj: usize, evals: &mut u64) -> Result<(f64, f64, bool)> {
        let dim = self.dim;
        let v2: f64 = v[..dim].iter().map(|x| x * x).sum();
        let f_at = |t: f64, evals: &mut u64| -> (f64, f64) {
            let mut h = [0.0; MAX_DIM];
            for i in 0..dim {
                h[i] = t * v[i];
            }
            let g = self.g(lo_a, off, &h, evals);
            let f = if g == 0.0 { 0.0 } else { t.powi(dim as i32 - 1) * self.weight.eval_r2(t * t * v2) * g };
            (f, g)
        };
        let shell = |rule: &GaussRule, k: usize, evals: &mut u64| -> f64 {
            let b = 0.5f64.powi(k as i32);
            rule.mapped(0.5 * b, b).map(|(t, w)| w * f_at(t, evals).0).sum::<f64>()
        };
        let shells: Vec<f64> = (0..self.levels).map(|k| shell(&self.h_rule, k, evals)).collect();
        // shell rule error: near the origin F is close to a power law, so the
        // innermost shell's relative error carries over to every shell
        let mut rule_err = 0.0;
        if self.levels > 0 {
            let outer = shell(&self.h_check, 0, evals);
            rule_err += (outer - shells[0]).abs();
            let k = self.levels - 1;
            let inner = shell(&self.h_check, k, evals);
            if inner != 0.0 {
                let rel = ((inner - shells[k]) / inner).abs();
                rule_err += rel * shells.iter().map(|v| v.abs()).sum::<f64>();
            }
        }
        let t_l = 0.5f64.powi(self.levels as i32);
        let (f_l, g_l) = f_at(t_l, evals);
        let (f_h, g_h) = f_at(0.5 * t_l, evals);
        let (tail_l, u_l) = self.tail(t_l, f_l, g_l, f_h, g_h, n_adj)?;
        let fine = pairwise_sum(&shells) + tail_l;
        if self.levels == 0 {
            return Ok((fine, tail_l.abs() + rule_err, u_l));
        }
        let (f_c, g_c) = f_at(2.0 * t_l, evals);
        let (tail_c, _) = self.tail(2.0 * t_l, f_c, g_c, f_l, g_l, n_adj)?;
        let coarse = pairwise_sum(&shells[..self.levels - 1]) + tail_c;
        let mut e = (fine - coarse).abs() + rule_err;
        if u_l {
            e += tail_l.abs();
        }
        Ok((fine, e, u_l))
    }

    /// ∫₀^{t} of the power-law model through (t, f_t) and (t/2, f_h).
    fn tail(&self, t: f64, f_t: f64, g_t: f64, f_h: f64, g_h: f64, n_adj: usize) -> Result<(f64, bool)> {
        if g_t <= 0.0 && g_h <= 0.0 {
            return Ok((0.0, false));
        }
        let base = n_adj as f64;
        let cands = [base, base + 1.0, base + self.integrand.vanishing_order()];
        let (q, unsnapped) = if g_t > 0.0 && g_h > 0.0 {
            let q_hat = (g_t / g_h).log2();
            let best = cands
                .iter()
                .copied()
                .min_by(|a, b| (a - q_hat).abs().total_cmp(&(b - q_hat).abs()))
                .unwrap();
            if (best - q_hat).abs() <= 0.05 {
                (best, false)
            } else {
                // rounding-level G values carry no reliable slope
                let tiny = g_t.max(g_h) < 1e-300;
                (if self.smooth || tiny { best } else { q_hat }, !tiny)
            }
        } else {
            (cands[0], true)
        };
        let alpha = q + self.kappa + self.dim as f64;
        if alpha <= 0.0 {
            return Err(Error::Divergent { exponent: alpha });
        }
        let th = 0.5 * t;
        let gt = f_t / t.powf(alpha - 1.0);
        let gh = f_h / th.powf(alpha - 1.0);
        let g1 = (gt - gh) / (t - th);
        let g0 = gt - g1 * t;
        Ok((g0 * t.powf(alpha) / alpha + g1 * t.powf(alpha + 1.0) / (alpha + 1.0), unsnapped))
    }
}
