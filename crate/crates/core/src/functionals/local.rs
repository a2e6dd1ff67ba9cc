use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Interp, Profile};
use crate::norm::{phase, pnorm_pow_scalar};
use crate::potential::MagneticPotential;
use crate::quadrature::{pairwise_sum, GaussRule};

use super::{check_dims, check_p, EnergyResult};

fn gradient_pow(t: &[Complex64; MAX_DIM], dim: usize, p: f64) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for z in &t[..dim] {
        re += z.re * z.re;
        im += z.im * z.im;
    }
    if p == 2.0 {
        re + im
    } else {
        re.powf(0.5 * p) + im.powf(0.5 * p)
    }
}

fn cell_gauss(omega: &Domain, cell: usize, rule: &GaussRule, mut f: impl FnMut(&Point) -> f64) -> f64 {
    let dim = omega.dim();
    let lo = omega.cell_lo(cell);
    let w = omega.widths();
    let n = rule.len();
    let mut acc = 0.0;
    for k in 0..n.pow(dim as u32) {
        let mut x = [0.0; MAX_DIM];
        let mut wt = omega.cell_volume();
        let mut rest = k;
        for i in 0..dim {
            let j = rest % n;
            rest /= n;
            x[i] = lo[i] + 0.5 * w[i] * (1.0 + rule.nodes[j]);
            wt *= 0.5 * rule.weights[j];
        }
        acc += wt * f(&x);
    }
    acc
}

/// ∫_Ω |∇u − iAu|_p^p dx.
///
/// Analytic fields use Gauss rules of order 4 per cell, with the order-2
/// result as the error reference. Sampled fields use the node stencil.
pub fn local_magnetic_energy(u: &ComplexField, a: &MagneticPotential, omega: &Domain, p: f64) -> Result<EnergyResult> {
    check_p(p)?;
    check_dims(u, a, omega)?;
    let start = Instant::now();
    let dim = omega.dim();
    let cells = omega.masked_cells();
    let (value, est_error, evals) = if u.is_analytic() {
        let r4 = GaussRule::legendre(4);
        let r2 = GaussRule::legendre(2);
        let parts: Vec<(f64, f64)> = cells
            .par_iter()
            .map(|&c| {
                let mut f = |x: &Point| {
                    let t = u.analytic_magnetic_gradient(a, x).expect("analytic profile has a jet");
                    gradient_pow(&t, dim, p)
                };
                let i4 = cell_gauss(omega, c, &r4, &mut f);
                let i2 = cell_gauss(omega, c, &r2, &mut f);
                (i4, (i4 - i2).abs())
            })
            .collect();
        let v: Vec<f64> = parts.iter().map(|x| x.0).collect();
        let e: Vec<f64> = parts.iter().map(|x| x.1).collect();
        let per_cell = (r4.len().pow(dim as u32) + r2.len().pow(dim as u32)) as u64;
        (pairwise_sum(&v), pairwise_sum(&e), per_cell * cells.len() as u64)
    } else if let Profile::Sampled { interp: Interp::Linear, .. } = u.profile() {
        if !std::ptr::eq(omega, u.domain()) && omega != u.domain() {
            return Err(Error::param("omega", "a sampled field is integrated on its own grid"));
        }
        let vol = omega.cell_volume();
        let parts = cells
            .par_iter()
            .map(|&c| u.stencil_magnetic_gradient(a, c).map(|t| vol * gradient_pow(&t, dim, p)))
            .collect::<Result<Vec<f64>>>()?;
        let value = pairwise_sum(&parts);
        (value, 0.0, cells.len() as u64)
    } else {
        return Err(Error::NotSmooth("the local magnetic energy"));
    };
    Ok(EnergyResult {
        value,
        est_error,
        node_pairs: evals,
        wall_time_s: start.elapsed().as_secs_f64(),
        warning: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectResult {
    pub value: f64,
    /// |h| > 1.
    pub out_of_range: bool,
}

/// ∫_{ℝ^N} |u(y+h) − e^{i h·A(y+h/2)} u(y)|_p^p dy, with u zero outside its
/// domain.
pub fn translation_defect(u: &ComplexField, a: &MagneticPotential, h: &[f64], p: f64) -> Result<DefectResult> {
    check_p(p)?;
    let dim = u.dim();
    if h.len() != dim || a.dim() != dim {
        let found = if h.len() != dim { h.len() } else { a.dim() };
        return Err(Error::DimensionMismatch { expected: dim, found });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("h", "shift must be finite"));
    }
    let norm_h = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    let out_of_range = norm_h > 1.0;
    if norm_h == 0.0 {
        return Ok(DefectResult { value: 0.0, out_of_range });
    }
    let d = u.domain();
    let mut lo = [0.0; MAX_DIM];
    let mut hi = [0.0; MAX_DIM];
    let mut res = [0usize; MAX_DIM];
    for i in 0..dim {
        lo[i] = d.lo()[i] - h[i].max(0.0);
        hi[i] = d.hi()[i] - h[i].min(0.0);
        res[i] = (2.0 * (hi[i] - lo[i]) / d.widths()[i]).ceil() as usize;
    }
    let grid = Domain::new_box(&lo[..dim], &hi[..dim], &res[..dim])?;
    let mut hp = [0.0; MAX_DIM];
    hp[..dim].copy_from_slice(h);
    let inside = |x: &Point| d.contains(&x[..dim]);
    let rule = GaussRule::legendre(6);
    let parts: Vec<f64> = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| {
            cell_gauss(&grid, c, &rule, |y| {
                let mut x = *y;
                for i in 0..dim {
                    x[i] += hp[i];
                }
                let vx = if inside(&x) { u.profile_at(&x) } else { Complex64::new(0.0, 0.0) };
                let vy = if inside(y) { u.profile_at(y) } else { Complex64::new(0.0, 0.0) };
                let beta = phase(&x, y, a, dim) - u.wave_dot(&hp);
                let diff = vx - Complex64::from_polar(1.0, beta) * vy;
                if p == 2.0 {
                    diff.norm_sqr()
                } else {
                    pnorm_pow_scalar(u.carrier(&x) * diff, p)
                }
            })
        })
        .collect();
    Ok(DefectResult { value: pairwise_sum(&parts), out_of_range })
}
