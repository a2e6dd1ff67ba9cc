//! Sets E ⊂ Ω described analytically or by a cell mask.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::{Domain, Point, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSet {
    /// (lo, hi) ⊂ ℝ.
    Interval { lo: f64, hi: f64 },
    /// Open Euclidean ball; a disk in 2D.
    Disk { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box; a square or rectangle in 2D.
    Square { lo: Vec<f64>, hi: Vec<f64> },
    /// Cells of `grid` flagged in `inside`.
    Mask {
        #[serde(skip)]
        grid: Option<Box<Domain>>,
        inside: Vec<bool>,
    },
}

const SUBSAMPLES: usize = 16;

impl ShapeSet {
    pub fn interval(lo: f64, hi: f64) -> Self {
        ShapeSet::Interval { lo, hi }
    }

    pub fn disk(center: &[f64], radius: f64) -> Self {
        ShapeSet::Disk { center: center.to_vec(), radius }
    }

    pub fn square(lo: &[f64], hi: &[f64]) -> Self {
        ShapeSet::Square { lo: lo.to_vec(), hi: hi.to_vec() }
    }

    pub fn mask(grid: &Domain, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.cell_count() {
            return Err(Error::param("mask", format!(
                "expected {} cells, got {}",
                grid.cell_count(),
                inside.len()
            )));
        }
        Ok(ShapeSet::Mask { grid: Some(Box::new(grid.clone())), inside })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            ShapeSet::Interval { .. } => Some(1),
            ShapeSet::Disk { center, .. } => Some(center.len()),
            ShapeSet::Square { lo, .. } => Some(lo.len()),
            ShapeSet::Mask { grid, .. } => grid.as_ref().map(|g| g.dim()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ShapeSet::Interval { lo, hi } if !(lo < hi) => {
                Err(Error::param("set", format!("empty interval ({lo}, {hi})")))
            }
            ShapeSet::Disk { radius, center } if !(*radius > 0.0) || center.is_empty() || center.len() > MAX_DIM => {
                Err(Error::param("set", "disk needs a positive radius and 1..=3 center coordinates"))
            }
            ShapeSet::Square { lo, hi } if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a < b)) => {
                Err(Error::param("set", "square needs lo < hi on every axis"))
            }
            ShapeSet::Mask { grid: None, .. } => Err(Error::param("set", "mask set without a grid")),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ShapeSet::Interval { lo, hi } => x[0] > *lo && x[0] < *hi,
            ShapeSet::Disk { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, y)| (y - c).powi(2)).sum();
                d2 < radius * radius
            }
            ShapeSet::Square { lo, hi } => lo.iter().zip(hi).zip(x).all(|((a, b), y)| y > a && y < b),
            ShapeSet::Mask { grid, inside } => {
                let g = grid.as_ref().expect("mask grid");
                g.locate(x).is_some_and(|c| inside[c])
            }
        }
    }

    /// Fraction of `cell` of `domain` covered by the set.
    pub fn cell_fraction(&self, domain: &Domain, cell: usize) -> f64 {
        let dim = domain.dim();
        let lo = domain.cell_lo(cell);
        let w = domain.widths();
        match self {
            ShapeSet::Interval { lo: a, hi: b } => snap(overlap(lo[0], lo[0] + w[0], *a, *b) / w[0]),
            ShapeSet::Square { lo: a, hi: b } => (0..dim)
                .map(|i| snap(overlap(lo[i], lo[i] + w[i], a[i], b[i]) / w[i]))
                .product(),
            ShapeSet::Disk { center, radius } => {
                // skip subsampling far from the boundary
                let c = domain.center(cell);
                let d: f64 = (0..dim).map(|i| (c[i] - center[i]).powi(2)).sum::<f64>().sqrt();
                let half_diag: f64 = (0..dim).map(|i| (0.5 * w[i]).powi(2)).sum::<f64>().sqrt();
                if d + half_diag <= *radius {
                    return 1.0;
                }
                if d - half_diag >= *radius {
                    return 0.0;
                }
                self.subsampled_fraction(&lo, w, dim)
            }
            ShapeSet::Mask { .. } => {
                let c = domain.center(cell);
                if self.contains(&c[..dim]) { 1.0 } else { 0.0 }
            }
        }
    }

    fn subsampled_fraction(&self, lo: &Point, w: &[f64], dim: usize) -> f64 {
        let total = SUBSAMPLES.pow(dim as u32);
        let mut hits = 0usize;
        let mut p = [0.0; MAX_DIM];
        for k in 0..total {
            let mut rest = k;
            for i in 0..dim {
                let j = rest % SUBSAMPLES;
                rest /= SUBSAMPLES;
                p[i] = lo[i] + (j as f64 + 0.5) * w[i] / SUBSAMPLES as f64;
            }
            if self.contains(&p[..dim]) {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    /// Lebesgue measure of E ∩ Ω.
    pub fn measure_in(&self, omega: &Domain) -> f64 {
        if let Some(m) = self.analytic_measure(omega) {
            return m;
        }
        omega
            .masked_cells()
            .iter()
            .map(|&c| self.cell_fraction(omega, c))
            .sum::<f64>()
            * omega.cell_volume()
    }

    fn analytic_measure(&self, omega: &Domain) -> Option<f64> {
        if !is_full_box(omega) {
            return None;
        }
        let (lo, hi) = (omega.lo(), omega.hi());
        match self {
            ShapeSet::Interval { lo: a, hi: b } => Some(overlap(lo[0], hi[0], *a, *b)),
            ShapeSet::Square { lo: a, hi: b } => {
                Some((0..omega.dim()).map(|i| overlap(lo[i], hi[i], a[i], b[i])).product())
            }
            ShapeSet::Disk { center, radius } if ball_inside(center, *radius, lo, hi) => {
                Some(ball_volume(center.len(), *radius))
            }
            _ => None,
        }
    }

    /// Relative perimeter Per(E; Ω): the part of ∂E interior to Ω.
    ///
    /// Preset sets need Ω to be a full box; mask sets use jump counting (1D)
    /// or marching squares (2D) on the cell-center grid of Ω.
    pub fn relative_perimeter(&self, omega: &Domain) -> Result<f64> {
        let dim = omega.dim();
        match self {
            ShapeSet::Mask { .. } => mask_perimeter(omega, |c| {
                let x = omega.center(c);
                self.contains(&x[..dim])
            }),
            _ if !is_full_box(omega) => mask_perimeter(omega, |c| {
                let x = omega.center(c);
                self.contains(&x[..dim])
            }),
            ShapeSet::Interval { lo: a, hi: b } => {
                let (l, h) = (omega.lo()[0], omega.hi()[0]);
                Ok([*a, *b].iter().filter(|&&e| e > l && e < h).count() as f64)
            }
            ShapeSet::Square { lo: a, hi: b } => {
                let (l, h) = (omega.lo(), omega.hi());
                let mut per = 0.0;
                for i in 0..dim {
                    let face: f64 = (0..dim)
                        .filter(|&j| j != i)
                        .map(|j| overlap(l[j], h[j], a[j], b[j]))
                        .product();
                    for e in [a[i], b[i]] {
                        if e > l[i] && e < h[i] {
                            per += face;
                        }
                    }
                }
                Ok(per)
            }
            ShapeSet::Disk { center, radius } => {
                if ball_inside(center, *radius, omega.lo(), omega.hi()) {
                    Ok(sphere_area(center.len(), *radius))
                } else {
                    mask_perimeter(omega, |c| {
                        let x = omega.center(c);
                        self.contains(&x[..dim])
                    })
                }
            }
        }
    }
}

// rounding in the cell corners must not turn a covered cell into 0.999…
fn snap(f: f64) -> f64 {
    if f > 1.0 - 1e-9 {
        1.0
    } else if f < 1e-9 {
        0.0
    } else {
        f
    }
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

fn is_full_box(d: &Domain) -> bool {
    d.masked_cells().len() == d.cell_count()
}

fn ball_inside(center: &[f64], r: f64, lo: &[f64], hi: &[f64]) -> bool {
    center.iter().enumerate().all(|(i, c)| c - r >= lo[i] && c + r <= hi[i])
}

fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0 * r,
        2 => PI * r * r,
        _ => 4.0 / 3.0 * PI * r.powi(3),
    }
}

fn sphere_area(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI * r,
        _ => 4.0 * PI * r * r,
    }
}

fn mask_perimeter(omega: &Domain, inside: impl Fn(usize) -> bool) -> Result<f64> {
    let dim = omega.dim();
    match dim {
        1 => {
            let mut jumps = 0usize;
            for &c in omega.masked_cells() {
                if let Some(n) = omega.masked_neighbor(c, &[1]) {
                    if inside(c) != inside(n) {
                        jumps += 1;
                    }
                }
            }
            Ok(jumps as f64)
        }
        2 => {
            let (hx, hy) = (omega.widths()[0], omega.widths()[1]);
            let diag = 0.5 * (hx * hx + hy * hy).sqrt();
            let mut len = 0.0;
            for &c in omega.masked_cells() {
                let corners = [
                    Some(c),
                    omega.masked_neighbor(c, &[1, 0]),
                    omega.masked_neighbor(c, &[1, 1]),
                    omega.masked_neighbor(c, &[0, 1]),
                ];
                if corners.iter().any(|k| k.is_none()) {
                    continue;
                }
                let v: Vec<bool> = corners.iter().map(|k| inside(k.unwrap())).collect();
                let count = v.iter().filter(|&&b| b).count();
                len += match count {
                    0 | 4 => 0.0,
                    1 | 3 => diag,
                    _ => {
                        if v[0] == v[2] {
                            // saddle: two corner cuts
                            2.0 * diag
                        } else if v[0] == v[1] {
                            hx
                        } else {
                            hy
                        }
                    }
                };
            }
            Ok(len)
        }
        _ => Err(Error::param("set", "mask perimeters are available in 1D and 2D only")),
    }
}
