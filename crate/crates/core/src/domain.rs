//! Rectilinear domains with a per-cell membership mask.
//!
//! The bounding box is split into `resolution[i]` cells per axis. Each cell
//! has one node at its center; a domain Ω is the union of the masked cells.

use crate::error::{Error, Result};

/// Largest spatial dimension supported by the gridded functionals.
pub const MAX_DIM: usize = 3;

/// A point of ℝ^N stored in a fixed-size array; entries past `dim` are zero.
pub type Point = [f64; MAX_DIM];

pub(crate) fn to_point(x: &[f64]) -> Point {
    let mut p = [0.0; MAX_DIM];
    p[..x.len()].copy_from_slice(x);
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dim: usize,
    lo: Point,
    hi: Point,
    res: [usize; MAX_DIM],
    widths: Point,
    mask: Vec<bool>,
    masked: Vec<usize>,
    diameter: f64,
}

impl Domain {
    /// The full box `[lo, hi]` with every cell masked.
    pub fn new_box(lo: &[f64], hi: &[f64], resolution: &[usize]) -> Result<Self> {
        let n: usize = resolution.iter().product();
        Self::with_mask(lo, hi, resolution, vec![true; n])
    }

    /// Box domain whose mask keeps the cells with `keep(center)`.
    pub fn from_predicate(
        lo: &[f64],
        hi: &[f64],
        resolution: &[usize],
        keep: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        let full = Self::new_box(lo, hi, resolution)?;
        let mask = (0..full.cell_count())
            .map(|c| keep(&full.center(c)[..full.dim]))
            .collect();
        Self::with_mask(lo, hi, resolution, mask)
    }

    pub fn with_mask(lo: &[f64], hi: &[f64], resolution: &[usize], mask: Vec<bool>) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param("dim", format!("must be in 1..={MAX_DIM}, got {dim}")));
        }
        if hi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: hi.len() });
        }
        if resolution.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: resolution.len() });
        }
        let mut res = [1usize; MAX_DIM];
        let mut widths = [0.0; MAX_DIM];
        for i in 0..dim {
            if !(lo[i].is_finite() && hi[i].is_finite()) || hi[i] <= lo[i] {
                return Err(Error::param("bbox", format!("axis {i}: need lo < hi, got [{}, {}]", lo[i], hi[i])));
            }
            if resolution[i] == 0 {
                return Err(Error::param("resolution", format!("axis {i} has zero cells")));
            }
            res[i] = resolution[i];
            widths[i] = (hi[i] - lo[i]) / resolution[i] as f64;
        }
        let count: usize = res[..dim].iter().product();
        if mask.len() != count {
            return Err(Error::param("mask", format!("expected {count} entries, got {}", mask.len())));
        }
        let masked: Vec<usize> = (0..count).filter(|&c| mask[c]).collect();
        let mut d = Domain {
            dim,
            lo: to_point(lo),
            hi: to_point(hi),
            res,
            widths,
            mask,
            masked,
            diameter: 0.0,
        };
        d.diameter = d.compute_diameter();
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dim]
    }
    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dim]
    }
    pub fn resolution(&self) -> &[usize] {
        &self.res[..self.dim]
    }
    pub fn widths(&self) -> &[f64] {
        &self.widths[..self.dim]
    }
    pub fn min_width(&self) -> f64 {
        self.widths().iter().cloned().fold(f64::INFINITY, f64::min)
    }
    pub fn max_width(&self) -> f64 {
        self.widths().iter().cloned().fold(0.0, f64::max)
    }
    pub fn cell_volume(&self) -> f64 {
        self.widths().iter().product()
    }
    pub fn cell_count(&self) -> usize {
        self.mask.len()
    }
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    /// Flat indices of the masked cells, ascending.
    pub fn masked_cells(&self) -> &[usize] {
        &self.masked
    }
    pub fn is_masked(&self, cell: usize) -> bool {
        self.mask[cell]
    }
    /// Lebesgue measure of the masked region.
    pub fn measure(&self) -> f64 {
        self.masked.len() as f64 * self.cell_volume()
    }
    /// Max pairwise distance of masked cell centers (r_Ω up to one cell width).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn multi_index(&self, cell: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        let mut rest = cell;
        for i in (0..self.dim).rev() {
            idx[i] = rest % self.res[i];
            rest /= self.res[i];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for i in 0..self.dim {
            flat = flat * self.res[i] + idx[i];
        }
        flat
    }

    /// Lower corner of a cell.
    pub fn cell_lo(&self, cell: usize) -> Point {
        let idx = self.multi_index(cell);
        let mut p = [0.0; MAX_DIM];
        for i in 0..self.dim {
            p[i] = self.lo[i] + idx[i] as f64 * self.widths[i];
        }
        p
    }

    pub fn center(&self, cell: usize) -> Point {
        let mut p = self.cell_lo(cell);
        for i in 0..self.dim {
            p[i] += 0.5 * self.widths[i];
        }
        p
    }

    /// Cell containing `x` (masked or not), or `None` outside the box.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut idx = [0usize; MAX_DIM];
        for i in 0..self.dim {
            let t = (x[i] - self.lo[i]) / self.widths[i];
            if !(t >= 0.0 && t <= self.res[i] as f64) {
                return None;
            }
            idx[i] = (t.floor() as usize).min(self.res[i] - 1);
        }
        Some(self.flat_index(&idx[..self.dim]))
    }

    /// Whether `x` lies in a masked cell.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.locate(x).is_some_and(|c| self.mask[c])
    }

    /// Neighbour of `cell` shifted by `offset` cells, if inside the box.
    pub fn neighbor(&self, cell: usize, offset: &[isize]) -> Option<usize> {
        let idx = self.multi_index(cell);
        let mut out = [0usize; MAX_DIM];
        for i in 0..self.dim {
            let j = idx[i] as isize + offset[i];
            if j < 0 || j >= self.res[i] as isize {
                return None;
            }
            out[i] = j as usize;
        }
        Some(self.flat_index(&out[..self.dim]))
    }

    /// Masked cell shifted by `offset`, if it exists and is masked.
    pub fn masked_neighbor(&self, cell: usize, offset: &[isize]) -> Option<usize> {
        self.neighbor(cell, offset).filter(|&c| self.mask[c])
    }

    /// Ω_r: masked cells whose center lies farther than `r` from every
    /// unmasked cell and from the outside of the box.
    pub fn shrunken(&self, r: f64) -> Domain {
        let reach: Vec<isize> = (0..self.dim)
            .map(|i| (r / self.widths[i]).ceil() as isize)
            .collect();
        let mut offsets = Vec::new();
        let mut cur = vec![0isize; self.dim];
        enumerate_offsets(&reach, 0, &mut cur, &mut offsets);
        let offsets: Vec<Vec<isize>> = offsets
            .into_iter()
            .filter(|o| {
                // cells whose center is within distance r of this center
                let d2: f64 = (0..self.dim)
                    .map(|i| {
                        let gap = (o[i].unsigned_abs() as f64 - 0.5).max(0.0) * self.widths[i];
                        gap * gap
                    })
                    .sum();
                d2 < r * r
            })
            .collect();
        let mut mask = vec![false; self.cell_count()];
        for &c in &self.masked {
            let center = self.center(c);
            let near_box_edge = (0..self.dim)
                .any(|i| center[i] - self.lo[i] <= r || self.hi[i] - center[i] <= r);
            if near_box_edge {
                continue;
            }
            mask[c] = offsets
                .iter()
                .all(|o| self.neighbor(c, o).is_some_and(|n| self.mask[n]));
        }
        Domain::with_mask(self.lo(), self.hi(), self.resolution(), mask)
            .expect("shrinking keeps the grid valid")
    }

    /// Integer cell offset of `self`'s grid inside `other`'s, when both grids
    /// share cell widths and are aligned.
    pub fn offset_in(&self, other: &Domain) -> Option<Vec<isize>> {
        if self.dim != other.dim {
            return None;
        }
        let mut off = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            if (self.widths[i] - other.widths[i]).abs() > 1e-12 * self.widths[i] {
                return None;
            }
            let t = (self.lo[i] - other.lo[i]) / other.widths[i];
            if (t - t.round()).abs() > 1e-8 {
                return None;
            }
            off.push(t.round() as isize);
        }
        Some(off)
    }

    fn compute_diameter(&self) -> f64 {
        // The farthest pair of centers is attained on the boundary layer.
        let all_offsets = unit_offsets(self.dim);
        let boundary: Vec<Point> = self
            .masked
            .iter()
            .filter(|&&c| {
                all_offsets
                    .iter()
                    .any(|o| self.neighbor(c, o).is_none_or(|n| !self.mask[n]))
            })
            .map(|&c| self.center(c))
            .collect();
        let mut best = 0.0f64;
        for (i, a) in boundary.iter().enumerate() {
            for b in &boundary[i + 1..] {
                let d2: f64 = (0..self.dim).map(|k| (a[k] - b[k]).powi(2)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }
}

fn enumerate_offsets(reach: &[isize], axis: usize, cur: &mut Vec<isize>, out: &mut Vec<Vec<isize>>) {
    if axis == reach.len() {
        out.push(cur.clone());
        return;
    }
    for o in -reach[axis]..=reach[axis] {
        cur[axis] = o;
        enumerate_offsets(reach, axis + 1, cur, out);
    }
}

/// The ±e_i offsets.
pub(crate) fn unit_offsets(dim: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for s in [-1isize, 1] {
            let mut o = vec![0isize; dim];
            o[i] = s;
            out.push(o);
        }
    }
    out
}

/// All offsets in {-1, 0, 1}^dim, in lexicographic order.
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_geometry() {
        let d = Domain::new_box(&[0.0, -1.0], &[1.0, 1.0], &[4, 8]).unwrap();
        assert_eq!(d.cell_count(), 32);
        assert!((d.cell_volume() - 0.25 * 0.25).abs() < 1e-15);
        let c = d.center(d.flat_index(&[0, 0]));
        assert_eq!(&c[..2], &[0.125, -0.875]);
        assert_eq!(d.locate(&[0.99, 0.99]), Some(d.flat_index(&[3, 7])));
        assert_eq!(d.locate(&[1.5, 0.0]), None);
        // diameter of centers: from (0.125,-0.875) to (0.875,0.875)
        let expect = (0.75f64.powi(2) + 1.75f64.powi(2)).sqrt();
        assert!((d.diameter() - expect).abs() < 1e-12);
    }

    #[test]
    fn diameter_within_one_cell_of_true_diameter() {
        let d = Domain::from_predicate(&[-1.0, -1.0], &[1.0, 1.0], &[64, 64], |x| {
            x[0] * x[0] + x[1] * x[1] < 0.25
        })
        .unwrap();
        assert!((d.diameter() - 1.0).abs() <= d.max_width() * 2f64.sqrt());
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(Domain::new_box(&[0.0], &[0.0], &[4]).is_err());
        assert!(Domain::new_box(&[0.0], &[1.0], &[0]).is_err());
        assert!(Domain::new_box(&[0.0, 0.0], &[1.0], &[4]).is_err());
    }

    #[test]
    fn shrinking_removes_boundary_layer() {
        let d = Domain::new_box(&[0.0], &[1.0], &[10]).unwrap();
        let s = d.shrunken(0.1);
        // centers at 0.05..0.95; keep those with distance > 0.1 to the box edge
        assert_eq!(s.masked_cells().len(), 8);
        let s2 = d.shrunken(0.26);
        assert_eq!(s2.masked_cells().len(), 4);
    }

    #[test]
    fn aligned_offsets() {
        let om = Domain::new_box(&[0.0], &[1.0], &[10]).unwrap();
        let w = Domain::new_box(&[-1.0], &[2.0], &[30]).unwrap();
        assert_eq!(om.offset_in(&w), Some(vec![10]));
        let bad = Domain::new_box(&[-1.0], &[2.0], &[31]).unwrap();
        assert_eq!(om.offset_in(&bad), None);
    }
}
