//! Magnetic vector potentials A : ℝ^N → ℝ^N.

use crate::domain::{to_point, Domain, Point, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// A ≡ a.
    Constant(Point),
    /// Symmetric gauge of a uniform field B along e₃: A(x) = (B/2)(−x₂, x₁, 0).
    Landau { b: f64 },
    /// A(x) = α x, a pure-gauge radial field.
    Radial { alpha: f64 },
    /// Values at the cell centers of `grid`, multilinearly interpolated.
    Sampled { grid: Domain, values: Vec<Point> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPotential {
    dim: usize,
    kind: PotentialKind,
    lipschitz_bound: f64,
    sup_bound: f64,
    working_box: (Point, Point),
}

impl MagneticPotential {
    /// The zero potential on ℝ^dim; bounds are taken over the unit box.
    pub fn zero(dim: usize) -> Self {
        let mut hi = [0.0; MAX_DIM];
        hi[..dim].fill(1.0);
        MagneticPotential {
            dim,
            kind: PotentialKind::Zero,
            lipschitz_bound: 0.0,
            sup_bound: 0.0,
            working_box: ([0.0; MAX_DIM], hi),
        }
    }

    pub fn constant(a: &[f64]) -> Result<Self> {
        let dim = a.len();
        check_dim(dim)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("potential", "constant potential must be finite"));
        }
        let mut out = Self::zero(dim);
        out.kind = PotentialKind::Constant(to_point(a));
        out.sup_bound = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(out)
    }

    pub fn landau(dim: usize, b: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::param("potential", "Landau gauge needs dim 2 or 3"));
        }
        let mut out = Self::zero(dim);
        out.kind = PotentialKind::Landau { b };
        out.lipschitz_bound = 0.5 * b.abs();
        out.refresh_sup();
        Ok(out)
    }

    pub fn radial(dim: usize, alpha: f64) -> Result<Self> {
        check_dim(dim)?;
        let mut out = Self::zero(dim);
        out.kind = PotentialKind::Radial { alpha };
        out.lipschitz_bound = alpha.abs();
        out.refresh_sup();
        Ok(out)
    }

    /// Potential sampled at every cell center of `grid` (row-major values).
    pub fn sampled(grid: &Domain, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = grid.dim();
        if values.len() != grid.cell_count() {
            return Err(Error::param("potential", format!(
                "expected {} samples, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        let mut pts = Vec::with_capacity(values.len());
        for v in &values {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            if v.iter().any(|a| !a.is_finite()) {
                return Err(Error::param("potential", "sampled potential has non-finite entries"));
            }
            pts.push(to_point(v));
        }
        // max over adjacent node pairs of |ΔA| / |Δx|
        let mut lip = 0.0f64;
        for c in 0..grid.cell_count() {
            for axis in 0..dim {
                let mut off = vec![0isize; dim];
                off[axis] = 1;
                if let Some(n) = grid.neighbor(c, &off) {
                    let da: f64 = (0..dim).map(|k| (pts[n][k] - pts[c][k]).powi(2)).sum::<f64>().sqrt();
                    lip = lip.max(da / grid.widths()[axis]);
                }
            }
        }
        let sup = pts
            .iter()
            .map(|p| p[..dim].iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Ok(MagneticPotential {
            dim,
            kind: PotentialKind::Sampled { grid: grid.clone(), values: pts },
            lipschitz_bound: lip,
            sup_bound: sup,
            working_box: (to_point(grid.lo()), to_point(grid.hi())),
        })
    }

    /// Recomputes `sup_bound` over a new working box.
    pub fn on_box(mut self, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: lo.len() });
        }
        self.working_box = (to_point(lo), to_point(hi));
        self.refresh_sup();
        Ok(self)
    }

    fn refresh_sup(&mut self) {
        let (lo, hi) = self.working_box;
        // |A| is convex for the linear presets, so the max sits on a corner
        let corner_max = |f: &dyn Fn(&Point) -> f64| {
            let mut best = 0.0f64;
            for k in 0..(1usize << self.dim) {
                let mut p = [0.0; MAX_DIM];
                for i in 0..self.dim {
                    p[i] = if k >> i & 1 == 1 { hi[i] } else { lo[i] };
                }
                best = best.max(f(&p));
            }
            best
        };
        self.sup_bound = match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(a) => a[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt(),
            PotentialKind::Landau { b } => {
                corner_max(&|p| 0.5 * b.abs() * (p[0] * p[0] + p[1] * p[1]).sqrt())
            }
            PotentialKind::Radial { alpha } => {
                let dim = self.dim;
                corner_max(&|p| alpha.abs() * p[..dim].iter().map(|v| v * v).sum::<f64>().sqrt())
            }
            PotentialKind::Sampled { .. } => self.sup_bound,
        };
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }
    /// sup |A| over the working box.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }
    pub fn working_box(&self) -> (&[f64], &[f64]) {
        (&self.working_box.0[..self.dim], &self.working_box.1[..self.dim])
    }
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }
    /// The value of A when it is constant.
    pub fn constant_value(&self) -> Option<Point> {
        match self.kind {
            PotentialKind::Zero => Some([0.0; MAX_DIM]),
            PotentialKind::Constant(a) => Some(a),
            _ => None,
        }
    }

    /// Sup of |A| over the masked cell centers of `domain`.
    pub fn sup_on(&self, domain: &Domain) -> f64 {
        domain
            .masked_cells()
            .iter()
            .map(|&c| {
                let a = self.eval(&domain.center(c));
                a[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> Point {
        match &self.kind {
            PotentialKind::Zero => [0.0; MAX_DIM],
            PotentialKind::Constant(a) => *a,
            PotentialKind::Landau { b } => [-0.5 * b * x[1], 0.5 * b * x[0], 0.0],
            PotentialKind::Radial { alpha } => {
                let mut out = [0.0; MAX_DIM];
                for i in 0..self.dim {
                    out[i] = alpha * x[i];
                }
                out
            }
            PotentialKind::Sampled { grid, values } => interpolate(grid, values, x),
        }
    }

    /// Evaluates A at a slice point, checking the dimension.
    pub fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(self.eval(&to_point(x))[..self.dim].to_vec())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::param("dim", format!("must be in 1..={MAX_DIM}, got {dim}")));
    }
    Ok(())
}

/// Multilinear interpolation between cell centers, clamped at the edge centers.
fn interpolate(grid: &Domain, values: &[Point], x: &Point) -> Point {
    let dim = grid.dim();
    let mut base = [0usize; MAX_DIM];
    let mut frac = [0.0; MAX_DIM];
    for i in 0..dim {
        let n = grid.resolution()[i];
        let t = (x[i] - grid.lo()[i]) / grid.widths()[i] - 0.5;
        let t = t.clamp(0.0, (n - 1) as f64);
        let j = (t.floor() as usize).min(n.saturating_sub(2));
        base[i] = j;
        frac[i] = if n == 1 { 0.0 } else { t - j as f64 };
    }
    let mut out = [0.0; MAX_DIM];
    for corner in 0..(1usize << dim) {
        let mut idx = [0usize; MAX_DIM];
        let mut w = 1.0;
        for i in 0..dim {
            let up = corner >> i & 1 == 1;
            let n = grid.resolution()[i];
            idx[i] = if up { (base[i] + 1).min(n - 1) } else { base[i] };
            w *= if up { frac[i] } else { 1.0 - frac[i] };
        }
        if w == 0.0 {
            continue;
        }
        let v = &values[grid.flat_index(&idx[..dim])];
        for k in 0..dim {
            out[k] += w * v[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_constant_presets() {
        let z = MagneticPotential::zero(2);
        assert_eq!(z.eval(&[0.3, 0.7, 0.0]), [0.0; 3]);
        let c = MagneticPotential::constant(&[0.5, -2.0]).unwrap();
        assert_eq!(c.lipschitz_bound(), 0.0);
        assert_eq!(&c.eval(&[9.0, 9.0, 0.0])[..2], &[0.5, -2.0]);
    }

    #[test]
    fn landau_bounds() {
        let a = MagneticPotential::landau(2, 1.0).unwrap().on_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(a.lipschitz_bound(), 0.5);
        assert!((a.sup_bound() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(&a.eval(&[0.5, 0.5, 0.0])[..2], &[-0.25, 0.25]);
    }

    #[test]
    fn sampled_linear_field_is_reproduced() {
        let g = Domain::new_box(&[0.0, 0.0], &[1.0, 1.0], &[8, 8]).unwrap();
        let vals: Vec<Vec<f64>> = (0..g.cell_count())
            .map(|c| {
                let x = g.center(c);
                vec![-0.5 * x[1], 0.5 * x[0]]
            })
            .collect();
        let a = MagneticPotential::sampled(&g, vals).unwrap();
        assert!((a.lipschitz_bound() - 0.5).abs() < 1e-12);
        let v = a.eval(&[0.4, 0.3, 0.0]);
        assert!((v[0] + 0.15).abs() < 1e-12 && (v[1] - 0.2).abs() < 1e-12);
    }
}
