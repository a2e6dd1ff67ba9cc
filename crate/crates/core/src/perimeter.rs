//! Classical and magnetic fractional s-perimeters.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::functionals::{
    check_s, double_integral, fractional_magnetic_energy, EnergyResult, PairIntegrand, QuadratureSpec, Weight,
};
use crate::norm::phase;
use crate::potential::MagneticPotential;
use crate::quadrature::{pairwise_sum, GaussRule};
use crate::shape::ShapeSet;
use crate::sphere::q_constant_default;

fn check_set(e: &ShapeSet, omega: &Domain) -> Result<()> {
    e.validate()?;
    if let Some(d) = e.dim() {
        if d != omega.dim() {
            return Err(Error::DimensionMismatch { expected: omega.dim(), found: d });
        }
    }
    Ok(())
}

struct Classical<'a> {
    e: &'a ShapeSet,
    dim: usize,
}

impl PairIntegrand for Classical<'_> {
    type Sample = bool;

    fn sample(&self, x: &Point) -> bool {
        self.e.contains(&x[..self.dim])
    }

    fn pair(&self, _: &Point, sx: &bool, _: &Point, sy: &bool) -> f64 {
        if *sx && !*sy {
            1.0
        } else {
            0.0
        }
    }

    fn smooth(&self) -> bool {
        false
    }

    fn vanishing_order(&self) -> f64 {
        1.0
    }
}

/// ½[1_E 1_E |1 − e^{iθ}|₁ + 1_E 1_{E^c} + 1_{E^c} 1_E |e^{iθ}|₁].
struct Magnetic<'a> {
    e: &'a ShapeSet,
    a: &'a MagneticPotential,
    dim: usize,
}

impl PairIntegrand for Magnetic<'_> {
    type Sample = bool;

    fn sample(&self, x: &Point) -> bool {
        self.e.contains(&x[..self.dim])
    }

    fn pair(&self, x: &Point, sx: &bool, y: &Point, sy: &bool) -> f64 {
        match (*sx, *sy) {
            (false, false) => 0.0,
            (true, false) => 0.5,
            (ex, _) => {
                let t = phase(x, y, self.a, self.dim);
                let z = Complex64::from_polar(1.0, t);
                let w = if ex { Complex64::new(1.0, 0.0) - z } else { z };
                0.5 * (w.re.abs() + w.im.abs())
            }
        }
    }

    fn smooth(&self) -> bool {
        false
    }

    fn vanishing_order(&self) -> f64 {
        1.0
    }
}

/// ∫_E∫_{Ω∖E} |x−y|^{−N−s} dx dy.
pub fn classical_fractional_perimeter(e: &ShapeSet, omega: &Domain, s: f64, q: &QuadratureSpec) -> Result<EnergyResult> {
    check_s(s)?;
    check_set(e, omega)?;
    let n = omega.dim();
    double_integral(&Classical { e, dim: n }, omega, Weight::Power(-(n as f64) - s), q)
}

/// P_s(E; A), the half-weighted sum of the three phase terms.
pub fn magnetic_fractional_perimeter(
    e: &ShapeSet,
    a: &MagneticPotential,
    omega: &Domain,
    s: f64,
    q: &QuadratureSpec,
) -> Result<EnergyResult> {
    check_s(s)?;
    check_set(e, omega)?;
    let n = omega.dim();
    if a.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.dim() });
    }
    double_integral(&Magnetic { e, a, dim: n }, omega, Weight::Power(-(n as f64) - s), q)
}

/// ∫_{E∩Ω} |A(x)| dx; cells cut by ∂E are subdivided.
pub fn potential_mass(e: &ShapeSet, a: &MagneticPotential, omega: &Domain) -> f64 {
    let dim = omega.dim();
    let rule = GaussRule::legendre(4);
    let sub = 16usize;
    let norm = |x: &Point| {
        let v = a.eval(x);
        v[..dim].iter().map(|c| c * c).sum::<f64>().sqrt()
    };
    let parts: Vec<f64> = omega
        .masked_cells()
        .par_iter()
        .map(|&c| {
            let f = e.cell_fraction(omega, c);
            if f == 0.0 {
                return 0.0;
            }
            let lo = omega.cell_lo(c);
            let w = omega.widths();
            let (pieces, order) = if f == 1.0 { (1, &rule) } else { (sub, &rule) };
            let n = order.len();
            let mut acc = 0.0;
            for piece in 0..pieces.pow(dim as u32) {
                let mut plo = [0.0; MAX_DIM];
                let mut rest = piece;
                for i in 0..dim {
                    plo[i] = lo[i] + (rest % pieces) as f64 * w[i] / pieces as f64;
                    rest /= pieces;
                }
                for k in 0..n.pow(dim as u32) {
                    let mut x = [0.0; MAX_DIM];
                    let mut wt = omega.cell_volume() / pieces.pow(dim as u32) as f64;
                    let mut r = k;
                    for i in 0..dim {
                        let j = r % n;
                        r /= n;
                        x[i] = plo[i] + 0.5 * w[i] / pieces as f64 * (1.0 + order.nodes[j]);
                        wt *= 0.5 * order.weights[j];
                    }
                    if f == 1.0 || e.contains(&x[..dim]) {
                        acc += wt * norm(&x);
                    }
                }
            }
            acc
        })
        .collect();
    pairwise_sum(&parts)
}

/// |D1_E|_A(Ω) = Per(E; Ω) + ∫_E |A|.
pub fn indicator_bv(e: &ShapeSet, a: &MagneticPotential, omega: &Domain) -> Result<f64> {
    check_set(e, omega)?;
    if a.dim() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: a.dim() });
    }
    let per = e.relative_perimeter(omega)?;
    let mass = if a.is_zero() { 0.0 } else { potential_mass(e, a, omega) };
    Ok(per + mass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterRow {
    pub s: f64,
    pub ps_classical: f64,
    pub ps_magnetic: f64,
    /// (1 − s) times the unhalved magnetic double integral of 1_E at p = 1.
    pub normalized_full: f64,
    /// Q_{1,N}·|D1_E|_A(Ω).
    pub target: f64,
    pub warning: Option<String>,
}

/// Perimeters at each s, with both normalizations of the limit.
pub fn perimeter_sweep(
    e: &ShapeSet,
    a: &MagneticPotential,
    omega: &Domain,
    s_list: &[f64],
    q: &QuadratureSpec,
) -> Result<Vec<PerimeterRow>> {
    let n = omega.dim();
    let target = q_constant_default(1.0, n)? * indicator_bv(e, a, omega)?;
    let u = ComplexField::indicator(Arc::new(omega.clone()), e.clone())?;
    s_list
        .iter()
        .map(|&s| {
            let c = classical_fractional_perimeter(e, omega, s, q)?;
            let m = magnetic_fractional_perimeter(e, a, omega, s, q)?;
            let full = fractional_magnetic_energy(&u, a, omega, s, 1.0, q)?;
            let warning = [&c, &m, &full].iter().find_map(|r| r.warning.clone());
            Ok(PerimeterRow {
                s,
                ps_classical: c.value,
                ps_magnetic: m.value,
                normalized_full: (1.0 - s) * full.value,
                target,
                warning,
            })
        })
        .collect()
}

/// CSV with header `s,Ps_classical,Ps_magnetic,(1-s)*full_integral,target`.
pub fn perimeter_csv(rows: &[PerimeterRow]) -> String {
    let mut out = String::from("s,Ps_classical,Ps_magnetic,(1-s)*full_integral,target\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.s, r.ps_classical, r.ps_magnetic, r.normalized_full, r.target
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Domain {
        Domain::new_box(&[-1.0], &[1.0], &[16]).unwrap()
    }

    #[test]
    fn whole_domain_has_no_perimeter() {
        let d = Domain::new_box(&[0.0], &[1.0], &[8]).unwrap();
        let e = ShapeSet::interval(-1.0, 2.0);
        let r = classical_fractional_perimeter(&e, &d, 0.5, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn half_line_closed_form() {
        let e = ShapeSet::interval(0.0, 1.0);
        for s in [0.3, 0.5, 0.9] {
            let r = classical_fractional_perimeter(&e, &line(), s, &QuadratureSpec::default()).unwrap();
            let exact = (2.0 - 2f64.powf(1.0 - s)) / (s * (1.0 - s));
            assert!((r.value / exact - 1.0).abs() < 1e-5, "s={s}: {r:?} vs {exact}");
        }
    }

    #[test]
    fn empty_set_and_zero_potential() {
        let q = QuadratureSpec::default();
        let z = MagneticPotential::zero(1);
        let empty = ShapeSet::interval(5.0, 6.0);
        assert_eq!(magnetic_fractional_perimeter(&empty, &z, &line(), 0.5, &q).unwrap().value, 0.0);
        let e = ShapeSet::interval(0.0, 1.0);
        let m = magnetic_fractional_perimeter(&e, &z, &line(), 0.5, &q).unwrap().value;
        let c = classical_fractional_perimeter(&e, &line(), 0.5, &q).unwrap().value;
        assert!((m - c).abs() <= 1e-12 * c);
    }

    #[test]
    fn indicator_bv_of_interval() {
        let a = MagneticPotential::constant(&[0.3]).unwrap();
        let v = indicator_bv(&ShapeSet::interval(0.0, 1.0), &a, &line()).unwrap();
        assert!((v - 1.3).abs() < 1e-12);
    }

    #[test]
    fn csv_header() {
        let rows = vec![PerimeterRow {
            s: 0.5,
            ps_classical: 1.0,
            ps_magnetic: 1.0,
            normalized_full: 1.0,
            target: 2.0,
            warning: None,
        }];
        assert!(perimeter_csv(&rows).starts_with("s,Ps_classical,Ps_magnetic,(1-s)*full_integral,target\n0.5,"));
    }
}
