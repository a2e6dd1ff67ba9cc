use std::sync::Arc;

use magbbm::bv::{bv_dual, BvOptions};
use magbbm::functionals::{fractional_magnetic_energy, QuadratureSpec};
use magbbm::perimeter::{classical_fractional_perimeter, indicator_bv, magnetic_fractional_perimeter, perimeter_sweep};
use magbbm::quadrature::{adaptive, adaptive_origin_power};
use magbbm::{ComplexField, Domain, MagneticPotential, ShapeSet};

fn line() -> Domain {
    Domain::new_box(&[-1.0], &[1.0], &[32]).unwrap()
}

/// ∫₀^b w(h) f(h) h^{−1−s} dh with w(h)/h and f regular, split at `kinks`.
fn radial(w_over_h: impl Fn(f64) -> f64 + Copy, f: impl Fn(f64) -> f64 + Copy, s: f64, kinks: &[f64], b: f64) -> f64 {
    let mut pts = vec![0.0];
    pts.extend(kinks.iter().copied().filter(|&k| k > 0.0 && k < b));
    pts.push(b);
    let mut acc = adaptive_origin_power(|h| w_over_h(h) * f(h), pts[1], -s, 1e-15, 1e-13).value;
    for seg in pts[1..].windows(2) {
        acc += adaptive(|h| w_over_h(h) * f(h) * h.powf(-s), seg[0], seg[1], 1e-15, 1e-13).value;
    }
    acc
}

/// E = (0, 1) in Ω = (−1, 1): pair measure at separation h, for E×E and E^c×E.
fn overlap_ee(h: f64) -> f64 {
    2.0 * (1.0 - h).max(0.0)
}

fn overlap_ce(h: f64) -> f64 {
    (0f64.min(1.0 - h) - (-1f64).max(-h)).max(0.0)
}

#[test]
fn classical_half_line_against_adaptive_oracle() {
    let s = 0.5;
    let oracle = radial(|h| overlap_ce(h) / h, |_| 1.0, s, &[1.0], 2.0);
    let closed = (2.0 - 2f64.sqrt()) / 0.25;
    assert!((oracle - closed).abs() < 1e-10, "{oracle}");
    let r = classical_fractional_perimeter(&ShapeSet::interval(0.0, 1.0), &line(), s, &QuadratureSpec::default()).unwrap();
    assert!((r.value - closed).abs() < 1e-4 * closed, "{r:?}");
    assert!((closed - 2.3431).abs() < 1e-4);
}

#[test]
fn magnetic_perimeter_against_adaptive_oracle() {
    let (s, a) = (0.5, 0.1);
    let l1 = |t: f64| t.cos().abs() + t.sin().abs();
    let same = radial(|h| overlap_ee(h) / h, |h| (1.0 - (a * h).cos()).abs() + (a * h).sin().abs(), s, &[], 1.0);
    let cross = radial(|h| overlap_ce(h) / h, |_| 1.0, s, &[1.0], 2.0);
    let back = radial(|h| overlap_ce(h) / h, |h| l1(a * h), s, &[1.0], 2.0);
    let oracle = 0.5 * (same + cross + back);
    let pot = MagneticPotential::constant(&[a]).unwrap();
    let r = magnetic_fractional_perimeter(&ShapeSet::interval(0.0, 1.0), &pot, &line(), s, &QuadratureSpec::default())
        .unwrap();
    assert!((r.value - oracle).abs() <= 2.0 * r.est_error, "{r:?} vs {oracle}");
}

#[test]
fn complement_symmetry() {
    let q = QuadratureSpec::default();
    for s in [0.3, 0.8] {
        let p = classical_fractional_perimeter(&ShapeSet::interval(0.0, 1.0), &line(), s, &q).unwrap().value;
        let c = classical_fractional_perimeter(&ShapeSet::interval(-1.0, 0.0), &line(), s, &q).unwrap().value;
        assert!((p - c).abs() < 1e-10 * p);
    }
    let whole = classical_fractional_perimeter(&ShapeSet::interval(-1.0, 1.0), &line(), 0.5, &q).unwrap();
    let empty = classical_fractional_perimeter(&ShapeSet::interval(2.0, 3.0), &line(), 0.5, &q).unwrap();
    assert_eq!((whole.value, empty.value), (0.0, 0.0));
    let sq = Domain::new_box(&[0.0, 0.0], &[1.0, 1.0], &[8, 8]).unwrap();
    let left = ShapeSet::square(&[0.0, 0.0], &[0.5, 1.0]);
    let right = ShapeSet::square(&[0.5, 0.0], &[1.0, 1.0]);
    let p = classical_fractional_perimeter(&left, &sq, 0.5, &q).unwrap().value;
    let c = classical_fractional_perimeter(&right, &sq, 0.5, &q).unwrap().value;
    assert!((p - c).abs() < 1e-10 * p);
}

#[test]
fn perimeter_is_half_the_indicator_energy() {
    let q = QuadratureSpec::default();
    let d = Arc::new(line());
    let e = ShapeSet::interval(0.0, 1.0);
    let u = ComplexField::indicator(d.clone(), e.clone()).unwrap();
    for a in [MagneticPotential::zero(1), MagneticPotential::constant(&[0.3]).unwrap()] {
        let full = fractional_magnetic_energy(&u, &a, &d, 0.6, 1.0, &q).unwrap().value;
        let per = magnetic_fractional_perimeter(&e, &a, &d, 0.6, &q).unwrap().value;
        assert!((full - 2.0 * per).abs() < 1e-10 * full, "{full} vs {per}");
    }
    let d2 = Arc::new(Domain::new_box(&[-1.0, -1.0], &[1.0, 1.0], &[12, 12]).unwrap());
    let disk = ShapeSet::disk(&[0.0, 0.0], 0.5);
    let u2 = ComplexField::indicator(d2.clone(), disk.clone()).unwrap();
    let l = MagneticPotential::landau(2, 1.0).unwrap();
    let full = fractional_magnetic_energy(&u2, &l, &d2, 0.5, 1.0, &q).unwrap().value;
    let per = magnetic_fractional_perimeter(&disk, &l, &d2, 0.5, &q).unwrap().value;
    assert!((full - 2.0 * per).abs() < 1e-10 * full, "{full} vs {per}");
}

#[test]
fn zero_potential_reduction_and_blow_up() {
    let q = QuadratureSpec::default();
    let e = ShapeSet::interval(0.0, 1.0);
    let z = MagneticPotential::zero(1);
    let mut last = 0.0;
    for s in [0.5, 0.7, 0.9] {
        let c = classical_fractional_perimeter(&e, &line(), s, &q).unwrap().value;
        let m = magnetic_fractional_perimeter(&e, &z, &line(), s, &q).unwrap().value;
        assert!((c - m).abs() <= 1e-12 * c);
        assert!(c > last);
        last = c;
    }
}

#[test]
fn indicator_bv_matches_dual_solver() {
    let d = Domain::new_box(&[-1.0], &[1.0], &[128]).unwrap();
    let e = ShapeSet::interval(0.0, 1.0);
    let a = MagneticPotential::constant(&[0.3]).unwrap();
    let closed = indicator_bv(&e, &a, &d).unwrap();
    assert!((closed - 1.3).abs() < 1e-12);
    assert!((indicator_bv(&e, &MagneticPotential::zero(1), &d).unwrap() - 1.0).abs() < 1e-12);
    let u = ComplexField::indicator(Arc::new(d.clone()), e).unwrap();
    let dual = bv_dual(&u, &a, &d, &BvOptions::default()).unwrap().total;
    assert!((dual / closed - 1.0).abs() < 0.03, "{dual}");
}

#[test]
fn sweep_rows_carry_both_normalizations() {
    let rows = perimeter_sweep(
        &ShapeSet::interval(0.0, 1.0),
        &MagneticPotential::zero(1),
        &line(),
        &[0.9, 0.95],
        &QuadratureSpec::default(),
    )
    .unwrap();
    for r in &rows {
        let closed = (2.0 - 2f64.powf(1.0 - r.s)) / (r.s * (1.0 - r.s));
        assert!((r.ps_classical / closed - 1.0).abs() < 1e-4);
        assert!((r.normalized_full - 2.0 * (1.0 - r.s) * r.ps_magnetic).abs() < 1e-9);
        assert_eq!(r.target, 2.0);
    }
}
