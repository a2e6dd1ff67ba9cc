use std::sync::Arc;

use magbbm::functionals::QuadratureSpec;
use magbbm::harness::{bbm_sweep, byproduct_check, extrapolate_limit, fit_limit, sweep, EnergyForm, FitModel};
use magbbm::{ComplexField, Domain, MagneticPotential, ShapeSet};
use num_complex::Complex64;

fn boxed(lo: &[f64], hi: &[f64], n: usize) -> Arc<Domain> {
    Arc::new(Domain::new_box(lo, hi, &vec![n; lo.len()]).unwrap())
}

#[test]
fn linear_sweep_matches_closed_form() {
    let d = boxed(&[0.0], &[1.0], 64);
    let u = ComplexField::linear(d.clone(), &[1.0], 0.0).unwrap();
    let s_list = [0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
    let t = bbm_sweep(&u, &MagneticPotential::zero(1), &d, 2.0, &s_list, &QuadratureSpec::default()).unwrap();
    for r in &t.rows {
        let closed = 1.0 / (3.0 - 2.0 * r.s);
        assert!((r.normalized - closed).abs() < 1e-6, "s={}: {}", r.s, r.normalized);
        assert!((r.target - 1.0).abs() < 1e-12);
    }
    let l = extrapolate_limit(&t, FitModel::Auto).unwrap();
    assert!((l.extrapolated_value - 1.0).abs() < 1e-2, "{l:?}");
    let mut fewer = t.clone();
    fewer.rows.remove(0);
    let l2 = extrapolate_limit(&fewer, FitModel::Auto).unwrap();
    assert!((l2.extrapolated_value - l.extrapolated_value).abs() < 1e-2);
}

#[test]
fn plane_wave_energies_vanish() {
    let d = boxed(&[-1.0, -1.0], &[1.0, 1.0], 8);
    let k = [0.7, -1.2];
    let u = ComplexField::plane_wave(d.clone(), &k).unwrap();
    let a = MagneticPotential::constant(&k).unwrap();
    let t = bbm_sweep(&u, &a, &d, 2.0, &[0.6, 0.8, 0.9], &QuadratureSpec::default()).unwrap();
    for r in &t.rows {
        assert!(r.normalized.abs() < 1e-10, "{r:?}");
        assert!(r.target.abs() < 1e-12);
    }
    let l = extrapolate_limit(&t, FitModel::Affine).unwrap();
    assert!(l.extrapolated_value.abs() < 1e-10);
}

#[test]
fn indicator_sweep_matches_closed_form() {
    let d = boxed(&[-1.0], &[1.0], 32);
    let u = ComplexField::indicator(d.clone(), ShapeSet::interval(0.0, 1.0)).unwrap();
    let t = bbm_sweep(&u, &MagneticPotential::zero(1), &d, 1.0, &[0.9, 0.95, 0.99], &QuadratureSpec::default()).unwrap();
    for r in &t.rows {
        let closed = 2.0 * (2.0 - 2f64.powf(1.0 - r.s)) / r.s;
        assert!((r.normalized / closed - 1.0).abs() < 1e-4, "s={}: {} vs {closed}", r.s, r.normalized);
        assert!((r.target - 2.0).abs() < 1e-12);
    }
}

#[test]
fn kernel_route_agrees_with_fractional_route() {
    let d = boxed(&[0.0, 0.0], &[1.0, 1.0], 8);
    let u = ComplexField::gaussian(d.clone(), &[0.3, 0.6], 0.5).unwrap();
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let q = QuadratureSpec::default();
    let s_list = [0.6, 0.8, 0.95];
    let f = sweep(&u, &a, &d, 2.0, &s_list, &q, EnergyForm::Fractional).unwrap();
    let k = sweep(&u, &a, &d, 2.0, &s_list, &q, EnergyForm::Kernel { r_omega: 2f64.sqrt() }).unwrap();
    for (x, y) in f.rows.iter().zip(&k.rows) {
        assert!((x.normalized - y.normalized).abs() <= 1e-10 * x.normalized, "{x:?} vs {y:?}");
        assert_eq!(x.target, y.target);
    }
}

#[test]
fn target_does_not_depend_on_s() {
    let d = boxed(&[-1.0, -1.0], &[1.0, 1.0], 8);
    let u = ComplexField::gaussian(d.clone(), &[0.0, 0.0], 1.0).unwrap();
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let t = bbm_sweep(&u, &a, &d, 2.0, &[0.6, 0.9], &QuadratureSpec::default()).unwrap();
    assert_eq!(t.rows[0].target, t.rows[1].target);
    assert!(t.rows[0].target > 0.0);
}

#[test]
fn extrapolation_examples() {
    let z = fit_limit(&[(0.4, 3.0), (0.2, 3.0), (0.1, 3.0)], FitModel::Affine).unwrap();
    assert!((z.extrapolated_value - 3.0).abs() < 1e-12 && z.residual < 1e-12);
    let zero = fit_limit(&[(0.4, 0.0), (0.2, 0.0), (0.1, 0.0), (0.05, 0.0)], FitModel::Auto).unwrap();
    assert_eq!((zero.extrapolated_value, zero.residual), (0.0, 0.0));
    let line = fit_limit(&[(0.3, 1.6), (0.2, 1.4), (0.1, 1.2)], FitModel::Affine).unwrap();
    assert!((line.extrapolated_value - 1.0).abs() < 1e-12);
    let quad = fit_limit(&[(0.4, 1.16), (0.3, 1.09), (0.2, 1.04), (0.1, 1.01)], FitModel::Quadratic).unwrap();
    assert!((quad.extrapolated_value - 1.0).abs() < 1e-12);
    assert!(fit_limit(&[(0.1, 1.0), (0.2, f64::NAN), (0.3, 1.0)], FitModel::Affine).is_err());
}

#[test]
fn byproduct_positive_controls() {
    let q = QuadratureSpec::default();
    let d = boxed(&[-1.0, -1.0], &[1.0, 1.0], 6);
    let k = [0.4, 1.1];
    let wave = ComplexField::plane_wave(d.clone(), &k).unwrap();
    let a = MagneticPotential::constant(&k).unwrap();
    let r = byproduct_check(&wave, &a, &d, 2.0, &[0.6, 0.8], &q, 1e-8, 1e-8).unwrap();
    assert!(r.hypothesis_met, "{r:?}");
    assert!(r.system_residual.unwrap() < 1e-12);

    let c = ComplexField::constant(d.clone(), Complex64::new(0.5, 0.5)).unwrap();
    let r = byproduct_check(&c, &MagneticPotential::zero(2), &d, 2.0, &[0.6, 0.8], &q, 1e-8, 1e-8).unwrap();
    assert!(r.hypothesis_met && r.system_residual == Some(0.0));
}

#[test]
fn byproduct_negative_control() {
    let d = boxed(&[-1.0, -1.0], &[1.0, 1.0], 6);
    let u = ComplexField::gaussian(d.clone(), &[0.0, 0.0], 1.0).unwrap();
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let r = byproduct_check(&u, &a, &d, 2.0, &[0.6, 0.8], &QuadratureSpec::default(), 1e-8, 1e-8).unwrap();
    assert!(!r.hypothesis_met);
    assert!(r.message.contains("hypothesis not met"));
}
