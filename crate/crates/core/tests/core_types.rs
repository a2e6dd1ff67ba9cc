use std::sync::Arc;

use magbbm::grid_csv::{self, Layout};
use magbbm::{modulation_phase, pnorm, ComplexField, ComplexVector, Domain, Error, Interp, MagneticPotential};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn pnorm_examples() {
    for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
        let v = pnorm(&ComplexVector::real(&[3.0, 4.0]), p).unwrap();
        assert!((v - 5.0).abs() < 1e-14);
    }
    assert_eq!(pnorm(&ComplexVector::new(vec![c(0.0, 1.0)]), 1.0).unwrap(), 1.0);
    let v = pnorm(&ComplexVector::new(vec![c(1.0, 1.0), c(0.0, 0.0)]), 2.0).unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-15);
    assert!(matches!(pnorm(&ComplexVector::new(vec![c(f64::NAN, 0.0)]), 2.0), Err(Error::InvalidField(_))));
}

#[test]
fn phase_examples() {
    let z = MagneticPotential::zero(2);
    assert_eq!(modulation_phase(&[0.3, 0.1], &[-0.7, 0.9], &z).unwrap(), 0.0);
    let a = MagneticPotential::constant(&[0.5, -2.0]).unwrap();
    let t = modulation_phase(&[0.3, 0.1], &[-0.7, 0.9], &a).unwrap();
    assert!((t - (1.0 * 0.5 + (-0.8) * -2.0)).abs() < 1e-15);
    let l = MagneticPotential::landau(2, 1.0).unwrap();
    assert!((modulation_phase(&[1.0, 0.0], &[0.0, 1.0], &l).unwrap() + 0.5).abs() < 1e-15);
    assert!(matches!(modulation_phase(&[1.0], &[0.0, 1.0], &l), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn gradient_examples() {
    let d = Arc::new(Domain::new_box(&[-1.0, -1.0], &[1.0, 1.0], &[8, 8]).unwrap());
    let a = MagneticPotential::constant(&[0.5, 2.0]).unwrap();
    let u = ComplexField::plane_wave(d.clone(), &[0.5, 2.0]).unwrap();
    for x in [[0.1, 0.2], [-0.9, 0.7]] {
        let g = u.magnetic_gradient(&a, &x).unwrap();
        assert!(g.components().iter().all(|z| z.norm() < 1e-14));
    }
    let lin = ComplexField::linear(d.clone(), &[1.0, 0.0], 0.0).unwrap();
    let g = lin.magnetic_gradient(&MagneticPotential::zero(2), &[0.3, -0.4]).unwrap();
    assert_eq!(g.components(), &[c(1.0, 0.0), c(0.0, 0.0)]);
}

/// Sampled Gaussian on a grid with a node at (0.5, 0): stencil error falls like h².
#[test]
fn sampled_gradient_converges_to_analytic_at_second_order() {
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let target = [0.5, 0.0];
    let mut errs = Vec::new();
    for n in [8usize, 16, 32] {
        let h = 2.0 / n as f64;
        // centers at -1 + k h, so (0.5, 0) is a center
        let lo = [-1.0 - 0.5 * h, -1.0 - 0.5 * h];
        let hi = [1.0 - 0.5 * h, 1.0 - 0.5 * h];
        let d = Arc::new(Domain::new_box(&lo, &hi, &[n, n]).unwrap());
        let values: Vec<Complex64> = (0..d.cell_count())
            .map(|k| {
                let p = d.center(k);
                c((-(p[0] * p[0] + p[1] * p[1])).exp(), 0.0)
            })
            .collect();
        let s = ComplexField::sampled(d.clone(), values, Interp::Linear).unwrap();
        let k = d.locate(&target).unwrap();
        let p = d.center(k);
        let x = [p[0], p[1]];
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
        let exact = ComplexField::gaussian(d.clone(), &[0.0, 0.0], 1.0).unwrap().magnetic_gradient(&a, &x).unwrap();
        let fd = s.magnetic_gradient(&a, &x).unwrap();
        let e: f64 = exact.components().iter().zip(fd.components()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate > 1.8, "{errs:?}");
    }
}

#[test]
fn csv_round_trip_and_tensor_grid_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    std::fs::write(&path, "x1,re,im\n0.25,1,0\n0.75,0,2\n").unwrap();
    let f = ComplexField::from_csv(&path).unwrap();
    assert_eq!(f.node_values(), vec![c(1.0, 0.0), c(0.0, 2.0)]);
    let g = grid_csv::parse("x1,x2,a1,a2\n0,0,1,1\n1,0,1,1\n0,1,1,1\n", Layout::Potential);
    assert!(matches!(g, Err(Error::TensorGrid(_))));
}

#[test]
fn sampled_potential_lipschitz_bound() {
    let text = "x1,x2,a1,a2\n0,0,0,0\n1,0,0,0.5\n0,1,-0.5,0\n1,1,-0.5,0.5\n";
    let g = grid_csv::parse(text, Layout::Potential).unwrap();
    let a = MagneticPotential::sampled(&g.domain, g.values).unwrap();
    assert!((a.lipschitz_bound() - 0.5).abs() < 1e-12);
}
