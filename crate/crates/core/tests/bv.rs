use std::f64::consts::PI;
use std::sync::Arc;

use magbbm::bv::{bv_dual, bv_norm, bv_primal_smooth, discrete_measures, extend_by_zero, BvOptions};
use magbbm::perimeter::indicator_bv;
use magbbm::quadrature::GaussRule;
use magbbm::{ComplexField, Domain, MagneticPotential, Profile, ShapeSet};
use num_complex::Complex64;

fn boxed(lo: &[f64], hi: &[f64], n: usize) -> Arc<Domain> {
    Arc::new(Domain::new_box(lo, hi, &vec![n; lo.len()]).unwrap())
}

#[test]
fn dual_matches_primal_on_smooth_presets() {
    let opts = BvOptions::default();
    let line = boxed(&[0.0], &[1.0], 256);
    let sq = boxed(&[0.0, 0.0], &[1.0, 1.0], 128);
    let cases = vec![
        (ComplexField::linear(line.clone(), &[1.0], 0.0).unwrap(), MagneticPotential::zero(1), line.clone()),
        (ComplexField::gaussian(line.clone(), &[0.4], 0.3).unwrap(), MagneticPotential::constant(&[1.5]).unwrap(), line.clone()),
        (
            ComplexField::gaussian(sq.clone(), &[0.0, 0.0], 1.0).unwrap(),
            MagneticPotential::landau(2, 1.0).unwrap(),
            sq.clone(),
        ),
        (
            ComplexField::bump(sq.clone(), &[0.5, 0.5], 0.45).unwrap().modulated(&[1.0, -0.5]).unwrap(),
            MagneticPotential::landau(2, 2.0).unwrap(),
            sq.clone(),
        ),
    ];
    for (u, a, d) in &cases {
        let primal = bv_primal_smooth(u, a, d).unwrap();
        let dual = bv_dual(u, a, d, &opts).unwrap().total;
        assert!((dual / primal - 1.0).abs() < 1e-2, "{}: dual {dual} primal {primal}", u.label());
        assert!(dual <= primal * 1.01);
    }
}

/// Σ|ū_{i+1} − ū_i| over cell averages.
fn brute_force_tv_1d(u: &ComplexField, d: &Domain) -> f64 {
    (1..d.cell_count()).map(|i| (u.cell_average(i) - u.cell_average(i - 1)).norm()).sum()
}

#[test]
fn indicator_of_interval_has_two_jumps() {
    let d = boxed(&[-1.0], &[2.0], 150);
    let u = ComplexField::indicator(d.clone(), ShapeSet::interval(0.0, 1.0)).unwrap();
    let oracle = brute_force_tv_1d(&u, &d);
    assert!((oracle - 2.0).abs() < 1e-12);
    let r = bv_dual(&u, &MagneticPotential::zero(1), &d, &BvOptions::default()).unwrap();
    assert!((r.total - oracle).abs() < 0.02 * oracle, "{r:?}");
}

#[test]
fn magnetic_disk_at_two_resolutions() {
    let e = ShapeSet::disk(&[0.0, 0.0], 0.5);
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let exact = PI + PI / 24.0;
    for n in [64, 128] {
        let d = boxed(&[-1.0, -1.0], &[1.0, 1.0], n);
        let u = ComplexField::indicator(d.clone(), e.clone()).unwrap();
        let r = bv_dual(&u, &a, &d, &BvOptions::default()).unwrap();
        assert!((r.total / exact - 1.0).abs() < 0.03, "n={n}: {r:?}");
        let closed = indicator_bv(&e, &a, &d).unwrap();
        assert!((closed / exact - 1.0).abs() < 5e-5, "{closed}");
        assert!((r.total / closed - 1.0).abs() < 0.03);
    }
}

#[test]
fn bv_norm_examples() {
    let d = boxed(&[0.0], &[1.0], 64);
    let opts = BvOptions::default();
    let zero = ComplexField::constant(d.clone(), Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(bv_norm(&zero, &MagneticPotential::zero(1), &d, &opts).unwrap(), 0.0);
    let one = ComplexField::constant(d.clone(), Complex64::new(1.0, 0.0)).unwrap();
    assert!((bv_norm(&one, &MagneticPotential::zero(1), &d, &opts).unwrap() - 1.0).abs() < 1e-12);
    let a = MagneticPotential::constant(&[0.8]).unwrap();
    assert!((bv_norm(&one, &a, &d, &opts).unwrap() - 1.8).abs() < 1e-6);
    let wave = ComplexField::plane_wave(d.clone(), &[0.8]).unwrap();
    assert!(bv_primal_smooth(&wave, &a, &d).unwrap().abs() < 1e-12);
}

#[test]
fn extension_adds_boundary_jumps() {
    let omega = boxed(&[0.0], &[1.0], 40);
    let w = boxed(&[-1.0], &[2.0], 120);
    let z = MagneticPotential::zero(1);
    let opts = BvOptions::default();
    let u = ComplexField::indicator(omega.clone(), ShapeSet::interval(0.0, 1.0)).unwrap();
    let inside = bv_dual(&u, &z, &omega, &opts).unwrap().total;
    assert!(inside.abs() < 1e-12);
    let e = extend_by_zero(&u, &omega, &w).unwrap();
    let outside = bv_dual(&e, &z, &w, &opts).unwrap().total;
    assert!((outside - 2.0).abs() < 0.02 * 2.0 && outside >= inside);

    let sq = boxed(&[0.0, 0.0], &[1.0, 1.0], 24);
    let big = boxed(&[-0.5, -0.5], &[1.5, 1.5], 48);
    let g = ComplexField::gaussian(sq.clone(), &[0.5, 0.5], 0.3).unwrap();
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let t_in = bv_dual(&g, &a, &sq, &opts).unwrap().total;
    let t_out = bv_dual(&extend_by_zero(&g, &sq, &big).unwrap(), &a, &big, &opts).unwrap().total;
    assert!(t_out >= t_in, "{t_out} < {t_in}");
}

/// ∫ f over the masked cells of d, Gauss order 4 per cell.
fn integrate(d: &Domain, f: impl Fn(&[f64]) -> f64) -> f64 {
    let g = GaussRule::legendre(4);
    let dim = d.dim();
    let w = d.widths();
    let mut acc = 0.0;
    for &c in d.masked_cells() {
        let lo = d.cell_lo(c);
        for k in 0..4usize.pow(dim as u32) {
            let mut x = vec![0.0; dim];
            let mut wt = d.cell_volume();
            let mut r = k;
            for i in 0..dim {
                let j = r % 4;
                r /= 4;
                x[i] = lo[i] + 0.5 * w[i] * (1.0 + g.nodes[j]);
                wt *= 0.5 * g.weights[j];
            }
            acc += wt * f(&x);
        }
    }
    acc
}

#[test]
fn product_rule_at_the_smooth_level() {
    let a = MagneticPotential::landau(2, 1.0).unwrap();
    let psi = Profile::Gaussian { center: vec![0.6, 0.3], width: 0.5, amplitude: Complex64::new(1.0, 0.0) };
    let psi_val = |x: &[f64]| (-((x[0] - 0.6).powi(2) + (x[1] - 0.3).powi(2)) / 0.25).exp();
    let psi_grad = |x: &[f64]| {
        let v = psi_val(x);
        [-2.0 * (x[0] - 0.6) / 0.25 * v, -2.0 * (x[1] - 0.3) / 0.25 * v]
    };
    let l1 = |z: &magbbm::ComplexVector| {
        let (re, im) = z.part_norms();
        re + im
    };
    let mut measure_err = Vec::new();
    for n in [24usize, 48] {
        let d = boxed(&[0.0, 0.0], &[1.0, 1.0], n);
        let u = ComplexField::gaussian(d.clone(), &[0.2, 0.7], 0.6).unwrap().modulated(&[1.0, 0.5]).unwrap();
        let pu = u.times(psi.clone()).unwrap();
        let lhs = bv_primal_smooth(&pu, &a, &d).unwrap();
        let rhs = integrate(&d, |x| {
            let g = u.magnetic_gradient(&a, x).unwrap();
            let v = u.eval(x).unwrap();
            let dp = psi_grad(x);
            psi_val(x).abs() * l1(&g) + (v.re.abs() + v.im.abs()) * (dp[0] * dp[0] + dp[1] * dp[1]).sqrt()
        });
        assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} > {rhs}");

        let mu = discrete_measures(&u, &a, &d).unwrap();
        let mpu = discrete_measures(&pu, &a, &d).unwrap();
        let vol = d.cell_volume();
        let cells = d.shrunken(2.0 * d.max_width());
        let mut worst = 0.0f64;
        for &c in cells.masked_cells() {
            let x = cells.center(c);
            let cell = d.locate(&x[..2]).unwrap();
            let (m_re, _) = mu.at(cell).unwrap();
            let (p_re, _) = mpu.at(cell).unwrap();
            let re_u = u.eval(&x[..2]).unwrap().re;
            let dp = psi_grad(&x[..2]);
            let ps = psi_val(&x[..2]);
            for i in 0..2 {
                let expected = ps * m_re[i] - re_u * dp[i] * vol;
                worst = worst.max((p_re[i] - expected).abs() / vol);
            }
        }
        measure_err.push(worst);
    }
    let rate = (measure_err[0] / measure_err[1]).log2();
    assert!(rate > 1.7, "{measure_err:?}");
}
