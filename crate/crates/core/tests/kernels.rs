use std::sync::Arc;

use magbbm::kernels::{bbm_kernel, mollify, mollify_at, validate_kernel_sequence, Mollifier};
use magbbm::quadrature::adaptive;
use magbbm::{ComplexField, Domain, Error, ShapeSet};
use num_complex::Complex64;

#[test]
fn core_moment_closed_form_against_adaptive_oracle() {
    for (s, p, r, n) in [(0.5, 2.0, 1.0, 1usize), (0.75, 1.0, 2.0, 1), (0.9, 2.0, 1.5, 2), (0.99, 1.5, 1.0, 3)] {
        let k = bbm_kernel(s, p, r, n).unwrap();
        let closed = r.powf(p * (1.0 - s));
        // ρ r^{N−1} = p(1−s) r^{p(1−s)−1} on the core; integrate in u = r^{p(1−s)}
        let gamma = p * (1.0 - s);
        let oracle = adaptive(
            |u: f64| {
                let t = u.powf(1.0 / gamma);
                k.eval(t) * t.powi(n as i32 - 1) * t.powf(1.0 - gamma) / gamma
            },
            0.0,
            closed,
            1e-14,
            1e-13,
        )
        .value;
        // t = u^{1/γ} underflows near u = 0 when γ is small
        if gamma >= 0.2 {
            assert!((oracle - closed).abs() < 1e-10, "{oracle} vs {closed}");
        }
        let m = k.moment(0.0, r, n, 0.0);
        assert!((m - closed).abs() < 1e-8 * closed, "s={s}: {m} vs {closed}");
    }
    assert!((bbm_kernel(0.75, 1.0, 2.0, 1).unwrap().moment(0.0, 2.0, 1, 0.0) - 1.189207115).abs() < 1e-8);
}

#[test]
fn cutoff_moment_against_adaptive_oracle() {
    let k = bbm_kernel(0.7, 2.0, 1.0, 2).unwrap();
    let oracle = adaptive(|r: f64| k.eval(r) * r, 1.0, 2.0, 1e-15, 1e-13).value;
    assert!((k.moment(1.0, 2.0, 2, 0.0) - oracle).abs() < 1e-8 * oracle);
}

#[test]
fn kernel_sequence_report() {
    let ks: Vec<_> = [0.5, 0.7, 0.9, 0.99].iter().map(|&s| bbm_kernel(s, 1.0, 1.0, 1).unwrap()).collect();
    let rep = validate_kernel_sequence(&ks, 1).unwrap();
    for k in &rep.kernels {
        assert!((k.core_moment.unwrap() - 1.0).abs() < 1e-8);
    }
    assert!(rep.tails_decreasing && rep.convergent);
    // ∫₀^δ ρ r^β = p(1−s)/(p(1−s)+β) δ^{p(1−s)+β}: decreasing in s for δ ≥ 0.5, not for δ = 0.1
    for (b, beta) in [0.5, 1.0].into_iter().enumerate() {
        for (j, delta) in [0.1f64, 0.5, 1.0].into_iter().enumerate() {
            for k in &rep.kernels {
                let g = 1.0 - k.s.unwrap();
                let closed = g / (g + beta) * delta.powf(g + beta);
                assert!((k.beta_moments[b][j] - closed).abs() < 1e-8, "beta={beta} delta={delta}");
            }
        }
        for j in 1..3 {
            assert!(rep.kernels.windows(2).all(|w| w[1].beta_moments[b][j] < w[0].beta_moments[b][j]));
        }
    }
    assert!(!rep.beta_moments_decreasing);
    let tails: Vec<f64> = rep.kernels.iter().map(|k| k.tails[1]).collect();
    assert!(tails.windows(2).all(|w| w[1] < w[0]), "{tails:?}");
    let last = rep.kernels.last().unwrap();
    let beta = last.beta_moments[1][2];
    let closed = 0.01 / (0.01 + 1.0);
    assert!((beta - closed).abs() < 1e-8 && beta <= 0.02);
    assert!(rep.to_csv().starts_with("s,total_moment,tail_0.1,tail_0.5,tail_1.0,beta_moment\n0.5,"));
}

#[test]
fn kernel_checks() {
    assert!(bbm_kernel(1.0, 2.0, 1.0, 1).is_err());
    assert!(bbm_kernel(0.5, 2.0, 0.0, 1).is_err());
    let k = bbm_kernel(0.5, 2.0, 1.0, 1).unwrap();
    assert!((0..400).all(|i| k.eval(i as f64 * 0.01) >= 0.0));
    assert_eq!(k.eval(2.5), 0.0);
}

#[test]
fn mollifier_examples() {
    let d = Arc::new(Domain::new_box(&[-1.0, -1.0], &[1.0, 1.0], &[16, 16]).unwrap());
    let u = ComplexField::constant(d.clone(), Complex64::new(2.0, -1.0)).unwrap();
    let m = Mollifier::new(2, 0.25).unwrap();
    let v = mollify_at(&u, &m, &[0.1, -0.2]).unwrap();
    assert!((v - Complex64::new(2.0, -1.0)).norm() < 1e-10);
    let zero = ComplexField::constant(d.clone(), Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(mollify_at(&zero, &m, &[0.0, 0.0]).unwrap(), Complex64::new(0.0, 0.0));

    let line = Arc::new(Domain::new_box(&[-1.0], &[2.0], &[48]).unwrap());
    let jump = ComplexField::indicator(line.clone(), ShapeSet::interval(0.0, 1.0)).unwrap();
    let v = mollify_at(&jump, &Mollifier::new(1, 0.25).unwrap(), &[0.0]).unwrap();
    assert!((v.re - 0.5).abs() < 1e-10 && v.im == 0.0);
    assert!(matches!(
        mollify(&jump, &Mollifier::new(1, 0.01).unwrap()),
        Err(Error::UnresolvedMollifier { .. })
    ));
}

#[test]
fn mollification_contracts_and_converges_in_l1() {
    let line = Arc::new(Domain::new_box(&[-1.0], &[2.0], &[384]).unwrap());
    let u = ComplexField::indicator(line.clone(), ShapeSet::interval(0.0, 1.0)).unwrap();
    let norm = u.l1_norm(&line);
    let mut errs = Vec::new();
    for eps in [0.4, 0.2, 0.1, 0.05] {
        let ue = mollify(&u, &Mollifier::new(1, eps).unwrap()).unwrap();
        assert!(ue.l1_norm(&line) <= norm * (1.0 + 1e-9));
        let vol = line.cell_volume();
        let err: f64 = (0..line.cell_count())
            .map(|c| (ue.node_values()[c] - u.cell_average(c)).norm() * vol)
            .sum();
        errs.push(err);
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}
