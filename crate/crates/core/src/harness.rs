//! s-sweeps of the normalized energies and extrapolation of the s → 1 limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bv::{bv_dual, BvOptions};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{ComplexField, Profile};
use crate::functionals::{
    fractional_magnetic_energy, local_magnetic_energy, weighted_difference_energy, EnergyResult, QuadratureSpec,
};
use crate::kernels::bbm_kernel;
use crate::perimeter::indicator_bv;
use crate::potential::{MagneticPotential, PotentialKind};
use crate::sphere::q_constant_default;

pub const DEFAULT_S_GRID: [f64; 6] = [0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnergyForm {
    /// (1 − s)·Gagliardo energy.
    Fractional,
    /// BBM-kernel weighted energy divided by p.
    Kernel { r_omega: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub raw: f64,
    pub normalized: f64,
    pub target: f64,
    pub rel_error: f64,
    pub est_error: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub p: f64,
    pub dim: usize,
    pub field: String,
    pub potential: String,
    pub resolution: Vec<usize>,
    pub quadrature: QuadratureSpec,
    pub form: EnergyForm,
    /// How the target was obtained.
    pub target_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// Quadratic in (1 − s) with four or more rows, affine otherwise.
    #[default]
    Auto,
    Affine,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub extrapolated_value: f64,
    pub fit_model: FitModel,
    /// Largest absolute residual of the fit.
    pub residual: f64,
}

pub fn potential_label(a: &MagneticPotential) -> String {
    match a.kind() {
        PotentialKind::Zero => "zero".into(),
        PotentialKind::Constant(v) => format!("constant{:?}", &v[..a.dim()]),
        PotentialKind::Landau { b } => format!("landau(B={b})"),
        PotentialKind::Radial { alpha } => format!("radial(alpha={alpha})"),
        PotentialKind::Sampled { .. } => "sampled".into(),
    }
}

fn check_s_list(s_list: &[f64]) -> Result<()> {
    if s_list.is_empty() {
        return Err(Error::param("s_list", "needs at least one value"));
    }
    if let Some(&s) = s_list.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::param("s_list", format!("s must lie in (0, 1), got {s}")));
    }
    if s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("s_list", "values must be strictly increasing"));
    }
    Ok(())
}

/// Q_{p,N}·∫|∇u − iAu|_p^p for smooth u; Q_{1,N}·|Du|_A for BV inputs.
pub fn bbm_target(u: &ComplexField, a: &MagneticPotential, omega: &Domain, p: f64) -> Result<(f64, String)> {
    let n = omega.dim();
    if u.is_smooth() {
        let q = q_constant_default(p, n)?;
        let local = local_magnetic_energy(u, a, omega, p)?;
        return Ok((q * local.value, "Q_pN * local energy".into()));
    }
    if p != 1.0 {
        return Err(Error::param("p", format!("non-smooth inputs need p = 1, got {p}")));
    }
    let q = q_constant_default(1.0, n)?;
    if let Profile::Indicator(e) = u.profile() {
        if u.wave().iter().all(|&w| w == 0.0) {
            return Ok((q * indicator_bv(e, a, omega)?, "Q_1N * indicator BV".into()));
        }
    }
    let tv = bv_dual(u, a, omega, &BvOptions::default())?;
    Ok((q * tv.total, "Q_1N * dual total variation".into()))
}

fn row(s: f64, raw: &EnergyResult, normalized: f64, scale: f64, target: f64) -> SweepRow {
    let rel_error = if target == 0.0 { normalized.abs() } else { (normalized - target).abs() / target.abs() };
    SweepRow { s, raw: raw.value, normalized, target, rel_error, est_error: raw.est_error * scale, warning: raw.warning.clone() }
}

/// Normalized energies at each s against the local target.
pub fn bbm_sweep(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    p: f64,
    s_list: &[f64],
    q: &QuadratureSpec,
) -> Result<SweepTable> {
    sweep(u, a, omega, p, s_list, q, EnergyForm::Fractional)
}

/// Sweep in either normalization.
pub fn sweep(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    p: f64,
    s_list: &[f64],
    q: &QuadratureSpec,
    form: EnergyForm,
) -> Result<SweepTable> {
    check_s_list(s_list)?;
    q.validate()?;
    let (target, target_source) = bbm_target(u, a, omega, p)?;
    let n = omega.dim();
    let rows = s_list
        .par_iter()
        .map(|&s| match form {
            EnergyForm::Fractional => {
                let e = fractional_magnetic_energy(u, a, omega, s, p, q)?;
                Ok(row(s, &e, (1.0 - s) * e.value, 1.0 - s, target))
            }
            EnergyForm::Kernel { r_omega } => {
                let rho = bbm_kernel(s, p, r_omega, n)?;
                let e = weighted_difference_energy(u, a, omega, &rho, p, q)?;
                Ok(row(s, &e, e.value / p, 1.0 / p, target))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = SweepMeta {
        p,
        dim: n,
        field: u.label().to_string(),
        potential: potential_label(a),
        resolution: omega.resolution().to_vec(),
        quadrature: *q,
        form,
        target_source,
    };
    Ok(SweepTable { rows, meta })
}

/// Least-squares fit of normalized(s) in t = 1 − s; the limit is the value at t = 0.
pub fn extrapolate_limit(table: &SweepTable, model: FitModel) -> Result<LimitEstimate> {
    let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| (1.0 - r.s, r.normalized)).collect();
    fit_limit(&pts, model)
}

/// As [`extrapolate_limit`] on raw (t, value) pairs.
pub fn fit_limit(pts: &[(f64, f64)], model: FitModel) -> Result<LimitEstimate> {
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 rows, got {}", pts.len())));
    }
    if pts.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::DegenerateFit("non-finite row".into()));
    }
    let model = match model {
        FitModel::Auto if pts.len() >= 4 => FitModel::Quadratic,
        FitModel::Auto => FitModel::Affine,
        m => m,
    };
    let degree = if model == FitModel::Quadratic { 2 } else { 1 };
    let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= degree {
        return Err(Error::DegenerateFit(format!("{} distinct s values for a degree-{degree} fit", distinct.len())));
    }
    let coef = polyfit(pts, degree)?;
    let eval = |t: f64| coef.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let residual = pts.iter().map(|&(t, y)| (eval(t) - y).abs()).fold(0.0, f64::max);
    Ok(LimitEstimate { extrapolated_value: coef[0], fit_model: model, residual })
}

/// Coefficients c₀..c_d of the least-squares polynomial, by the normal
/// equations in scaled t.
fn polyfit(pts: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    let m = degree + 1;
    let scale = pts.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut a = vec![vec![0.0; m + 1]; m];
    for &(t, y) in pts {
        let x = t / scale;
        let pw: Vec<f64> = (0..2 * m).map(|k| x.powi(k as i32)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += pw[i + j];
            }
            a[i][m] += pw[i] * y;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col].abs() < 1e-14 {
            return Err(Error::DegenerateFit("singular normal equations".into()));
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..=m {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    Ok((0..m).map(|i| a[i][m] / a[i][i] / scale.powi(i as i32)).collect())
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("s,raw,normalized,target,rel_error\n");
    for r in &table.rows {
        out.push_str(&format!("{},{:.15e},{:.15e},{:.15e},{:.6e}\n", r.s, r.raw, r.normalized, r.target, r.rel_error));
    }
    out
}

/// normalized(s) as a polyline with the target as a dashed line.
pub fn sweep_svg(table: &SweepTable) -> String {
    let (w, h, pad) = (640.0, 400.0, 48.0);
    let target = table.rows.first().map_or(0.0, |r| r.target);
    let mut ys: Vec<f64> = table.rows.iter().map(|r| r.normalized).collect();
    ys.push(target);
    let (mut lo, mut hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let sx = |s: f64| pad + (s - 0.5) / 0.5 * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - lo) / (hi - lo) * (h - 2.0 * pad);
    let points: Vec<String> =
        table.rows.iter().map(|r| format!("{:.2},{:.2}", sx(r.s), sy(r.normalized))).collect();
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    out += &format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
    out += &format!(
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - pad,
        w - pad
    );
    out += &format!(
        "<line x1=\"{pad}\" y1=\"{0:.2}\" x2=\"{1}\" y2=\"{0:.2}\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n",
        sy(target),
        w - pad
    );
    out += &format!("<polyline fill=\"none\" stroke=\"blue\" stroke-width=\"2\" points=\"{}\"/>\n", points.join(" "));
    for r in &table.rows {
        out += &format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"blue\"/>\n", sx(r.s), sy(r.normalized));
    }
    out += &format!("<text x=\"{}\" y=\"{}\" font-size=\"12\">s</text>\n", w / 2.0, h - 12.0);
    out += &format!("<text x=\"8\" y=\"{pad}\" font-size=\"12\">{hi:.4}</text>\n");
    out += &format!("<text x=\"8\" y=\"{}\" font-size=\"12\">{lo:.4}</text>\n", h - pad);
    out += "</svg>\n";
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByproductReport {
    pub normalized: Vec<f64>,
    pub hypothesis_met: bool,
    /// max over cell centers of |∇Re u + A Im u| + |∇Im u − A Re u|.
    pub system_residual: Option<f64>,
    pub message: String,
}

/// When every normalized energy is below `tol`, checks the system
/// ∇Re u = −A Im u, ∇Im u = A Re u at the cell centers.
#[allow(clippy::too_many_arguments)]
pub fn byproduct_check(
    u: &ComplexField,
    a: &MagneticPotential,
    omega: &Domain,
    p: f64,
    s_list: &[f64],
    q: &QuadratureSpec,
    tol: f64,
    system_tol: f64,
) -> Result<ByproductReport> {
    let table = bbm_sweep(u, a, omega, p, s_list, q)?;
    let normalized: Vec<f64> = table.rows.iter().map(|r| r.normalized).collect();
    if normalized.iter().any(|&v| v >= tol) {
        return Ok(ByproductReport {
            normalized,
            hypothesis_met: false,
            system_residual: None,
            message: "hypothesis not met: normalized energies are not small".into(),
        });
    }
    let dim = omega.dim();
    let mut worst = 0.0f64;
    for &c in omega.masked_cells() {
        let x = omega.center(c);
        let t = u.magnetic_gradient(a, &x[..dim])?;
        let (re, im) = t.part_norms();
        worst = worst.max(re + im);
    }
    let ok = worst < system_tol;
    Ok(ByproductReport {
        normalized,
        hypothesis_met: true,
        system_residual: Some(worst),
        message: if ok { "system satisfied".into() } else { format!("system residual {worst:.3e} ≥ {system_tol:.1e}") },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn rows(f: impl Fn(f64) -> f64, s: &[f64]) -> Vec<(f64, f64)> {
        s.iter().map(|&s| (1.0 - s, f(s))).collect()
    }

    #[test]
    fn extrapolates_closed_forms() {
        let l = fit_limit(&rows(|s| 1.0 / (3.0 - 2.0 * s), &[0.8, 0.9, 0.95, 0.99]), FitModel::Auto).unwrap();
        assert_eq!(l.fit_model, FitModel::Quadratic);
        assert!((l.extrapolated_value - 1.0).abs() < 1e-2);
        let g = |s: f64| 2.0 * (2.0 - 2f64.powf(1.0 - s)) / s;
        let l = fit_limit(&rows(g, &[0.9, 0.95, 0.99]), FitModel::Auto).unwrap();
        assert_eq!(l.fit_model, FitModel::Affine);
        assert!((l.extrapolated_value - 2.0).abs() < 2e-2);
        let z = fit_limit(&rows(|_| 0.0, &[0.6, 0.8, 0.9]), FitModel::Affine).unwrap();
        assert_eq!((z.extrapolated_value, z.residual), (0.0, 0.0));
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(fit_limit(&[(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)], FitModel::Affine), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_limit(&[(0.1, 1.0), (0.2, 2.0)], FitModel::Auto), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn linear_sweep_rows() {
        let d = Arc::new(Domain::new_box(&[0.0], &[1.0], &[32]).unwrap());
        let u = ComplexField::linear(d.clone(), &[1.0], 0.0).unwrap();
        let t = bbm_sweep(&u, &MagneticPotential::zero(1), &d, 2.0, &[0.9], &QuadratureSpec::default()).unwrap();
        assert!((t.rows[0].normalized - 1.0 / 1.2).abs() < 1e-6);
        assert!((t.rows[0].target - 1.0).abs() < 1e-12);
        let csv = sweep_csv(&t);
        assert!(csv.starts_with("s,raw,normalized,target,rel_error\n0.9,"));
        assert!(sweep_svg(&t).contains("<polyline"));
    }

    #[test]
    fn rejects_bad_s_lists() {
        let d = Arc::new(Domain::new_box(&[0.0], &[1.0], &[4]).unwrap());
        let u = ComplexField::linear(d.clone(), &[1.0], 0.0).unwrap();
        let z = MagneticPotential::zero(1);
        for s in [vec![0.9, 0.8], vec![1.2], vec![]] {
            assert!(bbm_sweep(&u, &z, &d, 2.0, &s, &QuadratureSpec::default()).is_err());
        }
    }

    #[test]
    fn byproduct_negative_control() {
        let d = Arc::new(Domain::new_box(&[0.0, 0.0], &[1.0, 1.0], &[6, 6]).unwrap());
        let u = ComplexField::gaussian(d.clone(), &[0.0, 0.0], 1.0).unwrap();
        let a = MagneticPotential::landau(2, 1.0).unwrap();
        let r = byproduct_check(&u, &a, &d, 2.0, &[0.6, 0.8], &QuadratureSpec::default(), 1e-8, 1e-8).unwrap();
        assert!(!r.hypothesis_met && r.system_residual.is_none());
        assert!(r.message.contains("hypothesis not met"));
    }
}
