//! Weil-Petersson metric and curvature.
//!
//! The metric is the mixed second derivative of the potential:
//! `g_{ij̄} = -∂_i ∂̄_j log (Ω, Ω̄)`, equivalently
//! `-(D_iΩ, conj D_jΩ)/(Ω, Ω̄)`; both routes are computed and compared.
//! The curvature tensor is assembled from the second covariant derivatives
//! as `R_{ij̄kl̄} = g_{ij̄} g_{kl̄} + g_{il̄} g_{kj̄} - F_{ij̄kl̄}` with
//! `F_{ij̄kl̄} = (D_kD_iΩ, conj D_lD_jΩ)/(Ω, Ω̄)`, and the Ricci tensor is
//! `R_{ij̄} = -g^{kl̄} R_{ij̄kl̄} = -(m+1) g_{ij̄} + g^{kl̄} F_{ij̄kl̄}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::pairing_series;
pub use crate::geometry::CovariantFrame;
use crate::hodge::PolarizationForm;
use crate::jet::JetSection;
use crate::linalg::{c, fnorm, hermitian_eigenvalues, hermitize, CMat};
use crate::tol::Tolerances;

/// Sign conventions used by every curvature report in this crate.
pub const CURVATURE_CONVENTION: &str = "R_{i jbar k lbar} = d^2 g_{i jbar}/(dz_k dzbar_l) \
- g^{p qbar} (dg_{i qbar}/dz_k)(dg_{p jbar}/dzbar_l); Ricci_{i jbar} = -g^{k lbar} R_{i jbar k lbar}; \
'nonpositive bisectional curvature' reads R_{i ibar k kbar} >= 0 in this convention";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricRole {
    WeilPetersson,
    PartialHodge { mu: f64 },
    Hodge,
}

impl std::fmt::Display for MetricRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricRole::WeilPetersson => write!(f, "weil-petersson"),
            MetricRole::PartialHodge { mu } => write!(f, "partial-hodge(mu={mu})"),
            MetricRole::Hodge => write!(f, "hodge"),
        }
    }
}

/// Hermitian positive-definite metric value at a point.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub point: Vec<Complex64>,
    pub matrix: CMat,
    pub role: MetricRole,
    /// Smallest eigenvalue, recorded at construction.
    pub min_eig: f64,
}

impl MetricField {
    pub fn new(point: Vec<Complex64>, matrix: CMat, role: MetricRole) -> Result<Self> {
        let (h, _) = hermitize(&matrix);
        let ev = hermitian_eigenvalues(&h);
        let min_eig = ev.first().copied().unwrap_or(f64::NEG_INFINITY);
        if min_eig <= 0.0 {
            return Err(Error::Degeneracy(format!(
                "{role} metric is not positive definite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(MetricField {
            point,
            matrix: h,
            role,
            min_eig,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    pub fn inverse(&self, tol: &Tolerances) -> Result<CMat> {
        crate::linalg::inverse(&self.matrix, tol.max_condition())
    }

    /// Inverse-metric entry with the `g^{kq̄}` index convention.
    pub fn upper(&self, inv: &CMat, k: usize, q: usize) -> Complex64 {
        inv[(q, k)]
    }
}

/// Rank-4 tensor with barred index pattern `T_{i j̄ k l̄}`.
#[derive(Clone, Debug)]
pub struct Tensor4 {
    pub m: usize,
    pub data: Vec<Complex64>,
}

impl Tensor4 {
    pub fn zeros(m: usize) -> Self {
        Tensor4 {
            m,
            data: vec![c(0.0, 0.0); m * m * m * m],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.data[((i * self.m + j) * self.m + k) * self.m + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        self.data[((i * self.m + j) * self.m + k) * self.m + l] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Max relative violation of the Kähler curvature symmetries:
    /// `T_{ij̄kl̄} = T_{kj̄il̄} = T_{il̄kj̄}` and `conj T_{ij̄kl̄} = T_{jīlk̄}`.
    pub fn kahler_symmetry_residual(&self) -> f64 {
        let m = self.m;
        let scale = self.max_abs().max(1e-300);
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let t = self.at(i, j, k, l);
                        worst = worst.max((t - self.at(k, j, i, l)).norm());
                        worst = worst.max((t - self.at(i, l, k, j)).norm());
                        worst = worst.max((t.conj() - self.at(j, i, l, k)).norm());
                    }
                }
            }
        }
        worst / scale
    }
}

/// Curvature tensor value with its convention tag.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub point: Vec<Complex64>,
    pub tensor: Tensor4,
    pub convention: &'static str,
    pub symmetry_residual: f64,
}

impl CurvatureField {
    pub fn new(point: Vec<Complex64>, tensor: Tensor4) -> Self {
        let symmetry_residual = tensor.kahler_symmetry_residual();
        CurvatureField {
            point,
            tensor,
            convention: CURVATURE_CONVENTION,
            symmetry_residual,
        }
    }
}

/// Weil-Petersson metric at the jet's base point.
///
/// Computed as `-∂∂̄ log S` from the potential germ and cross-checked against
/// `-(D_iΩ, conj D_jΩ)/S`; a disagreement beyond tolerance is an internal
/// error, a non-positive potential is a first-Hodge-Riemann violation, and a
/// non-positive-definite result is a degeneracy.
pub fn wp_metric(jet: &JetSection, pol: &PolarizationForm, tol: &Tolerances) -> Result<MetricField> {
    jet.require_order(1, "Weil-Petersson metric")?;
    let m = jet.vars();
    let s = pairing_series(jet, pol);
    let s0 = s.val();
    if !(s0.re > 0.0) || s0.im.abs() > tol.residual * s0.re.abs().max(1e-300) {
        return Err(Error::Positivity(format!(
            "(Ω, Ω̄) = {s0} not positive (first Hodge-Riemann failure)"
        )));
    }
    let log_s = s.ln()?;
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = log_s.dh(i).da(j).neg().val();
        }
    }

    // Route 2: -(D_iΩ, conj D_jΩ)/S with D_iΩ = ∂_iΩ + K_iΩ.
    let omega0 = jet.coeffs[0].clone();
    let mut alt = CMat::zeros(m, m);
    let mut d_om = Vec::with_capacity(m);
    for i in 0..m {
        let mut e = vec![0u32; m];
        e[i] = 1;
        let di = jet.derivative(&e)?;
        let ki = -pol.sesqui(&di, &omega0) / s0;
        d_om.push(&di + omega0.map(|x| x * ki));
    }
    for i in 0..m {
        for j in 0..m {
            alt[(i, j)] = -pol.sesqui(&d_om[i], &d_om[j]) / s0;
        }
    }
    let scale = fnorm(&g).max(1e-300);
    let agree = fnorm(&(&g - &alt)) / scale;
    if agree > tol.residual {
        return Err(Error::Degeneracy(format!(
            "potential and covariant metric routes disagree (residual {agree:.3e})"
        )));
    }

    MetricField::new(jet.z0.clone(), g, MetricRole::WeilPetersson)
}

/// The covariant chain (K, DΩ, Γ, DDΩ) with its defining identities checked.
pub fn covariant_frame(
    jet: &JetSection,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<CovariantFrame> {
    let frame = CovariantFrame::build(jet, pol, tol)?;
    let res = frame.identity_residuals(pol);
    if res.max() > tol.residual {
        return Err(Error::Degeneracy(format!(
            "covariant frame identities violated (max residual {:.3e})",
            res.max()
        )));
    }
    Ok(frame)
}

/// `F_{ij̄kl̄} = (D_kD_iΩ, conj D_lD_jΩ)/(Ω, Ω̄)`.
pub fn f_tensor(frame: &CovariantFrame, pol: &PolarizationForm) -> Tensor4 {
    let m = frame.vars;
    let mut f = Tensor4::zeros(m);
    let s0 = frame.s_val;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = pol.sesqui(&frame.dd_omega_val(k, i), &frame.dd_omega_val(l, j)) / s0;
                    f.set(i, j, k, l, v);
                }
            }
        }
    }
    f
}

/// Curvature tensor `R = g⊗g + g⊗g - F` of the Weil-Petersson metric.
pub fn wp_curvature(frame: &CovariantFrame, g: &MetricField, pol: &PolarizationForm) -> CurvatureField {
    let m = frame.vars;
    let f = f_tensor(frame, pol);
    let mut r = Tensor4::zeros(m);
    let gm = &g.matrix;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = gm[(i, j)] * gm[(k, l)] + gm[(i, l)] * gm[(k, j)] - f.at(i, j, k, l);
                    r.set(i, j, k, l, v);
                }
            }
        }
    }
    CurvatureField::new(frame_point(frame, g), r)
}

fn frame_point(_frame: &CovariantFrame, g: &MetricField) -> Vec<Complex64> {
    g.point.clone()
}

/// Ricci tensor `R_{ij̄} = -g^{kl̄} R_{ij̄kl̄}`, cross-checked against
/// `-(m+1) g_{ij̄} + g^{kl̄} F_{ij̄kl̄}` (with F recovered from R).
pub fn wp_ricci(r: &CurvatureField, g: &MetricField, tol: &Tolerances) -> Result<CMat> {
    let m = g.dim();
    let inv = g.inverse(tol)?;
    let mut ric = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = c(0.0, 0.0);
            for k in 0..m {
                for l in 0..m {
                    acc += g.upper(&inv, k, l) * r.tensor.at(i, j, k, l);
                }
            }
            ric[(i, j)] = -acc;
        }
    }
    // Consistency: F = g⊗g + g⊗g - R, Ric = -(m+1) g + g^{kl̄} F.
    let gm = &g.matrix;
    let mut alt = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = c(0.0, 0.0);
            for k in 0..m {
                for l in 0..m {
                    let f = gm[(i, j)] * gm[(k, l)] + gm[(i, l)] * gm[(k, j)]
                        - r.tensor.at(i, j, k, l);
                    acc += g.upper(&inv, k, l) * f;
                }
            }
            alt[(i, j)] = -c(m as f64 + 1.0, 0.0) * gm[(i, j)] + acc;
        }
    }
    let resid = fnorm(&(&ric - &alt)) / fnorm(&ric).max(1e-300);
    if resid > tol.residual {
        return Err(Error::Degeneracy(format!(
            "Ricci contraction identity violated (residual {resid:.3e})"
        )));
    }
    Ok(ric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::presets::{model_a, model_c, quintic};
    use std::f64::consts::PI;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn ray(r: f64) -> Vec<Complex64> {
        vec![c(r, 0.0)]
    }

    #[test]
    fn model_a_metric_is_three_quarters_poincare() {
        let m = model_a();
        for &r in &[(-2.0 * PI).exp(), 0.05, 1e-4] {
            let jet = m.jet(&ray(r), 2).unwrap();
            let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
            let u = (1.0 / r).ln();
            let val = g.matrix[(0, 0)].re * r * r * u * u;
            assert!((val - 0.75).abs() < 1e-10, "g·r²u² = {val} at r = {r}");
            assert!(g.matrix[(0, 0)].im.abs() < 1e-12 * g.matrix[(0, 0)].re);
        }
    }

    #[test]
    fn model_c_metric_is_unit_poincare() {
        let m = model_c();
        let r = (-2.0 * PI).exp();
        let jet = m.jet(&ray(r), 2).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let u = (1.0 / r).ln();
        let val = g.matrix[(0, 0)].re * r * r * u * u;
        assert!((val - 1.0).abs() < 1e-10, "g·r²u² = {val}");
    }

    #[test]
    fn constant_section_metric_degenerates() {
        use std::collections::BTreeMap;
        let d = 4;
        let mut q = CMat::zeros(d, d);
        q[(0, 3)] = c(1.0, 0.0);
        q[(3, 0)] = c(-1.0, 0.0);
        q[(1, 2)] = c(-1.0, 0.0);
        q[(2, 1)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(3, q).unwrap();
        let mut a = BTreeMap::new();
        let mut a0 = crate::linalg::CVec::zeros(d);
        a0[0] = c(1.0, 0.0);
        a0[3] = c(0.0, -0.5);
        a.insert(vec![0u32], a0);
        let model =
            crate::models::NilpotentOrbitModel::new(3, vec![CMat::zeros(d, d)], a, pol).unwrap();
        let jet = model.orbit_jet(&ray(0.3), 2).unwrap();
        assert!(matches!(
            wp_metric(&jet, &model.polarization, &tols()),
            Err(Error::Degeneracy(_))
        ));
    }

    #[test]
    fn model_a_sectional_curvature_is_two_thirds() {
        let m = model_a();
        for &r in &[(-2.0 * PI).exp(), 0.03] {
            let jet = m.jet(&ray(r), 2).unwrap();
            let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
            let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
            let rc = wp_curvature(&frame, &g, m.polarization());
            let gv = g.matrix[(0, 0)].re;
            let ratio = rc.tensor.at(0, 0, 0, 0).re / (gv * gv);
            assert!((ratio - 2.0 / 3.0).abs() < 1e-9, "g^-2 R = {ratio} at r = {r}");
            assert!(rc.symmetry_residual < 1e-10);
        }
    }

    #[test]
    fn f_tensor_value_on_model_a_is_four_thirds_g_squared() {
        let m = model_a();
        let jet = m.jet(&ray(0.02), 2).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let f = f_tensor(&frame, m.polarization());
        let gv = g.matrix[(0, 0)].re;
        let ratio = f.at(0, 0, 0, 0).re / (gv * gv);
        assert!((ratio - 4.0 / 3.0).abs() < 1e-9, "F/g² = {ratio}");
    }

    #[test]
    fn model_a_ricci_is_minus_two_thirds_g() {
        let m = model_a();
        let jet = m.jet(&ray(0.04), 2).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let rc = wp_curvature(&frame, &g, m.polarization());
        let ric = wp_ricci(&rc, &g, &tols()).unwrap();
        let ratio = ric[(0, 0)].re / g.matrix[(0, 0)].re;
        assert!((ratio + 2.0 / 3.0).abs() < 1e-9, "Ric/g = {ratio}");
    }

    #[test]
    fn model_a_second_covariant_derivative_lies_in_middle_block() {
        // Projections of D₁D₁Ω onto p = 3 and p = 2 vanish.
        let m = model_a();
        let jet = m.jet(&ray((-2.0 * PI).exp()), 3).unwrap();
        let dec = crate::models::decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let dd = frame.dd_omega_val(0, 0);
        let scale = crate::linalg::vnorm(&dd);
        for p in [3u32, 2] {
            let proj = crate::hodge::project_pq(&dd, &dec, m.polarization(), p, &tols()).unwrap();
            assert!(
                crate::linalg::vnorm(&proj) < 1e-9 * scale,
                "projection to p={p} not zero"
            );
        }
    }

    #[test]
    fn quintic_frame_identities_hold_numerically() {
        let m = quintic();
        let jet = m.jet(&[c(1e-5, 0.0)], 3).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let res = frame.identity_residuals(m.polarization());
        assert!(res.max() < 1e-8, "residuals {res:?}");
    }

    #[test]
    fn kahler_condition_dk_g_equals_di_g() {
        // ∂_k g_{ij̄} = ∂_i g_{kj̄} on the m=2 product fixture.
        let m = crate::models::presets::product_orbit();
        let jet = m.jet(&[c(0.04, 0.01), c(0.06, -0.02)], 3).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let a = frame.g[i][j].dh(k).val();
                    let b = frame.g[k][j].dh(i).val();
                    worst = worst.max((a - b).norm());
                    scale = scale.max(a.norm());
                }
            }
        }
        assert!(worst < 1e-10 * scale.max(1e-300), "worst {worst:.3e}");
    }

    #[test]
    fn metric_positive_definite_on_product_fixture() {
        let m = crate::models::presets::product_orbit();
        let jet = m.jet(&[c(0.04, 0.0), c(0.06, 0.0)], 2).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        assert!(g.min_eigenvalue() > 0.0);
        assert_eq!(g.dim(), 2);
    }
}
