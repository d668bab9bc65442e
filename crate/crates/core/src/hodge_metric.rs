//! The Hodge metric through Hom-norms of the tangent action.
//!
//! A tangent direction `∂_α` acts on each piece `H^{p,q}` of the Hodge
//! decomposition by taking a section through a basis vector, differentiating,
//! and keeping the `H^{p-1,q+1}` component (this is the horizontal part of
//! the derivative of the period map).  The Hodge metric is the sum over `p`
//! of the Hermitian Hom-norms of these block maps in `Q₁`-orthonormal bases:
//!
//! `h^H_{αβ̄} = Σ_p <A_α|_{H^{p,q}}, A_β|_{H^{p,q}}>`,
//!
//! where `<A, B> = Σ_u <A e_u, B e_u>` over an orthonormal basis `{e_u}`.
//! With this normalization the top block contributes exactly the
//! Weil-Petersson metric, and for threefolds / fourfolds the total equals
//! `(m+3) g + Ric(g)` / `2(m+2) g + 2 Ric(g)` respectively.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hodge::{project_pq, HodgeDecompositionAt, PolarizationForm};
use crate::jet::JetSection;
use crate::linalg::{c, generalized_hermitian_eigenvalues, i_pow, vnorm, CMat, CVec};
use crate::models::{decomposition_at, Model};
use crate::report::BoundReport;
use crate::tol::Tolerances;
use crate::wp::{covariant_frame, wp_curvature, wp_metric, wp_ricci, MetricField, MetricRole};

/// `Q₁` restricted to a block equals `(√-1)^{p-q} Q(x, ȳ)`; this returns the
/// phase converting the crate's sesquilinear pairing into `Q₁` there.
fn block_phase(p: u32, q: u32, n: u32) -> Complex64 {
    let e = ((p as i64 - q as i64).rem_euclid(4)) as u32;
    i_pow(e) * i_pow(n).inv()
}

/// `Q₁`-orthonormal basis of a block (Cholesky of the Gram matrix).
fn q1_orthonormal_basis(
    basis: &[CVec],
    p: u32,
    q: u32,
    pol: &PolarizationForm,
) -> Result<Vec<CVec>> {
    let k = basis.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let phase = block_phase(p, q, pol.weight);
    let mut gram = CMat::zeros(k, k);
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            // Gram_{ij} = Q1(x_j, x_i) so that columns transform correctly.
            gram[(i, j)] = phase * pol.sesqui(y, x);
        }
    }
    let chol = gram.clone().cholesky().ok_or_else(|| {
        Error::Positivity(format!(
            "Q1 Gram on H^{{{p},{q}}} is not positive definite"
        ))
    })?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Degeneracy("Cholesky factor not invertible".into()))?;
    // e_u = Σ_v basis_v (L^{-H})_{v u}
    let linv_h = linv.adjoint();
    let mut out = Vec::with_capacity(k);
    for u in 0..k {
        let mut e = CVec::zeros(basis[0].len());
        for (v, bv) in basis.iter().enumerate() {
            e += bv.map(|x| x * linv_h[(v, u)]);
        }
        out.push(e);
    }
    Ok(out)
}

/// Derivative at the base point of the section through `v ∈ H^{p,q}` built
/// from the filtration frame: write `v = Σ c_a ∂^a Ω(z0)` over `|a| ≤ n-p`
/// and differentiate the section `Σ c_a ∂^a Ω(z)` in direction `alpha`.
pub fn frame_extension_derivative(
    jet: &JetSection,
    dec: &HodgeDecompositionAt,
    _pol: &PolarizationForm,
    v: &CVec,
    p: u32,
    alpha: usize,
    tol: &Tolerances,
) -> Result<CVec> {
    let n = dec.weight;
    let level = (n - p) as usize;
    jet.require_order(level + 1, "frame extension derivative")?;
    // frame columns and their α-derivatives
    let mut cols: Vec<CVec> = Vec::new();
    let mut dcols: Vec<CVec> = Vec::new();
    for (i, mono) in jet.space.monos.iter().enumerate() {
        if jet.space.degree(i) as usize > level {
            continue;
        }
        let der = jet.derivative(mono)?;
        let nv = vnorm(&der);
        if nv == 0.0 {
            continue;
        }
        let mut up = mono.clone();
        up[alpha] += 1;
        let dup = jet.derivative(&up)?;
        cols.push(der.scale(1.0 / nv));
        dcols.push(dup.scale(1.0 / nv));
    }
    // Least squares for v in the frame via SVD (frames may carry dependent
    // columns); any solution gives the same class modulo F^p.
    let k = cols.len();
    let a = crate::linalg::mat_from_columns(v.len(), &cols);
    let svd = a.svd(true, true);
    let coef = svd
        .solve(v, tol.rank)
        .map_err(|e| Error::Degeneracy(format!("frame least squares failed: {e}")))?;
    // residual of the fit must be negligible: v lies in F^p by construction
    let mut fit = CVec::zeros(v.len());
    let mut dv = CVec::zeros(v.len());
    for i in 0..k {
        fit += cols[i].map(|x| x * coef[i]);
        dv += dcols[i].map(|x| x * coef[i]);
    }
    let fit_resid = vnorm(&(&fit - v)) / vnorm(v).max(1e-300);
    if fit_resid > tol.residual.max(1e-7) {
        return Err(Error::Degeneracy(format!(
            "vector does not lie in F^{p} (fit residual {fit_resid:.3e})"
        )));
    }
    Ok(dv)
}

/// The tangent action of one coordinate direction on the decomposition.
#[derive(Clone, Debug)]
pub struct TangentAction {
    pub alpha: usize,
    /// Per block with `p ≥ 1`: `(p, q, matrix)` of the map
    /// `H^{p,q} → H^{p-1,q+1}` in `Q₁`-orthonormal bases.
    pub maps: Vec<(u32, u32, CMat)>,
    /// Max relative leakage of the derivative into non-adjacent blocks.
    pub transversality_residual: f64,
}

pub fn tangent_action(
    jet: &JetSection,
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    alpha: usize,
    tol: &Tolerances,
) -> Result<TangentAction> {
    let n = dec.weight;
    let mut maps = Vec::new();
    let mut worst = 0.0_f64;
    // Q1-orthonormal bases for every block, reused below.
    let mut on_bases: Vec<(u32, u32, Vec<CVec>)> = Vec::new();
    for blk in &dec.blocks {
        on_bases.push((blk.p, blk.q, q1_orthonormal_basis(&blk.basis, blk.p, blk.q, pol)?));
    }
    for (p, q, basis) in &on_bases {
        if *p == 0 {
            continue;
        }
        let target = on_bases
            .iter()
            .find(|(tp, _, _)| *tp == p - 1)
            .map(|(_, tq, tb)| (*tq, tb));
        let Some((tq, tb)) = target else {
            continue;
        };
        let mut mat = CMat::zeros(tb.len(), basis.len());
        for (u, e) in basis.iter().enumerate() {
            let dv = frame_extension_derivative(jet, dec, pol, e, *p, alpha, tol)?;
            let total = vnorm(&dv).max(1e-300);
            // coordinates in the target's Q1-orthonormal basis
            let phase = block_phase(p - 1, tq, n);
            for (w, ew) in tb.iter().enumerate() {
                mat[(w, u)] = phase * pol.sesqui(&dv, ew);
            }
            // Transversality violation = components below F^{p-1}; parts in
            // blocks r ≥ p belong to the F^p ambiguity of the extension.
            let mut bad = CVec::zeros(dec.dim);
            for other in &dec.blocks {
                if other.p + 1 >= *p {
                    continue;
                }
                bad += project_pq(&dv, dec, pol, other.p, tol)?;
            }
            worst = worst.max(vnorm(&bad) / total);
        }
        maps.push((*p, *q, mat));
    }
    Ok(TangentAction {
        alpha,
        maps,
        transversality_residual: worst,
    })
}

/// Direct Hom-norm Hodge metric
/// `h^H_{αβ̄} = Σ_p tr((A_β^{(p)})^H A_α^{(p)})`.
pub fn hodge_metric_direct(
    jet: &JetSection,
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<MetricField> {
    let m = jet.vars();
    let actions: Vec<TangentAction> = (0..m)
        .map(|alpha| tangent_action(jet, dec, pol, alpha, tol))
        .collect::<Result<_>>()?;
    let mut h = CMat::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = c(0.0, 0.0);
            for ((_, _, ma), (_, _, mb)) in actions[a].maps.iter().zip(actions[b].maps.iter()) {
                acc += (mb.adjoint() * ma).trace();
            }
            h[(a, b)] = acc;
        }
    }
    MetricField::new(jet.z0.clone(), h, MetricRole::Hodge)
}

/// Largest generalized eigenvalue of the Hermitian pair `(a, b)` with `b`
/// positive definite (the smallest constant `C` with `a ≤ C·b`).
pub fn domination_constant(a: &CMat, b: &CMat) -> Result<f64> {
    let ev = generalized_hermitian_eigenvalues(a, b)?;
    ev.last()
        .copied()
        .ok_or_else(|| Error::Degeneracy("empty eigenvalue set".into()))
}

/// Empirical domination of the Weil-Petersson metric (and its Ricci-shifted
/// combination) by the Hodge metric: reports
/// `C_wp = sup λ_max(g : h^H)` and `C_ric = sup λ_max(Ric + (m+1) g : h^H)`.
/// The constants are reported, not asserted against a theoretical value.
pub fn domination_report(
    model: &Model,
    points: &[Vec<Complex64>],
    tol: &Tolerances,
) -> Result<BoundReport> {
    let n = model.weight();
    let order = (n as usize).min(crate::jet::MAX_JET_ORDER);
    let mut rep = BoundReport::new("Weil-Petersson vs Hodge metric domination");
    let mut c_wp = 0.0_f64;
    let mut c_ric = 0.0_f64;
    let mut cor_resid = 0.0_f64;
    for z in points {
        let jet = model.jet(z, order)?;
        let pol = model.polarization();
        let dec = decomposition_at(&jet, pol, tol)?;
        let g = wp_metric(&jet, pol, tol)?;
        let hh = hodge_metric_direct(&jet, &dec, pol, tol)?;
        c_wp = c_wp.max(domination_constant(&g.matrix, &hh.matrix)?);
        let frame = covariant_frame(&jet, pol, tol)?;
        let rc = wp_curvature(&frame, &g, pol);
        let ric = wp_ricci(&rc, &g, tol)?;
        let m = g.dim() as f64;
        let shifted = &ric + g.matrix.scale(m + 1.0);
        c_ric = c_ric.max(domination_constant(&shifted, &hh.matrix)?);
        // closed-form identity for weights 3 and 4
        let closed = match n {
            3 => Some(g.matrix.scale(m + 3.0) + &ric),
            4 => Some((g.matrix.scale(m + 2.0) + &ric).scale(2.0)),
            _ => None,
        };
        if let Some(cf) = closed {
            let resid = crate::linalg::fnorm(&(&hh.matrix - &cf))
                / crate::linalg::fnorm(&hh.matrix).max(1e-300);
            cor_resid = cor_resid.max(resid);
        }
    }
    rep.check_bool(
        "wp domination constant",
        "smallest C with g ≤ C h^H over the samples",
        c_wp,
        f64::INFINITY,
        c_wp.is_finite() && c_wp > 0.0,
    );
    rep.check_bool(
        "ricci-combination constant",
        "smallest C with Ric + (m+1) g ≤ C h^H over the samples",
        c_ric,
        f64::INFINITY,
        c_ric.is_finite() && c_ric >= 0.0,
    );
    if model.weight() == 3 || model.weight() == 4 {
        rep.check_residual(
            "closed-form identity",
            "h^H equals (m+3)g + Ric (weight 3) or 2(m+2)g + 2Ric (weight 4)",
            cor_resid,
            tol.residual,
        );
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::presets::{model_a, model_a_two_vars, model_c, quintic};
    use std::f64::consts::PI;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn ray(r: f64) -> Vec<Complex64> {
        vec![c(r, 0.0)]
    }

    #[test]
    fn top_block_action_norm_recovers_wp_metric() {
        let m = model_a();
        let jet = m.jet(&ray((-2.0 * PI).exp()), 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let act = tangent_action(&jet, &dec, m.polarization(), 0, &tols()).unwrap();
        let top = act.maps.iter().find(|(p, _, _)| *p == 3).unwrap();
        let norm_sq: f64 = top.2.iter().map(|x| x.norm_sqr()).sum();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        assert!(
            (norm_sq - g.matrix[(0, 0)].re).abs() < 1e-9 * g.matrix[(0, 0)].re,
            "|X(Ω/|Ω|)|² = {norm_sq} vs g = {}",
            g.matrix[(0, 0)].re
        );
        assert!(act.transversality_residual < 1e-8);
    }

    #[test]
    fn constant_direction_acts_by_zero() {
        let m = model_a_two_vars();
        let z = vec![c((-2.0 * PI).exp(), 0.0), c(0.3, 0.1)];
        let jet = m.jet(&z, 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let act = tangent_action(&jet, &dec, m.polarization(), 1, &tols()).unwrap();
        for (_, _, mat) in &act.maps {
            assert!(mat.iter().all(|x| x.norm() < 1e-12));
        }
        // direction 0 acts nontrivially on every adjacent pair
        let act0 = tangent_action(&jet, &dec, m.polarization(), 0, &tols()).unwrap();
        for (_, _, mat) in &act0.maps {
            assert!(mat.iter().any(|x| x.norm() > 1e-8));
        }
    }

    #[test]
    fn hodge_metric_matches_weight3_closed_form_on_model_a() {
        let m = model_a();
        let jet = m.jet(&ray((-2.0 * PI).exp()), 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let hh = hodge_metric_direct(&jet, &dec, m.polarization(), &tols()).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let ratio = hh.matrix[(0, 0)].re / g.matrix[(0, 0)].re;
        assert!((ratio - 10.0 / 3.0).abs() < 1e-8, "h^H/g = {ratio}");
    }

    #[test]
    fn model_c_block_norm_duality() {
        // weight 4: the H^{2,2} action norm equals the H^{3,1} action norm.
        let m = model_c();
        let jet = m.jet(&ray((-2.0 * PI).exp()), 4).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let act = tangent_action(&jet, &dec, m.polarization(), 0, &tols()).unwrap();
        let norm = |p: u32| -> f64 {
            act.maps
                .iter()
                .find(|(bp, _, _)| *bp == p)
                .map(|(_, _, m)| m.iter().map(|x| x.norm_sqr()).sum())
                .unwrap_or(0.0)
        };
        let n31 = norm(3);
        let n22 = norm(2);
        assert!((n31 - n22).abs() < 1e-8 * n31.max(1e-300), "{n31} vs {n22}");
    }

    #[test]
    fn model_c_matches_weight4_closed_form() {
        let m = model_c();
        let jet = m.jet(&ray((-2.0 * PI).exp()), 4).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let hh = hodge_metric_direct(&jet, &dec, m.polarization(), &tols()).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        // h^H = 2(m+2) g + 2 Ric = 2·3g - g = 5g on the weight-4 shift orbit
        let ratio = hh.matrix[(0, 0)].re / g.matrix[(0, 0)].re;
        assert!((ratio - 5.0).abs() < 1e-8, "h^H/g = {ratio}");
    }

    #[test]
    fn domination_constants_model_a() {
        let m = model_a();
        let points = vec![ray((-2.0 * PI).exp()), ray(0.01)];
        let rep = domination_report(&m, &points, &tols()).unwrap();
        assert!(rep.pass(), "{}", rep.render_text());
        let cwp = rep.checks.iter().find(|l| l.name.contains("wp domination")).unwrap();
        assert!((cwp.value - 0.3).abs() < 1e-8, "C = {}", cwp.value);
    }

    #[test]
    fn identical_metrics_dominate_with_constant_one() {
        let m = CMat::identity(2, 2).scale(2.5);
        let cst = domination_constant(&m, &m).unwrap();
        assert!((cst - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hodge_metric_gauge_invariant_and_hermitian() {
        let m = quintic();
        let jet = m.jet(&ray(1e-5), 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let h1 = hodge_metric_direct(&jet, &dec, m.polarization(), &tols()).unwrap();
        let jet2 = jet
            .rescaled(&[(vec![0], c(2.0, 0.0))])
            .unwrap();
        let dec2 = decomposition_at(&jet2, m.polarization(), &tols()).unwrap();
        let h2 = hodge_metric_direct(&jet2, &dec2, m.polarization(), &tols()).unwrap();
        let diff = crate::linalg::fnorm(&(&h1.matrix - &h2.matrix))
            / crate::linalg::fnorm(&h1.matrix);
        assert!(diff < 1e-9, "gauge shift changed h^H by {diff:.3e}");
    }
}
