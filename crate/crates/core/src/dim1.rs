//! One-variable boundary analysis near a degeneration point `z = 0`.
//!
//! The period section is the log-Laurent series
//! `Ω = Σ A_{k,l} z^k (log 1/z)^l` obtained from the orbit form
//! `e^{(√-1/2π) N log(1/z)} A(z)`; the degree of `f_{k,l} = z^k (log 1/z)^l`
//! is `k - l/(n+1)`.  This module houses
//!
//! * the Yukawa chain `F₁₁₁ → F₁₁₁₁ → A → h → R̃ → ρ` for threefolds,
//! * the weight polynomial `(e^{(√-1/2π)N log(1/z)}A₀, conj ...)` in
//!   `u = log(1/r)`, whose degree `l` drives the Weil-Petersson asymptotics
//!   `λ ~ (l/4) / (r² u²)`,
//! * the completeness criterion `N A₀ ≠ 0`,
//! * truncation bounds `C · r^{k₀-s} (log 1/r)^{l₀}` for the series tail,
//! * the boundary classifier (complete vs finite-distance expansions), and
//! * the scalar-curvature boundedness scan along geometric rays.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hodge::PolarizationForm;
use crate::jet::JetSection;
use crate::linalg::{c, conj_mat, conj_vec, fnorm, vnorm, CMat, CVec};
use crate::models::Model;
use crate::tol::Tolerances;
use crate::wp::{covariant_frame, wp_metric};

/// One-variable log-Laurent data driving the boundary asymptotics.
#[derive(Clone, Debug)]
pub struct BoundaryModel1D {
    pub weight: u32,
    pub dim: usize,
    /// The nilpotent in the orbit exponent (real for all shipped families).
    pub n_mat: CMat,
    /// Power-series part `A(z) = Σ A_k z^k`.
    pub a_series: Vec<CVec>,
    /// Convergence radius δ of `A`.
    pub delta: f64,
    pub polarization: PolarizationForm,
    /// The originating model, used for exact jet evaluation on rays.
    pub source: Model,
}

/// Terms of `A(z)` materialized from a Picard-Fuchs source.
const PF_BOUNDARY_TERMS: usize = 48;

impl BoundaryModel1D {
    pub fn from_model(model: &Model) -> Result<Self> {
        if model.vars() != 1 {
            return Err(Error::Domain(
                "boundary analysis applies to one-parameter models".into(),
            ));
        }
        match model {
            Model::Orbit(om) => {
                let kmax = om
                    .a_coeffs
                    .keys()
                    .map(|a| a[0] as usize)
                    .max()
                    .unwrap_or(0);
                let mut a_series = vec![CVec::zeros(om.dim); kmax + 1];
                for (a, v) in &om.a_coeffs {
                    a_series[a[0] as usize] = v.clone();
                }
                Ok(BoundaryModel1D {
                    weight: om.weight,
                    dim: om.dim,
                    n_mat: om.nilpotents[0].clone(),
                    a_series,
                    // finitely supported series: any radius works; 1 keeps
                    // the coefficient bound of the truncation lemma valid.
                    delta: 1.0,
                    polarization: om.polarization.clone(),
                    source: model.clone(),
                })
            }
            Model::PicardFuchs { model: pf, pairing } => {
                let (n_mat, a_series) = pf.boundary_data(PF_BOUNDARY_TERMS);
                Ok(BoundaryModel1D {
                    weight: pf.weight,
                    dim: pf.order,
                    n_mat,
                    a_series,
                    delta: pf.r_max,
                    polarization: pairing.clone(),
                    source: model.clone(),
                })
            }
        }
    }

    pub fn a0(&self) -> &CVec {
        &self.a_series[0]
    }

    /// `A_{k,l} = ((√-1/2π) N)^l A_k / l!`.
    pub fn a_kl(&self, k: usize, l: u32) -> CVec {
        let mut v = self.a_series[k].clone();
        for _ in 0..l {
            v = &self.n_mat * v;
        }
        let factor = c(0.0, 1.0 / (2.0 * PI)).powu(l) / c(crate::jet::factorial(l), 0.0);
        v.map(|x| x * factor)
    }

    fn n_is_real(&self, tol: &Tolerances) -> bool {
        let imag: f64 = self.n_mat.iter().map(|x| x.im * x.im).sum::<f64>().sqrt();
        imag <= tol.residual * fnorm(&self.n_mat).max(1.0)
    }
}

// ---------------------------------------------------------------------------
// Weight polynomial and leading asymptotics
// ---------------------------------------------------------------------------

/// Real coefficients of
/// `P(u) = (e^{(√-1/2π) N u} A₀, conj(e^{(√-1/2π) N u} A₀))`
/// as a polynomial in `u = log 1/r` (evaluated on the positive ray).
pub fn weight_polynomial(model: &BoundaryModel1D, tol: &Tolerances) -> Result<Vec<f64>> {
    let d = model.dim;
    let deg_cap = 2 * d;
    // v(u) = Σ_l ((i/2π) u)^l N^l A0 / l!, w(u) = conj-side series.
    let mut v_terms: Vec<CVec> = Vec::new();
    let mut w_terms: Vec<CVec> = Vec::new();
    let mut nv = model.a0().clone();
    let mut nw = conj_vec(model.a0());
    let n_conj = conj_mat(&model.n_mat);
    for l in 0..=d {
        let fl = crate::jet::factorial(l as u32);
        let cv = c(0.0, 1.0 / (2.0 * PI)).powu(l as u32) / c(fl, 0.0);
        let cw = c(0.0, -1.0 / (2.0 * PI)).powu(l as u32) / c(fl, 0.0);
        v_terms.push(nv.map(|x| x * cv));
        w_terms.push(nw.map(|x| x * cw));
        nv = &model.n_mat * nv;
        nw = &n_conj * nw;
    }
    let mut coeffs = vec![c(0.0, 0.0); deg_cap + 2];
    for (a, va) in v_terms.iter().enumerate() {
        for (b, wb) in w_terms.iter().enumerate() {
            if a + b >= coeffs.len() {
                continue;
            }
            // (v, w) without extra conjugation: w already carries it.
            coeffs[a + b] += model.polarization.bilinear(va, wb);
        }
    }
    let scale = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let imag = coeffs.iter().map(|x| x.im.abs()).fold(0.0, f64::max) / scale;
    if imag > tol.residual.max(1e-9) {
        return Err(Error::Degeneracy(format!(
            "weight polynomial has imaginary coefficients (residual {imag:.3e})"
        )));
    }
    let mut out: Vec<f64> = coeffs.iter().map(|x| x.re).collect();
    while out.len() > 1 && out.last().map(|v| v.abs() <= 1e-12 * scale).unwrap_or(false) {
        out.pop();
    }
    Ok(out)
}

pub fn poly_degree(coeffs: &[f64]) -> usize {
    let scale = coeffs.iter().fold(0.0_f64, |a, &b| a.max(b.abs())).max(1e-300);
    coeffs
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &v)| v.abs() > 1e-9 * scale)
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// `true` iff `‖N A₀‖ > tol · ‖A₀‖` (the boundary point is at infinite
/// Weil-Petersson distance).
pub fn completeness_test(model: &BoundaryModel1D, tol: &Tolerances) -> (bool, f64) {
    let na0 = &model.n_mat * model.a0();
    let ratio = vnorm(&na0) / vnorm(model.a0()).max(1e-300);
    (ratio > tol.residual, ratio)
}

/// Leading Weil-Petersson asymptotics: reads the degree `l` off the weight
/// polynomial and verifies `λ(r) · r² (log 1/r)² → l/4` along the ray.
pub struct WpLeading {
    pub l: usize,
    pub limit: f64,
    /// `(u, λ r² u², deviation from l/4)` per checkpoint.
    pub samples: Vec<(f64, f64, f64)>,
}

pub fn wp_leading(model: &BoundaryModel1D, tol: &Tolerances) -> Result<WpLeading> {
    let (complete, _) = completeness_test(model, tol);
    if !complete {
        return Err(Error::Refused(
            "N A₀ = 0: finite-distance boundary point; use the boundary classifier instead".into(),
        ));
    }
    let poly = weight_polynomial(model, tol)?;
    let l = poly_degree(&poly);
    let limit = l as f64 / 4.0;
    let mut samples = Vec::new();
    for &u in &[30.0_f64, 60.0, 100.0] {
        let r = (-u).exp();
        let jet = model.source.jet(&[c(r, 0.0)], 1)?;
        let g = wp_metric(&jet, model.source.polarization(), tol)?;
        let val = g.matrix[(0, 0)].re * r * r * u * u;
        samples.push((u, val, (val - limit).abs()));
    }
    Ok(WpLeading { l, limit, samples })
}

// ---------------------------------------------------------------------------
// Truncation bounds
// ---------------------------------------------------------------------------

/// Bound data for `‖∂^s (Ω - Σ_{deg ≤ μ} A_{k,l} f_{k,l})‖ ≤ C r^{k₀-s} u^{l₀}`.
pub struct TruncationBound {
    pub k0: usize,
    pub l0: u32,
    pub c: f64,
    /// The bound evaluated at the requested radius.
    pub bound: f64,
    /// Direct norm of the truncated tail at the requested radius.
    pub empirical: f64,
    /// `empirical ≤ bound` up to floating-point dust on the evaluation.
    pub dominated: bool,
}

/// Weights of `∂^s (z^k Λ^l)` over `Λ`-powers (Λ = log z), shared with the
/// Picard-Fuchs evaluator.
fn deriv_weights(k: i64, l: u32, s: u32) -> Vec<f64> {
    let mut w = vec![0.0; l as usize + 1];
    w[0] = 1.0;
    for step in 0..s {
        let mut nw = vec![0.0; l as usize + 1];
        for (t, &v) in w.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            nw[t] += (k - step as i64) as f64 * v;
            if t + 1 < nw.len() {
                nw[t + 1] += (l as f64 - t as f64) * v;
            }
        }
        w = nw;
    }
    w
}

/// `∂^s f_{k,l}` at a positive-ray point (`f_{k,l} = z^k (log 1/z)^l`).
fn deriv_f_kl(k: usize, l: u32, s: u32, r: f64) -> f64 {
    let u = (1.0 / r).ln();
    let w = deriv_weights(k as i64, l, s);
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 }; // (log 1/z)^l = (-Λ)^l
    let mut acc = 0.0;
    for (t, &wt) in w.iter().enumerate() {
        // Λ^{l-t} = (-u)^{l-t} on the ray
        let lam_pow = (-u).powi((l as usize - t) as i32);
        acc += wt * lam_pow;
    }
    sign * acc * r.powi(k as i32 - s as i32)
}

/// `sup_{0 < r ≤ rmax} r^a (log 1/r)^b` for integer `a ≥ 0` and integer `b`.
fn sup_r_pow_log(a: i32, b: i32, rmax: f64) -> f64 {
    let u_min = (1.0 / rmax).ln(); // u ∈ [u_min, ∞)
    if a == 0 {
        if b <= 0 {
            return u_min.powi(b);
        }
        return f64::INFINITY;
    }
    let boundary = rmax.powi(a) * u_min.powi(b);
    if b <= 0 {
        return boundary;
    }
    // interior stationary point at u* = b/a
    let u_star = b as f64 / a as f64;
    if u_star <= u_min {
        return boundary;
    }
    let interior = (-(a as f64) * u_star).exp() * u_star.powi(b);
    boundary.max(interior)
}

/// Selection rule for `(k₀, l₀)`: the unique pair with `l₀ ≤ n`,
/// `k₀ - l₀/(n+1) > μ` and minimal such degree.
pub fn truncation_pair(mu: f64, n: u32) -> (usize, u32) {
    let mut best: Option<(f64, usize, u32)> = None;
    for k in 0..=(mu.abs().ceil() as usize + n as usize + 2) {
        for l in 0..=n {
            let deg = k as f64 - l as f64 / (n as f64 + 1.0);
            if deg > mu {
                match best {
                    Some((bd, _, _)) if bd <= deg => {}
                    _ => best = Some((deg, k, l)),
                }
            }
        }
    }
    let (_, k0, l0) = best.expect("selection rule always has candidates");
    (k0, l0)
}

/// The C^s truncation bound at radius `r` for retention threshold `μ`,
/// together with the direct tail evaluation.
pub fn truncation_bound(
    model: &BoundaryModel1D,
    mu: f64,
    s: u32,
    r: f64,
) -> Result<TruncationBound> {
    let n = model.weight;
    if !(r > 0.0) || r >= model.delta / 4.0 || r >= 1.0 {
        return Err(Error::Domain(format!(
            "radius {r:.3e} outside (0, δ/4) with δ = {:.3e}",
            model.delta
        )));
    }
    if s > 4 {
        return Err(Error::Parameter("C^s bound supported for s ≤ 4".into()));
    }
    let (k0, l0) = truncation_pair(mu, n);
    let u = (1.0 / r).ln();
    let deg = |k: usize, l: u32| k as f64 - l as f64 / (n as f64 + 1.0);

    // Coefficient magnitudes: stored terms use their actual norms, the
    // geometric continuation uses the calibrated (δ/4)-bound.
    let kstored = model.a_series.len() - 1;
    let quarter = model.delta / 4.0;
    let mut c0_cal = 0.0_f64;
    for k in 0..=kstored {
        for l in 0..=n {
            c0_cal = c0_cal.max(vnorm(&model.a_kl(k, l)) * quarter.powi(k as i32 + 1));
        }
    }
    let coeff_bound = |k: usize, l: u32| -> f64 {
        if k <= kstored {
            vnorm(&model.a_kl(k, l))
        } else {
            c0_cal * quarter.powi(-(k as i32) - 1)
        }
    };

    // Domination domain (0, r_hi]; strictly inside δ/4 so the geometric
    // continuation converges.
    let r_hi = r.max(model.delta / 8.0).min(0.999 * quarter);
    let mut cbound = 0.0_f64;
    let finite_support = matches!(model.source, Model::Orbit(_));
    let kmax_sum = if finite_support { kstored } else { kstored + 400 };
    for k in 0..=kmax_sum {
        let mut row = 0.0_f64;
        for l in 0..=n {
            if deg(k, l) <= mu {
                continue;
            }
            let b = coeff_bound(k, l);
            if b == 0.0 {
                continue;
            }
            let w = deriv_weights(k as i64, l, s);
            for (t, &wt) in w.iter().enumerate() {
                if wt == 0.0 {
                    continue;
                }
                let a_exp = k as i32 - k0 as i32;
                let b_exp = (l as i32 - t as i32) - l0 as i32;
                row += b * wt.abs() * sup_r_pow_log(a_exp, b_exp, r_hi);
            }
        }
        cbound += row;
        if !finite_support && k > kstored && row < 1e-18 * cbound {
            break;
        }
    }
    let bound = cbound * r.powi(k0 as i32 - s as i32) * u.powi(l0 as i32);

    // Direct tail: ∂^s Ω(r) minus the retained partial sum.
    let jet = model.source.jet(&[c(r, 0.0)], s as usize)?;
    let full = jet.derivative(&[s])?;
    let mut tail = full.clone();
    for k in 0..=kstored {
        for l in 0..=n {
            if deg(k, l) > mu {
                continue;
            }
            let akl = model.a_kl(k, l);
            let fval = deriv_f_kl(k, l, s, r);
            tail -= akl.map(|x| x * fval);
        }
    }
    let empirical = vnorm(&tail);
    let dominated = empirical <= bound + 1e-12 * vnorm(&full);
    Ok(TruncationBound {
        k0,
        l0,
        c: cbound,
        bound,
        empirical,
        dominated,
    })
}

// ---------------------------------------------------------------------------
// Boundary classifier
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Classification {
    /// `N A₀ ≠ 0`: infinite Weil-Petersson distance.
    Case1 { na0_ratio: f64 },
    /// `N A₀ = 0` with a leading mixed term `f(z, z̄) (log 1/r)^l`,
    /// `f` homogeneous of degree `2k`.
    Case2 {
        k: u32,
        l: u32,
        /// Coefficient of `(z z̄)^k u^l` in `log (Ω, Ω̄)`.
        radial_coefficient: f64,
        /// Residual of the no-`z^{2k}`/`z̄^{2k}` property (l ≥ 1 only).
        pure_power_residual: f64,
        /// Residual of `f = c r^{2k}` under angular sampling.
        rotational_residual: f64,
        /// `2k` is even by construction; recorded for the report.
        degree_even: bool,
    },
    /// No mixed term at all (fully constant pairing).
    Case2Degenerate,
    Inconclusive { reason: String },
}

/// Expansion order (total z-degree) used by the classifier.
const CLASSIFIER_ZDEG: usize = 6;
const CLASSIFIER_UDEG: usize = 16;

type UPoly = Vec<Complex64>;

fn upoly_add(a: &mut UPoly, b: &UPoly, scale: Complex64) {
    if a.len() < b.len() {
        a.resize(b.len(), c(0.0, 0.0));
    }
    for (i, &v) in b.iter().enumerate() {
        a[i] += v * scale;
    }
}

fn upoly_mul(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = vec![c(0.0, 0.0); (a.len() + b.len()).saturating_sub(1).min(CLASSIFIER_UDEG + 1)];
    for (i, &x) in a.iter().enumerate() {
        if x == c(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j < out.len() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

type Graded = BTreeMap<(usize, usize), UPoly>;

fn graded_mul(a: &Graded, b: &Graded) -> Graded {
    let mut out: Graded = BTreeMap::new();
    for ((k1, k2), pa) in a {
        for ((m1, m2), pb) in b {
            let key = (k1 + m1, k2 + m2);
            if key.0 + key.1 > CLASSIFIER_ZDEG {
                continue;
            }
            let prod = upoly_mul(pa, pb);
            let entry = out.entry(key).or_default();
            upoly_add(entry, &prod, c(1.0, 0.0));
        }
    }
    out
}

/// Classifies the boundary point and, in the finite-distance case, extracts
/// and checks the structure of the leading mixed term of `log (Ω, Ω̄)`.
pub fn boundary_classifier(model: &BoundaryModel1D, tol: &Tolerances) -> Result<Classification> {
    let (complete, ratio) = completeness_test(model, tol);
    if complete {
        return Ok(Classification::Case1 { na0_ratio: ratio });
    }
    if !model.n_is_real(tol) {
        return Ok(Classification::Inconclusive {
            reason: "nilpotent is not a real matrix; the radial reduction does not apply".into(),
        });
    }

    // S(z, z̄, u) = Σ z^{k1} z̄^{k2} p_{k1 k2}(u) with
    // p_{k1 k2}(u) = (√-1)^n Q(A_{k1}, e^{-(√-1/π) u N} Ā_{k2}).
    let kmax = (model.a_series.len() - 1).min(CLASSIFIER_ZDEG);
    let pol = &model.polarization;
    let mut s_graded: Graded = BTreeMap::new();
    for k1 in 0..=kmax {
        for k2 in 0..=kmax {
            if k1 + k2 > CLASSIFIER_ZDEG {
                continue;
            }
            let mut p: UPoly = Vec::new();
            let mut nw = conj_vec(&model.a_series[k2]);
            for j in 0..=model.dim {
                let fj = crate::jet::factorial(j as u32);
                let cj = c(0.0, -1.0 / PI).powu(j as u32) / c(fj, 0.0);
                let val = pol.bilinear(&model.a_series[k1], &nw) * cj;
                if val.norm() > 0.0 {
                    if p.len() <= j {
                        p.resize(j + 1, c(0.0, 0.0));
                    }
                    p[j] += val;
                }
                nw = &model.n_mat * nw;
            }
            if !p.is_empty() {
                s_graded.insert((k1, k2), p);
            }
        }
    }
    let Some(p00) = s_graded.get(&(0, 0)) else {
        return Ok(Classification::Inconclusive {
            reason: "(A₀, Ā₀) vanishes".into(),
        });
    };
    let s00 = p00[0];
    if !(s00.re > 0.0) {
        return Ok(Classification::Inconclusive {
            reason: format!("(A₀, Ā₀) = {s00} is not positive"),
        });
    }
    if p00.len() > 1 && p00[1..].iter().any(|x| x.norm() > 1e-10 * s00.norm()) {
        return Ok(Classification::Inconclusive {
            reason: "logarithm survives in the constant term despite N A₀ = 0".into(),
        });
    }

    // normalize and take log(1 + E)
    let mut e: Graded = BTreeMap::new();
    for (key, p) in &s_graded {
        let mut q: UPoly = p.iter().map(|x| x / s00).collect();
        if *key == (0, 0) {
            q[0] -= c(1.0, 0.0);
        }
        if q.iter().any(|x| x.norm() > 0.0) {
            e.insert(*key, q);
        }
    }
    let mut log_s: Graded = BTreeMap::new();
    let mut power: Graded = BTreeMap::new();
    power.insert((0, 0), vec![c(1.0, 0.0)]);
    for j in 1..=CLASSIFIER_ZDEG {
        power = graded_mul(&power, &e);
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        for (key, p) in &power {
            let entry = log_s.entry(*key).or_default();
            upoly_add(entry, p, c(sign / j as f64, 0.0));
        }
    }

    // Leading mixed group: smallest total degree D ≥ 1 carrying anything
    // besides pure z^D / z̄^D power terms without logs.
    let scale = log_s
        .values()
        .flat_map(|p| p.iter().map(|x| x.norm()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let cut = 1e-10 * scale;
    for d in 1..=CLASSIFIER_ZDEG {
        let mut lmax: Option<usize> = None;
        for ((k1, k2), p) in &log_s {
            if k1 + k2 != d {
                continue;
            }
            let pure = (*k1 == d && *k2 == 0) || (*k1 == 0 && *k2 == d);
            for (j, &v) in p.iter().enumerate() {
                if v.norm() <= cut {
                    continue;
                }
                if pure && j == 0 {
                    continue; // belongs to P + conj(P)
                }
                lmax = Some(lmax.map_or(j, |cur: usize| cur.max(j)));
            }
        }
        let Some(l) = lmax else { continue };
        // Extract f(z, z̄) = Σ_{k1+k2=d} coeff · z^{k1} z̄^{k2} at u-power l.
        let mut f_coeffs: Vec<((usize, usize), Complex64)> = Vec::new();
        for ((k1, k2), p) in &log_s {
            if k1 + k2 != d || p.len() <= l {
                continue;
            }
            if p[l].norm() > cut {
                f_coeffs.push(((*k1, *k2), p[l]));
            }
        }
        let fmax = f_coeffs.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        let pure_power_residual = f_coeffs
            .iter()
            .filter(|((k1, k2), _)| (*k1 == d && *k2 == 0) || (*k1 == 0 && *k2 == d))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
            / fmax.max(1e-300);
        // Rotational invariance by angular sampling at fixed radius 1:
        // f(e^{iθ}, e^{-iθ}) must be θ-independent.
        let radial = f_coeffs
            .iter()
            .find(|((k1, k2), _)| k1 == k2)
            .map(|(_, v)| v.re)
            .unwrap_or(0.0);
        let mut rot_resid = 0.0_f64;
        for j in 0..16 {
            let theta = 2.0 * PI * j as f64 / 16.0;
            let mut val = c(0.0, 0.0);
            for ((k1, k2), v) in &f_coeffs {
                val += v * c(0.0, theta * (*k1 as f64 - *k2 as f64)).exp();
            }
            rot_resid = rot_resid.max((val - c(radial, 0.0)).norm() / fmax.max(1e-300));
        }
        if d % 2 == 1 && l >= 1 {
            return Ok(Classification::Inconclusive {
                reason: format!("leading mixed group has odd degree {d}"),
            });
        }
        return Ok(Classification::Case2 {
            k: (d / 2) as u32,
            l: l as u32,
            radial_coefficient: radial,
            pure_power_residual: if l >= 1 { pure_power_residual } else { 0.0 },
            rotational_residual: rot_resid,
            degree_even: d % 2 == 0,
        });
    }
    Ok(Classification::Case2Degenerate)
}

// ---------------------------------------------------------------------------
// Yukawa chain (threefolds, one variable)
// ---------------------------------------------------------------------------

/// Values of the one-variable chain at a point.
#[derive(Clone, Debug)]
pub struct YukawaChain1D {
    pub z: Complex64,
    /// `K = -log (Ω, Ω̄)`.
    pub k_potential: f64,
    /// Weil-Petersson metric value λ.
    pub lambda: f64,
    pub gamma: Complex64,
    pub k1: Complex64,
    /// `F₁₁₁ = (Ω, ∂³Ω)`.
    pub f111: Complex64,
    /// `F₁₁₁₁ = ∂F₁₁₁ - 3 Γ¹₁₁ F₁₁₁ + 2 K₁ F₁₁₁`.
    pub f1111: Complex64,
    /// `A = λ^{-2} e^{2K} |F₁₁₁|²`.
    pub a_cap: f64,
    /// Hodge metric `h = 2λ + A`.
    pub h: f64,
    /// `R̃₁₁̄₁₁̄ = 4λ² - 4λA + 2A² + 2 λ^{-1} e^{2K} |F₁₁₁₁|² h^{-1}`.
    pub rt1111: f64,
    /// Scalar curvature `ρ = -h^{-2} R̃₁₁̄₁₁̄`.
    pub rho: f64,
}

impl YukawaChain1D {
    /// Re-expansion of ρ through the two bounded fractions in
    /// `x = e^{2K} λ^{-3} |F₁₁₁|²` and `y = e^{2K} λ^{-4} |F₁₁₁₁|²`:
    /// `ρ = -(4 - 4x + 2x²)/(2+x)² - 2y/(2+x)³`.
    pub fn rho_fraction_form(&self) -> f64 {
        let e2k = (2.0 * self.k_potential).exp();
        let x = e2k * self.f111.norm_sqr() / self.lambda.powi(3);
        let y = e2k * self.f1111.norm_sqr() / self.lambda.powi(4);
        -(4.0 - 4.0 * x + 2.0 * x * x) / (2.0 + x).powi(2) - 2.0 * y / (2.0 + x).powi(3)
    }
}

/// Computes the chain from an order-4 jet (threefolds, one variable).
pub fn yukawa_chain(jet: &JetSection, pol: &PolarizationForm, tol: &Tolerances) -> Result<YukawaChain1D> {
    if pol.weight != 3 {
        return Err(Error::Domain(format!(
            "the Yukawa chain is a threefold computation (weight 3, got {})",
            pol.weight
        )));
    }
    if jet.vars() != 1 {
        return Err(Error::Domain("the Yukawa chain needs one variable".into()));
    }
    jet.require_order(4, "Yukawa chain")?;
    let frame = covariant_frame(jet, pol, tol)?;
    let lambda = frame.g_val[(0, 0)].re;
    if lambda <= 0.0 {
        return Err(Error::Degeneracy("Weil-Petersson metric not positive".into()));
    }
    let k_potential = -frame.s_val.ln();
    let gamma = frame.gamma_val(0, 0, 0);
    let k1 = frame.k_val(0);
    let omega0 = jet.coeffs[0].clone();
    let d1 = jet.derivative(&[1])?;
    let d3 = jet.derivative(&[3])?;
    let d4 = jet.derivative(&[4])?;
    let f111 = pol.bilinear(&omega0, &d3);
    let df111 = pol.bilinear(&d1, &d3) + pol.bilinear(&omega0, &d4);
    let f1111 = df111 - c(3.0, 0.0) * gamma * f111 + c(2.0, 0.0) * k1 * f111;
    let e2k = (2.0 * k_potential).exp();
    let a_cap = e2k * f111.norm_sqr() / (lambda * lambda);
    let h = 2.0 * lambda + a_cap;
    let rt1111 = 4.0 * lambda * lambda - 4.0 * lambda * a_cap + 2.0 * a_cap * a_cap
        + 2.0 * e2k * f1111.norm_sqr() / (lambda * h);
    let rho = -rt1111 / (h * h);
    Ok(YukawaChain1D {
        z: jet.z0[0],
        k_potential,
        lambda,
        gamma,
        k1,
        f111,
        f1111,
        a_cap,
        h,
        rt1111,
        rho,
    })
}

// ---------------------------------------------------------------------------
// Boundedness scan
// ---------------------------------------------------------------------------

pub struct ScanReport {
    pub radii: Vec<f64>,
    pub rho: Vec<f64>,
    pub sup_abs_rho: f64,
    /// sup |ρ| over the first and last quarter of the ray.
    pub first_quarter: f64,
    pub last_quarter: f64,
    pub trend_ratio: f64,
    pub bounded: bool,
    /// Set when run with the partial Hodge metric instead of `2λ + A`.
    pub exploratory_metric: Option<f64>,
}

pub struct RaySpec {
    pub r0: f64,
    pub factor: f64,
    pub count: usize,
}

impl Default for RaySpec {
    fn default() -> Self {
        RaySpec {
            r0: 1e-2,
            factor: 0.5,
            count: 40,
        }
    }
}

/// Scalar-curvature boundedness scan along a geometric ray toward `z = 0`.
/// Requires a complete boundary point (`N A₀ ≠ 0`, or a finite-distance
/// expansion with `l ≥ 1`); the trend test compares sup |ρ| over the last
/// quarter of the ray against the first quarter.
pub fn curvature_boundedness_scan(
    model: &Model,
    ray: &RaySpec,
    mu_override: Option<f64>,
    tol: &Tolerances,
) -> Result<ScanReport> {
    if model.weight() != 3 {
        return Err(Error::Refused(format!(
            "boundedness statement applies to threefolds (weight 3, got n = {})",
            model.weight()
        )));
    }
    if model.vars() != 1 {
        return Err(Error::Refused("scan needs a one-parameter model".into()));
    }
    let boundary = BoundaryModel1D::from_model(model)?;
    let (complete, _) = completeness_test(&boundary, tol);
    if !complete {
        match boundary_classifier(&boundary, tol)? {
            Classification::Case2 { l, .. } if l >= 1 => {}
            _ => {
                return Err(Error::Refused(
                    "boundary point is at finite distance with no logarithmic growth; \
                     the boundedness hypothesis is not met"
                        .into(),
                ))
            }
        }
    }
    if ray.count < 4 || ray.factor <= 0.0 || ray.factor >= 1.0 || ray.r0 <= 0.0 {
        return Err(Error::Parameter("ray needs r0 > 0, 0 < factor < 1, count ≥ 4".into()));
    }

    let mut radii = Vec::with_capacity(ray.count);
    let mut rho = Vec::with_capacity(ray.count);
    for j in 0..ray.count {
        let r = ray.r0 * ray.factor.powi(j as i32);
        let jet = model.jet(&[c(r, 0.0)], 4)?;
        let value = match mu_override {
            None => yukawa_chain(&jet, model.polarization(), tol)?.rho,
            Some(mu) => {
                // exploratory: scalar curvature of ω_μ instead of 2λ + A
                let pt = crate::partial::ph_at_point(model, &[c(r, 0.0)], Some(mu), tol)?;
                crate::partial::scalar_curvature(&pt.curvature, &pt.h, tol)?
            }
        };
        radii.push(r);
        rho.push(value);
    }
    let q = ray.count / 4;
    let sup = |xs: &[f64]| xs.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let first_quarter = sup(&rho[..q.max(1)]);
    let last_quarter = sup(&rho[ray.count - q.max(1)..]);
    let trend_ratio = last_quarter / first_quarter.max(1e-300);
    Ok(ScanReport {
        sup_abs_rho: sup(&rho),
        first_quarter,
        last_quarter,
        trend_ratio,
        bounded: trend_ratio < 4.0,
        exploratory_metric: mu_override,
        radii,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::presets::{case2, model_a, model_c, quintic};

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn boundary(m: &Model) -> BoundaryModel1D {
        BoundaryModel1D::from_model(m).unwrap()
    }

    #[test]
    fn weight_polynomial_matches_hand_expansion() {
        // model_a: (4/3)(u/2π)³; model_c: (2/3)(u/2π)⁴ — computed through
        // the pairing of the exponential with its conjugate.
        let ba = boundary(&model_a());
        let pa = weight_polynomial(&ba, &tols()).unwrap();
        assert_eq!(poly_degree(&pa), 3);
        let expect3 = (4.0 / 3.0) / (2.0 * PI).powi(3);
        assert!((pa[3] - expect3).abs() < 1e-12 * expect3, "{} vs {expect3}", pa[3]);

        let bc = boundary(&model_c());
        let pc = weight_polynomial(&bc, &tols()).unwrap();
        assert_eq!(poly_degree(&pc), 4);
        let expect4 = (2.0 / 3.0) / (2.0 * PI).powi(4);
        assert!((pc[4] - expect4).abs() < 1e-12 * expect4, "{} vs {expect4}", pc[4]);
    }

    #[test]
    fn weight_polynomial_constant_iff_pairings_vanish() {
        // Converse direction: constant polynomial ⟺ (N^l A₀, Ā₀) = 0 ∀ l ≥ 1.
        let b = boundary(&case2());
        let p = weight_polynomial(&b, &tols()).unwrap();
        assert_eq!(poly_degree(&p), 0);
        let pol = &b.polarization;
        let mut nv = b.a0().clone();
        for _ in 0..b.dim {
            nv = &b.n_mat * nv;
            let v = pol.bilinear(&nv, &conj_vec(b.a0())).norm();
            assert!(v < 1e-12);
        }
    }

    #[test]
    fn completeness_truth_table() {
        assert!(completeness_test(&boundary(&model_a()), &tols()).0);
        assert!(!completeness_test(&boundary(&case2()), &tols()).0);
        // N ≠ 0 with A₀ in its kernel (the case2 fixture has exactly that)
        let b = boundary(&case2());
        assert!(fnorm(&b.n_mat) > 0.0);
    }

    #[test]
    fn wp_leading_limits() {
        let wa = wp_leading(&boundary(&model_a()), &tols()).unwrap();
        assert_eq!(wa.l, 3);
        for (u, _, dev) in &wa.samples {
            assert!(*dev < 1e-6, "deviation {dev:.3e} at u = {u}");
        }
        let wc = wp_leading(&boundary(&model_c()), &tols()).unwrap();
        assert_eq!(wc.l, 4);
        assert!(wc.samples.iter().all(|(_, _, dev)| *dev < 1e-6));
        let wq = wp_leading(&boundary(&quintic()), &tols()).unwrap();
        assert_eq!(wq.l, 3);
        assert!((wq.limit - 0.75).abs() < 1e-12);
        assert!(wq.samples.iter().all(|(_, _, dev)| *dev < 1e-4));
    }

    #[test]
    fn wp_leading_redirects_case2() {
        assert!(matches!(
            wp_leading(&boundary(&case2()), &tols()),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn truncation_bound_dominates_model_a() {
        let b = boundary(&model_a());
        let tb = truncation_bound(&b, 0.5, 0, 0.05).unwrap();
        // finitely supported series: every term is retained at μ = 0.5,
        // so the tail is exactly zero
        assert!(tb.dominated, "{} > {}", tb.empirical, tb.bound);
        assert!(tb.empirical < 1e-12);
    }

    #[test]
    fn truncation_bound_dominates_quintic_at_many_radii() {
        let b = boundary(&quintic());
        for j in 0..10 {
            let r = 1e-3 * 0.6_f64.powi(j);
            let tb = truncation_bound(&b, 0.5, 0, r).unwrap();
            assert!(
                tb.dominated,
                "tail {:.3e} exceeds bound {:.3e} at r = {r:.3e}",
                tb.empirical,
                tb.bound
            );
            assert!(tb.empirical > 0.0, "quintic tail should be nonzero");
        }
    }

    #[test]
    fn truncation_bound_s1_scales_by_inverse_radius() {
        let b = boundary(&quintic());
        let r = 1e-4;
        let t0 = truncation_bound(&b, 0.5, 0, r).unwrap();
        let t1 = truncation_bound(&b, 0.5, 1, r).unwrap();
        assert_eq!(t0.k0, t1.k0);
        assert_eq!(t0.l0, t1.l0);
        // bound ∝ r^{k0-s}: one more inverse power of r
        let ratio = (t1.bound / t0.bound) * r;
        assert!(ratio > 0.05 && ratio < 20.0, "unexpected scaling {ratio}");
        assert!(t1.dominated);
    }

    #[test]
    fn truncation_bound_domain_guard() {
        let b = boundary(&quintic());
        assert!(truncation_bound(&b, 0.5, 0, b.delta / 2.0).is_err());
    }

    #[test]
    fn classifier_cases() {
        match boundary_classifier(&boundary(&model_a()), &tols()).unwrap() {
            Classification::Case1 { na0_ratio } => assert!(na0_ratio > 0.5),
            other => panic!("expected Case1, got {other:?}"),
        }
        match boundary_classifier(&boundary(&case2()), &tols()).unwrap() {
            Classification::Case2 {
                k,
                l,
                radial_coefficient,
                pure_power_residual,
                rotational_residual,
                degree_even,
            } => {
                assert_eq!(k, 1);
                assert_eq!(l, 1);
                assert!(degree_even);
                assert!(radial_coefficient < 0.0, "λ > 0 needs a negative radial term");
                assert!(pure_power_residual < 1e-10);
                assert!(rotational_residual < 1e-10);
            }
            other => panic!("expected Case2, got {other:?}"),
        }
    }

    #[test]
    fn classifier_degenerate_for_constant_model() {
        use std::collections::BTreeMap;
        let d = 4;
        let mut q = CMat::zeros(d, d);
        q[(0, 3)] = c(1.0, 0.0);
        q[(3, 0)] = c(-1.0, 0.0);
        q[(1, 2)] = c(-1.0, 0.0);
        q[(2, 1)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(3, q).unwrap();
        let mut a = BTreeMap::new();
        let mut a0 = CVec::zeros(d);
        a0[0] = c(1.0, 0.0);
        a0[3] = c(0.0, -0.5);
        a.insert(vec![0u32], a0);
        let m = Model::Orbit(
            crate::models::NilpotentOrbitModel::new(3, vec![CMat::zeros(d, d)], a, pol).unwrap(),
        );
        match boundary_classifier(&boundary(&m), &tols()).unwrap() {
            Classification::Case2Degenerate => {}
            other => panic!("expected degenerate, got {other:?}"),
        }
    }

    #[test]
    fn yukawa_chain_closed_form_on_model_a() {
        let m = model_a();
        for &r in &[(-2.0 * PI).exp(), 1e-3] {
            let jet = m.jet(&[c(r, 0.0)], 4).unwrap();
            let ch = yukawa_chain(&jet, m.polarization(), &tols()).unwrap();
            let z = c(r, 0.0);
            let expect_f111 = c(1.0, 0.0) / (c(8.0 * PI.powi(3), 0.0) * z.powu(3));
            assert!((ch.f111 - expect_f111).norm() < 1e-10 * expect_f111.norm());
            assert!(
                ch.f1111.norm() < 1e-9 * (ch.f111.norm() / r),
                "F₁₁₁₁ should cancel exactly, got {:.3e}",
                ch.f1111.norm()
            );
            assert!((ch.a_cap - 4.0 / 3.0 * ch.lambda).abs() < 1e-9 * ch.lambda);
            assert!((ch.rho + 0.2).abs() < 1e-10, "ρ = {}", ch.rho);
            assert!((ch.h - (2.0 * ch.lambda + ch.a_cap)).abs() < 1e-12 * ch.h);
            let frac = ch.rho_fraction_form();
            assert!((frac - ch.rho).abs() < 1e-9 * ch.rho.abs());
        }
    }

    #[test]
    fn yukawa_chain_gauge_invariance() {
        let m = model_a();
        let jet = m.jet(&[c(0.02, 0.0)], 4).unwrap();
        let base = yukawa_chain(&jet, m.polarization(), &tols()).unwrap();
        let jet2 = jet
            .rescaled(&[(vec![0], c(1.0, 0.0)), (vec![1], c(0.5, 0.0))])
            .unwrap();
        let moved = yukawa_chain(&jet2, m.polarization(), &tols()).unwrap();
        assert!((base.rho - moved.rho).abs() < 1e-9);
        assert!((base.lambda - moved.lambda).abs() < 1e-9 * base.lambda);
    }

    #[test]
    fn yukawa_chain_rejects_fourfolds() {
        let m = model_c();
        let jet = m.jet(&[c(0.01, 0.0)], 4).unwrap();
        assert!(matches!(
            yukawa_chain(&jet, m.polarization(), &tols()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn quintic_chain_case1_behavior() {
        let m = quintic();
        let jet = m.jet(&[c(1e-5, 0.0)], 4).unwrap();
        let ch = yukawa_chain(&jet, m.polarization(), &tols()).unwrap();
        assert!(ch.rho < 0.0 && ch.rho.is_finite());
        // |F₁₁₁| ~ |z|^{-3} leading behavior
        let jet2 = m.jet(&[c(2e-5, 0.0)], 4).unwrap();
        let ch2 = yukawa_chain(&jet2, m.polarization(), &tols()).unwrap();
        let scaling = (ch.f111.norm() / ch2.f111.norm()) / (2.0_f64).powi(3);
        assert!((scaling - 1.0).abs() < 0.05, "F₁₁₁ scaling ratio {scaling}");
    }

    #[test]
    fn boundedness_scan_model_a_flat() {
        let m = model_a();
        let scan = curvature_boundedness_scan(&m, &RaySpec::default(), None, &tols()).unwrap();
        assert!(scan.bounded);
        assert!((scan.sup_abs_rho - 0.2).abs() < 1e-9);
        assert!(scan.trend_ratio < 1.0 + 1e-9);
    }

    #[test]
    fn boundedness_scan_refuses_fourfolds_and_incomplete_models() {
        assert!(matches!(
            curvature_boundedness_scan(&model_c(), &RaySpec::default(), None, &tols()),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn kk1_first_fraction_is_bounded_by_two() {
        // |(4 - 4x + 2x²)/(2+x)²| ≤ 2 for x ≥ 0, on a wide grid.
        for j in 0..=2000 {
            let x = j as f64 * 0.05;
            let v = ((4.0 - 4.0 * x + 2.0 * x * x) / (2.0 + x).powi(2)).abs();
            assert!(v <= 2.0 + 1e-12, "fraction {v} at x = {x}");
        }
    }

    #[test]
    fn quintic_f1111_case1_estimate_along_ray() {
        // |F₁₁₁₁| ≤ C / (r⁴ log(1/r)) when F₁₁₁ ~ z^{-3}: the normalized
        // product |F₁₁₁₁| r⁴ u must stay bounded along the ray.
        let m = quintic();
        let mut vals = Vec::new();
        for j in 0..12 {
            let r = 1e-4 * 0.5_f64.powi(j);
            let jet = m.jet(&[c(r, 0.0)], 4).unwrap();
            let ch = yukawa_chain(&jet, m.polarization(), &tols()).unwrap();
            let u = (1.0 / r).ln();
            vals.push(ch.f1111.norm() * r.powi(4) * u);
        }
        let head = vals[..4].iter().cloned().fold(0.0_f64, f64::max);
        let tail = vals[8..].iter().cloned().fold(0.0_f64, f64::max);
        assert!(tail <= 4.0 * head.max(1e-12), "head {head:.3e}, tail {tail:.3e}");
    }
}
