//! The partial Hodge metric `ω_μ = μ·ω_WP + Ric(ω_WP)` and its curvature.
//!
//! In index form `h_{ij̄} = (μ-m-1) g_{ij̄} + g^{αβ̄} F_{ij̄αβ̄}`, Kähler for
//! `μ > m+1`.  The curvature tensor is assembled from the third-order chain
//!
//! `T_{kαi} = ∂_k D_αD_iΩ + K_k D_αD_iΩ - Γ^p_{αk} D_pD_iΩ - Γ^p_{ik} D_αD_pΩ`,
//!
//! which decomposes as `T = E + DDD` into its `H^{n-2,2}` and `H^{n-3,3}`
//! parts (its `H^{n,0}` and `H^{n-1,1}` projections vanish).  The resulting
//! tensor is
//!
//! ```text
//! R̃_{ij̄kl̄} = (μ-m-1)(g_{ij̄}g_{kl̄} + g_{il̄}g_{kj̄}) - (μ-m) F_{ij̄kl̄}
//!           + F_{iq̄αl̄} F_{pj̄kβ̄} g^{αβ̄} g^{pq̄}
//!           + F_{αq̄kl̄} F_{ij̄pβ̄} g^{αβ̄} g^{pq̄}
//!           + (D_kD_αD_iΩ, conj D_lD_βD_jΩ)/S · g^{αβ̄}
//!           + (E_{kαi}, conj E_{lβj})/S · g^{αβ̄}
//!           - h^{st̄} (E_{kαi}, conj D_βD_tΩ)/S (D_γD_sΩ, conj E_{lτj})/S g^{αβ̄} g^{γτ̄}
//! ```
//!
//! For fourfolds (weight 4) with `μ = m+2`, the bisectional curvature is
//! nonpositive and the holomorphic sectional curvature is at most
//! `-1/(m+4)`; both are checked pointwise by [`fourfold_report`] together
//! with the scalar-curvature control of the real sectional curvature.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::CovariantFrame;
use crate::hodge::{project_pq, HodgeDecompositionAt, PolarizationForm};
use crate::jet::JetSection;
use crate::linalg::{c, vnorm, CMat, CVec};
use crate::models::{decomposition_at, Model};
use crate::report::BoundReport;
use crate::tol::Tolerances;
use crate::wp::{
    covariant_frame, f_tensor, wp_metric, CurvatureField, MetricField, MetricRole, Tensor4,
    CURVATURE_CONVENTION,
};

/// Default seed for the randomized real-pair sampling; recorded in reports.
pub const DEFAULT_PAIR_SEED: u64 = 0x77505f47454f4d;

/// `h = (μ-m-1) g + g^{αβ̄} F_{ij̄αβ̄}`; requires `μ > m+1`.
pub fn ph_metric(g: &MetricField, f: &Tensor4, mu: f64, tol: &Tolerances) -> Result<MetricField> {
    let m = g.dim();
    if !(mu > m as f64 + 1.0) {
        return Err(Error::Parameter(format!(
            "partial Hodge metric needs mu > m+1 = {} (got {mu})",
            m + 1
        )));
    }
    let lambda = mu - m as f64 - 1.0;
    let inv = g.inverse(tol)?;
    let mut h = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut contr = c(0.0, 0.0);
            for a in 0..m {
                for b in 0..m {
                    contr += g.upper(&inv, a, b) * f.at(i, j, a, b);
                }
            }
            h[(i, j)] = c(lambda, 0.0) * g.matrix[(i, j)] + contr;
        }
    }
    MetricField::new(g.point.clone(), h, MetricRole::PartialHodge { mu })
}

/// Third covariant derivatives and their block decomposition.
#[derive(Clone, Debug)]
pub struct ThirdOrderChain {
    pub m: usize,
    pub weight: u32,
    pub mu: f64,
    pub lambda: f64,
    /// `t[k][α][i]`.
    pub t: Vec<Vec<Vec<CVec>>>,
    /// `H^{n-2,2}` component of T.
    pub e: Vec<Vec<Vec<CVec>>>,
    /// `H^{n-3,3}` component of T (the honest `D_kD_αD_iΩ`).
    pub ddd: Vec<Vec<Vec<CVec>>>,
}

impl ThirdOrderChain {
    pub fn at_t(&self, k: usize, a: usize, i: usize) -> &CVec {
        &self.t[k][a][i]
    }
}

/// Builds `T = E + DDD` from a frame with jet order ≥ 3.
pub fn third_order_chain(
    frame: &CovariantFrame,
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    mu: f64,
    tol: &Tolerances,
) -> Result<ThirdOrderChain> {
    if frame.order < 3 {
        return Err(Error::Order {
            have: frame.order,
            need: 3,
            what: "third-order chain",
        });
    }
    let m = frame.vars;
    let n = frame.weight;
    if n < 3 {
        return Err(Error::Domain("third-order chain needs weight >= 3".into()));
    }
    if !(mu > m as f64 + 1.0) {
        return Err(Error::Parameter(format!(
            "third-order chain carries mu > m+1 (got {mu})"
        )));
    }
    let mut t = vec![vec![vec![CVec::zeros(frame.dim); m]; m]; m];
    let mut e = t.clone();
    let mut ddd = t.clone();
    for k in 0..m {
        for a in 0..m {
            for i in 0..m {
                let mut v = frame.dd_omega[a][i].dh(k).val();
                v += frame.dd_omega_val(a, i).map(|x| x * frame.k_val(k));
                for p in 0..m {
                    v -= frame
                        .dd_omega_val(p, i)
                        .map(|x| x * frame.gamma_val(p, a, k));
                    v -= frame
                        .dd_omega_val(a, p)
                        .map(|x| x * frame.gamma_val(p, i, k));
                }
                let e_part = project_pq(&v, dec, pol, n - 2, tol)?;
                let d_part = project_pq(&v, dec, pol, n - 3, tol)?;
                t[k][a][i] = v;
                e[k][a][i] = e_part;
                ddd[k][a][i] = d_part;
            }
        }
    }
    let chain = ThirdOrderChain {
        m,
        weight: n,
        mu,
        lambda: mu - m as f64 - 1.0,
        t,
        e,
        ddd,
    };
    let resid = chain_residuals(&chain, dec, pol, tol)?;
    if resid > tol.residual {
        return Err(Error::Degeneracy(format!(
            "third-order chain block structure violated (residual {resid:.3e})"
        )));
    }
    Ok(chain)
}

/// Max relative residual over: `T = E + DDD`, vanishing projections of T
/// onto `H^{n,0}` and `H^{n-1,1}`, and symmetry of T in `(k, α, i)`.
pub fn chain_residuals(
    chain: &ThirdOrderChain,
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<f64> {
    let m = chain.m;
    let n = chain.weight;
    let mut worst = 0.0_f64;
    for k in 0..m {
        for a in 0..m {
            for i in 0..m {
                let t = &chain.t[k][a][i];
                let scale = vnorm(t).max(1e-300);
                let recomposed = &chain.e[k][a][i] + &chain.ddd[k][a][i];
                worst = worst.max(vnorm(&(t - &recomposed)) / scale);
                for p in [n, n - 1] {
                    let proj = project_pq(t, dec, pol, p, tol)?;
                    worst = worst.max(vnorm(&proj) / scale);
                }
                // symmetry in all three slots
                let perms = [(a, k, i), (i, a, k), (k, i, a)];
                for (x, y, z) in perms {
                    worst = worst.max(vnorm(&(t - &chain.t[x][y][z])) / scale);
                }
            }
        }
    }
    Ok(worst)
}

/// Curvature tensor of the partial Hodge metric (term-by-term assembly of
/// the display in the module docs).
#[allow(clippy::too_many_arguments)]
pub fn ph_curvature(
    chain: &ThirdOrderChain,
    frame: &CovariantFrame,
    g: &MetricField,
    h: &MetricField,
    f: &Tensor4,
    _dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<CurvatureField> {
    let m = g.dim();
    let mu = chain.mu;
    let lambda = chain.lambda;
    let s0 = frame.s_val;
    let ginv = g.inverse(tol)?;
    let hinv = h.inverse(tol)?;
    let gm = &g.matrix;

    let gup = |a: usize, b: usize| ginv[(b, a)];
    let hup = |s: usize, t: usize| hinv[(t, s)];

    let mut rt = Tensor4::zeros(m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut v = c(lambda, 0.0) * (gm[(i, j)] * gm[(k, l)] + gm[(i, l)] * gm[(k, j)]);
                    v -= c(mu - m as f64, 0.0) * f.at(i, j, k, l);
                    for a in 0..m {
                        for b in 0..m {
                            for p in 0..m {
                                for q in 0..m {
                                    v += f.at(i, q, a, l) * f.at(p, j, k, b) * gup(a, b) * gup(p, q);
                                    v += f.at(a, q, k, l) * f.at(i, j, p, b) * gup(a, b) * gup(p, q);
                                }
                            }
                        }
                    }
                    for a in 0..m {
                        for b in 0..m {
                            let ddd_pair =
                                pol.sesqui(&chain.ddd[k][a][i], &chain.ddd[l][b][j]) / s0;
                            let e_pair = pol.sesqui(&chain.e[k][a][i], &chain.e[l][b][j]) / s0;
                            v += (ddd_pair + e_pair) * gup(a, b);
                        }
                    }
                    for s in 0..m {
                        for tt in 0..m {
                            let mut left = c(0.0, 0.0);
                            let mut right = c(0.0, 0.0);
                            for a in 0..m {
                                for b in 0..m {
                                    left += pol.sesqui(&chain.e[k][a][i], &frame.dd_omega_val(b, tt))
                                        / s0
                                        * gup(a, b);
                                }
                            }
                            for gdx in 0..m {
                                for tau in 0..m {
                                    right += pol
                                        .sesqui(&frame.dd_omega_val(gdx, s), &chain.e[l][tau][j])
                                        / s0
                                        * gup(gdx, tau);
                                }
                            }
                            v -= hup(s, tt) * left * right;
                        }
                    }
                    rt.set(i, j, k, l, v);
                }
            }
        }
    }
    let field = CurvatureField::new(g.point.clone(), rt);
    if field.symmetry_residual > tol.residual.max(1e-7) {
        return Err(Error::Degeneracy(format!(
            "partial Hodge curvature lost Kähler symmetry (residual {:.3e})",
            field.symmetry_residual
        )));
    }
    Ok(field)
}

/// Fourfold Yukawa coupling `ξ_{ijkl} = (Ω, ∂_i∂_j∂_k∂_lΩ)`, with the two
/// covariant re-expressions `(D_kD_lΩ, D_jD_iΩ)` and `-(D_jD_kD_lΩ, D_iΩ)`
/// checked as residuals.
pub struct Yukawa4 {
    pub xi: Tensor4,
    /// max relative residual of the covariant identities
    pub identity_residual: f64,
}

pub fn yukawa4(
    jet: &JetSection,
    frame: &CovariantFrame,
    chain: &ThirdOrderChain,
    pol: &PolarizationForm,
) -> Result<Yukawa4> {
    if pol.weight != 4 {
        return Err(Error::Domain(format!(
            "fourfold Yukawa coupling needs weight 4 (got {})",
            pol.weight
        )));
    }
    jet.require_order(4, "fourfold Yukawa coupling")?;
    let m = jet.vars();
    let omega0 = jet.coeffs[0].clone();
    let mut xi = Tensor4::zeros(m);
    let mut resid = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut idx = vec![0u32; m];
                    idx[i] += 1;
                    idx[j] += 1;
                    idx[k] += 1;
                    idx[l] += 1;
                    let d4 = jet.derivative(&idx)?;
                    let v = pol.bilinear(&omega0, &d4);
                    xi.set(i, j, k, l, v);
                    let scale = v.norm().max(vnorm(&omega0) * vnorm(&d4)).max(1e-300);
                    // (D_kD_lΩ, D_jD_iΩ)
                    let alt1 = pol.bilinear(&frame.dd_omega_val(k, l), &frame.dd_omega_val(j, i));
                    // -(D_jD_kD_lΩ, D_iΩ)
                    let alt2 = -pol.bilinear(&chain.ddd[j][k][l], &frame.d_omega_val(i));
                    resid = resid.max((v - alt1).norm() / scale);
                    resid = resid.max((v - alt2).norm() / scale);
                }
            }
        }
    }
    Ok(Yukawa4 {
        xi,
        identity_residual: resid,
    })
}

/// Everything needed at one point for partial-Hodge analysis.
pub struct PhPoint {
    pub jet: JetSection,
    pub dec: HodgeDecompositionAt,
    pub frame: CovariantFrame,
    pub g: MetricField,
    pub f: Tensor4,
    pub h: MetricField,
    pub chain: ThirdOrderChain,
    pub curvature: CurvatureField,
}

/// Default μ: `m+2` for fourfolds, `m+3` for threefolds (the values at which
/// `ω_μ` matches the Hodge metric up to a constant).
pub fn default_mu(weight: u32, m: usize) -> f64 {
    match weight {
        4 => m as f64 + 2.0,
        _ => m as f64 + 3.0,
    }
}

pub fn ph_at_point(
    model: &Model,
    z: &[Complex64],
    mu: Option<f64>,
    tol: &Tolerances,
) -> Result<PhPoint> {
    let pol = model.polarization().clone();
    let jet = model.jet(z, 3)?;
    let dec = decomposition_at(&jet, &pol, tol)?;
    let frame = covariant_frame(&jet, &pol, tol)?;
    let g = wp_metric(&jet, &pol, tol)?;
    let f = f_tensor(&frame, &pol);
    let mu = mu.unwrap_or_else(|| default_mu(pol.weight, jet.vars()));
    let h = ph_metric(&g, &f, mu, tol)?;
    let chain = third_order_chain(&frame, &dec, &pol, mu, tol)?;
    let curvature = ph_curvature(&chain, &frame, &g, &h, &f, &dec, &pol, tol)?;
    Ok(PhPoint {
        jet,
        dec,
        frame,
        g,
        f,
        h,
        chain,
        curvature,
    })
}

/// Scalar curvature `-h^{ij̄} h^{kl̄} R̃_{ij̄kl̄}` of a metric/curvature pair.
pub fn scalar_curvature(rt: &CurvatureField, h: &MetricField, tol: &Tolerances) -> Result<f64> {
    let m = h.dim();
    let hinv = h.inverse(tol)?;
    let mut acc = c(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    acc += hinv[(j, i)] * hinv[(l, k)] * rt.tensor.at(i, j, k, l);
                }
            }
        }
    }
    Ok(-acc.re)
}

/// `R̃(ξ, η̄, ζ, τ̄)` for complex tangent vectors given by their `∂_z` components.
fn eval_complex(rt: &Tensor4, xi: &[Complex64], eta: &[Complex64], zeta: &[Complex64], tau: &[Complex64]) -> Complex64 {
    let m = rt.m;
    let mut acc = c(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    acc += rt.at(i, j, k, l) * xi[i] * eta[j].conj() * zeta[k] * tau[l].conj();
                }
            }
        }
    }
    acc
}

/// Real sectional curvature `R̃(X,Y,X,Y) = (Re R̃(ξ,η̄,ξ,η̄) - R̃(ξ,ξ̄,η,η̄))/8`
/// with `ξ = X - iJX`, and the squared Riemannian norm `|X|² = h(ξ, ξ̄)/2`.
struct RealPair {
    xi: Vec<Complex64>,
    eta: Vec<Complex64>,
}

fn real_norm_sq(h: &CMat, xi: &[Complex64]) -> f64 {
    let m = h.nrows();
    let mut acc = c(0.0, 0.0);
    for k in 0..m {
        for l in 0..m {
            acc += h[(k, l)] * xi[k] * xi[l].conj();
        }
    }
    acc.re / 2.0
}

fn real_inner(h: &CMat, a: &[Complex64], b: &[Complex64]) -> f64 {
    let m = h.nrows();
    let mut acc = c(0.0, 0.0);
    for k in 0..m {
        for l in 0..m {
            acc += h[(k, l)] * a[k] * b[l].conj();
        }
    }
    acc.re / 2.0
}

fn sample_orthonormal_pair(rng: &mut ChaCha8Rng, h: &CMat) -> Option<RealPair> {
    let m = h.nrows();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..m)
            .map(|_| {
                // ξ^k = 2(u_k + i v_k) for real tangent components (u, v)
                let u: f64 = rng.sample(rand::distributions::Standard);
                let v: f64 = rng.sample(rand::distributions::Standard);
                c(2.0 * (u - 0.5), 2.0 * (v - 0.5))
            })
            .collect()
    };
    let xi = draw(rng);
    let nx = real_norm_sq(h, &xi);
    if nx < 1e-12 {
        return None;
    }
    let xi: Vec<Complex64> = xi.iter().map(|z| z / c(nx.sqrt(), 0.0)).collect();
    let mut eta = draw(rng);
    let proj = real_inner(h, &eta, &xi);
    for k in 0..m {
        eta[k] -= xi[k] * c(proj, 0.0);
    }
    // also remove the J X direction so the pair is genuinely 2-plane generic
    let ny = real_norm_sq(h, &eta);
    if ny < 1e-12 {
        return None;
    }
    let eta: Vec<Complex64> = eta.iter().map(|z| z / c(ny.sqrt(), 0.0)).collect();
    Some(RealPair { xi, eta })
}

/// Options for [`fourfold_report`].
pub struct FourfoldOptions {
    pub mu: Option<f64>,
    pub pair_samples: usize,
    pub seed: u64,
}

impl Default for FourfoldOptions {
    fn default() -> Self {
        FourfoldOptions {
            mu: None,
            pair_samples: 50,
            seed: DEFAULT_PAIR_SEED,
        }
    }
}

/// Pointwise fourfold curvature bounds:
/// 1. `min_{i,k} R̃_{iīkk̄} ≥ 0` (nonpositive bisectional curvature),
/// 2. `R̃_{iīiī}/h_{iī}² ≥ 1/(m+4)` (holomorphic sectional ≤ -1/(m+4)),
/// 3. `|R̃(X,Y,X,Y)| ≤ (1/2 + 9/8 |ρ|) |X|²|Y|²` over random orthogonal
///    real pairs, ρ the scalar curvature.
pub fn fourfold_report(
    model: &Model,
    points: &[Vec<Complex64>],
    opts: &FourfoldOptions,
    tol: &Tolerances,
) -> Result<BoundReport> {
    if model.weight() != 4 {
        return Err(Error::Domain(format!(
            "fourfold report needs weight 4 (got {})",
            model.weight()
        )));
    }
    let m = model.vars();
    let mu = opts.mu.unwrap_or(m as f64 + 2.0);
    if (mu - (m as f64 + 2.0)).abs() > 1e-12 {
        return Err(Error::Parameter(
            "the fourfold bounds are stated at mu = m+2".into(),
        ));
    }
    let mut rep = BoundReport::new("fourfold partial-Hodge curvature bounds")
        .with_convention(CURVATURE_CONVENTION);
    rep.info("sampling seed", "seed of the random real-pair stream", opts.seed as f64);

    let mut min_bisec = f64::INFINITY;
    let mut max_sec_defect = f64::NEG_INFINITY;
    let mut max_pair_defect = f64::NEG_INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    for z in points {
        let pt = ph_at_point(model, z, Some(mu), tol)?;
        let h = &pt.h.matrix;
        let rt = &pt.curvature.tensor;
        for i in 0..m {
            for k in 0..m {
                let norm = (h[(i, i)].re * h[(k, k)].re).max(1e-300);
                min_bisec = min_bisec.min(rt.at(i, i, k, k).re / norm);
            }
        }
        for i in 0..m {
            let hii = h[(i, i)].re;
            let defect = -rt.at(i, i, i, i).re / (hii * hii) + 1.0 / (m as f64 + 4.0);
            max_sec_defect = max_sec_defect.max(defect);
        }
        let rho = scalar_curvature(&pt.curvature, &pt.h, tol)?;
        let bound = 0.5 + 9.0 / 8.0 * rho.abs();
        let mut taken = 0;
        while taken < opts.pair_samples {
            let Some(pair) = sample_orthonormal_pair(&mut rng, h) else {
                continue;
            };
            taken += 1;
            let re_part = eval_complex(rt, &pair.xi, &pair.eta, &pair.xi, &pair.eta).re;
            let bi_part = eval_complex(rt, &pair.xi, &pair.xi, &pair.eta, &pair.eta).re;
            let sec = (re_part - bi_part) / 8.0;
            max_pair_defect = max_pair_defect.max(sec.abs() - bound);
        }
    }

    rep.check_at_least(
        "bisectional sign",
        "min R̃_{i ibar k kbar} / (h_ii h_kk) over points and index pairs",
        min_bisec,
        -1e-9,
    );
    rep.check_residual(
        "holomorphic sectional bound",
        "max of 1/(m+4) - R̃_{i ibar i ibar}/h_ii² (must be ≤ 0)",
        max_sec_defect,
        1e-9,
    );
    rep.check_residual(
        "real sectional control",
        "max of |R̃(X,Y,X,Y)| - (1/2 + 9/8|ρ|)|X|²|Y|² over sampled pairs",
        max_pair_defect,
        1e-9,
    );
    Ok(rep)
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
    fn ph_metric_on_model_a_is_ten_thirds_lambda() {
        let m = model_a();
        let pt = ph_at_point(&m, &ray((-2.0 * PI).exp()), Some(4.0), &tols()).unwrap();
        let ratio = pt.h.matrix[(0, 0)].re / pt.g.matrix[(0, 0)].re;
        assert!((ratio - 10.0 / 3.0).abs() < 1e-9, "h/g = {ratio}");
    }

    #[test]
    fn ph_metric_rejects_mu_at_boundary() {
        let m = model_a();
        let jet = m.jet(&ray(0.05), 2).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let f = f_tensor(&frame, m.polarization());
        assert!(matches!(
            ph_metric(&g, &f, 2.0, &tols()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn model_a_third_order_chain_is_pure_ddd() {
        // F₁₁₁₁ = 0 for the shift orbit, so E vanishes and T = D₁D₁D₁Ω ∈ H^{0,3}.
        let m = model_a();
        let pt = ph_at_point(&m, &ray((-2.0 * PI).exp()), Some(4.0), &tols()).unwrap();
        let t = &pt.chain.t[0][0][0];
        let e = &pt.chain.e[0][0][0];
        assert!(vnorm(e) < 1e-9 * vnorm(t), "E should vanish on the shift orbit");
        // (T, Ω̄) = 0
        let omega0 = pt.jet.coeffs[0].clone();
        let v = m.polarization().sesqui(t, &omega0).norm();
        assert!(v < 1e-10 * vnorm(t) * vnorm(&omega0));
    }

    #[test]
    fn model_a_f111_from_chain_pairing() {
        // (Ω, T₁₁₁) recovers the third-derivative pairing 1/(8π³z³).
        let m = model_a();
        let r = (-2.0 * PI).exp();
        let pt = ph_at_point(&m, &ray(r), Some(4.0), &tols()).unwrap();
        let omega0 = pt.jet.coeffs[0].clone();
        let got = m.polarization().bilinear(&omega0, &pt.chain.t[0][0][0]);
        let z = c(r, 0.0);
        let expect = c(1.0, 0.0) / (c(8.0 * PI.powi(3), 0.0) * z.powu(3));
        assert!((got - expect).norm() < 1e-9 * expect.norm(), "{got} vs {expect}");
    }

    #[test]
    fn model_a_ph_scalar_curvature_is_minus_one_fifth() {
        let m = model_a();
        for &r in &[(-2.0 * PI).exp(), 0.01] {
            let pt = ph_at_point(&m, &ray(r), Some(4.0), &tols()).unwrap();
            let h = pt.h.matrix[(0, 0)].re;
            let sec = -pt.curvature.tensor.at(0, 0, 0, 0).re / (h * h);
            assert!((sec + 0.2).abs() < 1e-9, "-R̃/h² = {sec} at r = {r}");
            let rho = scalar_curvature(&pt.curvature, &pt.h, &tols()).unwrap();
            assert!((rho + 0.2).abs() < 1e-9, "scalar = {rho}");
        }
    }

    #[test]
    fn model_c_sits_at_the_sectional_bound() {
        let m = model_c();
        let pt = ph_at_point(&m, &ray((-2.0 * PI).exp()), None, &tols()).unwrap();
        let h = pt.h.matrix[(0, 0)].re;
        let ratio = pt.curvature.tensor.at(0, 0, 0, 0).re / (h * h);
        assert!((ratio - 0.2).abs() < 1e-9, "R̃/h² = {ratio}");
        // h = (5/2) g on the weight-4 shift orbit
        let hg = h / pt.g.matrix[(0, 0)].re;
        assert!((hg - 2.5).abs() < 1e-9);
    }

    #[test]
    fn model_c_yukawa_leading_coefficient() {
        let m = model_c();
        let r = (-2.0 * PI).exp();
        let jet = m.jet(&ray(r), 4).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let chain = third_order_chain(&frame, &dec, m.polarization(), 3.0, &tols()).unwrap();
        let y = yukawa4(&jet, &frame, &chain, m.polarization()).unwrap();
        let z = c(r, 0.0);
        let got = y.xi.at(0, 0, 0, 0) * z.powu(4);
        let expect = c(1.0 / (16.0 * PI.powi(4)), 0.0);
        assert!((got - expect).norm() < 1e-10 * expect.norm(), "{got} vs {expect}");
        assert!(y.identity_residual < 1e-8, "residual {:.3e}", y.identity_residual);
    }

    #[test]
    fn yukawa4_rejects_threefolds() {
        let m = model_a();
        let jet = m.jet(&ray(0.01), 4).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tols()).unwrap();
        let chain = third_order_chain(&frame, &dec, m.polarization(), 4.0, &tols()).unwrap();
        assert!(matches!(
            yukawa4(&jet, &frame, &chain, m.polarization()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fourfold_report_passes_on_model_c() {
        let m = model_c();
        let points: Vec<Vec<Complex64>> = (0..5)
            .map(|j| ray((-2.0 * PI).exp() * 0.5_f64.powi(j)))
            .collect();
        let rep = fourfold_report(&m, &points, &FourfoldOptions::default(), &tols()).unwrap();
        assert!(rep.pass(), "{}", rep.render_text());
    }

    #[test]
    fn quintic_third_order_chain_has_nonzero_e() {
        // On the quintic F₁₁₁₁ ≠ 0, so the H^{1,2} component E survives.
        let m = quintic();
        let pt = ph_at_point(&m, &ray(1e-5), None, &tols()).unwrap();
        let e = &pt.chain.e[0][0][0];
        let t = &pt.chain.t[0][0][0];
        assert!(vnorm(e) > 1e-6 * vnorm(t), "E unexpectedly zero on the quintic");
    }

    #[test]
    fn gauge_rescaling_leaves_ph_scalars_invariant() {
        let m = model_a();
        let r = 0.02;
        let base = ph_at_point(&m, &ray(r), Some(4.0), &tols()).unwrap();
        let jet2 = base
            .jet
            .rescaled(&[(vec![0], c(1.0, 0.0)), (vec![1], c(0.5, 0.0))])
            .unwrap();
        let pol = m.polarization();
        let dec = decomposition_at(&jet2, pol, &tols()).unwrap();
        let frame = covariant_frame(&jet2, pol, &tols()).unwrap();
        let g = wp_metric(&jet2, pol, &tols()).unwrap();
        let f = f_tensor(&frame, pol);
        let h = ph_metric(&g, &f, 4.0, &tols()).unwrap();
        let chain = third_order_chain(&frame, &dec, pol, 4.0, &tols()).unwrap();
        let rt = ph_curvature(&chain, &frame, &g, &h, &f, &dec, pol, &tols()).unwrap();
        let s1 = -base.curvature.tensor.at(0, 0, 0, 0).re / base.h.matrix[(0, 0)].re.powi(2);
        let s2 = -rt.tensor.at(0, 0, 0, 0).re / h.matrix[(0, 0)].re.powi(2);
        assert!((s1 - s2).abs() < 1e-9, "{s1} vs {s2}");
    }
}
