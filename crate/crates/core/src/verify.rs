//! Independent finite-difference oracles and the consolidated identity suite.
//!
//! The oracles never reuse the jet/series evaluation path: they re-evaluate
//! the model (or a supplied metric closure) on real-coordinate stencils and
//! assemble `∂_k`, `∂̄_l` and `∂_k ∂̄_l` from central differences with one
//! Richardson extrapolation step.  The suite runs every covariant identity
//! with its residual and tolerance, plus fault-injected variants that must
//! fail (so the checks are known to be falsifiable).

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hodge::PolarizationForm;
use crate::linalg::{c, fnorm, vnorm, CMat, CVec};
use crate::models::{decomposition_at, Model};
use crate::report::SuiteReport;
use crate::tol::Tolerances;
use crate::wp::{covariant_frame, f_tensor, wp_metric, CurvatureField, Tensor4, CURVATURE_CONVENTION};

/// Finite-difference configuration.
#[derive(Clone, Debug)]
pub struct FdConfig {
    /// Base step, relative to |z| (absolute floor 1e-7).
    pub base_step_rel: f64,
    /// Richardson levels: 1 = plain central differences, 2 = one
    /// extrapolation step (default).
    pub richardson: usize,
    /// Per-check tolerance table (name → relative tolerance).
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for FdConfig {
    fn default() -> Self {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("fd metric".into(), 1e-5);
        tolerances.insert("fd curvature".into(), 1e-4);
        tolerances.insert("fd gencurv".into(), 1e-3);
        tolerances.insert("fd dbar".into(), 1e-4);
        FdConfig {
            base_step_rel: 1e-4,
            richardson: 2,
            tolerances,
        }
    }
}

impl FdConfig {
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(1e-4)
    }

    fn step(&self, z: &[Complex64]) -> f64 {
        let scale = z.iter().map(|x| x.norm()).fold(0.0, f64::max);
        (self.base_step_rel * scale).max(1e-7 * self.base_step_rel / 1e-4)
    }
}

/// A complex-valued function of the point, evaluated on stencils.
type ScalarFn<'a> = dyn Fn(&[Complex64]) -> Result<Complex64> + 'a;

fn displaced(z: &[Complex64], coord: usize, re: f64, im: f64) -> Vec<Complex64> {
    let mut out = z.to_vec();
    out[coord] += c(re, im);
    out
}

/// Central-difference `∂/∂x` or `∂/∂y` with one optional Richardson step.
fn fd_real_deriv(
    f: &ScalarFn,
    z: &[Complex64],
    coord: usize,
    imag_axis: bool,
    h: f64,
    richardson: usize,
) -> Result<Complex64> {
    let diff = |h: f64| -> Result<Complex64> {
        let (re, im) = if imag_axis { (0.0, h) } else { (h, 0.0) };
        let fp = f(&displaced(z, coord, re, im))?;
        let fm = f(&displaced(z, coord, -re, -im))?;
        Ok((fp - fm) / c(2.0 * h, 0.0))
    };
    if richardson >= 2 {
        let d1 = diff(h)?;
        let d2 = diff(h / 2.0)?;
        Ok((d2.scale(4.0) - d1).unscale(3.0))
    } else {
        diff(h)
    }
}

/// Mixed real second derivative ∂²f/∂a∂b over the 2m real coordinates.
fn fd_real_second(
    f: &ScalarFn,
    z: &[Complex64],
    a: (usize, bool),
    b: (usize, bool),
    h: f64,
    richardson: usize,
) -> Result<Complex64> {
    let shift = |z: &[Complex64], axis: (usize, bool), s: f64| -> Vec<Complex64> {
        if axis.1 {
            displaced(z, axis.0, 0.0, s)
        } else {
            displaced(z, axis.0, s, 0.0)
        }
    };
    let diff = |h: f64| -> Result<Complex64> {
        if a == b {
            let fp = f(&shift(z, a, h))?;
            let f0 = f(z)?;
            let fm = f(&shift(z, a, -h))?;
            Ok((fp - f0.scale(2.0) + fm) / c(h * h, 0.0))
        } else {
            let pp = f(&shift(&shift(z, a, h), b, h))?;
            let pm = f(&shift(&shift(z, a, h), b, -h))?;
            let mp = f(&shift(&shift(z, a, -h), b, h))?;
            let mm = f(&shift(&shift(z, a, -h), b, -h))?;
            Ok((pp + mm - pm - mp) / c(4.0 * h * h, 0.0))
        }
    };
    if richardson >= 2 {
        let d1 = diff(h)?;
        let d2 = diff(h / 2.0)?;
        Ok((d2.scale(4.0) - d1).unscale(3.0))
    } else {
        diff(h)
    }
}

/// `∂_k f` by differences: `(∂_x - i ∂_y)/2`.
pub fn fd_holomorphic_deriv(
    f: &ScalarFn,
    z: &[Complex64],
    k: usize,
    cfg: &FdConfig,
) -> Result<Complex64> {
    let h = cfg.step(z);
    let dx = fd_real_deriv(f, z, k, false, h, cfg.richardson)?;
    let dy = fd_real_deriv(f, z, k, true, h, cfg.richardson)?;
    Ok((dx - c(0.0, 1.0) * dy).unscale(2.0))
}

/// `∂̄_l f` by differences: `(∂_x + i ∂_y)/2`.
pub fn fd_antiholomorphic_deriv(
    f: &ScalarFn,
    z: &[Complex64],
    l: usize,
    cfg: &FdConfig,
) -> Result<Complex64> {
    let h = cfg.step(z);
    let dx = fd_real_deriv(f, z, l, false, h, cfg.richardson)?;
    let dy = fd_real_deriv(f, z, l, true, h, cfg.richardson)?;
    Ok((dx + c(0.0, 1.0) * dy).unscale(2.0))
}

/// `∂_k ∂̄_l f` by differences:
/// `¼(∂x_k∂x_l + ∂y_k∂y_l) + (i/4)(∂x_k∂y_l - ∂y_k∂x_l)`.
pub fn fd_mixed_second(
    f: &ScalarFn,
    z: &[Complex64],
    k: usize,
    l: usize,
    cfg: &FdConfig,
) -> Result<Complex64> {
    let h = cfg.step(z);
    let rr = fd_real_second(f, z, (k, false), (l, false), h, cfg.richardson)?;
    let ii = fd_real_second(f, z, (k, true), (l, true), h, cfg.richardson)?;
    let ri = fd_real_second(f, z, (k, false), (l, true), h, cfg.richardson)?;
    let ir = fd_real_second(f, z, (k, true), (l, false), h, cfg.richardson)?;
    Ok((rr + ii).unscale(4.0) + c(0.0, 0.25) * (ri - ir))
}

/// FD oracle for the Weil-Petersson metric: mixed second differences of
/// `-log (Ω, Ω̄)`, evaluating the model directly at stencil points.
pub fn fd_metric_from_potential(
    model: &Model,
    z: &[Complex64],
    cfg: &FdConfig,
) -> Result<CMat> {
    let pol = model.polarization().clone();
    let potential = move |p: &[Complex64]| -> Result<Complex64> {
        let jet = model.jet(p, 0)?;
        let s = pol.sesqui(&jet.coeffs[0], &jet.coeffs[0]);
        if s.re <= 0.0 {
            return Err(Error::Positivity(format!("(Ω, Ω̄) = {s} not positive on stencil")));
        }
        Ok(c(s.re.ln(), 0.0))
    };
    let m = model.vars();
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = -fd_mixed_second(&potential, z, i, j, cfg)?;
        }
    }
    Ok(g)
}

/// FD oracle for the curvature of any Hermitian metric supplied as a pointwise
/// evaluator: `R_{ij̄kl̄} = ∂²g_{ij̄}/∂z_k∂z̄_l - g^{pq̄} ∂g_{iq̄}/∂z_k ∂g_{pj̄}/∂z̄_l`.
pub fn fd_curvature(
    metric: &dyn Fn(&[Complex64]) -> Result<CMat>,
    z: &[Complex64],
    cfg: &FdConfig,
    tol: &Tolerances,
) -> Result<CurvatureField> {
    let g0 = metric(z)?;
    let m = g0.nrows();
    let ginv = crate::linalg::inverse(&g0, tol.max_condition())?;
    let gup = |p: usize, q: usize| ginv[(q, p)];

    let entry = |i: usize, j: usize| {
        move |p: &[Complex64]| -> Result<Complex64> { Ok(metric(p)?[(i, j)]) }
    };
    // first derivatives ∂g_{ij̄}/∂z_k and ∂g_{ij̄}/∂z̄_l
    let mut dg = vec![vec![vec![c(0.0, 0.0); m]; m]; m]; // [k][i][j]
    let mut dgbar = vec![vec![vec![c(0.0, 0.0); m]; m]; m]; // [l][i][j]
    for i in 0..m {
        for j in 0..m {
            let f = entry(i, j);
            for k in 0..m {
                dg[k][i][j] = fd_holomorphic_deriv(&f, z, k, cfg)?;
                dgbar[k][i][j] = fd_antiholomorphic_deriv(&f, z, k, cfg)?;
            }
        }
    }
    let mut r = Tensor4::zeros(m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let f = entry(i, j);
                    let second = fd_mixed_second(&f, z, k, l, cfg)?;
                    let mut corr = c(0.0, 0.0);
                    for p in 0..m {
                        for q in 0..m {
                            corr += gup(p, q) * dg[k][i][q] * dgbar[l][p][j];
                        }
                    }
                    r.set(i, j, k, l, second - corr);
                }
            }
        }
    }
    Ok(CurvatureField::new(z.to_vec(), r))
}

/// Relative disagreement between two rank-4 tensors.
pub fn tensor_rel_diff(a: &Tensor4, b: &Tensor4) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    let mut worst = 0.0_f64;
    for (x, y) in a.data.iter().zip(b.data.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst / scale
}

/// Faults that the suite injects to prove the checks can fail.
#[derive(Clone, Copy, Debug)]
enum Fault {
    None,
    /// One sign of the polarization matrix flipped.
    FlipQSign,
    /// Christoffel term dropped from the second covariant derivative.
    DropGammaTerm,
}

/// The consolidated identity suite at the given points.
///
/// Closed-form residuals at `tol.residual`; z̄-difference checks at the FD
/// tolerance.  Includes fault-injected variants that must fail.
pub fn lemma_suite(
    model: &Model,
    points: &[Vec<Complex64>],
    cfg: &FdConfig,
    tol: &Tolerances,
) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("covariant identity suite").with_convention(CURVATURE_CONVENTION);
    let pol = model.polarization().clone();
    let n = pol.weight;

    let mut first_orth = 0.0_f64;
    let mut defwp_resid = 0.0_f64;
    let mut second_orth = 0.0_f64;
    let mut second_orth_d = 0.0_f64;
    let mut dd_sym = 0.0_f64;
    let mut t_block = 0.0_f64;
    let mut dbar_k = 0.0_f64;
    let mut dbar_domega = 0.0_f64;
    let mut h3rd = 0.0_f64;
    let mut yuka_resid = 0.0_f64;

    for z in points {
        let jet = model.jet(z, if n == 4 { 4 } else { 3 })?;
        let dec = decomposition_at(&jet, &pol, tol)?;
        let frame = covariant_frame(&jet, &pol, tol)?;
        let res = frame.identity_residuals(&pol);
        first_orth = first_orth.max(res.first_orth);
        second_orth = second_orth.max(res.second_orth);
        second_orth_d = second_orth_d.max(res.second_orth_d);
        dd_sym = dd_sym.max(res.symmetry);

        // defwp route vs covariant route is exercised inside wp_metric.
        let g = wp_metric(&jet, &pol, tol)?;
        let m = g.dim();
        let s0 = frame.s_val;
        let mut alt = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                alt[(i, j)] = -pol.sesqui(&frame.d_omega_val(i), &frame.d_omega_val(j)) / s0;
            }
        }
        defwp_resid =
            defwp_resid.max(fnorm(&(&g.matrix - &alt)) / fnorm(&g.matrix).max(1e-300));

        // third-order block structure (weight ≥ 3)
        let mu = crate::partial::default_mu(n, m);
        let chain = crate::partial::third_order_chain(&frame, &dec, &pol, mu, tol)?;
        t_block = t_block.max(crate::partial::chain_residuals(&chain, &dec, &pol, tol)?);

        if n == 4 {
            let y = crate::partial::yukawa4(&jet, &frame, &chain, &pol)?;
            yuka_resid = yuka_resid.max(y.identity_residual);
        }

        // ∂̄_j K_i = g_{ij̄} by z̄-differencing of K_i
        for i in 0..m {
            for j in 0..m {
                let pol_c = pol.clone();
                let ki = move |p: &[Complex64]| -> Result<Complex64> {
                    let jet = model.jet(p, 1)?;
                    let s = pol_c.sesqui(&jet.coeffs[0], &jet.coeffs[0]);
                    let mut e = vec![0u32; p.len()];
                    e[i] = 1;
                    let di = jet.derivative(&e)?;
                    Ok(-pol_c.sesqui(&di, &jet.coeffs[0]) / s)
                };
                let fd = fd_antiholomorphic_deriv(&ki, z, j, cfg)?;
                dbar_k = dbar_k
                    .max((fd - g.matrix[(i, j)]).norm() / fnorm(&g.matrix).max(1e-300));
            }
        }

        // ∂̄_j D_iΩ = g_{ij̄} Ω by z̄-differencing, componentwise
        for i in 0..m {
            for j in 0..m {
                let mut worst_comp = 0.0_f64;
                let scale = vnorm(&frame.d_omega_val(i)).max(1e-300);
                for comp in 0..jet.dim {
                    let pol_c = pol.clone();
                    let f = move |p: &[Complex64]| -> Result<Complex64> {
                        let jet = model.jet(p, 1)?;
                        let s = pol_c.sesqui(&jet.coeffs[0], &jet.coeffs[0]);
                        let mut e = vec![0u32; p.len()];
                        e[i] = 1;
                        let di = jet.derivative(&e)?;
                        let ki = -pol_c.sesqui(&di, &jet.coeffs[0]) / s;
                        Ok(di[comp] + ki * jet.coeffs[0][comp])
                    };
                    let fd = fd_antiholomorphic_deriv(&f, z, j, cfg)?;
                    let expect = g.matrix[(i, j)] * jet.coeffs[0][comp];
                    worst_comp = worst_comp.max((fd - expect).norm());
                }
                dbar_domega = dbar_domega.max(worst_comp / scale);
            }
        }

        // ∂̄_l (D_αD_iΩ) = F_{iτ̄αl̄} g^{γτ̄} D_γΩ by z̄-differencing
        let f_t = f_tensor(&frame, &pol);
        let ginv = g.inverse(tol)?;
        for alpha in 0..m {
            for i in 0..m {
                for l in 0..m {
                    let mut expect = CVec::zeros(jet.dim);
                    for gam in 0..m {
                        for tau in 0..m {
                            let coef = f_t.at(i, tau, alpha, l) * g.upper(&ginv, gam, tau);
                            expect += frame.d_omega_val(gam).map(|x| x * coef);
                        }
                    }
                    let mut worst_comp = 0.0_f64;
                    for comp in 0..jet.dim {
                        let pol_c = pol.clone();
                        let tol_c = *tol;
                        let f = move |p: &[Complex64]| -> Result<Complex64> {
                            let jet = model.jet(p, 2)?;
                            let fr = crate::geometry::CovariantFrame::build(&jet, &pol_c, &tol_c)?;
                            Ok(fr.dd_omega_val(alpha, i)[comp])
                        };
                        let fd = fd_antiholomorphic_deriv(&f, z, l, cfg)?;
                        worst_comp = worst_comp.max((fd - expect[comp]).norm());
                    }
                    h3rd = h3rd.max(worst_comp / vnorm(&expect).max(1e-300));
                }
            }
        }
    }

    rep.check_residual(
        "first-derivative orthogonality",
        "(D_iΩ, Ω̄) = 0",
        first_orth,
        tol.residual,
    );
    rep.check_residual(
        "metric route agreement",
        "-∂∂̄ log S matches -(D_iΩ, conj D_jΩ)/S",
        defwp_resid,
        1e-10,
    );
    rep.check_residual(
        "second-derivative orthogonality",
        "(D_jD_iΩ, Ω̄) = 0",
        second_orth,
        tol.residual,
    );
    rep.check_residual(
        "second-derivative orthogonality vs D",
        "(D_jD_iΩ, conj D_lΩ) = 0",
        second_orth_d,
        tol.residual,
    );
    rep.check_residual(
        "covariant symmetry",
        "D_jD_iΩ = D_iD_jΩ",
        dd_sym,
        tol.residual,
    );
    rep.check_residual(
        "third-order block structure",
        "T = E + DDD with vanishing projections to H^{n,0}, H^{n-1,1}",
        t_block,
        tol.residual,
    );
    if n == 4 {
        rep.check_residual(
            "fourfold Yukawa identities",
            "ξ = (Ω, ∂⁴Ω) = (D_kD_lΩ, D_jD_iΩ) = -(D_jD_kD_lΩ, D_iΩ)",
            yuka_resid,
            tol.residual,
        );
    }
    rep.check_residual(
        "potential second derivative",
        "∂̄_j K_i = g_{ij̄} (z̄-differencing)",
        dbar_k,
        cfg.tolerance("fd dbar"),
    );
    rep.check_residual(
        "antiholomorphic derivative of DΩ",
        "∂̄_j D_iΩ = g_{ij̄} Ω (z̄-differencing)",
        dbar_domega,
        cfg.tolerance("fd dbar"),
    );
    rep.check_residual(
        "antiholomorphic derivative of DDΩ",
        "∂̄_l D_αD_iΩ = F_{iτ̄αl̄} g^{γτ̄} D_γΩ (z̄-differencing)",
        h3rd,
        cfg.tolerance("fd dbar"),
    );

    // Fault injection: the corrupted runs must FAIL their checks.
    let z0 = &points[0];
    let flip = faulted_first_orth(model, z0, Fault::FlipQSign, tol)?;
    rep.check_at_least(
        "fault detection: flipped Q sign",
        "corrupting one sign of Q must break (D_iΩ, Ω̄) = 0 by O(1)",
        flip,
        1e-3,
    );
    let dropped = faulted_second_orth(model, z0, Fault::DropGammaTerm, tol)?;
    rep.check_at_least(
        "fault detection: dropped Christoffel term",
        "omitting Γ from D_jD_iΩ must break (D_jD_iΩ, conj D_lΩ) = 0",
        dropped,
        1e-3,
    );
    let _ = Fault::None;
    Ok(rep)
}

/// Residual of `(D_iΩ, Ω̄) = 0` recomputed with a corrupted polarization.
fn faulted_first_orth(
    model: &Model,
    z: &[Complex64],
    fault: Fault,
    _tol: &Tolerances,
) -> Result<f64> {
    let mut q = model.polarization().q.clone();
    if matches!(fault, Fault::FlipQSign) {
        // flip the first nonzero entry
        let mut done = false;
        for i in 0..q.nrows() {
            for j in 0..q.ncols() {
                if !done && q[(i, j)].norm() > 0.0 {
                    q[(i, j)] = -q[(i, j)];
                    done = true;
                }
            }
        }
    }
    let bad_pol = PolarizationForm::new(model.polarization().weight, q)?;
    let jet = model.jet(z, 1)?;
    let s = bad_pol.sesqui(&jet.coeffs[0], &jet.coeffs[0]);
    let mut e = vec![0u32; z.len()];
    e[0] = 1;
    let di = jet.derivative(&e)?;
    let ki = -bad_pol.sesqui(&di, &jet.coeffs[0]) / s;
    let d_om = &di + jet.coeffs[0].map(|x| x * ki);
    // plot the residual against the healthy pairing
    let healthy = model.polarization();
    Ok(healthy.sesqui(&d_om, &jet.coeffs[0]).norm()
        / (vnorm(&d_om) * vnorm(&jet.coeffs[0])).max(1e-300))
}

/// Residual of `(D_jD_iΩ, conj D_lΩ) = 0` with the Christoffel term dropped.
fn faulted_second_orth(
    model: &Model,
    z: &[Complex64],
    fault: Fault,
    tol: &Tolerances,
) -> Result<f64> {
    let pol = model.polarization();
    let jet = model.jet(z, 2)?;
    let frame = crate::geometry::CovariantFrame::build(&jet, pol, tol)?;
    let mut worst = 0.0_f64;
    for j in 0..frame.vars {
        for i in 0..frame.vars {
            // A_{ji} = ∂_j D_iΩ + K_j D_iΩ; the healthy D_jD_iΩ subtracts Γ.
            let mut v = frame.d_omega[i].dh(j).val();
            v += frame.d_omega_val(i).map(|x| x * frame.k_val(j));
            if !matches!(fault, Fault::DropGammaTerm) {
                for k in 0..frame.vars {
                    v -= frame.d_omega_val(k).map(|x| x * frame.gamma_val(k, i, j));
                }
            }
            for l in 0..frame.vars {
                let dl = frame.d_omega_val(l);
                worst = worst
                    .max(pol.sesqui(&v, &dl).norm() / (vnorm(&v) * vnorm(&dl)).max(1e-300));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::presets::{model_a, model_c, quintic};
    use crate::wp::wp_curvature;
    use std::f64::consts::PI;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn ray(r: f64) -> Vec<Complex64> {
        vec![c(r, 0.0)]
    }

    #[test]
    fn fd_metric_matches_closed_form_on_model_a() {
        let m = model_a();
        let z = ray((-2.0 * PI).exp());
        let cfg = FdConfig::default();
        let fd = fd_metric_from_potential(&m, &z, &cfg).unwrap();
        let jet = m.jet(&z, 1).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let rel = (fd[(0, 0)] - g.matrix[(0, 0)]).norm() / g.matrix[(0, 0)].norm();
        assert!(rel < 1e-6, "fd vs exact relative error {rel:.3e}");
    }

    #[test]
    fn fd_metric_zero_for_constant_potential() {
        // synthetic: potential from a constant section of a weight-2 model
        use std::collections::BTreeMap;
        let d = 3;
        let mut q = CMat::zeros(d, d);
        q[(0, 2)] = c(1.0, 0.0);
        q[(1, 1)] = c(-1.0, 0.0);
        q[(2, 0)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(2, q).unwrap();
        let mut a = BTreeMap::new();
        let mut a0 = CVec::zeros(d);
        a0[1] = c(1.0, 0.0); // (e1, ē1) = 1 under this pairing
        a.insert(vec![0u32], a0);
        let m = Model::Orbit(
            crate::models::NilpotentOrbitModel::new(2, vec![CMat::zeros(d, d)], a, pol).unwrap(),
        );
        let fd = fd_metric_from_potential(&m, &ray(0.3), &FdConfig::default()).unwrap();
        assert!(fnorm(&fd) < 1e-8);
    }

    #[test]
    fn fd_metric_matches_quintic() {
        let m = quintic();
        let z = ray(1e-5);
        let fd = fd_metric_from_potential(&m, &z, &FdConfig::default()).unwrap();
        let jet = m.jet(&z, 1).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let rel = (fd[(0, 0)] - g.matrix[(0, 0)]).norm() / g.matrix[(0, 0)].norm();
        assert!(rel < 1e-5, "fd vs exact relative error {rel:.3e}");
    }

    #[test]
    fn fd_curvature_matches_strominger_on_model_a() {
        let m = model_a();
        let z = ray((-2.0 * PI).exp());
        let cfg = FdConfig::default();
        let tol = tols();
        let metric = |p: &[Complex64]| -> Result<CMat> {
            let jet = m.jet(p, 1)?;
            Ok(wp_metric(&jet, m.polarization(), &tol)?.matrix)
        };
        let fd = fd_curvature(&metric, &z, &cfg, &tol).unwrap();
        let jet = m.jet(&z, 2).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tol).unwrap();
        let frame = covariant_frame(&jet, m.polarization(), &tol).unwrap();
        let exact = wp_curvature(&frame, &g, m.polarization());
        let rel = tensor_rel_diff(&fd.tensor, &exact.tensor);
        assert!(rel < 1e-4, "fd vs Strominger relative error {rel:.3e}");
        let gv = g.matrix[(0, 0)].re;
        let ratio = fd.tensor.at(0, 0, 0, 0).re / (gv * gv);
        assert!((ratio - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn fd_curvature_zero_for_flat_metric() {
        let metric =
            |_p: &[Complex64]| -> Result<CMat> { Ok(CMat::identity(1, 1).scale(2.0)) };
        let fd = fd_curvature(&metric, &ray(0.5), &FdConfig::default(), &tols()).unwrap();
        assert!(fd.tensor.max_abs() < 1e-10);
    }

    #[test]
    fn fd_partial_hodge_scalar_on_model_a() {
        let m = model_a();
        let z = ray((-2.0 * PI).exp());
        let cfg = FdConfig::default();
        let tol = tols();
        let metric = |p: &[Complex64]| -> Result<CMat> {
            let pt = crate::partial::ph_at_point(&m, p, Some(4.0), &tol)?;
            Ok(pt.h.matrix)
        };
        let fd = fd_curvature(&metric, &z, &cfg, &tol).unwrap();
        let pt = crate::partial::ph_at_point(&m, &z, Some(4.0), &tol).unwrap();
        let h = pt.h.matrix[(0, 0)].re;
        let ratio = -fd.tensor.at(0, 0, 0, 0).re / (h * h);
        assert!((ratio + 0.2).abs() < 1e-4, "-h^-2 R̃ = {ratio}");
    }

    #[test]
    fn richardson_improves_single_step_by_10x() {
        let m = model_a();
        let z = ray((-2.0 * PI).exp());
        let jet = m.jet(&z, 1).unwrap();
        let g = wp_metric(&jet, m.polarization(), &tols()).unwrap();
        let exact = g.matrix[(0, 0)];
        let mut plain = FdConfig::default();
        plain.richardson = 1;
        plain.base_step_rel = 1e-3;
        let mut rich = plain.clone();
        rich.richardson = 2;
        let e_plain =
            (fd_metric_from_potential(&m, &z, &plain).unwrap()[(0, 0)] - exact).norm();
        let e_rich = (fd_metric_from_potential(&m, &z, &rich).unwrap()[(0, 0)] - exact).norm();
        assert!(
            e_rich * 10.0 <= e_plain,
            "richardson {e_rich:.3e} vs plain {e_plain:.3e}"
        );
    }

    #[test]
    fn lemma_suite_passes_on_model_a_and_c() {
        let cfg = FdConfig::default();
        for (model, pts) in [
            (model_a(), vec![ray((-2.0 * PI).exp()), ray(0.01)]),
            (model_c(), vec![ray((-2.0 * PI).exp())]),
        ] {
            let rep = lemma_suite(&model, &pts, &cfg, &tols()).unwrap();
            assert!(rep.pass(), "{}", rep.render_text());
        }
    }

    #[test]
    fn suite_report_serializes_with_schema_fields() {
        let rep = lemma_suite(&model_a(), &[ray(0.01)], &FdConfig::default(), &tols()).unwrap();
        let json = rep.to_json();
        for key in ["\"name\"", "\"identity\"", "\"value\"", "\"tolerance\"", "\"pass\""] {
            assert!(json.contains(key), "missing {key} in suite JSON");
        }
    }
}
