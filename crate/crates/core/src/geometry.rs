//! The covariant-derivative chain built from a period jet.
//!
//! Everything is derived from the single germ `S(w, w̄) = (Ω, Ω̄)` as a
//! bi-series at the base point:
//!
//! * `K_i  = -∂_i log S`
//! * `g_ij̄ = -∂_i ∂̄_j log S`
//! * `D_iΩ = ∂_iΩ + K_iΩ`
//! * `Γ^k_ij = g^{kq̄} ∂_j g_{iq̄}`
//! * `D_jD_iΩ = ∂_j D_iΩ - Γ^k_{ij} D_kΩ + K_j D_iΩ`
//!
//! Each object is kept as a series, so later holomorphic (and, where needed,
//! antiholomorphic) derivatives of the chain are exact coefficient shifts
//! rather than finite differences.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hodge::PolarizationForm;
use crate::jet::JetSection;
use crate::linalg::{c, hermitize, inverse, CMat, CVec};
use crate::series::{BiSeries, SeriesSpace, VSeries};
use crate::tol::Tolerances;

/// `(Ω, Ω̄)` as a bi-series: `S_{a,b} = (Ω_a, Ω̄_b)` over jet coefficients.
pub fn pairing_series(jet: &JetSection, pol: &PolarizationForm) -> BiSeries {
    let space = &jet.space;
    let mut s = BiSeries::zero(space);
    let n = space.len();
    for ia in 0..n {
        for ib in 0..n {
            *s.at_mut(ia, ib) = pol.sesqui(&jet.coeffs[ia], &jet.coeffs[ib]);
        }
    }
    s
}

/// Scalar, metric and covariant-derivative data at one point.
#[derive(Clone, Debug)]
pub struct CovariantFrame {
    pub vars: usize,
    pub weight: u32,
    pub dim: usize,
    pub order: usize,
    pub space: Arc<SeriesSpace>,
    /// `(Ω, Ω̄)` germ and its value.
    pub s: BiSeries,
    pub s_val: f64,
    pub log_s: BiSeries,
    /// Ω as a holomorphic vector series.
    pub omega: VSeries,
    /// `K_i = -∂_i log S`.
    pub k: Vec<BiSeries>,
    /// `g_{ij̄} = -∂_i∂̄_j log S` as series.
    pub g: Vec<Vec<BiSeries>>,
    /// Inverse-metric series `h` with `(g h) = Id` entrywise; the convention
    /// index `g^{kq̄}` is `g_inv_series[q][k]`.
    pub g_inv_series: Vec<Vec<BiSeries>>,
    pub g_val: CMat,
    pub g_inv_val: CMat,
    /// `Γ^k_{ij}` series, indexed `gamma[k][i][j]`.
    pub gamma: Vec<Vec<Vec<BiSeries>>>,
    /// `D_iΩ` series.
    pub d_omega: Vec<VSeries>,
    /// `D_jD_iΩ` series, indexed `dd_omega[j][i]`.
    pub dd_omega: Vec<Vec<VSeries>>,
}

impl CovariantFrame {
    /// Builds the chain; requires jet order ≥ 2.
    pub fn build(jet: &JetSection, pol: &PolarizationForm, tol: &Tolerances) -> Result<Self> {
        jet.require_order(2, "covariant frame")?;
        if jet.dim != pol.dim {
            return Err(Error::DimensionMismatch(
                "jet dimension does not match polarization".into(),
            ));
        }
        let m = jet.vars();
        let space = jet.space.clone();

        let s = pairing_series(jet, pol);
        let s0 = s.val();
        if !(s0.re > 0.0) || s0.im.abs() > tol.residual * s0.re.abs().max(1e-300) {
            return Err(Error::Positivity(format!(
                "(Ω, Ω̄) = {s0} is not positive at the base point (first Hodge-Riemann failure)"
            )));
        }
        let log_s = s.ln()?;

        let omega = jet.as_series();
        let k: Vec<BiSeries> = (0..m).map(|i| log_s.dh(i).neg()).collect();
        let g: Vec<Vec<BiSeries>> = (0..m)
            .map(|i| (0..m).map(|j| log_s.dh(i).da(j).neg()).collect())
            .collect();

        let mut g_raw = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g_raw[(i, j)] = g[i][j].val();
            }
        }
        let (g_val, herm_resid) = hermitize(&g_raw);
        if herm_resid > tol.residual.max(1e-10) {
            return Err(Error::Degeneracy(format!(
                "metric value not Hermitian (residual {herm_resid:.3e})"
            )));
        }
        let g_inv_val = inverse(&g_val, tol.max_condition()).map_err(|_| {
            Error::Degeneracy("Weil-Petersson metric is numerically singular".into())
        })?;

        let g_inv_series = invert_matrix_series(&g, &g_inv_val, &space);

        // Γ^k_{ij} = g^{kq̄} ∂g_{iq̄}/∂z_j with g^{kq̄} = inv[q][k].
        let mut gamma = vec![vec![vec![BiSeries::zero(&space); m]; m]; m];
        for kk in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut acc = BiSeries::zero(&space);
                    for q in 0..m {
                        acc = acc.add(&g_inv_series[q][kk].mul(&g[i][q].dh(j)));
                    }
                    gamma[kk][i][j] = acc;
                }
            }
        }

        let d_omega: Vec<VSeries> = (0..m)
            .map(|i| omega.dh(i).add(&omega.scale_series(&k[i])))
            .collect();

        let mut dd_omega = vec![vec![VSeries::zero(&space, jet.dim); m]; m];
        for j in 0..m {
            for i in 0..m {
                let mut v = d_omega[i].dh(j).add(&d_omega[i].scale_series(&k[j]));
                for kk in 0..m {
                    v = v.sub(&d_omega[kk].scale_series(&gamma[kk][i][j]));
                }
                dd_omega[j][i] = v;
            }
        }

        Ok(CovariantFrame {
            vars: m,
            weight: pol.weight,
            dim: jet.dim,
            order: jet.order,
            space,
            s,
            s_val: s0.re,
            log_s,
            omega,
            k,
            g,
            g_inv_series,
            g_val,
            g_inv_val,
            gamma,
            d_omega,
            dd_omega,
        })
    }

    /// Inverse-metric entry with the index convention `g^{kq̄}`.
    pub fn g_upper(&self, k: usize, q: usize) -> Complex64 {
        self.g_inv_val[(q, k)]
    }

    pub fn k_val(&self, i: usize) -> Complex64 {
        self.k[i].val()
    }

    pub fn gamma_val(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.gamma[k][i][j].val()
    }

    pub fn d_omega_val(&self, i: usize) -> CVec {
        self.d_omega[i].val()
    }

    pub fn dd_omega_val(&self, j: usize, i: usize) -> CVec {
        self.dd_omega[j][i].val()
    }

    /// Residuals of the defining orthogonality and symmetry identities:
    /// `(D_iΩ, Ω̄) = 0`, `(D_jD_iΩ, Ω̄) = 0`, `(D_jD_iΩ, conj D_lΩ) = 0`,
    /// `D_jD_iΩ = D_iD_jΩ`.  All relative.
    pub fn identity_residuals(&self, pol: &PolarizationForm) -> FrameResiduals {
        let omega0 = self.omega.val();
        let s0 = self.s_val;
        let mut first_orth = 0.0_f64;
        let mut second_orth = 0.0_f64;
        let mut second_orth_d = 0.0_f64;
        let mut symmetry = 0.0_f64;
        for i in 0..self.vars {
            let di = self.d_omega_val(i);
            let sc = (crate::linalg::vnorm(&di) * crate::linalg::vnorm(&omega0)).max(1e-300);
            first_orth = first_orth.max(pol.sesqui(&di, &omega0).norm() / sc);
            let _ = s0;
            for j in 0..self.vars {
                let dd = self.dd_omega_val(j, i);
                let ddn = crate::linalg::vnorm(&dd).max(1e-300);
                second_orth = second_orth
                    .max(pol.sesqui(&dd, &omega0).norm() / (ddn * crate::linalg::vnorm(&omega0)).max(1e-300));
                for l in 0..self.vars {
                    let dl = self.d_omega_val(l);
                    second_orth_d = second_orth_d.max(
                        pol.sesqui(&dd, &dl).norm()
                            / (ddn * crate::linalg::vnorm(&dl)).max(1e-300),
                    );
                }
                let dd_t = self.dd_omega_val(i, j);
                symmetry = symmetry
                    .max(crate::linalg::vnorm(&(&dd - &dd_t)) / ddn.max(1e-300));
            }
        }
        FrameResiduals {
            first_orth,
            second_orth,
            second_orth_d,
            symmetry,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FrameResiduals {
    /// `(D_iΩ, Ω̄) = 0`
    pub first_orth: f64,
    /// `(D_jD_iΩ, Ω̄) = 0`
    pub second_orth: f64,
    /// `(D_jD_iΩ, conj D_lΩ) = 0`
    pub second_orth_d: f64,
    /// `D_jD_iΩ = D_iD_jΩ`
    pub symmetry: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        self.first_orth
            .max(self.second_orth)
            .max(self.second_orth_d)
            .max(self.symmetry)
    }
}

/// Inverse of a matrix of series by the Neumann expansion around the
/// constant term: `G = G0 (I + U)` with `U` carrying no constant term, so
/// `G^{-1} = (Σ (-U)^j) G0^{-1}`.
fn invert_matrix_series(
    g: &[Vec<BiSeries>],
    g0_inv: &CMat,
    space: &Arc<SeriesSpace>,
) -> Vec<Vec<BiSeries>> {
    let m = g.len();
    // U = G0^{-1} (G - G0)
    let mut u = vec![vec![BiSeries::zero(space); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = BiSeries::zero(space);
            for l in 0..m {
                let mut centered = g[l][j].clone();
                centered.coef[0] = c(0.0, 0.0);
                acc = acc.add(&centered.scale(g0_inv[(i, l)]));
            }
            u[i][j] = acc;
        }
    }
    // acc = Σ_{j=0}^{2·order} (-U)^j
    let mut acc = identity_series(m, space);
    let mut pow = identity_series(m, space);
    for _ in 0..2 * space.order {
        pow = mat_mul_series(&neg_mat(&u), &pow);
        acc = mat_add(&acc, &pow);
    }
    // result = acc * G0^{-1}
    let mut out = vec![vec![BiSeries::zero(space); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut entry = BiSeries::zero(space);
            for l in 0..m {
                entry = entry.add(&acc[i][l].scale(g0_inv[(l, j)]));
            }
            out[i][j] = entry;
        }
    }
    out
}

fn identity_series(m: usize, space: &Arc<SeriesSpace>) -> Vec<Vec<BiSeries>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        BiSeries::constant(space, c(1.0, 0.0))
                    } else {
                        BiSeries::zero(space)
                    }
                })
                .collect()
        })
        .collect()
}

fn neg_mat(a: &[Vec<BiSeries>]) -> Vec<Vec<BiSeries>> {
    a.iter().map(|row| row.iter().map(|x| x.neg()).collect()).collect()
}

fn mat_add(a: &[Vec<BiSeries>], b: &[Vec<BiSeries>]) -> Vec<Vec<BiSeries>> {
    a.iter()
        .zip(b.iter())
        .map(|(ra, rb)| ra.iter().zip(rb.iter()).map(|(x, y)| x.add(y)).collect())
        .collect()
}

fn mat_mul_series(a: &[Vec<BiSeries>], b: &[Vec<BiSeries>]) -> Vec<Vec<BiSeries>> {
    let m = a.len();
    let space = &a[0][0].space;
    let mut out = vec![vec![BiSeries::zero(space); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = BiSeries::zero(space);
            for l in 0..m {
                acc = acc.add(&a[i][l].mul(&b[l][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::presets::model_a;
    use std::f64::consts::PI;

    #[test]
    fn frame_identities_hold_on_the_shift_orbit() {
        let m = model_a();
        let jet = m.jet(&[c((-2.0 * PI).exp(), 0.0)], 3).unwrap();
        let frame = CovariantFrame::build(&jet, m.polarization(), &Tolerances::default()).unwrap();
        let res = frame.identity_residuals(m.polarization());
        assert!(res.max() < 1e-10, "residuals {res:?}");
    }

    #[test]
    fn inverse_metric_series_inverts_pointwise() {
        let m = model_a();
        let jet = m.jet(&[c(0.05, 0.02)], 3).unwrap();
        let frame = CovariantFrame::build(&jet, m.polarization(), &Tolerances::default()).unwrap();
        // derivative consistency: ∂(g · g^{-1}) = 0 at the point, entrywise
        let prod_deriv = frame.g[0][0]
            .mul(&frame.g_inv_series[0][0])
            .dh(0)
            .val();
        assert!(prod_deriv.norm() < 1e-9 * frame.g_val[(0, 0)].norm());
    }
}
