//! Model families that produce period jets, and the Hodge decomposition
//! built from them.
//!
//! Two families are supported:
//!
//! * **Nilpotent orbits** `Ω(z) = exp((√-1/2π) Σ N_i log(1/z_i)) A(z)` with
//!   commuting nilpotent `N_i` and a finite vector-valued power series `A`.
//!   Jets are exact analytic derivatives: `ζ_i = (√-1/2π) log(1/z_i)` is
//!   differentiated in closed form and combined with the polynomial-in-ζ,
//!   power-series-in-z structure.
//! * **One-parameter Picard-Fuchs operators** `Σ_j c_j(z) θ^j`, `θ = z d/dz`,
//!   normalized at a maximal-unipotent point (indicial polynomial `∝ θ^d`).
//!   The period vector is the column of Frobenius solutions; the flat
//!   polarization is recovered from the vanishing conditions
//!   `Q(Ω, ∂^k Ω) ≡ 0`, `k < n`, imposed on series coefficients.
//!
//! `decomposition_at` realizes the filtration `F^p = span{∂^a Ω : |a| ≤ n-p}`
//! and splits it into `(p,q)` blocks using the first Hodge-Riemann relation;
//! blocks below the middle come from conjugation.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodge::{HodgeBlock, HodgeDecompositionAt, PolarizationForm};
use crate::jet::{JetSection, MAX_JET_ORDER};
use crate::linalg::{
    c, conj_vec, fnorm, mat_from_columns, max_abs, nullspace, vnorm, CMat, CVec,
};
use crate::report::ValidationReport;
use crate::series::{BiSeries, SeriesSpace, VSeries};
use crate::tol::Tolerances;

/// How close |arg z| may come to π before the principal-branch jet is flagged.
pub const BRANCH_CUT_MARGIN: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Nilpotent orbit models
// ---------------------------------------------------------------------------

/// `Ω(z) = exp((√-1/2π) Σ_i N_i log(1/z_i)) A(z)` with finitely supported
/// `A(z) = Σ_a A_a z^a`.
#[derive(Clone, Debug)]
pub struct NilpotentOrbitModel {
    pub weight: u32,
    pub dim: usize,
    pub vars: usize,
    /// One matrix per variable; zero matrices mark log-free directions.
    pub nilpotents: Vec<CMat>,
    pub a_coeffs: BTreeMap<Vec<u32>, CVec>,
    pub polarization: PolarizationForm,
}

impl NilpotentOrbitModel {
    pub fn new(
        weight: u32,
        nilpotents: Vec<CMat>,
        a_coeffs: BTreeMap<Vec<u32>, CVec>,
        polarization: PolarizationForm,
    ) -> Result<Self> {
        let dim = polarization.dim;
        let vars = nilpotents.len();
        if vars == 0 {
            return Err(Error::InvalidInput("model needs at least one variable".into()));
        }
        for n in &nilpotents {
            if n.nrows() != dim || n.ncols() != dim {
                return Err(Error::DimensionMismatch(
                    "nilpotent size does not match polarization".into(),
                ));
            }
        }
        for (a, v) in &a_coeffs {
            if a.len() != vars {
                return Err(Error::DimensionMismatch(
                    "A-coefficient multi-index has wrong arity".into(),
                ));
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch(
                    "A-coefficient vector has wrong dimension".into(),
                ));
            }
        }
        if !a_coeffs.contains_key(&vec![0u32; vars]) {
            return Err(Error::InvalidInput("A(0) = A_0 must be supplied".into()));
        }
        let model = NilpotentOrbitModel {
            weight,
            dim,
            vars,
            nilpotents,
            a_coeffs,
            polarization,
        };
        model.validate_structure(&Tolerances::default())?;
        Ok(model)
    }

    /// Structural invariants: `N_i^{n+1} = 0`, `[N_i, N_j] = 0`, and
    /// infinitesimal Q-invariance `Q(Nx, y) + Q(x, Ny) = 0`.
    pub fn validate_structure(&self, tol: &Tolerances) -> Result<()> {
        for (i, n) in self.nilpotents.iter().enumerate() {
            let scale = fnorm(n).max(1.0);
            let mut p = n.clone();
            for _ in 0..self.weight {
                p = &p * n;
            }
            if fnorm(&p) > tol.residual * scale.powi(self.weight as i32 + 1) {
                return Err(Error::InvalidInput(format!(
                    "N_{i} is not nilpotent of index <= weight+1 (||N^(n+1)|| = {:.3e})",
                    fnorm(&p)
                )));
            }
            let inv = n.transpose() * &self.polarization.q + &self.polarization.q * n;
            if fnorm(&inv) > tol.residual * (scale * fnorm(&self.polarization.q)).max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "N_{i} does not preserve Q infinitesimally (residual {:.3e})",
                    fnorm(&inv)
                )));
            }
            for (j, m) in self.nilpotents.iter().enumerate().skip(i + 1) {
                let comm = n * m - m * n;
                if fnorm(&comm) > tol.residual * (fnorm(n) * fnorm(m)).max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "N_{i} and N_{j} do not commute"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact jet of the orbit at `z0`, to the requested order (≤ 4).
    pub fn orbit_jet(&self, z0: &[Complex64], order: usize) -> Result<JetSection> {
        if z0.len() != self.vars {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                self.vars,
                z0.len()
            )));
        }
        if order > MAX_JET_ORDER {
            return Err(Error::Parameter(format!(
                "jet order {order} exceeds supported maximum {MAX_JET_ORDER}"
            )));
        }
        let mut branch_warning = false;
        for (i, z) in z0.iter().enumerate() {
            if z.norm() == 0.0 {
                return Err(Error::Domain(format!("coordinate {i} vanishes")));
            }
            let logdir = fnorm(&self.nilpotents[i]) > 0.0;
            if logdir && z.norm() >= 1.0 {
                return Err(Error::Domain(format!(
                    "log-direction coordinate {i} must satisfy 0 < |z| < 1"
                )));
            }
            if (PI - z.arg().abs()).abs() < BRANCH_CUT_MARGIN {
                branch_warning = true;
            }
        }

        let space = SeriesSpace::new(self.vars, order);

        // ζ-offsets: δζ_i(w) = -(√-1/2π) ln(1 + w_i/z0_i), no constant term.
        let mut dzeta: Vec<BiSeries> = Vec::with_capacity(self.vars);
        for (i, z) in z0.iter().enumerate() {
            let mut s = BiSeries::zero(&space);
            for j in 1..=order {
                let mut mono = vec![0u32; self.vars];
                mono[i] = j as u32;
                let idx = space.index_of(&mono).unwrap();
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                // -(i/2π) * (-1)^{j+1} / (j z^j)
                let coef = c(0.0, -1.0 / (2.0 * PI)) * c(sign / j as f64, 0.0) / z.powu(j as u32);
                *s.at_mut(idx, 0) = coef;
            }
            dzeta.push(s);
        }

        // A(z0 + w) as a truncated holomorphic vector series.
        let mut a_series = VSeries::zero(&space, self.dim);
        for (a, va) in &self.a_coeffs {
            let mono = monomial_series(&space, z0, a, order);
            for (k, comp) in a_series.comps.iter_mut().enumerate() {
                *comp = comp.add(&mono.scale(va[k]));
            }
        }

        // exp(Σ δζ_i N_i) acting on A, order by order (δζ has no constant term).
        let mut acc = a_series.clone();
        let mut term = a_series;
        for j in 1..=order {
            let mut next = VSeries::zero(&space, self.dim);
            for (i, n) in self.nilpotents.iter().enumerate() {
                if fnorm(n) == 0.0 {
                    continue;
                }
                let nv = apply_const_mat(n, &term);
                next = next.add(&nv.scale_series(&dzeta[i]));
            }
            term = next.scale(c(1.0 / j as f64, 0.0));
            acc = acc.add(&term);
        }

        // Constant part exp(Σ ζ_i(0) N_i).
        let mut exponent = CMat::zeros(self.dim, self.dim);
        for (i, n) in self.nilpotents.iter().enumerate() {
            if fnorm(n) == 0.0 {
                continue;
            }
            let zeta0 = c(0.0, -1.0 / (2.0 * PI)) * z0[i].ln();
            exponent += n.scale(1.0) * zeta0;
        }
        let e0 = crate::linalg::exp_nilpotent(&exponent, self.dim);
        let omega = apply_const_mat(&e0, &acc);

        let coeffs: Vec<CVec> = (0..space.len())
            .map(|i| CVec::from_iterator(self.dim, omega.comps.iter().map(|s| s.at(i, 0))))
            .collect();
        let mut jet = JetSection::new(z0.to_vec(), order, self.dim, coeffs)?;
        jet.branch_cut_warning = branch_warning;
        Ok(jet)
    }
}

/// Truncated series of `Π_i (z0_i + w_i)^{a_i}`.
fn monomial_series(
    space: &std::sync::Arc<SeriesSpace>,
    z0: &[Complex64],
    a: &[u32],
    order: usize,
) -> BiSeries {
    let mut acc = BiSeries::constant(space, c(1.0, 0.0));
    for (i, &k) in a.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let mut factor = BiSeries::zero(space);
        for j in 0..=(k as usize).min(order) {
            let mut mono = vec![0u32; space.vars];
            mono[i] = j as u32;
            let idx = space.index_of(&mono).unwrap();
            *factor.at_mut(idx, 0) = c(binomial(k, j as u32), 0.0) * z0[i].powu(k - j as u32);
        }
        acc = acc.mul(&factor);
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for j in 0..k {
        r = r * (n - j) as f64 / (j + 1) as f64;
    }
    r
}

fn apply_const_mat(m: &CMat, v: &VSeries) -> VSeries {
    let d = v.dim();
    let space = &v.comps[0].space;
    let mut out = VSeries::zero(space, m.nrows());
    for r in 0..m.nrows() {
        for k in 0..d {
            let coef = m[(r, k)];
            if coef == c(0.0, 0.0) {
                continue;
            }
            out.comps[r] = out.comps[r].add(&v.comps[k].scale(coef));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Picard-Fuchs models
// ---------------------------------------------------------------------------

/// One-parameter operator `Σ_{j=0}^{d} c_j(z) θ^j` with polynomial `c_j`,
/// normalized so the indicial polynomial at 0 is `θ^d` (maximal unipotent).
#[derive(Clone, Debug)]
pub struct PicardFuchsModel {
    /// ODE order d (also the ambient dimension of the period vector).
    pub order: usize,
    pub weight: u32,
    /// `coeffs[j]` = z-coefficients of c_j(z), constant term first.
    pub coeffs: Vec<Vec<Complex64>>,
    pub r_max: f64,
}

/// Frobenius data: `a_n(ε)` as ε-jets of length d, so that
/// `y(z, ε) = z^ε Σ_n a_n(ε) z^n` and `y_j = (1/j!) ∂_ε^j y|_{ε=0}`.
struct FrobeniusTable {
    /// `a[n][s]` = s-th ε-Taylor coefficient of `a_n`.
    a: Vec<Vec<Complex64>>,
}

impl PicardFuchsModel {
    pub fn new(weight: u32, coeffs: Vec<Vec<Complex64>>, r_max: f64) -> Result<Self> {
        let order = coeffs.len().saturating_sub(1);
        if order < 1 {
            return Err(Error::InvalidInput("operator must have positive order".into()));
        }
        if r_max <= 0.0 {
            return Err(Error::InvalidInput("r_max must be positive".into()));
        }
        let top0 = coeffs[order].first().copied().unwrap_or(c(0.0, 0.0));
        if top0.norm() == 0.0 {
            return Err(Error::InvalidInput(
                "c_d(0) = 0: operator is not normalized at a maximal-unipotent point".into(),
            ));
        }
        for (j, cj) in coeffs.iter().enumerate().take(order) {
            let c0 = cj.first().copied().unwrap_or(c(0.0, 0.0));
            if c0.norm() > 1e-14 * top0.norm().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "c_{j}(0) ≠ 0: indicial polynomial is not θ^d (maximal-unipotent normalization)"
                )));
            }
        }
        Ok(PicardFuchsModel {
            order,
            weight,
            coeffs,
            r_max,
        })
    }

    /// Degree in z beyond which every c_j is zero.
    fn z_degree(&self) -> usize {
        self.coeffs.iter().map(|v| v.len().saturating_sub(1)).fold(0, usize::max)
    }

    /// `P_k(θ)` = θ-polynomial multiplying z^k, normalized by c_d(0).
    fn theta_poly(&self, k: usize) -> Vec<Complex64> {
        let norm = self.coeffs[self.order][0];
        let mut p = vec![c(0.0, 0.0); self.order + 1];
        for (j, cj) in self.coeffs.iter().enumerate() {
            if let Some(&v) = cj.get(k) {
                p[j] = v / norm;
            }
        }
        p
    }

    /// Generate `a_n(ε)` for n ≤ nmax by the Frobenius recursion
    /// `a_N = -(N+ε)^{-d} Σ_{k≥1} P_k(N-k+ε) a_{N-k}`.
    fn frobenius(&self, nmax: usize) -> FrobeniusTable {
        let d = self.order;
        let h = self.z_degree();
        let polys: Vec<Vec<Complex64>> = (0..=h).map(|k| self.theta_poly(k)).collect();
        let mut a: Vec<Vec<Complex64>> = Vec::with_capacity(nmax + 1);
        let mut a0 = vec![c(0.0, 0.0); d];
        a0[0] = c(1.0, 0.0);
        a.push(a0);
        for nn in 1..=nmax {
            let mut rhs = vec![c(0.0, 0.0); d];
            for k in 1..=h.min(nn) {
                let arg = ejet_affine(c((nn - k) as f64, 0.0), d);
                let pk = ejet_polyval(&polys[k], &arg);
                let prod = ejet_mul(&pk, &a[nn - k]);
                for s in 0..d {
                    rhs[s] += prod[s];
                }
            }
            // divide by -(n+ε)^d
            let base = ejet_affine(c(nn as f64, 0.0), d);
            let mut denom = ejet_one(d);
            for _ in 0..d {
                denom = ejet_mul(&denom, &base);
            }
            let inv = ejet_inv(&denom);
            let mut an = ejet_mul(&inv, &rhs);
            for s in an.iter_mut() {
                *s = -*s;
            }
            a.push(an);
        }
        FrobeniusTable { a }
    }

    /// The Frobenius period vector and its z-derivatives at `z0`:
    /// `out[s][j] = ∂^s y_j(z0)` for `s ≤ order`, `j < d`.
    fn eval_derivatives(&self, z0: Complex64, max_deriv: usize) -> Result<Vec<Vec<Complex64>>> {
        let r = z0.norm();
        if r == 0.0 {
            return Err(Error::Domain("z0 = 0 is the boundary point itself".into()));
        }
        if r >= 0.8 * self.r_max {
            return Err(Error::Convergence(format!(
                "|z0| = {r:.3e} is not below 0.8 r_max = {:.3e}",
                0.8 * self.r_max
            )));
        }
        let d = self.order;
        let lam = z0.ln();

        // Adaptive term count from the geometric decay toward r_max.
        let q: f64 = r / self.r_max;
        let nmax = ((1e-18_f64.ln() / q.ln()).ceil() as usize).clamp(24, 4000);
        let table = self.frobenius(nmax);

        let mut out = vec![vec![c(0.0, 0.0); d]; max_deriv + 1];
        let mut mags = vec![vec![0.0_f64; d]; max_deriv + 1];
        let mut tail_frac: f64 = 0.0;
        for s in 0..=max_deriv {
            for j in 0..d {
                let (mut acc, mut last) = (c(0.0, 0.0), 0.0_f64);
                let mut maxmag = 0.0_f64;
                for (nn, an) in table.a.iter().enumerate() {
                    // term: Σ_{mi<=j} a_n^{(j-mi)} /mi! * ∂^s (z^n Λ^mi)
                    let mut term = c(0.0, 0.0);
                    for mi in 0..=j.min(d - 1) {
                        let coef = an[j - mi] / c(factorial_f(mi as u32), 0.0);
                        if coef.norm() == 0.0 {
                            continue;
                        }
                        term += coef * deriv_pow_log(nn as i64, mi as u32, s as u32, z0, lam);
                    }
                    acc += term;
                    last = term.norm();
                    maxmag = maxmag.max(last);
                    // stop when well past the scale set so far
                    if nn > 8 && last < 1e-18 * maxmag.max(acc.norm()) {
                        break;
                    }
                }
                out[s][j] = acc;
                mags[s][j] = maxmag;
                let scale = acc.norm().max(maxmag).max(1e-300);
                tail_frac = tail_frac.max(last / scale);
            }
        }
        if tail_frac > 1e-12 {
            return Err(Error::Convergence(format!(
                "series truncation reached only {tail_frac:.3e} relative tail at |z0| = {r:.3e}"
            )));
        }
        Ok(out)
    }

    /// Component scaling making the Frobenius basis compatible with
    /// entrywise complex conjugation: the j-th solution is divided by
    /// `(2πi)^j`, which turns the local monodromy logarithm into the real
    /// shift matrix and the flat pairing into a real form.
    fn component_scale(&self, j: usize) -> Complex64 {
        c(0.0, 2.0 * PI).powi(-(j as i32))
    }

    /// Jet of the (normalized) Frobenius period vector at `z0`.
    pub fn pf_jet(&self, z0: Complex64, order: usize) -> Result<JetSection> {
        if order > MAX_JET_ORDER {
            return Err(Error::Parameter(format!(
                "jet order {order} exceeds supported maximum {MAX_JET_ORDER}"
            )));
        }
        let der = self.eval_derivatives(z0, order)?;
        let d = self.order;
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for (s, row) in der.iter().enumerate() {
            if s > 0 {
                fact *= s as f64;
            }
            coeffs.push(CVec::from_iterator(
                d,
                row.iter().enumerate().map(|(j, &v)| v * self.component_scale(j) / fact),
            ));
        }
        let mut jet = JetSection::new(vec![z0], order, d, coeffs)?;
        jet.branch_cut_warning = (PI - z0.arg().abs()).abs() < BRANCH_CUT_MARGIN;
        Ok(jet)
    }

    /// The boundary data of the normalized period vector: the real shift
    /// nilpotent and the z-power-series coefficient vectors of `A(z)`.
    pub fn boundary_data(&self, terms: usize) -> (CMat, Vec<CVec>) {
        let d = self.order;
        let mut n = CMat::zeros(d, d);
        for j in 0..d - 1 {
            n[(j + 1, j)] = c(1.0, 0.0);
        }
        let table = self.frobenius(terms);
        let a_series: Vec<CVec> = table
            .a
            .iter()
            .map(|an| {
                CVec::from_iterator(
                    d,
                    an.iter()
                        .enumerate()
                        .map(|(j, &v)| v * self.component_scale(j)),
                )
            })
            .collect();
        (n, a_series)
    }

    /// Residual of the operator applied to the jet, relative; exercises the
    /// θ-expansion `θ^m = Σ_k S(m,k) z^k ∂^k`.
    pub fn ode_residual(&self, jet: &JetSection) -> Result<f64> {
        jet.require_order(self.order.min(MAX_JET_ORDER), "ODE residual")?;
        let z0 = jet.z0[0];
        let d = self.order;
        if d > jet.order {
            return Err(Error::Order {
                have: jet.order,
                need: d,
                what: "ODE residual needs order = operator order",
            });
        }
        let s2 = stirling2(d);
        let mut resid = CVec::zeros(jet.dim);
        let mut scale = 0.0_f64;
        for (j, cj) in self.coeffs.iter().enumerate() {
            let cjz: Complex64 = cj
                .iter()
                .enumerate()
                .map(|(k, &v)| v * z0.powu(k as u32))
                .sum();
            // θ^j Ω = Σ_k S(j,k) z^k ∂^k Ω
            let mut theta_j = CVec::zeros(jet.dim);
            for k in 0..=j {
                let w = s2[j][k];
                if w == 0.0 {
                    continue;
                }
                let der = jet.derivative(&[k as u32])?;
                theta_j += der.scale(w).map(|x| x * z0.powu(k as u32));
            }
            scale = scale.max(cjz.norm() * vnorm(&theta_j));
            resid += theta_j.map(|x| x * cjz);
        }
        Ok(vnorm(&resid) / scale.max(1e-300))
    }

    /// Recover the flat polarization: the unique (up to scale) constant form
    /// with parity `(-1)^n` satisfying `Q(Ω, ∂^k Ω) ≡ 0` for `k < n`, imposed
    /// on series coefficients through z-order 2d.  Normalized to real entries
    /// with `(Ω, Ω̄) > 0` on the positive real axis near 0.
    pub fn derive_flat_pairing(&self) -> Result<PolarizationForm> {
        let d = self.order;
        let n = self.weight;
        if d != n as usize + 1 {
            return Err(Error::Parameter(format!(
                "flat pairing needs order d = n+1 (one-dimensional Hodge blocks); got d = {d}, n = {n}"
            )));
        }
        let nmax = 2 * d + 6;
        let table = self.frobenius(nmax);

        // Symbolic coefficients of y_a as Σ coef z^m Λ^mi.
        // entry[(a, m, mi)] = a-th solution coefficient.
        let coef = |a: usize, m: usize, mi: usize| -> Complex64 {
            if mi > a || m >= table.a.len() {
                return c(0.0, 0.0);
            }
            table.a[m][a - mi] / factorial_f(mi as u32)
        };

        // Unknowns: independent entries of Q given the parity.
        let skew = n % 2 == 1;
        let mut unknowns: Vec<(usize, usize)> = Vec::new();
        for a in 0..d {
            for b in a..d {
                if a == b && skew {
                    continue;
                }
                unknowns.push((a, b));
            }
        }

        // Rows: coefficient of z^{N} Λ^{L} in Q(Ω, ∂^k Ω), for k < n.
        // With ∂^k(z^m Λ^mi) = z^{m-k} Σ_t w_t Λ^{mi-t}.
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        let zmax = 2 * d as i64;
        for k in 0..n as usize {
            let mut acc: BTreeMap<(i64, usize), Vec<Complex64>> = BTreeMap::new();
            for a in 0..d {
                for b in 0..d {
                    // position of (a,b) in unknowns with parity sign
                    let (pos, sign) = if a <= b {
                        (unknowns.iter().position(|&(x, y)| (x, y) == (a, b)), 1.0)
                    } else {
                        (
                            unknowns.iter().position(|&(x, y)| (x, y) == (b, a)),
                            if skew { -1.0 } else { 1.0 },
                        )
                    };
                    let Some(pos) = pos else { continue };
                    for m1 in 0..=nmax {
                        for mi1 in 0..=a.min(d - 1) {
                            let c1 = coef(a, m1, mi1);
                            if c1.norm() == 0.0 {
                                continue;
                            }
                            for m2 in 0..=nmax {
                                if (m1 + m2) as i64 > zmax + k as i64 {
                                    break;
                                }
                                for mi2 in 0..=b.min(d - 1) {
                                    let c2 = coef(b, m2, mi2);
                                    if c2.norm() == 0.0 {
                                        continue;
                                    }
                                    // ∂^k (z^{m2} Λ^{mi2}): weights over t
                                    let weights = deriv_weights(m2 as i64, mi2 as u32, k as u32);
                                    for (t, w) in weights.iter().enumerate() {
                                        if *w == 0.0 {
                                            continue;
                                        }
                                        let zpow = m1 as i64 + m2 as i64 - k as i64;
                                        if zpow > zmax {
                                            continue;
                                        }
                                        let lpow = mi1 + mi2 - t;
                                        let entry = acc
                                            .entry((zpow, lpow))
                                            .or_insert_with(|| vec![c(0.0, 0.0); unknowns.len()]);
                                        entry[pos] += c1 * c2 * c(*w * sign, 0.0);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            for (_, row) in acc {
                let scale = row.iter().map(|x| x.norm()).fold(0.0, f64::max);
                if scale > 0.0 {
                    rows.push(row.iter().map(|x| x / scale).collect());
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Degeneracy("no flat-pairing constraints produced".into()));
        }
        let mat = CMat::from_fn(rows.len(), unknowns.len(), |i, j| rows[i][j]);
        if std::env::var("WPGEOM_DEBUG_PAIRING").is_ok() {
            let sv = crate::linalg::singular_values(&mat);
            eprintln!("pairing constraint singular values: {sv:?}");
        }
        let ns = nullspace(&mat, 1e-8);
        if ns.len() != 1 {
            return Err(Error::PairingAmbiguity { nullity: ns.len() });
        }

        // Assemble Q in the raw Frobenius basis, transport to the normalized
        // basis (solution j divided by (2πi)^j), rotate to real entries,
        // normalize.
        let sol = &ns[0];
        let mut q = CMat::zeros(d, d);
        for (idx, &(a, b)) in unknowns.iter().enumerate() {
            q[(a, b)] = sol[idx];
            if a != b {
                q[(b, a)] = if skew { -sol[idx] } else { sol[idx] };
            }
        }
        let two_pi_i = c(0.0, 2.0 * PI);
        for a in 0..d {
            for b in 0..d {
                q[(a, b)] *= two_pi_i.powu((a + b) as u32);
            }
        }
        // phase rotation by the largest entry
        let mut best = c(0.0, 0.0);
        for v in q.iter() {
            if v.norm() > best.norm() {
                best = *v;
            }
        }
        if best.norm() == 0.0 {
            return Err(Error::Degeneracy("flat pairing vanished".into()));
        }
        let phase = best / best.norm();
        q = q.map(|x| x / phase);
        let imag_resid = q.iter().map(|x| x.im.abs()).fold(0.0, f64::max) / max_abs(&q);
        if imag_resid > 1e-6 {
            return Err(Error::Degeneracy(format!(
                "flat pairing is not proportional to a real form (imag residual {imag_resid:.3e})"
            )));
        }
        q = q.map(|x| c(x.re, 0.0));
        q = q.scale(1.0 / max_abs(&q));

        // Fix overall sign: (Ω, Ω̄) > 0 on the positive real axis near 0.
        let pol = PolarizationForm::new(n, q.clone())?;
        let z_ref = c(self.r_max * 1e-3, 0.0);
        let jet = self.pf_jet(z_ref, 0)?;
        let s = pol.sesqui(&jet.coeffs[0], &jet.coeffs[0]);
        let q = if s.re < 0.0 { q.scale(-1.0) } else { q };
        PolarizationForm::new(n, q)
    }
}

/// ε-jet helpers: truncated polynomials in ε of fixed length d.
fn ejet_one(d: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); d];
    v[0] = c(1.0, 0.0);
    v
}

fn ejet_affine(a0: Complex64, d: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); d];
    v[0] = a0;
    if d > 1 {
        v[1] = c(1.0, 0.0);
    }
    v
}

fn ejet_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let d = a.len();
    let mut out = vec![c(0.0, 0.0); d];
    for i in 0..d {
        if a[i].norm() == 0.0 {
            continue;
        }
        for j in 0..d - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn ejet_inv(a: &[Complex64]) -> Vec<Complex64> {
    let d = a.len();
    let a0 = a[0];
    let mut out = vec![c(0.0, 0.0); d];
    out[0] = a0.inv();
    for k in 1..d {
        let mut s = c(0.0, 0.0);
        for j in 0..k {
            s += out[j] * a[k - j];
        }
        out[k] = -s / a0;
    }
    out
}

fn ejet_polyval(p: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let d = x.len();
    let mut acc = vec![c(0.0, 0.0); d];
    for &pc in p.iter().rev() {
        acc = ejet_mul(&acc, x);
        acc[0] += pc;
    }
    acc
}

fn factorial_f(k: u32) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

/// Weights w_t in `∂^s (z^m Λ^mi) = z^{m-s} Σ_t w_t Λ^{mi-t}` (Λ = log z).
fn deriv_weights(m: i64, mi: u32, s: u32) -> Vec<f64> {
    let mut w = vec![0.0; mi as usize + 1];
    w[0] = 1.0;
    for step in 0..s {
        let mut nw = vec![0.0; mi as usize + 1];
        for (t, &v) in w.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            nw[t] += (m - step as i64) as f64 * v;
            if t + 1 < nw.len() {
                nw[t + 1] += (mi as f64 - t as f64) * v;
            }
        }
        w = nw;
    }
    w
}

/// `∂^s (z^m Λ^mi)` evaluated at z0 (Λ = principal log z0).
fn deriv_pow_log(m: i64, mi: u32, s: u32, z0: Complex64, lam: Complex64) -> Complex64 {
    let w = deriv_weights(m, mi, s);
    let mut acc = c(0.0, 0.0);
    for (t, &wt) in w.iter().enumerate() {
        if wt == 0.0 {
            continue;
        }
        acc += c(wt, 0.0) * lam.powu(mi - t as u32);
    }
    acc * z0.powi((m - s as i64) as i32)
}

/// Stirling numbers of the second kind up to row `n`: θ^m = Σ S(m,k) z^k ∂^k.
fn stirling2(n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n + 1]; n + 1];
    s[0][0] = 1.0;
    for m in 1..=n {
        for k in 1..=m {
            s[m][k] = s[m - 1][k - 1] + k as f64 * s[m - 1][k];
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Unified model handle
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Model {
    Orbit(NilpotentOrbitModel),
    PicardFuchs {
        model: PicardFuchsModel,
        pairing: PolarizationForm,
    },
}

impl Model {
    pub fn weight(&self) -> u32 {
        match self {
            Model::Orbit(m) => m.weight,
            Model::PicardFuchs { model, .. } => model.weight,
        }
    }

    pub fn vars(&self) -> usize {
        match self {
            Model::Orbit(m) => m.vars,
            Model::PicardFuchs { .. } => 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Orbit(m) => m.dim,
            Model::PicardFuchs { model, .. } => model.order,
        }
    }

    pub fn polarization(&self) -> &PolarizationForm {
        match self {
            Model::Orbit(m) => &m.polarization,
            Model::PicardFuchs { pairing, .. } => pairing,
        }
    }

    pub fn jet(&self, z0: &[Complex64], order: usize) -> Result<JetSection> {
        match self {
            Model::Orbit(m) => m.orbit_jet(z0, order),
            Model::PicardFuchs { model, .. } => {
                if z0.len() != 1 {
                    return Err(Error::DimensionMismatch(
                        "Picard-Fuchs models are one-parameter".into(),
                    ));
                }
                model.pf_jet(z0[0], order)
            }
        }
    }

    /// A radius strictly inside the validity domain, for default sweeps.
    pub fn default_radius(&self) -> f64 {
        match self {
            Model::Orbit(_) => (-2.0 * PI).exp(),
            Model::PicardFuchs { model, .. } => 0.1 * model.r_max,
        }
    }

    pub fn from_picard_fuchs(model: PicardFuchsModel) -> Result<Model> {
        let pairing = model.derive_flat_pairing()?;
        Ok(Model::PicardFuchs { model, pairing })
    }
}

// ---------------------------------------------------------------------------
// Hodge decomposition from a jet
// ---------------------------------------------------------------------------

/// Filtration frames `F^{n-s} = span{∂^a Ω : |a| ≤ s}` with ranks checked,
/// `(p,q)` blocks split off by the first Hodge-Riemann relation and the lower
/// half filled in by conjugation.
pub fn decomposition_at(
    jet: &JetSection,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<HodgeDecompositionAt> {
    let n = pol.weight;
    let d = pol.dim;
    if jet.dim != d {
        return Err(Error::DimensionMismatch(
            "jet dimension does not match polarization".into(),
        ));
    }
    let need = (n as usize + 1) / 2;
    jet.require_order(need, "Hodge decomposition")?;

    // Frames per level s (normalized columns), ranks strictly increasing.
    let smax = jet.order.min(n as usize);
    let mut frames: Vec<CMat> = Vec::new(); // orthonormal column bases per level
    let mut ranks: Vec<usize> = Vec::new();
    let mut cols: Vec<CVec> = Vec::new();
    for s in 0..=smax {
        for (i, mono) in jet.space.monos.iter().enumerate() {
            if jet.space.degree(i) as usize != s {
                continue;
            }
            let der = jet.derivative(mono)?;
            let nv = vnorm(&der);
            if nv > 0.0 {
                cols.push(der.scale(1.0 / nv));
            }
        }
        let raw = mat_from_columns(d, &cols);
        let basis = orthonormal_column_basis(&raw, tol.rank);
        let rank = basis.ncols();
        if s > 0 {
            let prev = ranks[s - 1];
            if rank <= prev && rank < d {
                return Err(Error::RankDrop {
                    level: n - s as u32,
                    rank,
                    dim: d,
                });
            }
        }
        ranks.push(rank);
        frames.push(basis);
    }
    if smax == n as usize && ranks[smax] != d {
        return Err(Error::RankDrop {
            level: 0,
            rank: ranks[smax],
            dim: d,
        });
    }

    // Upper blocks H^{p, n-p} for p ≥ ceil(n/2): the part of F^p that pairs
    // to zero against conj(F^{p+1}) under (·, ·̄).
    let p_mid = n.div_ceil(2);
    let mut blocks: Vec<HodgeBlock> = Vec::new();
    for p in (p_mid..=n).rev() {
        let s = (n - p) as usize;
        let frame_p = &frames[s];
        let basis = if p == n {
            (0..frame_p.ncols()).map(|j| frame_p.column(j).into()).collect::<Vec<CVec>>()
        } else {
            let frame_up = &frames[s - 1];
            // rows: sesqui(candidate, frame_up column) = 0
            let mut cond = CMat::zeros(frame_up.ncols(), frame_p.ncols());
            for u in 0..frame_up.ncols() {
                for j in 0..frame_p.ncols() {
                    let fu: CVec = frame_up.column(u).into();
                    let fj: CVec = frame_p.column(j).into();
                    cond[(u, j)] = pol.sesqui(&fj, &fu);
                }
            }
            let kernel = nullspace(&cond, tol.rank.sqrt());
            let expect = frame_p.ncols() - frame_up.ncols();
            if kernel.len() != expect {
                return Err(Error::Degeneracy(format!(
                    "block H^{{{p},{}}} has dimension {} (expected {expect})",
                    n - p,
                    kernel.len()
                )));
            }
            kernel
                .iter()
                .map(|y| {
                    let mut v = CVec::zeros(d);
                    for (j, yj) in y.iter().enumerate() {
                        let col: CVec = frame_p.column(j).into();
                        v += col.map(|x| x * *yj);
                    }
                    v.scale(1.0 / vnorm(&v).max(1e-300))
                })
                .collect()
        };
        blocks.push(HodgeBlock {
            p,
            q: n - p,
            basis,
        });
    }

    // Lower blocks by conjugation.
    let upper: Vec<HodgeBlock> = blocks.clone();
    for blk in upper.iter() {
        let q = blk.p;
        let p = blk.q;
        if p >= p_mid {
            continue; // middle block (even weight) is self-conjugate
        }
        blocks.push(HodgeBlock {
            p,
            q,
            basis: blk.basis.iter().map(conj_vec).collect(),
        });
    }
    blocks.sort_by(|a, b| b.p.cmp(&a.p));

    let dec = HodgeDecompositionAt {
        point: jet.z0.clone(),
        weight: n,
        dim: d,
        blocks,
    };
    if dec.total_dim() != d {
        return Err(Error::Degeneracy(format!(
            "blocks span {} of {} dimensions",
            dec.total_dim(),
            d
        )));
    }
    Ok(dec)
}

/// Orthonormal basis for the column span (SVD, relative cutoff).
fn orthonormal_column_basis(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > rel_tol * smax)
        .count();
    u.columns(0, rank).into()
}

// ---------------------------------------------------------------------------
// Weil-Petersson geometry checklist
// ---------------------------------------------------------------------------

/// Model-level validation of the horizontal-slice axioms: Griffiths
/// transversality of the derivative frames (axiom 1), positivity of the
/// Weil-Petersson form (axiom 2), quasi-projectivity (axiom 3, reported as
/// not machine-checkable), and quasi-unipotency of the local monodromy data
/// (axiom 4).
pub fn wp_geometry_checklist(
    model: &Model,
    points: &[Vec<Complex64>],
    tol: &Tolerances,
) -> Result<ValidationReport> {
    let mut rep = ValidationReport::new("horizontal-slice axioms");
    let n = model.weight();
    let order = ((n as usize + 1) / 2 + 1).min(MAX_JET_ORDER);

    let mut trans_resid = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    for z in points {
        let jet = model.jet(z, order)?;
        let dec = decomposition_at(&jet, model.polarization(), tol)?;
        trans_resid = trans_resid.max(transversality_residual(&jet, &dec, model.polarization(), tol)?);
        let g = crate::wp::wp_metric(&jet, model.polarization(), tol)?;
        let ev = g.min_eigenvalue();
        // relative to the largest eigenvalue at the same point
        let evs = crate::linalg::hermitian_eigenvalues(&g.matrix);
        let top = evs.last().copied().unwrap_or(1.0).abs().max(1e-300);
        min_eig = min_eig.min(ev / top);
    }
    rep.check_residual(
        "axiom 1: transversality",
        "∂ of each H^{p,q} frame stays in F^{p-1} (off-component residual)",
        trans_resid,
        tol.residual,
    );
    rep.check_at_least(
        "axiom 2: metric positivity",
        "Weil-Petersson form positive definite (min relative eigenvalue)",
        min_eig,
        tol.rank,
    );
    rep.info(
        "axiom 3: quasi-projectivity",
        "not machine-checkable from local data — out of scope",
        f64::NAN,
    );
    match model {
        Model::Orbit(m) => {
            let mut worst = 0.0_f64;
            for ni in &m.nilpotents {
                let mut p = ni.clone();
                for _ in 0..m.weight {
                    p = &p * ni;
                }
                worst = worst.max(fnorm(&p) / fnorm(ni).max(1.0).powi(m.weight as i32 + 1));
            }
            rep.check_residual(
                "axiom 4: quasi-unipotency",
                "||N^{n+1}|| = 0 for every logarithmic direction",
                worst,
                tol.residual,
            );
        }
        Model::PicardFuchs { .. } => {
            // The Frobenius construction at a maximal-unipotent point is
            // unipotent by construction; report the structural zero.
            rep.check_residual(
                "axiom 4: quasi-unipotency",
                "maximal-unipotent normalization (indicial polynomial θ^d)",
                0.0,
                tol.residual,
            );
        }
    }
    Ok(rep)
}

/// Largest relative component of `∂_α(H^{p,q} frame)` outside `H^{p,q} ⊕ H^{p-1,q+1}`.
pub fn transversality_residual(
    jet: &JetSection,
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<f64> {
    let n = dec.weight;
    let mut worst = 0.0_f64;
    for blk in &dec.blocks {
        if blk.p == 0 {
            continue;
        }
        for v in &blk.basis {
            for alpha in 0..jet.vars() {
                let dv = crate::hodge_metric::frame_extension_derivative(jet, dec, pol, v, blk.p, alpha, tol)?;
                let total = vnorm(&dv).max(1e-300);
                let mut bad = CVec::zeros(dec.dim);
                for other in &dec.blocks {
                    if other.p + 1 >= blk.p {
                        continue;
                    }
                    bad += crate::hodge::project_pq(&dv, dec, pol, other.p, tol)?;
                }
                worst = worst.max(vnorm(&bad) / total);
            }
        }
    }
    let _ = n;
    Ok(worst)
}

// ---------------------------------------------------------------------------
// JSON model files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PfFile {
    order: usize,
    /// coeffs[j] = z-coefficients of c_j(z), complex as [re, im].
    coeffs: Vec<Vec<[f64; 2]>>,
    r_max: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    name: String,
    #[serde(rename = "type")]
    kind: String,
    weight: u32,
    dim: usize,
    #[serde(default = "default_vars")]
    vars: usize,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<BTreeMap<String, Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pf: Option<PfFile>,
}

fn default_vars() -> usize {
    1
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

fn cx(p: [f64; 2]) -> Complex64 {
    c(p[0], p[1])
}

fn cx_out(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn parse_multi_index(s: &str, vars: usize) -> Result<Vec<u32>> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != vars {
        return Err(Error::ModelFile(format!(
            "multi-index '{s}' has {} entries, expected {vars}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|e| Error::ModelFile(format!("bad multi-index '{s}': {e}")))
        })
        .collect()
}

impl Model {
    pub fn from_json(text: &str) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported schema_version {} (supported: {MODEL_SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        match file.kind.as_str() {
            "nilpotent_orbit" => {
                let qm = file
                    .q
                    .as_ref()
                    .ok_or_else(|| Error::ModelFile("nilpotent_orbit requires Q".into()))?;
                let d = file.dim;
                if qm.len() != d || qm.iter().any(|r| r.len() != d) {
                    return Err(Error::ModelFile("Q is not dim × dim".into()));
                }
                let q = CMat::from_fn(d, d, |i, j| cx(qm[i][j]));
                let pol = PolarizationForm::new(file.weight, q)?;
                let nmats = file
                    .n
                    .as_ref()
                    .ok_or_else(|| Error::ModelFile("nilpotent_orbit requires N".into()))?;
                if nmats.len() != file.vars {
                    return Err(Error::ModelFile(format!(
                        "N list has {} matrices, expected vars = {}",
                        nmats.len(),
                        file.vars
                    )));
                }
                let nilpotents: Vec<CMat> = nmats
                    .iter()
                    .map(|rows| {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(Error::ModelFile("N matrix is not dim × dim".into()));
                        }
                        Ok(CMat::from_fn(d, d, |i, j| cx(rows[i][j])))
                    })
                    .collect::<Result<_>>()?;
                let amap = file
                    .a
                    .as_ref()
                    .ok_or_else(|| Error::ModelFile("nilpotent_orbit requires A".into()))?;
                let mut a_coeffs = BTreeMap::new();
                for (k, v) in amap {
                    let idx = parse_multi_index(k, file.vars)?;
                    if v.len() != d {
                        return Err(Error::ModelFile(format!(
                            "A coefficient '{k}' has wrong dimension"
                        )));
                    }
                    a_coeffs.insert(idx, CVec::from_iterator(d, v.iter().map(|&p| cx(p))));
                }
                Ok(Model::Orbit(NilpotentOrbitModel::new(
                    file.weight,
                    nilpotents,
                    a_coeffs,
                    pol,
                )?))
            }
            "picard_fuchs" => {
                let pf = file
                    .pf
                    .as_ref()
                    .ok_or_else(|| Error::ModelFile("picard_fuchs requires pf".into()))?;
                if pf.order != file.dim {
                    return Err(Error::ModelFile(
                        "pf.order must equal dim (period vector of Frobenius solutions)".into(),
                    ));
                }
                let coeffs: Vec<Vec<Complex64>> = pf
                    .coeffs
                    .iter()
                    .map(|row| row.iter().map(|&p| cx(p)).collect())
                    .collect();
                let model = PicardFuchsModel::new(file.weight, coeffs, pf.r_max)?;
                match file.q {
                    Some(qm) => {
                        let d = file.dim;
                        if qm.len() != d || qm.iter().any(|r| r.len() != d) {
                            return Err(Error::ModelFile("Q is not dim × dim".into()));
                        }
                        let q = CMat::from_fn(d, d, |i, j| cx(qm[i][j]));
                        let pairing = PolarizationForm::new(file.weight, q)?;
                        Ok(Model::PicardFuchs { model, pairing })
                    }
                    None => Model::from_picard_fuchs(model),
                }
            }
            other => Err(Error::ModelFile(format!("unknown model type '{other}'"))),
        }
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::ModelFile(format!("cannot read {}: {e}", path.display()))
        })?;
        Model::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::ModelFile(format!(
                "{}: line {}, column {}: {j}",
                path.display(),
                j.line(),
                j.column()
            )),
            other => other,
        })
    }

    pub fn to_json(&self, name: &str) -> String {
        let file = match self {
            Model::Orbit(m) => ModelFile {
                schema_version: MODEL_SCHEMA_VERSION,
                name: name.into(),
                kind: "nilpotent_orbit".into(),
                weight: m.weight,
                dim: m.dim,
                vars: m.vars,
                q: Some(
                    (0..m.dim)
                        .map(|i| (0..m.dim).map(|j| cx_out(m.polarization.q[(i, j)])).collect())
                        .collect(),
                ),
                n: Some(
                    m.nilpotents
                        .iter()
                        .map(|nm| {
                            (0..m.dim)
                                .map(|i| (0..m.dim).map(|j| cx_out(nm[(i, j)])).collect())
                                .collect()
                        })
                        .collect(),
                ),
                a: Some(
                    m.a_coeffs
                        .iter()
                        .map(|(k, v)| {
                            (
                                k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                                v.iter().map(|&z| cx_out(z)).collect(),
                            )
                        })
                        .collect(),
                ),
                pf: None,
            },
            Model::PicardFuchs { model, pairing } => ModelFile {
                schema_version: MODEL_SCHEMA_VERSION,
                name: name.into(),
                kind: "picard_fuchs".into(),
                weight: model.weight,
                dim: model.order,
                vars: 1,
                q: Some(
                    (0..pairing.dim)
                        .map(|i| (0..pairing.dim).map(|j| cx_out(pairing.q[(i, j)])).collect())
                        .collect(),
                ),
                n: None,
                a: None,
                pf: Some(PfFile {
                    order: model.order,
                    coeffs: model
                        .coeffs
                        .iter()
                        .map(|row| row.iter().map(|&z| cx_out(z)).collect())
                        .collect(),
                    r_max: model.r_max,
                }),
            },
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Preset models
// ---------------------------------------------------------------------------

/// Canonical built-in models, also shipped as JSON assets.
pub mod presets {
    use super::*;

    fn shift_matrix(d: usize) -> CMat {
        let mut n = CMat::zeros(d, d);
        for i in 0..d - 1 {
            n[(i + 1, i)] = c(1.0, 0.0);
        }
        n
    }

    fn e0(d: usize) -> CVec {
        let mut v = CVec::zeros(d);
        v[0] = c(1.0, 0.0);
        v
    }

    /// Weight-3 one-variable shift orbit on ℂ⁴: `Q(e0,e3) = 1, Q(e1,e2) = -1`,
    /// `N e_k = e_{k+1}`, `A ≡ e0`.
    pub fn model_a() -> Model {
        let d = 4;
        let mut q = CMat::zeros(d, d);
        q[(0, 3)] = c(1.0, 0.0);
        q[(3, 0)] = c(-1.0, 0.0);
        q[(1, 2)] = c(-1.0, 0.0);
        q[(2, 1)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(3, q).unwrap();
        let mut a = BTreeMap::new();
        a.insert(vec![0u32], e0(d));
        Model::Orbit(NilpotentOrbitModel::new(3, vec![shift_matrix(d)], a, pol).unwrap())
    }

    /// Weight-4 one-variable shift orbit on ℂ⁵: `Q(e_i, e_{4-i}) = (-1)^i`.
    pub fn model_c() -> Model {
        let d = 5;
        let mut q = CMat::zeros(d, d);
        for i in 0..d {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            q[(i, d - 1 - i)] = c(sign, 0.0);
        }
        let pol = PolarizationForm::new(4, q).unwrap();
        let mut a = BTreeMap::new();
        a.insert(vec![0u32], e0(d));
        Model::Orbit(NilpotentOrbitModel::new(4, vec![shift_matrix(d)], a, pol).unwrap())
    }

    /// Mirror-quintic operator `θ⁴ - 5z(5θ+1)(5θ+2)(5θ+3)(5θ+4)`.
    pub fn quintic() -> Model {
        let cc = |x: f64| c(x, 0.0);
        let coeffs = vec![
            vec![cc(0.0), cc(-120.0)],
            vec![cc(0.0), cc(-1250.0)],
            vec![cc(0.0), cc(-4375.0)],
            vec![cc(0.0), cc(-6250.0)],
            vec![cc(1.0), cc(-3125.0)],
        ];
        let model = PicardFuchsModel::new(3, coeffs, 1.0 / 3125.0).unwrap();
        Model::from_picard_fuchs(model).unwrap()
    }

    /// Pure maximal-unipotent operator θ⁴ (weight 3).
    pub fn theta4() -> Model {
        let cc = |x: f64| c(x, 0.0);
        let coeffs = vec![vec![cc(0.0)], vec![cc(0.0)], vec![cc(0.0)], vec![cc(0.0)], vec![cc(1.0)]];
        let model = PicardFuchsModel::new(3, coeffs, 1.0).unwrap();
        Model::from_picard_fuchs(model).unwrap()
    }

    /// Pure maximal-unipotent operator θ⁵ (weight 4).
    pub fn theta5() -> Model {
        let cc = |x: f64| c(x, 0.0);
        let coeffs = vec![
            vec![cc(0.0)],
            vec![cc(0.0)],
            vec![cc(0.0)],
            vec![cc(0.0)],
            vec![cc(0.0)],
            vec![cc(1.0)],
        ];
        let model = PicardFuchsModel::new(4, coeffs, 1.0).unwrap();
        Model::from_picard_fuchs(model).unwrap()
    }

    /// Synthetic weight-3 model with `N A_0 = 0` but `N A_1 ≠ 0` and
    /// `(N^2 A_1, Ā_1) ≠ 0`: the boundary point has finite Weil-Petersson
    /// distance and the potential expansion carries an `r² (log 1/r)²` term.
    pub fn case2() -> Model {
        let d = 4;
        let mut q = CMat::zeros(d, d);
        q[(0, 3)] = c(1.0, 0.0);
        q[(3, 0)] = c(-1.0, 0.0);
        q[(1, 2)] = c(-1.0, 0.0);
        q[(2, 1)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(3, q).unwrap();
        // N e1 = -e2, all other basis vectors to zero.  This is the
        // infinitesimal isometry attached to the symmetric form -e1*⊗e1*,
        // has N² = 0, and kills A_0 below while moving A_1.
        let mut n = CMat::zeros(d, d);
        n[(2, 1)] = c(-1.0, 0.0);
        let mut a = BTreeMap::new();
        let mut a0 = CVec::zeros(d);
        a0[0] = c(1.0, 0.0);
        a0[3] = c(0.0, -0.5); // keeps (A_0, Ā_0) = 1
        a.insert(vec![0u32], a0);
        let mut a1 = CVec::zeros(d);
        a1[1] = c(1.0, 0.0);
        a.insert(vec![1u32], a1);
        Model::Orbit(NilpotentOrbitModel::new(3, vec![n], a, pol).unwrap())
    }

    /// Two-variable extension of `model_a` with a second, constant direction
    /// (`N_2 = 0`, `A` independent of `z_2`): the action of `∂_2` vanishes.
    pub fn model_a_two_vars() -> Model {
        let d = 4;
        let mut q = CMat::zeros(d, d);
        q[(0, 3)] = c(1.0, 0.0);
        q[(3, 0)] = c(-1.0, 0.0);
        q[(1, 2)] = c(-1.0, 0.0);
        q[(2, 1)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(3, q).unwrap();
        let mut a = BTreeMap::new();
        a.insert(vec![0u32, 0u32], e0(d));
        Model::Orbit(
            NilpotentOrbitModel::new(3, vec![shift_matrix(d), CMat::zeros(d, d)], a, pol).unwrap(),
        )
    }

    /// Weight-3, two-variable tensor product of a weight-1 orbit (d=2) and a
    /// weight-2 orbit (d=3): `H = H₁ ⊗ H₂`, `Q = Q₁ ⊗ Q₂`,
    /// `N_1 = N₁ ⊗ I`, `N_2 = I ⊗ N₂`.  Exercises m = 2 tensor shapes.
    pub fn product_orbit() -> Model {
        // factor 1: weight 1 on ℂ², Q skew
        let mut q1 = CMat::zeros(2, 2);
        q1[(0, 1)] = c(1.0, 0.0);
        q1[(1, 0)] = c(-1.0, 0.0);
        let n1 = shift_matrix(2);
        // factor 2: weight 2 on ℂ³, Q(e_i, e_{2-i}) = (-1)^i
        let mut q2 = CMat::zeros(3, 3);
        q2[(0, 2)] = c(1.0, 0.0);
        q2[(1, 1)] = c(-1.0, 0.0);
        q2[(2, 0)] = c(1.0, 0.0);
        let n2 = shift_matrix(3);

        let q = kron(&q1, &q2);
        let na = kron(&n1, &CMat::identity(3, 3));
        let nb = kron(&CMat::identity(2, 2), &n2);
        let pol = PolarizationForm::new(3, q).unwrap();
        let mut a = BTreeMap::new();
        let mut a0 = CVec::zeros(6);
        a0[0] = c(1.0, 0.0); // e0 ⊗ e0
        a.insert(vec![0u32, 0u32], a0);
        Model::Orbit(NilpotentOrbitModel::new(3, vec![na, nb], a, pol).unwrap())
    }

    fn kron(a: &CMat, b: &CMat) -> CMat {
        let (ra, ca) = (a.nrows(), a.ncols());
        let (rb, cb) = (b.nrows(), b.ncols());
        CMat::from_fn(ra * rb, ca * cb, |i, j| {
            a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
        })
    }
}

#[cfg(test)]
pub mod test_fixtures {
    pub use super::presets::{model_a, model_c};
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::presets::*;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn ray_point(r: f64) -> Vec<Complex64> {
        vec![c(r, 0.0)]
    }

    #[test]
    fn model_a_jet_value_is_hand_expanded_exponential() {
        // At z = e^{-2π}: ζ = i, so Ω = e0 + i e1 - 1/2 e2 - i/6 e3.
        let m = model_a();
        let jet = m.jet(&ray_point((-2.0 * PI).exp()), 4).unwrap();
        let v = &jet.coeffs[0];
        let expect = [
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(-0.5, 0.0),
            c(0.0, -1.0 / 6.0),
        ];
        for (k, e) in expect.iter().enumerate() {
            assert!((v[k] - e).norm() < 1e-12, "component {k}: {} vs {e}", v[k]);
        }
    }

    #[test]
    fn model_c_jet_value_is_truncated_exponential_of_i() {
        let m = model_c();
        let jet = m.jet(&ray_point((-2.0 * PI).exp()), 4).unwrap();
        let v = &jet.coeffs[0];
        let i = c(0.0, 1.0);
        for k in 0..5u32 {
            let expect = i.powu(k) / c(factorial_f(k), 0.0);
            assert!((v[k as usize] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_section_has_zero_derivatives() {
        let d = 3;
        let mut q = CMat::zeros(d, d);
        q[(0, 2)] = c(1.0, 0.0);
        q[(1, 1)] = c(-1.0, 0.0);
        q[(2, 0)] = c(1.0, 0.0);
        let pol = PolarizationForm::new(2, q).unwrap();
        let mut a = BTreeMap::new();
        let mut a0 = CVec::zeros(d);
        a0[0] = c(1.0, 0.0);
        a.insert(vec![0u32], a0);
        let m = NilpotentOrbitModel::new(2, vec![CMat::zeros(d, d)], a, pol).unwrap();
        let jet = m.orbit_jet(&ray_point(0.3), 3).unwrap();
        for i in 1..jet.coeffs.len() {
            assert!(vnorm(&jet.coeffs[i]) == 0.0);
        }
    }

    #[test]
    fn orbit_jet_rejects_zero_coordinate_and_flags_branch_cut() {
        let m = model_a();
        assert!(matches!(
            m.jet(&vec![c(0.0, 0.0)], 2),
            Err(Error::Domain(_))
        ));
        let near_cut = vec![Complex64::from_polar(0.1, PI - 1e-8)];
        let jet = m.jet(&near_cut, 2).unwrap();
        assert!(jet.branch_cut_warning);
    }

    #[test]
    fn orbit_jet_flatness_formal_derivative_matches_derived_model() {
        // ∂_z of the jet stream equals the jet of the analytically
        // differentiated section (shifted stream).
        let m = model_a();
        let z = ray_point(0.07);
        let jet = m.jet(&z, 4).unwrap();
        let shifted = jet.formal_derivative(0).unwrap();
        // Independent evaluation: derivative model d/dz [e^{ζN}A] = cN e^{ζN} A
        // with c = -(i/2π)/z; compare raw first derivatives at several orders.
        for extra in 0..4u32 {
            let a = [extra];
            let lhs = shifted.derivative(&a).unwrap();
            let mut up = vec![extra + 1];
            let rhs = jet.derivative(&mut up[..]).unwrap();
            assert!(vnorm(&(&lhs - &rhs)) <= 1e-12 * vnorm(&rhs).max(1.0));
        }
    }

    #[test]
    fn quintic_holomorphic_component_matches_direct_summation() {
        let m = quintic();
        let z0 = c(1e-5, 0.0);
        let jet = m.jet(&[z0], 2).unwrap();
        // oracle: Σ (5k)!/(k!)^5 z^k summed directly in exact f64 factorials
        let mut expect = 0.0_f64;
        for k in 0..6u64 {
            let num: f64 = (1..=5 * k).map(|x| x as f64).product::<f64>().max(1.0);
            let den: f64 = (1..=k).map(|x| x as f64).product::<f64>().max(1.0).powi(5);
            expect += num / den * 1e-5_f64.powi(k as i32);
        }
        let y0 = jet.coeffs[0][0];
        assert!((y0.re - expect).abs() < 1e-12 * expect);
        assert!(y0.im.abs() < 1e-12);
        assert!((y0.re - (1.0 + 120.0e-5)).abs() < 2e-5);
    }

    #[test]
    fn quintic_ode_residual_is_tiny() {
        let m = quintic();
        let Model::PicardFuchs { model, .. } = &m else {
            unreachable!()
        };
        for &r in &[1e-5, 1e-4, 2e-4] {
            let jet = model.pf_jet(c(r, 0.0), 4).unwrap();
            let resid = model.ode_residual(&jet).unwrap();
            assert!(resid < 1e-10, "residual {resid:.3e} at r = {r}");
        }
    }

    #[test]
    fn pf_jet_outside_convergence_region_errors() {
        let m = quintic();
        let Model::PicardFuchs { model, .. } = &m else {
            unreachable!()
        };
        let z = c(0.9 * model.r_max, 0.0);
        assert!(matches!(model.pf_jet(z, 2), Err(Error::Convergence(_))));
    }

    #[test]
    fn theta4_recovers_weight3_pairing_up_to_scale() {
        let m = theta4();
        let q = &m.polarization().q;
        // pattern: antisymmetric, Q(e0,e3) = -Q(e1,e2), all other entries 0
        let q03 = q[(0, 3)];
        assert!(q03.norm() > 0.0);
        let expect = [
            ((0usize, 3usize), 1.0),
            ((3, 0), -1.0),
            ((1, 2), -1.0),
            ((2, 1), 1.0),
        ];
        let mut target = CMat::zeros(4, 4);
        for ((i, j), v) in expect {
            target[(i, j)] = c(v, 0.0) * q03;
        }
        assert!(fnorm(&(q - &target)) < 1e-7 * fnorm(q), "derived Q = {q}");
    }

    #[test]
    fn theta5_recovers_weight4_pairing_up_to_scale() {
        let m = theta5();
        let q = &m.polarization().q;
        let q04 = q[(0, 4)];
        assert!(q04.norm() > 0.0);
        let mut target = CMat::zeros(5, 5);
        for i in 0..5 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            target[(i, 4 - i)] = c(sign, 0.0) * q04;
        }
        assert!(fnorm(&(q - &target)) < 1e-7 * fnorm(q), "derived Q = {q}");
    }

    #[test]
    fn quintic_flat_pairing_annihilates_low_derivatives() {
        let m = quintic();
        let pol = m.polarization();
        for &r in &[1e-5, 1e-4] {
            let jet = m.jet(&[c(r, 0.0)], 3).unwrap();
            let omega = jet.derivative(&[0]).unwrap();
            for k in 0..3u32 {
                let dk = jet.derivative(&[k]).unwrap();
                let v = pol.bilinear(&omega, &dk).norm();
                let scale = vnorm(&omega) * vnorm(&dk) * max_abs(&pol.q);
                assert!(v < 1e-10 * scale, "Q(Ω, ∂^{k}Ω) = {v:.3e} at r = {r}");
            }
        }
    }

    #[test]
    fn decomposition_dims_are_all_one_for_model_a() {
        let m = model_a();
        let jet = m.jet(&ray_point((-2.0 * PI).exp()), 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let dims: Vec<usize> = dec.blocks.iter().map(|b| b.basis.len()).collect();
        assert_eq!(dims, vec![1, 1, 1, 1]);
    }

    #[test]
    fn constant_section_decomposition_reports_rank_drop() {
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
        a.insert(vec![0u32], a0);
        let m = NilpotentOrbitModel::new(3, vec![CMat::zeros(d, d)], a, pol).unwrap();
        let jet = m.orbit_jet(&ray_point(0.3), 2).unwrap();
        match decomposition_at(&jet, &m.polarization, &tols()) {
            Err(Error::RankDrop { level, .. }) => assert_eq!(level, 2),
            other => panic!("expected rank drop, got {other:?}"),
        }
    }

    #[test]
    fn quintic_decomposition_passes_hodge_riemann() {
        let m = quintic();
        let jet = m.jet(&[c(1e-5, 0.0)], 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let dims: Vec<usize> = dec.blocks.iter().map(|b| b.basis.len()).collect();
        assert_eq!(dims, vec![1, 1, 1, 1]);
        let rep = crate::hodge::hodge_riemann_report(&dec, m.polarization(), &tols()).unwrap();
        assert!(rep.pass(), "{}", rep.render_text());
    }

    #[test]
    fn product_orbit_decomposition_has_tensor_dims() {
        let m = product_orbit();
        let z = vec![c(0.04, 0.0), c(0.05, 0.0)];
        let jet = m.jet(&z, 3).unwrap();
        let dec = decomposition_at(&jet, m.polarization(), &tols()).unwrap();
        let mut dims: Vec<(u32, usize)> =
            dec.blocks.iter().map(|b| (b.p, b.basis.len())).collect();
        dims.sort();
        assert_eq!(dims, vec![(0, 1), (1, 2), (2, 2), (3, 1)]);
        let rep = crate::hodge::hodge_riemann_report(&dec, m.polarization(), &tols()).unwrap();
        assert!(rep.pass(), "{}", rep.render_text());
    }

    #[test]
    fn checklist_passes_for_model_a_and_fails_for_broken_nilpotent() {
        let m = model_a();
        let points = vec![ray_point((-2.0 * PI).exp()), ray_point((-4.0 * PI).exp())];
        let rep = wp_geometry_checklist(&m, &points, &tols()).unwrap();
        assert!(rep.pass(), "{}", rep.render_text());
        // Constructed violation: N with N^{n+1} ≠ 0 must be rejected upfront.
        let Model::Orbit(om) = &m else { unreachable!() };
        let mut bad_n = om.nilpotents[0].clone();
        bad_n[(0, 3)] = c(1.0, 0.0); // now N^4 ≠ 0
        let r = NilpotentOrbitModel::new(
            om.weight,
            vec![bad_n],
            om.a_coeffs.clone(),
            om.polarization.clone(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = model_a();
        let text = m.to_json("model_a");
        let back = Model::from_json(&text).unwrap();
        let jet1 = m.jet(&ray_point(0.1), 2).unwrap();
        let jet2 = back.jet(&ray_point(0.1), 2).unwrap();
        for (a, b) in jet1.coeffs.iter().zip(jet2.coeffs.iter()) {
            assert!(vnorm(&(a - b)) < 1e-14);
        }
    }


    #[test]
    fn debug_quintic_pairing_numeric_sampling() {
        // independent route: impose Q(Ω, ∂^k Ω) = 0 at sampled complex
        // points instead of on series coefficients
        let cc = |x: f64| c(x, 0.0);
        let coeffs = vec![
            vec![cc(0.0), cc(-120.0)],
            vec![cc(0.0), cc(-1250.0)],
            vec![cc(0.0), cc(-4375.0)],
            vec![cc(0.0), cc(-6250.0)],
            vec![cc(1.0), cc(-3125.0)],
        ];
        let model = PicardFuchsModel::new(3, coeffs, 1.0 / 3125.0).unwrap();
        let d = 4usize;
        let mut unknowns: Vec<(usize, usize)> = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                unknowns.push((a, b));
            }
        }
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for i in 0..8 {
            let z = Complex64::from_polar(2e-5 + 1e-5 * i as f64, 0.3 * i as f64);
            let jet = model.pf_jet(z, 3).unwrap();
            for k in 1..3u32 {
                let omega = jet.derivative(&[0]).unwrap();
                let dk = jet.derivative(&[k]).unwrap();
                let mut row = vec![c(0.0, 0.0); unknowns.len()];
                for (idx, &(a, b)) in unknowns.iter().enumerate() {
                    row[idx] = omega[a] * dk[b] - omega[b] * dk[a];
                }
                let scale = row.iter().map(|x| x.norm()).fold(0.0, f64::max);
                rows.push(row.iter().map(|x| x / scale).collect());
            }
        }
        let mat = CMat::from_fn(rows.len(), unknowns.len(), |i, j| rows[i][j]);
        let sv = crate::linalg::singular_values(&mat);
        eprintln!("numeric sampling singular values: {sv:?}");
        let ns = nullspace(&mat, 1e-7);
        eprintln!("numeric nullity: {}", ns.len());
        if let Some(v) = ns.first() {
            eprintln!("solution: {v:?}");
        }
    }


    #[test]
    fn debug_symbolic_vs_numeric_phi() {
        // Φ_1(z) = Σ Q_ab y_a y'_b for the antidiagonal pattern, evaluated
        // (a) from the symbolic series assembly, (b) directly.
        let cc = |x: f64| c(x, 0.0);
        let coeffs = vec![
            vec![cc(0.0), cc(-120.0)],
            vec![cc(0.0), cc(-1250.0)],
            vec![cc(0.0), cc(-4375.0)],
            vec![cc(0.0), cc(-6250.0)],
            vec![cc(1.0), cc(-3125.0)],
        ];
        let model = PicardFuchsModel::new(3, coeffs, 1.0 / 3125.0).unwrap();
        let d = 4usize;
        let nmax = 2 * d + 6;
        let table = model.frobenius(nmax);
        let coef = |a: usize, m: usize, mi: usize| -> Complex64 {
            if mi > a || m >= table.a.len() {
                return c(0.0, 0.0);
            }
            table.a[m][a - mi] / c(factorial_f(mi as u32), 0.0)
        };
        // raw-basis pattern Q(e0,e3)=1, Q(e1,e2)=-1, skew
        let mut q = CMat::zeros(d, d);
        q[(0, 3)] = c(1.0, 0.0);
        q[(3, 0)] = c(-1.0, 0.0);
        q[(1, 2)] = c(-1.0, 0.0);
        q[(2, 1)] = c(1.0, 0.0);
        let z = c(1e-4, 0.0);
        let lam = z.ln();
        let k = 1u32;
        // symbolic
        let mut sym = c(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                if q[(a, b)].norm() == 0.0 {
                    continue;
                }
                for m1 in 0..=nmax {
                    for mi1 in 0..=a {
                        let c1 = coef(a, m1, mi1);
                        if c1.norm() == 0.0 { continue; }
                        for m2 in 0..=nmax {
                            for mi2 in 0..=b {
                                let c2 = coef(b, m2, mi2);
                                if c2.norm() == 0.0 { continue; }
                                let w = deriv_weights(m2 as i64, mi2 as u32, k);
                                for (t, &wt) in w.iter().enumerate() {
                                    if wt == 0.0 { continue; }
                                    let zpow = m1 as i64 + m2 as i64 - k as i64;
                                    let lpow = mi1 + mi2 - t;
                                    sym += q[(a, b)] * c1 * c2 * c(wt, 0.0)
                                        * z.powi(zpow as i32) * lam.powu(lpow as u32);
                                }
                            }
                        }
                    }
                }
            }
        }
        // direct: raw y values (undo the component scaling of pf_jet)
        let der = model.eval_derivatives(z, 1).unwrap();
        let mut dir = c(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                dir += q[(a, b)] * der[0][a] * der[1][b];
            }
        }
        eprintln!("symbolic {sym:?} direct {dir:?}");
        // coefficient map of the symbolic series
        let mut acc: BTreeMap<(i64, usize), Complex64> = BTreeMap::new();
        for a in 0..d {
            for b in 0..d {
                if q[(a, b)].norm() == 0.0 { continue; }
                for m1 in 0..=nmax {
                    for mi1 in 0..=a {
                        let c1 = coef(a, m1, mi1);
                        if c1.norm() == 0.0 { continue; }
                        for m2 in 0..=nmax {
                            for mi2 in 0..=b {
                                let c2 = coef(b, m2, mi2);
                                if c2.norm() == 0.0 { continue; }
                                let w = deriv_weights(m2 as i64, mi2 as u32, k);
                                for (t, &wt) in w.iter().enumerate() {
                                    if wt == 0.0 { continue; }
                                    let zpow = m1 as i64 + m2 as i64 - k as i64;
                                    let lpow = mi1 + mi2 - t;
                                    *acc.entry((zpow, lpow)).or_insert(c(0.0,0.0)) +=
                                        q[(a, b)] * c1 * c2 * c(wt, 0.0);
                                }
                            }
                        }
                    }
                }
            }
        }
        for ((zp, lp), v) in acc.iter() {
            if *zp <= 2 && v.norm() > 1e-13 {
                eprintln!("  coef z^{zp} L^{lp}: {v:?}");
            }
        }
    }

    #[test]
    fn malformed_model_file_reports_position() {
        let bad = "{ \"schema_version\": 1, \"name\": \"x\", ";
        assert!(Model::from_json(bad).is_err());
    }
}
