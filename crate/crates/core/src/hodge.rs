//! Polarized-Hodge-structure algebra.
//!
//! The polarization is a bilinear form `Q` on `H ≅ ℂ^d`, skew for odd weight
//! and symmetric for even weight.  Two derived pairings are used throughout:
//!
//! * the bilinear `(ξ,η) = (√-1)^n Q(ξ,η)` with no built-in conjugation
//!   (formulas conjugate explicitly), and
//! * `Q₁(x,y) = Q(Cx,ȳ)` with the Weil operator `C`, which is a Hermitian
//!   inner product on a valid decomposition.
//!
//! A Hodge decomposition at a point is a collection of `(p,q)` bases.  The
//! two Hodge-Riemann relations are the validity criteria: the bilinear
//! pairing vanishes between `H^{p,q}` and `H^{p',q'}` unless `p' = n - p`,
//! and `(√-1)^{p-q} Q(φ, φ̄) > 0` on each block.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c, condition_number, conj_vec, fnorm, hermitian_eigenvalues, hermitize, i_pow, inverse,
    mat_from_columns, max_abs, solve, vnorm, CMat, CVec,
};
use crate::report::ValidationReport;
use crate::tol::Tolerances;

/// The polarization `Q` on `ℂ^d` together with its weight.
#[derive(Clone, Debug)]
pub struct PolarizationForm {
    pub weight: u32,
    pub dim: usize,
    pub q: CMat,
}

impl PolarizationForm {
    pub fn new(weight: u32, q: CMat) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::InvalidInput("Q must be square".into()));
        }
        if q.nrows() == 0 {
            return Err(Error::InvalidInput("Q must have positive dimension".into()));
        }
        Ok(PolarizationForm {
            weight,
            dim: q.nrows(),
            q,
        })
    }

    /// Bilinear pairing `(x, y) = (√-1)^n x^T Q y` (no conjugation).
    pub fn bilinear(&self, x: &CVec, y: &CVec) -> Complex64 {
        let qy = &self.q * y;
        // nalgebra's `dot` is the unconjugated product x^T (Qy).
        i_pow(self.weight) * x.dot(&qy)
    }

    /// Sesquilinear pairing `(x, ȳ) = (√-1)^n x^T Q ȳ`; Hermitian for real Q.
    pub fn sesqui(&self, x: &CVec, y: &CVec) -> Complex64 {
        self.bilinear(x, &conj_vec(y))
    }

    /// Parity sign `(-1)^n`.
    pub fn parity(&self) -> f64 {
        if self.weight % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Parity residual, nondegeneracy and realness checks.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut rep = ValidationReport::new("polarization form");
        let scale = fnorm(&self.q).max(1e-300);
        let parity_resid =
            fnorm(&(self.q.transpose() - self.q.scale(self.parity()))) / scale;
        rep.check_residual(
            "parity",
            format!(
                "Q^T = (-1)^n Q with n = {} ({})",
                self.weight,
                if self.weight % 2 == 1 { "skew" } else { "symmetric" }
            ),
            parity_resid,
            tol.residual,
        );
        let cond = condition_number(&self.q);
        rep.check_residual(
            "nondegeneracy",
            "condition number of Q below 1/rank_tol",
            cond,
            tol.max_condition(),
        );
        let imag_resid = self.q.iter().map(|x| x.im * x.im).sum::<f64>().sqrt() / scale;
        rep.check_residual(
            "real entries",
            "Q real, so (x, ȳ) is a Hermitian pairing",
            imag_resid,
            tol.residual,
        );
        rep
    }
}

/// Bases of the `(p,q)` pieces at a point, ordered by descending `p`.
#[derive(Clone, Debug)]
pub struct HodgeBlock {
    pub p: u32,
    pub q: u32,
    pub basis: Vec<CVec>,
}

#[derive(Clone, Debug)]
pub struct HodgeDecompositionAt {
    pub point: Vec<Complex64>,
    pub weight: u32,
    pub dim: usize,
    pub blocks: Vec<HodgeBlock>,
}

impl HodgeDecompositionAt {
    pub fn block(&self, p: u32) -> Option<&HodgeBlock> {
        self.blocks.iter().find(|b| b.p == p)
    }

    pub fn hodge_numbers(&self) -> Vec<(u32, u32, usize)> {
        self.blocks
            .iter()
            .map(|b| (b.p, b.q, b.basis.len()))
            .collect()
    }

    /// Total dimension covered by the block bases.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.len()).sum()
    }

    /// Matrix whose columns are all block basis vectors, descending p.
    pub fn adapted_basis(&self) -> CMat {
        let cols: Vec<CVec> = self
            .blocks
            .iter()
            .flat_map(|b| b.basis.iter().cloned())
            .collect();
        mat_from_columns(self.dim, &cols)
    }

    /// The Weil operator `C` acting as `(√-1)^{p-q}` on each block.
    pub fn weil_operator(&self, tol: &Tolerances) -> Result<WeilOperator> {
        if self.total_dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "blocks span {} of {} dimensions",
                self.total_dim(),
                self.dim
            )));
        }
        let b = self.adapted_basis();
        let binv = inverse(&b, tol.max_condition())?;
        let mut dvals = Vec::with_capacity(self.dim);
        for blk in &self.blocks {
            // (√-1)^{p-q} = i^{p-q mod 4}
            let e = ((blk.p as i64 - blk.q as i64).rem_euclid(4)) as u32;
            for _ in 0..blk.basis.len() {
                dvals.push(i_pow(e));
            }
        }
        let d = CMat::from_diagonal(&CVec::from_vec(dvals));
        let c_mat = &b * d * binv;
        Ok(WeilOperator { matrix: c_mat })
    }
}

/// Block-diagonal `C` with `C|_{H^{p,q}} = (√-1)^{p-q}`, in ambient coordinates.
#[derive(Clone, Debug)]
pub struct WeilOperator {
    pub matrix: CMat,
}

impl WeilOperator {
    /// `Q₁(x, y) = Q(Cx, ȳ)` as a matrix: `C^T Q` applied sesquilinearly.
    pub fn q1_matrix(&self, pol: &PolarizationForm) -> CMat {
        self.matrix.transpose() * &pol.q
    }

    /// Invariants: `C² = (-1)^n Id` and `Q₁` Hermitian positive definite.
    pub fn validate(&self, pol: &PolarizationForm, tol: &Tolerances) -> ValidationReport {
        let mut rep = ValidationReport::new("Weil operator");
        let n = self.matrix.nrows();
        let c2 = &self.matrix * &self.matrix;
        let target = CMat::identity(n, n).scale(pol.parity());
        let resid = fnorm(&(c2 - target)) / (n as f64).sqrt();
        rep.check_residual("involution", "C^2 = (-1)^n Id", resid, tol.residual);
        let q1 = self.q1_matrix(pol);
        let (_, herm_resid) = hermitize(&q1);
        rep.check_residual("Q1 hermitian", "Q1(x,y) = Q(Cx, ȳ) Hermitian", herm_resid, tol.residual);
        let ev = hermitian_eigenvalues(&q1);
        let min_ev = ev.first().copied().unwrap_or(f64::NEG_INFINITY);
        let scale = ev.last().copied().unwrap_or(1.0).abs().max(1e-300);
        rep.check_at_least(
            "Q1 positive",
            "Q1 positive definite (min eigenvalue, relative)",
            min_ev / scale,
            tol.rank,
        );
        rep
    }
}

/// Parity/nondegeneracy report for a polarization (free function per the
/// library surface; delegates to the method).
pub fn validate_polarization(pol: &PolarizationForm, tol: &Tolerances) -> Result<ValidationReport> {
    if pol.dim < 2 {
        return Err(Error::InvalidInput(
            "polarization needs dimension at least 2".into(),
        ));
    }
    Ok(pol.validate(tol))
}

/// Both Hodge-Riemann relations on a decomposition: off-block bilinear
/// pairings vanish unless `p' = n - p`, and each block's Hermitian form
/// `(√-1)^{p-q} Q(φ, φ̄)` is positive definite.
pub fn hodge_riemann_report(
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    tol: &Tolerances,
) -> Result<ValidationReport> {
    if dec.total_dim() != pol.dim {
        return Err(Error::DimensionMismatch(format!(
            "decomposition spans {} of {} dimensions",
            dec.total_dim(),
            pol.dim
        )));
    }
    let mut rep = ValidationReport::new("Hodge-Riemann relations");
    let n = dec.weight;

    // Conjugation symmetry: H^{p,q} and conj(H^{q,p}) span the same space.
    let mut conj_resid = 0.0_f64;
    for blk in &dec.blocks {
        if let Some(other) = dec.block(blk.q) {
            let target = mat_from_columns(dec.dim, &blk.basis);
            let source: Vec<CVec> = other.basis.iter().map(conj_vec).collect();
            conj_resid = conj_resid.max(span_residual(&target, &source));
        } else {
            conj_resid = f64::INFINITY;
        }
    }
    rep.check_residual(
        "conjugation symmetry",
        "H^{p,q} = conj(H^{q,p}) as subspaces",
        conj_resid,
        tol.residual,
    );

    // First relation.
    let mut off = 0.0_f64;
    for b1 in &dec.blocks {
        for b2 in &dec.blocks {
            if b2.p == n - b1.p {
                continue;
            }
            for x in &b1.basis {
                for y in &b2.basis {
                    let v = pol.bilinear(x, y).norm() / (vnorm(x) * vnorm(y)).max(1e-300);
                    off = off.max(v / max_abs(&pol.q).max(1e-300));
                }
            }
        }
    }
    rep.check_residual(
        "first relation",
        "(√-1)^n Q(H^{p,q}, H^{p',q'}) = 0 unless p' = n-p",
        off,
        tol.residual,
    );

    // Second relation, block by block.
    for blk in &dec.blocks {
        let k = blk.basis.len();
        if k == 0 {
            continue;
        }
        let mut gram = CMat::zeros(k, k);
        for (i, x) in blk.basis.iter().enumerate() {
            for (j, y) in blk.basis.iter().enumerate() {
                // (√-1)^{p-q} Q(x, ȳ), normalized columns.
                let e = ((blk.p as i64 - blk.q as i64).rem_euclid(4)) as u32;
                gram[(i, j)] = i_pow(e) * (i_pow(pol.weight).inv() * pol.sesqui(x, y))
                    / c(vnorm(x) * vnorm(y), 0.0);
            }
        }
        let ev = hermitian_eigenvalues(&gram);
        let min_ev = ev.first().copied().unwrap_or(f64::NEG_INFINITY);
        let scale = ev.iter().fold(0.0_f64, |a, &b| a.max(b.abs())).max(1e-300);
        rep.check_at_least(
            format!("second relation H^{{{},{}}}", blk.p, blk.q),
            "(√-1)^{p-q} Q(φ, φ̄) > 0 on the block (min eigenvalue, relative)",
            min_ev / scale,
            tol.rank,
        );
    }
    Ok(rep)
}

/// How far the columns of `source` stick out of the column span of `target`.
fn span_residual(target: &CMat, source: &[CVec]) -> f64 {
    let svd = target.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-13 * smax)
        .count();
    let mut worst = 0.0_f64;
    for v in source {
        let nv = vnorm(v).max(1e-300);
        let mut residual = v.clone();
        for k in 0..rank {
            let uk: CVec = u.column(k).into();
            let coef = uk.dotc(v);
            residual -= uk.scale_complex(coef);
        }
        worst = worst.max(vnorm(&residual) / nv);
    }
    worst
}

trait ScaleComplex {
    fn scale_complex(&self, k: Complex64) -> CVec;
}
impl ScaleComplex for CVec {
    fn scale_complex(&self, k: Complex64) -> CVec {
        self.map(|x| x * k)
    }
}

/// `Q₁`-orthogonal projection of `v` onto `H^{p, n-p}`, via a Gram solve in
/// the user-supplied block basis (bases are not orthonormalized).
pub fn project_pq(
    v: &CVec,
    dec: &HodgeDecompositionAt,
    pol: &PolarizationForm,
    p: u32,
    tol: &Tolerances,
) -> Result<CVec> {
    let blk = dec
        .block(p)
        .ok_or_else(|| Error::InvalidInput(format!("no block with p = {p}")))?;
    let k = blk.basis.len();
    if k == 0 {
        return Ok(CVec::zeros(dec.dim));
    }
    // Within a block, Q1(x,y) = (√-1)^{p-q} Q(x, ȳ); blocks are mutually
    // Q1-orthogonal by the first Hodge-Riemann relation, so the Gram solve
    // against this block alone realizes the direct-sum component.
    let e = ((blk.p as i64 - blk.q as i64).rem_euclid(4)) as u32;
    let phase = i_pow(e) * i_pow(pol.weight).inv();
    // Scale-normalize basis columns for conditioning only; the projection is
    // invariant under per-column scaling.
    let scaled: Vec<CVec> = blk
        .basis
        .iter()
        .map(|b| b.scale(1.0 / vnorm(b).max(1e-300)))
        .collect();
    let mut gram = CMat::zeros(k, k);
    let mut rhs = CVec::zeros(k);
    for (i, bi) in scaled.iter().enumerate() {
        for (j, bj) in scaled.iter().enumerate() {
            gram[(i, j)] = phase * pol.sesqui(bj, bi);
        }
        rhs[i] = phase * pol.sesqui(v, bi);
    }
    let cond = condition_number(&gram);
    if !cond.is_finite() || cond > tol.max_condition() {
        return Err(Error::SingularGram {
            cond,
            max: tol.max_condition(),
        });
    }
    let coef = solve(&gram, &rhs, tol.max_condition())?;
    let mut out = CVec::zeros(dec.dim);
    for (ci, bi) in coef.iter().zip(scaled.iter()) {
        out += bi.scale_complex(*ci);
    }
    Ok(out)
}
