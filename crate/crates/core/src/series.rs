//! Truncated power series in m holomorphic variables `w` and their
//! conjugates `w̄`, both sides cut at a fixed total degree.
//!
//! A real-analytic germ at a point is stored as
//! `f(w, w̄) = Σ_{|a|≤r, |b|≤r} c_{a,b} w^a w̄^b`.
//! Since the period section is holomorphic, its pairing against its own
//! conjugate produces exactly this shape, and every metric / curvature
//! quantity of interest is a finite algebraic combination of such germs.
//! Multiplication, inversion, logarithm and the two derivations `∂_i`
//! (shift in `a`) and `∂̄_j` (shift in `b`) are all exact on the retained
//! coefficients, which is what makes the closed-form evaluation path
//! independent of finite differencing.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;

use crate::linalg::{c, CVec};

/// Multi-indices of `vars` variables with total degree ≤ `order`,
/// plus the tables needed for convolution and differentiation.
#[derive(Debug)]
pub struct SeriesSpace {
    pub vars: usize,
    pub order: usize,
    /// All multi-indices, graded (total degree, then lex).
    pub monos: Vec<Vec<u32>>,
    pos: HashMap<Vec<u32>, usize>,
    /// `sum_idx[i][j]` = position of `monos[i] + monos[j]`, if retained.
    sum_idx: Vec<Vec<Option<usize>>>,
    /// `shift[v][i]` = position of `monos[i] + e_v`, if retained.
    shift: Vec<Vec<Option<usize>>>,
}

fn enumerate_monos(vars: usize, order: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; vars];
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, v: usize, left: u32) {
        if v + 1 == cur.len() {
            cur[v] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[v] = k;
            rec(out, cur, v + 1, left - k);
        }
    }
    for deg in 0..=order as u32 {
        if vars == 0 {
            if deg == 0 {
                out.push(vec![]);
            }
            continue;
        }
        rec(&mut out, &mut cur, 0, deg);
    }
    out
}

impl SeriesSpace {
    pub fn new(vars: usize, order: usize) -> Arc<SeriesSpace> {
        let monos = enumerate_monos(vars, order);
        let mut pos = HashMap::new();
        for (i, m) in monos.iter().enumerate() {
            pos.insert(m.clone(), i);
        }
        let n = monos.len();
        let mut sum_idx = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                let s: Vec<u32> = monos[i]
                    .iter()
                    .zip(monos[j].iter())
                    .map(|(a, b)| a + b)
                    .collect();
                sum_idx[i][j] = pos.get(&s).copied();
            }
        }
        let mut shift = vec![vec![None; n]; vars];
        for v in 0..vars {
            for i in 0..n {
                let mut s = monos[i].clone();
                s[v] += 1;
                shift[v][i] = pos.get(&s).copied();
            }
        }
        Arc::new(SeriesSpace {
            vars,
            order,
            monos,
            pos,
            sum_idx,
            shift,
        })
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn index_of(&self, mono: &[u32]) -> Option<usize> {
        self.pos.get(mono).copied()
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.monos[i].iter().sum()
    }
}

/// Scalar bi-series over a shared space: index = hol * len + antihol.
#[derive(Clone, Debug)]
pub struct BiSeries {
    pub space: Arc<SeriesSpace>,
    pub coef: Vec<Complex64>,
}

impl BiSeries {
    pub fn zero(space: &Arc<SeriesSpace>) -> Self {
        let n = space.len();
        BiSeries {
            space: space.clone(),
            coef: vec![c(0.0, 0.0); n * n],
        }
    }

    pub fn constant(space: &Arc<SeriesSpace>, v: Complex64) -> Self {
        let mut s = Self::zero(space);
        s.coef[0] = v;
        s
    }

    #[inline]
    pub fn at(&self, ih: usize, ia: usize) -> Complex64 {
        self.coef[ih * self.space.len() + ia]
    }

    #[inline]
    pub fn at_mut(&mut self, ih: usize, ia: usize) -> &mut Complex64 {
        let n = self.space.len();
        &mut self.coef[ih * n + ia]
    }

    /// Value at the base point.
    pub fn val(&self) -> Complex64 {
        self.coef[0]
    }

    pub fn add(&self, o: &BiSeries) -> BiSeries {
        let mut r = self.clone();
        for (a, b) in r.coef.iter_mut().zip(o.coef.iter()) {
            *a += *b;
        }
        r
    }

    pub fn sub(&self, o: &BiSeries) -> BiSeries {
        let mut r = self.clone();
        for (a, b) in r.coef.iter_mut().zip(o.coef.iter()) {
            *a -= *b;
        }
        r
    }

    pub fn neg(&self) -> BiSeries {
        let mut r = self.clone();
        for a in r.coef.iter_mut() {
            *a = -*a;
        }
        r
    }

    pub fn scale(&self, k: Complex64) -> BiSeries {
        let mut r = self.clone();
        for a in r.coef.iter_mut() {
            *a *= k;
        }
        r
    }

    pub fn mul(&self, o: &BiSeries) -> BiSeries {
        let n = self.space.len();
        let mut r = BiSeries::zero(&self.space);
        let sum = &self.space.sum_idx;
        for h1 in 0..n {
            for a1 in 0..n {
                let x = self.coef[h1 * n + a1];
                if x == c(0.0, 0.0) {
                    continue;
                }
                for h2 in 0..n {
                    let Some(h) = sum[h1][h2] else { continue };
                    for a2 in 0..n {
                        let y = o.coef[h2 * n + a2];
                        if y == c(0.0, 0.0) {
                            continue;
                        }
                        if let Some(a) = sum[a1][a2] {
                            r.coef[h * n + a] += x * y;
                        }
                    }
                }
            }
        }
        r
    }

    /// ∂/∂w_v (holomorphic derivation).
    pub fn dh(&self, v: usize) -> BiSeries {
        let n = self.space.len();
        let mut r = BiSeries::zero(&self.space);
        for h in 0..n {
            if let Some(hs) = self.space.shift[v][h] {
                let factor = (self.space.monos[h][v] + 1) as f64;
                for a in 0..n {
                    r.coef[h * n + a] = self.coef[hs * n + a].scale(factor);
                }
            }
        }
        r
    }

    /// ∂/∂w̄_v (antiholomorphic derivation).
    pub fn da(&self, v: usize) -> BiSeries {
        let n = self.space.len();
        let mut r = BiSeries::zero(&self.space);
        for a in 0..n {
            if let Some(as_) = self.space.shift[v][a] {
                let factor = (self.space.monos[a][v] + 1) as f64;
                for h in 0..n {
                    r.coef[h * n + a] = self.coef[h * n + as_].scale(factor);
                }
            }
        }
        r
    }

    fn unit_part(&self) -> Result<(Complex64, BiSeries), crate::error::Error> {
        let c0 = self.coef[0];
        if c0.norm() == 0.0 {
            return Err(crate::error::Error::Degeneracy(
                "series has zero constant term; cannot invert or take log".into(),
            ));
        }
        let mut u = self.scale(c0.inv());
        u.coef[0] = c(0.0, 0.0);
        Ok((c0, u))
    }

    /// Multiplicative inverse (constant term must be nonzero).
    pub fn inv(&self) -> Result<BiSeries, crate::error::Error> {
        let (c0, u) = self.unit_part()?;
        // 1/f = c0^{-1} Σ (-u)^k; u has no constant term so the sum is finite.
        let kmax = 2 * self.space.order;
        let mut acc = BiSeries::constant(&self.space, c(1.0, 0.0));
        let mut pow = BiSeries::constant(&self.space, c(1.0, 0.0));
        for k in 1..=kmax {
            pow = pow.mul(&u);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc = acc.add(&pow.scale(c(sign, 0.0)));
        }
        Ok(acc.scale(c0.inv()))
    }

    /// ln f, principal branch on the constant term.
    pub fn ln(&self) -> Result<BiSeries, crate::error::Error> {
        let (c0, u) = self.unit_part()?;
        let kmax = 2 * self.space.order;
        let mut acc = BiSeries::constant(&self.space, c0.ln());
        let mut pow = BiSeries::constant(&self.space, c(1.0, 0.0));
        for k in 1..=kmax {
            pow = pow.mul(&u);
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            acc = acc.add(&pow.scale(c(sign / k as f64, 0.0)));
        }
        Ok(acc)
    }
}

/// Vector-valued bi-series (one `BiSeries` per ambient component).
#[derive(Clone, Debug)]
pub struct VSeries {
    pub comps: Vec<BiSeries>,
}

impl VSeries {
    pub fn zero(space: &Arc<SeriesSpace>, dim: usize) -> Self {
        VSeries {
            comps: vec![BiSeries::zero(space); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn add(&self, o: &VSeries) -> VSeries {
        VSeries {
            comps: self
                .comps
                .iter()
                .zip(o.comps.iter())
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &VSeries) -> VSeries {
        VSeries {
            comps: self
                .comps
                .iter()
                .zip(o.comps.iter())
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale_series(&self, s: &BiSeries) -> VSeries {
        VSeries {
            comps: self.comps.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn scale(&self, k: Complex64) -> VSeries {
        VSeries {
            comps: self.comps.iter().map(|a| a.scale(k)).collect(),
        }
    }

    pub fn dh(&self, v: usize) -> VSeries {
        VSeries {
            comps: self.comps.iter().map(|a| a.dh(v)).collect(),
        }
    }

    pub fn da(&self, v: usize) -> VSeries {
        VSeries {
            comps: self.comps.iter().map(|a| a.da(v)).collect(),
        }
    }

    pub fn val(&self) -> CVec {
        CVec::from_iterator(self.comps.len(), self.comps.iter().map(|a| a.val()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space1() -> Arc<SeriesSpace> {
        SeriesSpace::new(1, 4)
    }

    #[test]
    fn mono_enumeration_counts() {
        assert_eq!(SeriesSpace::new(1, 4).len(), 5);
        assert_eq!(SeriesSpace::new(2, 4).len(), 15);
    }

    #[test]
    fn product_and_derivative_match_polynomials() {
        // f = 1 + 2w + w̄, g = w  =>  fg = w + 2w² + w w̄
        let sp = space1();
        let mut f = BiSeries::constant(&sp, c(1.0, 0.0));
        *f.at_mut(1, 0) = c(2.0, 0.0);
        *f.at_mut(0, 1) = c(1.0, 0.0);
        let mut g = BiSeries::zero(&sp);
        *g.at_mut(1, 0) = c(1.0, 0.0);
        let fg = f.mul(&g);
        assert_eq!(fg.at(1, 0), c(1.0, 0.0));
        assert_eq!(fg.at(2, 0), c(2.0, 0.0));
        assert_eq!(fg.at(1, 1), c(1.0, 0.0));
        // ∂(fg) = 1 + 4w + w̄ at coefficient level
        let d = fg.dh(0);
        assert_eq!(d.at(0, 0), c(1.0, 0.0));
        assert_eq!(d.at(1, 0), c(4.0, 0.0));
        assert_eq!(d.at(0, 1), c(1.0, 0.0));
    }

    #[test]
    fn inverse_and_log_coefficients() {
        // f = 1 + w: 1/f = 1 - w + w² - ..., ln f = w - w²/2 + w³/3 - ...
        let sp = space1();
        let mut f = BiSeries::constant(&sp, c(1.0, 0.0));
        *f.at_mut(1, 0) = c(1.0, 0.0);
        let inv = f.inv().unwrap();
        assert!((inv.at(2, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((inv.at(3, 0) - c(-1.0, 0.0)).norm() < 1e-14);
        let lnf = f.ln().unwrap();
        assert!((lnf.at(1, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((lnf.at(2, 0) - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((lnf.at(3, 0) - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mixed_log_second_derivative() {
        // f = 1 + w w̄: ∂∂̄ ln f at 0 equals 1.
        let sp = space1();
        let mut f = BiSeries::constant(&sp, c(1.0, 0.0));
        *f.at_mut(1, 1) = c(1.0, 0.0);
        let v = f.ln().unwrap().dh(0).da(0).val();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
    }
}
