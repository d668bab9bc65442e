//! Truncated Taylor data of the period section at a base point.
//!
//! The jet is the single source of all derivatives used downstream: a map
//! from multi-indices `a` with `|a| ≤ order` to the Taylor coefficient
//! `∂^a Ω(z₀) / a!` in `ℂ^d`.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, vnorm, CVec};
use crate::series::{SeriesSpace, VSeries};

/// Order-`order` Taylor coefficients of Ω at `z0` (coefficients, not raw
/// derivatives: the entry at `a` is `∂^a Ω / a!`).
#[derive(Clone, Debug)]
pub struct JetSection {
    pub z0: Vec<Complex64>,
    pub order: usize,
    pub dim: usize,
    pub space: Arc<SeriesSpace>,
    /// Indexed by `space` monomial position.
    pub coeffs: Vec<CVec>,
    /// Set when the base point sits within 1e-6 of the branch cut of a
    /// logarithmic direction.
    pub branch_cut_warning: bool,
}

pub const MAX_JET_ORDER: usize = 4;

impl JetSection {
    pub fn new(z0: Vec<Complex64>, order: usize, dim: usize, coeffs: Vec<CVec>) -> Result<Self> {
        if order > MAX_JET_ORDER {
            return Err(Error::Parameter(format!(
                "jet order {order} exceeds supported maximum {MAX_JET_ORDER}"
            )));
        }
        let space = SeriesSpace::new(z0.len(), order);
        if coeffs.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} jet coefficients, got {}",
                space.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(
                "jet coefficient has wrong ambient dimension".into(),
            ));
        }
        if vnorm(&coeffs[0]) == 0.0 {
            return Err(Error::Degeneracy(
                "jet value at the base point vanishes".into(),
            ));
        }
        Ok(JetSection {
            z0,
            order,
            dim,
            space,
            coeffs,
            branch_cut_warning: false,
        })
    }

    pub fn vars(&self) -> usize {
        self.z0.len()
    }

    /// Taylor coefficient at the multi-index, if within order.
    pub fn coeff(&self, a: &[u32]) -> Option<&CVec> {
        self.space.index_of(a).map(|i| &self.coeffs[i])
    }

    /// Raw derivative `∂^a Ω(z0)` = a! · coefficient.
    pub fn derivative(&self, a: &[u32]) -> Result<CVec> {
        let i = self.space.index_of(a).ok_or(Error::Order {
            have: self.order,
            need: a.iter().sum::<u32>() as usize,
            what: "requested derivative",
        })?;
        let fact: f64 = a
            .iter()
            .map(|&k| (1..=k as u64).product::<u64>() as f64)
            .product();
        Ok(self.coeffs[i].scale(fact))
    }

    /// The jet as a holomorphic vector series in `w = z - z0`.
    pub fn as_series(&self) -> VSeries {
        let n = self.space.len();
        let mut v = VSeries::zero(&self.space, self.dim);
        for (i, coeff) in self.coeffs.iter().enumerate() {
            for (k, comp) in v.comps.iter_mut().enumerate() {
                *comp.at_mut(i, 0) = coeff[k];
            }
        }
        let _ = n;
        v
    }

    /// Require at least the given order.
    pub fn require_order(&self, need: usize, what: &'static str) -> Result<()> {
        if self.order < need {
            return Err(Error::Order {
                have: self.order,
                need,
                what,
            });
        }
        Ok(())
    }

    /// Rescale the section by a holomorphic gauge factor given through its
    /// own Taylor coefficients at `z0` (constant term must not vanish).
    /// All metric and curvature scalars are invariant under this.
    pub fn rescaled(&self, gauge: &[(Vec<u32>, Complex64)]) -> Result<JetSection> {
        let mut f = crate::series::BiSeries::zero(&self.space);
        for (a, v) in gauge {
            let i = self.space.index_of(a).ok_or_else(|| {
                Error::Parameter("gauge coefficient beyond jet order".into())
            })?;
            *f.at_mut(i, 0) = *v;
        }
        if f.val().norm() == 0.0 {
            return Err(Error::Degeneracy("gauge factor vanishes at base point".into()));
        }
        let scaled = self.as_series().scale_series(&f);
        let coeffs: Vec<CVec> = (0..self.space.len())
            .map(|i| {
                CVec::from_iterator(self.dim, scaled.comps.iter().map(|comp| comp.at(i, 0)))
            })
            .collect();
        JetSection::new(self.z0.clone(), self.order, self.dim, coeffs)
    }

    /// Formal partial derivative of the jet: an order-(r-1) jet of ∂_v Ω.
    pub fn formal_derivative(&self, v: usize) -> Result<JetSection> {
        if self.order == 0 {
            return Err(Error::Order {
                have: 0,
                need: 1,
                what: "formal derivative",
            });
        }
        let new_space = SeriesSpace::new(self.vars(), self.order - 1);
        let mut coeffs = Vec::with_capacity(new_space.len());
        for mono in &new_space.monos {
            let mut up = mono.clone();
            up[v] += 1;
            let i = self.space.index_of(&up).expect("shift stays in range");
            coeffs.push(self.coeffs[i].scale((mono[v] + 1) as f64));
        }
        let mut jet = JetSection::new(self.z0.clone(), self.order - 1, self.dim, coeffs)?;
        jet.branch_cut_warning = self.branch_cut_warning;
        Ok(jet)
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

/// Complex one, shorthand used by jet builders.
pub fn one() -> Complex64 {
    c(1.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_from_slice;

    #[test]
    fn derivative_scales_by_factorial() {
        let coeffs = vec![
            vec_from_slice(&[c(1.0, 0.0)]),
            vec_from_slice(&[c(2.0, 0.0)]),
            vec_from_slice(&[c(3.0, 0.0)]),
        ];
        let jet = JetSection::new(vec![c(0.5, 0.0)], 2, 1, coeffs).unwrap();
        let d2 = jet.derivative(&[2]).unwrap();
        assert!((d2[0] - c(6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_value_rejected() {
        let coeffs = vec![
            vec_from_slice(&[c(0.0, 0.0)]),
            vec_from_slice(&[c(1.0, 0.0)]),
        ];
        assert!(JetSection::new(vec![c(0.5, 0.0)], 1, 1, coeffs).is_err());
    }

    #[test]
    fn formal_derivative_shifts_stream() {
        // Ω = 1 + 2w + 3w² -> ∂Ω = 2 + 6w
        let coeffs = vec![
            vec_from_slice(&[c(1.0, 0.0)]),
            vec_from_slice(&[c(2.0, 0.0)]),
            vec_from_slice(&[c(3.0, 0.0)]),
        ];
        let jet = JetSection::new(vec![c(0.5, 0.0)], 2, 1, coeffs).unwrap();
        let d = jet.formal_derivative(0).unwrap();
        assert!((d.coeffs[0][0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((d.coeffs[1][0] - c(6.0, 0.0)).norm() < 1e-15);
    }
}
