//! Inner-product structure shared by every other module.
//!
//! A [`Space`] is `ℝⁿ` with `⟨u, v⟩ = w Σ uᵢ vᵢ` for one uniform weight `w > 0`.
//! `w = 1` is the Euclidean product; `w = h²` mimics the `L²(Ω)` product on the
//! interior nodes of a uniform grid over the unit square.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Space {
    dim: usize,
    weight: f64,
}

impl Space {
    pub fn euclidean(dim: usize) -> Self {
        Space { dim, weight: 1.0 }
    }

    pub fn weighted(dim: usize, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "space weight must be positive and finite, got {weight}"
            )));
        }
        Ok(Space { dim, weight })
    }

    /// Interior nodes of the uniform `(M+1)×(M+1)` grid on the unit square,
    /// `dim = (M−1)²`, weight `h² = 1/M²`.
    pub fn grid(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::GridTooSmall(m));
        }
        let h = 1.0 / m as f64;
        Ok(Space {
            dim: (m - 1) * (m - 1),
            weight: h * h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.inner_unchecked(u, v))
    }

    pub fn norm(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        Ok(self.norm_unchecked(u))
    }

    /// Inner product without length checks; lengths must already agree.
    #[inline]
    pub(crate) fn inner_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        self.weight * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    #[inline]
    pub(crate) fn norm_unchecked(&self, u: &[f64]) -> f64 {
        self.inner_unchecked(u, u).sqrt()
    }
}

/// `y ← y + a·x`
#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euclidean_inner() {
        let s = Space::euclidean(2);
        assert_eq!(s.inner(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(s.inner(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(s.norm(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(s.norm(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn grid_spaces() {
        let s = Space::grid(2).unwrap();
        assert_eq!((s.dim(), s.weight()), (1, 0.25));
        assert_eq!(s.inner(&[1.0], &[1.0]).unwrap(), 0.25);
        assert_eq!(s.norm(&[2.0]).unwrap(), 1.0);

        let s = Space::grid(4).unwrap();
        assert_eq!((s.dim(), s.weight()), (9, 0.0625));
        let s = Space::grid(16).unwrap();
        assert_eq!((s.dim(), s.weight()), (225, 1.0 / 256.0));
    }

    #[test]
    fn errors() {
        assert_eq!(Space::grid(1), Err(Error::GridTooSmall(1)));
        let s = Space::euclidean(2);
        assert!(matches!(
            s.inner(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(s.norm(&[1.0, 2.0, 3.0]).is_err());
        assert!(Space::weighted(3, 0.0).is_err());
        assert!(Space::weighted(3, -1.0).is_err());
    }

    #[test]
    fn constant_one_integrates_to_one() {
        let mut prev = 0.0;
        for j in 1..8 {
            let s = Space::grid(1 << j).unwrap();
            let one = vec![1.0; s.dim()];
            let v = s.inner(&one, &one).unwrap();
            assert!(v > prev && v < 1.0);
            prev = v;
        }
        assert!(1.0 - prev < 0.02);
    }

    proptest! {
        #[test]
        fn cauchy_schwarz_and_symmetry(
            u in prop::collection::vec(-10.0f64..10.0, 6),
            v in prop::collection::vec(-10.0f64..10.0, 6),
            w in 1e-3f64..10.0,
        ) {
            let s = Space::weighted(6, w).unwrap();
            let uv = s.inner(&u, &v).unwrap();
            prop_assert_eq!(uv, s.inner(&v, &u).unwrap());
            prop_assert!(uv.abs() <= s.norm(&u).unwrap() * s.norm(&v).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn unit_weight_is_euclidean(
            u in prop::collection::vec(-10.0f64..10.0, 5),
            v in prop::collection::vec(-10.0f64..10.0, 5),
        ) {
            let s = Space::weighted(5, 1.0).unwrap();
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            prop_assert_eq!(s.inner(&u, &v).unwrap(), dot);
        }
    }
}
