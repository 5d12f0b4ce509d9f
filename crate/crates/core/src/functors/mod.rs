//! Interpolation constructions on finite-dimensional couples.
//!
//! Every optimized quantity is returned as a [`NormBracket`](crate::NormBracket)
//! whose upper value is attained by the retained witness.
//!
//! Two facts make lattice couples exactly computable:
//!
//! * For `|lambda_k| <= 1`, `sup ||sum_k lambda_k y_k||` in a weighted `l_p`
//!   space equals `||sum_k |y_k|||`: choose `lambda_k` to align every term's
//!   phase with the coordinate it contributes to. The same argument, applied
//!   functional by functional, gives `max_l sum_k |<a_l, y_k>|` for polytope
//!   norms.
//! * The Calderón product `X0^(1-theta) X1^theta` of two weighted `l_p` spaces
//!   is again a weighted `l_p` space ([`lattice_theta_space`]).

mod complex;
pub mod kfunc;
mod lattice;
mod peetre;

pub use complex::{complex_norm_lower, complex_norm_upper, complex_norm_upper_warm, ComplexSolverConfig};
pub use kfunc::k_functional;
pub use lattice::{calderon_factorization, calderon_product_norm, lattice_theta_space, reiterate};
pub use peetre::{gp_norm_upper, peetre_norm_upper, peetre_objective, PeetreConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::cvec;
use crate::C64;

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta = {theta} must lie in [0, 1]")))
    }
}

/// Reiteration parameters; `s = (1 - sigma) theta0 + sigma theta1` is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSpec {
    pub theta0: f64,
    pub theta1: f64,
    pub sigma: f64,
}

impl ThetaSpec {
    pub fn new(theta0: f64, theta1: f64, sigma: f64) -> Result<Self> {
        for v in [theta0, theta1, sigma] {
            check_theta(v)?;
        }
        Ok(ThetaSpec { theta0, theta1, sigma })
    }

    pub fn s(&self) -> f64 {
        (1.0 - self.sigma) * self.theta0 + self.sigma * self.theta1
    }
}

/// `x = sum_{k=-K}^{K} x_k`, used at parameter `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub theta: f64,
    pub window: usize,
    /// `terms[k + window]` is `x_k`.
    #[serde(with = "cvec_rows")]
    pub terms: Vec<Vec<C64>>,
}

impl Representation {
    pub fn new(theta: f64, window: usize, terms: Vec<Vec<C64>>) -> Result<Self> {
        check_theta(theta)?;
        if terms.len() != 2 * window + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * window + 1, got: terms.len() });
        }
        let n = terms[0].len();
        for t in &terms {
            crate::error::check_dim(n, t.len())?;
        }
        Ok(Representation { theta, window, terms })
    }

    /// One term at `k = 0`.
    pub fn trivial(theta: f64, x: &[C64]) -> Self {
        Representation { theta, window: 0, terms: vec![x.to_vec()] }
    }

    pub fn term(&self, k: i64) -> &[C64] {
        &self.terms[(k + self.window as i64) as usize]
    }

    /// The represented element.
    pub fn sum(&self) -> Vec<C64> {
        let n = self.terms[0].len();
        let mut s = vec![C64::new(0.0, 0.0); n];
        for t in &self.terms {
            for (a, b) in s.iter_mut().zip(t) {
                *a += b;
            }
        }
        s
    }

    /// Relative defect of the partial-sum identity against `x`.
    pub fn defect(&self, x: &[C64]) -> f64 {
        let s = self.sum();
        let num: f64 = s.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

mod cvec_rows {
    use super::cvec;
    use crate::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| cvec::to_pairs(r)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Ok(rows.iter().map(|r| cvec::from_pairs(r)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_spec_derives_s() {
        let t = ThetaSpec::new(0.2, 0.8, 0.5).unwrap();
        assert!((t.s() - 0.5).abs() < 1e-15);
        assert_eq!(ThetaSpec::new(0.0, 1.0, 0.3).unwrap().s(), 0.3);
        assert!(ThetaSpec::new(0.0, 1.2, 0.3).is_err());
    }

    #[test]
    fn representation_identity_and_serde() {
        let x = vec![C64::new(1.0, 2.0), C64::new(-1.0, 0.5)];
        let terms = vec![
            vec![C64::new(0.25, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.75, 2.0), C64::new(-1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.5)],
        ];
        let r = Representation::new(0.5, 1, terms).unwrap();
        assert!(r.defect(&x) < 1e-15);
        let back: Representation = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(Representation::new(0.5, 2, vec![x.clone()]).is_err());
    }
}
