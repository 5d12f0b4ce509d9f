use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::annulus::{boundary_norm_f_refined, LaurentFamily};
use crate::error::{Error, Result};
use crate::spaces::{sample_complex_vector, Couple};
use crate::{seeds, C64};

/// Random families in the unit ball of `F` whose coefficients vanish on `|k| <= offset`.
///
/// Coefficient `c_k` is Gaussian times `e^(-max(k, 0))` so both circles carry
/// comparable mass before the family is scaled to `||f||_F = 1` (slightly below,
/// to absorb the error of the sup estimate).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFamilySampler {
    pub seed: u64,
    pub degree: usize,
    pub offset: usize,
}

const SHRINK: f64 = 1.0 - 1e-9;

impl EffectiveFamilySampler {
    pub fn new(seed: u64, degree: usize, offset: usize) -> Result<Self> {
        if offset >= degree {
            return Err(Error::InvalidParameter(format!("offset {offset} must be below the degree {degree}")));
        }
        Ok(EffectiveFamilySampler { seed, degree, offset })
    }

    /// The `index`-th family for `couple`.
    pub fn sample(&self, couple: &Couple, index: u64) -> Result<LaurentFamily> {
        ball_family(couple, self.degree, Some(self.offset), seeds::derive(self.seed, index))
    }
}

/// A random family in the unit ball of `F`, with the modes `|k| <= skip` zeroed.
pub(crate) fn ball_family(couple: &Couple, degree: usize, skip: Option<usize>, seed: u64) -> Result<LaurentFamily> {
    let mut rng = seeds::rng(seed);
    let n = couple.dim();
    let d = degree as i64;
    let mut f = LaurentFamily::zeros(n, degree);
    // a random decay rate keeps low and high modes both represented
    let decay: f64 = rng.random_range(0.0..0.5);
    for k in -d..=d {
        let v = sample_complex_vector(&mut rng, n);
        if skip.is_none_or(|s| k.unsigned_abs() as usize > s) {
            let s = (-(k.max(0) as f64) - decay * k.unsigned_abs() as f64).exp();
            f.set_coeff(k, v.into_iter().map(|c| c * s).collect());
        }
    }
    let norm = boundary_norm_f_refined(&f, couple)?;
    if norm == 0.0 {
        return Ok(f);
    }
    Ok(f.scaled(SHRINK / norm))
}

/// A family's value at `e^theta` pushed through `rows`.
pub(crate) fn image_at(rows: &[Vec<C64>], f: &LaurentFamily, theta: f64) -> Vec<C64> {
    crate::operators::apply_rows(rows, &f.eval_at_theta(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::{boundary_norm_f, AnnulusSpec};
    use crate::spaces::GenConfig;

    #[test]
    fn samples_respect_support_and_norm() {
        let gen = GenConfig { seed: 4, polytope_prob: 0.3, ..GenConfig::default() };
        for i in 0..20 {
            let cp = gen.couple_at(i);
            let s = EffectiveFamilySampler::new(i, 12, (i % 5) as usize).unwrap();
            let f = s.sample(&cp, 3).unwrap();
            for k in -(s.offset as i64)..=s.offset as i64 {
                assert!(f.coeff(k).iter().all(|c| c.norm() == 0.0));
            }
            let fine = boundary_norm_f(&f, &cp, &AnnulusSpec::new(8192).unwrap()).unwrap();
            assert!(fine.value <= 1.0, "{}", fine.value);
            assert!(fine.value > 0.99);
            assert_eq!(s.sample(&cp, 3).unwrap(), f);
        }
        assert!(EffectiveFamilySampler::new(0, 4, 4).is_err());
    }
}
