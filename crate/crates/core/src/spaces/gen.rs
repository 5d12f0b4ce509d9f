use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Couple, Exponent, NormModel};
use crate::{seeds, C64};

/// Distribution of random test instances.
///
/// Dimension is uniform on `[dim_min, dim_max]`; each endpoint draws its exponent
/// uniformly from `p_values` and independent log-weights uniform on
/// `[log_weight_min, log_weight_max]`. With probability `polytope_prob` an
/// endpoint is instead a polytope norm whose functional count is uniform on
/// `[functionals_min, functionals_max]` (raised to the dimension if smaller) with
/// standard complex Gaussian entries. Vectors have independent standard normal
/// real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub seed: u64,
    pub dim_min: usize,
    pub dim_max: usize,
    pub p_values: Vec<Exponent>,
    pub log_weight_min: f64,
    pub log_weight_max: f64,
    pub polytope_prob: f64,
    pub functionals_min: usize,
    pub functionals_max: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            dim_min: 1,
            dim_max: 6,
            p_values: vec![
                Exponent::Finite(1.0),
                Exponent::Finite(1.5),
                Exponent::Finite(2.0),
                Exponent::Finite(4.0),
                Exponent::Infinity,
            ],
            log_weight_min: -1.5,
            log_weight_max: 1.5,
            polytope_prob: 0.0,
            functionals_min: 2,
            functionals_max: 8,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidParameter(m.to_string()));
        if self.dim_min == 0 || self.dim_min > self.dim_max {
            return bad("dimension range must satisfy 1 <= dim_min <= dim_max");
        }
        if self.p_values.is_empty() {
            return bad("p_values must be nonempty");
        }
        if self.p_values.iter().any(|p| matches!(p, Exponent::Finite(q) if !(*q >= 1.0 && q.is_finite()))) {
            return bad("every exponent must be >= 1");
        }
        if !(self.log_weight_min <= self.log_weight_max)
            || !self.log_weight_min.is_finite()
            || !self.log_weight_max.is_finite()
        {
            return bad("log-weight range must be finite and ordered");
        }
        if !(0.0..=1.0).contains(&self.polytope_prob) {
            return bad("polytope_prob must lie in [0, 1]");
        }
        if self.functionals_min == 0 || self.functionals_min > self.functionals_max {
            return bad("functional count range must satisfy 1 <= min <= max");
        }
        Ok(())
    }

    /// The couple determined by `seed`.
    pub fn random_couple(&self) -> Couple {
        self.sample_couple(&mut seeds::rng(self.seed))
    }

    /// The `index`-th couple of a sweep; independent of other indices.
    pub fn couple_at(&self, index: u64) -> Couple {
        self.sample_couple(&mut seeds::child_rng(self.seed, index))
    }

    /// A vector of dimension `n` determined by `seed`.
    pub fn random_vector(&self, n: usize) -> Vec<C64> {
        sample_complex_vector(&mut seeds::child_rng(self.seed, u64::MAX), n)
    }

    pub fn sample_couple<R: Rng>(&self, rng: &mut R) -> Couple {
        let n = rng.random_range(self.dim_min..=self.dim_max);
        let s0 = self.sample_space(rng, n);
        let s1 = self.sample_space(rng, n);
        Couple::new(s0, s1).expect("equal dimensions")
    }

    pub fn sample_lattice_space<R: Rng>(&self, rng: &mut R, n: usize) -> NormModel {
        let p = self.p_values[rng.random_range(0..self.p_values.len())];
        let weights = (0..n)
            .map(|_| {
                if self.log_weight_min == self.log_weight_max {
                    self.log_weight_min.exp()
                } else {
                    rng.random_range(self.log_weight_min..=self.log_weight_max).exp()
                }
            })
            .collect();
        NormModel::weighted_lp(p, weights).expect("valid generated weights")
    }

    pub fn sample_space<R: Rng>(&self, rng: &mut R, n: usize) -> NormModel {
        if self.polytope_prob > 0.0 && rng.random_bool(self.polytope_prob) {
            loop {
                let m = rng.random_range(self.functionals_min..=self.functionals_max).max(n);
                let f = (0..m).map(|_| sample_complex_vector(rng, n)).collect();
                if let Ok(model) = NormModel::polytope(f) {
                    return model;
                }
            }
        }
        self.sample_lattice_space(rng, n)
    }
}

pub fn sample_complex_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_couple() {
        let cfg = GenConfig { seed: 42, polytope_prob: 0.5, ..GenConfig::default() };
        assert_eq!(cfg.random_couple(), cfg.random_couple());
        assert_eq!(cfg.random_vector(4), cfg.random_vector(4));
    }

    #[test]
    fn next_seed_changes_weights() {
        let cfg = GenConfig { seed: 42, dim_min: 3, dim_max: 3, ..GenConfig::default() };
        let other = GenConfig { seed: 43, ..cfg.clone() };
        assert_ne!(cfg.random_couple(), other.random_couple());
    }

    #[test]
    fn thousand_draws_satisfy_invariants() {
        let cfg = GenConfig { seed: 9, polytope_prob: 0.3, ..GenConfig::default() };
        cfg.validate().unwrap();
        for i in 0..1000 {
            let cp = cfg.couple_at(i);
            assert!((cfg.dim_min..=cfg.dim_max).contains(&cp.dim()));
            for j in 0..2 {
                match cp.space(j) {
                    NormModel::WeightedLp { p, weights } => {
                        assert!(cfg.p_values.contains(p));
                        assert!(weights.iter().all(|w| {
                            let l = w.ln();
                            l >= cfg.log_weight_min - 1e-12 && l <= cfg.log_weight_max + 1e-12
                        }));
                    }
                    NormModel::Polytope { dim, functionals } => {
                        assert_eq!(*dim, cp.dim());
                        assert!(functionals.len() >= cp.dim());
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            GenConfig { dim_min: 0, ..GenConfig::default() },
            GenConfig { dim_min: 4, dim_max: 3, ..GenConfig::default() },
            GenConfig { p_values: vec![], ..GenConfig::default() },
            GenConfig { p_values: vec![Exponent::Finite(0.5)], ..GenConfig::default() },
            GenConfig { log_weight_min: 1.0, log_weight_max: 0.0, ..GenConfig::default() },
            GenConfig { polytope_prob: 1.5, ..GenConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }
}
