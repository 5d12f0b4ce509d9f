use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functors::{ComplexSolverConfig, PeetreConfig};
use crate::operators::{canonical_operator, CoupleOperator, OpNormConfig};
use crate::spaces::{Exponent, GenConfig};

/// Parameters for every experiment. Thresholds are config values; the defaults
/// are the frozen calibrated ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub thetas: Vec<f64>,
    /// Couple generator; its own seed is replaced by the experiment seed.
    pub generator: GenConfig,
    pub canonical: CanonicalConfig,
    pub op_norm: OpNormConfig,
    pub three_lines: ThreeLinesConfig,
    pub oracle_match: OracleMatchConfig,
    pub reiteration: ReiterationConfig,
    pub smoothing: SmoothingConfig,
    pub coefficient_decay: DecayConfig,
    pub compactness_propagation: CompactnessConfig,
    pub duality: DualityConfig,
    pub riesz_lemma8: RieszConfig,
    pub gp_containment: GpConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20240601,
            thetas: vec![0.25, 0.5, 0.75],
            generator: GenConfig::default(),
            canonical: CanonicalConfig::default(),
            op_norm: OpNormConfig::default(),
            three_lines: ThreeLinesConfig::default(),
            oracle_match: OracleMatchConfig::default(),
            reiteration: ReiterationConfig::default(),
            smoothing: SmoothingConfig::default(),
            coefficient_decay: DecayConfig::default(),
            compactness_propagation: CompactnessConfig::default(),
            duality: DualityConfig::default(),
            riesz_lemma8: RieszConfig::default(),
            gp_containment: GpConfig::default(),
        }
    }
}

/// The diagonal test operator `diag(2^-i)`; see [`canonical_operator`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CanonicalConfig {
    pub dim: usize,
    pub p: Exponent,
    pub step: f64,
}

impl Default for CanonicalConfig {
    fn default() -> Self {
        CanonicalConfig { dim: 10, p: Exponent::Finite(2.0), step: 1.0 }
    }
}

impl CanonicalConfig {
    pub fn operator(&self) -> Result<CoupleOperator> {
        canonical_operator(self.dim, self.p, self.step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeLinesConfig {
    pub trials: usize,
    pub degree: usize,
    pub points: usize,
    /// Largest allowed ratio between the maxima at `(K, M)` and `(2K, 2M)`.
    pub stability: f64,
    pub eq2_instances: usize,
    pub eq2_margin: f64,
}

impl Default for ThreeLinesConfig {
    fn default() -> Self {
        ThreeLinesConfig { trials: 500, degree: 8, points: 64, stability: 2.0, eq2_instances: 1000, eq2_margin: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleMatchConfig {
    pub couples: usize,
    pub degree: usize,
    pub points: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub solver: ComplexSolverConfig,
}

impl Default for OracleMatchConfig {
    fn default() -> Self {
        OracleMatchConfig {
            couples: 100,
            degree: 32,
            points: 256,
            ratio_min: 1.0 - 1e-6,
            ratio_max: 1.15,
            solver: ComplexSolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReiterationConfig {
    pub draws: usize,
    pub tolerance: f64,
    pub spot_checks: usize,
    pub spot_dim_max: usize,
    pub spot_degree: usize,
    pub spot_ratio_max: f64,
}

impl Default for ReiterationConfig {
    fn default() -> Self {
        ReiterationConfig {
            draws: 1000,
            tolerance: 1e-12,
            spot_checks: 6,
            spot_dim_max: 3,
            spot_degree: 16,
            spot_ratio_max: 1.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingConfig {
    pub families: usize,
    pub degree: usize,
    pub points: usize,
    pub n_max: usize,
    pub bound: f64,
    /// Tail offsets `n` for the decay part.
    pub offsets: Vec<usize>,
    pub tail_window: usize,
    pub tail_samples: usize,
    /// The decay quantity must fall below this at the largest offset.
    pub tolerance: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            families: 1000,
            degree: 24,
            points: 256,
            n_max: 64,
            bound: 3.01,
            offsets: vec![4, 8, 16, 32],
            tail_window: 8,
            tail_samples: 16,
            tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub k_max: i64,
    pub k_far: i64,
    pub decay_ratio: f64,
    pub families: usize,
    pub degree: usize,
    pub deltas: Vec<f64>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig { k_max: 60, k_far: 40, decay_ratio: 1e-3, families: 20, degree: 16, deltas: vec![0.2, 0.1, 0.05] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompactnessConfig {
    pub k_max: usize,
    pub tolerance: f64,
    /// Smoothing orders `N` for the diameter part.
    pub orders: Vec<usize>,
    pub separations: usize,
    pub sequences: usize,
    pub degree: usize,
    pub diameter_factor: f64,
}

impl Default for CompactnessConfig {
    fn default() -> Self {
        CompactnessConfig {
            k_max: 8,
            tolerance: 1e-9,
            orders: vec![2, 4, 8],
            separations: 8,
            sequences: 10,
            degree: 12,
            diameter_factor: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualityConfig {
    pub draws: usize,
    pub tolerance: f64,
    pub spot_checks: usize,
    pub spot_dim_max: usize,
    pub degree: usize,
    pub agreement: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig { draws: 200, tolerance: 1e-12, spot_checks: 8, spot_dim_max: 4, degree: 32, agreement: 0.10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RieszConfig {
    pub dim: usize,
    pub degree: usize,
    pub points: usize,
    pub trials: usize,
    pub constant_max: f64,
    pub samples: usize,
    pub decades: usize,
    pub per_decade: usize,
    pub ratio: f64,
}

impl Default for RieszConfig {
    fn default() -> Self {
        RieszConfig {
            dim: 4,
            degree: 16,
            points: 128,
            trials: 64,
            constant_max: 1.05,
            samples: 400,
            decades: 4,
            per_decade: 2,
            ratio: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpConfig {
    pub trials: usize,
    pub dim_max: usize,
    pub window: usize,
    pub slack: f64,
    pub solver: PeetreConfig,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig { trials: 30, dim_max: 3, window: 8, slack: 1e-6, solver: PeetreConfig::default() }
    }
}

fn bad<T>(m: &str) -> Result<T> {
    Err(Error::InvalidParameter(m.to_string()))
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        if self.thetas.is_empty() || self.thetas.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return bad("thetas must be nonempty and inside (0, 1)");
        }
        if self.canonical.dim < self.compactness_propagation.k_max || self.canonical.dim == 0 {
            return bad("canonical.dim must be at least compactness_propagation.k_max");
        }
        if !(self.canonical.step > 0.0 && self.canonical.step.is_finite()) {
            return bad("canonical.step must be positive");
        }
        self.oracle_match.solver.validate()?;
        self.gp_containment.solver.validate()?;
        let t = &self.three_lines;
        let o = &self.oracle_match;
        let s = &self.smoothing;
        let d = &self.coefficient_decay;
        let c = &self.compactness_propagation;
        let r = &self.riesz_lemma8;
        let counts = [
            t.trials,
            t.degree,
            t.eq2_instances,
            o.couples,
            o.degree,
            self.reiteration.draws,
            self.reiteration.spot_dim_max,
            self.reiteration.spot_degree,
            s.families,
            s.degree,
            s.n_max,
            s.tail_window,
            s.tail_samples,
            d.families,
            d.degree,
            c.k_max,
            c.separations,
            c.sequences,
            c.degree,
            self.duality.draws,
            self.duality.spot_dim_max,
            self.duality.degree,
            r.dim,
            r.degree,
            r.trials,
            r.samples,
            r.decades,
            r.per_decade,
            self.gp_containment.trials,
            self.gp_containment.dim_max,
        ];
        if counts.contains(&0) {
            return bad("counts, degrees and dimensions must be positive");
        }
        for (pts, k) in [(t.points, t.degree), (o.points, o.degree), (s.points, s.degree), (r.points, r.degree)] {
            crate::annulus::AnnulusSpec::new(pts)?.check_degree(k)?;
        }
        let nonneg = [
            t.eq2_margin,
            self.reiteration.tolerance,
            s.tolerance,
            d.decay_ratio,
            c.tolerance,
            self.duality.tolerance,
            self.duality.agreement,
            r.ratio,
            self.gp_containment.slack,
        ];
        if nonneg.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("tolerances must be finite and nonnegative");
        }
        if !(t.stability >= 1.0 && o.ratio_min <= o.ratio_max && s.bound >= 0.0 && c.diameter_factor > 0.0) {
            return bad("stability >= 1, ratio_min <= ratio_max, bound >= 0 and diameter_factor > 0 required");
        }
        if s.offsets.is_empty() || s.offsets.contains(&0) || s.offsets.windows(2).any(|w| w[1] <= w[0]) {
            return bad("smoothing.offsets must be positive and strictly increasing");
        }
        if c.orders.is_empty() || c.orders.contains(&0) {
            return bad("compactness_propagation.orders must be positive");
        }
        if d.k_far <= 0 || d.k_far > d.k_max || d.deltas.is_empty() || d.deltas.iter().any(|x| !(*x > 0.0)) {
            return bad("coefficient_decay needs 0 < k_far <= k_max and positive deltas");
        }
        if self.reiteration.spot_dim_max > self.generator.dim_max
            || self.duality.spot_dim_max > self.generator.dim_max
            || self.gp_containment.dim_max > self.generator.dim_max
        {
            return bad("spot-check dimensions cannot exceed generator.dim_max");
        }
        Ok(())
    }

    /// Generator for lattice couples, seeded by `seed`.
    pub(crate) fn lattices(&self, seed: u64) -> GenConfig {
        GenConfig { seed, polytope_prob: 0.0, ..self.generator.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = VerifyConfig::default();
        c.validate().unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<VerifyConfig>(&s).unwrap(), c);
    }

    #[test]
    fn partial_documents_fill_defaults_and_unknown_keys_fail() {
        let c: VerifyConfig = serde_json::from_str(r#"{"seed": 5, "smoothing": {"tolerance": 0.0}}"#).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.smoothing.tolerance, 0.0);
        assert_eq!(c.smoothing.families, 1000);
        c.validate().unwrap();
        assert!(serde_json::from_str::<VerifyConfig>(r#"{"smoothing": {"tolerence": 0.0}}"#).is_err());
        assert!(serde_json::from_str::<VerifyConfig>(r#"{"sed": 1}"#).is_err());
    }

    #[test]
    fn out_of_range_values_fail_validation() {
        let bad = [
            r#"{"thetas": [0.0]}"#,
            r#"{"oracle_match": {"couples": 0}}"#,
            r#"{"oracle_match": {"points": 100}}"#,
            r#"{"smoothing": {"offsets": [8, 4]}}"#,
            r#"{"coefficient_decay": {"k_far": 80}}"#,
            r#"{"duality": {"agreement": -1.0}}"#,
        ];
        for b in bad {
            let c: VerifyConfig = serde_json::from_str(b).unwrap();
            assert!(c.validate().is_err(), "{b}");
        }
    }
}
