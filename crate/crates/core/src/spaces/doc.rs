//! Structured-text (JSON) documents for spaces and couples.
//!
//! Field names: `kind`, `dim`, `p` (a number, or the literal `"inf"`),
//! `weights`, and `functionals` as rows of `[re, im]` pairs.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::{Couple, NormModel};
use crate::error::Error;
use crate::C64;

/// Exponent of a weighted sequence norm; `Infinity` is kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn from_reciprocal(r: f64) -> Exponent {
        if r <= 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(1.0 / r)
        }
    }

    /// Hoelder conjugate.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent::Finite(p)),
            Raw::Text(t) if t == "inf" => Ok(Exponent::Infinity),
            Raw::Text(t) => Err(de::Error::custom(format!("exponent must be a number or \"inf\", got {t:?}"))),
        }
    }
}

/// Serde adapter for complex vectors as `[[re, im], ...]`.
pub mod cvec {
    use super::*;

    pub fn to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
        v.iter().map(|c| [c.re, c.im]).collect()
    }

    pub fn from_pairs(v: &[[f64; 2]]) -> Vec<C64> {
        v.iter().map(|p| C64::new(p[0], p[1])).collect()
    }

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(from_pairs(&raw))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NormModelDoc {
    kind: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    functionals: Option<Vec<Vec<[f64; 2]>>>,
}

impl From<NormModel> for NormModelDoc {
    fn from(m: NormModel) -> Self {
        match m {
            NormModel::WeightedLp { p, weights } => NormModelDoc {
                kind: "WeightedLp".into(),
                dim: weights.len(),
                p: Some(p),
                weights: Some(weights),
                functionals: None,
            },
            NormModel::Polytope { dim, functionals } => NormModelDoc {
                kind: "Polytope".into(),
                dim,
                p: None,
                weights: None,
                functionals: Some(functionals.iter().map(|a| cvec::to_pairs(a)).collect()),
            },
        }
    }
}

impl TryFrom<NormModelDoc> for NormModel {
    type Error = Error;

    fn try_from(d: NormModelDoc) -> Result<Self, Error> {
        let model = match d.kind.as_str() {
            "WeightedLp" => {
                let p = d.p.ok_or_else(|| Error::Format("WeightedLp needs field p".into()))?;
                let w = d.weights.ok_or_else(|| Error::Format("WeightedLp needs field weights".into()))?;
                NormModel::weighted_lp(p, w)?
            }
            "Polytope" => {
                let f = d
                    .functionals
                    .ok_or_else(|| Error::Format("Polytope needs field functionals".into()))?;
                NormModel::polytope(f.iter().map(|a| cvec::from_pairs(a)).collect())?
            }
            other => return Err(Error::Format(format!("unknown kind {other:?}"))),
        };
        if model.dim() != d.dim {
            return Err(Error::DimensionMismatch { expected: d.dim, got: model.dim() });
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CoupleDoc {
    space0: NormModel,
    space1: NormModel,
}

impl From<Couple> for CoupleDoc {
    fn from(c: Couple) -> Self {
        CoupleDoc { space0: c.space0, space1: c.space1 }
    }
}

impl TryFrom<CoupleDoc> for Couple {
    type Error = Error;

    fn try_from(d: CoupleDoc) -> Result<Self, Error> {
        Couple::new(d.space0, d.space1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::GenConfig;
    use proptest::prelude::*;

    #[test]
    fn infinity_uses_literal() {
        let m = NormModel::weighted_lp(Exponent::Infinity, vec![1.5, 2.0]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"kind":"WeightedLp","dim":2,"p":"inf","weights":[1.5,2.0]}"#);
        let back: NormModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_documents_rejected() {
        for bad in [
            r#"{"kind":"WeightedLp","dim":2,"p":"infinite","weights":[1,1]}"#,
            r#"{"kind":"WeightedLp","dim":3,"p":2,"weights":[1,1]}"#,
            r#"{"kind":"WeightedLp","dim":2,"p":2,"weights":[1,-1]}"#,
            r#"{"kind":"Circle","dim":2}"#,
            r#"{"kind":"WeightedLp","dim":1,"p":2,"weights":[1],"extra":0}"#,
        ] {
            assert!(serde_json::from_str::<NormModel>(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn couple_documents_round_trip_bitwise(seed in any::<u64>()) {
            let cfg = GenConfig { seed, polytope_prob: 0.5, ..GenConfig::default() };
            let cp = cfg.random_couple();
            let text = serde_json::to_string(&cp).unwrap();
            let back: Couple = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, cp);
        }
    }
}
