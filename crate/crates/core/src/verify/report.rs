use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One pass/fail condition with the observed value and its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(with = "num")]
    pub value: f64,
    #[serde(with = "num")]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Which part of the experiment produced the trial.
    pub kind: String,
    pub index: u64,
    /// Seed the trial drew from.
    pub seed: u64,
    #[serde(with = "num_map")]
    pub values: BTreeMap<String, f64>,
    pub passed: bool,
}

impl TrialRecord {
    pub fn new(kind: &str, index: u64, seed: u64) -> Self {
        TrialRecord { kind: kind.to_string(), index, seed, values: BTreeMap::new(), passed: true }
    }

    pub fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    pub fn pass(mut self, ok: bool) -> Self {
        self.passed = ok;
        self
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    /// What the experiment establishes and what it does not.
    pub note: String,
    /// Every parameter the run used, seeds included.
    pub config: serde_json::Value,
    pub trials: Vec<TrialRecord>,
    #[serde(with = "num_map")]
    pub stats: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(id: &str, note: &str, config: serde_json::Value) -> Self {
        ExperimentReport {
            id: id.to_string(),
            note: note.to_string(),
            config,
            trials: Vec::new(),
            stats: BTreeMap::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, value: f64, threshold: f64) {
        self.checks.push(Check { name: name.to_string(), passed, value, threshold });
    }

    pub fn stat(&mut self, name: &str, v: f64) {
        self.stats.insert(name.to_string(), v);
    }

    /// Appends `trials` and fixes the verdict: every check passed, and there was one.
    pub fn finish(mut self, trials: Vec<TrialRecord>) -> Self {
        self.trials.extend(trials);
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One row per trial: `kind,index,seed,passed` then every value column, sorted by name.
    pub fn to_csv(&self) -> String {
        let cols: BTreeSet<&str> = self.trials.iter().flat_map(|t| t.values.keys().map(String::as_str)).collect();
        let mut out = String::from("kind,index,seed,passed");
        for c in &cols {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for t in &self.trials {
            out.push_str(&format!("{},{},{},{}", t.kind, t.index, t.seed, t.passed));
            for c in &cols {
                out.push(',');
                if let Some(v) = t.values.get(*c) {
                    out.push_str(&format!("{v:?}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Numbers in reports; non-finite values are written as `"inf"`, `"-inf"` or `"nan"`.
mod num {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Raw {
        Num(f64),
        Text(String),
    }

    impl Raw {
        pub(super) fn value<E: de::Error>(self) -> Result<f64, E> {
            match self {
                Raw::Num(v) => Ok(v),
                Raw::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    _ => Err(E::custom(format!("expected a number, \"inf\", \"-inf\" or \"nan\", got {t:?}"))),
                },
            }
        }
    }

    pub(super) fn text(v: f64) -> Option<&'static str> {
        if v.is_nan() {
            Some("nan")
        } else if v == f64::INFINITY {
            Some("inf")
        } else if v == f64::NEG_INFINITY {
            Some("-inf")
        } else {
            None
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match text(*v) {
            Some(t) => s.serialize_str(t),
            None => s.serialize_f64(*v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Raw::deserialize(d)?.value()
    }
}

mod num_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::num::{text, Raw};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut out = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            match text(*v) {
                Some(t) => out.serialize_entry(k, t)?,
                None => out.serialize_entry(k, v)?,
            }
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, Raw>::deserialize(d)?.into_iter().map(|(k, v)| Ok((k, v.value()?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", "note", serde_json::json!({"seed": 3, "k": [1, 2]}));
        r.check("bound", true, 0.1 + 0.2, 1.0);
        r.stat("max", 1.0 / 3.0);
        r.finish(vec![
            TrialRecord::new("a", 0, 11).value("x", 0.1).value("y", 2.0),
            TrialRecord::new("b", 1, 12).value("z", -1e-300).pass(false),
        ])
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let s = r.to_json().unwrap();
        let back = ExperimentReport::from_json(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), s);
    }

    #[test]
    fn non_finite_values_round_trip() {
        let mut r = ExperimentReport::new("e", "", serde_json::Value::Null);
        r.check("open", true, 1.0, f64::INFINITY);
        r.stat("low", f64::NEG_INFINITY);
        let r = r.finish(vec![TrialRecord::new("a", 0, 1).value("x", f64::NAN)]);
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.checks[0].threshold, f64::INFINITY);
        assert_eq!(back.stats["low"], f64::NEG_INFINITY);
        assert!(back.trials[0].get("x").is_nan());
        assert!(ExperimentReport::from_json(&r.to_json().unwrap().replace("\"inf\"", "\"big\"")).is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "kind,index,seed,passed,x,y,z");
        assert_eq!(lines[1], "a,0,11,true,0.1,2.0,");
        assert_eq!(lines[2], "b,1,12,false,,,-1e-300");
    }

    #[test]
    fn verdict_needs_a_check() {
        assert!(!ExperimentReport::new("e", "", serde_json::Value::Null).finish(vec![]).passed);
        assert!(sample().passed);
    }
}
