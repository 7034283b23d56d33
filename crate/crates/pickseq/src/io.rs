//! File-format glue: the JSON instance schema shared by the CLI and tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{PickVector, PreferenceProfile};
use crate::scoring::ScoringVector;

/// The JSON document accepted and produced for concrete instances:
/// `{"n":…, "m":…, "rankings":[[…]], "k":[…], "scores":[…]}`.
/// Every field is optional; operations state which ones they need.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rankings: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    /// Builds and validates the profile, cross-checking the explicit `n` and
    /// `m` fields when present.
    pub fn profile(&self) -> Result<PreferenceProfile> {
        let rankings = self
            .rankings
            .clone()
            .ok_or_else(|| Error::Input("instance file has no \"rankings\"".into()))?;
        let profile = PreferenceProfile::new(rankings)?;
        if let Some(n) = self.n {
            if n != profile.n() {
                return Err(Error::Dimension(format!(
                    "file says n = {n} but lists {} rankings",
                    profile.n()
                )));
            }
        }
        if let Some(m) = self.m {
            if m != profile.m() {
                return Err(Error::Dimension(format!(
                    "file says m = {m} but rankings cover {} items",
                    profile.m()
                )));
            }
        }
        Ok(profile)
    }

    pub fn pick_vector(&self) -> Result<Option<PickVector>> {
        match &self.k {
            None => Ok(None),
            Some(counts) => Ok(Some(PickVector::new(counts.clone())?)),
        }
    }

    pub fn scoring(&self) -> Result<Option<ScoringVector>> {
        match &self.scores {
            None => Ok(None),
            Some(scores) => Ok(Some(ScoringVector::new(scores.clone())?)),
        }
    }
}

/// Serializes an `f64` that may legitimately be infinite. Finite values stay
/// numbers; non-finite ones become the strings `"inf"`, `"-inf"`, `"nan"`
/// (plain JSON has no spelling for them).
pub mod maybe_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else if v.is_nan() {
            ser.serialize_str("nan")
        } else if *v > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or inf/-inf/nan, got {other:?}"
                ))),
            },
        }
    }
}

/// `Option<f64>` variant of [`maybe_inf`].
pub mod maybe_inf_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(serde::Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::maybe_inf")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, ser: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => serde::Serialize::serialize(&Wrap(*x), ser),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(de)?.map(|w| w.0))
    }
}
