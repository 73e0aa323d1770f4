// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Where a curve came from. User curves are accepted as given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Sweep,
    Oracle,
    UserSupplied,
}

/// One curve point: with a high-influence set of size `b`, the rest of the
/// data leaks at most `a` nats about the secret. `a` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbPoint {
    pub b: u64,
    #[serde(serialize_with = "ser_leak", deserialize_with = "de_leak")]
    pub a: f64,
}

/// Non-increasing influence curve over strictly increasing b.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct AbCurve {
    points: Vec<AbPoint>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct RawCurve {
    points: Vec<AbPoint>,
    provenance: Provenance,
}

impl TryFrom<RawCurve> for AbCurve {
    type Error = Error;
    fn try_from(raw: RawCurve) -> Result<Self> {
        AbCurve::new(raw.points, raw.provenance)
    }
}

impl From<AbCurve> for RawCurve {
    fn from(c: AbCurve) -> Self {
        RawCurve { points: c.points, provenance: c.provenance }
    }
}

impl AbCurve {
    pub fn new(points: Vec<AbPoint>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("curve has no points"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.b == 0 {
                return Err(Error::validation("curve points need b >= 1"));
            }
            if p.a.is_nan() || p.a < 0.0 {
                return Err(Error::validation(format!("point b={} has invalid a={}", p.b, p.a)));
            }
            if i > 0 {
                let prev = points[i - 1];
                if p.b <= prev.b {
                    return Err(Error::validation("curve b values must strictly increase"));
                }
                if p.a > prev.a {
                    return Err(Error::validation(format!(
                        "curve increases from a({})={} to a({})={}",
                        prev.b, prev.a, p.b, p.a
                    )));
                }
            }
        }
        Ok(AbCurve { points, provenance })
    }

    /// Curve from values a(1), a(2), ... as given.
    pub fn from_values(values: &[f64], provenance: Provenance) -> Result<Self> {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, &a)| AbPoint { b: i as u64 + 1, a })
            .collect();
        AbCurve::new(points, provenance)
    }

    /// Tightest non-increasing upper bound of raw values a(1), a(2), ...
    pub fn envelope(values: &[f64], provenance: Provenance) -> Result<Self> {
        let mut env = values.to_vec();
        for i in (0..env.len().saturating_sub(1)).rev() {
            env[i] = env[i].max(env[i + 1]);
        }
        AbCurve::from_values(&env, provenance)
    }

    pub fn single(b: u64, a: f64) -> Result<Self> {
        AbCurve::new(vec![AbPoint { b, a }], Provenance::UserSupplied)
    }

    /// Appends a point past the current last one.
    pub fn with_point(mut self, b: u64, a: f64) -> Result<Self> {
        self.points.push(AbPoint { b, a });
        AbCurve::new(self.points, self.provenance)
    }

    pub fn points(&self) -> &[AbPoint] {
        &self.points
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// a(b) for the largest curve point with size at most `b`.
    pub fn a_at(&self, b: u64) -> Option<f64> {
        self.points.iter().rev().find(|p| p.b <= b).map(|p| p.a)
    }
}

pub(crate) fn ser_leak<S: Serializer>(a: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if a.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*a)
    }
}

pub(crate) fn de_leak<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Leak {
        Num(f64),
        Text(String),
    }
    match Leak::deserialize(d)? {
        Leak::Num(x) => Ok(x),
        Leak::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
        Leak::Text(t) => Err(serde::de::Error::custom(format!("bad leakage value '{t}'"))),
    }
}
