//! Serde adapters writing floats as JSON decimals with 17 significant digits
//! (enough for an exact binary64 round trip) and complex numbers as
//! `{"re": …, "im": …}`.

use num_complex::Complex64;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

/// Formats `x` with 17 significant digits in scientific notation.
pub fn format17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Newtype that serializes through [`format17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dec17(pub f64);

impl Serialize for Dec17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!(
                "cannot encode {} as JSON",
                self.0
            )));
        }
        let raw = RawValue::from_string(format17(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dec17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Dec17)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: Dec17,
    pub im: Dec17,
}

impl From<Complex64> for JsonComplex {
    fn from(c: Complex64) -> Self {
        Self {
            re: Dec17(c.re),
            im: Dec17(c.im),
        }
    }
}

impl From<JsonComplex> for Complex64 {
    fn from(c: JsonComplex) -> Self {
        Complex64::new(c.re.0, c.im.0)
    }
}

pub mod f64_17 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        Dec17(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

pub mod f64_17_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|&x| Dec17(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }
}

pub mod complex17 {
    use super::*;

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        JsonComplex::from(*c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        JsonComplex::deserialize(d).map(Complex64::from)
    }
}

pub mod complex17_vec {
    use super::*;

    pub fn serialize<S: Serializer>(cs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(cs.iter().map(|&c| JsonComplex::from(c)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<JsonComplex>::deserialize(d).map(|v| v.into_iter().map(Complex64::from).collect())
    }
}
