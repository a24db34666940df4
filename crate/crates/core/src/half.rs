use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in {0, 1/2, 1}, stored doubled so arithmetic on it stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(u8);

impl Half {
    pub const ZERO: Half = Half(0);
    pub const HALF: Half = Half(1);
    pub const ONE: Half = Half(2);

    pub fn from_doubled(d: u8) -> Option<Half> {
        (d <= 2).then_some(Half(d))
    }

    pub fn doubled(self) -> u8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn is_integral(self) -> bool {
        self.0 != 1
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("0"),
            1 => f.write_str("0.5"),
            _ => f.write_str("1"),
        }
    }
}

impl Serialize for Half {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        match x {
            _ if x == 0.0 => Ok(Half::ZERO),
            _ if x == 0.5 => Ok(Half::HALF),
            _ if x == 1.0 => Ok(Half::ONE),
            _ => Err(serde::de::Error::custom(format!(
                "{x} is not one of 0, 0.5, 1"
            ))),
        }
    }
}
