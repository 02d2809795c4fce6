//! Physical quantities with explicit units.
//!
//! Configuration files carry every physical value as a string such as
//! `"54.6 MHz"`, `"790 ns"` or `"1.034 pi"`. Internally all frequencies are
//! angular (rad/μs), times are μs, lengths are nm and angles are rad.
//! Ordinary frequencies (Hz, kHz, MHz, GHz) are multiplied by 2π on load.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a quantity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Length,
    Angle,
    /// Dipolar coupling scale, frequency × length³.
    CouplingScale,
}

struct UnitDef {
    symbol: &'static str,
    dim: Dimension,
    to_internal: f64,
}

const TWO_PI: f64 = 2.0 * PI;

const UNITS: &[UnitDef] = &[
    UnitDef {
        symbol: "Hz",
        dim: Dimension::Frequency,
        to_internal: TWO_PI * 1e-6,
    },
    UnitDef {
        symbol: "kHz",
        dim: Dimension::Frequency,
        to_internal: TWO_PI * 1e-3,
    },
    UnitDef {
        symbol: "MHz",
        dim: Dimension::Frequency,
        to_internal: TWO_PI,
    },
    UnitDef {
        symbol: "GHz",
        dim: Dimension::Frequency,
        to_internal: TWO_PI * 1e3,
    },
    UnitDef {
        symbol: "rad/s",
        dim: Dimension::Frequency,
        to_internal: 1e-6,
    },
    UnitDef {
        symbol: "rad/us",
        dim: Dimension::Frequency,
        to_internal: 1.0,
    },
    UnitDef {
        symbol: "rad/μs",
        dim: Dimension::Frequency,
        to_internal: 1.0,
    },
    UnitDef {
        symbol: "rad/ns",
        dim: Dimension::Frequency,
        to_internal: 1e3,
    },
    UnitDef {
        symbol: "s",
        dim: Dimension::Time,
        to_internal: 1e6,
    },
    UnitDef {
        symbol: "ms",
        dim: Dimension::Time,
        to_internal: 1e3,
    },
    UnitDef {
        symbol: "us",
        dim: Dimension::Time,
        to_internal: 1.0,
    },
    UnitDef {
        symbol: "μs",
        dim: Dimension::Time,
        to_internal: 1.0,
    },
    UnitDef {
        symbol: "ns",
        dim: Dimension::Time,
        to_internal: 1e-3,
    },
    UnitDef {
        symbol: "ps",
        dim: Dimension::Time,
        to_internal: 1e-6,
    },
    UnitDef {
        symbol: "nm",
        dim: Dimension::Length,
        to_internal: 1.0,
    },
    UnitDef {
        symbol: "um",
        dim: Dimension::Length,
        to_internal: 1e3,
    },
    UnitDef {
        symbol: "μm",
        dim: Dimension::Length,
        to_internal: 1e3,
    },
    UnitDef {
        symbol: "A",
        dim: Dimension::Length,
        to_internal: 0.1,
    },
    UnitDef {
        symbol: "rad",
        dim: Dimension::Angle,
        to_internal: 1.0,
    },
    UnitDef {
        symbol: "deg",
        dim: Dimension::Angle,
        to_internal: PI / 180.0,
    },
    UnitDef {
        symbol: "pi",
        dim: Dimension::Angle,
        to_internal: PI,
    },
    UnitDef {
        symbol: "π",
        dim: Dimension::Angle,
        to_internal: PI,
    },
    UnitDef {
        symbol: "kHz nm^3",
        dim: Dimension::CouplingScale,
        to_internal: TWO_PI * 1e-3,
    },
    UnitDef {
        symbol: "MHz nm^3",
        dim: Dimension::CouplingScale,
        to_internal: TWO_PI,
    },
    UnitDef {
        symbol: "rad/us nm^3",
        dim: Dimension::CouplingScale,
        to_internal: 1.0,
    },
];

fn lookup(symbol: &str) -> Option<&'static UnitDef> {
    UNITS.iter().find(|u| u.symbol == symbol)
}

/// A number with a unit, as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Result<Self> {
        if lookup(unit).is_none() {
            return Err(Error::Units {
                input: format!("{value} {unit}"),
                reason: format!("unknown unit {unit:?}"),
            });
        }
        Ok(Self {
            value,
            unit: unit.to_string(),
        })
    }

    pub fn dimension(&self) -> Dimension {
        lookup(&self.unit)
            .expect("unit validated at construction")
            .dim
    }

    /// Value converted to the internal unit of `dim`.
    pub fn to_internal(&self, dim: Dimension) -> Result<f64> {
        let def = lookup(&self.unit).expect("unit validated at construction");
        if def.dim != dim {
            return Err(Error::Units {
                input: self.to_string(),
                reason: format!("expected a {dim:?}, found a {:?}", def.dim),
            });
        }
        Ok(self.value * def.to_internal)
    }

    /// Angular frequency in rad/μs.
    pub fn rad_per_us(&self) -> Result<f64> {
        self.to_internal(Dimension::Frequency)
    }

    pub fn micros(&self) -> Result<f64> {
        self.to_internal(Dimension::Time)
    }

    pub fn nanometers(&self) -> Result<f64> {
        self.to_internal(Dimension::Length)
    }

    pub fn radians(&self) -> Result<f64> {
        self.to_internal(Dimension::Angle)
    }

    /// Coupling scale in rad/μs·nm³.
    pub fn coupling(&self) -> Result<f64> {
        self.to_internal(Dimension::CouplingScale)
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let err = |reason: &str| Error::Units {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if trimmed.is_empty() {
            return Err(err("empty quantity"));
        }
        // Longest numeric prefix.
        let split = trimmed
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || ((c == '-' || c == '+')
                        && (i == 0 || matches!(trimmed.as_bytes()[i - 1], b'e' | b'E')))
                    || ((c == 'e' || c == 'E')
                        && i > 0
                        && trimmed.as_bytes()[i - 1].is_ascii_digit()
                        && trimmed[i + 1..]
                            .chars()
                            .next()
                            .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+')))
            })
            .map(|(i, _)| i)
            .unwrap_or(trimmed.len());
        let (num, unit) = trimmed.split_at(split);
        let unit = unit.split_whitespace().collect::<Vec<_>>().join(" ");
        if unit.is_empty() {
            return Err(err("missing unit"));
        }
        let value = match num {
            "" => 1.0,
            "-" => -1.0,
            "+" => 1.0,
            _ => num.parse::<f64>().map_err(|e| err(&e.to_string()))?,
        };
        if !value.is_finite() {
            return Err(err("non-finite value"));
        }
        Quantity::new(value, &unit).map_err(|_| err(&format!("unknown unit {unit:?}")))
    }
}

impl TryFrom<String> for Quantity {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        q.to_string()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// Parse and convert in one step.
pub fn parse_in(s: &str, dim: Dimension) -> Result<f64> {
    s.parse::<Quantity>()?.to_internal(dim)
}

/// Ordinary frequency in MHz to rad/μs.
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frequencies_become_angular() {
        assert_relative_eq!(
            parse_in("54.6 MHz", Dimension::Frequency).unwrap(),
            2.0 * PI * 54.6
        );
        assert_relative_eq!(
            parse_in("105 kHz", Dimension::Frequency).unwrap(),
            2.0 * PI * 0.105
        );
        assert_relative_eq!(parse_in("3 rad/us", Dimension::Frequency).unwrap(), 3.0);
    }

    #[test]
    fn times_lengths_angles() {
        assert_relative_eq!(parse_in("790 ns", Dimension::Time).unwrap(), 0.79);
        assert_relative_eq!(parse_in("60us", Dimension::Time).unwrap(), 60.0);
        assert_relative_eq!(parse_in("8 nm", Dimension::Length).unwrap(), 8.0);
        assert_relative_eq!(parse_in("1.034 pi", Dimension::Angle).unwrap(), 1.034 * PI);
        assert_relative_eq!(parse_in("pi", Dimension::Angle).unwrap(), PI);
        assert_relative_eq!(parse_in("-pi", Dimension::Angle).unwrap(), -PI);
        assert_relative_eq!(parse_in("180 deg", Dimension::Angle).unwrap(), PI);
        assert_relative_eq!(parse_in("1e-3 rad", Dimension::Angle).unwrap(), 1e-3);
    }

    #[test]
    fn coupling_scale() {
        let j0 = parse_in("53.76 MHz nm^3", Dimension::CouplingScale).unwrap();
        assert_relative_eq!(j0, 2.0 * PI * 53.76);
    }

    #[test]
    fn rejects_missing_or_wrong_units() {
        assert!(parse_in("54.6", Dimension::Frequency).is_err());
        assert!(parse_in("54.6 furlongs", Dimension::Frequency).is_err());
        assert!(parse_in("54.6 ns", Dimension::Frequency).is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "54.6 MHz",
            "0.79 us",
            "1.034 pi",
            "-2.5e-7 s",
            "337.8 rad/us nm^3",
        ] {
            let q: Quantity = s.parse().unwrap();
            let again: Quantity = q.to_string().parse().unwrap();
            assert_eq!(q, again);
        }
    }
}
