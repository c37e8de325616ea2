//! Unit-suffixed scalar values, e.g. `1.3 W`, `2051 nm`, `0 dBm`, `4 %`.

use std::fmt;

/// The kind of physical quantity a config key expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Length,
    Power,
    Time,
    AttenuationPerLength,
    Attenuation,
    MassDensity,
    Temperature,
    /// Bare number or percentage.
    Fraction,
    /// Bare positive number.
    Ratio,
}

impl Quantity {
    /// Units accepted for this quantity, for error messages.
    pub fn expected(self) -> &'static str {
        match self {
            Quantity::Length => "m, cm, mm, um or nm",
            Quantity::Power => "W, mW, uW or dBm",
            Quantity::Time => "s, ms or us",
            Quantity::AttenuationPerLength => "dB/m or dB/km",
            Quantity::Attenuation => "dB",
            Quantity::MassDensity => "kg/m3 or g/cm3",
            Quantity::Temperature => "K",
            Quantity::Fraction => "a bare fraction or %",
            Quantity::Ratio => "a bare number",
        }
    }

    fn scale(self, unit: &str) -> Option<Scale> {
        use Scale::Pow10;
        let s = match (self, unit) {
            (Quantity::Length, "m") => Pow10(0),
            (Quantity::Length, "cm") => Pow10(-2),
            (Quantity::Length, "mm") => Pow10(-3),
            (Quantity::Length, "um" | "µm") => Pow10(-6),
            (Quantity::Length, "nm") => Pow10(-9),
            (Quantity::Power, "W") => Pow10(0),
            (Quantity::Power, "mW") => Pow10(-3),
            (Quantity::Power, "uW" | "µW") => Pow10(-6),
            (Quantity::Power, "dBm") => Scale::DecibelMilliwatt,
            (Quantity::Time, "s") => Pow10(0),
            (Quantity::Time, "ms") => Pow10(-3),
            (Quantity::Time, "us" | "µs") => Pow10(-6),
            (Quantity::AttenuationPerLength, "dB/m") => Pow10(0),
            (Quantity::AttenuationPerLength, "dB/km") => Pow10(-3),
            (Quantity::Attenuation, "dB") => Pow10(0),
            (Quantity::MassDensity, "kg/m3" | "kg/m^3") => Pow10(0),
            (Quantity::MassDensity, "g/cm3" | "g/cm^3") => Pow10(3),
            (Quantity::Temperature, "K") => Pow10(0),
            (Quantity::Fraction, "") => Pow10(0),
            (Quantity::Fraction, "%") => Pow10(-2),
            (Quantity::Ratio, "") => Pow10(0),
            _ => return None,
        };
        Some(s)
    }
}

enum Scale {
    /// Multiply by ten to this power. Dividing for negative powers keeps
    /// `5 um` equal to the literal `5e-6`.
    Pow10(i32),
    DecibelMilliwatt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitError {
    NotANumber(String),
    WrongUnit {
        found: String,
        expected: &'static str,
    },
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitError::NotANumber(s) => write!(f, "`{s}` does not start with a number"),
            UnitError::WrongUnit { found, expected } if found.is_empty() => {
                write!(f, "missing unit, expected {expected}")
            }
            UnitError::WrongUnit { found, expected } => {
                write!(f, "unit `{found}` not accepted, expected {expected}")
            }
        }
    }
}

/// Parses `text` as a quantity and returns its SI value.
pub fn parse_quantity(text: &str, quantity: Quantity) -> Result<f64, UnitError> {
    let text = text.trim();
    let split = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(text.len());
    // A trailing `e` belongs to the unit, not the exponent.
    let (mut number, mut unit) = text.split_at(split);
    while number.ends_with(['e', 'E']) {
        let cut = number.len() - 1;
        number = &text[..cut];
        unit = &text[cut..];
    }
    let value: f64 = number
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| UnitError::NotANumber(text.to_string()))?;
    let unit = unit.trim();
    match quantity.scale(unit) {
        Some(Scale::Pow10(e)) if e >= 0 => Ok(value * 10f64.powi(e)),
        Some(Scale::Pow10(e)) => Ok(value / 10f64.powi(-e)),
        Some(Scale::DecibelMilliwatt) => Ok(1e-3 * 10f64.powf(value / 10.0)),
        None => Err(UnitError::WrongUnit {
            found: unit.to_string(),
            expected: quantity.expected(),
        }),
    }
}
