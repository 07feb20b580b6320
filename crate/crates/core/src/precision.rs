use std::fmt;

use serde::{Deserialize, Serialize};

/// Working precision of a numerical run.
///
/// Requests are rounded up to the nearest supported width; 64-bit requests map
/// to hardware `f64` (53-bit mantissa).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precision {
    F64,
    Bits128,
    Bits256,
    Bits512,
}

impl Precision {
    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            0 => None,
            1..=64 => Some(Precision::F64),
            65..=128 => Some(Precision::Bits128),
            129..=256 => Some(Precision::Bits256),
            257..=512 => Some(Precision::Bits512),
            _ => None,
        }
    }

    /// Mantissa bits actually carried.
    pub fn mantissa_bits(self) -> u32 {
        match self {
            Precision::F64 => 53,
            Precision::Bits128 => 128,
            Precision::Bits256 => 256,
            Precision::Bits512 => 512,
        }
    }

    /// Default simplex-membership tolerance: 1e-10 at 64-bit, scaled with the
    /// mantissa so the tolerance keeps the same margin above roundoff.
    pub fn simplex_tolerance(self) -> f64 {
        let extra = self.mantissa_bits().saturating_sub(53) as f64;
        (1e-10 * (2f64).powf(-extra * 0.75)).max(1e-300)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::F64 => write!(f, "f64"),
            other => write!(f, "mpfr{}", other.mantissa_bits()),
        }
    }
}

/// Run `$body` with the type alias `$t` bound to the scalar matching `$prec`.
#[macro_export]
macro_rules! with_precision {
    ($prec:expr, $t:ident => $body:expr) => {
        match $prec {
            $crate::Precision::F64 => {
                type $t = f64;
                $body
            }
            $crate::Precision::Bits128 => {
                type $t = $crate::Mp<128>;
                $body
            }
            $crate::Precision::Bits256 => {
                type $t = $crate::Mp<256>;
                $body
            }
            $crate::Precision::Bits512 => {
                type $t = $crate::Mp<512>;
                $body
            }
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_up_to_supported_widths() {
        assert_eq!(Precision::from_bits(64), Some(Precision::F64));
        assert_eq!(Precision::from_bits(200), Some(Precision::Bits256));
        assert_eq!(Precision::from_bits(513), None);
        assert_eq!(Precision::from_bits(0), None);
    }

    #[test]
    fn tolerance_shrinks_with_precision() {
        assert_eq!(Precision::F64.simplex_tolerance(), 1e-10);
        assert!(Precision::Bits256.simplex_tolerance() < 1e-40);
    }
}
