use std::fmt;
use std::ops::Mul;

/// Sign of a determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(value: f64) -> Sign {
        if value > 0.0 {
            Sign::Positive
        } else if value < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn from_parity(negative: bool) -> Sign {
        if negative {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Negative),
            0 => Some(Sign::Zero),
            1 => Some(Sign::Positive),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        self * Sign::Negative
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        match (self, rhs) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-1",
            Sign::Zero => "0",
            Sign::Positive => "+1",
        })
    }
}

/// Determinant in log form: `det = sign * exp(log_abs)`.
///
/// A singular matrix is `sign == Zero` with `log_abs == -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub sign: Sign,
    pub log_abs: f64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        sign: Sign::Positive,
        log_abs: 0.0,
    };

    pub const SINGULAR: LogDet = LogDet {
        sign: Sign::Zero,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: Sign, log_abs: f64) -> LogDet {
        if sign == Sign::Zero {
            LogDet::SINGULAR
        } else {
            LogDet { sign, log_abs }
        }
    }

    pub fn from_value(det: f64) -> LogDet {
        LogDet::new(Sign::of(det), det.abs().ln())
    }

    pub fn is_singular(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// `sign * exp(log_abs)`; may overflow to infinity for large matrices.
    pub fn value(&self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            s => f64::from(s.as_i8()) * self.log_abs.exp(),
        }
    }

    /// Agreement to `digits` significant digits: equal signs and
    /// `|a - b| <= 10^-digits * max(|a|, |b|, 1)` on `log_abs`.
    pub fn agrees_with(&self, other: &LogDet, digits: i32) -> bool {
        if self.sign != other.sign {
            return false;
        }
        if self.is_singular() {
            return true;
        }
        let scale = self.log_abs.abs().max(other.log_abs.abs()).max(1.0);
        (self.log_abs - other.log_abs).abs() <= 10f64.powi(-digits) * scale
    }

    /// Exact equality including the bit pattern of `log_abs`.
    pub fn bitwise_eq(&self, other: &LogDet) -> bool {
        self.sign == other.sign && self.log_abs.to_bits() == other.log_abs.to_bits()
    }
}

impl Mul for LogDet {
    type Output = LogDet;

    fn mul(self, rhs: LogDet) -> LogDet {
        LogDet::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl fmt::Display for LogDet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sign={} logabs={:.17}", self.sign, self.log_abs)
    }
}
