//! Signed iterated exponentials `±exp^{∘level}(top)` for quantities such as
//! `ξ_n` and `ln S_n(d)` that leave double range after a few generations.

use std::cmp::Ordering;
use std::fmt;

use crate::OVERFLOW_GUARD;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tower {
    negative: bool,
    level: u32,
    /// Plain value when `level == 0`, otherwise above the guard.
    top: f64,
}

impl Tower {
    pub fn new(x: f64) -> Self {
        Self { negative: x < 0.0, level: 0, top: x.abs() }.normalized()
    }

    fn magnitude(level: u32, top: f64) -> Self {
        Self { negative: false, level, top }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.level == 0 && self.top > f64::MAX {
            self.level = 1;
            self.top = f64::MAX.ln();
        }
        while self.level > 0 && self.top <= OVERFLOW_GUARD {
            self.top = self.top.exp();
            self.level -= 1;
        }
        self
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_negative(&self) -> bool {
        self.negative && !(self.level == 0 && self.top == 0.0)
    }

    /// The value if it fits in a double, `±∞` otherwise.
    pub fn to_f64(&self) -> f64 {
        let m = if self.level == 0 { self.top } else { f64::INFINITY };
        if self.negative { -m } else { m }
    }

    pub fn negated(self) -> Self {
        Self { negative: !self.negative, ..self }
    }

    /// `e^x / 2`.
    pub fn exp_half(self) -> Self {
        if self.negative {
            return Self::new(0.5 * (-self.to_f64()).exp());
        }
        match self.level {
            0 if self.top <= OVERFLOW_GUARD => Self::new(self.top.exp() / 2.0),
            0 => Self::magnitude(1, self.top - std::f64::consts::LN_2),
            // ln 2 is far below the spacing of doubles near `top`.
            l => Self::magnitude(l + 1, self.top),
        }
    }

    /// Natural logarithm of a positive value.
    pub fn ln(self) -> Self {
        assert!(!self.is_negative(), "logarithm of a negative tower");
        match self.level {
            0 => Self::new(self.top.ln()),
            l => Self { negative: false, level: l - 1, top: self.top },
        }
    }

    /// `c · self`.
    pub fn scale(self, c: f64) -> Self {
        let flipped = if c < 0.0 { !self.negative } else { self.negative };
        let a = c.abs();
        let magnitude = match self.level {
            0 if (a * self.top).is_finite() => Self::magnitude(0, a * self.top),
            0 => Self::magnitude(1, a.ln() + self.top.ln()),
            1 => Self::magnitude(1, self.top + a.ln()),
            _ => self,
        };
        if a == 0.0 {
            return Self::new(0.0);
        }
        Self { negative: flipped, ..magnitude }
    }

    pub fn plus(self, other: Self) -> Self {
        if self.level == 0 && other.level == 0 {
            let sum = self.to_f64() + other.to_f64();
            if sum.is_finite() {
                return Self::new(sum);
            }
        }
        let (big, small) = if self.abs_cmp(&other) == Ordering::Less { (other, self) } else { (self, other) };
        if big.level >= 2 || small.level + 1 < big.level {
            return big;
        }
        // big.level == 1: |value| = e^{top}.
        let small_ln = match small.level {
            0 if small.top == 0.0 => return big,
            0 => small.top.ln(),
            _ => small.top,
        };
        let ratio = (small_ln - big.top).exp();
        let top = if big.negative == small.negative {
            big.top + ratio.ln_1p()
        } else {
            big.top + (-ratio).ln_1p()
        };
        Self { negative: big.negative, ..Self::magnitude(1, top) }
    }

    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.level.cmp(&other.level).then(self.top.total_cmp(&other.top))
    }
}

impl From<f64> for Tower {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl PartialOrd for Tower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self.is_negative(), other.is_negative()) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.abs_cmp(other),
            (true, true) => other.abs_cmp(self),
        })
    }
}

/// Plain number for level 0, otherwise nested `exp(...)`.
impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negative() {
            f.write_str("-")?;
        }
        for _ in 0..self.level {
            f.write_str("exp(")?;
        }
        write!(f, "{:e}", self.top)?;
        for _ in 0..self.level {
            f.write_str(")")?;
        }
        Ok(())
    }
}
