//! External addresses `s = s_1 s_2 s_3 …` with a finite prefix and either a
//! zero tail or a periodic tail.
//!
//! Textual form: `"3,-1"` (zero tail), `"1,2|3,4"` (prefix `1,2`, then
//! `3,4` repeated), `"|1"` (purely periodic). Whitespace is ignored.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Default bound on `sup_j |s_j|` accepted by the ray constructions.
pub const DEFAULT_GATE: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    Zeros,
    /// Never empty.
    Periodic(Vec<i64>),
}

#[derive(Debug, Clone, Eq)]
pub struct ExternalAddress {
    prefix: Vec<i64>,
    tail: Tail,
}

impl ExternalAddress {
    /// The address `000…`.
    pub fn zeros() -> Self {
        Self { prefix: Vec::new(), tail: Tail::Zeros }
    }

    /// Finite prefix followed by zeros.
    pub fn finite(prefix: impl Into<Vec<i64>>) -> Result<Self> {
        Self::new(prefix.into(), Tail::Zeros)
    }

    /// Prefix followed by `period` repeated forever.
    pub fn periodic(prefix: impl Into<Vec<i64>>, period: impl Into<Vec<i64>>) -> Result<Self> {
        Self::new(prefix.into(), Tail::Periodic(period.into()))
    }

    pub fn new(prefix: Vec<i64>, tail: Tail) -> Result<Self> {
        let text = || Self { prefix: prefix.clone(), tail: tail.clone() }.to_string();
        if let Tail::Periodic(period) = &tail {
            if period.is_empty() {
                return Err(Error::AddressSyntax { text: text(), reason: "empty period".into() });
            }
        }
        let all = prefix.iter().chain(match &tail {
            Tail::Zeros => [].iter(),
            Tail::Periodic(p) => p.iter(),
        });
        if all.clone().any(|&v| v == i64::MIN) {
            return Err(Error::AddressSyntax { text: text(), reason: "entry out of range".into() });
        }
        Ok(Self { prefix, tail })
    }

    pub fn prefix(&self) -> &[i64] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// `s_j` for `j ≥ 1`.
    pub fn entry(&self, j: usize) -> Result<i64> {
        if j == 0 {
            return Err(Error::EntryIndex(j));
        }
        Ok(self.at(j))
    }

    pub(crate) fn at(&self, j: usize) -> i64 {
        debug_assert!(j >= 1);
        match self.prefix.get(j - 1) {
            Some(&v) => v,
            None => match &self.tail {
                Tail::Zeros => 0,
                Tail::Periodic(p) => p[(j - 1 - self.prefix.len()) % p.len()],
            },
        }
    }

    /// `s_1, s_2, …` (infinite).
    pub fn entries(&self) -> impl Iterator<Item = i64> + '_ {
        (1..).map(|j| self.at(j))
    }

    /// The left shift `σ(s)`.
    pub fn shift(&self) -> Self {
        if !self.prefix.is_empty() {
            return Self { prefix: self.prefix[1..].to_vec(), tail: self.tail.clone() };
        }
        match &self.tail {
            Tail::Zeros => self.clone(),
            Tail::Periodic(p) => {
                let mut q = p.clone();
                q.rotate_left(1);
                Self { prefix: Vec::new(), tail: Tail::Periodic(q) }
            }
        }
    }

    /// `σ^n(s)`.
    pub fn shift_by(&self, n: usize) -> Self {
        let mut s = self.clone();
        let skip = n.min(s.prefix.len());
        s.prefix.drain(..skip);
        if let Tail::Periodic(p) = &mut s.tail {
            let len = p.len();
            p.rotate_left((n - skip) % len);
        }
        s
    }

    /// Entry-wise negation.
    pub fn negate(&self) -> Self {
        let neg = |v: &Vec<i64>| v.iter().map(|x| -x).collect::<Vec<_>>();
        Self {
            prefix: neg(&self.prefix),
            tail: match &self.tail {
                Tail::Zeros => Tail::Zeros,
                Tail::Periodic(p) => Tail::Periodic(neg(p)),
            },
        }
    }

    pub fn sup_norm(&self) -> u64 {
        let tail: &[i64] = match &self.tail {
            Tail::Zeros => &[],
            Tail::Periodic(p) => p,
        };
        self.prefix.iter().chain(tail).map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn check_admissible(&self, gate: u64) -> Result<()> {
        let sup_norm = self.sup_norm();
        if sup_norm > gate {
            return Err(Error::Inadmissible { sup_norm, gate });
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0
    }

    /// Shortest representation of the same sequence: primitive period,
    /// prefix as short as possible, trailing zeros dropped.
    pub fn canonical(&self) -> Self {
        let mut prefix = self.prefix.clone();
        let mut tail = match &self.tail {
            Tail::Periodic(p) if p.iter().all(|&v| v == 0) => Tail::Zeros,
            Tail::Periodic(p) => Tail::Periodic(primitive_period(p)),
            Tail::Zeros => Tail::Zeros,
        };
        match &mut tail {
            Tail::Zeros => {
                while prefix.last() == Some(&0) {
                    prefix.pop();
                }
            }
            Tail::Periodic(p) => {
                while prefix.last().is_some() && prefix.last() == p.last() {
                    prefix.pop();
                    p.rotate_right(1);
                }
            }
        }
        Self { prefix, tail }
    }
}

fn primitive_period(p: &[i64]) -> Vec<i64> {
    let n = p.len();
    (1..=n)
        .filter(|&d| n.is_multiple_of(d))
        .find(|&d| (d..n).all(|i| p[i] == p[i - d]))
        .map(|d| p[..d].to_vec())
        .unwrap_or_else(|| p.to_vec())
}

impl PartialEq for ExternalAddress {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.prefix == b.prefix && a.tail == b.tail
    }
}

impl std::hash::Hash for ExternalAddress {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let c = self.canonical();
        c.prefix.hash(state);
        c.tail.hash(state);
    }
}

fn join(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tail {
            Tail::Zeros if self.prefix.is_empty() => f.write_str("0"),
            Tail::Zeros => f.write_str(&join(&self.prefix)),
            Tail::Periodic(p) => write!(f, "{}|{}", join(&self.prefix), join(p)),
        }
    }
}

impl FromStr for ExternalAddress {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let fail = |reason: &str| Error::AddressSyntax { text: text.to_string(), reason: reason.into() };
        let list = |part: &str| -> Result<Vec<i64>> {
            part.split(',')
                .map(|item| {
                    if item.is_empty() {
                        return Err(fail("empty entry"));
                    }
                    item.parse::<i64>().map_err(|e| fail(&e.to_string()))
                })
                .collect()
        };
        let (prefix_text, period_text) = match compact.split_once('|') {
            Some((a, b)) => (a, Some(b)),
            None => (compact.as_str(), None),
        };
        let prefix = if prefix_text.is_empty() {
            if period_text.is_none() {
                return Err(fail("empty address"));
            }
            Vec::new()
        } else {
            list(prefix_text)?
        };
        let tail = match period_text {
            None => Tail::Zeros,
            Some("") => return Err(fail("empty period")),
            Some(p) => Tail::Periodic(list(p)?),
        };
        Self::new(prefix, tail).map_err(|_| fail("entry out of range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(text: &str) -> ExternalAddress {
        text.parse().unwrap()
    }

    #[test]
    fn entry_examples() {
        let s = addr("3,-1");
        assert_eq!(s.entry(2).unwrap(), -1);
        assert_eq!(s.entry(7).unwrap(), 0);
        assert_eq!(addr("|1,2").entry(4).unwrap(), 2);
        assert_eq!(s.entry(0), Err(Error::EntryIndex(0)));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(addr("5,7").shift(), addr("7"));
        assert_eq!(ExternalAddress::zeros().shift(), ExternalAddress::zeros());
        assert_eq!(addr("|1,2").shift(), addr("|2,1"));
        assert_eq!(addr("9|1,2").shift_by(4), addr("|2,1"));
    }

    #[test]
    fn negate_and_norm_examples() {
        assert_eq!(addr("3,-1").negate(), addr("-3,1"));
        assert_eq!(ExternalAddress::zeros().negate(), ExternalAddress::zeros());
        assert_eq!(addr("|1").negate(), addr("|-1"));
        assert_eq!(addr("3,-1").sup_norm(), 3);
        assert_eq!(ExternalAddress::zeros().sup_norm(), 0);
        assert_eq!(addr("|-4,2").sup_norm(), 4);
    }

    #[test]
    fn equality_is_on_sequences() {
        assert_eq!(addr("1,0,0"), addr("1"));
        assert_eq!(addr("1,2|1,2"), addr("|1,2"));
        assert_eq!(addr("|3,3,3"), addr("|3"));
        assert_eq!(addr("|0"), ExternalAddress::zeros());
        assert_ne!(addr("1"), addr("|1"));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(addr(" 1, 2 | 3 ,4 ").to_string(), "1,2|3,4");
        assert_eq!(addr("0").to_string(), "0");
        for bad in ["", "1,,2", "1|", "a", "1,2,", "|", "-9223372036854775808"] {
            assert!(bad.parse::<ExternalAddress>().is_err(), "{bad:?}");
        }
        for text in ["3,-1", "1,2|3,4", "|5", "0"] {
            assert_eq!(addr(&addr(text).to_string()), addr(text));
        }
    }

    #[test]
    fn admissibility_gate() {
        assert!(addr("64,-64").check_admissible(DEFAULT_GATE).is_ok());
        assert_eq!(
            addr("|65").check_admissible(DEFAULT_GATE),
            Err(Error::Inadmissible { sup_norm: 65, gate: 64 })
        );
    }
}
