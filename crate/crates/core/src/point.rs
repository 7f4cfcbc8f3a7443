//! Point identifiers.
//!
//! A point is a single uppercase letter optionally followed by a decimal
//! suffix (`A`, `B2`, `P10`). Points pack into a `u32` so they are `Copy` and
//! order naturally: letter first, then an unsuffixed point before any
//! suffixed one, then the suffix numerically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

/// Inline storage for point tuples; no schema in the library exceeds six.
pub type Points = SmallVec<[Point; 6]>;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(u32);

const MAX_SUFFIX: u32 = 0xFFFE;

impl Point {
    pub fn new(letter: char, suffix: Option<u32>) -> Option<Self> {
        if !letter.is_ascii_uppercase() {
            return None;
        }
        let tail = match suffix {
            None => 0,
            Some(n) if n < MAX_SUFFIX => n + 1,
            Some(_) => return None,
        };
        Some(Point(((letter as u32) << 16) | tail))
    }

    pub fn letter(self) -> char {
        char::from_u32(self.0 >> 16).unwrap_or('?')
    }

    pub fn suffix(self) -> Option<u32> {
        match self.0 & 0xFFFF {
            0 => None,
            n => Some(n - 1),
        }
    }

    /// True if `s` has the shape of a point identifier.
    pub fn is_point_name(s: &str) -> bool {
        s.parse::<Point>().is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid point identifier `{0}`")]
pub struct InvalidPoint(pub String);

impl FromStr for Point {
    type Err = InvalidPoint;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(|| InvalidPoint(s.to_string()))?;
        let rest = chars.as_str();
        let suffix = if rest.is_empty() {
            None
        } else if rest.bytes().all(|b| b.is_ascii_digit()) {
            Some(rest.parse::<u32>().map_err(|_| InvalidPoint(s.to_string()))?)
        } else {
            return Err(InvalidPoint(s.to_string()));
        };
        Point::new(letter, suffix).ok_or_else(|| InvalidPoint(s.to_string()))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.suffix() {
            None => write!(f, "{}", self.letter()),
            Some(n) => write!(f, "{}{}", self.letter(), n),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Joins points with commas, the way they appear inside an application.
pub fn join_points(points: &[Point]) -> String {
    let mut out = String::new();
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&p.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_orders() {
        let a: Point = "A".parse().unwrap();
        let a1: Point = "A1".parse().unwrap();
        let a10: Point = "A10".parse().unwrap();
        let a2: Point = "A2".parse().unwrap();
        let b: Point = "B".parse().unwrap();
        assert!(a < a1 && a1 < a2 && a2 < a10 && a10 < b);
        assert_eq!(a10.to_string(), "A10");
        assert_eq!(a.suffix(), None);
        assert_eq!(a10.suffix(), Some(10));
    }

    #[test]
    fn rejects_bad_names() {
        for bad in ["", "a", "AB", "A-", "1", "Ä"] {
            assert!(bad.parse::<Point>().is_err(), "{bad}");
        }
    }
}
