//! Natural numbers extended with infinity.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NatInf {
    Fin(u64),
    Inf,
}

impl NatInf {
    pub const ZERO: NatInf = NatInf::Fin(0);

    pub fn is_inf(self) -> bool {
        self == NatInf::Inf
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            NatInf::Fin(n) => Some(n),
            NatInf::Inf => None,
        }
    }

    /// `self - other`, defined when `other` is finite and not larger.
    pub fn checked_sub(self, other: NatInf) -> Option<NatInf> {
        match (self, other) {
            (NatInf::Inf, NatInf::Fin(_)) => Some(NatInf::Inf),
            (NatInf::Fin(a), NatInf::Fin(b)) if a >= b => Some(NatInf::Fin(a - b)),
            _ => None,
        }
    }
}

impl Ord for NatInf {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NatInf::Fin(a), NatInf::Fin(b)) => a.cmp(b),
            (NatInf::Fin(_), NatInf::Inf) => Ordering::Less,
            (NatInf::Inf, NatInf::Fin(_)) => Ordering::Greater,
            (NatInf::Inf, NatInf::Inf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for NatInf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for NatInf {
    type Output = NatInf;

    fn add(self, rhs: NatInf) -> NatInf {
        match (self, rhs) {
            (NatInf::Fin(a), NatInf::Fin(b)) => a.checked_add(b).map_or(NatInf::Inf, NatInf::Fin),
            _ => NatInf::Inf,
        }
    }
}

impl Add<u64> for NatInf {
    type Output = NatInf;

    fn add(self, rhs: u64) -> NatInf {
        self + NatInf::Fin(rhs)
    }
}

impl From<u64> for NatInf {
    fn from(n: u64) -> Self {
        NatInf::Fin(n)
    }
}

impl fmt::Display for NatInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatInf::Fin(n) => write!(f, "{n}"),
            NatInf::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for NatInf {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NatInf::Fin(n) => s.serialize_u64(*n),
            NatInf::Inf => s.serialize_str("inf"),
        }
    }
}
