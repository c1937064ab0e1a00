use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SolveReport;
use crate::criterion::GeodesicProblem;
use crate::lie::Signature;

/// Number of geodesic rays; a continuum exceeds every finite bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RayCount {
    Finite(usize),
    Infinite,
}

impl RayCount {
    pub fn at_least(&self, n: usize) -> bool {
        match self {
            RayCount::Finite(c) => *c >= n,
            RayCount::Infinite => true,
        }
    }
}

impl std::fmt::Display for RayCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RayCount::Finite(n) => write!(f, "{n}"),
            RayCount::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for RayCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RayCount::Finite(n) => s.serialize_u64(*n as u64),
            RayCount::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for RayCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct CountVisitor;
        impl Visitor<'_> for CountVisitor {
            type Value = RayCount;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a nonnegative integer or \"infinite\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RayCount, E> {
                Ok(RayCount::Finite(v as usize))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RayCount, E> {
                usize::try_from(v)
                    .map(RayCount::Finite)
                    .map_err(|_| E::custom("negative ray count"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<RayCount, E> {
                if v == "infinite" {
                    Ok(RayCount::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(CountVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub count: RayCount,
    pub signature: Signature,
    pub required_minimum: usize,
    pub pass: bool,
}

/// Checks the ray count against the guaranteed minimum: two in general, four
/// when the Killing form on `m` is indefinite.
pub fn theorem_audit(problem: &GeodesicProblem, report: &SolveReport) -> AuditVerdict {
    let signature = problem.killing().signature();
    let required_minimum = if signature.is_indefinite() { 4 } else { 2 };
    let count = if report.continuum_detected {
        RayCount::Infinite
    } else {
        RayCount::Finite(report.rays.len())
    };
    AuditVerdict {
        count,
        signature,
        required_minimum,
        pass: count.at_least(required_minimum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_serializes_as_number_or_tag() {
        assert_eq!(serde_json::to_string(&RayCount::Finite(4)).unwrap(), "4");
        assert_eq!(serde_json::to_string(&RayCount::Infinite).unwrap(), "\"infinite\"");
        let back: RayCount = serde_json::from_str("\"infinite\"").unwrap();
        assert_eq!(back, RayCount::Infinite);
        let back: RayCount = serde_json::from_str("2").unwrap();
        assert_eq!(back, RayCount::Finite(2));
        assert!(serde_json::from_str::<RayCount>("\"many\"").is_err());
    }

    #[test]
    fn continuum_meets_any_bound() {
        assert!(RayCount::Infinite.at_least(1000));
        assert!(!RayCount::Finite(3).at_least(4));
    }
}
