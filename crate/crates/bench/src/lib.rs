//! Shared workloads for the benchmarks.

use nclaurent::{Budget, HSpec, Kontsevich};

/// `(H, k)` pairs whose iterates take from microseconds to about a second.
pub const ITERATE_CASES: &[(&str, i64)] = &[("1,0,1", 6), ("1,0,1", -6), ("1,1,1", 4), ("1,0,0,1", 3)];

pub fn engine(h: &str) -> Kontsevich {
    Kontsevich::new(HSpec::parse(h, false).expect("valid H"), Budget::default()).expect("engine")
}
