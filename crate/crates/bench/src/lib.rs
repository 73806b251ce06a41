//! Fixtures shared by the benchmarks.

use hmkit_core::structures::{disjoint_union, power};
use hmkit_core::RelationalStructure;

/// `S^n`.
pub fn s_power(n: usize) -> RelationalStructure {
    power(&RelationalStructure::semilattice_s(), n).expect("small power")
}

/// `S^n` next to a point, as a disconnected target.
pub fn s_power_with_point(n: usize) -> RelationalStructure {
    let p = s_power(n);
    disjoint_union(&[&p, &RelationalStructure::singleton_i()]).expect("same signature")
}
