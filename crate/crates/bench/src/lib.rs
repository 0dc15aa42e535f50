//! Shared workloads for the pipeline benchmarks.

use cmzv_core::{parse_spec, SeriesSpec};

/// Representative specs, from a depth-1 sum up to depth-3 squared-binomial
/// series with weight 5.
pub const WORKLOADS: &[(&str, &str)] = &[
    ("depth1", "S[2n+1^2 >= 0]"),
    ("depth2", "S[2n+1^1 >= 2n^1 > 0]"),
    ("depth2-sq", "S2[2n-1^2 > 2n^1 > 0]"),
    ("depth3", "S[2n^2 > 2n+1^1 >= 2n^1 > 0]"),
    ("depth3-sq-w5", "S2[2n-1^3 > 2n-1^1 > 2n+1^1 >= 0]"),
];

pub fn workloads() -> Vec<(&'static str, SeriesSpec)> {
    WORKLOADS.iter().map(|(name, text)| (*name, parse_spec(text).expect("workload spec parses"))).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn workloads_compile() {
        for (name, spec) in super::workloads() {
            assert!(cmzv_core::compile_spec(&spec).is_ok(), "{name}");
        }
    }
}
