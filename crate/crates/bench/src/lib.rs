//! Fixtures shared by the throughput benchmarks.

use sixcyl_core::d3::{build_c6, D3Params};
use sixcyl_core::{curve, Configuration, FreeConfig, TangentLine};

/// The record configuration as built lines.
pub fn record_configuration() -> Configuration {
    build_c6(&curve::record().params).expect("record is off the poles")
}

/// A skew pair and a parallel pair from the record and initial configurations.
pub fn line_pairs() -> [(TangentLine, TangentLine); 2] {
    let rec = record_configuration();
    let c6 = build_c6(&D3Params::origin()).expect("origin is valid");
    [(rec.lines[0], rec.lines[1]), (c6.lines[0], c6.lines[1])]
}

pub fn record_chart() -> FreeConfig {
    FreeConfig::record()
}
