//! Bundled absorption-set topologies.

use crate::absorption::TopologyFile;

const TANNER_8_2: &str = include_str!("../fixtures/tanner_8_2.json");
const IEEE_8_8: &str = include_str!("../fixtures/ieee_8_8.json");

/// The dominant (8,2) set of the length-155 Tanner code, labeled so that
/// edge `k` is the `k`-th edge of the usual left-to-right drawing.
pub fn tanner_8_2() -> TopologyFile {
    serde_json::from_str(TANNER_8_2).expect("bundled fixture parses")
}

/// The dominant (8,8) set of the 10GBASE-T code: eight variables, each with
/// five internal checks and one unsatisfied check.
pub fn ieee_8_8() -> TopologyFile {
    serde_json::from_str(IEEE_8_8).expect("bundled fixture parses")
}

/// Looks up a bundled topology by name.
pub fn by_name(name: &str) -> Option<TopologyFile> {
    match name {
        "tanner-8-2" | "tanner155-(8,2)" => Some(tanner_8_2()),
        "ieee-8-8" | "ieee8023an-(8,8)" => Some(ieee_8_8()),
        _ => None,
    }
}
