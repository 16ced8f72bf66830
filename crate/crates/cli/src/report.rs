use serde::{Deserialize, Serialize};
use sumlab_core::harness::CheckReport;
use sumlab_core::summing::NormEstimate;

/// Everything a command produced. Identical config and seed give identical content apart from
/// `wall_time_seconds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: String,
    pub tool_version: String,
    pub checks: Vec<CheckReport>,
    pub estimates: Vec<NormEstimate>,
    pub passed: bool,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, config_digest: String) -> Self {
        RunReport {
            command: command.into(),
            config_digest,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            checks: Vec::new(),
            estimates: Vec::new(),
            passed: true,
            wall_time_seconds: 0.0,
        }
    }
}
