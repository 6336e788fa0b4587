//! Scenario files, orchestration, reports and plots for `selgrade-core`.

pub mod error;
pub mod plot;
pub mod report;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use plot::emit_plot;
pub use report::{read_report, run_scenario, write_report, AnalysisReport};
pub use scenario::{parse_scenario, parse_scenario_str, ScenarioConfig};
