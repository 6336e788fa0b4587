//! Recurrent components of chain graphs and the Selgrade decomposition.

pub mod analysis;
pub mod mean_cycle;
pub mod scc;

pub use analysis::{
    analyze_affine, analyze_affine_cached, analyze_bilinear, classify_component, component_order,
    component_order_by, persistent_components, spectrum_interval, spectrum_tolerance,
    AnalysisOptions, AutoOr, Classification, ComponentOrder, DecompositionReport, GraphCache,
    GridSettings, InclusionFlags, MorseComponent, RunResult, RunSummary, RunTiming,
    SpectrumInterval,
};
pub use scc::strongly_connected_components;
