#![allow(dead_code)]

use std::path::PathBuf;

use selgrade_cli::{parse_scenario, ScenarioConfig};
use selgrade_core::grid::CellGrid;
use selgrade_core::morse::MorseComponent;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.scenario"))
}

pub fn scenario(name: &str) -> ScenarioConfig {
    let mut cfg = parse_scenario(&scenario_path(name)).unwrap();
    cfg.output = Default::default();
    cfg
}

/// Angles of the cell centers of a component on the projective line, in
/// `(0, pi]`; returns `(min, max)`.
pub fn angular_support(comp: &MorseComponent, resolution: usize) -> (f64, f64) {
    let grid = CellGrid::new(2, resolution).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &cell in &comp.cells {
        let c = grid.center(cell);
        let theta = c[1].atan2(c[0]);
        lo = lo.min(theta);
        hi = hi.max(theta);
    }
    (lo, hi)
}

/// The two cones of eigen-directions, as angle intervals.
pub fn bilinear_cones() -> [(f64, f64); 2] {
    let a = (0.5f64.sqrt()).atan();
    let b = 2f64.sqrt().atan();
    let pi = std::f64::consts::PI;
    [(a, b), (pi - b, pi - a)]
}
