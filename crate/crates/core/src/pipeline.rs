//! End-to-end placement: merge cascades, global placement, legalization,
//! expansion and a final legality check.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gp::{run_global_placement, GpConfig, GpTrace};
use crate::legalize::{legalize, LegalizationReport, DEFAULT_K_CAND};
use crate::model::{check_legality, merge_cascades, Design, FpgaLayout, LegalityReport, Point};
use crate::wirelength::hpwl;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaceConfig {
    pub gp: GpConfig,
    /// Nearest candidate sites offered to each macro during matching.
    pub k_cand: usize,
}

impl Default for PlaceConfig {
    fn default() -> Self {
        PlaceConfig {
            gp: GpConfig::default(),
            k_cand: DEFAULT_K_CAND,
        }
    }
}

impl PlaceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| crate::Error::InvalidArgument(format!("config: {e}")))
    }
}

#[derive(Debug, Clone)]
pub struct PlaceOutcome {
    /// Final positions of the original design.
    pub positions: Vec<Point>,
    /// Global placement positions of the original design, before snapping.
    pub gp_positions: Vec<Point>,
    /// Original instances sitting on legal sites.
    pub legal: Vec<bool>,
    pub report: LegalityReport,
    pub legalization: LegalizationReport,
    pub trace: GpTrace,
    pub gp_hpwl: f64,
    pub hpwl: f64,
}

/// Place `design` on `layout`.
pub fn place(layout: &FpgaLayout, design: &Design, config: &PlaceConfig) -> Result<PlaceOutcome> {
    design.validate(layout)?;
    let merged = merge_cascades(design)?;
    let (state, trace) = run_global_placement(layout, &merged.design, &config.gp)?;
    let gp_positions = merged.map.expand(&state.positions);
    let lg = legalize(layout, &merged, &state.positions, config.k_cand.max(1))?;
    let report = check_legality(layout, design, &lg.positions);
    Ok(PlaceOutcome {
        gp_hpwl: hpwl(design, &gp_positions)?.total,
        hpwl: hpwl(design, &lg.positions)?.total,
        positions: lg.positions,
        gp_positions,
        legal: lg.legal,
        report,
        legalization: lg.report,
        trace,
    })
}
