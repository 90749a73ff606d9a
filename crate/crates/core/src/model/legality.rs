use std::collections::BTreeMap;
use std::fmt;

use super::{Design, FpgaLayout, Point, Rect, SiteId};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Macro not at the lower-left corner of a site of its resource.
    OffSite { instance: String, at: Point },
    /// More macros on one site than it can host.
    Overlap { site: SiteId, instances: Vec<String> },
    /// Cascade members not in consecutive sites of one column, bottom-up.
    BrokenShape { shape: String },
    OutOfRegion { instance: String, region: String },
    Unplaced { instance: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OffSite { instance, at } => {
                write!(f, "off-site: {instance} at ({}, {})", at.x, at.y)
            }
            Violation::Overlap { site, instances } => {
                write!(f, "overlap: site {site} holds {}", instances.join(" "))
            }
            Violation::BrokenShape { shape } => write!(f, "non-contiguous shape: {shape}"),
            Violation::OutOfRegion { instance, region } => {
                write!(f, "out-of-region: {instance} outside {region}")
            }
            Violation::Unplaced { instance } => write!(f, "unplaced: {instance}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LegalityReport {
    pub violations: Vec<Violation>,
}

impl LegalityReport {
    pub fn is_legal(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for LegalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        write!(f, "{} violation(s)", self.violations.len())
    }
}

/// Verify the macro placement in `positions` (indexed like
/// `design.instances`).
///
/// Shape contiguity is only judged when every member sits on a valid site,
/// so a single misplaced member yields exactly one off-site entry.
pub fn check_legality(layout: &FpgaLayout, design: &Design, positions: &[Point]) -> LegalityReport {
    let mut violations = Vec::new();
    let mut site_of = vec![None; design.instances.len()];
    let mut occupants: BTreeMap<SiteId, Vec<usize>> = BTreeMap::new();

    for (i, inst) in design.instances.iter().enumerate() {
        let Some(&p) = positions.get(i).filter(|p| p.is_finite()) else {
            violations.push(Violation::Unplaced {
                instance: inst.name.clone(),
            });
            continue;
        };
        if inst.is_macro() {
            match layout.site_at(inst.resource, p) {
                Some(site) => {
                    site_of[i] = Some(site);
                    occupants.entry(site).or_default().push(i);
                }
                None => violations.push(Violation::OffSite {
                    instance: inst.name.clone(),
                    at: p,
                }),
            }
        }
        if let Some(r) = inst.region {
            let region = &design.regions[r];
            if !region.covers(&Rect::at(p, inst.width, inst.height), EPS) {
                violations.push(Violation::OutOfRegion {
                    instance: inst.name.clone(),
                    region: region.id.clone(),
                });
            }
        }
    }

    for (site, insts) in &occupants {
        let cap = layout.site_type_at(site.x).capacity_of(design.instances[insts[0]].resource);
        if insts.len() > cap as usize {
            violations.push(Violation::Overlap {
                site: *site,
                instances: insts.iter().map(|&i| design.instances[i].name.clone()).collect(),
            });
        }
    }

    for shape in &design.shapes {
        let sites: Option<Vec<SiteId>> = shape.members.iter().map(|&m| site_of[m]).collect();
        let Some(sites) = sites else { continue };
        let ok = sites
            .windows(2)
            .all(|w| w[1].x == w[0].x && w[1].k == w[0].k + 1);
        if !ok {
            violations.push(Violation::BrokenShape {
                shape: shape.id.clone(),
            });
        }
    }

    LegalityReport { violations }
}
