//! Layout, design and placement types.
//!
//! Coordinates are in grid units: one CLB column is one unit wide and one
//! CLB site is one unit tall. Positions always refer to the lower-left
//! corner of an instance.

mod cascade;
mod geometry;
mod legality;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cascade::{merge_cascades, CascadeMap, CascadeUnit, MergedDesign};
pub use geometry::{region_clamp, Rect};
pub use legality::{check_legality, LegalityReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResourceType {
    Lut,
    Ff,
    Dsp,
    Bram,
    Io,
}

impl ResourceType {
    pub const ALL: [ResourceType; 5] = [
        ResourceType::Lut,
        ResourceType::Ff,
        ResourceType::Dsp,
        ResourceType::Bram,
        ResourceType::Io,
    ];

    /// Resources that own an electrostatic system during global placement.
    pub const PLACEABLE: [ResourceType; 4] = [
        ResourceType::Lut,
        ResourceType::Ff,
        ResourceType::Dsp,
        ResourceType::Bram,
    ];

    pub const MACROS: [ResourceType; 2] = [ResourceType::Dsp, ResourceType::Bram];

    pub fn is_macro(self) -> bool {
        matches!(self, ResourceType::Dsp | ResourceType::Bram)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceType::Lut => "LUT",
            ResourceType::Ff => "FF",
            ResourceType::Dsp => "DSP",
            ResourceType::Bram => "BRAM",
            ResourceType::Io => "IO",
        }
    }

    /// Position inside [`ResourceType::PLACEABLE`], if any.
    pub fn system_index(self) -> Option<usize> {
        ResourceType::PLACEABLE.iter().position(|&r| r == self)
    }
}

impl fmt::Display for ResourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "LUT" => Ok(ResourceType::Lut),
            "FF" => Ok(ResourceType::Ff),
            "DSP" => Ok(ResourceType::Dsp),
            "BRAM" => Ok(ResourceType::Bram),
            "IO" => Ok(ResourceType::Io),
            other => Err(format!("unknown resource type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn manhattan(self, other: Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteType {
    pub name: String,
    pub width: u32,
    pub height: u32,
    /// Instances of each resource one site can host.
    pub capacity: BTreeMap<ResourceType, u32>,
}

impl SiteType {
    pub fn capacity_of(&self, res: ResourceType) -> u32 {
        self.capacity.get(&res).copied().unwrap_or(0)
    }

    pub fn hosts(&self, res: ResourceType) -> bool {
        self.capacity_of(res) > 0
    }

    pub fn area(&self) -> f64 {
        f64::from(self.width) * f64::from(self.height)
    }
}

/// A macro site: column `x`, `k`-th site from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId {
    pub x: u32,
    pub k: u32,
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.k)
    }
}

/// Column-based FPGA fabric: every column holds one site type stacked from
/// `y = 0` upward.
#[derive(Debug, Clone, PartialEq)]
pub struct FpgaLayout {
    pub grid_w: u32,
    pub grid_h: u32,
    pub site_types: Vec<SiteType>,
    /// Site type index for every column `x` in `0..grid_w`.
    pub columns: Vec<usize>,
}

impl FpgaLayout {
    pub fn new(
        grid_w: u32,
        grid_h: u32,
        site_types: Vec<SiteType>,
        columns: Vec<usize>,
    ) -> Result<Self> {
        let layout = FpgaLayout {
            grid_w,
            grid_h,
            site_types,
            columns,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.grid_w == 0 || self.grid_h == 0 {
            return bad("grid dimensions must be positive".into());
        }
        if self.columns.len() != self.grid_w as usize {
            return bad(format!(
                "{} columns declared for a grid of width {}",
                self.columns.len(),
                self.grid_w
            ));
        }
        for st in &self.site_types {
            if st.width != 1 {
                return bad(format!("site type `{}` must be one column wide", st.name));
            }
            if st.height == 0 {
                return bad(format!("site type `{}` has zero height", st.name));
            }
            if st.capacity.values().all(|&c| c == 0) {
                return bad(format!("site type `{}` hosts no resource", st.name));
            }
            for res in ResourceType::MACROS {
                if st.capacity_of(res) > 1 {
                    return bad(format!(
                        "site type `{}` hosts more than one {res} per site",
                        st.name
                    ));
                }
            }
        }
        for (x, &t) in self.columns.iter().enumerate() {
            let Some(st) = self.site_types.get(t) else {
                return bad(format!("column {x} references unknown site type"));
            };
            if self.grid_h % st.height != 0 {
                return bad(format!(
                    "column {x}: height {} does not tile column of height {}",
                    st.height, self.grid_h
                ));
            }
        }
        Ok(())
    }

    pub fn site_type_at(&self, x: u32) -> &SiteType {
        &self.site_types[self.columns[x as usize]]
    }

    pub fn site_type_index(&self, name: &str) -> Option<usize> {
        self.site_types.iter().position(|s| s.name == name)
    }

    /// The site type instances of `res` are sized after: the first declared
    /// type hosting `res` that is used by some column, else the first
    /// declared type hosting it.
    pub fn host_type(&self, res: ResourceType) -> Option<&SiteType> {
        let used = self
            .site_types
            .iter()
            .enumerate()
            .find(|(i, s)| s.hosts(res) && self.columns.contains(i));
        used.map(|(_, s)| s)
            .or_else(|| self.site_types.iter().find(|s| s.hosts(res)))
    }

    pub fn columns_for(&self, res: ResourceType) -> impl Iterator<Item = u32> + '_ {
        (0..self.grid_w).filter(move |&x| self.site_type_at(x).hosts(res))
    }

    pub fn sites_in_column(&self, x: u32) -> u32 {
        self.grid_h / self.site_type_at(x).height
    }

    pub fn site_rect(&self, site: SiteId) -> Rect {
        let st = self.site_type_at(site.x);
        let y = f64::from(site.k * st.height);
        Rect::new(
            f64::from(site.x),
            y,
            f64::from(site.x + st.width),
            y + f64::from(st.height),
        )
    }

    pub fn site_origin(&self, site: SiteId) -> Point {
        let st = self.site_type_at(site.x);
        Point::new(f64::from(site.x), f64::from(site.k * st.height))
    }

    /// All sites that can host `res`, in (column, index) order.
    pub fn sites_for(&self, res: ResourceType) -> Vec<SiteId> {
        self.columns_for(res)
            .flat_map(|x| (0..self.sites_in_column(x)).map(move |k| SiteId { x, k }))
            .collect()
    }

    /// The site whose lower-left corner is exactly `p`, if it hosts `res`.
    pub fn site_at(&self, res: ResourceType, p: Point) -> Option<SiteId> {
        const EPS: f64 = 1e-9;
        if !p.is_finite() || p.x < -EPS || p.y < -EPS {
            return None;
        }
        let x = p.x.round();
        if (p.x - x).abs() > EPS || x >= f64::from(self.grid_w) {
            return None;
        }
        let x = x as u32;
        let st = self.site_type_at(x);
        if !st.hosts(res) {
            return None;
        }
        let k = (p.y / f64::from(st.height)).round();
        if (p.y - k * f64::from(st.height)).abs() > EPS || k >= f64::from(self.sites_in_column(x)) {
            return None;
        }
        Some(SiteId { x, k: k as u32 })
    }

    /// Width and height of one instance of `res`. Macros and IOs take the
    /// size of their hosting site; LUT/FF instances are squares of area
    /// `site_area / capacity`.
    pub fn instance_size(&self, res: ResourceType) -> Option<(f64, f64)> {
        let st = self.host_type(res)?;
        if res.is_macro() {
            Some((f64::from(st.width), f64::from(st.height)))
        } else {
            let side = (st.area() / f64::from(st.capacity_of(res))).sqrt();
            Some((side, side))
        }
    }

    pub fn chip(&self) -> Rect {
        Rect::new(0.0, 0.0, f64::from(self.grid_w), f64::from(self.grid_h))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub resource: ResourceType,
    /// Resource slots consumed; above 1 only for merged cascades.
    pub demand: u32,
    pub width: f64,
    pub height: f64,
    /// Fixed lower-left position, for fixed instances.
    pub fixed_at: Option<Point>,
    pub region: Option<usize>,
    pub shape: Option<usize>,
}

impl Instance {
    pub fn is_fixed(&self) -> bool {
        self.fixed_at.is_some()
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn is_macro(&self) -> bool {
        self.resource.is_macro()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub inst: usize,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub name: String,
    pub pins: Vec<Pin>,
}

/// Ordered chain of same-type macros; members sit bottom-to-top in
/// consecutive sites of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeShape {
    pub id: String,
    pub resource: ResourceType,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: String,
    pub rects: Vec<Rect>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Design {
    pub instances: Vec<Instance>,
    pub nets: Vec<Net>,
    pub shapes: Vec<CascadeShape>,
    pub regions: Vec<Region>,
}

impl Design {
    pub fn name_index(&self) -> HashMap<&str, usize> {
        self.instances
            .iter()
            .enumerate()
            .map(|(i, inst)| (inst.name.as_str(), i))
            .collect()
    }

    pub fn count(&self, res: ResourceType) -> usize {
        self.instances.iter().filter(|i| i.resource == res).count()
    }

    /// Net indices touching each instance (once per net).
    pub fn nets_of_instances(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.instances.len()];
        for (n, net) in self.nets.iter().enumerate() {
            for p in &net.pins {
                if out[p.inst].last() != Some(&n) {
                    out[p.inst].push(n);
                }
            }
        }
        out
    }

    pub fn pin_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.instances.len()];
        for net in &self.nets {
            for p in &net.pins {
                out[p.inst] += 1;
            }
        }
        out
    }

    /// Structural checks shared by the parser and the generator.
    pub fn validate(&self, layout: &FpgaLayout) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        let mut names = HashMap::new();
        for (i, inst) in self.instances.iter().enumerate() {
            if names.insert(inst.name.as_str(), i).is_some() {
                return bad(format!("duplicate instance `{}`", inst.name));
            }
            if inst.resource == ResourceType::Io && !inst.is_fixed() {
                return bad(format!("IO instance `{}` must be fixed", inst.name));
            }
            if !(inst.width > 0.0 && inst.height > 0.0) {
                return bad(format!("instance `{}` has no size", inst.name));
            }
            if let Some(p) = inst.fixed_at {
                let r = Rect::new(p.x, p.y, p.x + inst.width, p.y + inst.height);
                if !layout.chip().contains_rect(&r, 1e-9) {
                    return bad(format!("fixed instance `{}` lies outside the chip", inst.name));
                }
            }
            if let Some(r) = inst.region {
                if r >= self.regions.len() {
                    return bad(format!("instance `{}` references unknown region", inst.name));
                }
            }
        }
        for region in &self.regions {
            if region.rects.is_empty() {
                return bad(format!("region `{}` has no rectangles", region.id));
            }
            for r in &region.rects {
                if !(r.xl < r.xh && r.yl < r.yh) || !layout.chip().contains_rect(r, 0.0) {
                    return bad(format!("region `{}` has an invalid rectangle", region.id));
                }
            }
        }
        for net in &self.nets {
            if net.pins.is_empty() {
                return bad(format!("net `{}` has no pins", net.name));
            }
            if net.pins.iter().any(|p| p.inst >= self.instances.len()) {
                return bad(format!("net `{}` references an unknown instance", net.name));
            }
        }
        self.validate_shapes()?;
        for shape in &self.shapes {
            let need = shape.members.len() as u32;
            if layout.columns_for(shape.resource).all(|c| layout.sites_in_column(c) < need) {
                return bad(format!("shape `{}`: longer than every column", shape.id));
            }
        }
        Ok(())
    }

    /// Cascade membership checks; errors name the offending shape.
    pub fn validate_shapes(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        let mut owner: Vec<Option<usize>> = vec![None; self.instances.len()];
        for (s, shape) in self.shapes.iter().enumerate() {
            let fail = |why: &str| bad(format!("shape `{}`: {why}", shape.id));
            if !shape.resource.is_macro() {
                return fail("cascades must be DSP or BRAM");
            }
            if shape.members.len() < 2 {
                return fail("needs at least two members");
            }
            let mut region = None;
            for (o, &m) in shape.members.iter().enumerate() {
                let Some(inst) = self.instances.get(m) else {
                    return fail("member missing");
                };
                if inst.resource != shape.resource {
                    return fail("mixed resource types");
                }
                if inst.is_fixed() {
                    return fail("fixed cascade members are not supported");
                }
                if owner[m].replace(s).is_some() {
                    return fail(&format!("instance `{}` belongs to two shapes", inst.name));
                }
                if inst.shape != Some(s) {
                    return fail(&format!("instance `{}` does not record its shape", inst.name));
                }
                if o == 0 {
                    region = inst.region;
                } else if inst.region != region {
                    return fail("members disagree on region");
                }
            }
        }
        for (i, inst) in self.instances.iter().enumerate() {
            if inst.shape.is_some() && owner[i].is_none() {
                return bad(format!("instance `{}` names a shape it is not in", inst.name));
            }
        }
        Ok(())
    }
}

/// Positions for every instance of a design plus per-resource fillers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementState {
    pub positions: Vec<Point>,
    pub fillers: BTreeMap<ResourceType, Vec<Point>>,
    pub iteration: usize,
}

impl PlacementState {
    pub fn new(positions: Vec<Point>) -> Self {
        PlacementState {
            positions,
            ..Default::default()
        }
    }
}
