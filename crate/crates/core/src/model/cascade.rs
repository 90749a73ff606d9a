use super::{Design, Instance, Net, Pin, Point};
use crate::error::Result;

/// One merged cascade and the members it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeUnit {
    /// Index of the merged instance in the merged design.
    pub merged: usize,
    /// Index of the shape in the original design.
    pub shape: usize,
    /// Original member indices with their vertical offset from the anchor.
    pub members: Vec<(usize, f64)>,
}

/// Index bookkeeping between an original design and its merged form.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeMap {
    pub units: Vec<CascadeUnit>,
    /// Original instance index -> merged instance index.
    pub to_merged: Vec<usize>,
    /// Merged instance index -> original index, `None` for cascade units.
    pub to_original: Vec<Option<usize>>,
}

impl CascadeMap {
    /// Positions for every original instance given merged positions.
    pub fn expand(&self, merged: &[Point]) -> Vec<Point> {
        let mut out = vec![Point::default(); self.to_merged.len()];
        for (orig, &m) in self.to_merged.iter().enumerate() {
            out[orig] = merged[m];
        }
        for unit in &self.units {
            let anchor = merged[unit.merged];
            for &(orig, dy) in &unit.members {
                out[orig] = Point::new(anchor.x, anchor.y + dy);
            }
        }
        out
    }

    /// Merged positions from original ones; a unit is anchored at its
    /// first member.
    pub fn collapse(&self, original: &[Point]) -> Vec<Point> {
        let mut out = vec![Point::default(); self.to_original.len()];
        for (m, orig) in self.to_original.iter().enumerate() {
            if let Some(o) = orig {
                out[m] = original[*o];
            }
        }
        for unit in &self.units {
            out[unit.merged] = original[unit.members[0].0];
        }
        out
    }

    pub fn unit_of(&self, merged: usize) -> Option<&CascadeUnit> {
        self.units.iter().find(|u| u.merged == merged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedDesign {
    pub design: Design,
    pub map: CascadeMap,
}

/// Replace every cascade shape by a single tall instance.
///
/// The merged instance takes the slot of the shape's first member in
/// instance order, keeps that member's region, and carries `demand` equal to
/// the member count. Member pins move onto it with their offsets shifted up
/// by `ordinal * site height`.
pub fn merge_cascades(design: &Design) -> Result<MergedDesign> {
    design.validate_shapes()?;
    let n = design.instances.len();
    let mut shape_of = vec![None; n];
    for (s, shape) in design.shapes.iter().enumerate() {
        for (o, &m) in shape.members.iter().enumerate() {
            shape_of[m] = Some((s, o));
        }
    }

    let mut instances = Vec::with_capacity(n);
    let mut to_merged = vec![usize::MAX; n];
    let mut to_original = Vec::with_capacity(n);
    let mut unit_index = vec![usize::MAX; design.shapes.len()];
    let mut units = Vec::new();
    for (i, inst) in design.instances.iter().enumerate() {
        match shape_of[i] {
            None => {
                to_merged[i] = instances.len();
                to_original.push(Some(i));
                let mut copy = inst.clone();
                copy.shape = None;
                instances.push(copy);
            }
            Some((s, _)) => {
                if unit_index[s] == usize::MAX {
                    let shape = &design.shapes[s];
                    let first = &design.instances[shape.members[0]];
                    let demand = shape.members.len() as u32;
                    unit_index[s] = units.len();
                    units.push(CascadeUnit {
                        merged: instances.len(),
                        shape: s,
                        members: shape
                            .members
                            .iter()
                            .enumerate()
                            .map(|(o, &m)| (m, o as f64 * first.height))
                            .collect(),
                    });
                    to_original.push(None);
                    instances.push(Instance {
                        name: format!("cascade:{}", shape.id),
                        resource: shape.resource,
                        demand,
                        width: first.width,
                        height: first.height * f64::from(demand),
                        fixed_at: None,
                        region: first.region,
                        shape: Some(s),
                    });
                }
                to_merged[i] = units[unit_index[s]].merged;
            }
        }
    }

    let nets = design
        .nets
        .iter()
        .map(|net| Net {
            name: net.name.clone(),
            pins: net
                .pins
                .iter()
                .map(|p| {
                    let dy = match shape_of[p.inst] {
                        Some((s, o)) => {
                            let h = design.instances[design.shapes[s].members[0]].height;
                            p.dy + o as f64 * h
                        }
                        None => p.dy,
                    };
                    Pin {
                        inst: to_merged[p.inst],
                        dx: p.dx,
                        dy,
                    }
                })
                .collect(),
        })
        .collect();

    Ok(MergedDesign {
        design: Design {
            instances,
            nets,
            shapes: Vec::new(),
            regions: design.regions.clone(),
        },
        map: CascadeMap {
            units,
            to_merged,
            to_original,
        },
    })
}
