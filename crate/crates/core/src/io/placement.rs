use std::collections::HashMap;
use std::fmt::Write;

use super::{lines, num};
use crate::error::{Error, Result};
use crate::model::{Design, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementEntry {
    pub name: String,
    pub pos: Point,
    /// Site-aligned legalized macro position.
    pub legal: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementFile {
    pub entries: Vec<PlacementEntry>,
}

impl PlacementFile {
    /// One entry per instance, `legal` set for the instances in `legal`.
    pub fn from_positions(design: &Design, positions: &[Point], legal: impl Fn(usize) -> bool) -> Self {
        PlacementFile {
            entries: design
                .instances
                .iter()
                .zip(positions)
                .enumerate()
                .map(|(i, (inst, &pos))| PlacementEntry {
                    name: inst.name.clone(),
                    pos,
                    legal: legal(i),
                })
                .collect(),
        }
    }

    /// Positions indexed like `design.instances`. Fixed instances missing
    /// from the file take their fixed location; any other gap is an error.
    pub fn positions_for(&self, design: &Design) -> Result<Vec<Point>> {
        let index: HashMap<&str, usize> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.as_str(), i))
            .collect();
        design
            .instances
            .iter()
            .map(|inst| match index.get(inst.name.as_str()) {
                Some(&e) => Ok(self.entries[e].pos),
                None => inst.fixed_at.ok_or_else(|| {
                    Error::Validation(format!("placement has no entry for `{}`", inst.name))
                }),
            })
            .collect()
    }
}

/// Parse `name x y [LEGAL]` lines. When `design` is given every name must
/// refer to one of its instances.
pub fn parse_placement(text: &str, design: Option<&Design>) -> Result<PlacementFile> {
    let known = design.map(|d| d.name_index());
    let mut seen = HashMap::new();
    let mut entries = Vec::new();
    for (ln, toks) in lines(text) {
        let legal = match toks.len() {
            3 => false,
            4 if toks[3] == "LEGAL" => true,
            _ => return Err(Error::parse(ln, "expected `name x y [LEGAL]`")),
        };
        if let Some(k) = &known {
            if !k.contains_key(toks[0]) {
                return Err(Error::parse(ln, format!("unknown instance `{}`", toks[0])));
            }
        }
        if seen.insert(toks[0].to_string(), ln).is_some() {
            return Err(Error::parse(ln, format!("`{}` placed twice", toks[0])));
        }
        let pos = Point::new(num(ln, toks[1], "x")?, num(ln, toks[2], "y")?);
        if !pos.is_finite() {
            return Err(Error::parse(ln, "non-finite coordinate"));
        }
        entries.push(PlacementEntry {
            name: toks[0].to_string(),
            pos,
            legal,
        });
    }
    Ok(PlacementFile { entries })
}

pub fn write_placement(p: &PlacementFile) -> String {
    let mut s = String::new();
    for e in &p.entries {
        write!(s, "{} {} {}", e.name, e.pos.x, e.pos.y).unwrap();
        if e.legal {
            s.push_str(" LEGAL");
        }
        s.push('\n');
    }
    s
}
