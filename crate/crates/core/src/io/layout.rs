use std::collections::BTreeMap;
use std::fmt::Write;

use super::{lines, num};
use crate::error::{Error, Result};
use crate::model::{FpgaLayout, ResourceType, SiteType};

/// Parse `GRID`, `SITETYPE` and `COLUMN` records.
pub fn parse_layout(text: &str) -> Result<FpgaLayout> {
    let mut grid: Option<(u32, u32, usize)> = None;
    let mut site_types: Vec<SiteType> = Vec::new();
    let mut columns: BTreeMap<u32, (usize, usize)> = BTreeMap::new();

    for (ln, toks) in lines(text) {
        match toks[0] {
            "GRID" => {
                if toks.len() != 3 {
                    return Err(Error::parse(ln, "expected `GRID W H`"));
                }
                if grid.is_some() {
                    return Err(Error::parse(ln, "duplicate GRID"));
                }
                let w: u32 = num(ln, toks[1], "grid width")?;
                let h: u32 = num(ln, toks[2], "grid height")?;
                if w == 0 || h == 0 {
                    return Err(Error::parse(ln, "grid dimensions must be positive"));
                }
                grid = Some((w, h, ln));
            }
            "SITETYPE" => {
                if toks.len() != 5 {
                    return Err(Error::parse(ln, "expected `SITETYPE name width height RES:cap[,...]`"));
                }
                let name = toks[1].to_string();
                if site_types.iter().any(|s| s.name == name) {
                    return Err(Error::parse(ln, format!("duplicate site type `{name}`")));
                }
                let width: u32 = num(ln, toks[2], "site width")?;
                let height: u32 = num(ln, toks[3], "site height")?;
                if width != 1 || height == 0 {
                    return Err(Error::parse(ln, "site width must be 1 and height positive"));
                }
                let mut capacity = BTreeMap::new();
                for entry in toks[4].split(',') {
                    let (res, cap) = entry
                        .split_once(':')
                        .ok_or_else(|| Error::parse(ln, format!("bad capacity `{entry}`")))?;
                    let res: ResourceType = res.parse().map_err(|e| Error::parse(ln, e))?;
                    let cap: u32 = num(ln, cap, "capacity")?;
                    if capacity.insert(res, cap).is_some() {
                        return Err(Error::parse(ln, format!("{res} listed twice")));
                    }
                }
                if capacity.values().all(|&c| c == 0) {
                    return Err(Error::parse(ln, "site type hosts nothing"));
                }
                if ResourceType::MACROS.iter().any(|r| capacity.get(r).copied().unwrap_or(0) > 1) {
                    return Err(Error::parse(ln, "macro sites host at most one macro"));
                }
                site_types.push(SiteType {
                    name,
                    width,
                    height,
                    capacity,
                });
            }
            "COLUMN" => {
                if toks.len() != 3 {
                    return Err(Error::parse(ln, "expected `COLUMN x sitetype`"));
                }
                let x: u32 = num(ln, toks[1], "column")?;
                let t = site_types
                    .iter()
                    .position(|s| s.name == toks[2])
                    .ok_or_else(|| Error::parse(ln, format!("unknown site type `{}`", toks[2])))?;
                if columns.insert(x, (t, ln)).is_some() {
                    return Err(Error::parse(ln, format!("duplicate column {x}")));
                }
            }
            other => return Err(Error::parse(ln, format!("unknown record `{other}`"))),
        }
    }

    let (grid_w, grid_h, grid_line) = grid.ok_or_else(|| Error::parse(1, "missing GRID"))?;
    let mut cols = Vec::with_capacity(grid_w as usize);
    for x in 0..grid_w {
        let &(t, ln) = columns
            .get(&x)
            .ok_or_else(|| Error::parse(grid_line, format!("column {x} has no site type")))?;
        if grid_h % site_types[t].height != 0 {
            return Err(Error::parse(ln, "height does not tile column"));
        }
        cols.push(t);
    }
    if let Some((&x, &(_, ln))) = columns.range(grid_w..).next() {
        return Err(Error::parse(ln, format!("column {x} outside grid")));
    }
    FpgaLayout::new(grid_w, grid_h, site_types, cols)
}

pub fn write_layout(layout: &FpgaLayout) -> String {
    let mut s = String::new();
    writeln!(s, "GRID {} {}", layout.grid_w, layout.grid_h).unwrap();
    for st in &layout.site_types {
        let caps: Vec<String> = st.capacity.iter().map(|(r, c)| format!("{r}:{c}")).collect();
        writeln!(s, "SITETYPE {} {} {} {}", st.name, st.width, st.height, caps.join(",")).unwrap();
    }
    for (x, &t) in layout.columns.iter().enumerate() {
        writeln!(s, "COLUMN {x} {}", layout.site_types[t].name).unwrap();
    }
    s
}
