use std::collections::HashMap;
use std::fmt::Write;

use super::{lines, num};
use crate::error::{Error, Result};
use crate::model::{
    CascadeShape, Design, FpgaLayout, Instance, Net, Pin, Point, Rect, Region, ResourceType,
};

/// Parse a design against `layout`, which fixes every instance's size.
///
/// Records may appear in any order; references are resolved after the whole
/// file is read and dangling ones are reported at the referencing line.
pub fn parse_design(text: &str, layout: &FpgaLayout) -> Result<Design> {
    let mut regions: Vec<Region> = Vec::new();
    let mut region_ids: HashMap<String, usize> = HashMap::new();
    let mut insts: Vec<(usize, String, ResourceType, Option<String>)> = Vec::new();
    let mut shapes: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut nets: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut fixed: Vec<(usize, &str, f64, f64)> = Vec::new();

    for (ln, toks) in lines(text) {
        match toks[0] {
            "INST" => {
                let region = match toks.len() {
                    3 => None,
                    5 if toks[3] == "REGION" => Some(toks[4].to_string()),
                    _ => return Err(Error::parse(ln, "expected `INST name RES [REGION id]`")),
                };
                if toks[1].contains(':') {
                    return Err(Error::parse(ln, "instance names may not contain `:`"));
                }
                let res: ResourceType = toks[2].parse().map_err(|e| Error::parse(ln, e))?;
                insts.push((ln, toks[1].to_string(), res, region));
            }
            "SHAPE" => {
                if toks.len() < 5 {
                    return Err(Error::parse(ln, "expected `SHAPE id RES m1 m2 ...`"));
                }
                shapes.push((ln, toks));
            }
            "REGION" => {
                if toks.len() < 6 || (toks.len() - 2) % 4 != 0 {
                    return Err(Error::parse(ln, "expected `REGION id xl yl xh yh [...]`"));
                }
                let mut rects = Vec::new();
                for c in toks[2..].chunks(4) {
                    let v: Vec<f64> = c
                        .iter()
                        .map(|t| num(ln, t, "coordinate"))
                        .collect::<Result<_>>()?;
                    let r = Rect::new(v[0], v[1], v[2], v[3]);
                    if !(r.xl < r.xh && r.yl < r.yh) || !layout.chip().contains_rect(&r, 0.0) {
                        return Err(Error::parse(ln, "region rectangle empty or outside the chip"));
                    }
                    rects.push(r);
                }
                if region_ids.insert(toks[1].to_string(), regions.len()).is_some() {
                    return Err(Error::parse(ln, format!("duplicate region `{}`", toks[1])));
                }
                regions.push(Region {
                    id: toks[1].to_string(),
                    rects,
                });
            }
            "NET" => {
                if toks.len() < 3 {
                    return Err(Error::parse(ln, "expected `NET name inst:dx:dy ...`"));
                }
                nets.push((ln, toks));
            }
            "FIXED" => {
                if toks.len() != 4 {
                    return Err(Error::parse(ln, "expected `FIXED name x y`"));
                }
                fixed.push((ln, toks[1], num(ln, toks[2], "x")?, num(ln, toks[3], "y")?));
            }
            other => return Err(Error::parse(ln, format!("unknown record `{other}`"))),
        }
    }

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut instances = Vec::with_capacity(insts.len());
    for (ln, name, res, region) in insts {
        let region = match region {
            Some(id) => Some(
                *region_ids
                    .get(&id)
                    .ok_or_else(|| Error::parse(ln, format!("unknown region `{id}`")))?,
            ),
            None => None,
        };
        let (width, height) = layout
            .instance_size(res)
            .ok_or_else(|| Error::parse(ln, format!("layout has no site for {res}")))?;
        if index.insert(name.clone(), instances.len()).is_some() {
            return Err(Error::parse(ln, format!("duplicate instance `{name}`")));
        }
        instances.push(Instance {
            name,
            resource: res,
            demand: 1,
            width,
            height,
            fixed_at: None,
            region,
            shape: None,
        });
    }
    let lookup = |ln: usize, name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(ln, format!("unknown instance `{name}`")))
    };

    for (ln, name, x, y) in fixed {
        let i = lookup(ln, name)?;
        if instances[i].fixed_at.replace(Point::new(x, y)).is_some() {
            return Err(Error::parse(ln, format!("`{name}` fixed twice")));
        }
    }

    let mut cascade = Vec::with_capacity(shapes.len());
    for (ln, toks) in shapes {
        let res: ResourceType = toks[2].parse().map_err(|e| Error::parse(ln, e))?;
        let s = cascade.len();
        let mut members = Vec::with_capacity(toks.len() - 3);
        for m in &toks[3..] {
            let i = lookup(ln, m)?;
            if instances[i].resource != res {
                return Err(Error::parse(ln, format!("`{m}` is not a {res}")));
            }
            if instances[i].shape.replace(s).is_some() {
                return Err(Error::parse(ln, format!("`{m}` already belongs to a shape")));
            }
            members.push(i);
        }
        cascade.push(CascadeShape {
            id: toks[1].to_string(),
            resource: res,
            members,
        });
    }

    let mut net_list = Vec::with_capacity(nets.len());
    for (ln, toks) in nets {
        let mut pins = Vec::with_capacity(toks.len() - 2);
        for p in &toks[2..] {
            let mut parts = p.split(':');
            let (Some(name), Some(dx), Some(dy), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(ln, format!("bad pin `{p}`")));
            };
            pins.push(Pin {
                inst: lookup(ln, name)?,
                dx: num(ln, dx, "pin offset")?,
                dy: num(ln, dy, "pin offset")?,
            });
        }
        net_list.push(Net {
            name: toks[1].to_string(),
            pins,
        });
    }

    let design = Design {
        instances,
        nets: net_list,
        shapes: cascade,
        regions,
    };
    design.validate(layout)?;
    Ok(design)
}

/// Canonical text form: regions, instances, fixed positions, shapes, nets.
pub fn write_design(design: &Design) -> String {
    let mut s = String::new();
    for r in &design.regions {
        write!(s, "REGION {}", r.id).unwrap();
        for q in &r.rects {
            write!(s, " {} {} {} {}", q.xl, q.yl, q.xh, q.yh).unwrap();
        }
        s.push('\n');
    }
    for inst in &design.instances {
        write!(s, "INST {} {}", inst.name, inst.resource).unwrap();
        if let Some(r) = inst.region {
            write!(s, " REGION {}", design.regions[r].id).unwrap();
        }
        s.push('\n');
    }
    for inst in &design.instances {
        if let Some(p) = inst.fixed_at {
            writeln!(s, "FIXED {} {} {}", inst.name, p.x, p.y).unwrap();
        }
    }
    for shape in &design.shapes {
        write!(s, "SHAPE {} {}", shape.id, shape.resource).unwrap();
        for &m in &shape.members {
            write!(s, " {}", design.instances[m].name).unwrap();
        }
        s.push('\n');
    }
    for net in &design.nets {
        write!(s, "NET {}", net.name).unwrap();
        for p in &net.pins {
            write!(s, " {}:{}:{}", design.instances[p.inst].name, p.dx, p.dy).unwrap();
        }
        s.push('\n');
    }
    s
}
