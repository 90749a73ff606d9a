use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    CascadeShape, Design, FpgaLayout, Instance, Net, Pin, Point, Rect, Region, ResourceType,
    SiteId, SiteType,
};

/// Benchmark size class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// About 1k instances on a 40 x 40 fabric.
    Tiny,
    /// About 10k instances on an 80 x 80 fabric.
    Small,
    /// About 50k instances and 300 macros on a 150 x 150 fabric.
    Medium,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Tiny, Profile::Small, Profile::Medium];
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Tiny => "tiny",
            Profile::Small => "small",
            Profile::Medium => "medium",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Profile::Tiny),
            "small" => Ok(Profile::Small),
            "medium" => Ok(Profile::Medium),
            _ => Err(Error::InvalidArgument(format!(
                "unknown profile `{s}` (expected tiny, small or medium)"
            ))),
        }
    }
}

struct Params {
    grid: u32,
    luts: usize,
    ffs: usize,
    dsps: usize,
    brams: usize,
    ios: usize,
    regions: (usize, usize),
    region_w: (u32, u32),
    region_h: (u32, u32),
    dsp_cascades: (usize, usize),
    bram_cascades: (usize, usize),
    distinct_sizes: usize,
}

impl Profile {
    fn params(self) -> Params {
        match self {
            Profile::Tiny => Params {
                grid: 40,
                luts: 460,
                ffs: 440,
                dsps: 18,
                brams: 8,
                ios: 24,
                regions: (0, 3),
                region_w: (6, 14),
                region_h: (1, 2),
                dsp_cascades: (0, 1),
                bram_cascades: (0, 1),
                distinct_sizes: 2,
            },
            Profile::Small => Params {
                grid: 80,
                luts: 4800,
                ffs: 4600,
                dsps: 60,
                brams: 30,
                ios: 64,
                regions: (2, 8),
                region_w: (8, 20),
                region_h: (1, 3),
                dsp_cascades: (2, 5),
                bram_cascades: (1, 3),
                distinct_sizes: 5,
            },
            Profile::Medium => Params {
                grid: 150,
                luts: 24000,
                ffs: 23500,
                dsps: 180,
                brams: 120,
                ios: 160,
                regions: (8, 19),
                region_w: (10, 30),
                region_h: (2, 6),
                dsp_cascades: (8, 14),
                bram_cascades: (4, 8),
                distinct_sizes: 10,
            },
        }
    }
}

/// A column-based fabric: IO at both edges, a DSP column every 12 columns
/// starting at 5, a BRAM column every 12 starting at 10, CLB elsewhere.
/// `h` must be a multiple of 10.
pub fn generate_layout(w: u32, h: u32) -> Result<FpgaLayout> {
    if w < 3 || h == 0 || h % 10 != 0 {
        return Err(Error::InvalidArgument(format!(
            "layout {w} x {h}: need width >= 3 and height a multiple of 10"
        )));
    }
    let st = |name: &str, height, caps: &[(ResourceType, u32)]| SiteType {
        name: name.into(),
        width: 1,
        height,
        capacity: caps.iter().copied().collect(),
    };
    let types = vec![
        st("CLB", 1, &[(ResourceType::Lut, 8), (ResourceType::Ff, 16)]),
        st("DSP", 2, &[(ResourceType::Dsp, 1)]),
        st("BRAM", 5, &[(ResourceType::Bram, 1)]),
        st("IO", 1, &[(ResourceType::Io, 1)]),
    ];
    let columns = (0..w)
        .map(|x| {
            if x == 0 || x == w - 1 {
                3
            } else if x % 12 == 5 {
                1
            } else if x % 12 == 10 {
                2
            } else {
                0
            }
        })
        .collect();
    FpgaLayout::new(w, h, types, columns)
}

/// Deterministic synthetic benchmark.
///
/// A hidden legal macro placement is drawn first; cascades, region
/// membership and net locality are derived from it, so every generated
/// instance admits a legal solution. Global demand stays under 90% of
/// capacity and per-region demand under 95%.
pub fn generate_benchmark(seed: u64, profile: Profile) -> Result<(FpgaLayout, Design)> {
    let p = profile.params();
    let layout = generate_layout(p.grid, p.grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(profile as u64 + 1));
    for _ in 0..32 {
        if let Some(design) = attempt(&layout, &p, &mut rng) {
            design.validate(&layout)?;
            return Ok((layout, design));
        }
    }
    Err(Error::Infeasible(format!(
        "generator found no feasible {profile} benchmark for seed {seed}"
    )))
}

struct Builder<'a> {
    layout: &'a FpgaLayout,
    instances: Vec<Instance>,
    hidden: Vec<Point>,
}

impl Builder<'_> {
    fn push(&mut self, name: String, res: ResourceType, at: Point) -> usize {
        let (width, height) = self.layout.instance_size(res).expect("generated layout hosts all resources");
        self.instances.push(Instance {
            name,
            resource: res,
            demand: 1,
            width,
            height,
            fixed_at: None,
            region: None,
            shape: None,
        });
        self.hidden.push(at);
        self.instances.len() - 1
    }
}

fn attempt(layout: &FpgaLayout, p: &Params, rng: &mut ChaCha8Rng) -> Option<Design> {
    let mut b = Builder {
        layout,
        instances: Vec::new(),
        hidden: Vec::new(),
    };
    let grid_h = f64::from(layout.grid_h);

    // Cascade sizes, shared across both macro types.
    let mut sizes: Vec<u32> = (2..=11).collect();
    sizes.shuffle(rng);
    sizes.truncate(p.distinct_sizes);

    let mut shapes = Vec::new();
    for (res, count, (lo, hi), prefix) in [
        (ResourceType::Dsp, p.dsps, p.dsp_cascades, "dsp"),
        (ResourceType::Bram, p.brams, p.bram_cascades, "bram"),
    ] {
        let columns: Vec<u32> = layout.columns_for(res).collect();
        let per_col = layout.sites_in_column(columns[0]);
        let mut free: BTreeMap<SiteId, bool> =
            layout.sites_for(res).into_iter().map(|s| (s, true)).collect();
        let max_len = (per_col / 2).max(2);
        let n_casc = rng.gen_range(lo..=hi);
        let mut lens: Vec<u32> = (0..n_casc)
            .map(|_| *sizes.choose(rng).unwrap())
            .map(|s| s.min(max_len))
            .collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        let mut placed = 0usize;
        for len in lens {
            if placed + len as usize > count / 2 {
                break;
            }
            let mut spot = None;
            for _ in 0..200 {
                let x = *columns.choose(rng).unwrap();
                let k = rng.gen_range(0..=per_col - len);
                if (k..k + len).all(|k| free[&SiteId { x, k }]) {
                    spot = Some((x, k));
                    break;
                }
            }
            let (x, k) = spot?;
            let s = shapes.len();
            let mut members = Vec::new();
            for o in 0..len {
                let site = SiteId { x, k: k + o };
                free.insert(site, false);
                let i = b.push(format!("{prefix}{}", placed), res, layout.site_origin(site));
                b.instances[i].shape = Some(s);
                members.push(i);
                placed += 1;
            }
            shapes.push(CascadeShape {
                id: format!("c{s}"),
                resource: res,
                members,
            });
        }
        let mut open: Vec<SiteId> = free.iter().filter(|(_, f)| **f).map(|(s, _)| *s).collect();
        open.shuffle(rng);
        if open.len() < count - placed {
            return None;
        }
        for site in open.into_iter().take(count - placed) {
            b.push(format!("{prefix}{placed}"), res, layout.site_origin(site));
            placed += 1;
        }
    }

    let clb_cols: Vec<u32> = layout.columns_for(ResourceType::Lut).collect();
    for (res, count, prefix) in [(ResourceType::Lut, p.luts, "lut"), (ResourceType::Ff, p.ffs, "ff")] {
        let (w, h) = layout.instance_size(res).unwrap();
        for i in 0..count {
            let x = f64::from(*clb_cols.choose(rng).unwrap()) + rng.gen_range(0.0..1.0 - w);
            let y = rng.gen_range(0.0..grid_h - h);
            b.push(format!("{prefix}{i}"), res, Point::new(x, y));
        }
    }

    let mut io_sites = layout.sites_for(ResourceType::Io);
    io_sites.shuffle(rng);
    for (i, site) in io_sites.into_iter().take(p.ios).enumerate() {
        let at = layout.site_origin(site);
        let j = b.push(format!("io{i}"), ResourceType::Io, at);
        b.instances[j].fixed_at = Some(at);
    }

    let regions = make_regions(layout, p, rng);
    assign_regions(layout, &mut b, &shapes, &regions, rng);
    let nets = make_nets(&b, layout, rng);

    Some(Design {
        instances: b.instances,
        nets,
        shapes,
        regions,
    })
}

fn make_regions(layout: &FpgaLayout, p: &Params, rng: &mut ChaCha8Rng) -> Vec<Region> {
    let n = rng.gen_range(p.regions.0..=p.regions.1);
    let mut taken: Vec<Rect> = Vec::new();
    let mut regions = Vec::new();
    let draw = |rng: &mut ChaCha8Rng, taken: &mut Vec<Rect>| -> Option<Rect> {
        for _ in 0..200 {
            let w = rng.gen_range(p.region_w.0..=p.region_w.1);
            let h = 10 * rng.gen_range(p.region_h.0..=p.region_h.1);
            if w + 2 > layout.grid_w || h > layout.grid_h {
                continue;
            }
            let x = rng.gen_range(1..=layout.grid_w - 1 - w);
            let y = 10 * rng.gen_range(0..=(layout.grid_h - h) / 10);
            let r = Rect::new(f64::from(x), f64::from(y), f64::from(x + w), f64::from(y + h));
            if taken.iter().all(|t| t.intersect(&r).is_none()) {
                taken.push(r);
                return Some(r);
            }
        }
        None
    };
    for i in 0..n {
        let Some(first) = draw(rng, &mut taken) else { break };
        let mut rects = vec![first];
        if rng.gen_bool(0.25) {
            if let Some(second) = draw(rng, &mut taken) {
                rects.push(second);
            }
        }
        regions.push(Region {
            id: format!("r{i}"),
            rects,
        });
    }
    regions
}

/// Deterministic high-contention benchmark on the tiny fabric.
///
/// One region spans two DSP columns and the BRAM column between them over
/// 20 rows. At least 95% of its DSP and BRAM sites are taken by
/// region-constrained macros, most of them in cascades of length 4 to 6.
/// A hidden legal placement is drawn first, so a solution always exists.
pub fn generate_contention(seed: u64) -> Result<(FpgaLayout, Design)> {
    let p = Profile::Tiny.params();
    let layout = generate_layout(p.grid, p.grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995_c0ff_ee00);
    let mut b = Builder {
        layout: &layout,
        instances: Vec::new(),
        hidden: Vec::new(),
    };
    let dsp_cols: Vec<u32> = layout.columns_for(ResourceType::Dsp).collect();
    let first = rng.gen_range(0..dsp_cols.len() - 1);
    let (xl, xh) = (dsp_cols[first], dsp_cols[first + 1] + 1);
    let y0 = 10 * rng.gen_range(0..=(layout.grid_h - 20) / 10);
    let rect = Rect::new(f64::from(xl), f64::from(y0), f64::from(xh), f64::from(y0 + 20));
    let region = Region {
        id: "r0".into(),
        rects: vec![rect],
    };

    let mut shapes = Vec::new();
    let mut taken: Vec<SiteId> = Vec::new();
    for (res, prefix) in [(ResourceType::Dsp, "dsp"), (ResourceType::Bram, "bram")] {
        let mut inside: Vec<SiteId> = layout
            .sites_for(res)
            .into_iter()
            .filter(|&s| region.covers(&layout.site_rect(s), 1e-9))
            .collect();
        inside.sort_by_key(|s| (s.x, s.k));
        // Leave at most one site in twenty free.
        let spare = inside.len() / 20;
        let skip: Vec<SiteId> = inside.choose_multiple(&mut rng, spare).copied().collect();
        let mut placed = b.instances.iter().filter(|i| i.resource == res).count();
        let mut run: Vec<SiteId> = Vec::new();
        let flush = |b: &mut Builder<'_>, run: &mut Vec<SiteId>, shapes: &mut Vec<CascadeShape>, placed: &mut usize, rng: &mut ChaCha8Rng| {
            while !run.is_empty() {
                let len = if run.len() >= 4 { rng.gen_range(4..=run.len().min(6)) } else { run.len() };
                let part: Vec<SiteId> = run.drain(..len).collect();
                let s = shapes.len();
                let mut members = Vec::new();
                for site in &part {
                    let i = b.push(format!("{prefix}{placed}"), res, layout.site_origin(*site));
                    b.instances[i].region = Some(0);
                    *placed += 1;
                    members.push(i);
                }
                if members.len() > 1 {
                    for &m in &members {
                        b.instances[m].shape = Some(s);
                    }
                    shapes.push(CascadeShape {
                        id: format!("c{s}"),
                        resource: res,
                        members,
                    });
                }
            }
        };
        for (n, &site) in inside.iter().enumerate() {
            let breaks = skip.contains(&site) || n > 0 && inside[n - 1].x != site.x;
            if breaks {
                flush(&mut b, &mut run, &mut shapes, &mut placed, &mut rng);
            }
            if !skip.contains(&site) {
                run.push(site);
            }
        }
        flush(&mut b, &mut run, &mut shapes, &mut placed, &mut rng);
        taken.extend(inside);

        // A few free macros elsewhere.
        let mut open: Vec<SiteId> = layout.sites_for(res).into_iter().filter(|s| !taken.contains(s)).collect();
        open.shuffle(&mut rng);
        for site in open.into_iter().take(6) {
            b.push(format!("{prefix}{placed}"), res, layout.site_origin(site));
            placed += 1;
        }
    }

    let clb_cols: Vec<u32> = layout.columns_for(ResourceType::Lut).collect();
    let grid_h = f64::from(layout.grid_h);
    for (res, count, prefix) in [(ResourceType::Lut, p.luts, "lut"), (ResourceType::Ff, p.ffs, "ff")] {
        let (w, h) = layout.instance_size(res).unwrap();
        for i in 0..count {
            let x = f64::from(*clb_cols.choose(&mut rng).unwrap()) + rng.gen_range(0.0..1.0 - w);
            let y = rng.gen_range(0.0..grid_h - h);
            b.push(format!("{prefix}{i}"), res, Point::new(x, y));
        }
    }
    let mut io_sites = layout.sites_for(ResourceType::Io);
    io_sites.shuffle(&mut rng);
    for (i, site) in io_sites.into_iter().take(p.ios).enumerate() {
        let at = layout.site_origin(site);
        let j = b.push(format!("io{i}"), ResourceType::Io, at);
        b.instances[j].fixed_at = Some(at);
    }
    let nets = make_nets(&b, &layout, &mut rng);
    let design = Design {
        instances: b.instances,
        nets,
        shapes,
        regions: vec![region],
    };
    design.validate(&layout)?;
    Ok((layout, design))
}

/// Constrain a share of the instances whose hidden footprint lies inside a
/// region, never pushing a region past 95% of its capacity for any resource.
fn assign_regions(
    layout: &FpgaLayout,
    b: &mut Builder<'_>,
    shapes: &[CascadeShape],
    regions: &[Region],
    rng: &mut ChaCha8Rng,
) {
    const SHARE: f64 = 0.6;
    for (r, region) in regions.iter().enumerate() {
        let mut budget: BTreeMap<ResourceType, f64> = BTreeMap::new();
        for res in ResourceType::PLACEABLE {
            let sites = layout
                .sites_for(res)
                .into_iter()
                .filter(|&s| region.covers(&layout.site_rect(s), 1e-9))
                .count();
            let cap = layout.host_type(res).unwrap().capacity_of(res);
            budget.insert(res, 0.95 * (sites as f64) * f64::from(cap));
        }
        let inside = |b: &Builder<'_>, i: usize| {
            let inst = &b.instances[i];
            region.covers(&Rect::at(b.hidden[i], inst.width, inst.height), 1e-9)
        };
        for shape in shapes {
            let n = shape.members.len() as f64;
            let room = budget[&shape.resource];
            if shape.members.iter().all(|&m| inside(b, m)) && n <= room && rng.gen_bool(SHARE) {
                *budget.get_mut(&shape.resource).unwrap() -= n;
                for &m in &shape.members {
                    b.instances[m].region = Some(r);
                }
            }
        }
        for i in 0..b.instances.len() {
            let inst = &b.instances[i];
            if inst.shape.is_some() || inst.is_fixed() || inst.region.is_some() {
                continue;
            }
            let res = inst.resource;
            if inside(b, i) && budget[&res] >= 1.0 && rng.gen_bool(SHARE) {
                *budget.get_mut(&res).unwrap() -= 1.0;
                b.instances[i].region = Some(r);
            }
        }
    }
}

/// One net per non-IO instance, driving 1 to 15 sinks drawn from nearby
/// hidden locations.
fn make_nets(b: &Builder<'_>, layout: &FpgaLayout, rng: &mut ChaCha8Rng) -> Vec<Net> {
    const CELL: f64 = 4.0;
    let nx = (f64::from(layout.grid_w) / CELL).ceil() as usize;
    let ny = (f64::from(layout.grid_h) / CELL).ceil() as usize;
    let cell_of = |p: Point| {
        let cx = ((p.x / CELL) as usize).min(nx - 1);
        let cy = ((p.y / CELL) as usize).min(ny - 1);
        (cx, cy)
    };
    let mut buckets = vec![Vec::new(); nx * ny];
    for (i, &p) in b.hidden.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        buckets[cy * nx + cx].push(i);
    }

    let pin = |rng: &mut ChaCha8Rng, i: usize| {
        let inst = &b.instances[i];
        if inst.is_macro() {
            let steps = (inst.height * 2.0) as u32;
            Pin {
                inst: i,
                dx: 0.5,
                dy: f64::from(rng.gen_range(0..steps)) * 0.5,
            }
        } else {
            Pin { inst: i, dx: 0.0, dy: 0.0 }
        }
    };

    let mut nets = Vec::new();
    for driver in 0..b.instances.len() {
        if b.instances[driver].is_fixed() {
            continue;
        }
        let sinks = match rng.gen_range(0..100) {
            0..=49 => 1,
            50..=69 => 2,
            70..=89 => rng.gen_range(3..=5),
            _ => rng.gen_range(6..=15),
        };
        let (cx, cy) = cell_of(b.hidden[driver]);
        let mut pins = vec![pin(rng, driver)];
        let mut used = vec![driver];
        for _ in 0..sinks {
            for _ in 0..8 {
                let reach: i64 = if rng.gen_bool(0.8) { 1 } else { 3 };
                let qx = cx as i64 + rng.gen_range(-reach..=reach);
                let qy = cy as i64 + rng.gen_range(-reach..=reach);
                if qx < 0 || qy < 0 || qx >= nx as i64 || qy >= ny as i64 {
                    continue;
                }
                let bucket = &buckets[qy as usize * nx + qx as usize];
                let Some(&s) = bucket.choose(rng) else { continue };
                if !used.contains(&s) {
                    used.push(s);
                    pins.push(pin(rng, s));
                    break;
                }
            }
        }
        nets.push(Net {
            name: format!("n{}", nets.len()),
            pins,
        });
    }
    nets
}
