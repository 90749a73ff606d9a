//! Three-phase macro legalization: greedy cascade fitting, per-region
//! min-cost matching, then matching for all remaining macros.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::flow::{scale_cost, solve_assignment, AssignmentProblem};
use crate::model::{Design, FpgaLayout, MergedDesign, Point, Rect, Region, ResourceType, SiteId};

/// Weight of displacement in the matching cost.
pub const ALPHA: f64 = 100.0;

/// Nearest candidate sites offered to each macro before doubling.
pub const DEFAULT_K_CAND: usize = 32;

/// Connectivity weight of an instance: sum of `1 / (|e| - 1)` over the
/// distinct nets it touches with at least two pins.
pub fn precond_wl(design: &Design) -> Vec<f64> {
    let mut w = vec![0.0; design.instances.len()];
    for (i, nets) in design.nets_of_instances().into_iter().enumerate() {
        w[i] = nets
            .iter()
            .map(|&n| design.nets[n].pins.len())
            .filter(|&k| k >= 2)
            .map(|k| 1.0 / (k - 1) as f64)
            .sum();
    }
    w
}

/// `ALPHA * precond * dist`, with Manhattan distance between lower-left
/// corners.
pub fn arc_cost(precond: f64, from: Point, to: Point) -> f64 {
    ALPHA * precond * from.manhattan(to)
}

/// Free macro sites, per resource.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SitePool {
    free: BTreeMap<ResourceType, BTreeSet<SiteId>>,
}

impl SitePool {
    /// Every macro site of the layout, minus those under fixed macros.
    pub fn new(layout: &FpgaLayout, design: &Design) -> Self {
        let mut free: BTreeMap<ResourceType, BTreeSet<SiteId>> = ResourceType::MACROS
            .iter()
            .map(|&r| (r, layout.sites_for(r).into_iter().collect()))
            .collect();
        for inst in &design.instances {
            let Some(p) = inst.fixed_at.filter(|_| inst.is_macro()) else { continue };
            let set = free.get_mut(&inst.resource).unwrap();
            for k in 0..inst.demand {
                let h = inst.height / f64::from(inst.demand);
                if let Some(s) = layout.site_at(inst.resource, Point::new(p.x, p.y + f64::from(k) * h)) {
                    set.remove(&s);
                }
            }
        }
        SitePool { free }
    }

    pub fn is_free(&self, res: ResourceType, site: SiteId) -> bool {
        self.free.get(&res).is_some_and(|s| s.contains(&site))
    }

    pub fn take(&mut self, res: ResourceType, site: SiteId) -> bool {
        self.free.get_mut(&res).is_some_and(|s| s.remove(&site))
    }

    /// Return a site taken earlier.
    pub fn give(&mut self, res: ResourceType, site: SiteId) -> bool {
        self.free.entry(res).or_default().insert(site)
    }

    pub fn free_sites(&self, res: ResourceType) -> impl Iterator<Item = SiteId> + '_ {
        self.free.get(&res).into_iter().flatten().copied()
    }

    pub fn len(&self, res: ResourceType) -> usize {
        self.free.get(&res).map_or(0, BTreeSet::len)
    }

    pub fn is_empty(&self) -> bool {
        self.free.values().all(BTreeSet::is_empty)
    }

    /// Free sites of `res` whose footprint lies inside `region`.
    pub fn region_sites(&self, layout: &FpgaLayout, res: ResourceType, region: &Region) -> Vec<SiteId> {
        self.free_sites(res)
            .filter(|&s| region.covers(&layout.site_rect(s), 1e-9))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placed {
    pub inst: usize,
    /// Lowest site taken; cascades occupy `demand` sites upward from it.
    pub site: SiteId,
    pub pos: Point,
    pub phase: u8,
    pub cost: f64,
}

/// Phase 1: fit merged cascades from the largest to the smallest, each at
/// the free run nearest to its global placement position.
///
/// A run is passed over when taking it would leave a later cascade with no
/// free run, or a region (or the fabric) with fewer free sites of a type
/// than its unplaced macros need. If every run of a cascade is passed over,
/// the previous cascade moves on to its next run. Greedy choices that lead
/// to a legal result are never changed.
pub fn legalize_cascades(
    layout: &FpgaLayout,
    design: &Design,
    gp: &[Point],
    pool: &mut SitePool,
) -> Result<Vec<Placed>> {
    let precond = precond_wl(design);
    let mut order: Vec<usize> = (0..design.instances.len())
        .filter(|&i| {
            let inst = &design.instances[i];
            inst.is_macro() && inst.demand > 1 && !inst.is_fixed()
        })
        .collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(design.instances[i].demand), i));

    let mut search = CascadeSearch::new(layout, design, gp, pool, order);
    let mut chosen = Vec::with_capacity(search.order.len());
    if !search.descend(0, &mut chosen)? {
        return Err(search.failure());
    }
    let order = std::mem::take(&mut search.order);
    Ok(order
        .into_iter()
        .zip(chosen)
        .map(|(i, site)| {
            let pos = layout.site_origin(site);
            Placed {
                inst: i,
                site,
                pos,
                phase: 1,
                cost: arc_cost(effective(precond[i]), gp[i], pos),
            }
        })
        .collect())
}

/// Node budget of the cascade search.
const SEARCH_BUDGET: usize = 200_000;

struct CascadeSearch<'a> {
    layout: &'a FpgaLayout,
    design: &'a Design,
    gp: &'a [Point],
    pool: &'a mut SitePool,
    order: Vec<usize>,
    /// Regions whose rectangles cover each macro site.
    covering: BTreeMap<SiteId, Vec<usize>>,
    /// Free sites minus unplaced demand, per (region, resource); the
    /// fabric as a whole uses region index `usize::MAX`.
    slack: BTreeMap<(usize, ResourceType), i64>,
    nodes: usize,
    /// Deepest cascade that could not be fitted, and whether it had any
    /// free run at all.
    stuck: Option<(usize, bool)>,
}

impl<'a> CascadeSearch<'a> {
    fn new(layout: &'a FpgaLayout, design: &'a Design, gp: &'a [Point], pool: &'a mut SitePool, order: Vec<usize>) -> Self {
        let mut covering: BTreeMap<SiteId, Vec<usize>> = BTreeMap::new();
        let mut slack: BTreeMap<(usize, ResourceType), i64> = BTreeMap::new();
        for res in ResourceType::MACROS {
            for site in pool.free_sites(res) {
                *slack.entry((usize::MAX, res)).or_default() += 1;
                for (r, region) in design.regions.iter().enumerate() {
                    if region.covers(&layout.site_rect(site), 1e-9) {
                        covering.entry(site).or_default().push(r);
                        *slack.entry((r, res)).or_default() += 1;
                    }
                }
            }
        }
        for inst in design.instances.iter().filter(|i| i.is_macro() && !i.is_fixed()) {
            let n = i64::from(inst.demand);
            *slack.entry((usize::MAX, inst.resource)).or_default() -= n;
            if let Some(r) = inst.region {
                *slack.entry((r, inst.resource)).or_default() -= n;
            }
        }
        CascadeSearch {
            layout,
            design,
            gp,
            pool,
            order,
            covering,
            slack,
            nodes: 0,
            stuck: None,
        }
    }

    /// Free runs for cascade `i`, nearest first; ties go to the smaller
    /// column, then the lower site.
    fn runs(&self, i: usize, first_only: bool) -> Vec<SiteId> {
        let inst = &self.design.instances[i];
        let (res, n) = (inst.resource, inst.demand);
        let region = inst.region.map(|r| &self.design.regions[r]);
        let mut found: Vec<(f64, SiteId)> = Vec::new();
        for x in self.layout.columns_for(res) {
            let per = self.layout.sites_in_column(x);
            let h = f64::from(self.layout.site_type_at(x).height);
            if per < n {
                continue;
            }
            for k in 0..=per - n {
                if !(k..k + n).all(|q| self.pool.is_free(res, SiteId { x, k: q })) {
                    continue;
                }
                let anchor = Point::new(f64::from(x), f64::from(k) * h);
                if let Some(r) = region {
                    if !r.covers(&Rect::at(anchor, inst.width, f64::from(n) * h), 1e-9) {
                        continue;
                    }
                }
                found.push((anchor.manhattan(self.gp[i]), SiteId { x, k }));
                if first_only {
                    return vec![SiteId { x, k }];
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.x.cmp(&b.1.x)).then(a.1.k.cmp(&b.1.k)));
        found.into_iter().map(|(_, s)| s).collect()
    }

    /// Take (`sign` = -1) or return (`sign` = 1) the run of cascade `i`.
    fn shift(&mut self, i: usize, site: SiteId, sign: i64) {
        let inst = &self.design.instances[i];
        let res = inst.resource;
        for q in site.k..site.k + inst.demand {
            let s = SiteId { x: site.x, k: q };
            if sign < 0 {
                self.pool.take(res, s);
            } else {
                self.pool.give(res, s);
            }
            *self.slack.get_mut(&(usize::MAX, res)).unwrap() += sign;
            for &r in self.covering.get(&s).into_iter().flatten() {
                *self.slack.get_mut(&(r, res)).unwrap() += sign;
            }
        }
        // Placed demand no longer counts against the slack.
        let n = i64::from(inst.demand);
        *self.slack.get_mut(&(usize::MAX, res)).unwrap() -= sign * n;
        if let Some(r) = inst.region {
            *self.slack.get_mut(&(r, res)).unwrap() -= sign * n;
        }
    }

    fn viable(&self, depth: usize) -> bool {
        let res = self.design.instances[self.order[depth - 1]].resource;
        self.slack.values().all(|&v| v >= 0)
            && self.order[depth..]
                .iter()
                .filter(|&&j| self.design.instances[j].resource == res)
                .all(|&j| !self.runs(j, true).is_empty())
    }

    fn descend(&mut self, depth: usize, chosen: &mut Vec<SiteId>) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let i = self.order[depth];
        let runs = self.runs(i, false);
        for &site in &runs {
            self.nodes += 1;
            if self.nodes > SEARCH_BUDGET {
                return Err(Error::Infeasible(format!(
                    "cascade fitting gave up after {SEARCH_BUDGET} tries"
                )));
            }
            self.shift(i, site, -1);
            if self.viable(depth + 1) {
                chosen.push(site);
                if self.descend(depth + 1, chosen)? {
                    return Ok(true);
                }
                chosen.pop();
            }
            self.shift(i, site, 1);
        }
        if self.stuck.map_or(true, |(d, _)| depth >= d) {
            self.stuck = Some((depth, !runs.is_empty()));
        }
        Ok(false)
    }

    fn failure(&self) -> Error {
        let Some((depth, any_run)) = self.stuck else {
            return Error::Infeasible("cascade fitting failed".into());
        };
        let inst = &self.design.instances[self.order[depth]];
        let region = inst.region.map_or(String::new(), |r| format!(" inside region `{}`", self.design.regions[r].id));
        if any_run {
            Error::Infeasible(format!(
                "cascade `{}` has no run of {} sites{region} that leaves room for the remaining macros",
                inst.name, inst.demand
            ))
        } else {
            Error::Infeasible(format!("cascade `{}` has no free run of {} sites{region}", inst.name, inst.demand))
        }
    }
}

/// Zero-connectivity macros would see all sites as free of cost; treat them
/// as weight one so they still go to the nearest site.
fn effective(precond: f64) -> f64 {
    if precond > 0.0 {
        precond
    } else {
        1.0
    }
}

/// Match `macros` to `sites` with the capped candidate graph, doubling the
/// cap until a perfect matching exists.
fn match_macros(
    layout: &FpgaLayout,
    gp: &[Point],
    precond: &[f64],
    macros: &[usize],
    sites: &[SiteId],
    k_cand: usize,
    phase: u8,
) -> Result<Option<Vec<Placed>>> {
    if macros.is_empty() {
        return Ok(Some(Vec::new()));
    }
    if macros.len() > sites.len() {
        return Ok(None);
    }
    let origins: Vec<Point> = sites.iter().map(|&s| layout.site_origin(s)).collect();
    // Per macro, sites in nearest-first order (ties by site order).
    let ranked: Vec<Vec<(f64, usize)>> = macros
        .iter()
        .map(|&m| {
            let mut r: Vec<(f64, usize)> = origins
                .iter()
                .enumerate()
                .map(|(j, &o)| (arc_cost(effective(precond[m]), gp[m], o), j))
                .collect();
            r.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            r
        })
        .collect();
    let mut k = k_cand.max(1);
    loop {
        let mut prob = AssignmentProblem::new(macros.len(), sites.len());
        for (i, r) in ranked.iter().enumerate() {
            for &(c, j) in r.iter().take(k) {
                prob.add_arc(i, j, scale_cost(c));
            }
        }
        match solve_assignment(&prob) {
            Ok(a) => {
                return Ok(Some(
                    a.matching
                        .iter()
                        .enumerate()
                        .map(|(i, &j)| Placed {
                            inst: macros[i],
                            site: sites[j],
                            pos: origins[j],
                            phase,
                            cost: ranked[i].iter().find(|r| r.1 == j).unwrap().0,
                        })
                        .collect(),
                ));
            }
            Err(Error::Unmatchable { .. }) if k < sites.len() => k = (2 * k).min(sites.len()),
            Err(Error::Unmatchable { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
}

/// Phase 2: regions in ascending order of free macro sites, each matching
/// its non-cascade macros to its own free sites.
pub fn legalize_region_macros(
    layout: &FpgaLayout,
    design: &Design,
    gp: &[Point],
    pool: &mut SitePool,
    k_cand: usize,
) -> Result<Vec<Placed>> {
    let precond = precond_wl(design);
    let mut order: Vec<(usize, usize)> = design
        .regions
        .iter()
        .enumerate()
        .map(|(r, region)| {
            let n = ResourceType::MACROS
                .iter()
                .map(|&res| pool.region_sites(layout, res, region).len())
                .sum();
            (n, r)
        })
        .collect();
    order.sort();

    let mut out = Vec::new();
    for (_, r) in order {
        let region = &design.regions[r];
        for res in ResourceType::MACROS {
            let macros: Vec<usize> = (0..design.instances.len())
                .filter(|&i| {
                    let inst = &design.instances[i];
                    inst.resource == res && inst.region == Some(r) && inst.demand == 1 && !inst.is_fixed()
                })
                .collect();
            if macros.is_empty() {
                continue;
            }
            let sites = pool.region_sites(layout, res, region);
            let placed = match_macros(layout, gp, &precond, &macros, &sites, k_cand, 2)?.ok_or_else(|| {
                Error::Infeasible(format!(
                    "region `{}` needs {} {res} sites but has {} free",
                    region.id,
                    macros.len(),
                    sites.len()
                ))
            })?;
            for p in &placed {
                pool.take(res, p.site);
            }
            out.extend(placed);
        }
    }
    Ok(out)
}

/// Phase 3: every unconstrained single macro against all free sites of its
/// type.
pub fn legalize_remaining(
    layout: &FpgaLayout,
    design: &Design,
    gp: &[Point],
    pool: &mut SitePool,
    k_cand: usize,
) -> Result<Vec<Placed>> {
    let precond = precond_wl(design);
    let mut out = Vec::new();
    for res in ResourceType::MACROS {
        let macros: Vec<usize> = (0..design.instances.len())
            .filter(|&i| {
                let inst = &design.instances[i];
                inst.resource == res && inst.region.is_none() && inst.demand == 1 && !inst.is_fixed()
            })
            .collect();
        let sites: Vec<SiteId> = pool.free_sites(res).collect();
        let placed = match_macros(layout, gp, &precond, &macros, &sites, k_cand, 3)?.ok_or_else(|| {
            Error::Infeasible(format!(
                "{} unconstrained {res} macros but {} free sites",
                macros.len(),
                sites.len()
            ))
        })?;
        for p in &placed {
            pool.take(res, p.site);
        }
        out.extend(placed);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LegalizationReport {
    pub placed: Vec<Placed>,
    pub names: Vec<String>,
    pub total_cost: f64,
}

impl LegalizationReport {
    pub fn phase_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for p in &self.placed {
            c[usize::from(p.phase) - 1] += 1;
        }
        c
    }

    /// Lines of `name,phase,from_x,from_y,to_x,to_y,displacement,cost`,
    /// followed by a summary line.
    pub fn to_csv(&self, gp: &[Point]) -> String {
        let mut s = String::from("name,phase,from_x,from_y,to_x,to_y,displacement,cost\n");
        for (p, name) in self.placed.iter().zip(&self.names) {
            let from = gp[p.inst];
            writeln!(
                s,
                "{name},{},{},{},{},{},{},{}",
                p.phase,
                from.x,
                from.y,
                p.pos.x,
                p.pos.y,
                from.manhattan(p.pos),
                p.cost
            )
            .unwrap();
        }
        let [a, b, c] = self.phase_counts();
        writeln!(s, "# phase1={a} phase2={b} phase3={c} total_cost={}", self.total_cost).unwrap();
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Legalized {
    /// Positions of the merged design, macros on sites.
    pub merged_positions: Vec<Point>,
    /// Positions of the original design.
    pub positions: Vec<Point>,
    /// Original instances sitting on legal sites.
    pub legal: Vec<bool>,
    pub report: LegalizationReport,
}

/// Run all three phases on a merged design and expand the result.
/// Non-macro instances keep their global placement positions.
pub fn legalize(
    layout: &FpgaLayout,
    merged: &MergedDesign,
    gp: &[Point],
    k_cand: usize,
) -> Result<Legalized> {
    let design = &merged.design;
    let mut pool = SitePool::new(layout, design);
    let mut placed = legalize_cascades(layout, design, gp, &mut pool)?;
    placed.extend(legalize_region_macros(layout, design, gp, &mut pool, k_cand)?);
    placed.extend(legalize_remaining(layout, design, gp, &mut pool, k_cand)?);

    let mut pos = gp.to_vec();
    for (i, inst) in design.instances.iter().enumerate() {
        if let Some(p) = inst.fixed_at {
            pos[i] = p;
        }
    }
    for p in &placed {
        pos[p.inst] = p.pos;
    }
    let mut legal_merged = vec![false; design.instances.len()];
    for p in &placed {
        legal_merged[p.inst] = true;
    }
    for (i, inst) in design.instances.iter().enumerate() {
        if inst.is_fixed() && inst.is_macro() {
            legal_merged[i] = true;
        }
    }
    let legal = merged
        .map
        .to_merged
        .iter()
        .map(|&m| legal_merged[m])
        .collect();
    let report = LegalizationReport {
        names: placed.iter().map(|p| design.instances[p.inst].name.clone()).collect(),
        total_cost: placed.iter().map(|p| p.cost).sum(),
        placed,
    };
    Ok(Legalized {
        positions: merged.map.expand(&pos),
        merged_positions: pos,
        legal,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::assignment_oracle;
    use crate::model::{check_legality, merge_cascades, CascadeShape, Instance, Net, Pin, SiteType};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `cols` DSP columns (height 2) interleaved with CLB columns.
    fn layout(cols: u32, h: u32) -> FpgaLayout {
        let clb = SiteType {
            name: "CLB".into(),
            width: 1,
            height: 1,
            capacity: [(ResourceType::Lut, 8)].into(),
        };
        let dsp = SiteType {
            name: "DSP".into(),
            width: 1,
            height: 2,
            capacity: [(ResourceType::Dsp, 1)].into(),
        };
        let columns = (0..2 * cols).map(|x| (x % 2) as usize).collect();
        FpgaLayout::new(2 * cols, h, vec![clb, dsp], columns).unwrap()
    }

    fn dsp(name: &str) -> Instance {
        Instance {
            name: name.into(),
            resource: ResourceType::Dsp,
            demand: 1,
            width: 1.0,
            height: 2.0,
            fixed_at: None,
            region: None,
            shape: None,
        }
    }

    fn net(pins: &[usize]) -> Net {
        Net {
            name: "n".into(),
            pins: pins.iter().map(|&i| Pin { inst: i, dx: 0.0, dy: 0.0 }).collect(),
        }
    }

    #[test]
    fn cost_examples() {
        let d = Design {
            instances: vec![dsp("m"), dsp("a"), dsp("b"), dsp("c"), dsp("e"), dsp("f"), dsp("g")],
            nets: vec![net(&[0, 1])],
            ..Default::default()
        };
        let w = precond_wl(&d);
        assert_eq!(arc_cost(w[0], Point::new(0.0, 0.0), Point::new(2.0, 3.0)), 500.0);

        let d = Design {
            nets: vec![net(&[0, 1, 2]), net(&[0, 3, 4, 5, 6]), net(&[0])],
            ..d
        };
        let w = precond_wl(&d);
        assert_eq!(arc_cost(w[0], Point::new(1.0, 1.0), Point::new(2.0, 2.0)), 150.0);
        assert_eq!(arc_cost(w[0], Point::new(1.0, 2.0), Point::new(1.0, 2.0)), 0.0);
    }

    fn cascade_design(lens: &[usize]) -> Design {
        let mut d = Design::default();
        for (s, &n) in lens.iter().enumerate() {
            let mut members = Vec::new();
            for k in 0..n {
                let mut m = dsp(&format!("s{s}_{k}"));
                m.shape = Some(s);
                members.push(d.instances.len());
                d.instances.push(m);
            }
            d.shapes.push(CascadeShape {
                id: format!("s{s}"),
                resource: ResourceType::Dsp,
                members,
            });
        }
        d
    }

    #[test]
    fn single_fitting_run_is_used() {
        let l = layout(1, 6);
        let d = cascade_design(&[3]);
        let m = merge_cascades(&d).unwrap();
        let mut pool = SitePool::new(&l, &m.design);
        let p = legalize_cascades(&l, &m.design, &[Point::new(0.0, 3.0)], &mut pool).unwrap();
        assert_eq!(p[0].site, SiteId { x: 1, k: 0 });
        assert!(pool.is_empty());
    }

    #[test]
    fn equal_cascades_first_index_wins_nearer_run() {
        // Column 1 holds a run of four free sites; column 3 only sites 6..8.
        let l = layout(2, 16);
        let d = cascade_design(&[2, 2]);
        let m = merge_cascades(&d).unwrap();
        let mut pool = SitePool::new(&l, &m.design);
        for k in 4..8 {
            pool.take(ResourceType::Dsp, SiteId { x: 1, k });
        }
        for k in 0..6 {
            pool.take(ResourceType::Dsp, SiteId { x: 3, k });
        }
        let gp = [Point::new(1.0, 2.0), Point::new(1.0, 2.0)];
        let p = legalize_cascades(&l, &m.design, &gp, &mut pool).unwrap();
        assert_eq!(p[0].inst, 0);
        assert_eq!(p[0].site, SiteId { x: 1, k: 1 });
        // Column 1 is left with sites 0 and 3, which are not adjacent.
        assert_eq!(p[1].site, SiteId { x: 3, k: 6 });
    }

    #[test]
    fn cascade_moves_off_a_run_that_strands_the_next() {
        // One column of five sites. The nearest run for the 3-cascade is
        // 1..4, which would leave no pair for the 2-cascade.
        let l = layout(1, 10);
        let d = cascade_design(&[3, 2]);
        let m = merge_cascades(&d).unwrap();
        let mut pool = SitePool::new(&l, &m.design);
        let gp = [Point::new(1.0, 2.0), Point::new(1.0, 2.0)];
        let p = legalize_cascades(&l, &m.design, &gp, &mut pool).unwrap();
        assert_eq!(p[0].site, SiteId { x: 1, k: 0 });
        assert_eq!(p[1].site, SiteId { x: 1, k: 3 });
        assert!(pool.is_empty());
    }

    #[test]
    fn unconstrained_cascade_leaves_region_sites_alone() {
        // The region covers column 1 only and its macro needs a site there.
        let l = layout(2, 4);
        let mut d = cascade_design(&[2]);
        let mut r = dsp("r");
        r.region = Some(0);
        d.instances.push(r);
        d.regions.push(Region {
            id: "r".into(),
            rects: vec![Rect::new(1.0, 0.0, 2.0, 4.0)],
        });
        let m = merge_cascades(&d).unwrap();
        let gp = [Point::new(1.0, 0.0), Point::new(3.0, 0.0)];
        let out = legalize(&l, &m, &gp, 4).unwrap();
        assert_eq!(out.report.placed[0].site, SiteId { x: 3, k: 0 });
        assert!(check_legality(&l, &d, &out.positions).is_legal());
    }

    #[test]
    fn region_without_macro_columns_is_infeasible() {
        let l = layout(1, 8);
        let mut d = cascade_design(&[2]);
        d.regions.push(Region {
            id: "r".into(),
            rects: vec![Rect::new(0.0, 0.0, 1.0, 8.0)],
        });
        for i in &mut d.instances {
            i.region = Some(0);
        }
        let m = merge_cascades(&d).unwrap();
        let mut pool = SitePool::new(&l, &m.design);
        let e = legalize_cascades(&l, &m.design, &[Point::new(0.0, 0.0)], &mut pool).unwrap_err();
        assert!(e.to_string().contains("region `r`"), "{e}");
    }

    #[test]
    fn lone_region_macro_takes_lone_site() {
        let l = layout(2, 2);
        let mut a = dsp("a");
        a.region = Some(0);
        let d = Design {
            instances: vec![a],
            regions: vec![Region {
                id: "r".into(),
                rects: vec![Rect::new(3.0, 0.0, 4.0, 2.0)],
            }],
            ..Default::default()
        };
        let mut pool = SitePool::new(&l, &d);
        let p = legalize_region_macros(&l, &d, &[Point::new(0.0, 0.0)], &mut pool, 32).unwrap();
        assert_eq!(p[0].site, SiteId { x: 3, k: 0 });
    }

    #[test]
    fn smaller_region_is_served_first() {
        // Region "big" covers both DSP columns; "small" only column 3.
        let l = layout(2, 4);
        let mut insts = Vec::new();
        for (name, r) in [("b0", 0), ("b1", 0), ("s0", 1)] {
            let mut m = dsp(name);
            m.region = Some(r);
            insts.push(m);
        }
        let d = Design {
            instances: insts,
            regions: vec![
                Region {
                    id: "big".into(),
                    rects: vec![Rect::new(0.0, 0.0, 4.0, 4.0)],
                },
                Region {
                    id: "small".into(),
                    rects: vec![Rect::new(3.0, 0.0, 4.0, 2.0)],
                },
            ],
            ..Default::default()
        };
        // The big-region macros both want (3, 0).
        let gp = [Point::new(3.0, 0.0), Point::new(3.0, 0.0), Point::new(1.0, 2.0)];
        let mut pool = SitePool::new(&l, &d);
        let p = legalize_region_macros(&l, &d, &gp, &mut pool, 32).unwrap();
        assert_eq!(p[0].inst, 2);
        assert_eq!(p[0].site, SiteId { x: 3, k: 0 });
        assert!(p[1..].iter().all(|q| q.site != SiteId { x: 3, k: 0 }));
    }

    #[test]
    fn on_site_macros_stay_put() {
        let l = layout(2, 8);
        let d = Design {
            instances: vec![dsp("a"), dsp("b"), dsp("c")],
            nets: vec![net(&[0, 1, 2])],
            ..Default::default()
        };
        let gp = [Point::new(1.0, 2.0), Point::new(3.0, 6.0), Point::new(1.0, 0.0)];
        let mut pool = SitePool::new(&l, &d);
        let p = legalize_remaining(&l, &d, &gp, &mut pool, 32).unwrap();
        assert!(p.iter().all(|q| q.pos == gp[q.inst] && q.cost == 0.0));
        assert!(legalize_remaining(&l, &Design::default(), &[], &mut pool, 32).unwrap().is_empty());
    }

    #[test]
    fn single_macro_goes_to_nearest_site() {
        let l = layout(3, 20);
        let d = Design {
            instances: vec![dsp("a"), dsp("b")],
            nets: vec![net(&[0, 1])],
            ..Default::default()
        };
        let gp = [Point::new(2.6, 7.2), Point::new(0.0, 0.0)];
        let mut pool = SitePool::new(&l, &d);
        let p = legalize_remaining(&l, &d, &gp, &mut pool, 32).unwrap();
        assert_eq!(p.iter().find(|q| q.inst == 0).unwrap().pos, Point::new(3.0, 8.0));
    }

    #[test]
    fn eight_macros_twelve_sites_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = layout(2, 12);
        let mut d = Design {
            instances: (0..8).map(|i| dsp(&format!("m{i}"))).collect(),
            ..Default::default()
        };
        for i in 0..8 {
            d.nets.push(net(&[i, (i + 1) % 8]));
        }
        let gp: Vec<Point> = (0..8)
            .map(|_| Point::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..11.0)))
            .collect();
        let mut pool = SitePool::new(&l, &d);
        let sites: Vec<SiteId> = pool.free_sites(ResourceType::Dsp).collect();
        assert_eq!(sites.len(), 12);
        let p = legalize_remaining(&l, &d, &gp, &mut pool, 32).unwrap();
        let w = precond_wl(&d);
        let mut prob = AssignmentProblem::new(8, 12);
        for i in 0..8 {
            for (j, &s) in sites.iter().enumerate() {
                prob.add_arc(i, j, scale_cost(arc_cost(w[i], gp[i], l.site_origin(s))));
            }
        }
        let ours: i64 = p.iter().map(|q| scale_cost(q.cost)).sum();
        assert_eq!(ours, assignment_oracle(&prob).unwrap());
    }

    #[test]
    fn tight_cap_doubles_until_feasible() {
        let l = layout(1, 16);
        let d = Design {
            instances: (0..8).map(|i| dsp(&format!("m{i}"))).collect(),
            ..Default::default()
        };
        let gp = vec![Point::new(1.0, 0.0); 8];
        let mut pool = SitePool::new(&l, &d);
        let p = legalize_remaining(&l, &d, &gp, &mut pool, 1).unwrap();
        let sites: BTreeSet<SiteId> = p.iter().map(|q| q.site).collect();
        assert_eq!(sites.len(), 8);
    }

    #[test]
    fn cascades_only_design_is_legal() {
        let l = layout(2, 20);
        let d = cascade_design(&[3, 2, 4]);
        let m = merge_cascades(&d).unwrap();
        let gp = vec![Point::new(2.0, 5.0); m.design.instances.len()];
        let out = legalize(&l, &m, &gp, 32).unwrap();
        assert_eq!(out.report.phase_counts(), [3, 0, 0]);
        assert!(check_legality(&l, &d, &out.positions).is_legal());
    }

    #[test]
    fn insufficient_sites_error() {
        let l = layout(1, 4);
        let d = Design {
            instances: (0..3).map(|i| dsp(&format!("m{i}"))).collect(),
            ..Default::default()
        };
        let m = merge_cascades(&d).unwrap();
        let gp = vec![Point::new(1.0, 0.0); 3];
        assert!(matches!(legalize(&l, &m, &gp, 32), Err(Error::Infeasible(_))));
    }
}
