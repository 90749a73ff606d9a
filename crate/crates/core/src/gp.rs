//! Electrostatic global placement.
//!
//! Minimises `W + sum_s lambda_s (Phi_s + c_s Phi_s^2)` over movable instance
//! and filler positions with Nesterov's method and Barzilai-Borwein steps.
//! Region-constrained instances are projected back into their region after
//! every step.

use std::fmt::Write;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::ElectroSystem;
use crate::error::{Error, Result};
use crate::model::{region_clamp, Design, FpgaLayout, PlacementState, Point, ResourceType};
use crate::wirelength::{hpwl, wa_value_and_gradient, WlParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub max_iters: usize,
    pub ovfl_stop_nonmacro: f64,
    pub ovfl_stop_macro: f64,
    pub lambda_growth: f64,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub divergence_window: usize,
    pub divergence_factor: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            max_iters: 1000,
            ovfl_stop_nonmacro: 0.1,
            ovfl_stop_macro: 0.2,
            lambda_growth: 1.05,
            seed: 1,
            checkpoint_every: 50,
            divergence_window: 100,
            divergence_factor: 2.0,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.ovfl_stop_nonmacro) || !unit(self.ovfl_stop_macro) {
            return bad("overflow thresholds must lie in (0, 1]");
        }
        if !(self.lambda_growth > 1.0 && self.lambda_growth.is_finite()) {
            return bad("lambda_growth must exceed 1");
        }
        if self.checkpoint_every == 0 || self.divergence_window == 0 {
            return bad("checkpoint_every and divergence_window must be positive");
        }
        if !(self.divergence_factor > 1.0) {
            return bad("divergence_factor must exceed 1");
        }
        Ok(())
    }
}

const SYSTEMS: [ResourceType; 4] = ResourceType::PLACEABLE;

/// Saved optimiser state, independent of the live placer.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: PlacementState,
    pub lambda: [f64; 4],
    pub gamma: f64,
    pub iteration: usize,
    pub macro_overflow: f64,
    pub hpwl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub hpwl: f64,
    pub wa: f64,
    pub phi: [f64; 4],
    pub lambda: [f64; 4],
    pub overflow: [f64; 4],
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GpTrace {
    pub rows: Vec<TraceRow>,
    pub converged: bool,
    pub rolled_back: bool,
}

impl GpTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,hpwl,wa");
        for prefix in ["phi", "lambda", "ovfl"] {
            for r in SYSTEMS {
                write!(s, ",{prefix}_{}", r.as_str().to_lowercase()).unwrap();
            }
        }
        s.push_str(",gamma\n");
        for r in &self.rows {
            write!(s, "{},{},{}", r.iter, r.hpwl, r.wa).unwrap();
            for v in r.phi.iter().chain(&r.lambda).chain(&r.overflow) {
                write!(s, ",{v}").unwrap();
            }
            writeln!(s, ",{}", r.gamma).unwrap();
        }
        writeln!(s, "# converged={} rolled_back={}", self.converged, self.rolled_back).unwrap();
        s
    }
}

/// Objective pieces at one point.
#[derive(Debug, Clone, Default)]
struct Eval {
    wa: f64,
    /// Preconditioned total gradient per variable.
    grad: Vec<Point>,
    phi: [f64; 4],
    overflow: [f64; 4],
    finite: bool,
}

/// One placement session over a (merged) design.
#[derive(Debug)]
pub struct GlobalPlacer<'a> {
    layout: &'a FpgaLayout,
    design: &'a Design,
    config: GpConfig,
    /// One system per placeable resource, `None` when it has no movable
    /// instance.
    pub systems: Vec<Option<ElectroSystem>>,
    /// Instance index of each leading variable.
    movable: Vec<usize>,
    fillers: Vec<Range<usize>>,
    size: Vec<(f64, f64)>,
    system_of: Vec<Option<usize>>,
    pins: Vec<f64>,
    base_gamma: f64,
    pub gamma: f64,
    u: Vec<Point>,
    v: Vec<Point>,
    eval: Eval,
    a: f64,
    /// Step size per resource system.
    alpha: [f64; 4],
    pub iteration: usize,
}

/// Euclidean distance between `a` and `b` restricted to each group.
fn group_dist(a: &[Point], b: &[Point], group: &[usize]) -> [f64; 4] {
    let mut d = [0.0; 4];
    for ((p, q), &s) in a.iter().zip(b).zip(group) {
        d[s] += (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
    }
    d.map(f64::sqrt)
}

impl<'a> GlobalPlacer<'a> {
    /// Build systems, seed the initial placement and balance the multipliers.
    pub fn new(layout: &'a FpgaLayout, design: &'a Design, config: &GpConfig) -> Result<Self> {
        config.validate()?;
        if !design.shapes.is_empty() {
            return Err(Error::InvalidArgument("global placement expects a merged design".into()));
        }
        let systems: Vec<Option<ElectroSystem>> = SYSTEMS
            .iter()
            .map(|&r| {
                let s = ElectroSystem::new(layout, design, r);
                (!s.members.is_empty()).then_some(s)
            })
            .collect();

        let movable: Vec<usize> = (0..design.instances.len())
            .filter(|&i| !design.instances[i].is_fixed())
            .collect();
        let pin_counts = design.pin_counts();
        let mut size = Vec::new();
        let mut system_of = Vec::new();
        let mut pins = Vec::new();
        for &i in &movable {
            let inst = &design.instances[i];
            size.push((inst.width, inst.height));
            system_of.push(inst.resource.system_index());
            pins.push(pin_counts[i] as f64);
        }
        let mut fillers = Vec::new();
        for (s, sys) in systems.iter().enumerate() {
            let start = size.len();
            if let Some(sys) = sys {
                for _ in 0..sys.filler_count {
                    size.push(sys.filler_size());
                    system_of.push(Some(s));
                    pins.push(0.0);
                }
            }
            fillers.push(start..size.len());
        }

        let lut_bin = systems
            .iter()
            .flatten()
            .next()
            .map_or(1.0, |s| s.bin_w);
        let base_gamma = 0.5 * lut_bin;
        let mut gp = GlobalPlacer {
            layout,
            design,
            config: config.clone(),
            systems,
            movable,
            fillers,
            size,
            system_of,
            pins,
            base_gamma,
            gamma: base_gamma * 8.0,
            u: Vec::new(),
            v: Vec::new(),
            eval: Eval::default(),
            a: 1.0,
            alpha: [0.0; 4],
            iteration: 0,
        };
        gp.v = gp.initial_positions()?;
        gp.u = gp.v.clone();

        // Balance wirelength against each density term.
        let (wa_l1, density_l1) = gp.raw_gradient_norms();
        for (s, sys) in gp.systems.iter_mut().enumerate() {
            if let Some(sys) = sys {
                let ratio = wa_l1 / density_l1[s];
                sys.lambda = if ratio.is_finite() && ratio > 0.0 { ratio } else { 1.0 };
                sys.c_quad = if sys.energy > 0.0 { 1.0 / sys.energy } else { 1.0 };
            }
        }
        gp.eval = gp.evaluate(&gp.v.clone());
        gp.update_gamma();
        gp.eval = gp.evaluate(&gp.v.clone());
        let mut gmax = [0.0f64; 4];
        for (k, g) in gp.eval.grad.iter().enumerate() {
            let s = gp.group(k);
            gmax[s] = gmax[s].max(g.x.abs().max(g.y.abs()));
        }
        for s in 0..SYSTEMS.len() {
            let bw = gp.systems[s].as_ref().map_or(lut_bin, |sys| sys.bin_w);
            gp.alpha[s] = if gmax[s] > 0.0 { 0.1 * bw / gmax[s] } else { 0.1 * bw };
        }
        Ok(gp)
    }

    fn group(&self, k: usize) -> usize {
        self.system_of[k].unwrap_or(0)
    }

    fn initial_positions(&self) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let chip = self.layout.chip();
        let centre = chip.center();
        let mut v = Vec::with_capacity(self.size.len());
        for (k, &i) in self.movable.iter().enumerate() {
            let inst = &self.design.instances[i];
            let (w, h) = self.size[k];
            let target = match inst.region {
                Some(r) => {
                    let region = &self.design.regions[r];
                    let at = region_clamp(inst, Point::new(centre.x - 0.5 * w, centre.y - 0.5 * h), region)?;
                    let rect = region
                        .rects
                        .iter()
                        .find(|q| q.fits(w, h) && q.clamp(at, w, h) == at)
                        .expect("clamp lands in a member rectangle");
                    rect.center()
                }
                None => centre,
            };
            let bw = self.system_of[k]
                .and_then(|s| self.systems[s].as_ref())
                .map_or(1.0, |s| s.bin_w);
            let jx = rng.gen_range(-2.0 * bw..=2.0 * bw);
            let jy = rng.gen_range(-2.0 * bw..=2.0 * bw);
            v.push(Point::new(target.x - 0.5 * w + jx, target.y - 0.5 * h + jy));
        }
        for range in &self.fillers {
            for k in range.clone() {
                let (w, h) = self.size[k];
                let x = rng.gen_range(0.0..=(chip.xh - w).max(0.0));
                let y = rng.gen_range(0.0..=(chip.yh - h).max(0.0));
                v.push(Point::new(x, y));
            }
        }
        self.project(&mut v);
        Ok(v)
    }

    /// Pull every variable back into its region, then into the chip. Overshoot
    /// is mirrored back inside before clamping so that instances pushed past
    /// the same edge do not collapse onto one point.
    fn project(&self, v: &mut [Point]) {
        let chip = self.layout.chip();
        let mirror = |p: Point, clamp: &dyn Fn(Point) -> Option<Point>| -> Option<Point> {
            let q = clamp(p)?;
            clamp(Point::new(2.0 * q.x - p.x, 2.0 * q.y - p.y))
        };
        for (k, p) in v.iter_mut().enumerate() {
            let (w, h) = self.size[k];
            if let Some(&i) = self.movable.get(k) {
                if let Some(r) = self.design.instances[i].region {
                    let region = &self.design.regions[r];
                    if let Some(q) = mirror(*p, &|p| region.clamp(p, w, h)) {
                        *p = q;
                    }
                }
            }
            *p = mirror(*p, &|p| Some(chip.clamp(p, w, h))).unwrap();
        }
    }

    fn positions(&self, v: &[Point]) -> Vec<Point> {
        let mut pos: Vec<Point> = self
            .design
            .instances
            .iter()
            .map(|i| i.fixed_at.unwrap_or_default())
            .collect();
        for (k, &i) in self.movable.iter().enumerate() {
            pos[i] = v[k];
        }
        pos
    }

    fn wl_params(&self) -> WlParams {
        WlParams { gamma: self.gamma }
    }

    /// L1 norms of the raw wirelength gradient and of each density gradient
    /// at the current point.
    fn raw_gradient_norms(&mut self) -> (f64, [f64; 4]) {
        let v = self.v.clone();
        let pos = self.positions(&v);
        let (_, gw) = wa_value_and_gradient(self.design, &pos, self.wl_params());
        let wa_l1: f64 = self.movable.iter().map(|&i| gw[i].x.abs() + gw[i].y.abs()).sum();
        let mut dens = [0.0; 4];
        for s in 0..SYSTEMS.len() {
            let range = self.fillers[s].clone();
            if let Some(sys) = self.systems[s].as_mut() {
                sys.bin_density(self.design, &pos, &v[range.clone()]);
                sys.solve_poisson();
                let g = sys.density_gradient(self.design, &pos);
                let gf = sys.filler_gradient(&v[range]);
                dens[s] = sys.members.iter().map(|&i| g[i].x.abs() + g[i].y.abs()).sum::<f64>()
                    + gf.iter().map(|p| p.x.abs() + p.y.abs()).sum::<f64>();
            }
        }
        (wa_l1, dens)
    }

    fn evaluate(&mut self, v: &[Point]) -> Eval {
        let pos = self.positions(v);
        let (wa, gw) = wa_value_and_gradient(self.design, &pos, self.wl_params());
        let n = v.len();
        let mut grad = vec![Point::default(); n];
        for (k, &i) in self.movable.iter().enumerate() {
            grad[k] = gw[i];
        }
        let mut phi = [0.0; 4];
        let mut overflow = [0.0; 4];
        let mut lambda = [0.0; 4];
        for s in 0..SYSTEMS.len() {
            let range = self.fillers[s].clone();
            let Some(sys) = self.systems[s].as_mut() else { continue };
            sys.bin_density(self.design, &pos, &v[range.clone()]);
            sys.solve_poisson();
            phi[s] = sys.energy;
            overflow[s] = sys.overflow();
            lambda[s] = sys.lambda;
            let weight = sys.lambda * (1.0 + 2.0 * sys.c_quad * sys.energy);
            let g = sys.density_gradient(self.design, &pos);
            for (k, &i) in self.movable.iter().enumerate() {
                if self.system_of[k] == Some(s) {
                    grad[k].x += weight * g[i].x;
                    grad[k].y += weight * g[i].y;
                }
            }
            for (k, gf) in range.zip(sys.filler_gradient(&v[self.fillers[s].clone()])) {
                grad[k].x += weight * gf.x;
                grad[k].y += weight * gf.y;
            }
        }
        let mut finite = wa.is_finite() && phi.iter().all(|p| p.is_finite());
        for (k, g) in grad.iter_mut().enumerate() {
            let (w, h) = self.size[k];
            let dens = self.system_of[k].map_or(0.0, |s| lambda[s] * w * h);
            let pre = (self.pins[k] + dens).max(1.0);
            g.x /= pre;
            g.y /= pre;
            finite &= g.is_finite();
        }
        Eval {
            wa,
            grad,
            phi,
            overflow,
            finite,
        }
    }

    fn update_gamma(&mut self) {
        let ovfl = self.eval.overflow.iter().copied().fold(0.0, f64::max).clamp(0.1, 1.0);
        let lo = 0.1f64.log10();
        let hi = 8.0f64.log10();
        let exp = lo + (ovfl - 0.1) / 0.9 * (hi - lo);
        self.gamma = self.base_gamma * 10f64.powf(exp);
    }

    /// One Nesterov step with backtracked Barzilai-Borwein step sizes, one
    /// per resource system, followed by projection, multiplier growth and
    /// smoothing update.
    pub fn step(&mut self) -> bool {
        let g = self.eval.grad.clone();
        let group: Vec<usize> = (0..g.len()).map(|k| self.group(k)).collect();
        let a_next = 0.5 * (1.0 + (4.0 * self.a * self.a + 1.0).sqrt());
        let coef = (self.a - 1.0) / a_next;
        let mut alpha = self.alpha;
        let (mut u_new, mut v_new, mut e_new);
        let mut est = alpha;
        let mut tries = 0;
        loop {
            u_new = self
                .v
                .iter()
                .zip(&g)
                .zip(&group)
                .map(|((p, d), &s)| Point::new(p.x - alpha[s] * d.x, p.y - alpha[s] * d.y))
                .collect::<Vec<_>>();
            self.project(&mut u_new);
            v_new = u_new
                .iter()
                .zip(&self.u)
                .map(|(n, o)| Point::new(n.x + coef * (n.x - o.x), n.y + coef * (n.y - o.y)))
                .collect::<Vec<_>>();
            self.project(&mut v_new);
            e_new = self.evaluate(&v_new);
            let dv = group_dist(&v_new, &self.v, &group);
            let dg = group_dist(&e_new.grad, &g, &group);
            let mut retry = false;
            for s in 0..SYSTEMS.len() {
                est[s] = if dg[s] > 0.0 { dv[s] / dg[s] } else { alpha[s] };
                if est[s] > 0.0 && est[s] < 0.95 * alpha[s] {
                    retry = true;
                }
            }
            tries += 1;
            if !e_new.finite || !retry || tries >= 3 {
                break;
            }
            for s in 0..SYSTEMS.len() {
                if est[s] > 0.0 {
                    alpha[s] = alpha[s].min(est[s]);
                }
            }
        }
        // Restart momentum when the new gradient opposes the last move.
        let uphill: f64 = e_new
            .grad
            .iter()
            .zip(u_new.iter().zip(&self.u))
            .map(|(d, (n, o))| d.x * (n.x - o.x) + d.y * (n.y - o.y))
            .sum();
        self.a = if uphill > 0.0 { 1.0 } else { a_next };
        self.u = u_new;
        self.v = v_new;
        for s in 0..SYSTEMS.len() {
            if est[s].is_finite() && est[s] > 0.0 {
                self.alpha[s] = est[s];
            }
        }
        let finite = e_new.finite;
        self.eval = e_new;
        for sys in self.systems.iter_mut().flatten() {
            sys.lambda *= self.config.lambda_growth;
        }
        self.update_gamma();
        self.iteration += 1;
        finite
    }

    pub fn overflow(&self) -> [f64; 4] {
        self.eval.overflow
    }

    pub fn macro_overflow(&self) -> f64 {
        self.eval.overflow[2].max(self.eval.overflow[3])
    }

    pub fn converged(&self) -> bool {
        let o = self.eval.overflow;
        o[0] < self.config.ovfl_stop_nonmacro
            && o[1] < self.config.ovfl_stop_nonmacro
            && o[2] < self.config.ovfl_stop_macro
            && o[3] < self.config.ovfl_stop_macro
    }

    pub fn lambda(&self) -> [f64; 4] {
        let mut l = [0.0; 4];
        for (s, sys) in self.systems.iter().enumerate() {
            if let Some(sys) = sys {
                l[s] = sys.lambda;
            }
        }
        l
    }

    pub fn state(&self) -> PlacementState {
        let mut fillers = std::collections::BTreeMap::new();
        for (s, range) in self.fillers.iter().enumerate() {
            if !range.is_empty() {
                fillers.insert(SYSTEMS[s], self.v[range.clone()].to_vec());
            }
        }
        PlacementState {
            positions: self.positions(&self.v),
            fillers,
            iteration: self.iteration,
        }
    }

    pub fn hpwl(&self) -> f64 {
        hpwl(self.design, &self.positions(&self.v)).map_or(f64::INFINITY, |h| h.total)
    }

    fn trace_row(&self) -> TraceRow {
        TraceRow {
            iter: self.iteration,
            hpwl: self.hpwl(),
            wa: self.eval.wa,
            phi: self.eval.phi,
            lambda: self.lambda(),
            overflow: self.eval.overflow,
            gamma: self.gamma,
        }
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            state: self.state(),
            lambda: self.lambda(),
            gamma: self.gamma,
            iteration: self.iteration,
            macro_overflow: self.macro_overflow(),
            hpwl: self.hpwl(),
        }
    }
}

/// Seeded initial placement of a merged design.
pub fn init_placement(layout: &FpgaLayout, design: &Design, seed: u64) -> Result<PlacementState> {
    let config = GpConfig {
        seed,
        ..Default::default()
    };
    Ok(GlobalPlacer::new(layout, design, &config)?.state())
}

/// Iterate until every overflow is under its threshold, `max_iters` is
/// reached, or the run diverges. On divergence, or when the iterations run
/// out first, the best checkpoint (lowest macro overflow, then lowest HPWL)
/// is returned and the trace is flagged.
pub fn run_global_placement(
    layout: &FpgaLayout,
    design: &Design,
    config: &GpConfig,
) -> Result<(PlacementState, GpTrace)> {
    let mut gp = GlobalPlacer::new(layout, design, config)?;
    let mut trace = GpTrace::default();
    if config.max_iters == 0 {
        return Ok((gp.state(), trace));
    }
    let mut best: Option<Checkpoint> = None;
    let mut bad_run = 0;
    for it in 0..config.max_iters {
        if it % config.checkpoint_every == 0 {
            let c = gp.checkpoint();
            let better = best.as_ref().map_or(true, |b| {
                c.macro_overflow < b.macro_overflow
                    || (c.macro_overflow == b.macro_overflow && c.hpwl < b.hpwl)
            });
            if better {
                best = Some(c);
            }
        }
        let finite = gp.step();
        trace.rows.push(gp.trace_row());
        let best_ovfl = best.as_ref().map_or(f64::INFINITY, |b| b.macro_overflow);
        if finite && gp.converged() {
            trace.converged = true;
            break;
        }
        if gp.macro_overflow() > config.divergence_factor * best_ovfl {
            bad_run += 1;
        } else {
            bad_run = 0;
        }
        if !finite || bad_run >= config.divergence_window {
            trace.rolled_back = true;
            let b = best.expect("checkpoint taken at iteration 0");
            return Ok((b.state, trace));
        }
    }
    if trace.converged {
        return Ok((gp.state(), trace));
    }
    // Out of iterations without converging: a stall, handled like divergence.
    trace.rolled_back = true;
    let b = best.expect("checkpoint taken at iteration 0");
    Ok((b.state, trace))
}
