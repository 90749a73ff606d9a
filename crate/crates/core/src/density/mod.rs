//! Per-resource electrostatic density systems.
//!
//! Instance area is positive charge, site capacity is negative charge. Each
//! system keeps two bin grids: `density`, the smoothed charge seen by the
//! Poisson solve (footprints stretched to at least one bin, fillers
//! included), and `occupancy`, the same smoothed area of real instances
//! only, used for overflow. Site capacity is smoothed the same way.

mod spectral;

pub use spectral::{laplacian, PoissonSolver, Solution};

use crate::model::{Design, FpgaLayout, Point, ResourceType};

/// Bins per axis for a system holding `count` instances: the smallest
/// power of two at or above `sqrt(count)`, clamped to `[16, 512]`.
pub fn bins_for(count: usize) -> usize {
    let root = (count as f64).sqrt().ceil() as usize;
    root.next_power_of_two().clamp(16, 512)
}

/// `bins_for(count)`, further limited so a bin is never narrower than one
/// site on a `grid`-wide chip (but never below 16).
pub fn bins_for_grid(count: usize, grid: u32) -> usize {
    let grid = (grid.max(1) as usize + 1).next_power_of_two() / 2;
    bins_for(count).min(grid).max(16)
}

#[derive(Debug)]
pub struct ElectroSystem {
    pub resource: ResourceType,
    pub bins_x: usize,
    pub bins_y: usize,
    pub bin_w: f64,
    pub bin_h: f64,
    pub capacity: Vec<f64>,
    pub density: Vec<f64>,
    pub occupancy: Vec<f64>,
    pub potential: Vec<f64>,
    pub field_x: Vec<f64>,
    pub field_y: Vec<f64>,
    pub energy: f64,
    pub lambda: f64,
    pub c_quad: f64,
    /// Movable instances of this resource.
    pub members: Vec<usize>,
    pub movable_area: f64,
    pub filler_count: usize,
    pub filler_side: f64,
    fixed_density: Vec<f64>,
    chip_w: f64,
    chip_h: f64,
    solver: PoissonSolver,
}

/// A footprint after stretching to at least one bin and clamping into the
/// chip. `scale` keeps the charge equal to the true area.
#[derive(Debug, Clone, Copy)]
struct Spread {
    xl: f64,
    yl: f64,
    xh: f64,
    yh: f64,
    scale: f64,
}

fn overlap(lo: f64, hi: f64, blo: f64, bhi: f64) -> f64 {
    (hi.min(bhi) - lo.max(blo)).max(0.0)
}

impl ElectroSystem {
    pub fn new(layout: &FpgaLayout, design: &Design, resource: ResourceType) -> Self {
        let count = design.count(resource);
        let n = bins_for_grid(count, layout.grid_w.min(layout.grid_h));
        let (chip_w, chip_h) = (f64::from(layout.grid_w), f64::from(layout.grid_h));
        let (bw, bh) = (chip_w / n as f64, chip_h / n as f64);
        let mut sys = ElectroSystem {
            resource,
            bins_x: n,
            bins_y: n,
            bin_w: bw,
            bin_h: bh,
            capacity: vec![0.0; n * n],
            density: vec![0.0; n * n],
            occupancy: vec![0.0; n * n],
            potential: vec![0.0; n * n],
            field_x: vec![0.0; n * n],
            field_y: vec![0.0; n * n],
            energy: 0.0,
            lambda: 0.0,
            c_quad: 1.0,
            members: Vec::new(),
            movable_area: 0.0,
            filler_count: 0,
            filler_side: 0.0,
            fixed_density: vec![0.0; n * n],
            chip_w,
            chip_h,
            solver: PoissonSolver::new(n, n, bw, bh),
        };

        // Every site hosting the resource offers its full area, smoothed
        // like instance charge so a macro sitting on its column matches it.
        for x in layout.columns_for(resource) {
            let s = sys.spread(Point::new(f64::from(x), 0.0), 1.0, chip_h);
            let mut cap = std::mem::take(&mut sys.capacity);
            sys.splat(&mut cap, s.xl, s.yl, s.xh, s.yh, s.scale);
            sys.capacity = cap;
        }

        let mut fixed_area = 0.0;
        for (i, inst) in design.instances.iter().enumerate() {
            if inst.resource != resource {
                continue;
            }
            match inst.fixed_at {
                Some(p) => {
                    fixed_area += inst.area();
                    let mut fd = std::mem::take(&mut sys.fixed_density);
                    sys.splat(&mut fd, p.x, p.y, p.x + inst.width, p.y + inst.height, 1.0);
                    sys.fixed_density = fd;
                }
                None => {
                    sys.members.push(i);
                    sys.movable_area += inst.area();
                }
            }
        }

        let free = sys.capacity.iter().sum::<f64>() - sys.movable_area - fixed_area;
        if free > 1e-9 && !sys.members.is_empty() {
            sys.filler_count = sys.members.len().max(64);
            sys.filler_side = (free / sys.filler_count as f64).sqrt();
        }
        sys
    }

    fn splat(&self, grid: &mut [f64], xl: f64, yl: f64, xh: f64, yh: f64, scale: f64) {
        let (nx, ny) = (self.bins_x, self.bins_y);
        let i0 = ((xl / self.bin_w).floor().max(0.0) as usize).min(nx - 1);
        let i1 = ((xh / self.bin_w).ceil().max(1.0) as usize).min(nx);
        let j0 = ((yl / self.bin_h).floor().max(0.0) as usize).min(ny - 1);
        let j1 = ((yh / self.bin_h).ceil().max(1.0) as usize).min(ny);
        for j in j0..j1 {
            let oy = overlap(yl, yh, j as f64 * self.bin_h, (j + 1) as f64 * self.bin_h);
            if oy == 0.0 {
                continue;
            }
            for i in i0..i1 {
                let ox = overlap(xl, xh, i as f64 * self.bin_w, (i + 1) as f64 * self.bin_w);
                grid[j * nx + i] += scale * ox * oy;
            }
        }
    }

    fn spread(&self, p: Point, w: f64, h: f64) -> Spread {
        let (ws, hs) = (w.max(self.bin_w), h.max(self.bin_h));
        let cx = p.x + 0.5 * w - 0.5 * ws;
        let cy = p.y + 0.5 * h - 0.5 * hs;
        let xl = cx.clamp(0.0, (self.chip_w - ws).max(0.0));
        let yl = cy.clamp(0.0, (self.chip_h - hs).max(0.0));
        Spread {
            xl,
            yl,
            xh: xl + ws,
            yh: yl + hs,
            scale: w * h / (ws * hs),
        }
    }

    /// Filler size for this system (square).
    pub fn filler_size(&self) -> (f64, f64) {
        (self.filler_side, self.filler_side)
    }

    /// Recompute `density` (charge) and `occupancy` for the given
    /// positions; `fillers` only adds charge.
    pub fn bin_density(&mut self, design: &Design, positions: &[Point], fillers: &[Point]) {
        let mut density = std::mem::take(&mut self.density);
        let mut occ = std::mem::take(&mut self.occupancy);
        density.copy_from_slice(&self.fixed_density);
        occ.copy_from_slice(&self.fixed_density);
        for &i in &self.members {
            let inst = &design.instances[i];
            let p = positions[i];
            let s = self.spread(p, inst.width, inst.height);
            self.splat(&mut density, s.xl, s.yl, s.xh, s.yh, s.scale);
            self.splat(&mut occ, s.xl, s.yl, s.xh, s.yh, s.scale);
        }
        let side = self.filler_side;
        for &f in fillers {
            let s = self.spread(f, side, side);
            self.splat(&mut density, s.xl, s.yl, s.xh, s.yh, s.scale);
        }
        self.density = density;
        self.occupancy = occ;
    }

    /// Solve for potential and field; sets `energy = sum (rho - cap) psi`.
    pub fn solve_poisson(&mut self) {
        let rho: Vec<f64> = self
            .density
            .iter()
            .zip(&self.capacity)
            .map(|(d, c)| d - c)
            .collect();
        let sol = self.solver.solve(&rho);
        self.energy = rho.iter().zip(&sol.potential).map(|(r, p)| r * p).sum();
        self.potential = sol.potential;
        self.field_x = sol.field_x;
        self.field_y = sol.field_y;
    }

    /// Bilinear interpolation of the field at `(x, y)`, bin centres as
    /// nodes, constant beyond the outermost centres.
    pub fn field_at(&self, x: f64, y: f64) -> Point {
        let axis = |v: f64, size: f64, n: usize| {
            let t = (v / size - 0.5).clamp(0.0, (n - 1) as f64);
            let i = (t.floor() as usize).min(n.saturating_sub(2));
            (i, (i + 1).min(n - 1), t - i as f64)
        };
        let (i0, i1, tx) = axis(x, self.bin_w, self.bins_x);
        let (j0, j1, ty) = axis(y, self.bin_h, self.bins_y);
        let nx = self.bins_x;
        let lerp = |f: &[f64]| {
            let lo = f[j0 * nx + i0] * (1.0 - tx) + f[j0 * nx + i1] * tx;
            let hi = f[j1 * nx + i0] * (1.0 - tx) + f[j1 * nx + i1] * tx;
            lo * (1.0 - ty) + hi * ty
        };
        Point::new(lerp(&self.field_x), lerp(&self.field_y))
    }

    /// Force-based derivative of `energy` for a footprint at `p`: the field
    /// integrated over the stretched footprint. For a footprint of one bin
    /// this is the bilinear interpolation of the field at its centre. The
    /// factor 2 comes from the energy being quadratic in charge.
    fn footprint_gradient(&self, p: Point, w: f64, h: f64) -> Point {
        let s = self.spread(p, w, h);
        let nx = self.bins_x;
        let i0 = ((s.xl / self.bin_w).floor().max(0.0) as usize).min(nx - 1);
        let i1 = ((s.xh / self.bin_w).ceil() as usize).clamp(i0 + 1, nx);
        let j0 = ((s.yl / self.bin_h).floor().max(0.0) as usize).min(self.bins_y - 1);
        let j1 = ((s.yh / self.bin_h).ceil() as usize).clamp(j0 + 1, self.bins_y);
        let mut f = Point::default();
        for j in j0..j1 {
            let oy = overlap(s.yl, s.yh, j as f64 * self.bin_h, (j + 1) as f64 * self.bin_h);
            for i in i0..i1 {
                let a = oy * overlap(s.xl, s.xh, i as f64 * self.bin_w, (i + 1) as f64 * self.bin_w);
                f.x += a * self.field_x[j * nx + i];
                f.y += a * self.field_y[j * nx + i];
            }
        }
        Point::new(-2.0 * s.scale * f.x, -2.0 * s.scale * f.y)
    }

    /// Gradient of `energy` for every instance (zero outside this system).
    pub fn density_gradient(&self, design: &Design, positions: &[Point]) -> Vec<Point> {
        let mut g = vec![Point::default(); design.instances.len()];
        for &i in &self.members {
            let inst = &design.instances[i];
            g[i] = self.footprint_gradient(positions[i], inst.width, inst.height);
        }
        g
    }

    pub fn filler_gradient(&self, fillers: &[Point]) -> Vec<Point> {
        fillers
            .iter()
            .map(|&f| self.footprint_gradient(f, self.filler_side, self.filler_side))
            .collect()
    }

    /// Footprint area above capacity, relative to the movable area.
    pub fn overflow(&self) -> f64 {
        if self.movable_area <= 0.0 {
            return 0.0;
        }
        let over: f64 = self
            .occupancy
            .iter()
            .zip(&self.capacity)
            .map(|(o, c)| (o - c).max(0.0))
            .sum();
        over / self.movable_area
    }
}
