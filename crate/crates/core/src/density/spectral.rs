use std::f64::consts::PI;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

/// Neumann Poisson solver on an `nx x ny` cell-centred grid, row-major
/// (`data[j * nx + i]`, `i` along x).
///
/// Solves `-L psi = rho - mean(rho)` where `L` is the 5-point Laplacian with
/// reflecting boundaries, diagonalised by the type-II cosine basis.
pub struct PoissonSolver {
    pub nx: usize,
    pub ny: usize,
    pub bw: f64,
    pub bh: f64,
    fx: Arc<dyn TransformType2And3<f64>>,
    fy: Arc<dyn TransformType2And3<f64>>,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
    col: Vec<f64>,
}

/// Output of one solve.
#[derive(Debug, Clone, Default)]
pub struct Solution {
    pub potential: Vec<f64>,
    pub field_x: Vec<f64>,
    pub field_y: Vec<f64>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("bw", &self.bw)
            .field("bh", &self.bh)
            .finish()
    }
}

impl PoissonSolver {
    pub fn new(nx: usize, ny: usize, bw: f64, bh: f64) -> Self {
        let mut planner = DctPlanner::new();
        let eig = |n: usize, h: f64| -> Vec<f64> {
            (0..n)
                .map(|u| (2.0 - 2.0 * (PI * u as f64 / n as f64).cos()) / (h * h))
                .collect()
        };
        PoissonSolver {
            nx,
            ny,
            bw,
            bh,
            fx: planner.plan_dct2(nx),
            fy: planner.plan_dct2(ny),
            eig_x: eig(nx, bw),
            eig_y: eig(ny, bh),
            col: vec![0.0; ny],
        }
    }

    fn rows(&self, data: &mut [f64], f: impl Fn(&dyn TransformType2And3<f64>, &mut [f64])) {
        for row in data.chunks_exact_mut(self.nx) {
            f(&*self.fx, row);
        }
    }

    fn cols(&mut self, data: &mut [f64], f: impl Fn(&dyn TransformType2And3<f64>, &mut [f64])) {
        let (nx, ny) = (self.nx, self.ny);
        for i in 0..nx {
            for j in 0..ny {
                self.col[j] = data[j * nx + i];
            }
            f(&*self.fy, &mut self.col);
            for j in 0..ny {
                data[j * nx + i] = self.col[j];
            }
        }
    }

    /// Cosine coefficients `a` with `psi = sum a_uv cos(..) cos(..)`.
    fn coefficients(&mut self, rho: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut c = rho.to_vec();
        self.rows(&mut c, |t, b| t.process_dct2(b));
        self.cols(&mut c, |t, b| t.process_dct2(b));
        let s = |k: usize, n: usize| if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 };
        for v in 0..ny {
            for u in 0..nx {
                let k = v * nx + u;
                let mu = self.eig_x[u] + self.eig_y[v];
                c[k] = if k == 0 { 0.0 } else { c[k] * s(u, nx) * s(v, ny) / mu };
            }
        }
        c
    }

    /// Potential and field `-grad psi` at bin centres.
    pub fn solve(&mut self, rho: &[f64]) -> Solution {
        assert_eq!(rho.len(), self.nx * self.ny);
        let (nx, ny) = (self.nx, self.ny);
        let a = self.coefficients(rho);

        // psi: cos/cos synthesis. A type-III input carries x_0 at half weight.
        let mut psi = a.clone();
        for v in 0..ny {
            psi[v * nx] *= 2.0;
        }
        for u in 0..nx {
            psi[u] *= 2.0;
        }
        self.rows(&mut psi, |t, b| t.process_dct3(b));
        self.cols(&mut psi, |t, b| t.process_dct3(b));

        // x field: sin along x (DST-III with index shift), cos along y.
        let mut ex = vec![0.0; nx * ny];
        for v in 0..ny {
            for u in 1..nx {
                let w = PI * u as f64 / (nx as f64 * self.bw);
                ex[v * nx + u - 1] = a[v * nx + u] * w * if v == 0 { 2.0 } else { 1.0 };
            }
        }
        self.rows(&mut ex, |t, b| t.process_dst3(b));
        self.cols(&mut ex, |t, b| t.process_dct3(b));

        let mut ey = vec![0.0; nx * ny];
        for v in 1..ny {
            let w = PI * v as f64 / (ny as f64 * self.bh);
            for u in 0..nx {
                ey[(v - 1) * nx + u] = a[v * nx + u] * w * if u == 0 { 2.0 } else { 1.0 };
            }
        }
        self.rows(&mut ey, |t, b| t.process_dct3(b));
        self.cols(&mut ey, |t, b| t.process_dst3(b));

        Solution {
            potential: psi,
            field_x: ex,
            field_y: ey,
        }
    }
}

/// 5-point Neumann Laplacian, used by tests as an independent check.
pub fn laplacian(psi: &[f64], nx: usize, ny: usize, bw: f64, bh: f64) -> Vec<f64> {
    let at = |i: usize, j: usize| psi[j * nx + i];
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = at(i, j);
            let l = if i > 0 { at(i - 1, j) } else { c };
            let r = if i + 1 < nx { at(i + 1, j) } else { c };
            let d = if j > 0 { at(i, j - 1) } else { c };
            let u = if j + 1 < ny { at(i, j + 1) } else { c };
            out[j * nx + i] = (l - 2.0 * c + r) / (bw * bw) + (d - 2.0 * c + u) / (bh * bh);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_residual(rho: &[f64], psi: &[f64], nx: usize, ny: usize, bw: f64, bh: f64) -> f64 {
        let mean = rho.iter().sum::<f64>() / rho.len() as f64;
        let lap = laplacian(psi, nx, ny, bw, bh);
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..rho.len() {
            let target = rho[k] - mean;
            num += (lap[k] + target).powi(2);
            den += target * target;
        }
        (num / den).sqrt()
    }

    #[test]
    fn residual_on_random_64_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let rho: Vec<f64> = (0..64 * 64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut s = PoissonSolver::new(64, 64, 1.5, 0.75);
        let sol = s.solve(&rho);
        let r = rel_residual(&rho, &sol.potential, 64, 64, 1.5, 0.75);
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn rectangular_grid_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho: Vec<f64> = (0..32 * 16).map(|_| rng.gen_range(0.0..3.0)).collect();
        let mut s = PoissonSolver::new(32, 16, 2.0, 5.0);
        let sol = s.solve(&rho);
        assert!(rel_residual(&rho, &sol.potential, 32, 16, 2.0, 5.0) < 1e-9);
    }

    #[test]
    fn uniform_charge_gives_flat_potential() {
        let mut s = PoissonSolver::new(16, 16, 1.0, 1.0);
        let sol = s.solve(&vec![0.7; 256]);
        assert!(sol.potential.iter().all(|v| v.abs() < 1e-12));
        assert!(sol.field_x.iter().chain(&sol.field_y).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn centred_charge_field_is_antisymmetric() {
        let n = 16;
        let mut rho = vec![0.0; n * n];
        for j in 7..9 {
            for i in 7..9 {
                rho[j * n + i] = 1.0;
            }
        }
        let mut s = PoissonSolver::new(n, n, 1.0, 1.0);
        let sol = s.solve(&rho);
        for j in 0..n {
            for i in 0..n {
                let a = sol.field_x[j * n + i];
                let b = sol.field_x[j * n + (n - 1 - i)];
                assert!((a + b).abs() < 1e-12, "{a} {b}");
            }
        }
        // Field points away from the charge.
        assert!(sol.field_x[8 * n + 12] > 0.0 && sol.field_x[8 * n + 3] < 0.0);
    }

    #[test]
    fn field_matches_spectral_derivative_of_potential() {
        // A single cosine mode has a closed-form derivative.
        let (nx, ny, bw, bh) = (16usize, 8usize, 1.0, 2.0);
        let (u, v) = (3.0, 2.0);
        let mut rho = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let cx = (PI * u * (i as f64 + 0.5) / nx as f64).cos();
                let cy = (PI * v * (j as f64 + 0.5) / ny as f64).cos();
                rho[j * nx + i] = cx * cy;
            }
        }
        let mu = (2.0 - 2.0 * (PI * u / nx as f64).cos()) / (bw * bw)
            + (2.0 - 2.0 * (PI * v / ny as f64).cos()) / (bh * bh);
        let mut s = PoissonSolver::new(nx, ny, bw, bh);
        let sol = s.solve(&rho);
        for j in 0..ny {
            for i in 0..nx {
                let sx = (PI * u * (i as f64 + 0.5) / nx as f64).sin();
                let cx = (PI * u * (i as f64 + 0.5) / nx as f64).cos();
                let sy = (PI * v * (j as f64 + 0.5) / ny as f64).sin();
                let cy = (PI * v * (j as f64 + 0.5) / ny as f64).cos();
                let k = j * nx + i;
                assert!((sol.potential[k] - cx * cy / mu).abs() < 1e-12);
                let ex = PI * u / (nx as f64 * bw) * sx * cy / mu;
                let ey = PI * v / (ny as f64 * bh) * cx * sy / mu;
                assert!((sol.field_x[k] - ex).abs() < 1e-12);
                assert!((sol.field_y[k] - ey).abs() < 1e-12);
            }
        }
    }
}
