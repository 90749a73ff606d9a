//! Electrostatic density for a cluster of cells: bin density, potential,
//! overflow and the force on a few cells.

use macroplace::density::{laplacian, ElectroSystem, PoissonSolver};
use macroplace::io::{generate_benchmark, Profile};
use macroplace::model::{Point, ResourceType};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> macroplace::Result<()> {
    let (layout, design) = generate_benchmark(1, Profile::Tiny)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // Everything in the middle fifth of the chip.
    let c = f64::from(layout.grid_w) / 2.0;
    let pos: Vec<Point> = design
        .instances
        .iter()
        .map(|i| i.fixed_at.unwrap_or_else(|| Point::new(c + rng.gen_range(-4.0..4.0), c + rng.gen_range(-4.0..4.0))))
        .collect();

    let mut lut = ElectroSystem::new(&layout, &design, ResourceType::Lut);
    lut.bin_density(&design, &pos, &[]);
    lut.solve_poisson();
    println!("LUT system {} x {} bins, overflow {:.3}, energy {:.1}", lut.bins_x, lut.bins_y, lut.overflow(), lut.energy);
    let g = lut.density_gradient(&design, &pos);
    for i in design.instances.iter().enumerate().filter(|(_, i)| i.resource == ResourceType::Lut).map(|(i, _)| i).take(4) {
        println!("  {} at ({:.1}, {:.1}) pushed by ({:.2}, {:.2})", design.instances[i].name, pos[i].x, pos[i].y, -g[i].x, -g[i].y);
    }

    // The solver against a finite-difference Laplacian.
    let rho: Vec<f64> = (0..32 * 32).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sol = PoissonSolver::new(32, 32, 1.0, 1.0).solve(&rho);
    let lap = laplacian(&sol.potential, 32, 32, 1.0, 1.0);
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    let err = rho.iter().zip(&lap).map(|(r, l)| (l + r - mean).abs()).fold(0.0, f64::max);
    println!("poisson max residual {err:.2e}");
    Ok(())
}
