//! Legalize macros scattered at random positions, without global placement.

use macroplace::io::{generate_benchmark, Profile};
use macroplace::legalize::legalize;
use macroplace::model::{check_legality, merge_cascades, region_clamp, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> macroplace::Result<()> {
    let (layout, design) = generate_benchmark(2, Profile::Tiny)?;
    let merged = merge_cascades(&design)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (w, h) = (f64::from(layout.grid_w), f64::from(layout.grid_h));
    let rough: Vec<Point> = merged
        .design
        .instances
        .iter()
        .map(|i| {
            let p = Point::new(rng.gen_range(0.0..w - i.width), rng.gen_range(0.0..h - i.height));
            match (i.fixed_at, i.region) {
                (Some(f), _) => f,
                // Soft cells stay where they are put, so keep them in their regions.
                (None, Some(r)) => region_clamp(i, p, &merged.design.regions[r]).unwrap(),
                (None, None) => p,
            }
        })
        .collect();

    let lg = legalize(&layout, &merged, &rough, 32)?;
    for p in lg.report.placed.iter().take(8) {
        let name = &merged.design.instances[p.inst].name;
        println!("phase {} {name}: ({:.1}, {:.1}) -> ({}, {})", p.phase, rough[p.inst].x, rough[p.inst].y, p.pos.x, p.pos.y);
    }
    println!("... {} macros, total cost {:.0}", lg.report.placed.len(), lg.report.total_cost);
    println!("{}", check_legality(&layout, &design, &lg.positions));
    Ok(())
}
