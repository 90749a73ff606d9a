//! HPWL and legality of a placement, before and after breaking it.

use macroplace::io::{generate_benchmark, Profile};
use macroplace::model::check_legality;
use macroplace::pipeline::place;
use macroplace::wirelength::hpwl;

fn main() -> macroplace::Result<()> {
    let (layout, design) = generate_benchmark(3, Profile::Tiny)?;
    let mut pos = place(&layout, &design, &Default::default())?.positions;
    let h = hpwl(&design, &pos)?;
    let worst = h.per_net.iter().zip(&design.nets).max_by(|a, b| a.0.total_cmp(b.0)).unwrap();
    println!("hpwl {:.1} over {} nets, longest {} at {:.1}", h.total, design.nets.len(), worst.1.name, worst.0);
    println!("{}", check_legality(&layout, &design, &pos));

    // Drop the first BRAM onto the first DSP site.
    let bram = design.instances.iter().position(|i| i.name.starts_with("bram")).unwrap();
    let dsp = design.instances.iter().position(|i| i.name.starts_with("dsp")).unwrap();
    pos[bram] = pos[dsp];
    println!("{}", check_legality(&layout, &design, &pos));
    Ok(())
}
