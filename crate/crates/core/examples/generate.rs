//! Generate a benchmark and print its size.
//!
//! cargo run --example generate -- small 3

use macroplace::io::{generate_benchmark, write_design, write_layout, Profile};
use macroplace::model::ResourceType;

fn main() -> macroplace::Result<()> {
    let mut args = std::env::args().skip(1);
    let profile: Profile = args.next().as_deref().unwrap_or("tiny").parse()?;
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let (layout, design) = generate_benchmark(seed, profile)?;

    println!("{profile} seed {seed}: {} x {} fabric", layout.grid_w, layout.grid_h);
    for res in [ResourceType::Lut, ResourceType::Ff, ResourceType::Dsp, ResourceType::Bram, ResourceType::Io] {
        let n = design.instances.iter().filter(|i| i.resource == res).count();
        println!("  {:5} {n}", res.as_str());
    }
    let sizes: std::collections::BTreeSet<usize> = design.shapes.iter().map(|s| s.members.len()).collect();
    println!("  {} nets, {} cascades (sizes {sizes:?}), {} regions", design.nets.len(), design.shapes.len(), design.regions.len());
    println!("  layout file {} bytes, design file {} bytes", write_layout(&layout).len(), write_design(&design).len());
    Ok(())
}
