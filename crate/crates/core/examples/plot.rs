//! Place a tiny benchmark and write the result as SVG.
//!
//! cargo run --example plot -- out.svg

use macroplace::io::{generate_benchmark, write_svg, Profile};
use macroplace::pipeline::place;

fn main() -> macroplace::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "placement.svg".into());
    let (layout, design) = generate_benchmark(1, Profile::Tiny)?;
    let out = place(&layout, &design, &Default::default())?;
    let svg = write_svg(&layout, &design, &out.positions);
    std::fs::write(&path, &svg)?;
    println!("wrote {path} ({} bytes)", svg.len());
    Ok(())
}
