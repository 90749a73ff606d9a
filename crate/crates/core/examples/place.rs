//! Full flow on a generated benchmark: global placement, legalization and
//! a legality check.

use macroplace::io::{generate_benchmark, Profile};
use macroplace::pipeline::{place, PlaceConfig};

fn main() -> macroplace::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let (layout, design) = generate_benchmark(seed, Profile::Tiny)?;
    let out = place(&layout, &design, &PlaceConfig::default())?;

    let last = out.trace.rows.last().expect("at least one iteration");
    println!("gp: {} iterations, converged {}", out.trace.rows.len(), out.trace.converged);
    println!("overflow lut {:.3} ff {:.3} dsp {:.3} bram {:.3}", last.overflow[0], last.overflow[1], last.overflow[2], last.overflow[3]);
    println!("hpwl {:.1} after gp, {:.1} legalized", out.gp_hpwl, out.hpwl);
    let [a, b, c] = out.legalization.phase_counts();
    println!("legalized {a} cascades, {b} region macros, {c} other macros");
    println!("{}", out.report);
    Ok(())
}
