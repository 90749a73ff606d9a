//! Min-cost bipartite assignment checked against brute force.

use macroplace::flow::{assignment_oracle, scale_cost, solve_assignment, AssignmentProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> macroplace::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (macros, sites) = (6, 9);
    let mut p = AssignmentProblem::new(macros, sites);
    for m in 0..macros {
        for s in 0..sites {
            if rng.gen_bool(0.6) {
                p.add_arc(m, s, scale_cost(rng.gen_range(0.0..20.0)));
            }
        }
    }
    let a = solve_assignment(&p)?;
    println!("matching {:?}", a.matching);
    println!("cost {} (oracle {})", a.total_cost, assignment_oracle(&p)?);
    Ok(())
}
