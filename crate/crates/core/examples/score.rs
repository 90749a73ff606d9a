//! Contest scoring from router metrics.

use macroplace::io::MetricsRecord;
use macroplace::score::{design_score, score_table, HIDDEN_WEIGHT};

fn record(design: &str, t_mp: f64, t_pr: f64, l_short: [f64; 4], dri: u32, hidden: bool) -> MetricsRecord {
    MetricsRecord {
        design: design.into(),
        t_mp,
        t_pr,
        l_short,
        l_global: [3.0; 4],
        dri,
        hidden,
    }
}

fn main() -> macroplace::Result<()> {
    let records = [
        record("Design_10", 1.4, 0.5, [3.0; 4], 6, false),
        record("Design_100", 2.1, 0.9, [4.0, 4.0, 3.0, 3.0], 7, false),
        record("Design_176", 12.5, 2.0, [6.0, 5.0, 4.0, 3.0], 35, true),
    ];
    for r in &records {
        let s = design_score(r)?;
        println!("{}: runtime {} x t_pr {} x (Sr_i {} + dri {}) = {}", r.design, s.t_mp_score, s.t_pr, s.sr_i, s.sr_f, s.score);
    }
    println!();
    print!("{}", score_table(&records, HIDDEN_WEIGHT)?);
    Ok(())
}
