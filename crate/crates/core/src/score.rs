//! Contest scoring arithmetic over router-reported metrics.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::io::MetricsRecord;

/// Default weight of a hidden design relative to a public one.
pub const HIDDEN_WEIGHT: f64 = 140.0 / 38.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignScore {
    pub t_mp_score: f64,
    pub sr_i: f64,
    pub sr_f: u32,
    pub routability: f64,
    pub t_pr: f64,
    pub score: f64,
}

/// Runtime term: one, plus every minute beyond ten.
pub fn runtime_score(t_mp: f64) -> Result<f64> {
    if !(t_mp >= 0.0) {
        return Err(Error::InvalidArgument(format!("runtime must be nonnegative, got {t_mp}")));
    }
    Ok(1.0 + (t_mp - 10.0).max(0.0))
}

/// Initial routing term: one plus the squared excess over level 3 of each
/// of the eight directional congestion levels.
pub fn init_routing_score(l_short: &[f64], l_global: &[f64]) -> Result<f64> {
    if l_short.len() != 4 || l_global.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "need 4 short and 4 global levels, got {} and {}",
            l_short.len(),
            l_global.len()
        )));
    }
    Ok(1.0 + l_short.iter().chain(l_global).map(|l| (l - 3.0).max(0.0).powi(2)).sum::<f64>())
}

pub fn design_score(r: &MetricsRecord) -> Result<DesignScore> {
    if r.dri < 1 {
        return Err(Error::InvalidArgument(format!("{}: dri must be at least 1", r.design)));
    }
    let t_mp_score = runtime_score(r.t_mp)?;
    let sr_i = init_routing_score(&r.l_short, &r.l_global)?;
    let routability = sr_i + f64::from(r.dri);
    Ok(DesignScore {
        t_mp_score,
        sr_i,
        sr_f: r.dri,
        routability,
        t_pr: r.t_pr,
        score: t_mp_score * r.t_pr * routability,
    })
}

/// `sum w * score^2 / sum w` with weight one for public designs and
/// `hidden_weight` for hidden ones.
pub fn weighted_final(scores: &[(f64, bool)], hidden_weight: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scores to aggregate".into()));
    }
    if !(hidden_weight > 0.0) {
        return Err(Error::InvalidArgument(format!("hidden weight must be positive, got {hidden_weight}")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(s, hidden) in scores {
        let w = if hidden { hidden_weight } else { 1.0 };
        num += w * s * s;
        den += w;
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub average: f64,
    pub geomean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("no values to summarize".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidArgument(format!("geomean needs positive values, got {v}")));
    }
    let n = values.len() as f64;
    let average = values.iter().sum::<f64>() / n;
    let geomean = (values.iter().map(|v| v.ln()).sum::<f64>() / n).exp();
    let stddev = (values.iter().map(|v| (v - average).powi(2)).sum::<f64>() / n).sqrt();
    Ok(Summary {
        average,
        geomean,
        stddev,
    })
}

/// Score table: one row per design, then the weighted final score and a
/// summary footer.
pub fn score_table(records: &[MetricsRecord], hidden_weight: f64) -> Result<String> {
    let scores: Vec<DesignScore> = records.iter().map(design_score).collect::<Result<_>>()?;
    let mut s = String::from("design\thidden\tt_mp'\tt_pr\tSr_i\tSr_f\trho\tscore\n");
    for (r, d) in records.iter().zip(&scores) {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.design, r.hidden, d.t_mp_score, d.t_pr, d.sr_i, d.sr_f, d.routability, d.score
        )
        .unwrap();
    }
    let pairs: Vec<(f64, bool)> = scores.iter().zip(records).map(|(d, r)| (d.score, r.hidden)).collect();
    writeln!(s, "weighted\t{}", weighted_final(&pairs, hidden_weight)?).unwrap();
    let col = |f: fn(&DesignScore) -> f64| scores.iter().map(f).collect::<Vec<f64>>();
    for (name, pick) in [
        ("average", (|m: &Summary| m.average) as fn(&Summary) -> f64),
        ("geomean", |m: &Summary| m.geomean),
        ("stddev", |m: &Summary| m.stddev),
    ] {
        let mut line = name.to_string();
        for values in [col(|d| d.sr_i), col(|d| f64::from(d.sr_f)), col(|d| d.routability), col(|d| d.score)] {
            match summarize(&values) {
                Ok(m) => write!(line, "\t{}", pick(&m)).unwrap(),
                Err(_) => line.push_str("\t-"),
            }
        }
        writeln!(s, "{line}").unwrap();
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(t_mp: f64, t_pr: f64, l_short: [f64; 4], dri: u32) -> MetricsRecord {
        MetricsRecord {
            design: "d".into(),
            t_mp,
            t_pr,
            l_short,
            l_global: [3.0; 4],
            dri,
            hidden: false,
        }
    }

    #[test]
    fn runtime_examples() {
        assert_eq!(runtime_score(5.0).unwrap(), 1.0);
        assert_eq!(runtime_score(10.0).unwrap(), 1.0);
        assert_eq!(runtime_score(15.0).unwrap(), 6.0);
        assert!(runtime_score(-1.0).is_err());
    }

    #[test]
    fn routing_examples() {
        assert_eq!(init_routing_score(&[1.0, 2.0, 3.0, 0.0], &[3.0; 4]).unwrap(), 1.0);
        assert_eq!(init_routing_score(&[5.0, 3.0, 3.0, 3.0], &[3.0; 4]).unwrap(), 5.0);
        assert_eq!(init_routing_score(&[4.0, 4.0, 3.0, 3.0], &[3.0, 3.0, 3.0, 6.0]).unwrap(), 12.0);
        assert!(init_routing_score(&[1.0; 3], &[1.0; 4]).is_err());
    }

    #[test]
    fn design_examples() {
        let d = design_score(&record(1.43, 0.5, [3.0; 4], 6)).unwrap();
        assert_eq!(d.routability, 7.0);
        assert_eq!(design_score(&record(5.0, 0.5, [3.0; 4], 6)).unwrap().score, 3.5);
        assert_eq!(design_score(&record(12.0, 1.0, [3.0; 4], 5)).unwrap().score, 18.0);
        assert!(design_score(&record(1.0, 1.0, [3.0; 4], 0)).is_err());
    }

    #[test]
    fn weighted_examples() {
        assert_eq!(weighted_final(&[(2.0, false), (4.0, false)], HIDDEN_WEIGHT).unwrap(), 10.0);
        assert_eq!(weighted_final(&[(3.0, false)], HIDDEN_WEIGHT).unwrap(), 9.0);
        assert_eq!(weighted_final(&[(1.0, false), (1.0, true)], HIDDEN_WEIGHT).unwrap(), 1.0);
        assert!(weighted_final(&[], HIDDEN_WEIGHT).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&[2.0, 8.0]).unwrap();
        assert!((s.geomean - 4.0).abs() < 1e-15);
        assert_eq!(s.average, 5.0);
        assert_eq!(s.stddev, 3.0);
        assert_eq!(summarize(&[2.5; 6]).unwrap().stddev, 0.0);
        assert!(summarize(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn table_lists_every_design() {
        let mut a = record(1.43, 0.5, [3.0; 4], 6);
        a.design = "Design_10".into();
        let mut b = record(12.0, 1.0, [3.0; 4], 5);
        b.design = "Design_11".into();
        b.hidden = true;
        let t = score_table(&[a, b], HIDDEN_WEIGHT).unwrap();
        assert!(t.contains("Design_10\tfalse\t1\t0.5\t1\t6\t7\t3.5"), "{t}");
        assert!(t.lines().any(|l| l.starts_with("weighted\t")));
    }

    proptest! {
        #[test]
        fn score_at_least_twice_t_pr(
            t_mp in 0.0f64..60.0, t_pr in 0.0f64..5.0,
            l in prop::array::uniform4(0.0f64..8.0), dri in 1u32..50,
        ) {
            let d = design_score(&record(t_mp, t_pr, l, dri)).unwrap();
            prop_assert!(d.t_mp_score >= 1.0 && d.sr_i >= 1.0);
            prop_assert!(d.score >= 2.0 * t_pr - 1e-12);
        }

        #[test]
        fn weighted_is_monotone(
            scores in prop::collection::vec((0.0f64..100.0, any::<bool>()), 1..10),
            k in 0usize..10, bump in 0.0f64..10.0,
        ) {
            let base = weighted_final(&scores, HIDDEN_WEIGHT).unwrap();
            let mut up = scores.clone();
            let k = k % up.len();
            up[k].0 += bump;
            prop_assert!(weighted_final(&up, HIDDEN_WEIGHT).unwrap() >= base);
        }

        #[test]
        fn closed_forms_hold_on_dense_samples(t in 0.0f64..40.0, l in 0.0f64..9.0) {
            prop_assert_eq!(runtime_score(t).unwrap(), if t <= 10.0 { 1.0 } else { 1.0 + (t - 10.0) });
            let v = init_routing_score(&[l, 0.0, 0.0, 0.0], &[0.0; 4]).unwrap();
            let e = if l <= 3.0 { 1.0 } else { 1.0 + (l - 3.0) * (l - 3.0) };
            prop_assert!((v - e).abs() < 1e-12);
        }
    }
}
