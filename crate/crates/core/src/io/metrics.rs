use std::fmt::Write;

use super::{lines, num};
use crate::error::{Error, Result};

/// Router-reported figures for one design.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub design: String,
    /// Macro placement runtime, minutes.
    pub t_mp: f64,
    /// Place-and-route runtime, hours.
    pub t_pr: f64,
    /// Short congestion level per direction (N, S, E, W).
    pub l_short: [f64; 4],
    /// Global congestion level per direction (N, S, E, W).
    pub l_global: [f64; 4],
    /// Detailed router outer iterations.
    pub dri: u32,
    pub hidden: bool,
}

fn four(ln: usize, v: &str, what: &str) -> Result<[f64; 4]> {
    let vals: Vec<f64> = v.split(',').map(|t| num(ln, t, what)).collect::<Result<_>>()?;
    vals.try_into()
        .map_err(|_| Error::parse(ln, format!("{what} needs exactly 4 values")))
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRecord>> {
    let mut out = Vec::new();
    for (ln, toks) in lines(text) {
        if toks[0] != "DESIGN" || toks.len() < 2 {
            return Err(Error::parse(ln, "expected `DESIGN name key=value ...`"));
        }
        let (mut t_mp, mut t_pr, mut l_short, mut l_global, mut dri) = (None, None, None, None, None);
        let mut hidden = false;
        for tok in &toks[2..] {
            if *tok == "hidden" {
                hidden = true;
                continue;
            }
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(ln, format!("bad field `{tok}`")))?;
            let dup = match k {
                "t_mp" => t_mp.replace(num::<f64>(ln, v, "t_mp")?).is_some(),
                "t_pr" => t_pr.replace(num::<f64>(ln, v, "t_pr")?).is_some(),
                "l_short" => l_short.replace(four(ln, v, "l_short")?).is_some(),
                "l_global" => l_global.replace(four(ln, v, "l_global")?).is_some(),
                "dri" => dri.replace(num::<u32>(ln, v, "dri")?).is_some(),
                _ => return Err(Error::parse(ln, format!("unknown field `{k}`"))),
            };
            if dup {
                return Err(Error::parse(ln, format!("`{k}` given twice")));
            }
        }
        let missing = |k: &str| Error::parse(ln, format!("missing `{k}`"));
        let rec = MetricsRecord {
            design: toks[1].to_string(),
            t_mp: t_mp.ok_or_else(|| missing("t_mp"))?,
            t_pr: t_pr.ok_or_else(|| missing("t_pr"))?,
            l_short: l_short.ok_or_else(|| missing("l_short"))?,
            l_global: l_global.ok_or_else(|| missing("l_global"))?,
            dri: dri.ok_or_else(|| missing("dri"))?,
            hidden,
        };
        if !(rec.t_mp >= 0.0 && rec.t_pr >= 0.0) {
            return Err(Error::parse(ln, "runtimes must be nonnegative"));
        }
        if rec.dri == 0 {
            return Err(Error::parse(ln, "dri must be positive"));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_metrics(records: &[MetricsRecord]) -> String {
    let join = |v: &[f64; 4]| v.map(|x| x.to_string()).join(",");
    let mut s = String::new();
    for r in records {
        write!(
            s,
            "DESIGN {} t_mp={} t_pr={} l_short={} l_global={} dri={}",
            r.design,
            r.t_mp,
            r.t_pr,
            join(&r.l_short),
            join(&r.l_global),
            r.dri
        )
        .unwrap();
        if r.hidden {
            s.push_str(" hidden");
        }
        s.push('\n');
    }
    s
}
