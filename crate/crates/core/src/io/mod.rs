//! Line-oriented text formats, SVG output and the synthetic benchmark
//! generator.
//!
//! All formats are whitespace separated with `#` comments. Parsers report
//! 1-based line numbers.

mod design;
mod generate;
mod layout;
mod metrics;
mod placement;
mod svg;

pub use design::{parse_design, write_design};
pub use generate::{generate_benchmark, generate_contention, generate_layout, Profile};
pub use layout::{parse_layout, write_layout};
pub use metrics::{parse_metrics, write_metrics, MetricsRecord};
pub use placement::{parse_placement, write_placement, PlacementEntry, PlacementFile};
pub use svg::write_svg;

/// Non-empty lines with comments stripped, paired with their line number.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub(crate) fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> crate::Result<T> {
    tok.parse()
        .map_err(|_| crate::Error::parse(line, format!("bad {what} `{tok}`")))
}
