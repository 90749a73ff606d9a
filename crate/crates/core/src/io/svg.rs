use std::fmt::Write;

use crate::model::{Design, FpgaLayout, Point, Rect};

const SCALE: f64 = 8.0;

fn column_fill(name: &str, i: usize) -> &'static str {
    const PALETTE: [&str; 6] = ["#eef3fb", "#fbeee6", "#eaf7ea", "#f6eafa", "#fafae6", "#eeeeee"];
    match name {
        "CLB" => "#f4f4f4",
        "DSP" => "#fbe3d0",
        "BRAM" => "#d8ecf9",
        "IO" => "#e4e4e4",
        _ => PALETTE[i % PALETTE.len()],
    }
}

fn rect(s: &mut String, r: &Rect, grid_h: f64, style: &str) {
    // SVG y grows downward; flip so y = 0 is the bottom edge.
    writeln!(
        s,
        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
        r.xl * SCALE,
        (grid_h - r.yh) * SCALE,
        r.width() * SCALE,
        r.height() * SCALE
    )
    .unwrap();
}

/// Render columns, macros, cascade outlines and dashed region boundaries.
/// `positions` is indexed like `design.instances`.
pub fn write_svg(layout: &FpgaLayout, design: &Design, positions: &[Point]) -> String {
    let (w, h) = (f64::from(layout.grid_w), f64::from(layout.grid_h));
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        w * SCALE,
        h * SCALE,
        w * SCALE,
        h * SCALE
    )
    .unwrap();

    let mut x = 0;
    while x < layout.grid_w {
        let t = layout.columns[x as usize];
        let mut end = x + 1;
        while end < layout.grid_w && layout.columns[end as usize] == t {
            end += 1;
        }
        let fill = column_fill(&layout.site_types[t].name, t);
        let band = Rect::new(f64::from(x), 0.0, f64::from(end), h);
        rect(&mut s, &band, h, &format!(r#"fill="{fill}" stroke="none""#));
        x = end;
    }

    for (inst, p) in design.instances.iter().zip(positions) {
        if !inst.is_macro() || !p.is_finite() {
            continue;
        }
        let fill = if inst.resource == crate::model::ResourceType::Dsp { "#e07b39" } else { "#3b8fd4" };
        rect(&mut s, &Rect::at(*p, inst.width, inst.height), h, &format!(r##"fill="{fill}" stroke="#333" stroke-width="0.5""##));
    }

    for shape in &design.shapes {
        let mut bbox: Option<Rect> = None;
        for &m in &shape.members {
            let Some(p) = positions.get(m).filter(|p| p.is_finite()) else { continue };
            let r = Rect::at(*p, design.instances[m].width, design.instances[m].height);
            bbox = Some(match bbox {
                None => r,
                Some(b) => Rect::new(b.xl.min(r.xl), b.yl.min(r.yl), b.xh.max(r.xh), b.yh.max(r.yh)),
            });
        }
        if let Some(b) = bbox {
            rect(&mut s, &b, h, r##"fill="none" stroke="#000" stroke-width="1.5""##);
        }
    }

    for region in &design.regions {
        for r in &region.rects {
            rect(&mut s, r, h, r##"fill="none" stroke="#c01010" stroke-width="1.5" stroke-dasharray="6,4""##);
        }
    }
    s.push_str("</svg>\n");
    s
}
