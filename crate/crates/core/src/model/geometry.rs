use serde::{Deserialize, Serialize};

use super::{Instance, Point, Region};
use crate::error::{Error, Result};

/// Axis-aligned rectangle `[xl, xh) x [yl, yh)` in grid units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xl: f64,
    pub yl: f64,
    pub xh: f64,
    pub yh: f64,
}

impl Rect {
    pub const fn new(xl: f64, yl: f64, xh: f64, yh: f64) -> Self {
        Rect { xl, yl, xh, yh }
    }

    pub fn at(p: Point, w: f64, h: f64) -> Self {
        Rect::new(p.x, p.y, p.x + w, p.y + h)
    }

    pub fn width(&self) -> f64 {
        self.xh - self.xl
    }

    pub fn height(&self) -> f64 {
        self.yh - self.yl
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xl + self.xh), 0.5 * (self.yl + self.yh))
    }

    pub fn contains_rect(&self, other: &Rect, eps: f64) -> bool {
        other.xl >= self.xl - eps
            && other.yl >= self.yl - eps
            && other.xh <= self.xh + eps
            && other.yh <= self.yh + eps
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.xl.max(other.xl),
            self.yl.max(other.yl),
            self.xh.min(other.xh),
            self.yh.min(other.yh),
        );
        (r.xl < r.xh && r.yl < r.yh).then_some(r)
    }

    pub fn fits(&self, w: f64, h: f64) -> bool {
        w <= self.width() && h <= self.height()
    }

    /// Lower-left clamp keeping a `w x h` box inside this rectangle.
    pub fn clamp(&self, p: Point, w: f64, h: f64) -> Point {
        Point::new(
            p.x.max(self.xl).min(self.xh - w),
            p.y.max(self.yl).min(self.yh - h),
        )
    }
}

impl Region {
    /// Clamp a `w x h` box at `p` into the member rectangle needing the
    /// smallest Manhattan move; ties go to the lower rectangle index.
    /// `None` when the box fits no member rectangle.
    pub fn clamp(&self, p: Point, w: f64, h: f64) -> Option<Point> {
        let mut best: Option<(f64, Point)> = None;
        for r in self.rects.iter().filter(|r| r.fits(w, h)) {
            let q = r.clamp(p, w, h);
            let d = q.manhattan(p);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, q));
            }
        }
        best.map(|(_, q)| q)
    }

    /// True when the union of member rectangles covers `r` (up to `eps`).
    pub fn covers(&self, r: &Rect, eps: f64) -> bool {
        if self.rects.iter().any(|m| m.contains_rect(r, eps)) {
            return true;
        }
        // Split `r` at every member edge and test each elementary cell.
        let mut xs = vec![r.xl, r.xh];
        let mut ys = vec![r.yl, r.yh];
        for m in &self.rects {
            for v in [m.xl, m.xh] {
                if v > r.xl && v < r.xh {
                    xs.push(v);
                }
            }
            for v in [m.yl, m.yh] {
                if v > r.yl && v < r.yh {
                    ys.push(v);
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        for wx in xs.windows(2) {
            if wx[1] - wx[0] <= eps {
                continue;
            }
            for wy in ys.windows(2) {
                if wy[1] - wy[0] <= eps {
                    continue;
                }
                let c = Point::new(0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1]));
                let inside = self
                    .rects
                    .iter()
                    .any(|m| c.x >= m.xl && c.x <= m.xh && c.y >= m.yl && c.y <= m.yh);
                if !inside {
                    return false;
                }
            }
        }
        true
    }

    pub fn bbox(&self) -> Rect {
        self.rects.iter().skip(1).fold(self.rects[0], |a, r| {
            Rect::new(a.xl.min(r.xl), a.yl.min(r.yl), a.xh.max(r.xh), a.yh.max(r.yh))
        })
    }
}

/// Keep `inst` at `pos` inside `region`, moving it as little as possible.
pub fn region_clamp(inst: &Instance, pos: Point, region: &Region) -> Result<Point> {
    region
        .clamp(pos, inst.width, inst.height)
        .ok_or_else(|| Error::InfeasibleRegion {
            instance: inst.name.clone(),
            region: region.id.clone(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ResourceType;
    use proptest::prelude::*;

    fn region(rects: &[[f64; 4]]) -> Region {
        Region {
            id: "r".into(),
            rects: rects.iter().map(|r| Rect::new(r[0], r[1], r[2], r[3])).collect(),
        }
    }

    fn unit(name: &str) -> Instance {
        Instance {
            name: name.into(),
            resource: ResourceType::Lut,
            demand: 1,
            width: 1.0,
            height: 1.0,
            fixed_at: None,
            region: Some(0),
            shape: None,
        }
    }

    #[test]
    fn clamp_examples() {
        let r = region(&[[0.0, 0.0, 10.0, 10.0]]);
        let i = unit("a");
        assert_eq!(region_clamp(&i, Point::new(-2.0, 5.0), &r).unwrap(), Point::new(0.0, 5.0));
        assert_eq!(region_clamp(&i, Point::new(3.0, 3.0), &r).unwrap(), Point::new(3.0, 3.0));
        assert_eq!(region_clamp(&i, Point::new(9.5, 9.8), &r).unwrap(), Point::new(9.0, 9.0));
    }

    #[test]
    fn clamp_too_large_names_instance_and_region() {
        let r = region(&[[0.0, 0.0, 2.0, 2.0]]);
        let mut i = unit("big");
        i.width = 3.0;
        let err = region_clamp(&i, Point::new(0.0, 0.0), &r).unwrap_err().to_string();
        assert!(err.contains("big") && err.contains("`r`"), "{err}");
    }

    #[test]
    fn union_clamp_picks_nearest_rect() {
        let r = region(&[[0.0, 0.0, 4.0, 4.0], [10.0, 0.0, 14.0, 4.0]]);
        assert_eq!(r.clamp(Point::new(9.0, 1.0), 1.0, 1.0), Some(Point::new(10.0, 1.0)));
        assert_eq!(r.clamp(Point::new(4.5, 1.0), 1.0, 1.0), Some(Point::new(3.0, 1.0)));
        // Equidistant: lower index wins.
        assert_eq!(r.clamp(Point::new(6.5, 1.0), 1.0, 1.0), Some(Point::new(3.0, 1.0)));
    }

    #[test]
    fn union_cover_across_adjacent_rects() {
        let r = region(&[[0.0, 0.0, 4.0, 5.0], [0.0, 5.0, 4.0, 10.0]]);
        assert!(r.covers(&Rect::new(1.0, 3.0, 2.0, 8.0), 0.0));
        assert!(!r.covers(&Rect::new(3.5, 3.0, 4.5, 8.0), 0.0));
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent_and_inside(
            px in -50.0f64..50.0, py in -50.0f64..50.0,
            xl in -10.0f64..10.0, yl in -10.0f64..10.0,
            bw in 1.0f64..20.0, bh in 1.0f64..20.0,
            w in 0.1f64..1.0, h in 0.1f64..1.0,
        ) {
            let r = region(&[[xl, yl, xl + bw, yl + bh]]);
            let q = r.clamp(Point::new(px, py), w, h).unwrap();
            prop_assert!(r.rects[0].contains_rect(&Rect::at(q, w, h), 1e-12));
            prop_assert_eq!(r.clamp(q, w, h).unwrap(), q);
        }
    }
}
