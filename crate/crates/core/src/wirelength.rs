//! Half-perimeter wirelength and the weighted-average smooth model.

use crate::error::{Error, Result};
use crate::model::{Design, Net, Point};

/// Smoothing for the weighted-average model, in grid units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlParams {
    pub gamma: f64,
}

impl WlParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(WlParams { gamma })
        } else {
            Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hpwl {
    pub total: f64,
    pub per_net: Vec<f64>,
}

fn pin_pos<'a>(net: &'a Net, positions: &'a [Point]) -> impl Iterator<Item = (usize, f64, f64)> + 'a {
    net.pins.iter().map(move |p| {
        let at = positions[p.inst];
        (p.inst, at.x + p.dx, at.y + p.dy)
    })
}

fn check_placed(design: &Design, positions: &[Point]) -> Result<()> {
    if positions.len() != design.instances.len() {
        return Err(Error::InvalidArgument(format!(
            "{} positions for {} instances",
            positions.len(),
            design.instances.len()
        )));
    }
    if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "instance `{}` is unplaced",
            design.instances[i].name
        )));
    }
    Ok(())
}

pub fn net_hpwl(net: &Net, positions: &[Point]) -> f64 {
    if net.pins.len() < 2 {
        return 0.0;
    }
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, x, y) in pin_pos(net, positions) {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    (xh - xl) + (yh - yl)
}

pub fn hpwl(design: &Design, positions: &[Point]) -> Result<Hpwl> {
    check_placed(design, positions)?;
    let per_net: Vec<f64> = design.nets.iter().map(|n| net_hpwl(n, positions)).collect();
    Ok(Hpwl {
        total: per_net.iter().sum(),
        per_net,
    })
}

/// WA value of one axis of one net; when `grad` is given, adds the partials
/// for each pin (in pin order) into it.
fn wa_axis(coords: &[f64], gamma: f64, mut grad: Option<&mut [f64]>) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for &c in coords {
        hi = hi.max(c);
        lo = lo.min(c);
    }
    // Work relative to the extremes so every exponent is <= 0.
    let (mut a_sum, mut a_x, mut b_sum, mut b_x) = (0.0, 0.0, 0.0, 0.0);
    for &c in coords {
        let a = ((c - hi) / gamma).exp();
        let b = ((lo - c) / gamma).exp();
        a_sum += a;
        a_x += (c - hi) * a;
        b_sum += b;
        b_x += (c - lo) * b;
    }
    let plus = a_x / a_sum;
    let minus = b_x / b_sum;
    if let Some(g) = grad.as_deref_mut() {
        for (k, &c) in coords.iter().enumerate() {
            let a = ((c - hi) / gamma).exp();
            let b = ((lo - c) / gamma).exp();
            g[k] += a / a_sum * (1.0 + ((c - hi) - plus) / gamma)
                - b / b_sum * (1.0 - ((c - lo) - minus) / gamma);
        }
    }
    (hi + plus) - (lo + minus)
}

/// WA wirelength of one net.
pub fn net_wa(net: &Net, positions: &[Point], params: WlParams) -> f64 {
    if net.pins.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = pin_pos(net, positions).map(|(_, x, _)| x).collect();
    let ys: Vec<f64> = pin_pos(net, positions).map(|(_, _, y)| y).collect();
    wa_axis(&xs, params.gamma, None) + wa_axis(&ys, params.gamma, None)
}

pub fn wa_wirelength(design: &Design, positions: &[Point], params: WlParams) -> Result<f64> {
    check_placed(design, positions)?;
    Ok(design.nets.iter().map(|n| net_wa(n, positions, params)).sum())
}

/// WA value and its gradient with respect to every instance position.
/// Fixed instances get zero gradient.
pub fn wa_value_and_gradient(design: &Design, positions: &[Point], params: WlParams) -> (f64, Vec<Point>) {
    let mut grad = vec![Point::default(); design.instances.len()];
    let mut total = 0.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut gx = Vec::new();
    let mut gy = Vec::new();
    for net in &design.nets {
        if net.pins.len() < 2 {
            continue;
        }
        xs.clear();
        ys.clear();
        for (_, x, y) in pin_pos(net, positions) {
            xs.push(x);
            ys.push(y);
        }
        gx.clear();
        gx.resize(xs.len(), 0.0);
        gy.clear();
        gy.resize(ys.len(), 0.0);
        total += wa_axis(&xs, params.gamma, Some(&mut gx)) + wa_axis(&ys, params.gamma, Some(&mut gy));
        for (k, p) in net.pins.iter().enumerate() {
            grad[p.inst].x += gx[k];
            grad[p.inst].y += gy[k];
        }
    }
    for (g, inst) in grad.iter_mut().zip(&design.instances) {
        if inst.is_fixed() {
            *g = Point::default();
        }
    }
    (total, grad)
}

pub fn wa_gradient(design: &Design, positions: &[Point], params: WlParams) -> Result<Vec<Point>> {
    check_placed(design, positions)?;
    Ok(wa_value_and_gradient(design, positions, params).1)
}
