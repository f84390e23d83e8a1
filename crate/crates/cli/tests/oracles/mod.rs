//! Reference implementations written independently of the library.
#![allow(dead_code)]

use restphase_core::model::{Frame, PixelPoint};
use restphase_core::registration::DeformationField;

pub fn smooth_disk(h: usize, w: usize, cx: f64, cy: f64, r: f64) -> Frame {
    Frame::from_fn(h, w, |x, y| {
        let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
        0.1 + 0.8 / (1.0 + ((d - r) / 1.5).exp())
    })
}

/// Middle element, or the mean of the two middle elements.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn sorted_percentile(values: &[f64], n: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = n / 100.0 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
}

fn zncc_at(fixed: &Frame, moving: &Frame, sx: isize, sy: isize) -> f64 {
    let (h, w) = fixed.dims();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mx, my) = (x + sx, y + sy);
            if mx >= 0 && my >= 0 && mx < w as isize && my < h as isize {
                a.push(fixed.get(x as usize, y as usize));
                b.push(moving.get(mx as usize, my as usize));
            }
        }
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Shift `s` maximizing the correlation of `fixed(x)` with `moving(x + s)`:
/// exhaustive integer search, then a 3-point parabola per axis.
pub fn shift_oracle(fixed: &Frame, moving: &Frame, max_shift: isize) -> (f64, f64) {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for sy in -max_shift..=max_shift {
        for sx in -max_shift..=max_shift {
            let s = zncc_at(fixed, moving, sx, sy);
            if s > best.2 {
                best = (sx, sy, s);
            }
        }
    }
    let (bx, by, s0) = best;
    let vertex = |m: f64, p: f64| {
        let denom = m - 2.0 * s0 + p;
        if denom.abs() < 1e-15 {
            0.0
        } else {
            0.5 * (m - p) / denom
        }
    };
    let ox = vertex(zncc_at(fixed, moving, bx - 1, by), zncc_at(fixed, moving, bx + 1, by));
    let oy = vertex(zncc_at(fixed, moving, bx, by - 1), zncc_at(fixed, moving, bx, by + 1));
    (bx as f64 + ox, by as f64 + oy)
}

/// Median of `exp(-|x - c|^2 / sigma^2) * |d(x)|` over all pixels, with `c`
/// the midpoint of the two track points.
pub fn weighted_median_direct(field: &DeformationField, p_t: PixelPoint, p_next: PixelPoint, sigma: f64) -> f64 {
    let cx = (p_t.x + p_next.x) / 2.0;
    let cy = (p_t.y + p_next.y) / 2.0;
    let mut v = Vec::new();
    for y in 0..field.height() {
        for x in 0..field.width() {
            let (dx, dy) = field.at(x, y);
            let (rx, ry) = (x as f64 - cx, y as f64 - cy);
            let g = (-(rx * rx + ry * ry) / (sigma * sigma)).exp();
            v.push(g * (dx * dx + dy * dy).sqrt());
        }
    }
    median(&mut v)
}
