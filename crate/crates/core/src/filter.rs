//! Small separable filters on row-major `f64` grids.
//!
//! Borders replicate the edge pixel.

use crate::model::Frame;

/// Normalized 1-D Gaussian kernel with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Convolve a grid in place with a symmetric kernel along both axes.
pub fn convolve_separable(data: &mut [f64], height: usize, width: usize, kernel: &[f64]) {
    if kernel.len() <= 1 {
        return;
    }
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (j, &kv) in kernel.iter().enumerate() {
                let xx = (x as isize + j as isize - r).clamp(0, width as isize - 1) as usize;
                acc += kv * row[xx];
            }
            tmp[y * width + x] = acc;
        }
    }
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (j, &kv) in kernel.iter().enumerate() {
                let yy = (y as isize + j as isize - r).clamp(0, height as isize - 1) as usize;
                acc += kv * tmp[yy * width + x];
            }
            data[y * width + x] = acc;
        }
    }
}

pub fn gaussian_blur(frame: &Frame, sigma: f64) -> Frame {
    let mut out = frame.clone();
    let (h, w) = out.dims();
    convolve_separable(out.data_mut(), h, w, &gaussian_kernel(sigma));
    out
}

/// Blur with sigma 1 and keep every other pixel; odd edges round up.
pub fn downsample(frame: &Frame) -> Frame {
    let blurred = gaussian_blur(frame, 1.0);
    let (h, w) = frame.dims();
    let (nh, nw) = (h.div_ceil(2), w.div_ceil(2));
    Frame::from_fn(nh, nw, |x, y| blurred.get((2 * x).min(w - 1), (2 * y).min(h - 1)))
}

/// Central-difference gradient `(d/dx, d/dy)`, one-sided at the borders.
pub fn gradient(data: &[f64], height: usize, width: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; data.len()];
    let mut gy = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(width - 1));
            let (yu, yd) = (y.saturating_sub(1), (y + 1).min(height - 1));
            if xr > xl {
                gx[i] = (data[y * width + xr] - data[y * width + xl]) / (xr - xl) as f64;
            }
            if yd > yu {
                gy[i] = (data[yd * width + x] - data[yu * width + x]) / (yd - yu) as f64;
            }
        }
    }
    (gx, gy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(2.0);
        assert_eq!(k.len(), 13);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..k.len() / 2 {
            assert_eq!(k[i], k[k.len() - 1 - i]);
        }
    }

    #[test]
    fn blur_preserves_constants_and_ramps() {
        let f = Frame::from_fn(20, 20, |x, _| 3.0 + x as f64);
        let b = gaussian_blur(&f, 1.5);
        // interior of a linear ramp is unchanged by a symmetric kernel
        assert!((b.get(10, 10) - f.get(10, 10)).abs() < 1e-12);
        let c = gaussian_blur(&Frame::from_fn(9, 9, |_, _| 2.0), 3.0);
        assert!(c.data().iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn downsample_halves_with_round_up() {
        let f = Frame::zeros(17, 10);
        assert_eq!(downsample(&f).dims(), (9, 5));
    }

    #[test]
    fn gradient_of_ramp() {
        let f = Frame::from_fn(6, 7, |x, y| 2.0 * x as f64 - y as f64);
        let (gx, gy) = gradient(f.data(), 6, 7);
        assert!(gx.iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!(gy.iter().all(|v| (v + 1.0).abs() < 1e-12));
    }
}
