//! Defocus rendering: global translation, disc-PSF blur, log.
//!
//! The disc kernel is anti-aliased: a tap at distance `d` from the center has
//! weight `clamp(r + 0.5 - d, 0, 1)`, so the kernel varies continuously with
//! `r` and collapses to the identity for `r <= 0.5`. Each kernel row is split
//! into one run of unit weights, summed with row prefix sums, plus the
//! fractional taps on the rim.

use crate::grid::Grid;

/// Radius below which the kernel is the identity.
pub const IDENTITY_RADIUS: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct DiscKernel {
    radius: f64,
    reach: usize,
    /// `(dy, a)`: unit weights for `dx` in `-a..=a`.
    runs: Vec<(isize, isize)>,
    /// `(dy, dx, weight)` with `0 < weight < 1`.
    rim: Vec<(isize, isize, f32)>,
    norm: f32,
}

impl DiscKernel {
    pub fn new(radius: f64) -> Self {
        let radius = radius.max(0.0);
        let reach = (radius + 0.5).ceil() as isize;
        let mut runs = Vec::new();
        let mut rim = Vec::new();
        let mut total = 0.0f64;
        for dy in -reach..=reach {
            let mut a: isize = -1;
            for dx in -reach..=reach {
                let d = ((dx * dx + dy * dy) as f64).sqrt();
                let w = (radius + 0.5 - d).clamp(0.0, 1.0);
                if w <= 0.0 {
                    continue;
                }
                total += w;
                if w >= 1.0 {
                    a = a.max(dx.abs());
                } else {
                    rim.push((dy, dx, w as f32));
                }
            }
            if a >= 0 {
                runs.push((dy, a));
            }
        }
        DiscKernel {
            radius,
            reach: reach as usize,
            runs,
            rim,
            norm: (1.0 / total) as f32,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_identity(&self) -> bool {
        self.radius <= IDENTITY_RADIUS
    }

    /// Dense weights for inspection, `(2 * reach + 1)^2` row-major, normalized.
    pub fn dense(&self) -> Grid {
        let size = 2 * self.reach + 1;
        let r = self.reach as isize;
        let mut g = Grid::filled(size, size, 0.0);
        let data = g.data_mut();
        for &(dy, a) in &self.runs {
            for dx in -a..=a {
                data[((dy + r) as usize) * size + (dx + r) as usize] = self.norm as f64;
            }
        }
        for &(dy, dx, w) in &self.rim {
            data[((dy + r) as usize) * size + (dx + r) as usize] = (w * self.norm) as f64;
        }
        g
    }
}

/// Reusable buffers for rendering one scene at many instants.
#[derive(Debug, Clone)]
pub struct Renderer {
    width: usize,
    height: usize,
    texture: Vec<f32>,
    shifted: Vec<f32>,
    padded: Vec<f32>,
    prefix: Vec<f32>,
    blurred: Vec<f32>,
}

impl Renderer {
    pub fn new(texture: &Grid) -> Self {
        let n = texture.width() * texture.height();
        Renderer {
            width: texture.width(),
            height: texture.height(),
            texture: texture.data().iter().map(|&v| v as f32).collect(),
            shifted: vec![0.0; n],
            padded: Vec::new(),
            prefix: Vec::new(),
            blurred: vec![0.0; n],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Log intensity of the texture translated by `shift` pixels and blurred
    /// with a disc of `radius` pixels, written into `out`.
    pub fn render_log(&mut self, shift: (f64, f64), radius: f64, out: &mut [f32]) {
        assert_eq!(out.len(), self.width * self.height);
        let moving = shift.0 != 0.0 || shift.1 != 0.0;
        if moving {
            translate(&self.texture, self.width, self.height, shift, &mut self.shifted);
        }
        let kernel = DiscKernel::new(radius);
        let source: &[f32] = if moving { &self.shifted } else { &self.texture };
        if kernel.is_identity() {
            for (o, &v) in out.iter_mut().zip(source) {
                *o = v.ln();
            }
            return;
        }
        blur(
            source,
            self.width,
            self.height,
            &kernel,
            &mut self.padded,
            &mut self.prefix,
            &mut self.blurred,
        );
        for (o, &v) in out.iter_mut().zip(&self.blurred) {
            *o = v.ln();
        }
    }
}

/// Samples `src` at `(x - sx, y - sy)` bilinearly with replicate boundary.
fn translate(src: &[f32], w: usize, h: usize, shift: (f64, f64), out: &mut [f32]) {
    let (fx, fy) = (-shift.0, -shift.1);
    let (ix, iy) = (fx.floor(), fy.floor());
    let (tx, ty) = ((fx - ix) as f32, (fy - iy) as f32);
    let (ix, iy) = (ix as isize, iy as isize);
    let clamp_x = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let clamp_y = |y: isize| y.clamp(0, h as isize - 1) as usize;
    for y in 0..h {
        let y0 = clamp_y(y as isize + iy);
        let y1 = clamp_y(y as isize + iy + 1);
        let (r0, r1) = (&src[y0 * w..(y0 + 1) * w], &src[y1 * w..(y1 + 1) * w]);
        let row = &mut out[y * w..(y + 1) * w];
        for (x, o) in row.iter_mut().enumerate() {
            let x0 = clamp_x(x as isize + ix);
            let x1 = clamp_x(x as isize + ix + 1);
            let top = r0[x0] + (r0[x1] - r0[x0]) * tx;
            let bottom = r1[x0] + (r1[x1] - r1[x0]) * tx;
            *o = top + (bottom - top) * ty;
        }
    }
}

fn blur(
    src: &[f32],
    w: usize,
    h: usize,
    kernel: &DiscKernel,
    padded: &mut Vec<f32>,
    prefix: &mut Vec<f32>,
    out: &mut [f32],
) {
    let pad = kernel.reach;
    let pw = w + 2 * pad;
    let ph = h + 2 * pad;
    padded.resize(pw * ph, 0.0);
    for py in 0..ph {
        let sy = (py as isize - pad as isize).clamp(0, h as isize - 1) as usize;
        let src_row = &src[sy * w..(sy + 1) * w];
        let row = &mut padded[py * pw..(py + 1) * pw];
        row[..pad].fill(src_row[0]);
        row[pad..pad + w].copy_from_slice(src_row);
        row[pad + w..].fill(src_row[w - 1]);
    }
    // prefix[py][i] = sum of padded[py][..i]
    let sw = pw + 1;
    prefix.resize(sw * ph, 0.0);
    for py in 0..ph {
        let row = &padded[py * pw..(py + 1) * pw];
        let acc_row = &mut prefix[py * sw..(py + 1) * sw];
        let mut acc = 0.0f32;
        acc_row[0] = 0.0;
        for (i, &v) in row.iter().enumerate() {
            acc += v;
            acc_row[i + 1] = acc;
        }
    }
    out.fill(0.0);
    for y in 0..h {
        let o = &mut out[y * w..(y + 1) * w];
        for &(dy, a) in &kernel.runs {
            let py = (y as isize + pad as isize + dy) as usize;
            let base = py * sw;
            let hi = &prefix[base + (pad as isize + a + 1) as usize..][..w];
            let lo = &prefix[base + (pad as isize - a) as usize..][..w];
            for ((o, &h), &l) in o.iter_mut().zip(hi).zip(lo) {
                *o += h - l;
            }
        }
        for &(dy, dx, wt) in &kernel.rim {
            let py = (y as isize + pad as isize + dy) as usize;
            let s = &padded[py * pw + (pad as isize + dx) as usize..][..w];
            for (o, &v) in o.iter_mut().zip(s) {
                *o += wt * v;
            }
        }
        for v in o.iter_mut() {
            *v *= kernel.norm;
        }
    }
}
