//! Static plots: modulus heatmaps and W landscapes as PNG, phase quivers as SVG.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use image::{Rgb, RgbImage};

use crate::field::TangentField;
use crate::renorm::LandscapePoint;

const STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

/// Viridis-like colour for `t ∈ [0, 1]`.
pub fn colormap(t: f64) -> Rgb<u8> {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    for w in STOPS.windows(2) {
        let ((a, ca), (b, cb)) = (w[0], w[1]);
        if t <= b {
            let s = (t - a) / (b - a);
            let mix = |i: usize| (ca[i] as f64 + s * (cb[i] as f64 - ca[i] as f64)).round() as u8;
            return Rgb([mix(0), mix(1), mix(2)]);
        }
    }
    Rgb(STOPS[4].1)
}

/// Nearest grid node to the planar point `(r, θ)`, `θ ∈ [0, α)`.
fn nearest(field: &TangentField, r: f64, theta: f64) -> (usize, usize) {
    let g = field.grid();
    let i = match g.ring_below(r) {
        Some(i) if i + 1 < g.n_r() && g.radius(i + 1) - r < r - g.radius(i) => i + 1,
        Some(i) => i,
        None => 0,
    };
    let k = (theta / g.dtheta()).round() as usize % g.n_theta();
    (i, k)
}

/// `|û|` on the unrolled sector, drawn in `[−1, 1]²`; white outside.
pub fn modulus_png(field: &TangentField, size: u32) -> RgbImage {
    let g = field.grid();
    let alpha = g.alpha();
    let mut img = RgbImage::from_pixel(size, size, Rgb([255, 255, 255]));
    for (px, py, pixel) in img.enumerate_pixels_mut() {
        let x = 2.0 * (px as f64 + 0.5) / size as f64 - 1.0;
        let y = 1.0 - 2.0 * (py as f64 + 0.5) / size as f64;
        let r = x.hypot(y);
        let th = y.atan2(x).rem_euclid(TAU);
        if r > g.r_max() || th >= alpha {
            continue;
        }
        let (i, k) = nearest(field, r, th);
        *pixel = colormap(field.get(i, k).norm());
    }
    img
}

/// Arrows along `û/|û|` scaled by `|û|` on roughly `rows` rings.
pub fn phase_quiver_svg(field: &TangentField, rows: usize) -> String {
    let g = field.grid();
    let alpha = g.alpha();
    let len = 0.6 / rows as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.05 -1.05 2.1 2.1" width="600" height="600">"#
    );
    let (ex, ey) = (alpha.cos(), -alpha.sin());
    let large = if alpha > std::f64::consts::PI { 1 } else { 0 };
    let _ = writeln!(
        s,
        r#"<path d="M0 0 L1 0 A1 1 0 {large} 0 {ex:.5} {ey:.5} Z" fill="none" stroke="gray" stroke-width="0.004"/>"#
    );
    for j in 1..=rows {
        let r = j as f64 / rows as f64 * g.r_max() * 0.97;
        let count = ((alpha * r) / (1.0 / rows as f64)).ceil().max(1.0) as usize;
        for m in 0..count {
            let th = alpha * (m as f64 + 0.5) / count as f64;
            let (i, k) = nearest(field, r, th);
            let v = field.get(i, k);
            let (x0, y0) = (r * th.cos(), -r * th.sin());
            let d = v * len;
            let _ = writeln!(
                s,
                r#"<line x1="{:.5}" y1="{:.5}" x2="{:.5}" y2="{:.5}" stroke="black" stroke-width="0.004"/>"#,
                x0 - 0.5 * d.re,
                y0 + 0.5 * d.im,
                x0 + 0.5 * d.re,
                y0 - 0.5 * d.im
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of a W landscape sampled on an `n × n` grid of `[−1, 1]²`.
/// Values above the 90th percentile saturate.
pub fn landscape_png(points: &[LandscapePoint], n: usize, scale: u32) -> RgbImage {
    let size = n as u32 * scale;
    let mut img = RgbImage::from_pixel(size, size, Rgb([255, 255, 255]));
    let mut ws: Vec<f64> = points.iter().map(|p| p.w).filter(|w| w.is_finite()).collect();
    if ws.is_empty() {
        return img;
    }
    ws.sort_by(f64::total_cmp);
    let lo = ws[0];
    let hi = ws[(ws.len() - 1) * 9 / 10].max(lo + 1e-12);
    for p in points {
        let ix = (((p.x + 1.0) / 2.0 * n as f64).floor() as i64).clamp(0, n as i64 - 1) as u32;
        let iy = (((1.0 - p.y) / 2.0 * n as f64).floor() as i64).clamp(0, n as i64 - 1) as u32;
        let c = colormap((p.w - lo) / (hi - lo));
        for dx in 0..scale {
            for dy in 0..scale {
                img.put_pixel(ix * scale + dx, iy * scale + dy, c);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SectorGrid;
    use crate::geometry::ConeParams;
    use num_complex::Complex64;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), Rgb([68, 1, 84]));
        assert_eq!(colormap(1.0), Rgb([253, 231, 37]));
        assert_eq!(colormap(f64::NAN), Rgb([68, 1, 84]));
    }

    #[test]
    fn heatmap_leaves_the_outside_white() {
        let cone = ConeParams::new(std::f64::consts::FRAC_PI_2).unwrap();
        let grid = SectorGrid::new(cone, 16, 32, 0.01).unwrap();
        let f = TangentField::from_fn(grid, |r, _| Complex64::new(r, 0.0));
        let img = modulus_png(&f, 64);
        assert_eq!(*img.get_pixel(5, 60), Rgb([255, 255, 255]));
        assert_ne!(*img.get_pixel(50, 20), Rgb([255, 255, 255]));
        let svg = phase_quiver_svg(&f, 8);
        assert!(svg.starts_with("<svg") && svg.contains("<line"));
    }
}
