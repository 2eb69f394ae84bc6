//! File emission: fixed-precision float formatting, atomic writes, and the
//! SVG drawing helpers shared by the grid and portrait commands.

use poncelet_core::Point2;
use std::io;
use std::path::Path;

/// 17 significant digits, '.' decimal separator — enough to round-trip f64
/// and byte-stable across runs.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Fixed stroke palette, indexed by set index.
pub const PALETTE: [&str; 10] = [
    "#1b6ca8", "#c1403d", "#2e8b57", "#8c5bb0", "#d97b29", "#3aa6a6", "#a8326e", "#6b7d2a",
    "#4455cc", "#777777",
];

pub struct SvgCanvas {
    body: String,
    min_x: f64,
    min_y: f64,
    width: f64,
    height: f64,
}

impl SvgCanvas {
    /// View box fitting the rectangle [-hx, hx] × [-hy, hy] with a 5% margin.
    pub fn centered(hx: f64, hy: f64) -> Self {
        let mx = 1.05 * hx;
        let my = 1.05 * hy;
        Self {
            body: String::new(),
            min_x: -mx,
            min_y: -my,
            width: 2.0 * mx,
            height: 2.0 * my,
        }
    }

    fn cy(&self, y: f64) -> f64 {
        // SVG y grows downward
        -y
    }

    pub fn ellipse(&mut self, rx: f64, ry: f64, stroke: &str, stroke_width: f64) {
        self.body.push_str(&format!(
            "  <ellipse cx=\"0\" cy=\"0\" rx=\"{rx:.6}\" ry=\"{ry:.6}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{stroke_width:.4}\"/>\n"
        ));
    }

    pub fn segment(&mut self, a: Point2, b: Point2, stroke: &str, stroke_width: f64) {
        self.body.push_str(&format!(
            "  <line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"{stroke}\" stroke-width=\"{stroke_width:.4}\"/>\n",
            a.x1,
            self.cy(a.x2),
            b.x1,
            self.cy(b.x2)
        ));
    }

    pub fn circle(&mut self, c: Point2, r: f64, fill: &str) {
        self.body.push_str(&format!(
            "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{r:.5}\" fill=\"{fill}\"/>\n",
            c.x1,
            self.cy(c.x2)
        ));
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, stroke_width: f64) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.6},{:.6}", x, self.cy(*y)))
            .collect();
        self.body.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{stroke_width:.4}\"/>\n",
            coords.join(" ")
        ));
    }

    /// Clip an infinite line (by normal angle and offset) to the view box
    /// and draw the visible segment.
    pub fn line_clipped(&mut self, phi: f64, p: f64, stroke: &str, stroke_width: f64) {
        let (nx, ny) = (phi.cos(), phi.sin());
        let (dx, dy) = (-phi.sin(), phi.cos());
        let (ox, oy) = (p * nx, p * ny);
        // Liang-Barsky on the parameter t of (ox, oy) + t (dx, dy)
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        // x bounds
        if dx.abs() < 1e-15 {
            if ox < self.min_x || ox > self.min_x + self.width {
                return;
            }
        } else {
            let (mut a, mut b) = ((self.min_x - ox) / dx, (self.min_x + self.width - ox) / dx);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
        // y bounds (in math coordinates: [-(min_y+height), -min_y] after flip)
        let y_lo = self.min_y;
        let y_hi = self.min_y + self.height;
        if dy.abs() < 1e-15 {
            if oy < y_lo || oy > y_hi {
                return;
            }
        } else {
            let (mut a, mut b) = ((y_lo - oy) / dy, (y_hi - oy) / dy);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
        if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
            return;
        }
        self.segment(
            Point2::new(ox + t0 * dx, oy + t0 * dy),
            Point2::new(ox + t1 * dx, oy + t1 * dy),
            stroke,
            stroke_width,
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n{}</svg>\n",
            self.min_x, self.min_y, self.width, self.height, self.body
        )
    }
}
