use std::fmt::Write;

const BANDS: [&str; 10] =
    ["#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#fee090", "#fdae61", "#f46d43", "#d73027", "#a50026"];

/// Minimal SVG canvas in world coordinates (y up).
pub struct Svg {
    lo: [f64; 2],
    hi: [f64; 2],
    scale: f64,
    body: String,
}

impl Svg {
    pub fn new(lo: [f64; 2], hi: [f64; 2], width: f64) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        Svg { lo, hi, scale: width / span, body: String::new() }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        ((p[0] - self.lo[0]) * self.scale, (self.hi[1] - p[1]) * self.scale)
    }

    fn points(&self, pts: &[[f64; 2]]) -> String {
        pts.iter().map(|&p| self.map(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], fill: &str) {
        let p = self.points(pts);
        let _ = writeln!(self.body, r#"<polygon points="{p}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#);
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str) {
        let p = self.points(pts);
        let _ = writeln!(self.body, r#"<polyline points="{p}" fill="none" stroke="{stroke}" stroke-width="1"/>"#);
    }

    /// Filled band colour of `v` within `[min, max]`.
    pub fn band(v: f64, min: f64, max: f64) -> &'static str {
        if max.is_nan() || min.is_nan() || max <= min {
            return BANDS[BANDS.len() / 2];
        }
        let k = (((v - min) / (max - min)) * BANDS.len() as f64).floor() as usize;
        BANDS[k.min(BANDS.len() - 1)]
    }

    pub fn finish(self) -> String {
        let w = (self.hi[0] - self.lo[0]) * self.scale;
        let h = (self.hi[1] - self.lo[1]) * self.scale;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n{}</svg>\n",
            self.body
        )
    }
}
