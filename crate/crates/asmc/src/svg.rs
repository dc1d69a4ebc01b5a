//! Minimal standalone SVG plotting: axes, ticks, polylines, scatter marks,
//! dashed reference lines and a legend. Output is deterministic for
//! identical inputs (fixed float formatting, stable element order).

use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 86.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

pub(crate) const PALETTE: [&str; 6] = [
    "#1f6fb4", "#d1622b", "#3d8f4e", "#b03a5b", "#7665b4", "#6b6b6b",
];

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

pub(crate) struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    log_x: bool,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
    legend: Vec<(String, String, bool)>, // (label, color, dashed)
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            body: String::new(),
            legend: Vec::new(),
        }
    }

    pub fn with_log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    /// Fix axis ranges; callers pad their data ranges before this.
    pub fn set_ranges(&mut self, x: (f64, f64), y: (f64, f64)) {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        self.x_range = widen(x);
        self.y_range = widen(y);
    }

    fn map_x(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let (x, lo, hi) = if self.log_x {
            (x.max(1e-300).log10(), lo.max(1e-300).log10(), hi.log10())
        } else {
            (x, lo, hi)
        };
        MARGIN_LEFT + (x - lo) / (hi - lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn map_y(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN_BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, dashed: bool, label: Option<&str>) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{} {} ", fmt(self.map_x(x)), fmt(self.map_y(y)));
        }
        let dash = if dashed { " stroke-dasharray=\"7 4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash}/>",
            d.trim_end()
        );
        if let Some(label) = label {
            self.legend.push((label.to_string(), color.to_string(), dashed));
        }
    }

    pub fn scatter(&mut self, points: &[(f64, f64)], color: &str, label: Option<&str>) {
        for &(x, y) in points {
            let _ = writeln!(
                self.body,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3.2\" fill=\"{color}\"/>",
                fmt(self.map_x(x)),
                fmt(self.map_y(y))
            );
        }
        if let Some(label) = label {
            self.legend.push((label.to_string(), color.to_string(), false));
        }
    }

    pub fn hline(&mut self, y: f64, color: &str, label: Option<&str>) {
        if y < self.y_range.0 || y > self.y_range.1 {
            return;
        }
        let py = fmt(self.map_y(y));
        let _ = writeln!(
            self.body,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"{color}\" stroke-width=\"1.2\" stroke-dasharray=\"5 5\"/>",
            fmt(MARGIN_LEFT),
            fmt(WIDTH - MARGIN_RIGHT)
        );
        if let Some(label) = label {
            self.legend.push((label.to_string(), color.to_string(), true));
        }
    }

    pub fn vline(&mut self, x: f64, color: &str, label: Option<&str>) {
        if x < self.x_range.0 || x > self.x_range.1 {
            return;
        }
        let px = fmt(self.map_x(x));
        let _ = writeln!(
            self.body,
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.2\" stroke-dasharray=\"5 5\"/>",
            fmt(MARGIN_TOP),
            fmt(HEIGHT - MARGIN_BOTTOM)
        );
        if let Some(label) = label {
            self.legend.push((label.to_string(), color.to_string(), true));
        }
    }

    fn ticks(&self, axis_x: bool) -> Vec<f64> {
        let (lo, hi) = if axis_x { self.x_range } else { self.y_range };
        if axis_x && self.log_x {
            let lo_d = lo.max(1e-300).log10().floor() as i32;
            let hi_d = hi.log10().ceil() as i32;
            return (lo_d..=hi_d)
                .map(|d| 10.0_f64.powi(d))
                .filter(|&v| v >= lo * 0.999 && v <= hi * 1.001)
                .collect();
        }
        nice_ticks(lo, hi, 6)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"28\" font-family=\"sans-serif\" font-size=\"17\" text-anchor=\"middle\">{}</text>",
            fmt(WIDTH / 2.0),
            escape(&self.title)
        );

        // Axes box.
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>",
            fmt(MARGIN_LEFT),
            fmt(MARGIN_TOP),
            fmt(WIDTH - MARGIN_LEFT - MARGIN_RIGHT),
            fmt(HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
        );

        for tx in self.ticks(true) {
            let px = fmt(self.map_x(tx));
            let _ = writeln!(
                out,
                "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"#333\"/>",
                fmt(HEIGHT - MARGIN_BOTTOM),
                fmt(HEIGHT - MARGIN_BOTTOM + 5.0)
            );
            let _ = writeln!(
                out,
                "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
                fmt(HEIGHT - MARGIN_BOTTOM + 19.0),
                tick_label(tx)
            );
        }
        for ty in self.ticks(false) {
            let py = fmt(self.map_y(ty));
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#333\"/>",
                fmt(MARGIN_LEFT - 5.0),
                fmt(MARGIN_LEFT)
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{py}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
                fmt(MARGIN_LEFT - 9.0),
                tick_label(ty)
            );
        }

        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
            fmt((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
            fmt(HEIGHT - 18.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>",
            fmt(HEIGHT / 2.0),
            fmt(HEIGHT / 2.0),
            escape(&self.y_label)
        );

        out.push_str(&self.body);

        for (i, (label, color, dashed)) in self.legend.iter().enumerate() {
            let y = MARGIN_TOP + 16.0 + 18.0 * i as f64;
            let x = WIDTH - MARGIN_RIGHT - 190.0;
            let dash = if *dashed { " stroke-dasharray=\"5 4\"" } else { "" };
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
                fmt(x),
                fmt(y - 4.0),
                fmt(x + 26.0),
                fmt(y - 4.0)
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
                fmt(x + 32.0),
                fmt(y),
                escape(label)
            );
        }

        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else if a >= 1.0 {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3}")
    }
}

/// Round tick positions at a 1/2/5 step covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10.0_f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * mag;
    let start = (lo / step).ceil();
    let mut ticks = Vec::new();
    let mut k = start;
    while k * step <= hi + step * 1e-9 {
        ticks.push(k * step);
        k += 1.0;
    }
    ticks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_well_formed_and_deterministic() {
        let mut p = Plot::new("demo", "t [s]", "value");
        p.set_ranges((0.0, 1.0), (0.0, 2.0));
        p.polyline(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)], PALETTE[0], false, Some("trace"));
        p.hline(1.5, PALETTE[5], Some("limit"));
        p.vline(0.25, PALETTE[5], None);
        p.scatter(&[(0.7, 0.7)], PALETTE[1], None);
        let a = p.render();
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("<path"));
        assert!(a.contains("circle"));
        assert!(a.contains("limit"));
        let b = p.render();
        assert_eq!(a, b);
    }

    #[test]
    fn nice_ticks_cover_the_range() {
        let t = nice_ticks(0.0, 1.0, 6);
        assert!(t.contains(&0.0) && t.contains(&1.0));
        let t = nice_ticks(-0.3, 0.7, 6);
        assert!(t.iter().all(|&v| (-0.3..=0.7001).contains(&v)));
    }

    #[test]
    fn log_ticks_are_decades() {
        let mut p = Plot::new("d", "x", "y").with_log_x();
        p.set_ranges((10.0, 1e5), (0.0, 1.0));
        let t = p.ticks(true);
        assert_eq!(t, vec![10.0, 100.0, 1000.0, 1e4, 1e5]);
    }
}
