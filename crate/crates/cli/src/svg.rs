//! Static line chart of a sweep: the bound, the simulated mean and its
//! 95% band against H.

use crate::format::SweepRow;
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Axis {
        let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

pub fn render(rows: &[SweepRow], title: &str) -> String {
    let x = Axis::fit(rows.iter().map(|r| r.h));
    let band = |r: &SweepRow, s: f64| match (r.mc_mean, r.mc_stderr) {
        (Some(m), Some(e)) => Some(m + s * 1.96 * e),
        _ => None,
    };
    let y = Axis::fit(
        rows.iter()
            .flat_map(|r| [r.bound, band(r, -1.0), band(r, 1.0)])
            .flatten(),
    );
    let px = |h: f64| LEFT + x.frac(h) * (WIDTH - LEFT - RIGHT);
    let py = |v: f64| HEIGHT - BOTTOM - y.frac(v) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));

    // Shaded band first so the curves sit on top.
    let sim: Vec<&SweepRow> = rows.iter().filter(|r| r.mc_mean.is_some() && r.mc_stderr.is_some()).collect();
    if !sim.is_empty() {
        let upper = sim.iter().map(|r| format!("{:.2},{:.2}", px(r.h), py(band(r, 1.0).unwrap())));
        let lower = sim.iter().rev().map(|r| format!("{:.2},{:.2}", px(r.h), py(band(r, -1.0).unwrap())));
        let pts: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##, pts.join(" "));
        let mean: Vec<String> = sim.iter().map(|r| format!("{:.2},{:.2}", px(r.h), py(r.mc_mean.unwrap()))).collect();
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#3182bd" stroke-width="2"/>"##, mean.join(" "));
    }
    let bound: Vec<String> = rows.iter().filter_map(|r| r.bound.map(|b| format!("{:.2},{:.2}", px(r.h), py(b)))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#de2d26" stroke-width="2"/>"##, bound.join(" "));

    // Axes with five ticks each.
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let hv = x.lo + f * (x.hi - x.lo);
        let xv = px(hv);
        let _ = writeln!(s, r#"<line x1="{xv:.2}" y1="{y0}" x2="{xv:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{xv:.2}" y="{:.2}" text-anchor="middle" font-size="12">{hv:.3}</text>"#, y0 + 20.0);
        let vv = y.lo + f * (y.hi - y.lo);
        let yv = py(vv);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{yv:.2}" x2="{x0}" y2="{yv:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{vv:.3}</text>"#, x0 - 8.0, yv + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">H</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {:.1})">value</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let lx = x1 - 200.0;
    let _ = writeln!(s, r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#de2d26" stroke-width="2"/>"##, TOP + 10.0, lx + 25.0, TOP + 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">lower bound</text>"#, lx + 32.0, TOP + 14.0);
    let _ = writeln!(s, r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#3182bd" stroke-width="2"/>"##, TOP + 28.0, lx + 25.0, TOP + 28.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">Monte Carlo ± 1.96 stderr</text>"#, lx + 32.0, TOP + 32.0);
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
