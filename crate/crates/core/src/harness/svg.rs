//! Five-number summaries and box-plot rendering.

use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum, quartiles, median and maximum of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiveNumber {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Quartiles by linear interpolation between order statistics. `None` for
    /// an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            count: v.len(),
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Quantile of sorted data, interpolating between the two nearest ranks.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One box of a panel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxGroup {
    pub label: String,
    pub summary: FiveNumber,
}

/// One panel of boxes sharing a y axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxPanel {
    pub title: String,
    pub groups: Vec<BoxGroup>,
}

const PANEL_W: f64 = 280.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 48.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 44.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders side-by-side box plots on a shared `[y_min, y_max]` axis.
pub fn render_box_plot(title: &str, y_label: &str, panels: &[BoxPanel], y_range: (f64, f64)) -> Result<String> {
    if panels.is_empty() || panels.iter().any(|p| p.groups.is_empty()) {
        return Err(Error::InvalidParameter("box plot needs nonempty panels".into()));
    }
    let (y_min, y_max) = y_range;
    if y_max.partial_cmp(&y_min) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter("empty y range".into()));
    }
    let width = MARGIN_L + PANEL_W * panels.len() as f64 + 16.0;
    let height = MARGIN_T + PANEL_H + MARGIN_B;
    let y = |v: f64| MARGIN_T + PANEL_H * (1.0 - (v.clamp(y_min, y_max) - y_min) / (y_max - y_min));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ =
        writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<text transform="translate(12 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_T + PANEL_H / 2.0,
        esc(y_label)
    );
    for tick in 0..=4 {
        let v = y_min + (y_max - y_min) * tick as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, MARGIN_L - 4.0, y(v) + 4.0);
    }
    for (pi, panel) in panels.iter().enumerate() {
        let x0 = MARGIN_L + PANEL_W * pi as f64;
        let _ = writeln!(s, r#"<g class="panel">"#);
        let _ = writeln!(
            s,
            r##"<rect x="{x0}" y="{MARGIN_T}" width="{}" height="{PANEL_H}" fill="none" stroke="#444"/>"##,
            PANEL_W - 8.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + (PANEL_W - 8.0) / 2.0,
            MARGIN_T - 6.0,
            esc(&panel.title)
        );
        let slot = (PANEL_W - 8.0) / panel.groups.len() as f64;
        for (gi, g) in panel.groups.iter().enumerate() {
            let cx = x0 + slot * (gi as f64 + 0.5);
            let half = (slot * 0.3).min(24.0);
            let f = &g.summary;
            let _ = writeln!(
                s,
                r##"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="#222"/>"##,
                y(f.min),
                y(f.max)
            );
            let _ = writeln!(
                s,
                r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="#222"/>"##,
                cx - half,
                y(f.q3),
                2.0 * half,
                (y(f.q1) - y(f.q3)).max(0.5)
            );
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#d62728" stroke-width="2"/>"##,
                cx - half,
                y(f.median),
                cx + half,
                y(f.median)
            );
            let _ = writeln!(
                s,
                r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#,
                MARGIN_T + PANEL_H + 16.0,
                esc(&g.label)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use quick_xml::events::Event;
    use quick_xml::Reader;

    #[test]
    fn five_number_summary_of_known_samples() {
        let f = FiveNumber::from_values(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((f.min, f.q1, f.median, f.q3, f.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        let g = FiveNumber::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((g.q1, g.median, g.q3), (1.75, 2.5, 3.25));
        assert!(FiveNumber::from_values(&[]).is_none());
    }

    #[test]
    fn rendered_plot_is_well_formed_with_one_root_and_a_viewbox() {
        let f = FiveNumber::from_values(&[0.1, 0.4, 0.5, 0.9]).unwrap();
        let panels: Vec<BoxPanel> = [12, 14]
            .iter()
            .map(|n| BoxPanel {
                title: format!("n = {n}"),
                groups: ["m=n^2", "m=2n^2 & more"]
                    .iter()
                    .map(|l| BoxGroup { label: l.to_string(), summary: f })
                    .collect(),
            })
            .collect();
        let svg = render_box_plot("success <p>", "probability", &panels, (0.0, 1.0)).unwrap();
        let mut reader = Reader::from_str(&svg);
        let (mut depth, mut roots, mut saw_viewbox) = (0i32, 0, false);
        loop {
            match reader.read_event().expect("well-formed XML") {
                Event::Start(e) => {
                    if depth == 0 {
                        roots += 1;
                        assert_eq!(e.name().into_inner(), "svg");
                        saw_viewbox = e.try_get_attribute("viewBox").unwrap().is_some();
                    }
                    depth += 1;
                }
                Event::End(_) => depth -= 1,
                Event::Empty(_) => assert!(depth > 0),
                Event::Text(t) => assert!(depth > 0 || t.into_inner().trim().is_empty()),
                Event::Eof => break,
                _ => {}
            }
        }
        assert_eq!((depth, roots), (0, 1));
        assert!(saw_viewbox);
        assert_eq!(svg.matches("class=\"panel\"").count(), 2);
    }

    #[test]
    fn empty_panels_are_rejected() {
        assert!(render_box_plot("t", "y", &[], (0.0, 1.0)).is_err());
        let empty = BoxPanel { title: "x".into(), groups: vec![] };
        assert!(render_box_plot("t", "y", &[empty], (0.0, 1.0)).is_err());
    }
}
