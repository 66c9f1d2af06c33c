//! Hand-rolled, self-contained SVG box plots.
//!
//! One plot per latency figure, one box per group (stream or method).
//! Whiskers reach the most extreme non-outlier samples; values beyond the
//! 1.5 IQR fences are drawn as open circles, matching the summary
//! statistics' outlier definition.

use tsnsim::profiler::{summarize, StatSummary};
use tsnsim::time::TimeNs;

pub struct BoxSeries {
    pub label: String,
    pub values: Vec<TimeNs>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 56.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn us(t: TimeNs) -> f64 {
    t.as_ns() as f64 / 1_000.0
}

/// Round `max` up to a friendly axis bound.
fn nice_ceiling(max: f64) -> f64 {
    if max <= 0.0 {
        return 1.0;
    }
    let magnitude = 10f64.powf(max.log10().floor());
    for mult in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if magnitude * mult >= max {
            return magnitude * mult;
        }
    }
    magnitude * 10.0
}

fn fmt_axis(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.1}")
    }
}

/// Render one box plot. `title` names the latency figure; values are
/// plotted in microseconds.
pub fn box_plot(title: &str, series: &[BoxSeries]) -> String {
    let summaries: Vec<(String, StatSummary)> = series
        .iter()
        .filter(|s| !s.values.is_empty())
        .map(|s| (s.label.clone(), summarize(&s.values).expect("non-empty")))
        .collect();

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        esc(title)
    ));

    if summaries.is_empty() {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
             text-anchor=\"middle\">no samples</text>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let max_value = summaries
        .iter()
        .map(|(_, s)| us(s.max))
        .fold(0.0f64, f64::max);
    let y_max = nice_ceiling(max_value * 1.05);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - v / y_max);

    // Axes and horizontal grid.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.1}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n",
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    let ticks = 5;
    for i in 0..=ticks {
        let v = y_max * i as f64 / ticks as f64;
        let yy = y(v);
        svg.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" \
             stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            yy + 4.0,
            fmt_axis(v)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">latency [us]</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    let slot = plot_w / summaries.len() as f64;
    let box_w = (slot * 0.4).min(70.0);
    for (i, (label, s)) in summaries.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        // Whiskers span the most extreme non-outliers.
        let (mut wlo, mut whi) = (us(s.max), us(s.min));
        let non_outlier = |v: &TimeNs| !s.outliers.contains(v);
        if let Some(lo) = series
            .iter()
            .find(|b| &b.label == label)
            .and_then(|b| b.values.iter().filter(|v| non_outlier(v)).min())
        {
            wlo = us(*lo);
        }
        if let Some(hi) = series
            .iter()
            .find(|b| &b.label == label)
            .and_then(|b| b.values.iter().filter(|v| non_outlier(v)).max())
        {
            whi = us(*hi);
        }

        for (y1, y2) in [(wlo, us(s.q1)), (us(s.q3), whi)] {
            svg.push_str(&format!(
                "  <line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" \
                 stroke=\"black\" stroke-width=\"1\"/>\n",
                y(y1),
                y(y2)
            ));
        }
        for cap in [wlo, whi] {
            svg.push_str(&format!(
                "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
                 stroke=\"black\" stroke-width=\"1\"/>\n",
                cx - box_w / 4.0,
                y(cap),
                cx + box_w / 4.0,
                y(cap)
            ));
        }
        svg.push_str(&format!(
            "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{box_w:.1}\" height=\"{:.1}\" \
             fill=\"#9ecae1\" stroke=\"black\" stroke-width=\"1\"/>\n",
            cx - box_w / 2.0,
            y(us(s.q3)),
            (y(us(s.q1)) - y(us(s.q3))).max(0.5)
        ));
        svg.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"black\" stroke-width=\"2\"/>\n",
            cx - box_w / 2.0,
            y(us(s.median)),
            cx + box_w / 2.0,
            y(us(s.median))
        ));
        for o in &s.outliers {
            svg.push_str(&format!(
                "  <circle cx=\"{cx:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"none\" \
                 stroke=\"black\" stroke-width=\"0.8\"/>\n",
                y(us(*o))
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{cx:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{}</text>\n",
            MARGIN_TOP + plot_h + 20.0,
            esc(label)
        ));
        svg.push_str(&format!(
            "  <text x=\"{cx:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"middle\" fill=\"#555555\">n={}</text>\n",
            MARGIN_TOP + plot_h + 36.0,
            s.count
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_self_contained_svg() {
        let series = vec![
            BoxSeries {
                label: "stream 0".into(),
                values: (0..100).map(|i| TimeNs::from_us(400 + (i % 17))).collect(),
            },
            BoxSeries {
                label: "stream 1".into(),
                values: (0..100).map(|i| TimeNs::from_us(450 + (i % 29))).collect(),
            },
        ];
        let svg = box_plot("e2e_nic", &series);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.ends_with("</svg>\n"));
        assert!(
            !svg.contains("href"),
            "must not reference external resources"
        );
        assert_eq!(svg.matches("<rect").count(), 3); // background + two boxes
    }

    #[test]
    fn empty_series_render_placeholder() {
        let svg = box_plot("br1L", &[]);
        assert!(svg.contains("no samples"));
    }

    #[test]
    fn labels_are_escaped() {
        let series = vec![BoxSeries {
            label: "a<b&c".into(),
            values: vec![TimeNs::from_us(1)],
        }];
        let svg = box_plot("sendL", &series);
        assert!(svg.contains("a&lt;b&amp;c"));
    }
}
