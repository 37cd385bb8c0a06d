//! Minimal SVG histogram rendering for `--render-plots`.
//!
//! Data files are the primary interface; these charts exist for quick visual
//! inspection without external tooling. The SVG is assembled from fixed
//! format strings, so identical inputs produce identical bytes.

use crate::output::histogram;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Renders `values` as a bar histogram with `n_bins` equal-width bins.
pub fn histogram_svg(title: &str, x_label: &str, values: &[f64], n_bins: usize) -> String {
    let bins = histogram(values, n_bins);
    let max_count = bins.iter().map(|b| b.2).max().unwrap_or(1).max(1);
    let x_min = bins.first().map(|b| b.0).unwrap_or(0.0);
    let x_max = bins.last().map(|b| b.1).unwrap_or(1.0);
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    for (lo, hi, count) in &bins {
        let x = MARGIN_LEFT + (lo - x_min) / x_span * plot_w;
        let w = ((hi - lo) / x_span * plot_w).max(1.0);
        let h = *count as f64 / max_count as f64 * plot_h;
        let y = MARGIN_TOP + (plot_h - h);
        svg.push_str(&format!(
            "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"#4878a8\" stroke=\"white\" stroke-width=\"0.5\"/>\n"
        ));
    }

    // Axes with end-point labels; counts on the left, values along the
    // bottom.
    let axis_y = MARGIN_TOP + plot_h;
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{axis_y}\" x2=\"{:.1}\" y2=\"{axis_y}\" \
         stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" \
         y2=\"{axis_y}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{MARGIN_LEFT}\" y=\"{:.1}\" text-anchor=\"middle\">{x_min:.4}</text>\n",
        axis_y + 18.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_max:.4}</text>\n",
        MARGIN_LEFT + plot_w,
        axis_y + 18.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{max_count}</text>\n",
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 4.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">0</text>\n",
        MARGIN_LEFT - 6.0,
        axis_y + 4.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        axis_y + 40.0,
        escape(x_label)
    ));
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
