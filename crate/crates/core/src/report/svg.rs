//! Self-contained SVG charts, no external assets or scripts.

use super::fmt_f64;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 90.0;

const COLOR_BAR: &str = "#3d7cb8";
const COLOR_POINT: &str = "#3d7cb8";
const COLOR_AXIS: &str = "#333333";
const COLOR_GRID: &str = "#dddddd";
const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\"";

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Short deterministic tick label: round to three decimals, then shortest
/// round-trip form.
fn fmt_tick(value: f64) -> String {
    fmt_f64((value * 1000.0).round() / 1000.0)
}

fn header(width: f64, height: f64, title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"28\" text-anchor=\"middle\" {font} ",
            "font-size=\"17\" fill=\"{axis}\">{title}</text>\n"
        ),
        w = fmt_f64(width),
        h = fmt_f64(height),
        cx = fmt_f64(width / 2.0),
        font = FONT,
        axis = COLOR_AXIS,
        title = escape_xml(title),
    )
}

fn axis_labels(width: f64, height: f64, x_label: &str, y_label: &str) -> String {
    format!(
        concat!(
            "<text x=\"{cx}\" y=\"{by}\" text-anchor=\"middle\" {font} font-size=\"13\" ",
            "fill=\"{axis}\">{x_label}</text>\n",
            "<text x=\"18\" y=\"{cy}\" text-anchor=\"middle\" {font} font-size=\"13\" ",
            "fill=\"{axis}\" transform=\"rotate(-90 18 {cy})\">{y_label}</text>\n"
        ),
        cx = fmt_f64(MARGIN_LEFT + (width - MARGIN_LEFT - MARGIN_RIGHT) / 2.0),
        by = fmt_f64(height - 14.0),
        cy = fmt_f64(MARGIN_TOP + (height - MARGIN_TOP - MARGIN_BOTTOM) / 2.0),
        font = FONT,
        axis = COLOR_AXIS,
        x_label = escape_xml(x_label),
        y_label = escape_xml(y_label),
    )
}

/// Vertical bar chart with one labelled bar per entry.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let width = WIDTH.max(MARGIN_LEFT + MARGIN_RIGHT + 22.0 * bars.len() as f64);
    let plot_w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_max = bars
        .iter()
        .map(|(_, v)| *v)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut svg = header(width, HEIGHT, title);

    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let y = MARGIN_TOP + plot_h - frac * plot_h;
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{grid}\"/>\n",
            x1 = fmt_f64(MARGIN_LEFT),
            x2 = fmt_f64(MARGIN_LEFT + plot_w),
            y = fmt_f64(y),
            grid = COLOR_GRID,
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" {font} font-size=\"11\" \
             fill=\"{axis}\">{label}</text>\n",
            x = fmt_f64(MARGIN_LEFT - 8.0),
            y = fmt_f64(y + 4.0),
            font = FONT,
            axis = COLOR_AXIS,
            label = fmt_tick(frac * y_max),
        ));
    }

    let slot = plot_w / bars.len().max(1) as f64;
    let bar_w = (slot * 0.7).min(40.0);
    for (i, (label, value)) in bars.iter().enumerate() {
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let h = (value / y_max) * plot_h;
        let y = MARGIN_TOP + plot_h - h;
        svg.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{color}\">\
             <title>{label}: {value}</title></rect>\n",
            x = fmt_f64(x),
            y = fmt_f64(y),
            w = fmt_f64(bar_w),
            h = fmt_f64(h),
            color = COLOR_BAR,
            label = escape_xml(label),
            value = fmt_f64(*value),
        ));
        let lx = x + bar_w / 2.0;
        let ly = MARGIN_TOP + plot_h + 12.0;
        svg.push_str(&format!(
            "<text x=\"{lx}\" y=\"{ly}\" text-anchor=\"end\" {font} font-size=\"10\" \
             fill=\"{axis}\" transform=\"rotate(-55 {lx} {ly})\">{label}</text>\n",
            lx = fmt_f64(lx),
            ly = fmt_f64(ly),
            font = FONT,
            axis = COLOR_AXIS,
            label = escape_xml(label),
        ));
    }

    svg.push_str(&format!(
        "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{axis}\" stroke-width=\"1.5\"/>\n",
        x1 = fmt_f64(MARGIN_LEFT),
        x2 = fmt_f64(MARGIN_LEFT + plot_w),
        y = fmt_f64(MARGIN_TOP + plot_h),
        axis = COLOR_AXIS,
    ));
    svg.push_str(&axis_labels(width, HEIGHT, x_label, y_label));
    svg.push_str("</svg>\n");
    svg
}

/// Scatter plot. When `identity_line` is set, the y = x reference line is
/// drawn in black across the shared data range.
pub fn scatter_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    identity_line: bool,
) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(x, y) in points {
        lo = lo.min(x).min(y);
        hi = hi.max(x).max(y);
    }
    if !lo.is_finite() || lo == hi {
        lo = lo.min(0.0) - 1.0;
        hi = hi.max(0.0) + 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let span = hi - lo;

    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - lo) / span * plot_w,
            MARGIN_TOP + plot_h - (y - lo) / span * plot_h,
        )
    };

    let mut svg = header(WIDTH, HEIGHT, title);

    for i in 0..=4 {
        let value = lo + span * i as f64 / 4.0;
        let (gx, gy) = to_px(value, value);
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{gy}\" x2=\"{x2}\" y2=\"{gy}\" stroke=\"{grid}\"/>\n",
            x1 = fmt_f64(MARGIN_LEFT),
            x2 = fmt_f64(MARGIN_LEFT + plot_w),
            gy = fmt_f64(gy),
            grid = COLOR_GRID,
        ));
        svg.push_str(&format!(
            "<line x1=\"{gx}\" y1=\"{y1}\" x2=\"{gx}\" y2=\"{y2}\" stroke=\"{grid}\"/>\n",
            gx = fmt_f64(gx),
            y1 = fmt_f64(MARGIN_TOP),
            y2 = fmt_f64(MARGIN_TOP + plot_h),
            grid = COLOR_GRID,
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" {font} font-size=\"11\" \
             fill=\"{axis}\">{label}</text>\n",
            x = fmt_f64(MARGIN_LEFT - 8.0),
            y = fmt_f64(gy + 4.0),
            font = FONT,
            axis = COLOR_AXIS,
            label = fmt_tick(value),
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" {font} font-size=\"11\" \
             fill=\"{axis}\">{label}</text>\n",
            x = fmt_f64(gx),
            y = fmt_f64(MARGIN_TOP + plot_h + 16.0),
            font = FONT,
            axis = COLOR_AXIS,
            label = fmt_tick(value),
        ));
    }

    if identity_line {
        let (x1, y1) = to_px(lo, lo);
        let (x2, y2) = to_px(hi, hi);
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"black\" \
             stroke-width=\"1.5\"/>\n",
            x1 = fmt_f64(x1),
            y1 = fmt_f64(y1),
            x2 = fmt_f64(x2),
            y2 = fmt_f64(y2),
        ));
    }

    for &(x, y) in points {
        let (px, py) = to_px(x, y);
        svg.push_str(&format!(
            "<circle cx=\"{px}\" cy=\"{py}\" r=\"3.5\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n",
            px = fmt_f64(px),
            py = fmt_f64(py),
            color = COLOR_POINT,
        ));
    }

    svg.push_str(&format!(
        concat!(
            "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"{axis}\" stroke-width=\"1.5\"/>\n",
            "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"{axis}\" stroke-width=\"1.5\"/>\n"
        ),
        l = fmt_f64(MARGIN_LEFT),
        r = fmt_f64(MARGIN_LEFT + plot_w),
        t = fmt_f64(MARGIN_TOP),
        b = fmt_f64(MARGIN_TOP + plot_h),
        axis = COLOR_AXIS,
    ));
    svg.push_str(&axis_labels(WIDTH, HEIGHT, x_label, y_label));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_escape_markup_in_labels() {
        let svg = bar_chart("a < b & c", "x", "y", &[("B<R".to_string(), 1.0)]);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("B<R"));
    }

    #[test]
    fn scatter_draws_identity_line_in_black() {
        let svg = scatter_chart("t", "x", "y", &[(1.0, 2.0), (3.0, 2.5)], true);
        assert!(svg.contains("stroke=\"black\""));
    }

    #[test]
    fn charts_are_deterministic() {
        let points = vec![(1.0, 2.0), (0.5, 0.25)];
        assert_eq!(
            scatter_chart("t", "x", "y", &points, false),
            scatter_chart("t", "x", "y", &points, false)
        );
    }

    #[test]
    fn degenerate_single_point_still_renders() {
        let svg = scatter_chart("t", "x", "y", &[(5.0, 5.0)], true);
        assert!(svg.contains("<circle"));
    }
}
