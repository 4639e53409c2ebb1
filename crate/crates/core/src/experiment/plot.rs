//! Static SVG figures rendered from experiment results.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers as well as the line.
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, markers: false }
    }

    pub fn marked(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, markers: true }
    }
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Logarithmic y axis; non-positive values are dropped.
    pub log_y: bool,
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn bounds(series: &[Series], log_y: bool) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let pts: Vec<(f64, f64)> = pts.filter(|(_, y)| !log_y || *y > 0.0).cloned().collect();
    if pts.is_empty() {
        return ((0.0, 1.0), if log_y { (1e-6, 1.0) } else { (0.0, 1.0) });
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if log_y {
        (y0, y1) = (y0 / 2.0, y1 * 2.0);
    } else {
        let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 1.0 };
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    ((x0, x1), (y0, y1))
}

pub fn line_plot(path: &Path, axes: &Axes, series: &[Series]) -> Result<()> {
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let ((x0, x1), (y0, y1)) = bounds(series, axes.log_y);
    let mut builder = ChartBuilder::on(&root);
    builder.caption(axes.title, ("sans-serif", 20)).margin(12).x_label_area_size(44).y_label_area_size(64);
    let palette = [&BLUE, &RED, &GREEN, &MAGENTA, &CYAN, &BLACK];
    macro_rules! draw {
        ($chart:expr, $keep:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(axes.x_label)
                .y_desc(axes.y_label)
                .draw()
                .map_err(plot_err)?;
            for (i, s) in series.iter().enumerate() {
                let color = palette[i % palette.len()];
                let pts: Vec<(f64, f64)> = s.points.iter().cloned().filter($keep).collect();
                chart
                    .draw_series(LineSeries::new(pts.clone(), color))
                    .map_err(plot_err)?
                    .label(s.label.clone())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
                if s.markers {
                    chart.draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled()))).map_err(plot_err)?;
                }
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }};
    }
    let finite = |p: &(f64, f64)| p.0.is_finite() && p.1.is_finite();
    if axes.log_y {
        let chart = builder.build_cartesian_2d(x0..x1, (y0..y1).log_scale()).map_err(plot_err)?;
        draw!(chart, |p: &(f64, f64)| finite(p) && p.1 > 0.0);
    } else {
        let chart = builder.build_cartesian_2d(x0..x1, y0..y1).map_err(plot_err)?;
        draw!(chart, finite);
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_an_svg_with_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        let s = [
            Series::marked("a", vec![(-45.0, 1e-2), (-43.0, 1e-3), (-41.0, 0.0)]),
            Series::line("b", vec![(-45.0, 2e-2), (-43.0, 3e-3)]),
        ];
        line_plot(&path, &Axes { title: "t", x_label: "x", y_label: "y", log_y: true }, &s).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        let texts: Vec<&str> = svg.split("</text>").filter_map(|t| t.rsplit('>').next()).map(str::trim).collect();
        assert!(svg.starts_with("<svg"));
        assert!(texts.contains(&"a") && texts.contains(&"b"), "{texts:?}");
    }

    #[test]
    fn empty_series_still_render() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.svg");
        line_plot(&path, &Axes { title: "t", x_label: "x", y_label: "y", log_y: false }, &[]).unwrap();
        assert!(path.exists());
    }
}
