//! SVG line plots of reconstructions and sweep curves.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};

/// A named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    /// Sample `i` at abscissa `i`.
    pub fn from_signal(label: impl Into<String>, x: &[f64]) -> Self {
        Self::new(label, x.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect())
    }
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(0, 0, 0),
    RGBColor(200, 30, 30),
    RGBColor(30, 90, 200),
    RGBColor(20, 150, 60),
    RGBColor(200, 120, 0),
    RGBColor(140, 40, 160),
];

fn plot_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Io(std::io::Error::other(format!("plot: {e:?}")))
}

fn bounds(series: &[Series], log_x: bool) -> Option<((f64, f64), (f64, f64))> {
    let pts = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0));
    let mut it = pts.peekable();
    it.peek()?;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in it {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = if log_x { x0 * 10.0 } else { x0 + 1.0 };
    }
    let pad = 0.05 * (y1 - y0).max(1e-12);
    Some(((x0, x1), (y0 - pad, y1 + pad)))
}

/// Line plot of `series`; `log_x` uses a logarithmic abscissa. Non-finite
/// points are skipped. Fails if no point is drawable.
pub fn line_plot(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool) -> Result<()> {
    let ((x0, x1), (y0, y1)) =
        bounds(series, log_x).ok_or_else(|| Error::InvalidArgument("nothing to plot".into()))?;
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60);
    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(x_label)
                .y_desc(y_label)
                .draw()
                .map_err(plot_err)?;
            for (i, s) in series.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                let pts = s
                    .points
                    .iter()
                    .copied()
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0));
                chart
                    .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                    .map_err(plot_err)?
                    .label(s.label.clone())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }};
    }
    if log_x {
        draw!(builder.build_cartesian_2d((x0..x1).log_scale(), y0..y1).map_err(plot_err)?);
    } else {
        draw!(builder.build_cartesian_2d(x0..x1, y0..y1).map_err(plot_err)?);
    }
    root.present().map_err(plot_err)
}

/// Ground truth and reconstructions over the sample index.
pub fn plot_signals(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    line_plot(path, title, "index", "value", series, false)
}

/// Median PSNR against a logarithmic gamma axis.
pub fn plot_psnr_vs_gamma(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    line_plot(path, title, "gamma", "PSNR (dB)", series, true)
}

/// Mean approximation error against the number of jumps or nonzeros.
pub fn plot_error_vs_count(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    line_plot(path, title, "count", "||Ax - b||^2", series, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_svg() {
        let dir = std::env::temp_dir().join(format!("ipotts-plot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("curve.svg");
        let s = vec![
            Series::new("a", vec![(1e-3, 10.0), (1e-2, 20.0), (1e-1, f64::INFINITY), (1.0, 15.0)]),
            Series::new("b", vec![(1e-3, 12.0), (1.0, 11.0)]),
        ];
        plot_psnr_vs_gamma(&path, "sweep", &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("sweep"));
        plot_signals(&dir.join("sig.svg"), "signals", &[Series::from_signal("x", &[0.0, 1.0, 1.0])]).unwrap();
        assert!(line_plot(&dir.join("none.svg"), "t", "x", "y", &[Series::new("e", vec![])], false).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
