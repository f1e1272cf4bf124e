//! SVG line and histogram plots.

use std::path::Path;

use plotters::prelude::*;

use super::spacing::SpacingHistogram;
use crate::error::{Error, Result};

const SIZE: (u32, u32) = (800, 500);
const PALETTE: [RGBColor; 5] = [BLUE, RED, GREEN, MAGENTA, BLACK];

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
}

fn plot_error(e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
            }
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (b.3 - b.2).abs().max(1e-12);
    let xr = if b.1 > b.0 { (b.0, b.1) } else { (b.0 - 0.5, b.0 + 0.5) };
    (xr.0, xr.1, b.2 - pad, b.3 + pad)
}

/// Line plot of several series, e.g. density overlays or trends in `N`.
pub fn line_plot(path: &Path, title: &str, x_label: &str, series: &[Series]) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_error)?;
    let (x0, x1, y0, y1) = bounds(series);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_error)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .draw()
        .map_err(plot_error)?;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
            .map_err(plot_error)?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_error)?;
    root.present().map_err(plot_error)?;
    Ok(())
}

/// Histogram of normalized gap densities with optional reference curves.
pub fn histogram_plot(path: &Path, title: &str, hist: &SpacingHistogram, references: &[Series]) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_error)?;
    let x1 = *hist.edges.last().unwrap_or(&1.0);
    let mut y1 = hist.density.iter().copied().fold(0.0, f64::max);
    for s in references {
        y1 = s.points.iter().map(|p| p.1).fold(y1, f64::max);
    }
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..x1, 0.0..1.05 * y1.max(1e-12))
        .map_err(plot_error)?;
    chart.configure_mesh().x_desc("unfolded gap").draw().map_err(plot_error)?;
    chart
        .draw_series(hist.edges.windows(2).zip(&hist.density).map(|(e, d)| {
            Rectangle::new([(e[0], 0.0), (e[1], *d)], BLUE.mix(0.4).filled())
        }))
        .map_err(plot_error)?;
    for (i, s) in references.iter().enumerate() {
        let color = PALETTE[(i + 1) % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
            .map_err(plot_error)?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    if !references.is_empty() {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_error)?;
    }
    root.present().map_err(plot_error)?;
    Ok(())
}
