//! Static SVG line charts for telemetry series.

use std::path::Path;

use plotters::prelude::*;

/// Draws `points` (UTC seconds, value) as a line chart against hours since
/// the first point. Does nothing for an empty series.
pub fn line_chart(path: &Path, title: &str, points: &[(i64, f64)]) -> Result<(), String> {
    let Some(&(t0, _)) = points.first() else {
        return Ok(());
    };
    let xs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(t, v)| ((t - t0) as f64 / 3600.0, v))
        .collect();
    let x_max = xs.last().map(|p| p.0).unwrap_or(0.0).max(1.0);
    let (mut y_min, mut y_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if y_max - y_min < 1e-9 {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = (y_max - y_min) * 0.05;

    let root = SVGBackend::new(path, (900, 360)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(0.0..x_max, (y_min - pad)..(y_max + pad))
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("hours since first sample")
        .draw()
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(LineSeries::new(xs, &BLUE))
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())?;
    Ok(())
}
