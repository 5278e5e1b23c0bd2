//! SER-versus-parameter line plots.

use std::collections::BTreeMap;
use std::error::Error;
use std::path::Path;

use clap::ValueEnum;
use fama_core::harness::{read_rows, CsvRow};
use plotters::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum XColumn {
    #[value(name = "U", alias = "users")]
    Users,
    #[value(name = "K", alias = "ports")]
    Ports,
    #[value(name = "W", alias = "aperture")]
    Aperture,
    #[value(name = "d")]
    SpacingD,
    #[value(name = "cbr")]
    Cbr,
}

impl XColumn {
    const ALL: [XColumn; 5] = [
        XColumn::Users,
        XColumn::Ports,
        XColumn::Aperture,
        XColumn::SpacingD,
        XColumn::Cbr,
    ];

    fn value(&self, row: &CsvRow) -> Option<f64> {
        match self {
            XColumn::Users => Some(row.users as f64),
            XColumn::Ports => Some(row.ports as f64),
            XColumn::Aperture => Some(row.aperture),
            XColumn::SpacingD => row.d,
            XColumn::Cbr => Some(row.cbr),
        }
    }

    fn caption(&self) -> &'static str {
        match self {
            XColumn::Users => "users U",
            XColumn::Ports => "ports K",
            XColumn::Aperture => "aperture W (wavelengths)",
            XColumn::SpacingD => "spacing d",
            XColumn::Cbr => "bandwidth ratio",
        }
    }
}

/// The first column that takes more than one value, else `U`.
pub fn guess_x(rows: &[CsvRow]) -> XColumn {
    XColumn::ALL
        .into_iter()
        .find(|col| {
            let mut vals = rows.iter().filter_map(|r| col.value(r));
            match vals.next() {
                Some(first) => vals.any(|v| v != first),
                None => false,
            }
        })
        .unwrap_or(XColumn::Users)
}

/// `(x, ser)` per scheme, sorted by x. Rows without an x value or with zero
/// SER (not drawable on a log axis) are left out.
pub fn series(rows: &[CsvRow], x: XColumn) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        if let Some(xv) = x.value(row) {
            if row.ser > 0.0 {
                out.entry(row.scheme.clone()).or_default().push((xv, row.ser));
            }
        }
    }
    for pts in out.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

pub fn plot(input: &Path, output: &Path, x: Option<XColumn>) -> Result<(), Box<dyn Error>> {
    let rows = read_rows(input)?;
    let x = x.unwrap_or_else(|| guess_x(&rows));
    let curves = series(&rows, x);
    if curves.is_empty() {
        return Err(format!("{}: no rows with nonzero SER to plot", input.display()).into());
    }
    let pts = curves.values().flatten();
    let (mut x_lo, mut x_hi, mut y_lo) = (f64::INFINITY, f64::NEG_INFINITY, 1.0f64);
    for &(xv, ser) in pts {
        x_lo = x_lo.min(xv);
        x_hi = x_hi.max(xv);
        y_lo = y_lo.min(ser);
    }
    if x_lo == x_hi {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let y_lo = 10f64.powf(y_lo.log10().floor());

    let root = SVGBackend::new(output, (800, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(x_lo..x_hi, (y_lo..1.0).log_scale())?;
    chart
        .configure_mesh()
        .x_desc(x.caption())
        .y_desc("SER")
        .label_style(("sans-serif", 14))
        .axis_desc_style(("sans-serif", 16))
        .y_label_formatter(&|v| format!("{v:.0e}"))
        .draw()?;
    for (i, (scheme, pts)) in curves.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))?
            .label(scheme.as_str())
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], color.stroke_width(2)));
        chart.draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .label_font(("sans-serif", 14))
        .background_style(WHITE.mix(0.8))
        .draw()?;
    root.present()?;
    Ok(())
}
