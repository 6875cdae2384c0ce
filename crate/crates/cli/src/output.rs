//! CSV tables with a provenance preamble, and optional SVG line plots.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use plotters::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("MMIMO_GIT_DESCRIBE"), ")");

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also render the series as an SVG line plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Which columns a plot uses: x, y and the columns whose values name a series.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x: &'static str,
    pub y: &'static str,
    pub series: Vec<&'static str>,
    pub log_x: bool,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: Option<PlotSpec>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            plot: None,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn col(&self, name: &str) -> Result<usize, CliError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Plot(format!("no column '{name}'")))
    }
}

pub fn num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

pub fn provenance(command: &str, cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("# mmimo {VERSION}"),
        format!("# command: {command}"),
        format!("# config-hash: {}", cfg.hash(command)),
        format!("# seed: {}", cfg.seed),
        format!("# config: {}", cfg.canonical().trim_end().replace('\n', " ")),
    ]
}

pub fn write_table<W: Write>(mut w: W, header: &[String], table: &Table) -> Result<(), CliError> {
    for line in header {
        writeln!(w, "{line}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&table.columns)?;
    for r in &table.rows {
        csv.write_record(r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn emit(command: &str, cfg: &RunConfig, table: &Table, out: &OutputArgs) -> Result<(), CliError> {
    let header = provenance(command, cfg);
    match &out.out {
        Some(p) => write_table(std::io::BufWriter::new(std::fs::File::create(p)?), &header, table)?,
        None => write_table(std::io::stdout().lock(), &header, table)?,
    }
    if let Some(p) = &out.plot {
        let spec = table
            .plot
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("no plot defined for '{command}'")))?;
        render_svg(table, spec, p)?;
    }
    Ok(())
}

type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn series(table: &Table, spec: &PlotSpec) -> Result<Series, CliError> {
    let (xi, yi) = (table.col(spec.x)?, table.col(spec.y)?);
    let keys = spec
        .series
        .iter()
        .map(|c| table.col(c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out: Series = BTreeMap::new();
    for r in &table.rows {
        let (Ok(x), Ok(y)) = (r[xi].parse::<f64>(), r[yi].parse::<f64>()) else {
            continue;
        };
        if !y.is_finite() || (spec.log_x && x <= 0.0) {
            continue;
        }
        let name = keys.iter().map(|&k| r[k].as_str()).collect::<Vec<_>>().join(" ");
        out.entry(name)
            .or_default()
            .push((if spec.log_x { x.log10() } else { x }, y));
    }
    Ok(out)
}

pub fn render_svg(table: &Table, spec: &PlotSpec, path: &Path) -> Result<(), CliError> {
    let data = series(table, spec)?;
    let pts = data.values().flatten();
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(CliError::Plot("nothing to plot".into()));
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let plot_err = |e: &dyn std::fmt::Display| CliError::Plot(e.to_string());
    let root = SVGBackend::new(path, (800, 520)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let x_label = if spec.log_x {
        format!("log10({})", spec.x)
    } else {
        spec.x.to_string()
    };
    let mut chart = ChartBuilder::on(&root)
        .caption(&spec.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, 0.0..y1 * 1.05 + 1e-12)
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(spec.y)
        .draw()
        .map_err(|e| plot_err(&e))?;
    for (i, (name, mut pts)) in data.into_iter().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(|e| plot_err(&e))?
            .label(name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}
