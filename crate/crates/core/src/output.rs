//! CSV emission and re-reading, plus bare-bones SVG plots.
//!
//! Numbers are written as `{:.16e}`, which carries 17 significant digits and
//! so parses back to the identical `f64`. Lines end in `\n` and the last
//! row has no blank line after it.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::spectra::{Column, Map2D, SpectrumSeries};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("I/O error on {path}: {source}")]
    IoError {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },
}

pub const SPECTRUM_HEADER: &str = "delta_p_khz,im_rho24,re_rho24,re_rho12,re_rho13,re_rho23,rho44";
pub const MAP_HEADER: &str = "delta_khz,delta_p_khz,im_rho24";

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a table with one column per header.
pub fn table_to_string(headers: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(headers.len(), columns.len(), "one header per column");
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = headers.join(",");
    for r in 0..rows {
        out.push('\n');
        for (i, c) in columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_value(c[r]));
        }
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError::IoError { path: path.to_path_buf(), source })
}

fn read_file(path: &Path) -> Result<String, OutputError> {
    fs::read_to_string(path).map_err(|source| OutputError::IoError { path: path.to_path_buf(), source })
}

pub fn write_table(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<(), OutputError> {
    write_file(path, &table_to_string(headers, columns))
}

/// Parsed CSV: header names and one `Vec` per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table, OutputError> {
    let err = |line: usize, reason: String| OutputError::Format { path: path.to_path_buf(), line, reason };
    let mut lines = text.split('\n');
    let headers: Vec<String> = match lines.next() {
        Some(h) if !h.is_empty() => h.split(',').map(str::to_string).collect(),
        _ => return Err(err(1, "missing header".into())),
    };
    let mut columns = vec![Vec::new(); headers.len()];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != headers.len() {
            return Err(err(i + 2, format!("expected {} fields, found {}", headers.len(), fields.len())));
        }
        for (c, f) in columns.iter_mut().zip(fields) {
            c.push(f.parse().map_err(|_| err(i + 2, format!("bad number '{f}'")))?);
        }
    }
    Ok(Table { headers, columns })
}

pub fn read_table(path: &Path) -> Result<Table, OutputError> {
    parse_table(&read_file(path)?, path)
}

fn spectrum_columns(series: &SpectrumSeries) -> Vec<&[f64]> {
    std::iter::once(series.axis()).chain(Column::ALL.iter().map(|&c| series.column(c))).collect()
}

pub fn spectrum_to_string(series: &SpectrumSeries) -> String {
    let headers: Vec<&str> = SPECTRUM_HEADER.split(',').collect();
    table_to_string(&headers, &spectrum_columns(series))
}

/// Writes the standard seven spectrum columns; extra columns are ignored.
pub fn write_spectrum_csv(series: &SpectrumSeries, path: &Path) -> Result<(), OutputError> {
    write_file(path, &spectrum_to_string(series))
}

/// Standard spectrum columns followed by any extra columns of the series.
pub fn write_traces_csv(series: &SpectrumSeries, path: &Path) -> Result<(), OutputError> {
    let mut headers: Vec<&str> = SPECTRUM_HEADER.split(',').collect();
    let mut columns = spectrum_columns(series);
    for (name, values) in series.extra_columns() {
        headers.push(name);
        columns.push(values);
    }
    write_table(path, &headers, &columns)
}

pub fn read_spectrum_csv(path: &Path) -> Result<SpectrumSeries, OutputError> {
    let table = read_table(path)?;
    let expected: Vec<&str> = SPECTRUM_HEADER.split(',').collect();
    if table.headers.len() < expected.len() || table.headers[..expected.len()] != expected[..] {
        return Err(OutputError::Format {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("header must start with '{SPECTRUM_HEADER}'"),
        });
    }
    let mut cols = table.columns.into_iter();
    let axis = cols.next().unwrap_or_default();
    let data: [Vec<f64>; 6] = std::array::from_fn(|_| cols.next().unwrap_or_default());
    let mut series = SpectrumSeries::from_columns("delta_p_khz", axis, data).map_err(|e| OutputError::Format {
        path: path.to_path_buf(),
        line: 2,
        reason: e.to_string(),
    })?;
    for (name, values) in table.headers[expected.len()..].iter().zip(cols) {
        series
            .push_extra(name.clone(), values)
            .expect("parsed columns share one length");
    }
    Ok(series)
}

/// Long format, row-major in δ then δ_p.
pub fn map_to_string(map: &Map2D) -> String {
    let mut out = String::from(MAP_HEADER);
    for (d, row) in map.d_axis.iter().zip(&map.grid) {
        for (dp, v) in map.dp_axis.iter().zip(row) {
            let _ = write!(out, "\n{},{},{}", format_value(*d), format_value(*dp), format_value(*v));
        }
    }
    out
}

pub fn write_map_csv(map: &Map2D, path: &Path) -> Result<(), OutputError> {
    write_file(path, &map_to_string(map))
}

pub fn read_map_csv(path: &Path) -> Result<Map2D, OutputError> {
    let table = read_table(path)?;
    let bad = |reason: &str| OutputError::Format { path: path.to_path_buf(), line: 1, reason: reason.into() };
    if table.headers.join(",") != MAP_HEADER {
        return Err(bad("unexpected map header"));
    }
    let (d, dp, v) = (&table.columns[0], &table.columns[1], &table.columns[2]);
    let mut d_axis: Vec<f64> = Vec::new();
    for &x in d {
        if d_axis.last() != Some(&x) {
            d_axis.push(x);
        }
    }
    if d_axis.is_empty() || d.len() % d_axis.len() != 0 {
        return Err(bad("map is not a full grid"));
    }
    let n = d.len() / d_axis.len();
    let dp_axis = dp[..n].to_vec();
    let grid: Vec<Vec<f64>> = v.chunks(n).map(<[f64]>::to_vec).collect();
    if dp.chunks(n).any(|c| c != dp_axis.as_slice()) {
        return Err(bad("rows use different probe axes"));
    }
    Ok(Map2D { d_axis, dp_axis, grid, max_residual: 0.0 })
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#000000"];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Line plot of several named curves sharing one x axis.
pub fn line_plot_svg(title: &str, x: &[f64], curves: &[(&str, &[f64])]) -> String {
    let (x0, x1) = range(x.iter().copied());
    let (y0, y1) = range(curves.iter().flat_map(|(_, y)| y.iter().copied()));
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (SVG_W - 2.0 * MARGIN);
    let py = |v: f64| SVG_H - MARGIN - (v - y0) / (y1 - y0) * (SVG_H - 2.0 * MARGIN);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\">\n\
         <text x=\"{MARGIN}\" y=\"20\" font-size=\"14\">{title}</text>\n\
         <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n",
        SVG_W - 2.0 * MARGIN,
        SVG_H - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"{}\" font-size=\"11\">{x0:.3}</text><text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{x1:.3}</text>",
        SVG_H - MARGIN + 15.0,
        SVG_W - MARGIN,
        SVG_H - MARGIN + 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{y0:.3e}</text><text x=\"{}\" y=\"{MARGIN}\" font-size=\"11\" text-anchor=\"end\">{y1:.3e}</text>",
        MARGIN - 4.0,
        SVG_H - MARGIN,
        MARGIN - 4.0
    );
    for (i, (name, y)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = x.iter().zip(y.iter()).map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b))).collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{name}</text>",
            SVG_W - MARGIN + 4.0,
            MARGIN + 14.0 * (i as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heat map of a detuning map, δ vertical and δ_p horizontal.
pub fn heatmap_svg(title: &str, map: &Map2D) -> String {
    let (v0, v1) = range(map.grid.iter().flatten().copied());
    let nx = map.dp_axis.len().max(1) as f64;
    let ny = map.d_axis.len().max(1) as f64;
    let cw = (SVG_W - 2.0 * MARGIN) / nx;
    let ch = (SVG_H - 2.0 * MARGIN) / ny;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" shape-rendering=\"crispEdges\">\n\
         <text x=\"{MARGIN}\" y=\"20\" font-size=\"14\">{title}</text>\n"
    );
    for (j, row) in map.grid.iter().enumerate() {
        let y = SVG_H - MARGIN - (j as f64 + 1.0) * ch;
        for (i, &v) in row.iter().enumerate() {
            let t = (v - v0) / (v1 - v0);
            let r = (255.0 * t).round() as u8;
            let b = (255.0 * (1.0 - t)).round() as u8;
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#{r:02x}00{b:02x}\"/>",
                MARGIN + i as f64 * cw,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, svg: &str) -> Result<(), OutputError> {
    write_file(path, svg)
}
