//! CSV and JSON writers. Numbers are written with 17 significant digits so
//! that doubles survive a round trip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CarmaError, Result};
use crate::mc::{ConvergenceTable, SampleMatrix};
use crate::simulate::SamplePath;

use super::SpectralRow;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CarmaError::Io(e.into()))?;
    write_text(path, &(text + "\n"))
}

fn csv(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write_spectral(path: &Path, rows: &[SpectralRow], format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(path, &rows),
        Format::Csv => write_text(
            path,
            &csv(
                "omega,f_y,re_h,im_h",
                rows.iter().map(|r| vec![num(r.omega), num(r.density), num(r.transfer_re), num(r.transfer_im)]),
            ),
        ),
    }
}

#[derive(Serialize)]
struct PathJson<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

pub fn write_path(path: &Path, sample: &SamplePath, format: Format) -> Result<()> {
    let t = sample.grid.times();
    match format {
        Format::Json => write_json(path, &PathJson { t, y: &sample.y }),
        Format::Csv => write_text(path, &csv("t,y", t.iter().zip(&sample.y).map(|(t, y)| vec![num(*t), num(*y)]))),
    }
}

/// Long format `path,omega,re,im`.
pub fn write_samples(path: &Path, samples: &SampleMatrix) -> Result<()> {
    let mut s = String::from("path,omega,re,im\n");
    for (m, row) in samples.rows.iter().enumerate() {
        for ft in row {
            let _ = writeln!(s, "{m},{},{},{}", num(ft.omega), num(ft.value.re), num(ft.value.im));
        }
    }
    write_text(path, &s)
}

pub fn write_qq(path: &Path, pairs: &[(f64, f64)]) -> Result<()> {
    write_text(path, &csv("theoretical,empirical", pairs.iter().map(|(a, b)| vec![num(*a), num(*b)])))
}

pub fn write_convergence(path: &Path, table: &ConvergenceTable, format: Format) -> Result<()> {
    if format == Format::Json {
        return write_json(path, table);
    }
    let mut header = String::from("h_max,N");
    for w in &table.frequencies {
        let _ = write!(header, ",rms_err_omega{w}");
    }
    for w in &table.frequencies {
        let _ = write!(header, ",ratio_omega{w}");
    }
    let rows = table.rows.iter().map(|r| {
        let mut row = vec![num(r.h_max), r.n_points.to_string()];
        row.extend(r.rms.iter().map(|&x| num(x)));
        row.extend(r.ratio.iter().map(|x| x.map(num).unwrap_or_default()));
        row
    });
    write_text(path, &csv(&header, rows))
}
