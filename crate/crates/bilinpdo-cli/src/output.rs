//! Writes `results.csv` and `plot.svg` for a finished experiment.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::experiments::Report;

/// Files written, in order.
pub fn write(report: &Report, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    let mut header = report.table.header.clone();
    header.extend(["T[length]".to_string(), "N[points/axis]".into(), "truncation".into()]);
    w.write_record(&header)?;
    let (t, n, tr) = &report.provenance;
    for row in &report.table.rows {
        w.write_record(row.iter().chain([t, n, tr]))?;
    }
    w.flush()?;
    let mut out = vec![csv_path];
    if let Some(plot) = &report.plot {
        let p = dir.join("plot.svg");
        fs::write(&p, plot.render())?;
        out.push(p);
    }
    Ok(out)
}
