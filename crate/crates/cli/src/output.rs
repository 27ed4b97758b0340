//! Plot-ready CSV and JSON writers.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use tkdv_core::{sphere_to_spectrum, Histogram, SpherePoint, WaveField};

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(path: &Path) -> io::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(io::Error::other)
}

fn finish(mut w: csv::Writer<fs::File>) -> io::Result<()> {
    w.flush()
}

fn record<W: io::Write>(w: &mut csv::Writer<W>, fields: &[String]) -> io::Result<()> {
    w.write_record(fields).map_err(io::Error::other)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// `bin_left,bin_right,count`
pub fn write_histogram_csv(path: &Path, h: &Histogram) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, &["bin_left".into(), "bin_right".into(), "count".into()])?;
    for (i, c) in h.counts.iter().enumerate() {
        record(&mut w, &[fmt_f64(h.edges[i]), fmt_f64(h.edges[i + 1]), c.to_string()])?;
    }
    finish(w)
}

/// `k,power`
pub fn write_power_csv(path: &Path, power: &[f64]) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, &["k".into(), "power".into()])?;
    for (i, p) in power.iter().enumerate() {
        record(&mut w, &[(i + 1).to_string(), fmt_f64(*p)])?;
    }
    finish(w)
}

/// `sample_id,k,re,im`
pub fn write_spectra_csv(path: &Path, samples: &[SpherePoint], energy: f64) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, &["sample_id".into(), "k".into(), "re".into(), "im".into()])?;
    for (id, x) in samples.iter().enumerate() {
        let s = sphere_to_spectrum(x, energy);
        for (i, u) in s.modes.iter().enumerate() {
            record(&mut w, &[id.to_string(), (i + 1).to_string(), fmt_f64(u.re), fmt_f64(u.im)])?;
        }
    }
    finish(w)
}

/// `xi,u`
pub fn write_field_csv(path: &Path, field: &WaveField) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, &["xi".into(), "u".into()])?;
    for (x, u) in field.xi.iter().zip(&field.u) {
        record(&mut w, &[fmt_f64(*x), fmt_f64(*u)])?;
    }
    finish(w)
}

/// Generic table with a header row; every value is pre-formatted.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    record(&mut w, &header.iter().map(|h| h.to_string()).collect::<Vec<_>>())?;
    for row in rows {
        record(&mut w, row)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.256_758_334_191_025, 6.7e-4, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }
}
