//! Series CSV and binary snapshot files.
//!
//! Snapshot layout: ASCII header lines `CGFLOW1`, `dims d N1 [N2 [N3]]`,
//! `fields k`, `t <decimal>`, followed by `k * prod(N)` little-endian f64
//! values, row-major, one component after another.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::diagnostics::TimeSeries;
use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Shortest decimal that parses back to the same f64.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

pub fn write_series_csv<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let e = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(series.names()).map_err(e)?;
    for i in 0..series.len() {
        w.write_record(series.row(i).iter().map(|&v| format_f64(v)))
            .map_err(e)?;
    }
    w.flush().map_err(|x| Error::Io(x.to_string()))
}

pub fn read_series_csv<R: Read>(input: R) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_reader(input);
    let e = |e: csv::Error| Error::Io(e.to_string());
    let names: Vec<String> = r.headers().map_err(e)?.iter().map(String::from).collect();
    let mut series = TimeSeries::new(names)?;
    for rec in r.records() {
        let rec = rec.map_err(e)?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|x| Error::Io(format!("bad number '{s}': {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        series.push(&row)?;
    }
    Ok(series)
}

/// Appends rows to `series.csv` as they are produced, one flushed line each.
pub struct SeriesWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl SeriesWriter {
    pub fn create(path: &Path, names: &[String]) -> Result<Self> {
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        let mut inner = csv::Writer::from_writer(BufWriter::new(f));
        inner.write_record(names).map_err(|e| io_err(path, e))?;
        inner.flush().map_err(|e| io_err(path, e))?;
        Ok(Self { inner })
    }

    pub fn append(&mut self, row: &[f64]) -> Result<()> {
        let e = |e: csv::Error| Error::Io(e.to_string());
        self.inner
            .write_record(row.iter().map(|&v| format_f64(v)))
            .map_err(e)?;
        self.inner.flush().map_err(|x| Error::Io(x.to_string()))
    }
}

pub fn write_snapshot<W: Write>(fields: &[RealField], t: f64, out: W) -> Result<()> {
    let grid = fields
        .first()
        .ok_or_else(|| Error::InvalidState("snapshot needs at least one field".into()))?
        .grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch("snapshot components".into()));
    }
    let mut w = BufWriter::new(out);
    let dims: Vec<String> = grid.modes().iter().map(usize::to_string).collect();
    let header = format!(
        "CGFLOW1\ndims {} {}\nfields {}\nt {t:?}\n",
        grid.dims(),
        dims.join(" "),
        fields.len()
    );
    let e = |x: std::io::Error| Error::Io(x.to_string());
    w.write_all(header.as_bytes()).map_err(e)?;
    for f in fields {
        for v in f.values() {
            w.write_all(&v.to_le_bytes()).map_err(e)?;
        }
    }
    w.flush().map_err(e)
}

/// Fields and time stored in a snapshot.
pub fn read_snapshot<R: Read>(input: R) -> Result<(Vec<RealField>, f64)> {
    let mut r = BufReader::new(input);
    let mut line = String::new();
    let mut next_line = |r: &mut BufReader<R>| -> Result<String> {
        line.clear();
        r.read_line(&mut line)
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(line.trim_end_matches('\n').to_string())
    };
    let bad = |what: &str| Error::Io(format!("malformed snapshot: {what}"));
    if next_line(&mut r)? != "CGFLOW1" {
        return Err(bad("missing CGFLOW1 magic"));
    }
    let dims_line = next_line(&mut r)?;
    let mut it = dims_line.split(' ');
    if it.next() != Some("dims") {
        return Err(bad("expected dims line"));
    }
    let d: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("dimension"))?;
    let modes: Vec<usize> = it
        .map(|s| s.parse().map_err(|_| bad("mode count")))
        .collect::<Result<_>>()?;
    if modes.len() != d {
        return Err(bad("dims count does not match"));
    }
    let k: usize = next_line(&mut r)?
        .strip_prefix("fields ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("fields line"))?;
    let t: f64 = next_line(&mut r)?
        .strip_prefix("t ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("time line"))?;
    let grid = Grid::new(&modes)?;
    let n = grid.len();
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Io(e.to_string()))?;
    if bytes.len() != 8 * n * k {
        return Err(bad(&format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            8 * n * k
        )));
    }
    let fields = bytes
        .chunks_exact(8 * n)
        .map(|c| {
            let vals = c
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            RealField::from_values(&grid, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((fields, t))
}

pub fn save_snapshot(path: &Path, fields: &[RealField], t: f64) -> Result<()> {
    // write to a temporary name first so a crash never leaves half a file
    let tmp = path.with_extension("partial");
    let f = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    write_snapshot(fields, t, f)?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<(Vec<RealField>, f64)> {
    read_snapshot(File::open(path).map_err(|e| io_err(path, e))?)
}
