//! Front CSV files: optional header `o1,...,om`, one objective vector per row.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::indicators::Front;

/// Reads a front. The header row is optional: a first row of numbers is data.
pub fn read_front<R: Read>(reader: R, origin: &str) -> Result<Front> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut m = None;
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if i == 0 && rec.iter().any(|c| c.parse::<f64>().is_err()) {
            m = Some(rec.len());
            continue;
        }
        let m = *m.get_or_insert(rec.len());
        if rec.len() != m {
            return Err(Error::Data {
                path: origin.to_string(),
                row,
                message: format!("expected {m} columns, found {}", rec.len()),
            });
        }
        let p = rec
            .iter()
            .map(|cell| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Data {
                    path: origin.to_string(),
                    row,
                    message: format!("`{cell}` is not a finite number"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(p);
    }
    Front::new(points)
}

pub fn read_front_file(path: impl AsRef<Path>) -> Result<Front> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_front(file, &path.display().to_string())
}

pub fn write_front<W: Write>(writer: W, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let m = points.first().map_or(0, Vec::len);
    w.write_record((1..=m).map(|i| format!("o{i}")))?;
    for p in points {
        w.write_record(p.iter().map(f64::to_string))?;
    }
    w.flush().map_err(|e| Error::io("<front>", e))?;
    Ok(())
}

pub fn front_to_string(points: &[Vec<f64>]) -> String {
    let mut buf = Vec::new();
    write_front(&mut buf, points).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}
