//! Point-set files: CSV with an optional header row, and a compact binary
//! layout (`AVTA1`, little-endian `u64` n and m, then `n * m` little-endian
//! `f64` in row-major order).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::points::PointSet;

pub const MAGIC: &[u8; 5] = b"AVTA1";

/// Parses CSV rows of numbers. A first row that does not parse as numbers
/// is taken as a header.
pub fn parse_csv_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse(format!("line {}: {e}", line + 1)));
            }
        }
    }
    Ok(rows)
}

pub fn parse_csv<R: Read>(reader: R) -> Result<PointSet> {
    let rows = parse_csv_rows(reader)?;
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    PointSet::from_rows(&rows)
}

pub fn write_csv<W: Write>(ps: &PointSet, writer: W) -> Result<()> {
    write_rows_csv(ps.rows(), writer)
}

pub fn write_rows_csv<'a, I, W>(rows: I, writer: W) -> Result<()>
where
    I: IntoIterator<Item = &'a [f64]>,
    W: Write,
{
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_writer(writer);
    for row in rows {
        // Display for f64 is the shortest string that reads back exactly.
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_binary<R: Read>(mut reader: R) -> Result<PointSet> {
    let mut magic = [0u8; 5];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad magic bytes".into()));
    }
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let m = u64::from_le_bytes(word) as usize;
    let len = n
        .checked_mul(m)
        .ok_or_else(|| Error::Parse("header overflows".into()))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::Parse(format!(
            "expected {} payload bytes, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PointSet::new(n, m, data)
}

pub fn write_binary<W: Write>(ps: &PointSet, mut writer: W) -> Result<()> {
    writer.write_all(MAGIC)?;
    writer.write_all(&(ps.len() as u64).to_le_bytes())?;
    writer.write_all(&(ps.dim() as u64).to_le_bytes())?;
    for x in ps.as_slice() {
        writer.write_all(&x.to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads either format, telling them apart by the magic bytes.
pub fn read_points(path: &Path) -> Result<PointSet> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.starts_with(MAGIC) {
        parse_binary(bytes.as_slice())
    } else {
        parse_csv(bytes.as_slice())
    }
}

pub fn write_points(ps: &PointSet, path: &Path, binary: bool) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    if binary {
        write_binary(ps, out)
    } else {
        write_csv(ps, out)
    }
}

/// Writes `key=value` lines.
pub fn write_metadata<W: Write>(entries: &[(String, String)], mut writer: W) -> Result<()> {
    for (k, v) in entries {
        writeln!(writer, "{k}={v}")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn parse_metadata(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let ps = parse_csv("x,y\n1,2\n3.5,-4\n".as_bytes()).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.point(1), &[3.5, -4.0]);
        let ps = parse_csv("1, 2\n\n3,4\n".as_bytes()).unwrap();
        assert_eq!(ps.point(0), &[1.0, 2.0]);
        assert!(parse_csv("1,2\n3,x\n".as_bytes()).is_err());
        assert!(parse_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(parse_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn round_trips_are_exact() {
        let ps = PointSet::from_rows(&[[0.1, 1.0 / 3.0], [-2e-300, 7.25]]).unwrap();
        let mut buf = Vec::new();
        write_csv(&ps, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), ps);
        let mut buf = Vec::new();
        write_binary(&ps, &mut buf).unwrap();
        assert_eq!(&buf[..5], MAGIC);
        assert_eq!(buf.len(), 5 + 16 + 4 * 8);
        assert_eq!(parse_binary(buf.as_slice()).unwrap(), ps);
        buf.pop();
        assert!(parse_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn metadata_round_trip() {
        let entries = vec![
            ("seed".to_string(), "7".to_string()),
            ("k".into(), "3".into()),
        ];
        let mut buf = Vec::new();
        write_metadata(&entries, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "seed=7\nk=3\n");
        assert_eq!(parse_metadata(std::str::from_utf8(&buf).unwrap()), entries);
    }
}
