use std::io::{Read, Write};
use std::path::Path;

use crate::config::Impl;

pub const CSV_HEADER: [&str; 10] = [
    "N",
    "k",
    "n",
    "workers",
    "impl",
    "backend",
    "reps",
    "median_seconds",
    "gflops",
    "residual",
];

/// One measured (bandwidth, implementation) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub dim: usize,
    /// Bandwidth after padding.
    pub bandwidth: usize,
    /// Grid dimension; `None` for the reference driver.
    pub grid_dim: Option<usize>,
    pub workers: usize,
    pub implementation: Impl,
    pub backend: String,
    pub repetitions: usize,
    /// `None` when the factorization failed.
    pub median_seconds: Option<f64>,
    pub gflops: Option<f64>,
    /// Present when checking was requested and a factor was produced.
    pub residual: Option<f64>,
    /// Hash of the factor bytes from the last repetition. Not serialized.
    pub factor_digest: Option<u64>,
    /// Failure description. Not serialized.
    pub error: Option<String>,
}

impl BenchRecord {
    /// The run produced a factor and, if checked, it passed.
    pub fn passed(&self, tolerance: f64) -> bool {
        self.error.is_none() && self.residual.is_none_or(|r| r <= tolerance)
    }
}

fn float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn row(r: &BenchRecord) -> [String; 10] {
    [
        r.dim.to_string(),
        r.bandwidth.to_string(),
        r.grid_dim.map(|n| n.to_string()).unwrap_or_default(),
        r.workers.to_string(),
        r.implementation.tag().to_string(),
        r.backend.clone(),
        r.repetitions.to_string(),
        float(r.median_seconds),
        float(r.gflops),
        float(r.residual),
    ]
}

/// Writes the header and one row per record.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `records` to `path`. An empty list is an error and leaves no file.
pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> std::io::Result<()> {
    if records.is_empty() {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "no records to write"));
    }
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file)).map_err(std::io::Error::other)
}

fn parse_opt<T: std::str::FromStr>(field: &str, name: &str) -> Result<Option<T>, String> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| format!("bad value `{field}` in column {name}"))
}

fn parse_req<T: std::str::FromStr>(field: &str, name: &str) -> Result<T, String> {
    parse_opt(field, name)?.ok_or_else(|| format!("column {name} is empty"))
}

/// Reads records written by [`write_csv`]. Fields that are not serialized
/// come back as `None`.
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<BenchRecord>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            let f = |i: usize| &rec[i];
            Ok(BenchRecord {
                dim: parse_req(f(0), "N")?,
                bandwidth: parse_req(f(1), "k")?,
                grid_dim: parse_opt(f(2), "n")?,
                workers: parse_req(f(3), "workers")?,
                implementation: f(4).parse()?,
                backend: f(5).to_string(),
                repetitions: parse_req(f(6), "reps")?,
                median_seconds: parse_opt(f(7), "median_seconds")?,
                gflops: parse_opt(f(8), "gflops")?,
                residual: parse_opt(f(9), "residual")?,
                factor_digest: None,
                error: None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BenchRecord {
        BenchRecord {
            dim: 500,
            bandwidth: 8,
            grid_dim: Some(3),
            workers: 2,
            implementation: Impl::BlockedParallel,
            backend: "native".into(),
            repetitions: 3,
            median_seconds: Some(0.1 + 0.2),
            gflops: Some(1.0 / 3.0),
            residual: Some(3.5e-17),
            factor_digest: None,
            error: None,
        }
    }

    #[test]
    fn one_record_two_lines() {
        let mut buf = Vec::new();
        write_csv(&[sample()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "N,k,n,workers,impl,backend,reps,median_seconds,gflops,residual");
        assert!(text.ends_with('\n'));
        assert!(lines[1].starts_with("500,8,3,2,blocked-parallel,native,3,3.0000000000000004e-1,"));
    }

    #[test]
    fn round_trip() {
        let mut reference = sample();
        reference.implementation = Impl::Reference;
        reference.grid_dim = None;
        reference.residual = None;
        let mut failed = sample();
        failed.median_seconds = None;
        failed.gflops = None;
        let records = vec![sample(), reference, failed];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn empty_list_creates_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert!(emit_csv(&[], &path).is_err());
        assert!(!path.exists());
        emit_csv(&[sample()], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(parse_csv("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "N,k,n,workers,impl,backend,reps,median_seconds,gflops,residual\nx,8,3,1,reference,native,1,,,\n";
        assert!(parse_csv(bad.as_bytes()).unwrap_err().contains("column N"));
    }
}
