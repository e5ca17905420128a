//! CSV ingestion and output for series (`t,y`) and regression samples (`t,y,x1..xd`).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::seriesgen::{Origin, RegressionSample, UnivariateSeries};

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv { line, msg: e.to_string() }
}

fn parse_field(record: &csv::StringRecord, k: usize, name: &str) -> Result<f64> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(k).unwrap_or("").trim();
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Csv { line, msg: format!("column `{name}`: `{raw}` is not a finite number") })
}

fn check_header(headers: &csv::StringRecord, expected: &[String]) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Csv { line: 1, msg: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")) });
    }
    Ok(())
}

fn rows<R: Read>(reader: R) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(&e))?.clone();
    let records = rdr.records().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| csv_error(&e))?;
    Ok((headers, records))
}

/// Reads `t,y`; rows are taken in file order as `Y_0, Y_1, ...`.
pub fn read_series<R: Read>(reader: R, source: Option<String>) -> Result<UnivariateSeries> {
    let (headers, records) = rows(reader)?;
    check_header(&headers, &["t".into(), "y".into()])?;
    let values = records.iter().map(|r| parse_field(r, 1, "y")).collect::<Result<Vec<_>>>()?;
    UnivariateSeries::new(values, Origin::Ingested { source })
}

pub fn read_series_file(path: &Path) -> Result<UnivariateSeries> {
    read_series(std::fs::File::open(path)?, Some(path.display().to_string()))
}

pub fn write_series<W: Write>(series: &UnivariateSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Csv { line: 0, msg: e.to_string() };
    w.write_record(["t", "y"]).map_err(csv_err)?;
    for (t, y) in series.values().iter().enumerate() {
        w.write_record([t.to_string(), y.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `t,y,x1..xd` with `d` taken from the header.
pub fn read_sample<R: Read>(reader: R, source: Option<String>) -> Result<RegressionSample> {
    let (headers, records) = rows(reader)?;
    let d = headers.len().saturating_sub(2);
    if d == 0 {
        return Err(Error::Csv { line: 1, msg: "expected header `t,y,x1,...,xd` with d >= 1".into() });
    }
    let mut expected = vec!["t".to_string(), "y".to_string()];
    expected.extend((1..=d).map(|k| format!("x{k}")));
    check_header(&headers, &expected)?;
    let mut responses = Vec::with_capacity(records.len());
    let mut regressors = Vec::with_capacity(records.len());
    for r in &records {
        responses.push(parse_field(r, 1, "y")?);
        regressors.push((0..d).map(|k| parse_field(r, k + 2, &expected[k + 2])).collect::<Result<Vec<_>>>()?);
    }
    RegressionSample::new(responses, regressors, Origin::Ingested { source })
}

pub fn read_sample_file(path: &Path) -> Result<RegressionSample> {
    read_sample(std::fs::File::open(path)?, Some(path.display().to_string()))
}

pub fn write_sample<W: Write>(sample: &RegressionSample, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Csv { line: 0, msg: e.to_string() };
    let mut header = vec!["t".to_string(), "y".to_string()];
    header.extend((1..=sample.d()).map(|k| format!("x{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for (i, (y, x)) in sample.responses().iter().zip(sample.regressors()).enumerate() {
        let mut rec = vec![(i + 1).to_string(), y.to_string()];
        rec.extend(x.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
