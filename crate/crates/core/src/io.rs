//! File formats: square and condensed dissimilarity CSV, feature and
//! coordinate tables, adjacency JSON, weight and partition CSV.

use std::fs;
use std::path::Path;

use crate::condensed::condensed_len;
use crate::dissim::{AdjacencyList, DissimMatrix, FeatureTable, GeoPoints, WeightVector};
use crate::error::{Error, Result};
use crate::ward::Partition;

/// Relative tolerance when checking `d[i,j] == d[j,i]` in square input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// On-disk layout of a dissimilarity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissimFormat {
    /// `n` rows of `n` values, optional header row and id column.
    Square,
    /// `n=<count>` then one value per line in condensed order.
    Condensed,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_records(path: &Path, text: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("not a number: {field:?}")))
}

/// Detects the format from the first non-empty line.
pub fn detect_format(path: &Path) -> Result<DissimFormat> {
    let text = read_text(path)?;
    Ok(detect_in(&text))
}

fn detect_in(text: &str) -> DissimFormat {
    match text.lines().find(|l| !l.trim().is_empty()) {
        Some(l) if l.trim_start().starts_with("n=") => DissimFormat::Condensed,
        _ => DissimFormat::Square,
    }
}

/// Reads a matrix; `None` auto-detects the format.
pub fn read_dissim(path: &Path, format: Option<DissimFormat>) -> Result<DissimMatrix> {
    let text = read_text(path)?;
    match format.unwrap_or_else(|| detect_in(&text)) {
        DissimFormat::Square => parse_square(path, &text),
        DissimFormat::Condensed => parse_condensed(path, &text),
    }
}

pub fn write_dissim(d: &DissimMatrix, path: &Path, format: DissimFormat) -> Result<()> {
    let text = match format {
        DissimFormat::Square => square_text(d),
        DissimFormat::Condensed => condensed_text(d),
    };
    write_text(path, &text)
}

/// Condensed CSV text. Values use the shortest round-trip representation.
pub fn condensed_text(d: &DissimMatrix) -> String {
    let mut out = format!("n={}\n", d.n());
    for v in d.values() {
        out.push_str(&format!("{v}\n"));
    }
    out
}

/// Square CSV text with header row and id column.
pub fn square_text(d: &DissimMatrix) -> String {
    let ids = d.ids_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(ids.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (i, row) in d.to_square().into_iter().enumerate() {
        let mut rec = vec![ids[i].clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

fn parse_condensed(path: &Path, text: &str) -> Result<DissimMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, first) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let n: usize = first
        .strip_prefix("n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, line, "expected header `n=<count>`"))?;
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    let expected = condensed_len(n);
    let mut values = Vec::with_capacity(expected);
    for (line, l) in lines {
        if values.len() == expected {
            return Err(Error::parse(
                path,
                line,
                format!("more than {expected} values for n={n}"),
            ));
        }
        let v = parse_f64(path, line, l)?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::parse(
                path,
                line,
                format!("invalid dissimilarity {v}"),
            ));
        }
        values.push(v);
    }
    if values.len() != expected {
        return Err(Error::CondensedLength {
            n,
            expected,
            got: values.len(),
        });
    }
    DissimMatrix::from_condensed(n, values)
}

fn parse_square(path: &Path, text: &str) -> Result<DissimMatrix> {
    let mut records = csv_records(path, text)?;
    if records.is_empty() {
        return Err(Error::parse(path, 1, "empty file"));
    }
    let first_is_header = {
        let (_, first) = &records[0];
        first
            .iter()
            .enumerate()
            .any(|(c, f)| f.parse::<f64>().is_err() && !(c == 0 && f.is_empty()))
            && records.len() > 1
            && {
                // An id column alone makes the first field non-numeric, so
                // look past it before deciding.
                let rest_numeric = first[1..].iter().all(|f| f.parse::<f64>().is_ok());
                !(rest_numeric && first.len() == records.len() + 1)
            }
    };
    let header = if first_is_header {
        Some(records.remove(0).1)
    } else {
        None
    };
    let n = records.len();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    let has_id_col = records[0].1.len() == n + 1;
    let mut ids = Vec::with_capacity(n);
    let mut square = Vec::with_capacity(n);
    for (row, (line, rec)) in records.iter().enumerate() {
        let expected = if has_id_col { n + 1 } else { n };
        if rec.len() != expected {
            return Err(Error::parse(
                path,
                *line,
                format!("ragged row: {} fields, expected {expected}", rec.len()),
            ));
        }
        let fields = if has_id_col {
            ids.push(rec[0].clone());
            &rec[1..]
        } else {
            &rec[..]
        };
        let mut values = Vec::with_capacity(n);
        for f in fields {
            let v = parse_f64(path, *line, f)?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::parse(
                    path,
                    *line,
                    format!("invalid dissimilarity {v}"),
                ));
            }
            values.push(v);
        }
        if values[row] != 0.0 {
            return Err(Error::NonZeroDiagonal(row));
        }
        square.push(values);
    }
    for (i, row) in square.iter().enumerate() {
        for (j, &upper) in row.iter().enumerate().skip(i + 1) {
            let lower = square[j][i];
            if !crate::numeric::rel_close(upper, lower, SYMMETRY_TOLERANCE) {
                return Err(Error::Asymmetric { i, j, upper, lower });
            }
        }
    }
    let d = DissimMatrix::from_fn(n, |i, j| square[i][j])?;
    if has_id_col {
        return d.with_ids(ids);
    }
    match header {
        Some(h) => {
            let h: Vec<String> = if h.len() == n + 1 { h[1..].to_vec() } else { h };
            if h.len() != n {
                return Err(Error::parse(
                    path,
                    1,
                    format!("header has {} names for {n} columns", h.len()),
                ));
            }
            d.with_ids(h)
        }
        None => Ok(d),
    }
}

/// Feature CSV: header of column names, first column is the observation id.
pub fn read_features(path: &Path) -> Result<FeatureTable> {
    let text = read_text(path)?;
    let mut records = csv_records(path, &text)?.into_iter();
    let (_, header) = records
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    if header.len() < 2 {
        return Err(Error::parse(
            path,
            1,
            "need an id column and at least one feature column",
        ));
    }
    let columns = header[1..].to_vec();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (line, rec) in records {
        if rec.len() != header.len() {
            return Err(Error::parse(
                path,
                line,
                format!(
                    "ragged row: {} fields, expected {}",
                    rec.len(),
                    header.len()
                ),
            ));
        }
        ids.push(rec[0].clone());
        let mut row = Vec::with_capacity(columns.len());
        for (c, f) in rec[1..].iter().enumerate() {
            let v = parse_f64(path, line, f)?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("non-finite value in column {:?}", columns[c]),
                ));
            }
            row.push(v);
        }
        rows.push(row);
    }
    FeatureTable::new(ids, columns, rows)
}

/// Coordinates CSV with columns `id,lat,lon`.
pub fn read_coords(path: &Path) -> Result<GeoPoints> {
    let text = read_text(path)?;
    let mut records = csv_records(path, &text)?.into_iter();
    let (_, header) = records
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::parse(path, 1, format!("missing column {name:?}")))
    };
    let (ci, clat, clon) = (col("id")?, col("lat")?, col("lon")?);
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for (line, rec) in records {
        if rec.len() != header.len() {
            return Err(Error::parse(path, line, "ragged row"));
        }
        let lat = parse_f64(path, line, &rec[clat])?;
        let lon = parse_f64(path, line, &rec[clon])?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::parse(
                path,
                line,
                format!("coordinate out of range: lat={lat}, lon={lon}"),
            ));
        }
        ids.push(rec[ci].clone());
        coords.push((lat, lon));
    }
    GeoPoints::new(ids, coords)
}

/// Adjacency JSON: object mapping id to an array of neighbour ids. Key order
/// defines observation order.
pub fn read_adjacency(path: &Path) -> Result<AdjacencyList> {
    let text = read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse(path, 1, "expected a JSON object of id -> [neighbour ids]"))?;
    let mut entries = Vec::with_capacity(obj.len());
    for (id, list) in obj {
        let arr = list
            .as_array()
            .ok_or_else(|| Error::parse(path, 0, format!("neighbours of {id} are not an array")))?;
        let names = arr
            .iter()
            .map(json_id)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Error::parse(
                    path,
                    0,
                    format!("neighbours of {id} must be strings or integers"),
                )
            })?;
        entries.push((id.clone(), names));
    }
    AdjacencyList::from_named(entries)
}

/// Renders a JSON string or integer as an id.
pub fn json_id(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => Some(n.to_string()),
        _ => None,
    }
}

/// Weights CSV: `id,weight` (header optional) or one weight per line.
/// Returns ids when present.
pub fn read_weights(path: &Path) -> Result<(Option<Vec<String>>, WeightVector)> {
    let text = read_text(path)?;
    let mut records = csv_records(path, &text)?;
    if records.is_empty() {
        return Err(Error::parse(path, 1, "empty file"));
    }
    let value_col = records[0].1.len() - 1;
    if records[0].1[value_col].parse::<f64>().is_err() {
        records.remove(0);
    }
    let mut ids = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in records {
        if rec.len() != value_col + 1 {
            return Err(Error::parse(path, line, "ragged row"));
        }
        let w = parse_f64(path, line, &rec[value_col])?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::parse(
                path,
                line,
                format!("weight {w} is not positive"),
            ));
        }
        if value_col > 0 {
            ids.push(rec[0].clone());
        }
        weights.push(w);
    }
    let ids = (value_col > 0).then_some(ids);
    Ok((ids, WeightVector::new(weights)?))
}

/// Reads an id list: one id per line, or the first column of a CSV with a header.
pub fn read_ids(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let records = csv_records(path, &text)?;
    let mut ids: Vec<String> = records.into_iter().map(|(_, r)| r[0].clone()).collect();
    if ids.first().is_some_and(|h| h == "id") {
        ids.remove(0);
    }
    Ok(ids)
}

/// Partition CSV text: header `id,label`, one row per observation.
pub fn partition_text(ids: &[String], p: &Partition) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "label"]).expect("in-memory write");
    for (id, label) in ids.iter().zip(p.labels()) {
        w.write_record([id.as_str(), &label.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

pub fn write_partition(path: &Path, ids: &[String], p: &Partition) -> Result<()> {
    write_text(path, &partition_text(ids, p))
}

/// Reads `id,label` rows. Labels are returned as read, without renumbering.
pub fn read_labels(path: &Path) -> Result<Vec<(String, usize)>> {
    let text = read_text(path)?;
    let mut records = csv_records(path, &text)?;
    if records
        .first()
        .is_some_and(|(_, r)| r.len() == 2 && r[1].parse::<usize>().is_err())
    {
        records.remove(0);
    }
    records
        .into_iter()
        .map(|(line, rec)| {
            if rec.len() != 2 {
                return Err(Error::parse(path, line, "expected `id,label`"));
            }
            let label = rec[1]
                .parse::<usize>()
                .map_err(|_| Error::parse(path, line, format!("bad label {:?}", rec[1])))?;
            Ok((rec[0].clone(), label))
        })
        .collect()
}
