//! CSV tables: feature matrices and attribution sets.

use std::io::{Read, Write};

use lagshap_core::explain::Attribution;
use lagshap_core::{FeatureMatrix, YearMonth};

use crate::error::{AppError, AppResult};

/// Writes `date,<features..>,target`. Values use the shortest exact decimal
/// form, so reading the file back gives bit-identical numbers.
pub fn write_feature_matrix_csv<W: Write>(fm: &FeatureMatrix, out: W) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string()];
    header.extend(fm.columns.iter().cloned());
    header.push("target".into());
    w.write_record(&header)?;
    for ((t, row), y) in fm.times.iter().zip(&fm.rows).zip(&fm.target) {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        rec.push(y.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| AppError::io("<feature csv>", e))?;
    Ok(())
}

pub fn read_feature_matrix_csv<R: Read>(input: R) -> AppResult<FeatureMatrix> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "date" || &header[header.len() - 1] != "target" {
        return Err(AppError::Parse { line: 1, message: "expected header `date,<features..>,target`".into() });
    }
    let columns: Vec<String> = header.iter().skip(1).take(header.len() - 2).map(String::from).collect();
    let (mut times, mut rows, mut target) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| AppError::Parse { line, message };
        if rec.len() != header.len() {
            return Err(bad(format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        times.push(rec[0].parse::<YearMonth>().map_err(|e| bad(format!("malformed date {:?}: {e}", &rec[0])))?);
        let nums = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("non-numeric value {s:?}"))))
            .collect::<AppResult<Vec<f64>>>()?;
        let (y, row) = nums.split_last().expect("at least the target");
        rows.push(row.to_vec());
        target.push(*y);
    }
    Ok(FeatureMatrix::new(times, columns, rows, target)?)
}

/// One row per explained instance: `date,<features..>,baseline,prediction`.
pub fn write_attributions_csv<W: Write>(times: &[YearMonth], attrs: &[Attribution], out: W) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = attrs.first() {
        let mut header = vec!["date".to_string()];
        header.extend(first.features.iter().cloned());
        header.extend(["baseline".to_string(), "prediction".to_string()]);
        w.write_record(&header)?;
    }
    for (t, a) in times.iter().zip(attrs) {
        let mut rec = vec![t.to_string()];
        rec.extend(a.phi.iter().map(f64::to_string));
        rec.push(a.baseline_value.to_string());
        rec.push(a.prediction.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| AppError::io("<attribution csv>", e))?;
    Ok(())
}

/// Writes any sequence of serializable records with a header row.
pub fn write_records_csv<W: Write, T: serde::Serialize>(records: &[T], out: W) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| AppError::io("<csv>", e))?;
    Ok(())
}
