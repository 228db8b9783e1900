//! Series input: the bundled fixture and `date,value` CSV files.

use std::path::Path;

use lagshap_core::{TimeSeries, YearMonth};

use crate::error::{AppError, AppResult};

/// Monthly international airline passengers (thousands), 1949-01 to 1960-12.
pub const AIRPASSENGERS_CSV: &str = include_str!("../data/airpassengers.csv");

/// Input name that selects the bundled fixture.
pub const BUILTIN_AIRPASSENGERS: &str = "builtin:airpassengers";

pub fn airpassengers() -> TimeSeries {
    parse_series_csv(AIRPASSENGERS_CSV).expect("bundled fixture is valid")
}

/// Loads `builtin:airpassengers` or a CSV file.
pub fn load_series(input: &str) -> AppResult<TimeSeries> {
    if input == BUILTIN_AIRPASSENGERS {
        return Ok(airpassengers());
    }
    load_csv(input)
}

pub fn load_csv(path: impl AsRef<Path>) -> AppResult<TimeSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_series_csv(&text)
}

/// Parses `date,value` rows. A first line whose date does not parse is
/// treated as a header. Dates must advance by exactly one month.
pub fn parse_series_csv(text: &str) -> AppResult<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut start: Option<YearMonth> = None;
    let mut prev: Option<YearMonth> = None;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let bad = |message: String| AppError::Parse { line, message };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 fields `date,value`, found {}", record.len())));
        }
        let date = match record[0].parse::<YearMonth>() {
            Ok(d) => d,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(bad(format!("malformed date {:?}: {e}", &record[0]))),
        };
        let value: f64 = record[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| bad(format!("non-numeric value {:?}", &record[1])))?;
        if let Some(p) = prev {
            let step = p.months_until(date);
            if step <= 0 {
                return Err(bad(format!("date {date} does not follow {p}")));
            }
            if step > 1 {
                return Err(bad(format!("gap: expected {} after {p}, found {date}", p.succ())));
            }
        } else {
            start = Some(date);
        }
        prev = Some(date);
        values.push(value);
    }
    let start = start.ok_or(AppError::Parse { line: 1, message: "no observations".into() })?;
    Ok(TimeSeries::new(start, values)?)
}
