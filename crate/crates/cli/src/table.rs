//! CSV input and output: comma-separated, `.` decimal, first row is a header.

use std::path::Path;

use pwlfit::{CurveModel, EvalColumn, EvalSet, WeightedPoint};

use crate::commands::{read, CliError, CliResult};

/// Suffix of the teacher-output column paired with each feature column.
pub const TEACHER_SUFFIX: &str = ":teacher";

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes())
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn number(field: Option<&str>, row: usize, name: &str) -> CliResult<f64> {
    let s = field.unwrap_or("").trim();
    s.parse()
        .map_err(|_| CliError::Data(format!("row {row}: column `{name}` value `{s}` is not a number")))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Data(format!("csv: {e}"))
}

/// Reads `x,y[,weight]`.
pub fn read_points(path: &Path) -> CliResult<Vec<WeightedPoint>> {
    let text = read(path)?;
    let mut rdr = reader(&text);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let need = |n| column(&headers, n).ok_or_else(|| CliError::Data(format!("{}: missing `{n}` column", path.display())));
    let (xi, yi) = (need("x")?, need("y")?);
    let wi = column(&headers, "weight");
    let mut points = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = r + 2;
        let x = number(rec.get(xi), row, "x")?;
        let y = number(rec.get(yi), row, "y")?;
        let w = match wi {
            Some(i) => number(rec.get(i), row, "weight")?,
            None => 1.0,
        };
        points.push(WeightedPoint::new(x, y, w));
    }
    pwlfit::PointSet::new(points)
        .map(|p| p.into_inner())
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Appends a `score` column to every row of a feature CSV.
pub fn score_csv(model: &CurveModel, text: &str) -> CliResult<String> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let mut indices = Vec::with_capacity(model.components().len());
    for c in model.components() {
        let i = column(&headers, c.name())
            .ok_or_else(|| CliError::Data(format!("missing feature column `{}`", c.name())))?;
        indices.push(i);
    }
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header_out = headers.clone();
    header_out.push_field("score");
    out.write_record(&header_out).map_err(csv_error)?;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = r + 2;
        let mut values = Vec::with_capacity(indices.len());
        for (c, &i) in model.components().iter().zip(&indices) {
            values.push(number(rec.get(i), row, c.name())?);
        }
        let mut k = 0;
        let score = model
            .eval_with(|_| {
                k += 1;
                values.get(k - 1).copied()
            })
            .map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        let mut rec_out = rec.clone();
        rec_out.push_field(&score.to_string());
        out.write_record(&rec_out).map_err(csv_error)?;
    }
    let bytes = out.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Data(e.to_string()))
}

/// Reads feature values and teacher outputs for the named features.
pub fn read_eval_set(text: &str, features: &[&str]) -> CliResult<EvalSet> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let mut cols = Vec::with_capacity(features.len());
    for &name in features {
        let teacher_name = format!("{name}{TEACHER_SUFFIX}");
        let missing = |n: &str| CliError::Data(format!("missing column `{n}`"));
        let vi = column(&headers, name).ok_or_else(|| missing(name))?;
        let ti = column(&headers, &teacher_name).ok_or_else(|| missing(&teacher_name))?;
        cols.push((name, teacher_name, vi, ti, Vec::new(), Vec::new()));
    }
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = r + 2;
        for (name, teacher_name, vi, ti, values, teacher) in cols.iter_mut() {
            values.push(number(rec.get(*vi), row, name)?);
            teacher.push(number(rec.get(*ti), row, teacher_name)?);
        }
    }
    let columns = cols
        .into_iter()
        .map(|(name, _, _, _, values, teacher)| EvalColumn { name: name.to_string(), values, teacher })
        .collect();
    EvalSet::new(columns).map_err(CliError::from)
}
