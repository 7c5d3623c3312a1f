//! CSV rendering of sweep results.

use std::io::{self, Write};

use crate::sweep::{Row, SweepResult};

pub const HEADER: [&str; 11] = [
    "experiment",
    "param",
    "x",
    "variant",
    "method",
    "metric",
    "value",
    "stderr",
    "trials",
    "config_hash",
    "status",
];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

fn row_fields(row: &Row) -> [String; 11] {
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    [
        row.experiment.clone(),
        row.param.clone(),
        fmt_float(row.x),
        row.variant.clone(),
        row.method.as_str().to_string(),
        row.metric.as_str().to_string(),
        opt(row.value),
        opt(row.stderr),
        row.trials.map(|t| t.to_string()).unwrap_or_default(),
        row.config_hash.clone(),
        match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("error: {e}"),
        },
    ]
}

/// Writes a `#` comment block with every resolved config, then the table.
pub fn write_csv<W: Write>(mut out: W, result: &SweepResult) -> io::Result<()> {
    for (hash, rendered) in &result.configs {
        writeln!(out, "# config {hash}")?;
        for line in rendered.lines() {
            writeln!(out, "#   {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in &result.rows {
        w.write_record(row_fields(row))?;
    }
    w.flush()
}

pub fn to_csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, result).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
