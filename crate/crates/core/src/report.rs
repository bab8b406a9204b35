//! CSV reports. One row per (step size, start point) cell; summary lines
//! follow the rows as `#` comments, which the reader skips.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "fn_id",
    "regime",
    "p",
    "n",
    "epsilon",
    "x0",
    "estimate",
    "stderr",
    "abs_error",
    "n_samples",
    "mean_steps",
    "seed",
];

#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    pub fn_id: String,
    pub regime: String,
    pub p: f64,
    pub n: usize,
    pub epsilon: f64,
    pub x0: Vec<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub abs_error: f64,
    pub n_samples: usize,
    pub mean_steps: f64,
    pub seed: u64,
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Config(format!("csv column `{field}`: bad number `{s}`")))
}

impl PointRecord {
    fn to_row(&self) -> Vec<String> {
        vec![
            self.fn_id.clone(),
            self.regime.clone(),
            fmt_f64(self.p),
            self.n.to_string(),
            fmt_f64(self.epsilon),
            self.x0.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(";"),
            fmt_f64(self.estimate),
            fmt_f64(self.stderr),
            fmt_f64(self.abs_error),
            self.n_samples.to_string(),
            fmt_f64(self.mean_steps),
            self.seed.to_string(),
        ]
    }

    fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Config(format!(
                "csv row has {} fields, expected {}",
                row.len(),
                CSV_HEADER.len()
            )));
        }
        let int = |i: usize| -> Result<u64> {
            row[i]
                .parse()
                .map_err(|_| Error::Config(format!("csv column `{}`: bad integer `{}`", CSV_HEADER[i], &row[i])))
        };
        let x0 = if row[5].is_empty() {
            Vec::new()
        } else {
            row[5].split(';').map(|c| parse_f64("x0", c)).collect::<Result<_>>()?
        };
        Ok(Self {
            fn_id: row[0].to_string(),
            regime: row[1].to_string(),
            p: parse_f64("p", &row[2])?,
            n: int(3)? as usize,
            epsilon: parse_f64("epsilon", &row[4])?,
            x0,
            estimate: parse_f64("estimate", &row[6])?,
            stderr: parse_f64("stderr", &row[7])?,
            abs_error: parse_f64("abs_error", &row[8])?,
            n_samples: int(9)? as usize,
            mean_steps: parse_f64("mean_steps", &row[10])?,
            seed: int(11)?,
        })
    }
}

pub fn write_records<W: Write>(out: W, records: &[PointRecord], summary: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush()?;
    let mut inner = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    for line in summary {
        for part in line.lines() {
            writeln!(inner, "# {part}")?;
        }
    }
    inner.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<PointRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!("unexpected csv header: {header:?}")));
    }
    rdr.records().map(|row| PointRecord::from_row(&row?)).collect()
}
